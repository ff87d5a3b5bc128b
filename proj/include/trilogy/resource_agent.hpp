#pragma once

#include <deque>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "trilogy/broker.hpp"
#include "trilogy/errors.hpp"
#include "trilogy/net.hpp"
#include "trilogy/protocol.hpp"

namespace trilogy::agentbus {

// Thrown by a resource to report a classified failure; the reason text is
// relayed verbatim to the requesting agent.
class ResourceFailure : public Error {
public:
    ResourceFailure(std::string failure_class, const std::string& reason)
        : Error(reason), failure_class_(std::move(failure_class)) {}

    const std::string& failure_class() const { return failure_class_; }

private:
    std::string failure_class_;
};

// Anything a resource agent can manage: a broker, an experiment rig, a
// software tool. invoke() runs on a worker thread and may block; it
// returns the service result payload or throws.
class Resource {
public:
    virtual ~Resource() = default;
    virtual broker::BrokerDescriptor descriptor() const = 0;
    virtual nlohmann::json invoke(const std::string& service,
                                  const std::vector<std::string>& inputs,
                                  const std::string& user) = 0;
};

// The generic wrapper around one resource (one agent per resource). It
// advertises the resource's descriptor, schedules incoming service
// requests against each service's max_instances with a FIFO queue, and
// relays results and failure reasons.
//
// Scheduling contract: a request that cannot run immediately is queued
// and answered at once with SERVICE_QUEUED carrying its 1-based queue
// position; whenever the queue moves, every still-queued requester gets a
// fresh SERVICE_QUEUED with its smaller position. Grants happen in exact
// arrival order. All scheduler state is touched only from the agent's
// inbox loop.
class ResourceAgent {
public:
    ResourceAgent(std::string name, std::shared_ptr<Resource> resource,
                  std::string role = "resource");
    ~ResourceAgent();

    void start(TcpListener listener);
    void stop();

    const Address& address() const;
    const std::string& agent_id() const { return agent_id_; }

    // Sends ADVERTISE to each mediator; returns one error string per
    // mediator that could not be reached or rejected the advertisement
    // (empty vector means all registrations succeeded).
    std::vector<std::string> advertise(const std::vector<std::string>& mediators);

private:
    struct Job {
        Message request;
        std::shared_ptr<MessageSink> sink;
        std::string service;
        std::vector<std::string> inputs;
        std::string user;
        int last_position = 0;
        std::uint64_t sequence = 0;
    };

    struct ServiceState {
        int running = 0;
        std::deque<Job> queue;
    };

    void handle(const Message& message, std::shared_ptr<MessageSink> sink);
    void handle_request(const Message& message, std::shared_ptr<MessageSink> sink);
    void start_job(Job job, int max_instances);
    void finish_job(const Job& job, int max_instances, nlohmann::json result,
                    std::string error_reason, std::string error_class);
    void announce_positions(ServiceState& state);
    void send_error(const Message& request, const std::shared_ptr<MessageSink>& sink,
                    const std::string& reason, const std::string& failure_class);

    std::string agent_id_;
    std::shared_ptr<Resource> resource_;
    AgentLoop loop_;
    std::unique_ptr<LineServer> server_;
    TcpListener pending_listener_;

    // Inbox-thread state.
    std::map<std::string, ServiceState> services_;
    std::set<std::string> seen_requests_;  // idempotence over at-least-once delivery
    std::map<std::uint64_t, std::thread> workers_;
    std::uint64_t next_sequence_ = 1;
};

}  // namespace trilogy::agentbus
