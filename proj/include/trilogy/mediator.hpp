#pragma once

#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "trilogy/broker.hpp"
#include "trilogy/net.hpp"
#include "trilogy/ontology.hpp"
#include "trilogy/protocol.hpp"

namespace trilogy::agentbus {

// A resource agent's registration: its descriptor plus where to reach it.
struct Advertisement {
    broker::BrokerDescriptor descriptor;
    std::string address;  // host:port
    std::string sender;   // agent name that registered it
};

struct RouteEntry {
    std::string resource_name;
    std::string address;

    bool operator==(const RouteEntry&) const = default;
};

// The yellow-pages role: maps topics and keywords to the uniquely named
// resources that serve them. Topic routing expands downward through the
// ontology, so a resource advertising a child topic answers queries for
// any of its ancestors.
class Mediator {
public:
    explicit Mediator(std::shared_ptr<const ontology::Ontology> onto);

    // Re-advertisement by the same agent replaces the prior entry; a
    // different agent claiming an existing resource_name is rejected
    // (resource names are unique system-wide). Throws InvalidInput.
    void register_advert(const Advertisement& advert);

    // Resources advertising any topic in subtree(topic); if the topic is
    // not an ontology concept, exact (case-insensitive) matches only.
    std::vector<RouteEntry> route_topic(const std::string& topic) const;

    // Resources whose advertised keyword list contains the term.
    std::vector<RouteEntry> route_keyword(const std::string& term) const;

    std::vector<RouteEntry> route(const std::string& kind, const std::string& value) const;

    std::optional<Advertisement> advertisement(const std::string& resource_name) const;
    std::size_t size() const;
    void set_ontology(std::shared_ptr<const ontology::Ontology> onto);

private:
    std::vector<RouteEntry> collect(
        const std::function<bool(const Advertisement&)>& matches) const;

    std::shared_ptr<const ontology::Ontology> ontology_;
    std::map<std::string, Advertisement> registry_;  // folded resource name -> advert
    mutable std::mutex mutex_;
};

// Wire wrapper: ADVERTISE registers (acknowledged with SERVICE_RESULT),
// ROUTE_REQUEST answers with ROUTE_REPLY. Inbox is processed one message
// at a time.
class MediatorServer {
public:
    MediatorServer(std::string name, std::shared_ptr<const ontology::Ontology> onto,
                   TcpListener listener);
    ~MediatorServer();

    void start();
    void stop();
    const Address& address() const { return server_.address(); }
    Mediator& mediator() { return mediator_; }

private:
    void handle(const Message& message, std::shared_ptr<MessageSink> sink);

    std::string agent_id_;
    Mediator mediator_;
    AgentLoop loop_;
    LineServer server_;
};

}  // namespace trilogy::agentbus
