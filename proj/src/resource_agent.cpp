#include "trilogy/resource_agent.hpp"

#include "trilogy/client.hpp"
#include "trilogy/errors.hpp"

namespace trilogy::agentbus {

using nlohmann::json;

ResourceAgent::ResourceAgent(std::string name, std::shared_ptr<Resource> resource,
                             std::string role)
    : agent_id_(agent_name(role, name)), resource_(std::move(resource)) {
    if (!resource_) throw InvalidInput("resource agent needs a resource");
}

ResourceAgent::~ResourceAgent() { stop(); }

void ResourceAgent::start(TcpListener listener) {
    loop_.start();
    server_ = std::make_unique<LineServer>(
        std::move(listener), agent_id_,
        [this](const Message& message, std::shared_ptr<MessageSink> sink) {
            handle(message, std::move(sink));
        });
    server_->start();
}

void ResourceAgent::stop() {
    if (server_) server_->stop();
    loop_.stop();
    // Workers post their completion to the loop; once the loop has
    // drained, anything left here is a job whose completion ran already
    // or a thread that finished while we were stopping.
    for (auto& [sequence, worker] : workers_) {
        if (worker.joinable()) worker.join();
    }
    workers_.clear();
}

const Address& ResourceAgent::address() const {
    static const Address none{};
    return server_ ? server_->address() : none;
}

std::vector<std::string> ResourceAgent::advertise(const std::vector<std::string>& mediators) {
    Advertisement advert;
    advert.descriptor = resource_->descriptor();
    advert.address = address().to_string();
    advert.sender = agent_id_;

    std::vector<std::string> errors;
    for (const std::string& mediator : mediators) {
        std::string error = advertise_resource(mediator, advert);
        if (!error.empty()) errors.push_back(mediator + ": " + error);
    }
    return errors;
}

void ResourceAgent::handle(const Message& message, std::shared_ptr<MessageSink> sink) {
    if (message.type != MessageType::ServiceRequest) {
        Message reply;
        reply.id = next_message_id();
        reply.type = MessageType::ServiceError;
        reply.sender = agent_id_;
        reply.reply_to = message.id;
        reply.body = {{"reason", std::string("resource agent cannot handle ") +
                                     message_type_name(message.type)},
                      {"failure_class", kFailBadInput}};
        sink->try_send(reply);
        return;
    }
    loop_.post([this, message, sink = std::move(sink)] { handle_request(message, sink); });
}

void ResourceAgent::send_error(const Message& request, const std::shared_ptr<MessageSink>& sink,
                               const std::string& reason, const std::string& failure_class) {
    Message reply;
    reply.id = next_message_id();
    reply.type = MessageType::ServiceError;
    reply.sender = agent_id_;
    reply.reply_to = request.id;
    reply.body = {{"reason", reason}, {"failure_class", failure_class}};
    sink->try_send(reply);
}

void ResourceAgent::handle_request(const Message& message, std::shared_ptr<MessageSink> sink) {
    // At-least-once delivery: a request id we have already accepted is a
    // duplicate and must not be scheduled twice.
    if (!seen_requests_.insert(message.id).second) return;

    Job job;
    job.request = message;
    job.sink = std::move(sink);
    try {
        job.service = message.body.at("service").get<std::string>();
        if (message.body.contains("inputs"))
            job.inputs = message.body.at("inputs").get<std::vector<std::string>>();
        job.user = message.body.value("user", "");
    } catch (const json::exception& e) {
        send_error(message, job.sink, std::string("malformed service request: ") + e.what(),
                   kFailBadInput);
        return;
    }

    broker::BrokerDescriptor descriptor = resource_->descriptor();
    const broker::ServiceSpec* spec = descriptor.find_service(job.service);
    if (!spec) {
        send_error(message, job.sink, "unknown service \"" + job.service + "\"", kFailBadInput);
        return;
    }
    // Arity mismatches are rejected before queuing.
    if (static_cast<int>(job.inputs.size()) != spec->input_arity) {
        send_error(message, job.sink,
                   "service \"" + job.service + "\" expects " +
                       std::to_string(spec->input_arity) + " inputs, got " +
                       std::to_string(job.inputs.size()),
                   kFailBadInput);
        return;
    }

    ServiceState& state = services_[job.service];
    if (state.running < spec->max_instances) {
        start_job(std::move(job), spec->max_instances);
        return;
    }

    state.queue.push_back(std::move(job));
    Job& queued = state.queue.back();
    queued.last_position = static_cast<int>(state.queue.size());
    Message notice;
    notice.id = next_message_id();
    notice.type = MessageType::ServiceQueued;
    notice.sender = agent_id_;
    notice.reply_to = queued.request.id;
    notice.body = {{"service", queued.service}, {"position", queued.last_position}};
    queued.sink->try_send(notice);
}

void ResourceAgent::start_job(Job job, int max_instances) {
    ServiceState& state = services_[job.service];
    ++state.running;
    job.sequence = next_sequence_++;

    std::uint64_t sequence = job.sequence;
    auto shared_job = std::make_shared<Job>(std::move(job));
    workers_[sequence] = std::thread([this, shared_job, max_instances] {
        json result;
        std::string error_reason;
        std::string error_class;
        try {
            result = resource_->invoke(shared_job->service, shared_job->inputs, shared_job->user);
        } catch (const ResourceFailure& e) {
            error_reason = e.what();
            error_class = e.failure_class();
        } catch (const InvalidInput& e) {
            error_reason = e.what();
            error_class = kFailBadInput;
        } catch (const std::exception& e) {
            error_reason = e.what();
            error_class = kFailResourceCrash;
        }
        loop_.post([this, shared_job, max_instances, result = std::move(result),
                    error_reason = std::move(error_reason),
                    error_class = std::move(error_class)]() mutable {
            finish_job(*shared_job, max_instances, std::move(result), std::move(error_reason),
                       std::move(error_class));
        });
    });
}

void ResourceAgent::finish_job(const Job& job, int max_instances, json result,
                               std::string error_reason, std::string error_class) {
    auto worker = workers_.find(job.sequence);
    if (worker != workers_.end()) {
        if (worker->second.joinable()) worker->second.join();
        workers_.erase(worker);
    }

    Message reply;
    reply.id = next_message_id();
    reply.sender = agent_id_;
    reply.reply_to = job.request.id;
    if (error_class.empty()) {
        reply.type = MessageType::ServiceResult;
        reply.body = result.is_object() ? result : json::object();
        reply.body["service"] = job.service;
    } else {
        reply.type = MessageType::ServiceError;
        reply.body = {{"reason", error_reason},
                      {"failure_class", error_class},
                      {"service", job.service}};
    }
    job.sink->try_send(reply);

    ServiceState& state = services_[job.service];
    --state.running;
    while (!state.queue.empty() && state.running < max_instances) {
        Job next = std::move(state.queue.front());
        state.queue.pop_front();
        start_job(std::move(next), max_instances);
    }
    announce_positions(state);
}

void ResourceAgent::announce_positions(ServiceState& state) {
    int position = 0;
    for (Job& job : state.queue) {
        ++position;
        if (job.last_position == position) continue;
        job.last_position = position;
        Message notice;
        notice.id = next_message_id();
        notice.type = MessageType::ServiceQueued;
        notice.sender = agent_id_;
        notice.reply_to = job.request.id;
        notice.body = {{"service", job.service}, {"position", position}};
        job.sink->try_send(notice);
    }
}

}  // namespace trilogy::agentbus
