#include "trilogy/protocol.hpp"

#include <atomic>
#include <random>

#include "trilogy/errors.hpp"
#include "trilogy/text.hpp"

namespace trilogy::agentbus {

using nlohmann::json;

const char* message_type_name(MessageType type) {
    switch (type) {
        case MessageType::Advertise: return "ADVERTISE";
        case MessageType::RouteRequest: return "ROUTE_REQUEST";
        case MessageType::RouteReply: return "ROUTE_REPLY";
        case MessageType::ServiceRequest: return "SERVICE_REQUEST";
        case MessageType::ServiceQueued: return "SERVICE_QUEUED";
        case MessageType::ServiceResult: return "SERVICE_RESULT";
        case MessageType::ServiceError: return "SERVICE_ERROR";
        case MessageType::Notify: return "NOTIFY";
    }
    return "NOTIFY";
}

MessageType message_type_from_name(std::string_view name) {
    if (name == "ADVERTISE") return MessageType::Advertise;
    if (name == "ROUTE_REQUEST") return MessageType::RouteRequest;
    if (name == "ROUTE_REPLY") return MessageType::RouteReply;
    if (name == "SERVICE_REQUEST") return MessageType::ServiceRequest;
    if (name == "SERVICE_QUEUED") return MessageType::ServiceQueued;
    if (name == "SERVICE_RESULT") return MessageType::ServiceResult;
    if (name == "SERVICE_ERROR") return MessageType::ServiceError;
    if (name == "NOTIFY") return MessageType::Notify;
    throw ProtocolError("unknown message type \"" + std::string(name) + "\"");
}

std::string encode(const Message& message) {
    if (message.id.empty()) throw ProtocolError("message id must not be empty");
    if (message.sender.empty()) throw ProtocolError("message sender must not be empty");
    json j = {
        {"id", message.id},
        {"type", message_type_name(message.type)},
        {"sender", message.sender},
        {"body", message.body.is_null() ? json::object() : message.body},
    };
    if (!message.reply_to.empty()) j["reply_to"] = message.reply_to;
    return j.dump() + "\n";
}

Message decode(std::string_view line) {
    while (!line.empty() && (line.back() == '\n' || line.back() == '\r')) line.remove_suffix(1);
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) throw ProtocolError("message is not a JSON object");

    Message m;
    if (!j.contains("id") || !j["id"].is_string() || j["id"].get<std::string>().empty())
        throw ProtocolError("message is missing a non-empty string id");
    if (!j.contains("type") || !j["type"].is_string())
        throw ProtocolError("message is missing its type");
    if (!j.contains("sender") || !j["sender"].is_string())
        throw ProtocolError("message is missing its sender");
    m.id = j["id"].get<std::string>();
    m.type = message_type_from_name(j["type"].get<std::string>());
    m.sender = j["sender"].get<std::string>();
    if (j.contains("reply_to")) {
        if (!j["reply_to"].is_string()) throw ProtocolError("reply_to must be a string");
        m.reply_to = j["reply_to"].get<std::string>();
    }
    if (j.contains("body")) {
        if (!j["body"].is_object()) throw ProtocolError("body must be an object");
        m.body = j["body"];
    }
    return m;
}

std::string next_message_id() {
    static const std::string session = [] {
        std::random_device rd;
        std::mt19937_64 gen(rd());
        return text::to_hex(gen()).substr(8);
    }();
    static std::atomic<std::uint64_t> counter{0};
    return "m" + std::to_string(counter.fetch_add(1) + 1) + "-" + session;
}

std::string agent_name(std::string_view role, std::string_view name) {
    return std::string(role) + ":" + std::string(name);
}

json descriptor_to_json(const broker::BrokerDescriptor& d) {
    json services = json::array();
    for (const broker::ServiceSpec& s : d.services) {
        services.push_back({{"name", s.name},
                            {"input_arity", s.input_arity},
                            {"max_instances", s.max_instances}});
    }
    return {{"resource_name", d.resource_name},
            {"topics", d.topics},
            {"keywords", d.keywords},
            {"services", services}};
}

broker::BrokerDescriptor descriptor_from_json(const json& j) {
    if (!j.is_object()) throw ProtocolError("descriptor must be a JSON object");
    broker::BrokerDescriptor d;
    try {
        d.resource_name = j.at("resource_name").get<std::string>();
        if (j.contains("topics")) d.topics = j.at("topics").get<std::vector<std::string>>();
        if (j.contains("keywords")) d.keywords = j.at("keywords").get<std::vector<std::string>>();
        if (j.contains("services")) {
            for (const json& s : j.at("services")) {
                d.services.push_back(broker::ServiceSpec{
                    s.at("name").get<std::string>(),
                    s.value("input_arity", 1),
                    s.value("max_instances", 1),
                });
            }
        }
    } catch (const json::exception& e) {
        throw ProtocolError(std::string("malformed descriptor: ") + e.what());
    }
    return d;
}

}  // namespace trilogy::agentbus
