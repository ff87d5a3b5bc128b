#pragma once

#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "trilogy/broker.hpp"

namespace trilogy::agentbus {

// The eight message kinds every agent speaks. One message is one line of
// UTF-8 JSON terminated by LF, with top-level fields `id`, `type`,
// `sender`, `reply_to` (optional) and `body` (object).
enum class MessageType {
    Advertise,
    RouteRequest,
    RouteReply,
    ServiceRequest,
    ServiceQueued,
    ServiceResult,
    ServiceError,
    Notify,
};

const char* message_type_name(MessageType type);
MessageType message_type_from_name(std::string_view name);

struct Message {
    std::string id;
    MessageType type = MessageType::Notify;
    std::string sender;
    std::string reply_to;  // empty when not a reply
    nlohmann::json body = nlohmann::json::object();
};

// One LF-terminated line. Throws ProtocolError if the message is not
// encodable (e.g. an empty id).
std::string encode(const Message& message);

// Decodes one line (with or without the trailing LF). Throws ProtocolError
// on anything that is not a well-formed message.
Message decode(std::string_view line);

// Process-unique message ids: "m<counter>-<session>".
std::string next_message_id();

// Agent naming convention: "broker:<name>", "mediator:<name>",
// "paa:<user>", "resource:<name>".
std::string agent_name(std::string_view role, std::string_view name);

// JSON codecs for the descriptor types that ride inside message bodies.
nlohmann::json descriptor_to_json(const broker::BrokerDescriptor& d);
broker::BrokerDescriptor descriptor_from_json(const nlohmann::json& j);

constexpr const char* kServiceRunExperiment = "run-experiment";

// Failure classes carried by SERVICE_ERROR.
constexpr const char* kFailResourceCrash = "resource_crash";
constexpr const char* kFailBadInput = "bad_input";
constexpr const char* kFailTimeout = "timeout";

}  // namespace trilogy::agentbus
