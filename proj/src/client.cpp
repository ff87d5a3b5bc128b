#include "trilogy/client.hpp"

#include "trilogy/errors.hpp"

namespace trilogy::agentbus {

using nlohmann::json;

namespace {

// Sends one message and waits for the reply that answers it, skipping
// anything unrelated that may arrive first.
Message exchange(TcpStream& stream, const Message& request) {
    stream.write_all(encode(request));
    std::string line;
    while (true) {
        if (!stream.read_line(line)) throw NetError("peer closed the connection");
        if (line.empty()) continue;
        Message reply = decode(line);
        if (reply.reply_to == request.id) return reply;
    }
}

}  // namespace

std::vector<RouteEntry> route_query(const std::string& mediator_address, const std::string& kind,
                                    const std::string& value, const std::string& sender,
                                    std::chrono::milliseconds timeout) {
    TcpStream stream = TcpStream::connect(parse_address(mediator_address));
    stream.set_receive_timeout(timeout);

    Message request;
    request.id = next_message_id();
    request.type = MessageType::RouteRequest;
    request.sender = sender;
    request.body = {{"kind", kind}, {"value", value}};

    Message reply = exchange(stream, request);
    if (reply.type == MessageType::ServiceError)
        throw Error("route request rejected: " + reply.body.value("reason", "unknown reason"));
    if (reply.type != MessageType::RouteReply)
        throw ProtocolError(std::string("expected ROUTE_REPLY, got ") +
                            message_type_name(reply.type));

    std::vector<RouteEntry> out;
    for (const json& r : reply.body.value("resources", json::array()))
        out.push_back(RouteEntry{r.value("name", ""), r.value("address", "")});
    return out;
}

std::string advertise_resource(const std::string& mediator_address, const Advertisement& advert,
                               std::chrono::milliseconds timeout) {
    try {
        TcpStream stream = TcpStream::connect(parse_address(mediator_address));
        stream.set_receive_timeout(timeout);

        Message request;
        request.id = next_message_id();
        request.type = MessageType::Advertise;
        request.sender = advert.sender;
        request.body = {{"descriptor", descriptor_to_json(advert.descriptor)},
                        {"address", advert.address}};

        Message reply = exchange(stream, request);
        if (reply.type == MessageType::ServiceResult) return {};
        return reply.body.value("reason", "advertisement rejected");
    } catch (const std::exception& e) {
        return e.what();
    }
}

ServiceCall::ServiceCall(const std::string& address, const std::string& service,
                         const std::vector<std::string>& inputs, const std::string& sender,
                         const std::string& user, std::chrono::milliseconds timeout)
    : stream_(TcpStream::connect(parse_address(address))) {
    stream_.set_receive_timeout(timeout);

    Message request;
    request.id = next_message_id();
    request.type = MessageType::ServiceRequest;
    request.sender = sender;
    request.body = {{"service", service}, {"inputs", inputs}, {"user", user}};
    request_id_ = request.id;
    stream_.write_all(encode(request));
}

Message ServiceCall::next() {
    std::string line;
    while (true) {
        if (!stream_.read_line(line)) throw NetError("peer closed the connection");
        if (line.empty()) continue;
        Message reply = decode(line);
        if (reply.reply_to == request_id_) return reply;
    }
}

ServiceOutcome request_service(const std::string& address, const std::string& service,
                               const std::vector<std::string>& inputs, const std::string& sender,
                               const std::string& user, std::chrono::milliseconds timeout) {
    ServiceCall call(address, service, inputs, sender, user, timeout);
    ServiceOutcome outcome;
    while (true) {
        Message reply = call.next();
        switch (reply.type) {
            case MessageType::ServiceQueued:
                outcome.queued_positions.push_back(reply.body.value("position", 0));
                break;
            case MessageType::ServiceResult:
                outcome.ok = true;
                outcome.payload = reply.body;
                return outcome;
            case MessageType::ServiceError:
                outcome.ok = false;
                outcome.error_reason = reply.body.value("reason", "");
                outcome.failure_class = reply.body.value("failure_class", "");
                return outcome;
            default:
                break;  // not for us
        }
    }
}

}  // namespace trilogy::agentbus
