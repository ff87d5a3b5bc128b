#pragma once

#include <chrono>
#include <string>
#include <vector>

#include "trilogy/mediator.hpp"
#include "trilogy/net.hpp"
#include "trilogy/protocol.hpp"

namespace trilogy::agentbus {

constexpr std::chrono::milliseconds kDefaultTimeout{5000};

// Asks a mediator which resources serve a topic or keyword.
// kind is "topic" or "keyword". Throws NetError if the mediator is
// unreachable and ProtocolError/Error on a rejected request.
std::vector<RouteEntry> route_query(const std::string& mediator_address, const std::string& kind,
                                    const std::string& value,
                                    const std::string& sender = "paa:anonymous",
                                    std::chrono::milliseconds timeout = kDefaultTimeout);

// Registers an advertisement with a mediator. Returns an empty string on
// success, otherwise the rejection or transport error text.
std::string advertise_resource(const std::string& mediator_address, const Advertisement& advert,
                               std::chrono::milliseconds timeout = kDefaultTimeout);

// One in-flight service request. next() blocks for the next message the
// agent sends about this request (SERVICE_QUEUED updates, then a final
// SERVICE_RESULT or SERVICE_ERROR).
class ServiceCall {
public:
    ServiceCall(const std::string& address, const std::string& service,
                const std::vector<std::string>& inputs, const std::string& sender,
                const std::string& user, std::chrono::milliseconds timeout = kDefaultTimeout);

    Message next();
    const std::string& request_id() const { return request_id_; }

private:
    TcpStream stream_;
    std::string request_id_;
};

struct ServiceOutcome {
    bool ok = false;
    nlohmann::json payload;            // SERVICE_RESULT body
    std::string error_reason;          // SERVICE_ERROR body
    std::string failure_class;
    std::vector<int> queued_positions;  // every queue position seen, in order
};

// Sends one request and waits through any queueing for the final reply.
// Throws NetError on transport failure or timeout.
ServiceOutcome request_service(const std::string& address, const std::string& service,
                               const std::vector<std::string>& inputs, const std::string& sender,
                               const std::string& user,
                               std::chrono::milliseconds timeout = kDefaultTimeout);

}  // namespace trilogy::agentbus
