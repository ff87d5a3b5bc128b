#include "trilogy/mediator.hpp"

#include <algorithm>
#include <set>

#include "trilogy/errors.hpp"
#include "trilogy/text.hpp"

namespace trilogy::agentbus {

using nlohmann::json;

Mediator::Mediator(std::shared_ptr<const ontology::Ontology> onto) : ontology_(std::move(onto)) {
    if (!ontology_) throw InvalidInput("mediator needs an ontology snapshot");
}

void Mediator::register_advert(const Advertisement& advert) {
    advert.descriptor.validate();
    if (advert.address.empty()) throw InvalidInput("advertisement must carry an address");
    std::string key = text::fold(advert.descriptor.resource_name);
    std::lock_guard lock(mutex_);
    auto it = registry_.find(key);
    if (it != registry_.end() && it->second.sender != advert.sender)
        throw InvalidInput("resource name \"" + advert.descriptor.resource_name +
                           "\" is already registered by " + it->second.sender);
    registry_[key] = advert;
}

std::vector<RouteEntry> Mediator::collect(
    const std::function<bool(const Advertisement&)>& matches) const {
    std::vector<RouteEntry> out;
    for (const auto& [key, advert] : registry_) {
        if (matches(advert))
            out.push_back(RouteEntry{advert.descriptor.resource_name, advert.address});
    }
    std::sort(out.begin(), out.end(), [](const RouteEntry& a, const RouteEntry& b) {
        return text::fold(a.resource_name) < text::fold(b.resource_name);
    });
    return out;
}

std::vector<RouteEntry> Mediator::route_topic(const std::string& topic) const {
    std::lock_guard lock(mutex_);
    std::set<std::string> wanted;
    if (ontology_->has_concept(topic)) {
        for (const std::string& name : ontology_->subtree(topic)) wanted.insert(text::fold(name));
    } else {
        wanted.insert(text::fold(text::trim(topic)));
    }
    return collect([&](const Advertisement& advert) {
        return std::any_of(advert.descriptor.topics.begin(), advert.descriptor.topics.end(),
                           [&](const std::string& t) { return wanted.count(text::fold(t)); });
    });
}

std::vector<RouteEntry> Mediator::route_keyword(const std::string& term) const {
    std::lock_guard lock(mutex_);
    std::string wanted = text::canonical_phrase(term);
    if (wanted.empty()) return {};
    return collect([&](const Advertisement& advert) {
        return std::any_of(advert.descriptor.keywords.begin(), advert.descriptor.keywords.end(),
                           [&](const std::string& k) { return text::canonical_phrase(k) == wanted; });
    });
}

std::vector<RouteEntry> Mediator::route(const std::string& kind, const std::string& value) const {
    if (kind == "topic") return route_topic(value);
    if (kind == "keyword") return route_keyword(value);
    throw InvalidInput("route kind must be \"topic\" or \"keyword\", got \"" + kind + "\"");
}

std::optional<Advertisement> Mediator::advertisement(const std::string& resource_name) const {
    std::lock_guard lock(mutex_);
    auto it = registry_.find(text::fold(resource_name));
    if (it == registry_.end()) return std::nullopt;
    return it->second;
}

std::size_t Mediator::size() const {
    std::lock_guard lock(mutex_);
    return registry_.size();
}

void Mediator::set_ontology(std::shared_ptr<const ontology::Ontology> onto) {
    if (!onto) throw InvalidInput("mediator needs an ontology snapshot");
    std::lock_guard lock(mutex_);
    ontology_ = std::move(onto);
}

MediatorServer::MediatorServer(std::string name, std::shared_ptr<const ontology::Ontology> onto,
                               TcpListener listener)
    : agent_id_(agent_name("mediator", name)),
      mediator_(std::move(onto)),
      server_(std::move(listener), agent_id_,
              [this](const Message& message, std::shared_ptr<MessageSink> sink) {
                  loop_.post([this, message, sink = std::move(sink)] { handle(message, sink); });
              }) {}

MediatorServer::~MediatorServer() { stop(); }

void MediatorServer::start() {
    loop_.start();
    server_.start();
}

void MediatorServer::stop() {
    server_.stop();
    loop_.stop();
}

void MediatorServer::handle(const Message& message, std::shared_ptr<MessageSink> sink) {
    Message reply;
    reply.id = next_message_id();
    reply.sender = agent_id_;
    reply.reply_to = message.id;

    auto fail = [&](const std::string& reason) {
        reply.type = MessageType::ServiceError;
        reply.body = {{"reason", reason}, {"failure_class", kFailBadInput}};
        sink->try_send(reply);
    };

    try {
        switch (message.type) {
            case MessageType::Advertise: {
                Advertisement advert;
                advert.descriptor = descriptor_from_json(message.body.at("descriptor"));
                advert.address = message.body.value("address", "");
                advert.sender = message.sender;
                mediator_.register_advert(advert);
                reply.type = MessageType::ServiceResult;
                reply.body = {{"registered", advert.descriptor.resource_name}};
                sink->try_send(reply);
                break;
            }
            case MessageType::RouteRequest: {
                std::string kind = message.body.value("kind", "");
                std::string value = message.body.value("value", "");
                std::vector<RouteEntry> routes = mediator_.route(kind, value);
                json resources = json::array();
                for (const RouteEntry& r : routes)
                    resources.push_back({{"name", r.resource_name}, {"address", r.address}});
                reply.type = MessageType::RouteReply;
                reply.body = {{"resources", resources}};
                sink->try_send(reply);
                break;
            }
            default:
                fail(std::string("mediator cannot handle ") + message_type_name(message.type));
        }
    } catch (const json::exception& e) {
        fail(std::string("malformed body: ") + e.what());
    } catch (const Error& e) {
        fail(e.what());
    }
}

}  // namespace trilogy::agentbus
