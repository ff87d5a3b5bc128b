#include "trilogy/broker_resource.hpp"

#include <fstream>

#include "trilogy/errors.hpp"
#include "trilogy/soif.hpp"

namespace trilogy::agentbus {

using nlohmann::json;

BrokerResource::BrokerResource(std::shared_ptr<broker::DocumentStore> store,
                               std::filesystem::path persist_dir)
    : store_(std::move(store)), persist_dir_(std::move(persist_dir)) {
    if (!store_) throw InvalidInput("broker resource needs a document store");
}

broker::BrokerDescriptor BrokerResource::descriptor() const { return store_->describe(); }

json BrokerResource::hits_payload(const broker::QueryResult& result) const {
    json hits = json::array();
    for (const broker::Hit& hit : result.hits) {
        hits.push_back({{"id", hit.id}, {"url", hit.url}, {"title", hit.title},
                        {"score", hit.score}});
    }
    return {{"resource", store_->config().resource_name}, {"hits", hits}};
}

json BrokerResource::invoke(const std::string& service, const std::vector<std::string>& inputs,
                            const std::string& user) {
    (void)user;
    if (inputs.size() != 1)
        throw ResourceFailure(kFailBadInput, "service \"" + service + "\" takes one input");
    const std::string& input = inputs.front();

    try {
        if (service == broker::kSearchByKeyword) {
            json q = json::parse(input);
            auto terms = q.at("terms").get<std::vector<std::string>>();
            int limit = q.value("limit", kDefaultQueryLimit);
            return hits_payload(store_->query_keywords(terms, limit));
        }
        if (service == broker::kSearchByTopic) {
            json q = json::parse(input);
            auto concepts = q.at("concepts").get<std::vector<std::string>>();
            int limit = q.value("limit", kDefaultQueryLimit);
            return hits_payload(store_->query_concepts(concepts, limit));
        }
        if (service == broker::kAddDocument) {
            std::vector<soif::SoifRecord> records = soif::parse(input);
            if (records.size() != 1)
                throw ResourceFailure(kFailBadInput, "add-document takes exactly one record, got " +
                                                         std::to_string(records.size()));
            broker::DocId id = store_->add_document(records.front());
            if (!persist_dir_.empty()) {
                std::filesystem::create_directories(persist_dir_ / "store");
                std::ofstream out(persist_dir_ / "store" / (std::to_string(id) + ".soif"),
                                  std::ios::binary | std::ios::trunc);
                out << soif::serialize_record(records.front());
            }
            return {{"resource", store_->config().resource_name}, {"id", id}};
        }
    } catch (const json::exception& e) {
        throw ResourceFailure(kFailBadInput, std::string("malformed query payload: ") + e.what());
    } catch (const InvalidInput& e) {
        throw ResourceFailure(kFailBadInput, e.what());
    }
    throw ResourceFailure(kFailBadInput, "unknown service \"" + service + "\"");
}

}  // namespace trilogy::agentbus
