#pragma once

#include <filesystem>
#include <memory>

#include "trilogy/broker.hpp"
#include "trilogy/resource_agent.hpp"

namespace trilogy::agentbus {

// The software interface between a broker and its resource agent: turns
// service requests into document-store calls.
//
// Service inputs are a single JSON text argument:
//   search-by-keyword  {"terms": [...], "limit": n}
//   search-by-topic    {"concepts": [...], "limit": n}
//   add-document       one serialized SOIF record (raw, not JSON)
// Search results come back as {"resource": ..., "hits": [{id,url,title,score}]}
// and add-document as {"resource": ..., "id": n}.
class BrokerResource : public Resource {
public:
    // When persist_dir is set, every accepted document is written through
    // to <persist_dir>/store/<id>.soif as it arrives.
    explicit BrokerResource(std::shared_ptr<broker::DocumentStore> store,
                            std::filesystem::path persist_dir = {});

    broker::BrokerDescriptor descriptor() const override;
    nlohmann::json invoke(const std::string& service, const std::vector<std::string>& inputs,
                          const std::string& user) override;

    broker::DocumentStore& store() { return *store_; }

private:
    nlohmann::json hits_payload(const broker::QueryResult& result) const;

    std::shared_ptr<broker::DocumentStore> store_;
    std::filesystem::path persist_dir_;
};

constexpr int kDefaultQueryLimit = 50;

}  // namespace trilogy::agentbus
