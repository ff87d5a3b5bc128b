#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <optional>
#include <shared_mutex>
#include <string>
#include <vector>

#include "trilogy/indexer.hpp"
#include "trilogy/maintenance.hpp"
#include "trilogy/ontology.hpp"
#include "trilogy/soif.hpp"

namespace trilogy::broker {

using indexer::DocId;

struct ServiceSpec {
    std::string name;
    int input_arity = 1;
    int max_instances = 1;

    bool operator==(const ServiceSpec&) const = default;
};

// What a resource tells the mediator about itself: who it is, which topics
// and keywords it specializes in, and the services it offers.
struct BrokerDescriptor {
    std::string resource_name;
    std::vector<std::string> topics;
    std::vector<std::string> keywords;
    std::vector<ServiceSpec> services;

    const ServiceSpec* find_service(const std::string& name) const;
    // Throws InvalidInput on an empty resource name, a duplicate service
    // name, or a non-positive max_instances.
    void validate() const;
};

struct BrokerConfig {
    std::string resource_name;
    std::vector<std::string> topics;
    std::vector<std::string> keywords;
    int max_instances = 4;

    void validate() const;  // resource_name and topics must be non-empty
};

struct Hit {
    DocId id = 0;
    std::string url;
    std::string title;
    double score = 0.0;
};

struct QueryResult {
    std::vector<Hit> hits;
};

struct DocumentEntry {
    DocId id = 0;
    soif::SoifRecord record;
    indexer::ConceptVector vector;
    indexer::MatchCounts matches;
    int failure_count = 0;
    std::int64_t last_verified = 0;
};

constexpr const char* kSearchByKeyword = "search-by-keyword";
constexpr const char* kSearchByTopic = "search-by-topic";
constexpr const char* kAddDocument = "add-document";

// A topic repository: SOIF records plus the concept index over them.
// Many concurrent readers, serialized writers; every query runs against a
// consistent snapshot and add/remove/refresh appear atomic to readers.
class DocumentStore {
public:
    DocumentStore(BrokerConfig config, std::shared_ptr<const ontology::Ontology> onto);

    // Indexes the record before returning. Throws InvalidInput on a
    // duplicate url or an invalid record.
    DocId add_document(const soif::SoifRecord& record);

    // Removes the entry from the store and from every posting list.
    // Throws InvalidInput on an unknown id.
    DocumentEntry remove_document(DocId id);

    // Plain token/phrase match over title+keywords+abstract; the terms need
    // not be ontology keywords. Score is matched terms / total terms.
    QueryResult query_keywords(const std::vector<std::string>& terms, int limit) const;

    // Union of postings for the requested concepts; per-document score is
    // the max emphasis across them (a topic plus its subtree must not
    // double-count). Unknown concepts simply contribute nothing.
    QueryResult query_concepts(const std::vector<std::string>& concepts, int limit) const;

    BrokerDescriptor describe() const;

    // Re-verifies every document through the probe: failures accumulate
    // per document and evict at kRemovalFailureThreshold, changed sources
    // are re-gathered, and the index is rebuilt off-line and swapped in.
    indexer::MaintenanceReport refresh(const indexer::Probe& probe);

    // Directory layout: store/<id>.soif, index/concepts.idx, broker.conf.
    // The SOIF files are authoritative; the index file is a cache that
    // load() verifies per document and rebuilds when missing or stale.
    void save(const std::filesystem::path& dir) const;
    static std::unique_ptr<DocumentStore> load(
        const std::filesystem::path& dir, std::shared_ptr<const ontology::Ontology> onto,
        std::optional<BrokerConfig> config_override = std::nullopt,
        std::vector<std::string>* warnings = nullptr);

    std::size_t size() const;
    std::vector<DocId> ids() const;
    std::optional<DocId> find_url(const std::string& url) const;
    DocumentEntry entry(DocId id) const;
    std::shared_ptr<const indexer::InvertedIndex> index_snapshot() const;
    std::shared_ptr<const ontology::Ontology> ontology_snapshot() const;
    const BrokerConfig& config() const { return config_; }

private:
    struct StoredEntry {
        DocumentEntry entry;
        std::vector<std::string> tokens;  // folded tokens of the matchable text
    };

    DocId add_document_locked(const soif::SoifRecord& record);
    void index_all_locked();
    static std::vector<Hit> top_hits(std::vector<Hit> hits, int limit);

    BrokerConfig config_;
    std::shared_ptr<const ontology::Ontology> ontology_;
    std::map<DocId, StoredEntry> entries_;
    std::map<std::string, DocId> by_url_;
    std::shared_ptr<const indexer::InvertedIndex> index_;
    DocId next_id_ = 1;
    mutable std::shared_mutex mutex_;
};

}  // namespace trilogy::broker
