#include "trilogy/broker.hpp"

#include <algorithm>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>

#include <nlohmann/json.hpp>

#include "trilogy/config.hpp"
#include "trilogy/errors.hpp"
#include "trilogy/text.hpp"

namespace trilogy::broker {

using nlohmann::json;

const ServiceSpec* BrokerDescriptor::find_service(const std::string& name) const {
    for (const ServiceSpec& s : services) {
        if (s.name == name) return &s;
    }
    return nullptr;
}

void BrokerDescriptor::validate() const {
    if (text::trim(resource_name).empty())
        throw InvalidInput("descriptor resource name must not be empty");
    std::set<std::string> names;
    for (const ServiceSpec& s : services) {
        if (text::trim(s.name).empty()) throw InvalidInput("descriptor has an unnamed service");
        if (!names.insert(s.name).second)
            throw InvalidInput("duplicate service name \"" + s.name + "\"");
        if (s.input_arity < 0)
            throw InvalidInput("service \"" + s.name + "\" has negative input arity");
        if (s.max_instances < 1)
            throw InvalidInput("service \"" + s.name + "\" must allow at least one instance");
    }
}

void BrokerConfig::validate() const {
    if (text::trim(resource_name).empty()) throw InvalidInput("resource_name must not be empty");
    if (topics.empty()) throw InvalidInput("broker must be configured with at least one topic");
    if (max_instances < 1) throw InvalidInput("max_instances must be >= 1");
}

DocumentStore::DocumentStore(BrokerConfig config, std::shared_ptr<const ontology::Ontology> onto)
    : config_(std::move(config)),
      ontology_(std::move(onto)),
      index_(std::make_shared<indexer::InvertedIndex>()) {
    if (!ontology_) throw InvalidInput("document store needs an ontology snapshot");
}

namespace {

void check_record(const soif::SoifRecord& record) {
    if (record.url.empty()) throw InvalidInput("record url must not be empty");
    if (record.template_type.empty()) throw InvalidInput("record template type must not be empty");
    for (const auto& [name, value] : record.attributes) {
        if (!soif::valid_attribute_name(name))
            throw InvalidInput("invalid attribute name \"" + name + "\"");
    }
}

std::int64_t gathered_time_of(const soif::SoifRecord& record) {
    std::string t = record.attribute("gathered-time");
    if (t.empty()) return 0;
    try {
        return std::stoll(t);
    } catch (const std::logic_error&) {
        return 0;
    }
}

}  // namespace

DocId DocumentStore::add_document_locked(const soif::SoifRecord& record) {
    check_record(record);
    if (by_url_.count(record.url))
        throw InvalidInput("duplicate url \"" + record.url + "\"");

    StoredEntry stored;
    stored.entry.id = next_id_++;
    stored.entry.record = record;
    stored.entry.matches = indexer::extract_matches(record, *ontology_);
    stored.entry.vector = indexer::concept_vector(stored.entry.matches, *ontology_);
    stored.entry.failure_count = 0;
    stored.entry.last_verified = gathered_time_of(record);
    stored.tokens = text::tokenize(indexer::matchable_text(record));

    auto next = std::make_shared<indexer::InvertedIndex>(*index_);
    indexer::add_to_index(*next, stored.entry.id, stored.entry.vector);
    index_ = std::move(next);

    DocId id = stored.entry.id;
    by_url_.emplace(record.url, id);
    entries_.emplace(id, std::move(stored));
    return id;
}

DocId DocumentStore::add_document(const soif::SoifRecord& record) {
    std::unique_lock lock(mutex_);
    return add_document_locked(record);
}

DocumentEntry DocumentStore::remove_document(DocId id) {
    std::unique_lock lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw InvalidInput("unknown document id " + std::to_string(id));

    auto next = std::make_shared<indexer::InvertedIndex>(*index_);
    indexer::remove_from_index(*next, id, it->second.entry.vector);
    index_ = std::move(next);

    DocumentEntry removed = std::move(it->second.entry);
    by_url_.erase(removed.record.url);
    entries_.erase(it);
    return removed;
}

std::vector<Hit> DocumentStore::top_hits(std::vector<Hit> hits, int limit) {
    std::sort(hits.begin(), hits.end(), [](const Hit& a, const Hit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.id < b.id;
    });
    if (static_cast<std::size_t>(limit) < hits.size()) hits.resize(static_cast<std::size_t>(limit));
    return hits;
}

QueryResult DocumentStore::query_keywords(const std::vector<std::string>& terms, int limit) const {
    if (limit < 1) throw InvalidInput("limit must be positive");
    std::vector<std::string> canonical;
    for (const std::string& term : terms) {
        std::string c = text::canonical_phrase(term);
        if (!c.empty() && std::find(canonical.begin(), canonical.end(), c) == canonical.end())
            canonical.push_back(c);
    }
    if (canonical.empty()) throw InvalidInput("keyword query needs at least one term");

    indexer::PhraseMatcher matcher(canonical);
    double term_count = static_cast<double>(canonical.size());

    std::shared_lock lock(mutex_);
    std::vector<Hit> hits;
    for (const auto& [id, stored] : entries_) {
        std::map<std::string, int> counts = matcher.count_tokens(stored.tokens);
        if (counts.empty()) continue;
        double score = static_cast<double>(counts.size()) / term_count;
        hits.push_back(Hit{id, stored.entry.record.url, stored.entry.record.attribute("title"),
                           score});
    }
    return QueryResult{top_hits(std::move(hits), limit)};
}

QueryResult DocumentStore::query_concepts(const std::vector<std::string>& concepts,
                                          int limit) const {
    if (limit < 1) throw InvalidInput("limit must be positive");
    std::set<std::string> wanted;
    for (const std::string& c : concepts) {
        std::string t = text::fold(text::trim(c));
        if (!t.empty()) wanted.insert(t);
    }
    if (wanted.empty()) throw InvalidInput("concept query needs at least one concept");

    std::shared_lock lock(mutex_);
    std::shared_ptr<const indexer::InvertedIndex> index = index_;

    // Postings are keyed by display name; fold for the comparison.
    std::map<DocId, double> best;
    for (const auto& [concept_name, postings] : *index) {
        if (!wanted.count(text::fold(concept_name))) continue;
        for (const indexer::Posting& p : postings) {
            auto [it, inserted] = best.emplace(p.doc, p.emphasis);
            if (!inserted && p.emphasis > it->second) it->second = p.emphasis;
        }
    }

    std::vector<Hit> hits;
    hits.reserve(best.size());
    for (const auto& [id, score] : best) {
        auto it = entries_.find(id);
        if (it == entries_.end()) continue;
        hits.push_back(Hit{id, it->second.entry.record.url,
                           it->second.entry.record.attribute("title"), score});
    }
    return QueryResult{top_hits(std::move(hits), limit)};
}

BrokerDescriptor DocumentStore::describe() const {
    std::shared_lock lock(mutex_);
    BrokerDescriptor d;
    d.resource_name = config_.resource_name;
    d.topics = config_.topics;
    d.keywords = config_.keywords;
    d.services = {
        ServiceSpec{kSearchByKeyword, 1, config_.max_instances},
        ServiceSpec{kSearchByTopic, 1, config_.max_instances},
        ServiceSpec{kAddDocument, 1, config_.max_instances},
    };
    return d;
}

indexer::MaintenanceReport DocumentStore::refresh(const indexer::Probe& probe) {
    auto started = std::chrono::steady_clock::now();
    indexer::MaintenanceReport report;

    // Phase 1: snapshot what needs probing, without holding the lock while
    // probes (possibly slow I/O) run.
    struct Target {
        DocId id;
        std::string url;
        soif::SoifRecord record;
        int failure_count;
    };
    std::vector<Target> targets;
    {
        std::shared_lock lock(mutex_);
        targets.reserve(entries_.size());
        for (const auto& [id, stored] : entries_)
            targets.push_back({id, stored.entry.record.url, stored.entry.record,
                               stored.entry.failure_count});
    }

    // Phase 2: probe and re-gather off-line.
    struct Outcome {
        DocId id;
        bool failed = false;
        bool remove = false;
        bool regathered = false;
        soif::SoifRecord new_record;
    };
    std::vector<Outcome> outcomes;
    std::int64_t now = text::now_epoch_seconds();
    for (const Target& target : targets) {
        Outcome outcome;
        outcome.id = target.id;
        indexer::ProbeResult result;
        try {
            result = probe(target.url);
        } catch (const std::exception&) {
            result = indexer::ProbeResult::unavailable();
        }
        switch (result.status) {
            case indexer::ProbeStatus::Available:
                break;
            case indexer::ProbeStatus::Unavailable:
                outcome.failed = true;
                outcome.remove =
                    target.failure_count + 1 >= indexer::kRemovalFailureThreshold;
                break;
            case indexer::ProbeStatus::Changed: {
                std::string hint = result.media_hint;
                if (hint.empty()) {
                    const std::string& type = target.record.template_type;
                    if (type != "FILE") hint = "bib";
                    else if (target.url.ends_with(".html") || target.url.ends_with(".htm"))
                        hint = "html";
                    else hint = "text";
                }
                try {
                    outcome.new_record = soif::gather(result.content, hint, target.url, now);
                    outcome.regathered = true;
                } catch (const Error&) {
                    // Unusable replacement content counts as a failed probe.
                    outcome.failed = true;
                    outcome.remove =
                        target.failure_count + 1 >= indexer::kRemovalFailureThreshold;
                }
                break;
            }
        }
        outcomes.push_back(std::move(outcome));
    }

    // Phase 3: apply under the write lock, rebuild the whole index from the
    // surviving entries, and swap it in atomically.
    {
        std::unique_lock lock(mutex_);
        for (Outcome& outcome : outcomes) {
            auto it = entries_.find(outcome.id);
            if (it == entries_.end()) continue;  // removed concurrently
            StoredEntry& stored = it->second;
            if (outcome.remove) {
                by_url_.erase(stored.entry.record.url);
                entries_.erase(it);
                ++report.removed;
                ++report.failed_probe;
            } else if (outcome.failed) {
                ++stored.entry.failure_count;
                ++report.failed_probe;
            } else if (outcome.regathered) {
                stored.entry.record = std::move(outcome.new_record);
                stored.entry.matches = indexer::extract_matches(stored.entry.record, *ontology_);
                stored.entry.vector = indexer::concept_vector(stored.entry.matches, *ontology_);
                stored.entry.failure_count = 0;
                stored.entry.last_verified = now;
                stored.tokens = text::tokenize(indexer::matchable_text(stored.entry.record));
                ++report.refreshed;
            } else {
                stored.entry.failure_count = 0;
                stored.entry.last_verified = now;
            }
        }

        auto next = std::make_shared<indexer::InvertedIndex>();
        for (const auto& [id, stored] : entries_)
            indexer::add_to_index(*next, id, stored.entry.vector);
        index_ = std::move(next);
    }

    report.elapsed_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
    return report;
}

std::size_t DocumentStore::size() const {
    std::shared_lock lock(mutex_);
    return entries_.size();
}

std::vector<DocId> DocumentStore::ids() const {
    std::shared_lock lock(mutex_);
    std::vector<DocId> out;
    out.reserve(entries_.size());
    for (const auto& [id, stored] : entries_) out.push_back(id);
    return out;
}

std::optional<DocId> DocumentStore::find_url(const std::string& url) const {
    std::shared_lock lock(mutex_);
    auto it = by_url_.find(url);
    if (it == by_url_.end()) return std::nullopt;
    return it->second;
}

DocumentEntry DocumentStore::entry(DocId id) const {
    std::shared_lock lock(mutex_);
    auto it = entries_.find(id);
    if (it == entries_.end()) throw InvalidInput("unknown document id " + std::to_string(id));
    return it->second.entry;
}

std::shared_ptr<const indexer::InvertedIndex> DocumentStore::index_snapshot() const {
    std::shared_lock lock(mutex_);
    return index_;
}

std::shared_ptr<const ontology::Ontology> DocumentStore::ontology_snapshot() const {
    std::shared_lock lock(mutex_);
    return ontology_;
}

namespace {

constexpr const char* kIndexFormat = "trilogy-concept-index";
constexpr int kIndexVersion = 1;

std::string record_fingerprint(const soif::SoifRecord& record) {
    return text::to_hex(text::fnv1a64(soif::serialize_record(record)));
}

json vector_to_json(const indexer::ConceptVector& v) {
    json out = json::object();
    for (const auto& [concept_name, emphasis] : v) out[concept_name] = emphasis;
    return out;
}

indexer::ConceptVector vector_from_json(const json& j) {
    indexer::ConceptVector out;
    for (const auto& [concept_name, emphasis] : j.items()) out[concept_name] = emphasis.get<double>();
    return out;
}

}  // namespace

void DocumentStore::save(const std::filesystem::path& dir) const {
    std::shared_lock lock(mutex_);
    namespace fs = std::filesystem;
    std::error_code ec;
    fs::create_directories(dir / "store", ec);
    fs::create_directories(dir / "index", ec);
    if (ec) throw IoError("cannot create store directories under " + dir.string());

    // Drop record files for documents that no longer exist.
    for (const auto& file : fs::directory_iterator(dir / "store")) {
        if (file.path().extension() != ".soif") continue;
        try {
            DocId id = std::stoll(file.path().stem().string());
            if (!entries_.count(id)) fs::remove(file.path());
        } catch (const std::logic_error&) {
            // Not one of ours; leave it alone.
        }
    }

    json docs = json::array();
    for (const auto& [id, stored] : entries_) {
        std::ofstream out(dir / "store" / (std::to_string(id) + ".soif"),
                          std::ios::binary | std::ios::trunc);
        if (!out) throw IoError("cannot write record file for document " + std::to_string(id));
        out << soif::serialize_record(stored.entry.record);

        json matches = json::object();
        for (const auto& [keyword, count] : stored.entry.matches) matches[keyword] = count;
        docs.push_back({{"id", id},
                        {"record_fp", record_fingerprint(stored.entry.record)},
                        {"failure_count", stored.entry.failure_count},
                        {"last_verified", stored.entry.last_verified},
                        {"vector", vector_to_json(stored.entry.vector)},
                        {"matches", matches}});
    }

    json idx = {{"format", kIndexFormat},
                {"version", kIndexVersion},
                {"ontology", ontology_->fingerprint()},
                {"next_id", next_id_},
                {"docs", docs}};
    std::ofstream out(dir / "index" / "concepts.idx", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write index file under " + dir.string());
    out << idx.dump(1, '\t') << "\n";

    std::ofstream conf(dir / "broker.conf", std::ios::binary | std::ios::trunc);
    if (!conf) throw IoError("cannot write broker.conf under " + dir.string());
    conf << "resource_name = " << config_.resource_name << "\n"
         << "topics = " << config::join_list(config_.topics) << "\n"
         << "keywords = " << config::join_list(config_.keywords) << "\n"
         << "max_instances = " << config_.max_instances << "\n";
}

std::unique_ptr<DocumentStore> DocumentStore::load(const std::filesystem::path& dir,
                                                   std::shared_ptr<const ontology::Ontology> onto,
                                                   std::optional<BrokerConfig> config_override,
                                                   std::vector<std::string>* warnings) {
    namespace fs = std::filesystem;
    auto warn = [&](const std::string& message) {
        if (warnings) warnings->push_back(message);
    };

    BrokerConfig config;
    if (config_override) {
        config = std::move(*config_override);
    } else if (fs::exists(dir / "broker.conf")) {
        auto kv = config::parse_kv_file(dir / "broker.conf");
        if (kv.count("resource_name")) config.resource_name = kv["resource_name"];
        if (kv.count("topics")) config.topics = config::split_list(kv["topics"]);
        if (kv.count("keywords")) config.keywords = config::split_list(kv["keywords"]);
        if (kv.count("max_instances")) config.max_instances = std::stoi(kv["max_instances"]);
    }

    auto store = std::make_unique<DocumentStore>(std::move(config), std::move(onto));
    if (!fs::exists(dir)) return store;
    if (!fs::is_directory(dir)) throw IoError(dir.string() + " is not a directory");

    // The SOIF files are authoritative.
    std::map<DocId, soif::SoifRecord> records;
    if (fs::exists(dir / "store")) {
        for (const auto& file : fs::directory_iterator(dir / "store")) {
            if (file.path().extension() != ".soif") continue;
            DocId id = 0;
            try {
                id = std::stoll(file.path().stem().string());
            } catch (const std::logic_error&) {
                warn("ignoring record file with non-numeric name: " + file.path().string());
                continue;
            }
            try {
                std::ifstream in(file.path(), std::ios::binary);
                std::ostringstream buf;
                buf << in.rdbuf();
                std::vector<soif::SoifRecord> parsed = soif::parse(buf.str());
                if (parsed.size() != 1)
                    throw InvalidInput("expected exactly one record, found " +
                                       std::to_string(parsed.size()));
                records.emplace(id, std::move(parsed.front()));
            } catch (const std::exception& e) {
                warn("corrupt record file " + file.path().string() + ": " + e.what());
            }
        }
    }

    // The index file is a cache; every cached document must still match its
    // record fingerprint or its derived data is recomputed from the record.
    std::map<DocId, json> cached;
    fs::path index_file = dir / "index" / "concepts.idx";
    DocId cached_next_id = 0;
    if (fs::exists(index_file)) {
        try {
            std::ifstream in(index_file, std::ios::binary);
            json idx = json::parse(in);
            if (idx.value("format", "") != kIndexFormat ||
                idx.value("version", 0) != kIndexVersion)
                throw InvalidInput("unrecognized index format");
            if (idx.value("ontology", "") != store->ontology_->fingerprint())
                throw InvalidInput("index built against a different ontology");
            cached_next_id = idx.value("next_id", 0);
            for (const json& doc : idx.at("docs")) cached.emplace(doc.at("id").get<DocId>(), doc);
        } catch (const std::exception& e) {
            warn(std::string("rebuilding index: ") + e.what());
            cached.clear();
            cached_next_id = 0;
        }
    }

    std::unique_lock lock(store->mutex_);
    for (auto& [id, record] : records) {
        StoredEntry stored;
        stored.entry.id = id;
        auto it = cached.find(id);
        if (it != cached.end() &&
            it->second.value("record_fp", "") == record_fingerprint(record)) {
            const json& doc = it->second;
            stored.entry.vector = vector_from_json(doc.at("vector"));
            for (const auto& [keyword, count] : doc.at("matches").items())
                stored.entry.matches[keyword] = count.get<int>();
            stored.entry.failure_count = doc.value("failure_count", 0);
            stored.entry.last_verified = doc.value("last_verified", std::int64_t{0});
        } else {
            stored.entry.matches = indexer::extract_matches(record, *store->ontology_);
            stored.entry.vector = indexer::concept_vector(stored.entry.matches, *store->ontology_);
            stored.entry.failure_count = 0;
            stored.entry.last_verified = gathered_time_of(record);
        }
        stored.tokens = text::tokenize(indexer::matchable_text(record));
        if (store->by_url_.count(record.url)) {
            warn("ignoring document " + std::to_string(id) + ": duplicate url " + record.url);
            continue;
        }
        store->by_url_.emplace(record.url, id);
        stored.entry.record = std::move(record);
        store->entries_.emplace(id, std::move(stored));
    }

    auto index = std::make_shared<indexer::InvertedIndex>();
    DocId max_id = 0;
    for (const auto& [id, stored] : store->entries_) {
        indexer::add_to_index(*index, id, stored.entry.vector);
        max_id = std::max(max_id, id);
    }
    store->index_ = std::move(index);
    store->next_id_ = std::max(cached_next_id, max_id + 1);
    return store;
}

}  // namespace trilogy::broker
