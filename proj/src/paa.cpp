#include "trilogy/paa.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "trilogy/client.hpp"
#include "trilogy/errors.hpp"
#include "trilogy/text.hpp"

namespace trilogy::agentbus {

using nlohmann::json;

UserProfile update_profile(UserProfile profile, const indexer::ConceptVector& update,
                           double blend) {
    if (update.empty()) return profile;
    if (!(blend > 0.0 && blend < 1.0)) throw InvalidInput("profile blend must be in (0,1)");

    indexer::ConceptVector merged;
    double total = 0.0;
    if (profile.interests.empty()) {
        merged = update;
        for (const auto& [concept_name, value] : update) total += value;
    } else {
        for (const auto& [concept_name, value] : profile.interests) merged[concept_name] += blend * value;
        for (const auto& [concept_name, value] : update) merged[concept_name] += (1.0 - blend) * value;
        for (const auto& [concept_name, value] : merged) total += value;
    }
    if (total <= 0.0) {
        profile.interests.clear();
        return profile;
    }
    for (auto& [concept_name, value] : merged) value /= total;
    profile.interests = std::move(merged);
    return profile;
}

double cosine_similarity(const indexer::ConceptVector& a, const indexer::ConceptVector& b) {
    if (a.empty() || b.empty()) return 0.0;
    double dot = 0.0;
    for (const auto& [concept_name, value] : a) {
        auto it = b.find(concept_name);
        if (it != b.end()) dot += value * it->second;
    }
    if (dot == 0.0) return 0.0;
    double norm_a = 0.0;
    double norm_b = 0.0;
    for (const auto& [concept_name, value] : a) norm_a += value * value;
    for (const auto& [concept_name, value] : b) norm_b += value * value;
    return dot / (std::sqrt(norm_a) * std::sqrt(norm_b));
}

std::vector<Message> proactive_scan(const ProactiveEvent& event,
                                    const std::vector<UserProfile>& profiles, double threshold,
                                    const std::string& sender) {
    std::vector<Message> out;
    if (event.vector.empty()) return out;
    for (const UserProfile& profile : profiles) {
        if (!event.origin_user.empty() && profile.user == event.origin_user) continue;
        double similarity = cosine_similarity(event.vector, profile.interests);
        if (similarity < threshold) continue;
        Message notify;
        notify.id = next_message_id();
        notify.type = MessageType::Notify;
        notify.sender = sender;
        notify.body = {
            {"event", event.kind == ProactiveEvent::Kind::NewDocument ? "new-document"
                                                                      : "peer-query"},
            {"trigger", event.trigger},
            {"similarity", similarity},
            {"user", profile.user},
        };
        out.push_back(std::move(notify));
    }
    return out;
}

namespace {

json vector_to_json(const indexer::ConceptVector& v) {
    json out = json::object();
    for (const auto& [concept_name, value] : v) out[concept_name] = value;
    return out;
}

indexer::ConceptVector vector_from_json(const json& j) {
    indexer::ConceptVector out;
    if (!j.is_object()) return out;
    for (const auto& [concept_name, value] : j.items()) out[concept_name] = value.get<double>();
    return out;
}

}  // namespace

UserProfile load_profile(const std::filesystem::path& profiles_dir, const std::string& user) {
    UserProfile profile;
    profile.user = user;
    std::filesystem::path file = profiles_dir / (user + ".json");
    if (!std::filesystem::exists(file)) return profile;

    std::ifstream in(file, std::ios::binary);
    if (!in) throw IoError("cannot read profile " + file.string());
    json j = json::parse(in, nullptr, false);
    if (j.is_discarded() || !j.is_object())
        throw IoError("corrupt profile file " + file.string());
    profile.interests = vector_from_json(j.value("interests", json::object()));
    for (const json& entry : j.value("history", json::array())) {
        profile.history.push_back(HistoryEntry{
            entry.value("time", std::int64_t{0}),
            entry.value("query", ""),
            entry.value("concepts", std::vector<std::string>{}),
        });
    }
    return profile;
}

void save_profile(const std::filesystem::path& profiles_dir, const UserProfile& profile) {
    std::filesystem::create_directories(profiles_dir);
    json history = json::array();
    for (const HistoryEntry& entry : profile.history) {
        history.push_back(
            {{"time", entry.time}, {"query", entry.query}, {"concepts", entry.concepts}});
    }
    json j = {{"user", profile.user},
              {"interests", vector_to_json(profile.interests)},
              {"history", history}};
    std::filesystem::path file = profiles_dir / (profile.user + ".json");
    std::ofstream out(file, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write profile " + file.string());
    out << j.dump(1, '\t') << "\n";
}

std::vector<UserProfile> load_all_profiles(const std::filesystem::path& profiles_dir) {
    std::vector<UserProfile> out;
    if (!std::filesystem::exists(profiles_dir)) return out;
    std::vector<std::filesystem::path> files;
    for (const auto& file : std::filesystem::directory_iterator(profiles_dir)) {
        if (file.path().extension() == ".json") files.push_back(file.path());
    }
    std::sort(files.begin(), files.end());
    for (const auto& file : files) out.push_back(load_profile(profiles_dir, file.stem().string()));
    return out;
}

PersonalAssistant::PersonalAssistant(std::string user, std::vector<std::string> mediators,
                                     std::shared_ptr<const ontology::Ontology> onto,
                                     PaaOptions options)
    : user_(std::move(user)),
      agent_id_(agent_name("paa", user_)),
      mediators_(std::move(mediators)),
      ontology_(std::move(onto)),
      options_(options) {
    if (!ontology_) throw InvalidInput("personal assistant needs an ontology snapshot");
    profile_.user = user_;
}

MergedResult PersonalAssistant::query(const std::string& query_text) {
    MergedResult result;

    // Candidate extraction: ontology phrases first, leftover tokens as
    // plain keyword terms; a query with no ontology hit fans out on its
    // tokens alone.
    indexer::PhraseMatcher matcher = indexer::PhraseMatcher::for_ontology(*ontology_);
    indexer::PhraseMatcher::Segmentation segments = matcher.segment(query_text);
    result.query_vector = indexer::concept_vector(segments.counts, *ontology_);

    std::vector<std::string> keyword_candidates;
    for (const auto& [phrase, count] : segments.counts) keyword_candidates.push_back(phrase);
    for (const std::string& token : segments.unmatched_tokens) {
        if (std::find(keyword_candidates.begin(), keyword_candidates.end(), token) ==
            keyword_candidates.end())
            keyword_candidates.push_back(token);
    }

    std::set<std::string> topic_set;
    for (const auto& [phrase, count] : segments.counts) {
        for (const ontology::ConceptWeight& cw : ontology_->concepts_for(phrase))
            topic_set.insert(cw.concept_name);
    }
    result.concepts.assign(topic_set.begin(), topic_set.end());

    // Consult every mediator for every candidate.
    std::map<std::string, std::string> brokers;  // resource name -> address
    bool any_mediator_reachable = mediators_.empty();
    for (const std::string& mediator : mediators_) {
        bool reachable = false;
        auto ask = [&](const std::string& kind, const std::string& value) {
            try {
                for (const RouteEntry& r :
                     route_query(mediator, kind, value, agent_id_, options_.timeout))
                    brokers.emplace(r.resource_name, r.address);
                reachable = true;
            } catch (const NetError& e) {
                result.warnings.push_back("mediator " + mediator + ": " + e.what());
            } catch (const Error& e) {
                reachable = true;  // it answered, just unhappily
                result.warnings.push_back("mediator " + mediator + ": " + e.what());
            }
        };
        for (const std::string& topic : result.concepts) ask("topic", topic);
        for (const std::string& keyword : keyword_candidates) ask("keyword", keyword);
        any_mediator_reachable = any_mediator_reachable || reachable;
    }
    if (!any_mediator_reachable && (!result.concepts.empty() || !keyword_candidates.empty()))
        throw NetError("no mediator reachable: " +
                       (result.warnings.empty() ? std::string("none configured")
                                                : result.warnings.front()));

    // Brokers stay hierarchy-agnostic: expansion through the ontology
    // happens here, at routing time.
    std::set<std::string> expanded;
    for (const std::string& topic : result.concepts) {
        for (const std::string& name : ontology_->subtree(topic)) expanded.insert(name);
    }
    std::vector<std::string> expanded_concepts(expanded.begin(), expanded.end());

    // Fan out and merge: keep the best score per url.
    std::map<std::string, MergedHit> best;
    auto merge_hits = [&](const json& payload) {
        std::string resource = payload.value("resource", "");
        for (const json& hit : payload.value("hits", json::array())) {
            MergedHit merged{hit.value("url", ""), hit.value("title", ""), resource,
                             hit.value("score", 0.0)};
            auto [it, inserted] = best.emplace(merged.url, merged);
            if (!inserted && merged.score > it->second.score) it->second = merged;
        }
    };
    auto call_broker = [&](const std::string& name, const std::string& address,
                           const std::string& service, const json& payload) {
        try {
            ServiceOutcome outcome = request_service(address, service, {payload.dump()},
                                                     agent_id_, user_, options_.timeout);
            if (outcome.ok) {
                merge_hits(outcome.payload);
            } else {
                result.partial = true;
                result.warnings.push_back("broker " + name + ": " + outcome.error_reason);
            }
        } catch (const std::exception& e) {
            result.partial = true;
            result.warnings.push_back("broker " + name + ": " + e.what());
        }
    };
    for (const auto& [name, address] : brokers) {
        if (!expanded_concepts.empty())
            call_broker(name, address, broker::kSearchByTopic,
                        json{{"concepts", expanded_concepts}, {"limit", options_.limit}});
        if (!keyword_candidates.empty())
            call_broker(name, address, broker::kSearchByKeyword,
                        json{{"terms", keyword_candidates}, {"limit", options_.limit}});
    }

    result.hits.reserve(best.size());
    for (const auto& [url, hit] : best) result.hits.push_back(hit);
    std::sort(result.hits.begin(), result.hits.end(), [](const MergedHit& a, const MergedHit& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.url < b.url;
    });
    if (static_cast<int>(result.hits.size()) > options_.limit)
        result.hits.resize(static_cast<std::size_t>(options_.limit));

    // The query teaches us about the user.
    profile_ = update_profile(std::move(profile_), result.query_vector, options_.profile_blend);
    profile_.history.push_back(
        HistoryEntry{text::now_epoch_seconds(), query_text, result.concepts});
    return result;
}

}  // namespace trilogy::agentbus
