#pragma once

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include "trilogy/indexer.hpp"
#include "trilogy/ontology.hpp"
#include "trilogy/protocol.hpp"

namespace trilogy::agentbus {

struct HistoryEntry {
    std::int64_t time = 0;
    std::string query;
    std::vector<std::string> concepts;  // candidate topics the query mapped to

    bool operator==(const HistoryEntry&) const = default;
};

// One user's standing interests (a normalized concept vector) plus their
// query history. History is append-only.
struct UserProfile {
    std::string user;
    indexer::ConceptVector interests;
    std::vector<HistoryEntry> history;
};

// Exponential blend of the old interests with a new query/document
// vector: blend*old + (1-blend)*update, re-normalized. An empty update
// leaves the interests unchanged; an empty prior adopts the update as-is.
UserProfile update_profile(UserProfile profile, const indexer::ConceptVector& update,
                           double blend = 0.8);

// Cosine similarity; 0 when either vector is empty. Symmetric, in [0,1]
// for emphasis vectors (which are non-negative).
double cosine_similarity(const indexer::ConceptVector& a, const indexer::ConceptVector& b);

struct ProactiveEvent {
    enum class Kind { NewDocument, PeerQuery };
    Kind kind = Kind::NewDocument;
    std::string trigger;      // document url, or the querying peer's user name
    std::string origin_user;  // never notified about their own event
    indexer::ConceptVector vector;
};

// NOTIFY for every profile whose similarity with the event vector reaches
// the threshold, excluding the originating user. Bodies carry the event
// kind, the trigger, and the similarity score.
std::vector<Message> proactive_scan(const ProactiveEvent& event,
                                    const std::vector<UserProfile>& profiles, double threshold,
                                    const std::string& sender);

// Profile persistence: <dir>/<user>.json.
UserProfile load_profile(const std::filesystem::path& profiles_dir, const std::string& user);
void save_profile(const std::filesystem::path& profiles_dir, const UserProfile& profile);
std::vector<UserProfile> load_all_profiles(const std::filesystem::path& profiles_dir);

struct MergedHit {
    std::string url;
    std::string title;
    std::string resource;  // the broker that produced the winning score
    double score = 0.0;
};

struct MergedResult {
    std::vector<MergedHit> hits;
    bool partial = false;                 // some broker or mediator failed to answer
    std::vector<std::string> warnings;
    indexer::ConceptVector query_vector;  // what the query itself is about
    std::vector<std::string> concepts;    // candidate topics, pre-expansion
};

struct PaaOptions {
    double profile_blend = 0.8;
    double notify_threshold = 0.5;
    int limit = 50;
    std::chrono::milliseconds timeout{5000};
};

// The user-facing role: extracts candidate topics and keywords from free
// query text, asks the mediators who serves them, fans the query out, and
// merges the per-broker rankings into one (dedup by url, max score).
class PersonalAssistant {
public:
    PersonalAssistant(std::string user, std::vector<std::string> mediators,
                      std::shared_ptr<const ontology::Ontology> onto, PaaOptions options = {});

    // Throws NetError iff no configured mediator is reachable; individual
    // broker failures degrade to a partial result instead.
    MergedResult query(const std::string& query_text);

    const UserProfile& profile() const { return profile_; }
    void set_profile(UserProfile profile) { profile_ = std::move(profile); }
    const std::string& user() const { return user_; }
    const std::string& agent_id() const { return agent_id_; }

private:
    std::string user_;
    std::string agent_id_;
    std::vector<std::string> mediators_;
    std::shared_ptr<const ontology::Ontology> ontology_;
    PaaOptions options_;
    UserProfile profile_;
};

}  // namespace trilogy::agentbus
