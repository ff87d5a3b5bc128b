#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trilogy::ontology {

// A node in the concept forest. An empty parent marks a first-level topic.
// Names are case-preserving but compared case-insensitively everywhere.
struct Concept {
    std::string name;
    std::string parent;

    bool operator==(const Concept&) const = default;
};

// One weighted keyword->concept edge. The keyword is a phrase of one to
// eight whitespace-separated tokens; the weight quantifies how strongly
// the keyword signals the concept.
struct KeywordLink {
    std::string keyword;
    std::string concept_name;
    int weight = 0;

    bool operator==(const KeywordLink&) const = default;
};

constexpr int kMinWeight = 1;
constexpr int kMaxWeight = 20;
constexpr std::size_t kMaxKeywordTokens = 8;

struct ConceptWeight {
    std::string concept_name;
    int weight = 0;

    bool operator==(const ConceptWeight&) const = default;
};

struct Violation {
    std::string entity;
    std::string problem;

    std::string to_string() const { return entity + ": " + problem; }
};

// Immutable snapshot of the concept forest and the keyword-concept table.
// Mutators return a new snapshot; a held instance never changes, so
// snapshots are safe to share across threads without locking.
class Ontology {
public:
    Ontology() = default;

    // Builds without enforcing invariants; pair with validate(). This is
    // the deserialization entry point and the only way to hold a broken
    // ontology (which validate() must be able to describe).
    static Ontology from_parts(std::vector<Concept> concepts, std::vector<KeywordLink> links);

    // Throws InvalidInput on duplicate name, unknown parent, or cycle.
    Ontology add_concept(const std::string& name, const std::string& parent = "") const;

    // Upsert: an existing (keyword, concept) pair gets the new weight.
    // Throws InvalidInput on weight out of bounds, unknown concept, or
    // an empty/over-long keyword.
    Ontology set_link(const std::string& keyword, const std::string& concept_name, int weight) const;

    // All links whose keyword matches case-insensitively, heaviest first,
    // ties broken by concept name. Unknown keywords yield an empty list.
    std::vector<ConceptWeight> concepts_for(std::string_view keyword) const;

    // The concept itself plus all transitive descendants, sorted.
    // Throws InvalidInput if the concept does not exist.
    std::vector<std::string> subtree(std::string_view concept_name) const;

    // Empty iff every invariant holds. Never throws; tolerates cycles.
    std::vector<Violation> validate() const;

    bool has_concept(std::string_view name) const;
    // Returns the stored (display) spelling for a name, or empty if unknown.
    std::string display_name(std::string_view concept_name) const;

    const std::vector<Concept>& concepts() const { return concepts_; }
    const std::vector<KeywordLink>& links() const { return links_; }

    // Canonical keyword phrase -> indices into links(). This is the derived
    // lookup table the indexer's matcher is built from.
    const std::map<std::string, std::vector<std::size_t>>& keyword_table() const {
        return keyword_table_;
    }

    // Stable hash of the serialized form; used to detect stale indexes.
    std::string fingerprint() const;

    bool operator==(const Ontology& other) const {
        return concepts_ == other.concepts_ && links_ == other.links_;
    }

private:
    void rebuild_lookup();
    const Concept* find(std::string_view name) const;

    std::vector<Concept> concepts_;
    std::vector<KeywordLink> links_;
    std::unordered_map<std::string, std::size_t> by_folded_name_;
    std::map<std::string, std::vector<std::size_t>> keyword_table_;
};

// Parses the two TSV sources (see file formats below) and validates the
// result. Throws InvalidInput with a line number on malformed rows and on
// any invariant violation.
//
//   hierarchy: one concept per line,  concept<TAB>parent   (parent empty for roots)
//   links:     one link per line,     keyword<TAB>concept<TAB>weight
//
// Lines starting with '#' and blank lines are ignored in both files.
Ontology load_ontology(const std::string& hierarchy_source, const std::string& links_source);
Ontology load_ontology_files(const std::filesystem::path& hierarchy_file,
                             const std::filesystem::path& links_file);

std::string serialize_hierarchy(const Ontology& o);
std::string serialize_links(const Ontology& o);
void save_ontology_files(const Ontology& o, const std::filesystem::path& hierarchy_file,
                         const std::filesystem::path& links_file);

// The ontology this repo ships with: the six first-level topics, their
// immediate children, and the default keyword table.
extern const char* const kSeedHierarchyTsv;
extern const char* const kSeedLinksTsv;
Ontology seed_ontology();

// Loads <dir>/hierarchy.tsv and <dir>/links.tsv, materializing the seed
// files first if the directory is empty or missing.
Ontology load_or_seed(const std::filesystem::path& ontology_dir);

}  // namespace trilogy::ontology
