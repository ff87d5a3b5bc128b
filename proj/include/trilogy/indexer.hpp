#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "trilogy/ontology.hpp"
#include "trilogy/soif.hpp"

namespace trilogy::indexer {

using DocId = std::int64_t;

// Canonical keyword phrase -> occurrence count (always >= 1).
using MatchCounts = std::map<std::string, int>;

// Concept name -> emphasis. Non-empty vectors are L1-normalized: every
// emphasis lies in (0, 1] and the emphases sum to 1. A document matching
// no keyword has an empty vector.
using ConceptVector = std::map<std::string, double>;

struct Posting {
    DocId doc = 0;
    double emphasis = 0.0;

    bool operator==(const Posting&) const = default;
};

// Concept name -> postings sorted by emphasis descending, ties by doc id
// ascending. A document appears under concept c iff its vector carries c,
// with that exact emphasis.
using InvertedIndex = std::map<std::string, std::vector<Posting>>;

// Case-insensitive, token-boundary, longest-phrase-first, non-overlapping
// phrase counting. Built once from a phrase list and reused across
// documents; the same machinery serves ontology keywords and ad-hoc query
// terms. Phrases that canonicalize to nothing are dropped.
class PhraseMatcher {
public:
    explicit PhraseMatcher(const std::vector<std::string>& phrases);
    static PhraseMatcher for_ontology(const ontology::Ontology& o);

    // Canonical phrase -> count of non-overlapping occurrences.
    std::map<std::string, int> count(std::string_view text) const;
    std::map<std::string, int> count_tokens(const std::vector<std::string>& tokens) const;

    struct Segmentation {
        std::map<std::string, int> counts;          // matched canonical phrases
        std::vector<std::string> unmatched_tokens;  // tokens no phrase covered, in order
    };
    Segmentation segment(std::string_view text) const;

    std::size_t phrase_count() const { return phrase_tokens_.size(); }

private:
    struct Candidate {
        std::size_t phrase_index;
        std::size_t length;
    };

    std::vector<std::vector<std::string>> phrase_tokens_;
    std::vector<std::string> canonical_;
    // First token -> candidate phrases, longest first.
    std::map<std::string, std::vector<Candidate>> by_first_token_;
};

// The text a record is matched on: its title, keywords, and abstract
// attributes, in that order.
std::string matchable_text(const soif::SoifRecord& record);

// Occurrences of ontology keywords in the record's matchable text.
MatchCounts extract_matches(const soif::SoifRecord& record, const ontology::Ontology& o);
MatchCounts extract_matches_text(std::string_view doc_text, const ontology::Ontology& o);

// Sums count * weight over every link of every matched keyword, then
// normalizes per document so the emphases sum to 1.
ConceptVector concept_vector(const MatchCounts& matches, const ontology::Ontology& o);

struct IndexBuild {
    std::map<DocId, ConceptVector> vectors;
    InvertedIndex index;
};

// Runs the whole pipeline over a document set. Deterministic for a fixed
// input; throws InvalidInput on a duplicate document id.
IndexBuild build_index(const std::vector<std::pair<DocId, soif::SoifRecord>>& documents,
                       const ontology::Ontology& o);

// Inserts or removes a single document's postings, preserving the
// ordering invariant. Used for incremental single-document ingest.
void add_to_index(InvertedIndex& index, DocId doc, const ConceptVector& vector);
void remove_from_index(InvertedIndex& index, DocId doc, const ConceptVector& vector);

}  // namespace trilogy::indexer
