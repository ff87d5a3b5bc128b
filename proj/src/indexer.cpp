#include "trilogy/indexer.hpp"

#include <algorithm>

#include "trilogy/errors.hpp"
#include "trilogy/text.hpp"

namespace trilogy::indexer {

PhraseMatcher::PhraseMatcher(const std::vector<std::string>& phrases) {
    for (const std::string& phrase : phrases) {
        std::vector<std::string> tokens = text::tokenize(phrase);
        if (tokens.empty()) continue;
        std::string canon = text::join(tokens, " ");
        if (std::find(canonical_.begin(), canonical_.end(), canon) != canonical_.end()) continue;
        phrase_tokens_.push_back(std::move(tokens));
        canonical_.push_back(std::move(canon));
    }
    for (std::size_t i = 0; i < phrase_tokens_.size(); ++i) {
        by_first_token_[phrase_tokens_[i][0]].push_back({i, phrase_tokens_[i].size()});
    }
    for (auto& [first, candidates] : by_first_token_) {
        std::sort(candidates.begin(), candidates.end(),
                  [&](const Candidate& a, const Candidate& b) {
                      if (a.length != b.length) return a.length > b.length;
                      return canonical_[a.phrase_index] < canonical_[b.phrase_index];
                  });
    }
}

PhraseMatcher PhraseMatcher::for_ontology(const ontology::Ontology& o) {
    std::vector<std::string> phrases;
    phrases.reserve(o.keyword_table().size());
    for (const auto& [canon, links] : o.keyword_table()) phrases.push_back(canon);
    return PhraseMatcher(phrases);
}

std::map<std::string, int> PhraseMatcher::count(std::string_view doc_text) const {
    return count_tokens(text::tokenize(doc_text));
}

std::map<std::string, int> PhraseMatcher::count_tokens(
    const std::vector<std::string>& tokens) const {
    std::map<std::string, int> counts;
    std::size_t i = 0;
    while (i < tokens.size()) {
        auto it = by_first_token_.find(tokens[i]);
        std::size_t advance = 1;
        if (it != by_first_token_.end()) {
            // Candidates come longest first, so the first hit wins and the
            // scan skips the matched span (non-overlapping).
            for (const Candidate& cand : it->second) {
                if (cand.length > tokens.size() - i) continue;
                const std::vector<std::string>& phrase = phrase_tokens_[cand.phrase_index];
                bool match = true;
                for (std::size_t k = 1; k < cand.length; ++k) {
                    if (tokens[i + k] != phrase[k]) {
                        match = false;
                        break;
                    }
                }
                if (match) {
                    ++counts[canonical_[cand.phrase_index]];
                    advance = cand.length;
                    break;
                }
            }
        }
        i += advance;
    }
    return counts;
}

PhraseMatcher::Segmentation PhraseMatcher::segment(std::string_view doc_text) const {
    Segmentation out;
    std::vector<std::string> tokens = text::tokenize(doc_text);
    std::size_t i = 0;
    while (i < tokens.size()) {
        auto it = by_first_token_.find(tokens[i]);
        std::size_t advance = 0;
        if (it != by_first_token_.end()) {
            for (const Candidate& cand : it->second) {
                if (cand.length > tokens.size() - i) continue;
                const std::vector<std::string>& phrase = phrase_tokens_[cand.phrase_index];
                bool match = true;
                for (std::size_t k = 1; k < cand.length; ++k) {
                    if (tokens[i + k] != phrase[k]) {
                        match = false;
                        break;
                    }
                }
                if (match) {
                    ++out.counts[canonical_[cand.phrase_index]];
                    advance = cand.length;
                    break;
                }
            }
        }
        if (advance == 0) {
            out.unmatched_tokens.push_back(tokens[i]);
            advance = 1;
        }
        i += advance;
    }
    return out;
}

std::string matchable_text(const soif::SoifRecord& record) {
    std::string out = record.attribute("title");
    out += '\n';
    out += record.attribute("keywords");
    out += '\n';
    out += record.attribute("abstract");
    return out;
}

MatchCounts extract_matches(const soif::SoifRecord& record, const ontology::Ontology& o) {
    return extract_matches_text(matchable_text(record), o);
}

MatchCounts extract_matches_text(std::string_view doc_text, const ontology::Ontology& o) {
    return PhraseMatcher::for_ontology(o).count(doc_text);
}

ConceptVector concept_vector(const MatchCounts& matches, const ontology::Ontology& o) {
    ConceptVector raw;
    double total = 0.0;
    const auto& table = o.keyword_table();
    for (const auto& [keyword, count] : matches) {
        auto it = table.find(keyword);
        if (it == table.end())
            throw InvalidInput("matched keyword \"" + keyword + "\" is not in the ontology");
        for (std::size_t link_index : it->second) {
            const ontology::KeywordLink& link = o.links()[link_index];
            double contribution = static_cast<double>(count) * link.weight;
            raw[link.concept_name] += contribution;
            total += contribution;
        }
    }
    if (total <= 0.0) return {};
    for (auto& [concept_name, score] : raw) score /= total;
    return raw;
}

namespace {

void sort_postings(std::vector<Posting>& postings) {
    std::sort(postings.begin(), postings.end(), [](const Posting& a, const Posting& b) {
        if (a.emphasis != b.emphasis) return a.emphasis > b.emphasis;
        return a.doc < b.doc;
    });
}

}  // namespace

IndexBuild build_index(const std::vector<std::pair<DocId, soif::SoifRecord>>& documents,
                       const ontology::Ontology& o) {
    IndexBuild out;
    PhraseMatcher matcher = PhraseMatcher::for_ontology(o);
    for (const auto& [id, record] : documents) {
        if (out.vectors.count(id))
            throw InvalidInput("duplicate document id " + std::to_string(id));
        MatchCounts matches = matcher.count(matchable_text(record));
        out.vectors.emplace(id, concept_vector(matches, o));
    }
    for (const auto& [id, vector] : out.vectors) {
        for (const auto& [concept_name, emphasis] : vector)
            out.index[concept_name].push_back(Posting{id, emphasis});
    }
    for (auto& [concept_name, postings] : out.index) sort_postings(postings);
    return out;
}

void add_to_index(InvertedIndex& index, DocId doc, const ConceptVector& vector) {
    for (const auto& [concept_name, emphasis] : vector) {
        std::vector<Posting>& postings = index[concept_name];
        Posting p{doc, emphasis};
        auto pos = std::lower_bound(postings.begin(), postings.end(), p,
                                    [](const Posting& a, const Posting& b) {
                                        if (a.emphasis != b.emphasis) return a.emphasis > b.emphasis;
                                        return a.doc < b.doc;
                                    });
        postings.insert(pos, p);
    }
}

void remove_from_index(InvertedIndex& index, DocId doc, const ConceptVector& vector) {
    for (const auto& [concept_name, emphasis] : vector) {
        auto it = index.find(concept_name);
        if (it == index.end()) continue;
        std::erase_if(it->second, [&](const Posting& p) { return p.doc == doc; });
        if (it->second.empty()) index.erase(it);
    }
}

}  // namespace trilogy::indexer
