#pragma once

// Shared test helpers: scratch directories, random corpus generation, and
// independent brute-force oracles for the indexing pipeline. The oracles
// deliberately avoid the library's matcher machinery: a naive tokenizer
// and a quadratic longest-phrase scan, so agreement actually checks the
// production path.

#include <unistd.h>

#include <algorithm>
#include <atomic>
#include <cctype>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <stdexcept>
#include <string>
#include <vector>

#include "trilogy/indexer.hpp"
#include "trilogy/ontology.hpp"
#include "trilogy/soif.hpp"

namespace testsupport {

namespace fs = std::filesystem;

class TempDir {
public:
    explicit TempDir(const std::string& tag = "trilogy") {
        static std::atomic<int> counter{0};
        path_ = fs::temp_directory_path() /
                (tag + "-" + std::to_string(::getpid()) + "-" +
                 std::to_string(counter.fetch_add(1)));
        fs::create_directories(path_);
    }
    ~TempDir() {
        std::error_code ec;
        fs::remove_all(path_, ec);
    }
    const fs::path& path() const { return path_; }

private:
    fs::path path_;
};

// ---------------------------------------------------------------------------
// Independent tokenizer + matcher (the oracle side of the dual route).
// ---------------------------------------------------------------------------

inline std::vector<std::string> naive_tokens(const std::string& s) {
    std::vector<std::string> out;
    std::string cur;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c))) {
            cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
        } else if (!cur.empty()) {
            out.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) out.push_back(cur);
    return out;
}

inline std::string naive_canonical(const std::string& phrase) {
    std::vector<std::string> toks = naive_tokens(phrase);
    std::string out;
    for (std::size_t i = 0; i < toks.size(); ++i) {
        if (i) out += ' ';
        out += toks[i];
    }
    return out;
}

inline trilogy::indexer::MatchCounts oracle_matches(const std::string& doc_text,
                                                    const trilogy::ontology::Ontology& o) {
    // Distinct canonical keyword phrases, longest (in tokens) first.
    std::vector<std::vector<std::string>> phrases;
    for (const auto& [canon, links] : o.keyword_table()) {
        std::vector<std::string> toks = naive_tokens(canon);
        if (!toks.empty()) phrases.push_back(toks);
    }
    std::sort(phrases.begin(), phrases.end(),
              [](const auto& a, const auto& b) { return a.size() > b.size(); });

    trilogy::indexer::MatchCounts counts;
    std::vector<std::string> tokens = naive_tokens(doc_text);
    std::size_t i = 0;
    while (i < tokens.size()) {
        bool matched = false;
        for (const auto& phrase : phrases) {
            if (phrase.size() > tokens.size() - i) continue;
            bool equal = true;
            for (std::size_t k = 0; k < phrase.size(); ++k) {
                if (tokens[i + k] != phrase[k]) {
                    equal = false;
                    break;
                }
            }
            if (equal) {
                std::string canon;
                for (std::size_t k = 0; k < phrase.size(); ++k) {
                    if (k) canon += ' ';
                    canon += phrase[k];
                }
                ++counts[canon];
                i += phrase.size();
                matched = true;
                break;
            }
        }
        if (!matched) ++i;
    }
    return counts;
}

inline trilogy::indexer::MatchCounts oracle_matches(const trilogy::soif::SoifRecord& record,
                                                    const trilogy::ontology::Ontology& o) {
    return oracle_matches(record.attribute("title") + "\n" + record.attribute("keywords") + "\n" +
                              record.attribute("abstract"),
                          o);
}

inline trilogy::indexer::ConceptVector oracle_vector(const trilogy::indexer::MatchCounts& matches,
                                                     const trilogy::ontology::Ontology& o) {
    std::map<std::string, double> raw;
    double total = 0.0;
    for (const auto& [keyword, count] : matches) {
        for (const trilogy::ontology::KeywordLink& link : o.links()) {
            if (naive_canonical(link.keyword) != keyword) continue;
            raw[link.concept_name] += static_cast<double>(count) * link.weight;
            total += static_cast<double>(count) * link.weight;
        }
    }
    trilogy::indexer::ConceptVector out;
    if (total <= 0.0) return out;
    for (const auto& [concept_name, score] : raw) out[concept_name] = score / total;
    return out;
}

struct OracleIndex {
    std::map<trilogy::indexer::DocId, trilogy::indexer::ConceptVector> vectors;
    trilogy::indexer::InvertedIndex index;
};

inline OracleIndex oracle_index(
    const std::vector<std::pair<trilogy::indexer::DocId, trilogy::soif::SoifRecord>>& docs,
    const trilogy::ontology::Ontology& o) {
    OracleIndex out;
    for (const auto& [id, record] : docs)
        out.vectors[id] = oracle_vector(oracle_matches(record, o), o);
    for (const auto& [id, vector] : out.vectors) {
        for (const auto& [concept_name, emphasis] : vector)
            out.index[concept_name].push_back({id, emphasis});
    }
    for (auto& [concept_name, postings] : out.index) {
        std::sort(postings.begin(), postings.end(), [](const auto& a, const auto& b) {
            if (a.emphasis != b.emphasis) return a.emphasis > b.emphasis;
            return a.doc < b.doc;
        });
    }
    return out;
}

// ---------------------------------------------------------------------------
// Random corpus generation.
// ---------------------------------------------------------------------------

inline std::string random_word(std::mt19937_64& rng, const std::string& prefix) {
    std::uniform_int_distribution<int> len(3, 8);
    std::uniform_int_distribution<int> letter(0, 25);
    std::string word = prefix;
    int n = len(rng);
    for (int i = 0; i < n; ++i) word.push_back(static_cast<char>('a' + letter(rng)));
    return word;
}

// A valid random ontology: a concept forest plus 1-3 token keywords with
// weights across the whole legal range. Some names carry mixed case so
// case-insensitivity stays exercised.
inline trilogy::ontology::Ontology random_ontology(std::mt19937_64& rng, int concept_count,
                                                   int link_count) {
    using trilogy::ontology::Concept;
    using trilogy::ontology::KeywordLink;

    std::vector<Concept> concepts;
    for (int i = 0; i < concept_count; ++i) {
        std::string name = "Topic " + std::to_string(i) + " " + random_word(rng, "");
        if (i % 3 == 0)
            for (char& c : name) c = static_cast<char>(std::toupper(static_cast<unsigned char>(c)));
        std::string parent;
        if (i > 0 && std::uniform_int_distribution<int>(0, 2)(rng) > 0)
            parent = concepts[std::uniform_int_distribution<std::size_t>(0, concepts.size() - 1)(
                                  rng)]
                         .name;
        concepts.push_back(Concept{name, parent});
    }

    std::vector<std::string> vocabulary;
    for (int i = 0; i < std::max(8, link_count / 2); ++i)
        vocabulary.push_back(random_word(rng, "kw"));

    std::vector<KeywordLink> links;
    std::set<std::pair<std::string, std::string>> seen;
    std::uniform_int_distribution<int> weight(trilogy::ontology::kMinWeight,
                                              trilogy::ontology::kMaxWeight);
    std::uniform_int_distribution<int> phrase_len(1, 3);
    int attempts = 0;
    while (static_cast<int>(links.size()) < link_count && attempts < link_count * 20) {
        ++attempts;
        int len = phrase_len(rng);
        std::vector<std::string> words;
        for (int i = 0; i < len; ++i)
            words.push_back(vocabulary[std::uniform_int_distribution<std::size_t>(
                0, vocabulary.size() - 1)(rng)]);
        std::string keyword;
        for (std::size_t i = 0; i < words.size(); ++i) {
            if (i) keyword += ' ';
            keyword += words[i];
        }
        const Concept& target =
            concepts[std::uniform_int_distribution<std::size_t>(0, concepts.size() - 1)(rng)];
        if (!seen.insert({naive_canonical(keyword), target.name}).second) continue;
        links.push_back(KeywordLink{keyword, target.name, weight(rng)});
    }

    auto o = trilogy::ontology::Ontology::from_parts(std::move(concepts), std::move(links));
    if (!o.validate().empty()) throw std::logic_error("random ontology generator produced junk");
    return o;
}

// Random text interleaving ontology keywords (so documents match) with
// noise words (so plenty of tokens match nothing).
inline std::string random_doc_text(std::mt19937_64& rng, const trilogy::ontology::Ontology& o,
                                   int words) {
    std::vector<std::string> keywords;
    for (const auto& [canon, links] : o.keyword_table()) keywords.push_back(canon);
    std::string out;
    for (int i = 0; i < words; ++i) {
        if (!out.empty()) out += ' ';
        if (!keywords.empty() && std::uniform_int_distribution<int>(0, 3)(rng) == 0) {
            out += keywords[std::uniform_int_distribution<std::size_t>(0, keywords.size() - 1)(
                rng)];
        } else {
            out += random_word(rng, "noise");
        }
    }
    return out;
}

inline trilogy::soif::SoifRecord random_record(std::mt19937_64& rng,
                                               const trilogy::ontology::Ontology& o, int serial) {
    trilogy::soif::SoifRecord r;
    r.template_type = "FILE";
    r.url = "file:///corpus/doc" + std::to_string(serial) + ".txt";
    r.attributes = {
        {"title", random_doc_text(rng, o, 6)},
        {"keywords", random_doc_text(rng, o, 4)},
        {"abstract", random_doc_text(rng, o, 30)},
        {"gathered-time", "1700000000"},
        {"file-size", "123"},
    };
    return r;
}

}  // namespace testsupport
