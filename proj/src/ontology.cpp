#include "trilogy/ontology.hpp"

#include <algorithm>
#include <fstream>
#include <set>
#include <sstream>

#include "trilogy/errors.hpp"
#include "trilogy/text.hpp"

namespace trilogy::ontology {

namespace {

using text::canonical_phrase;
using text::fold;

bool has_forbidden_chars(std::string_view s) {
    return s.find('\t') != std::string_view::npos || s.find('\n') != std::string_view::npos ||
           s.find('\r') != std::string_view::npos;
}

std::string check_concept_name(const std::string& name) {
    std::string trimmed = text::trim(name);
    if (trimmed.empty()) throw InvalidInput("concept name must not be empty");
    if (has_forbidden_chars(trimmed))
        throw InvalidInput("concept name must not contain tabs or newlines: \"" + trimmed + "\"");
    return trimmed;
}

void check_keyword(const std::string& keyword) {
    if (has_forbidden_chars(keyword))
        throw InvalidInput("keyword must not contain tabs or newlines: \"" + keyword + "\"");
    std::size_t tokens = text::split_ws(keyword).size();
    if (tokens == 0 || canonical_phrase(keyword).empty())
        throw InvalidInput("keyword must not be empty");
    if (tokens > kMaxKeywordTokens)
        throw InvalidInput("keyword \"" + keyword + "\" exceeds " +
                           std::to_string(kMaxKeywordTokens) + " tokens");
}

void check_weight(int weight) {
    if (weight < kMinWeight || weight > kMaxWeight)
        throw InvalidInput("weight out of bounds: " + std::to_string(weight) + " (must be in [" +
                           std::to_string(kMinWeight) + "," + std::to_string(kMaxWeight) + "])");
}

}  // namespace

Ontology Ontology::from_parts(std::vector<Concept> concepts, std::vector<KeywordLink> links) {
    Ontology o;
    o.concepts_ = std::move(concepts);
    o.links_ = std::move(links);
    o.rebuild_lookup();
    return o;
}

void Ontology::rebuild_lookup() {
    by_folded_name_.clear();
    keyword_table_.clear();
    for (std::size_t i = 0; i < concepts_.size(); ++i) {
        // First definition wins; validate() reports the duplicate.
        by_folded_name_.emplace(fold(concepts_[i].name), i);
    }
    for (std::size_t i = 0; i < links_.size(); ++i) {
        keyword_table_[canonical_phrase(links_[i].keyword)].push_back(i);
    }
}

const Concept* Ontology::find(std::string_view name) const {
    auto it = by_folded_name_.find(fold(name));
    if (it == by_folded_name_.end()) return nullptr;
    return &concepts_[it->second];
}

bool Ontology::has_concept(std::string_view name) const { return find(name) != nullptr; }

std::string Ontology::display_name(std::string_view concept_name) const {
    const Concept* c = find(concept_name);
    return c ? c->name : std::string{};
}

Ontology Ontology::add_concept(const std::string& name, const std::string& parent) const {
    std::string trimmed = check_concept_name(name);
    std::string parent_trimmed = text::trim(parent);
    if (find(trimmed)) throw InvalidInput("duplicate concept name: \"" + trimmed + "\"");
    if (!parent_trimmed.empty()) {
        if (text::iequals(parent_trimmed, trimmed))
            throw InvalidInput("concept \"" + trimmed + "\" cannot be its own parent");
        const Concept* p = find(parent_trimmed);
        if (!p) throw InvalidInput("unknown parent concept: \"" + parent_trimmed + "\"");
        // A brand-new node cannot otherwise close a cycle: nothing points
        // to it yet and the existing forest is acyclic.
        parent_trimmed = p->name;
    }
    std::vector<Concept> concepts = concepts_;
    concepts.push_back(Concept{trimmed, parent_trimmed});
    return from_parts(std::move(concepts), links_);
}

Ontology Ontology::set_link(const std::string& keyword, const std::string& concept_name,
                            int weight) const {
    std::string kw = text::trim(keyword);
    check_keyword(kw);
    check_weight(weight);
    const Concept* c = find(concept_name);
    if (!c) throw InvalidInput("unknown concept: \"" + text::trim(concept_name) + "\"");

    std::vector<KeywordLink> links = links_;
    std::string canon = canonical_phrase(kw);
    for (KeywordLink& link : links) {
        if (canonical_phrase(link.keyword) == canon && text::iequals(link.concept_name, c->name)) {
            link.weight = weight;
            return from_parts(concepts_, std::move(links));
        }
    }
    links.push_back(KeywordLink{kw, c->name, weight});
    return from_parts(concepts_, std::move(links));
}

std::vector<ConceptWeight> Ontology::concepts_for(std::string_view keyword) const {
    std::vector<ConceptWeight> out;
    auto it = keyword_table_.find(canonical_phrase(keyword));
    if (it == keyword_table_.end()) return out;
    for (std::size_t idx : it->second) {
        out.push_back(ConceptWeight{links_[idx].concept_name, links_[idx].weight});
    }
    std::sort(out.begin(), out.end(), [](const ConceptWeight& a, const ConceptWeight& b) {
        if (a.weight != b.weight) return a.weight > b.weight;
        return fold(a.concept_name) < fold(b.concept_name);
    });
    return out;
}

std::vector<std::string> Ontology::subtree(std::string_view concept_name) const {
    const Concept* root = find(concept_name);
    if (!root) throw InvalidInput("unknown concept: \"" + std::string(concept_name) + "\"");

    // Child lists keyed by folded parent name.
    std::map<std::string, std::vector<const Concept*>> children;
    for (const Concept& c : concepts_) {
        if (!c.parent.empty()) children[fold(c.parent)].push_back(&c);
    }

    std::vector<std::string> out;
    std::set<std::string> visited;  // guards against cyclic input
    std::vector<const Concept*> stack{root};
    while (!stack.empty()) {
        const Concept* c = stack.back();
        stack.pop_back();
        if (!visited.insert(fold(c->name)).second) continue;
        out.push_back(c->name);
        auto it = children.find(fold(c->name));
        if (it != children.end()) {
            for (const Concept* child : it->second) stack.push_back(child);
        }
    }
    std::sort(out.begin(), out.end(),
              [](const std::string& a, const std::string& b) { return fold(a) < fold(b); });
    return out;
}

std::vector<Violation> Ontology::validate() const {
    std::vector<Violation> out;

    std::set<std::string> seen_names;
    for (const Concept& c : concepts_) {
        if (text::trim(c.name).empty()) {
            out.push_back({"(concept)", "empty name"});
            continue;
        }
        if (has_forbidden_chars(c.name))
            out.push_back({c.name, "name contains tab or newline"});
        if (!seen_names.insert(fold(c.name)).second)
            out.push_back({c.name, "duplicate concept name"});
        if (!c.parent.empty() && !find(c.parent))
            out.push_back({c.name, "unknown parent \"" + c.parent + "\""});
    }

    // Walk each parent chain; revisiting a node within one walk is a cycle.
    for (const Concept& c : concepts_) {
        std::set<std::string> chain;
        const Concept* cur = &c;
        while (cur) {
            if (!chain.insert(fold(cur->name)).second) {
                out.push_back({c.name, "parent chain contains a cycle"});
                break;
            }
            cur = cur->parent.empty() ? nullptr : find(cur->parent);
        }
    }

    std::set<std::pair<std::string, std::string>> seen_pairs;
    for (const KeywordLink& link : links_) {
        std::string canon = canonical_phrase(link.keyword);
        if (canon.empty()) {
            out.push_back({"(link)", "empty keyword"});
        } else if (text::split_ws(link.keyword).size() > kMaxKeywordTokens) {
            out.push_back({link.keyword, "keyword exceeds " + std::to_string(kMaxKeywordTokens) +
                                             " tokens"});
        }
        if (has_forbidden_chars(link.keyword))
            out.push_back({link.keyword, "keyword contains tab or newline"});
        if (link.weight < kMinWeight || link.weight > kMaxWeight)
            out.push_back({link.keyword, "weight out of bounds: " + std::to_string(link.weight)});
        if (!find(link.concept_name))
            out.push_back({link.keyword, "link to unknown concept \"" + link.concept_name + "\""});
        if (!seen_pairs.insert({canon, fold(link.concept_name)}).second)
            out.push_back({link.keyword, "duplicate link to \"" + link.concept_name + "\""});
    }
    return out;
}

std::string Ontology::fingerprint() const {
    std::string blob = serialize_hierarchy(*this);
    blob.push_back('\0');
    blob += serialize_links(*this);
    return text::to_hex(text::fnv1a64(blob));
}

namespace {

struct TsvRow {
    std::size_t line_number;
    std::vector<std::string> fields;
};

std::vector<TsvRow> parse_tsv(const std::string& source) {
    std::vector<TsvRow> rows;
    std::size_t line_number = 0;
    std::istringstream in(source);
    std::string line;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = text::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        rows.push_back({line_number, text::split(line, '\t')});
    }
    return rows;
}

[[noreturn]] void malformed(const char* what, std::size_t line) {
    throw InvalidInput(std::string("malformed ") + what + " row at line " + std::to_string(line));
}

}  // namespace

Ontology load_ontology(const std::string& hierarchy_source, const std::string& links_source) {
    std::vector<Concept> concepts;
    for (const TsvRow& row : parse_tsv(hierarchy_source)) {
        if (row.fields.empty() || row.fields.size() > 2) malformed("hierarchy", row.line_number);
        std::string name = text::trim(row.fields[0]);
        std::string parent = row.fields.size() == 2 ? text::trim(row.fields[1]) : std::string{};
        if (name.empty()) malformed("hierarchy", row.line_number);
        concepts.push_back(Concept{std::move(name), std::move(parent)});
    }

    std::vector<KeywordLink> links;
    for (const TsvRow& row : parse_tsv(links_source)) {
        if (row.fields.size() != 3) malformed("link", row.line_number);
        std::string keyword = text::trim(row.fields[0]);
        std::string concept_name = text::trim(row.fields[1]);
        std::string weight_text = text::trim(row.fields[2]);
        if (keyword.empty() || concept_name.empty() || weight_text.empty())
            malformed("link", row.line_number);
        int weight = 0;
        try {
            std::size_t consumed = 0;
            weight = std::stoi(weight_text, &consumed);
            if (consumed != weight_text.size()) malformed("link", row.line_number);
        } catch (const std::logic_error&) {
            malformed("link", row.line_number);
        }
        links.push_back(KeywordLink{std::move(keyword), std::move(concept_name), weight});
    }

    Ontology o = Ontology::from_parts(std::move(concepts), std::move(links));
    std::vector<Violation> violations = o.validate();
    if (!violations.empty()) {
        std::string msg = violations.front().to_string();
        if (violations.size() > 1)
            msg += " (and " + std::to_string(violations.size() - 1) + " more)";
        throw InvalidInput("invalid ontology: " + msg);
    }
    return o;
}

namespace {

std::string read_file_text(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file_text(const std::filesystem::path& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write " + path.string());
    out << content;
    if (!out) throw IoError("write failed for " + path.string());
}

}  // namespace

Ontology load_ontology_files(const std::filesystem::path& hierarchy_file,
                             const std::filesystem::path& links_file) {
    return load_ontology(read_file_text(hierarchy_file), read_file_text(links_file));
}

std::string serialize_hierarchy(const Ontology& o) {
    std::string out;
    for (const Concept& c : o.concepts()) {
        out += c.name;
        out += '\t';
        out += c.parent;
        out += '\n';
    }
    return out;
}

std::string serialize_links(const Ontology& o) {
    std::string out;
    for (const KeywordLink& link : o.links()) {
        out += link.keyword;
        out += '\t';
        out += link.concept_name;
        out += '\t';
        out += std::to_string(link.weight);
        out += '\n';
    }
    return out;
}

void save_ontology_files(const Ontology& o, const std::filesystem::path& hierarchy_file,
                         const std::filesystem::path& links_file) {
    write_file_text(hierarchy_file, serialize_hierarchy(o));
    write_file_text(links_file, serialize_links(o));
}

const char* const kSeedHierarchyTsv =
    "# concept\tparent\n"
    "ATM General\t\n"
    "SDH General\t\n"
    "Analytical Models\t\n"
    "Simulation Models\t\n"
    "High Speed LANs and MANs\t\n"
    "Optical Networks\t\n"
    "Wireless ATM\tATM General\n"
    "Adaptation Layer And Transport Layer\tATM General\n"
    "ATM Introduction\tATM General\n"
    "ATM Bandwidth allocation\tATM General\n"
    "SDH Networking and Components\tSDH General\n"
    "Wavelength Division Multiplexing\tOptical Networks\n";

const char* const kSeedLinksTsv =
    "# keyword\tconcept\tweight\n"
    "Aal\tAdaptation Layer And Transport Layer\t20\n"
    "Aal\tATM Introduction\t3\n"
    "Connection admission control\tATM Bandwidth allocation\t10\n"
    "Regenerator section\tSDH Networking and Components\t8\n"
    "WDM\tWavelength Division Multiplexing\t15\n";

Ontology seed_ontology() { return load_ontology(kSeedHierarchyTsv, kSeedLinksTsv); }

Ontology load_or_seed(const std::filesystem::path& ontology_dir) {
    std::filesystem::path hierarchy = ontology_dir / "hierarchy.tsv";
    std::filesystem::path links = ontology_dir / "links.tsv";
    if (!std::filesystem::exists(hierarchy) || !std::filesystem::exists(links)) {
        std::filesystem::create_directories(ontology_dir);
        write_file_text(hierarchy, kSeedHierarchyTsv);
        write_file_text(links, kSeedLinksTsv);
    }
    return load_ontology_files(hierarchy, links);
}

}  // namespace trilogy::ontology
