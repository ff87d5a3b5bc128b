#include "trilogy/ingest.hpp"

#include <algorithm>

#include <nlohmann/json.hpp>

#include "trilogy/client.hpp"
#include "trilogy/errors.hpp"
#include "trilogy/text.hpp"

namespace trilogy::ingest {

using nlohmann::json;

const std::vector<DocKind>& all_kinds() {
    static const std::vector<DocKind> kinds = {
        DocKind::ConferenceArticle, DocKind::Book,   DocKind::BookChapter,
        DocKind::JournalArticle,    DocKind::Thesis, DocKind::TechnicalReport,
    };
    return kinds;
}

const char* kind_name(DocKind kind) {
    switch (kind) {
        case DocKind::ConferenceArticle: return "conference_article";
        case DocKind::Book: return "book";
        case DocKind::BookChapter: return "book_chapter";
        case DocKind::JournalArticle: return "journal_article";
        case DocKind::Thesis: return "thesis";
        case DocKind::TechnicalReport: return "technical_report";
    }
    return "conference_article";
}

DocKind kind_from_name(const std::string& name) {
    for (DocKind kind : all_kinds()) {
        if (name == kind_name(kind)) return kind;
    }
    throw InvalidInput("unknown document kind \"" + name + "\"");
}

const std::vector<FieldSpec>& required_fields(DocKind kind) {
    static const std::vector<FieldSpec> conference_article = {
        {"title", true},    {"authors", true},  {"conference", true}, {"year", true},
        {"keywords", true}, {"abstract", false}, {"url", false},
    };
    static const std::vector<FieldSpec> book = {
        {"title", true},   {"authors", true},  {"publisher", true}, {"year", true},
        {"isbn", false},   {"keywords", true}, {"abstract", false}, {"url", false},
    };
    static const std::vector<FieldSpec> book_chapter = {
        {"title", true},     {"chapter_title", true}, {"authors", true},
        {"editors", true},   {"publisher", true},     {"year", true},
        {"isbn", false},     {"keywords", true},      {"abstract", false},
        {"url", false},
    };
    static const std::vector<FieldSpec> journal_article = {
        {"title", true},    {"authors", true},  {"journal", true},   {"volume", false},
        {"year", true},     {"keywords", true}, {"abstract", false}, {"url", false},
    };
    static const std::vector<FieldSpec> thesis = {
        {"title", true},  {"author", true},   {"institution", true}, {"year", true},
        {"degree", true}, {"keywords", true}, {"abstract", false},   {"url", false},
    };
    static const std::vector<FieldSpec> technical_report = {
        {"title", true},          {"authors", true},  {"institution", true},
        {"report_number", false}, {"year", true},     {"keywords", true},
        {"abstract", false},      {"url", false},
    };
    switch (kind) {
        case DocKind::ConferenceArticle: return conference_article;
        case DocKind::Book: return book;
        case DocKind::BookChapter: return book_chapter;
        case DocKind::JournalArticle: return journal_article;
        case DocKind::Thesis: return thesis;
        case DocKind::TechnicalReport: return technical_report;
    }
    return conference_article;
}

std::vector<std::string> split_authors(const std::string& authors) {
    std::vector<std::string> out;
    for (const std::string& part : text::split(authors, ';')) {
        std::string t = text::trim(part);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

BibRecord build_record(DocKind kind, const std::map<std::string, std::string>& fields) {
    const std::vector<FieldSpec>& schema = required_fields(kind);

    for (const auto& [name, value] : fields) {
        bool known = std::any_of(schema.begin(), schema.end(),
                                 [&](const FieldSpec& f) { return f.name == name; });
        if (!known)
            throw InvalidInput("unknown field \"" + name + "\" for kind " + kind_name(kind));
    }

    BibRecord record;
    record.kind = kind;
    for (const FieldSpec& spec : schema) {
        auto it = fields.find(spec.name);
        std::string value = it == fields.end() ? std::string{} : text::trim(it->second);
        if (value.empty()) {
            if (spec.required)
                throw InvalidInput("missing required field \"" + spec.name + "\"");
            continue;
        }
        if (spec.name == "year") {
            bool ok = value.size() == 4 && std::all_of(value.begin(), value.end(), [](char c) {
                          return c >= '0' && c <= '9';
                      });
            if (!ok)
                throw InvalidInput("malformed year \"" + value + "\" (must be a 4-digit integer)");
        }
        if (spec.name == "authors" || spec.name == "editors") {
            if (split_authors(value).empty())
                throw InvalidInput("field \"" + spec.name + "\" names nobody");
        }
        record.fields[spec.name] = value;
    }
    return record;
}

namespace {

std::string synthesized_url(const BibRecord& record) {
    // Canonical serialization so identical field maps always hash alike.
    std::string blob = kind_name(record.kind);
    for (const auto& [name, value] : record.fields) {  // std::map: sorted
        blob += '\x1f';
        blob += name;
        blob += '\x1e';
        blob += value;
    }
    return std::string("bib:") + kind_name(record.kind) + ":" +
           text::to_hex(text::fnv1a64(blob));
}

}  // namespace

soif::SoifRecord to_soif(const BibRecord& record) {
    soif::SoifRecord out;
    out.template_type = kind_name(record.kind);
    auto url = record.fields.find("url");
    out.url = url != record.fields.end() ? url->second : synthesized_url(record);
    for (const FieldSpec& spec : required_fields(record.kind)) {
        if (spec.name == "url") continue;
        auto it = record.fields.find(spec.name);
        if (it != record.fields.end()) out.attributes.emplace_back(spec.name, it->second);
    }
    return out;
}

BibRecord parse_batch_line(const std::string& line) {
    json j = json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object() || !j.contains("kind") || !j.contains("fields") ||
        !j["kind"].is_string() || !j["fields"].is_object())
        throw InvalidInput("batch line must be {\"kind\": ..., \"fields\": {...}}");
    std::map<std::string, std::string> fields;
    for (const auto& [name, value] : j["fields"].items()) {
        if (!value.is_string()) throw InvalidInput("field \"" + name + "\" must be text");
        fields[name] = value.get<std::string>();
    }
    return build_record(kind_from_name(j["kind"].get<std::string>()), fields);
}

SubmitReceipt submit(const BibRecord& record, const std::string& broker_address,
                     const std::string& user, std::chrono::milliseconds timeout) {
    std::string soif_text = soif::serialize_record(to_soif(record));
    agentbus::ServiceOutcome outcome =
        agentbus::request_service(broker_address, broker::kAddDocument, {soif_text},
                                  agentbus::agent_name("paa", user), user, timeout);
    if (!outcome.ok) throw InvalidInput(outcome.error_reason);
    return SubmitReceipt{outcome.payload.value("resource", ""),
                         outcome.payload.value("id", std::int64_t{0})};
}

}  // namespace trilogy::ingest
