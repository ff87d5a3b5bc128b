#pragma once

#include <chrono>
#include <map>
#include <string>
#include <vector>

#include "trilogy/soif.hpp"

namespace trilogy::ingest {

// The six document kinds a contributor can submit.
enum class DocKind {
    ConferenceArticle,
    Book,
    BookChapter,
    JournalArticle,
    Thesis,
    TechnicalReport,
};

constexpr std::size_t kDocKindCount = 6;
const std::vector<DocKind>& all_kinds();

const char* kind_name(DocKind kind);
DocKind kind_from_name(const std::string& name);  // throws InvalidInput

struct FieldSpec {
    std::string name;
    bool required = true;
};

// The per-kind entry form: field order drives interactive prompting.
const std::vector<FieldSpec>& required_fields(DocKind kind);

struct BibRecord {
    DocKind kind = DocKind::ConferenceArticle;
    std::map<std::string, std::string> fields;
};

// Validates against the kind's schema: every required field present and
// non-empty, no unknown fields, year a 4-digit integer, author lists
// (split on ';') free of empty names. Throws InvalidInput naming the
// offending field.
BibRecord build_record(DocKind kind, const std::map<std::string, std::string>& fields);

std::vector<std::string> split_authors(const std::string& authors);

// Converts to a SOIF record: template type is the kind name and each bib
// field becomes a same-named attribute. Records without a url get a
// deterministic synthesized one, "bib:<kind>:<hash-of-fields>", so the
// same fields always collide at the broker and differing fields almost
// surely do not.
soif::SoifRecord to_soif(const BibRecord& record);

// Parses one line of the batch format: {"kind": ..., "fields": {...}}.
BibRecord parse_batch_line(const std::string& line);

struct SubmitReceipt {
    std::string resource_name;
    std::int64_t doc_id = 0;
};

// Sends the record to a broker's add-document service. Broker-side
// rejections (duplicate url, validation) are relayed verbatim as
// InvalidInput; transport problems surface as NetError.
SubmitReceipt submit(const BibRecord& record, const std::string& broker_address,
                     const std::string& user = "ingest",
                     std::chrono::milliseconds timeout = std::chrono::milliseconds(5000));

}  // namespace trilogy::ingest
