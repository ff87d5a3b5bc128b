#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace trilogy::soif {

// One attribute/value document summary. Values are raw byte strings and
// may contain anything, including newlines and braces; the byte-counted
// wire format below keeps them intact.
//
//   record     = "@" template-type " { " url LF attribute* "}" LF
//   attribute  = name "{" decimal-byte-count "}:" TAB value-bytes LF
//
// template-type and url contain no LF. Attribute names are non-empty and
// contain no whitespace and none of '{' '}' ':'.
struct SoifRecord {
    std::string template_type;
    std::string url;
    std::vector<std::pair<std::string, std::string>> attributes;

    // First value for the given attribute name, or empty if absent.
    std::string attribute(std::string_view name) const;
    bool has_attribute(std::string_view name) const;
    void set_attribute(std::string_view name, std::string value);

    bool operator==(const SoifRecord&) const = default;
};

bool valid_attribute_name(std::string_view name);

// Parses a stream of concatenated records. Whitespace between records is
// tolerated. Throws InvalidInput on a malformed header, a byte count that
// disagrees with the available bytes, or a missing closing brace; never
// reads past a declared byte count.
std::vector<SoifRecord> parse(std::string_view input);

// Inverse of parse, byte for byte. Throws InvalidInput on an invalid
// attribute name or a template type / url containing LF.
std::string serialize(const std::vector<SoifRecord>& records);
std::string serialize_record(const SoifRecord& record);

constexpr std::size_t kAbstractByteLimit = 500;

// Summarizes a source document into a record. media_hint selects the
// extractor:
//   "text" - title is the first non-empty line, abstract the leading text
//   "html" - title from <title> (or the first heading), keywords from the
//            meta keywords field, abstract from the tag-stripped body
//   "bib"  - source is one JSON object {"kind": ..., "fields": {...}};
//            the record's template type is the kind
// Every gathered record carries title, keywords, abstract, gathered-time
// (seconds since the Unix epoch) and file-size attributes. Throws
// InvalidInput on an empty source or unknown media_hint.
SoifRecord gather(std::string_view source, const std::string& media_hint, const std::string& url,
                  std::optional<std::int64_t> gathered_time = std::nullopt);

}  // namespace trilogy::soif
