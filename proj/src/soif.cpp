#include "trilogy/soif.hpp"

#include <algorithm>
#include <set>

#include <nlohmann/json.hpp>

#include "trilogy/errors.hpp"
#include "trilogy/text.hpp"

namespace trilogy::soif {

std::string SoifRecord::attribute(std::string_view name) const {
    for (const auto& [n, v] : attributes) {
        if (n == name) return v;
    }
    return {};
}

bool SoifRecord::has_attribute(std::string_view name) const {
    return std::any_of(attributes.begin(), attributes.end(),
                       [&](const auto& a) { return a.first == name; });
}

void SoifRecord::set_attribute(std::string_view name, std::string value) {
    for (auto& [n, v] : attributes) {
        if (n == name) {
            v = std::move(value);
            return;
        }
    }
    attributes.emplace_back(std::string(name), std::move(value));
}

bool valid_attribute_name(std::string_view name) {
    if (name.empty()) return false;
    for (char c : name) {
        unsigned char u = static_cast<unsigned char>(c);
        if (u <= ' ' || u == 0x7F) return false;  // no whitespace or control bytes
        if (c == '{' || c == '}' || c == ':') return false;
    }
    return true;
}

namespace {

class Parser {
public:
    explicit Parser(std::string_view input) : input_(input) {}

    std::vector<SoifRecord> run() {
        std::vector<SoifRecord> records;
        skip_whitespace();
        while (pos_ < input_.size()) {
            records.push_back(parse_record());
            skip_whitespace();
        }
        return records;
    }

private:
    [[noreturn]] void fail(const std::string& what) const {
        throw InvalidInput("soif parse error at byte " + std::to_string(pos_) + ": " + what);
    }

    void skip_whitespace() {
        while (pos_ < input_.size()) {
            char c = input_[pos_];
            if (c == ' ' || c == '\t' || c == '\r' || c == '\n') ++pos_;
            else break;
        }
    }

    SoifRecord parse_record() {
        if (input_[pos_] != '@') fail("expected '@' to start a record");
        ++pos_;
        std::size_t line_end = input_.find('\n', pos_);
        if (line_end == std::string_view::npos) fail("record header has no line terminator");
        std::string_view header = input_.substr(pos_, line_end - pos_);
        std::size_t sep = header.find(" { ");
        if (sep == std::string_view::npos || sep == 0) fail("record header must be '@TYPE { url'");
        SoifRecord record;
        record.template_type = std::string(header.substr(0, sep));
        record.url = std::string(header.substr(sep + 3));
        if (record.url.empty()) fail("record header has an empty url");
        pos_ = line_end + 1;

        while (true) {
            if (pos_ >= input_.size()) fail("record is missing its closing '}'");
            if (input_[pos_] == '}') {
                ++pos_;
                if (pos_ < input_.size()) {
                    if (input_[pos_] != '\n') fail("expected LF after closing '}'");
                    ++pos_;
                }
                return record;
            }
            record.attributes.push_back(parse_attribute());
        }
    }

    std::pair<std::string, std::string> parse_attribute() {
        std::size_t name_end = pos_;
        while (name_end < input_.size() && input_[name_end] != '{' && input_[name_end] != '\n')
            ++name_end;
        if (name_end >= input_.size() || input_[name_end] != '{')
            fail("attribute has no '{byte-count}'");
        std::string name(input_.substr(pos_, name_end - pos_));
        if (!valid_attribute_name(name)) fail("invalid attribute name \"" + name + "\"");
        pos_ = name_end + 1;

        std::uint64_t count = 0;
        std::size_t digits = 0;
        while (pos_ < input_.size() && input_[pos_] >= '0' && input_[pos_] <= '9') {
            count = count * 10 + static_cast<std::uint64_t>(input_[pos_] - '0');
            ++digits;
            // Anything near 2^63 cannot possibly fit in the input; stop
            // before the accumulator can overflow.
            if (digits > 18) fail("byte count is absurdly large");
            ++pos_;
        }
        if (digits == 0) fail("attribute byte count missing");
        if (pos_ >= input_.size() || input_[pos_] != '}') fail("attribute byte count not closed");
        ++pos_;
        if (pos_ >= input_.size() || input_[pos_] != ':') fail("expected ':' after byte count");
        ++pos_;
        if (pos_ >= input_.size() || input_[pos_] != '\t') fail("expected TAB before value");
        ++pos_;

        if (count > input_.size() - pos_)
            fail("declared byte count " + std::to_string(count) + " exceeds remaining input");
        std::string value(input_.substr(pos_, static_cast<std::size_t>(count)));
        pos_ += static_cast<std::size_t>(count);
        if (pos_ >= input_.size() || input_[pos_] != '\n')
            fail("declared byte count disagrees with value length (no LF after value)");
        ++pos_;
        return {std::move(name), std::move(value)};
    }

    std::string_view input_;
    std::size_t pos_ = 0;
};

void check_header_field(const std::string& s, const char* what) {
    if (s.find('\n') != std::string::npos)
        throw InvalidInput(std::string(what) + " must not contain LF");
}

}  // namespace

std::vector<SoifRecord> parse(std::string_view input) { return Parser(input).run(); }

std::string serialize_record(const SoifRecord& record) {
    if (record.template_type.empty()) throw InvalidInput("record template type must not be empty");
    if (record.url.empty()) throw InvalidInput("record url must not be empty");
    check_header_field(record.template_type, "template type");
    check_header_field(record.url, "url");
    if (record.template_type.find(" { ") != std::string::npos)
        throw InvalidInput("template type must not contain the header separator");

    std::string out;
    out += '@';
    out += record.template_type;
    out += " { ";
    out += record.url;
    out += '\n';
    for (const auto& [name, value] : record.attributes) {
        if (!valid_attribute_name(name))
            throw InvalidInput("invalid attribute name \"" + name + "\"");
        out += name;
        out += '{';
        out += std::to_string(value.size());
        out += "}:\t";
        out += value;
        out += '\n';
    }
    out += "}\n";
    return out;
}

std::string serialize(const std::vector<SoifRecord>& records) {
    std::string out;
    for (const SoifRecord& r : records) out += serialize_record(r);
    return out;
}

namespace {

std::string first_nonempty_line(std::string_view s) {
    for (const std::string& line : text::split(s, '\n')) {
        std::string t = text::trim(line);
        if (!t.empty()) return t;
    }
    return {};
}

// Minimal entity decoding; enough for titles and abstracts.
std::string decode_entities(std::string_view s) {
    static const std::pair<const char*, const char*> table[] = {
        {"&amp;", "&"}, {"&lt;", "<"},   {"&gt;", ">"},
        {"&quot;", "\""}, {"&apos;", "'"}, {"&#39;", "'"}, {"&nbsp;", " "},
    };
    std::string out;
    out.reserve(s.size());
    std::size_t i = 0;
    while (i < s.size()) {
        bool replaced = false;
        if (s[i] == '&') {
            for (const auto& [from, to] : table) {
                std::size_t n = std::string_view(from).size();
                if (s.substr(i, n) == from) {
                    out += to;
                    i += n;
                    replaced = true;
                    break;
                }
            }
        }
        if (!replaced) out.push_back(s[i++]);
    }
    return out;
}

struct HtmlExtract {
    std::string title;
    std::string keywords;
    std::string body_text;
};

bool tag_name_is(std::string_view tag, std::string_view name) {
    if (tag.size() < name.size()) return false;
    if (!text::iequals(tag.substr(0, name.size()), name)) return false;
    return tag.size() == name.size() || !isalnum(static_cast<unsigned char>(tag[name.size()]));
}

// Pulls an attribute value out of a tag body: attr="..." or attr='...'.
std::string tag_attribute(std::string_view tag, std::string_view attr) {
    std::string folded = text::fold(tag);
    std::string needle = text::fold(attr);
    std::size_t pos = 0;
    while ((pos = folded.find(needle, pos)) != std::string::npos) {
        std::size_t after = pos + needle.size();
        while (after < folded.size() && (folded[after] == ' ' || folded[after] == '=')) {
            if (folded[after] == '=') {
                std::size_t v = after + 1;
                while (v < tag.size() && tag[v] == ' ') ++v;
                if (v < tag.size() && (tag[v] == '"' || tag[v] == '\'')) {
                    char quote = tag[v];
                    std::size_t end = tag.find(quote, v + 1);
                    if (end == std::string_view::npos) return {};
                    return std::string(tag.substr(v + 1, end - v - 1));
                }
                std::size_t end = v;
                while (end < tag.size() && tag[end] != ' ' && tag[end] != '>') ++end;
                return std::string(tag.substr(v, end - v));
            }
            ++after;
        }
        pos = after;
    }
    return {};
}

HtmlExtract extract_html(std::string_view source) {
    HtmlExtract out;
    std::string body;
    std::string title;
    std::string first_heading;
    bool in_title = false;
    bool in_heading = false;
    bool heading_done = false;

    std::size_t i = 0;
    while (i < source.size()) {
        if (source[i] == '<') {
            // Comments and script/style blocks are skipped wholesale.
            if (source.substr(i, 4) == "<!--") {
                std::size_t end = source.find("-->", i + 4);
                i = end == std::string_view::npos ? source.size() : end + 3;
                continue;
            }
            std::size_t close = source.find('>', i + 1);
            if (close == std::string_view::npos) break;
            std::string_view tag = source.substr(i + 1, close - i - 1);
            bool closing = !tag.empty() && tag[0] == '/';
            std::string_view name = closing ? tag.substr(1) : tag;

            if (!closing && (tag_name_is(name, "script") || tag_name_is(name, "style"))) {
                std::string folded = text::fold(std::string(source.substr(close)));
                std::string end_tag = tag_name_is(name, "script") ? "</script" : "</style";
                std::size_t end = folded.find(end_tag);
                if (end == std::string::npos) break;
                std::size_t end_close = source.find('>', close + end);
                i = end_close == std::string_view::npos ? source.size() : end_close + 1;
                continue;
            }
            if (tag_name_is(name, "title")) {
                in_title = !closing;
            } else if (name.size() == 2 && (name[0] == 'h' || name[0] == 'H') && name[1] >= '1' &&
                       name[1] <= '6') {
                if (!closing && !heading_done) in_heading = true;
                if (closing && in_heading) {
                    in_heading = false;
                    heading_done = true;
                }
            } else if (!closing && tag_name_is(name, "meta")) {
                if (text::iequals(text::fold(tag_attribute(tag, "name")), "keywords"))
                    out.keywords = text::collapse_ws(decode_entities(tag_attribute(tag, "content")));
            }
            body.push_back(' ');  // tags separate words
            i = close + 1;
            continue;
        }
        char c = source[i];
        if (in_title) title.push_back(c);
        if (in_heading) first_heading.push_back(c);
        body.push_back(c);
        ++i;
    }

    out.title = text::collapse_ws(decode_entities(title));
    if (out.title.empty()) out.title = text::collapse_ws(decode_entities(first_heading));
    out.body_text = text::collapse_ws(decode_entities(body));
    if (out.title.empty()) out.title = first_nonempty_line(out.body_text);
    return out;
}

const std::set<std::string>& bib_kinds() {
    static const std::set<std::string> kinds = {
        "conference_article", "book",   "book_chapter",
        "journal_article",    "thesis", "technical_report",
    };
    return kinds;
}

}  // namespace

SoifRecord gather(std::string_view source, const std::string& media_hint, const std::string& url,
                  std::optional<std::int64_t> gathered_time) {
    if (source.empty()) throw InvalidInput("cannot gather an empty source");
    if (url.empty()) throw InvalidInput("cannot gather without a url");

    SoifRecord record;
    record.url = url;
    std::string title;
    std::string keywords;
    std::string abstract;
    std::vector<std::pair<std::string, std::string>> extra;

    if (media_hint == "text") {
        record.template_type = "FILE";
        title = first_nonempty_line(source);
        abstract = text::trim(source);
    } else if (media_hint == "html") {
        record.template_type = "FILE";
        HtmlExtract extract = extract_html(source);
        title = extract.title;
        keywords = extract.keywords;
        abstract = extract.body_text;
    } else if (media_hint == "bib") {
        nlohmann::json doc = nlohmann::json::parse(source, nullptr, false);
        if (doc.is_discarded() || !doc.is_object() || !doc.contains("kind") ||
            !doc["kind"].is_string() || !doc.contains("fields") || !doc["fields"].is_object())
            throw InvalidInput("bib source must be a JSON object with \"kind\" and \"fields\"");
        std::string kind = doc["kind"].get<std::string>();
        if (!bib_kinds().count(kind)) throw InvalidInput("unknown document kind \"" + kind + "\"");
        record.template_type = kind;
        for (const auto& [name, value] : doc["fields"].items()) {
            if (!value.is_string()) throw InvalidInput("bib field \"" + name + "\" must be text");
            if (name == "title") title = value.get<std::string>();
            else if (name == "keywords") keywords = value.get<std::string>();
            else if (name == "abstract") abstract = value.get<std::string>();
            else if (name != "url") extra.emplace_back(name, value.get<std::string>());
        }
    } else {
        throw InvalidInput("unknown media hint \"" + media_hint + "\"");
    }

    record.attributes.emplace_back("title", title);
    record.attributes.emplace_back("keywords", keywords);
    record.attributes.emplace_back("abstract", text::truncate_utf8(abstract, kAbstractByteLimit));
    std::int64_t when = gathered_time ? *gathered_time : text::now_epoch_seconds();
    record.attributes.emplace_back("gathered-time", std::to_string(when));
    record.attributes.emplace_back("file-size", std::to_string(source.size()));
    for (auto& [name, value] : extra) {
        if (valid_attribute_name(name)) record.attributes.emplace_back(name, std::move(value));
    }
    return record;
}

}  // namespace trilogy::soif
