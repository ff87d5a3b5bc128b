#include "trilogy/config.hpp"

#include <fstream>
#include <sstream>

#include "trilogy/errors.hpp"
#include "trilogy/text.hpp"

namespace trilogy::config {

std::map<std::string, std::string> parse_kv_text(const std::string& source) {
    std::map<std::string, std::string> out;
    std::istringstream in(source);
    std::string line;
    std::size_t line_number = 0;
    while (std::getline(in, line)) {
        ++line_number;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        std::string trimmed = text::trim(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        std::size_t eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw InvalidInput("config line " + std::to_string(line_number) +
                               " is not 'key = value'");
        std::string key = text::trim(trimmed.substr(0, eq));
        if (key.empty())
            throw InvalidInput("config line " + std::to_string(line_number) + " has an empty key");
        out[key] = text::trim(trimmed.substr(eq + 1));
    }
    return out;
}

std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read config file " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return parse_kv_text(buf.str());
}

std::chrono::seconds parse_duration(const std::string& s) {
    std::string t = text::trim(s);
    if (t.empty()) throw InvalidInput("empty duration");
    long multiplier = 1;
    char unit = t.back();
    if (unit == 's' || unit == 'm' || unit == 'h' || unit == 'd') {
        t.pop_back();
        if (unit == 'm') multiplier = 60;
        else if (unit == 'h') multiplier = 3600;
        else if (unit == 'd') multiplier = 86400;
    }
    try {
        std::size_t consumed = 0;
        long value = std::stol(t, &consumed);
        if (consumed != t.size() || value < 0) throw InvalidInput("bad duration \"" + s + "\"");
        return std::chrono::seconds(value * multiplier);
    } catch (const std::logic_error&) {
        throw InvalidInput("bad duration \"" + s + "\"");
    }
}

std::string format_duration(std::chrono::seconds d) {
    long secs = d.count();
    if (secs % 86400 == 0 && secs != 0) return std::to_string(secs / 86400) + "d";
    if (secs % 3600 == 0 && secs != 0) return std::to_string(secs / 3600) + "h";
    if (secs % 60 == 0 && secs != 0) return std::to_string(secs / 60) + "m";
    return std::to_string(secs) + "s";
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> out;
    for (const std::string& part : text::split(s, ',')) {
        std::string t = text::trim(part);
        if (!t.empty()) out.push_back(t);
    }
    return out;
}

std::string join_list(const std::vector<std::string>& items) {
    return text::join(items, ", ");
}

void Config::validate() const {
    if (max_instances < 1) throw InvalidInput("max_instances must be >= 1");
    if (!(profile_blend > 0.0 && profile_blend < 1.0))
        throw InvalidInput("profile_blend must be in (0,1)");
    if (!(notify_threshold >= 0.0 && notify_threshold <= 1.0))
        throw InvalidInput("notify_threshold must be in [0,1]");
    if (refresh_interval.count() <= 0) throw InvalidInput("refresh_interval must be positive");
}

namespace {

int parse_int(const std::string& value, const std::string& key) {
    try {
        std::size_t consumed = 0;
        int v = std::stoi(value, &consumed);
        if (consumed != value.size()) throw InvalidInput("");
        return v;
    } catch (const std::logic_error&) {
        throw InvalidInput("config key " + key + " must be an integer, got \"" + value + "\"");
    }
}

double parse_real(const std::string& value, const std::string& key) {
    try {
        std::size_t consumed = 0;
        double v = std::stod(value, &consumed);
        if (consumed != value.size()) throw InvalidInput("");
        return v;
    } catch (const std::logic_error&) {
        throw InvalidInput("config key " + key + " must be a number, got \"" + value + "\"");
    }
}

}  // namespace

Config config_from_kv(const std::map<std::string, std::string>& kv) {
    Config c;
    for (const auto& [key, value] : kv) {
        if (key == "data_dir") c.data_dir = value;
        else if (key == "listen") c.listen = value;
        else if (key == "mediators") c.mediators = split_list(value);
        else if (key == "resource_name") c.resource_name = value;
        else if (key == "topics") c.topics = split_list(value);
        else if (key == "keywords") c.keywords = split_list(value);
        else if (key == "max_instances") c.max_instances = parse_int(value, key);
        else if (key == "profile_blend") c.profile_blend = parse_real(value, key);
        else if (key == "notify_threshold") c.notify_threshold = parse_real(value, key);
        else if (key == "refresh_interval") c.refresh_interval = parse_duration(value);
        else throw InvalidInput("unknown config key \"" + key + "\"");
    }
    c.validate();
    return c;
}

Config load_config_file(const std::filesystem::path& path) {
    return config_from_kv(parse_kv_file(path));
}

std::string serialize_config(const Config& c) {
    std::ostringstream out;
    out << "data_dir = " << c.data_dir.string() << "\n";
    out << "listen = " << c.listen << "\n";
    out << "mediators = " << join_list(c.mediators) << "\n";
    out << "resource_name = " << c.resource_name << "\n";
    out << "topics = " << join_list(c.topics) << "\n";
    out << "keywords = " << join_list(c.keywords) << "\n";
    out << "max_instances = " << c.max_instances << "\n";
    out << "profile_blend = " << c.profile_blend << "\n";
    out << "notify_threshold = " << c.notify_threshold << "\n";
    out << "refresh_interval = " << format_duration(c.refresh_interval) << "\n";
    return out.str();
}

}  // namespace trilogy::config
