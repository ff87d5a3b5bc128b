#pragma once

#include <chrono>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

namespace trilogy::config {

// Parses `key = value` text: one pair per line, '#' comments, blank lines
// ignored, whitespace trimmed. Later keys overwrite earlier ones.
std::map<std::string, std::string> parse_kv_text(const std::string& source);
std::map<std::string, std::string> parse_kv_file(const std::filesystem::path& path);

// "300s", "10m", "2h", "7d"; a bare number means seconds.
std::chrono::seconds parse_duration(const std::string& s);
std::string format_duration(std::chrono::seconds d);

// One daemon's (or client's) settings. File keys match field names.
struct Config {
    std::filesystem::path data_dir = ".";
    std::string listen = "127.0.0.1:0";
    std::vector<std::string> mediators;  // comma-separated host:port list
    std::string resource_name;
    std::vector<std::string> topics;    // comma-separated concept names
    std::vector<std::string> keywords;  // comma-separated keyword phrases
    int max_instances = 4;
    double profile_blend = 0.8;
    double notify_threshold = 0.5;
    std::chrono::seconds refresh_interval = std::chrono::hours(24 * 7);

    // Bounds checks (max_instances >= 1, profile_blend in (0,1),
    // notify_threshold in [0,1]); throws InvalidInput.
    void validate() const;
};

Config config_from_kv(const std::map<std::string, std::string>& kv);
Config load_config_file(const std::filesystem::path& path);
std::string serialize_config(const Config& c);

// Splits "a, b, c" dropping empty entries.
std::vector<std::string> split_list(const std::string& s);
std::string join_list(const std::vector<std::string>& items);

}  // namespace trilogy::config
