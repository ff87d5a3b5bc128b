#include "trilogy/probes.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "trilogy/text.hpp"

namespace trilogy::indexer {

namespace fs = std::filesystem;

std::string local_path_for_url(const std::string& url) {
    if (url.starts_with("file://")) return url.substr(7);
    // A scheme prefix (like bib: or http:) means not a local path. A lone
    // letter before ':' could be a path; anything longer is a scheme.
    std::size_t colon = url.find(':');
    if (colon != std::string::npos && colon > 1) return {};
    return url;
}

Probe local_file_probe(const broker::DocumentStore& store) {
    return [&store](const std::string& url) -> ProbeResult {
        std::string path = local_path_for_url(url);
        if (path.empty()) return ProbeResult::available();
        if (!fs::exists(path)) return ProbeResult::unavailable();

        std::int64_t gathered = 0;
        if (std::optional<broker::DocId> id = store.find_url(url)) {
            std::string t = store.entry(*id).record.attribute("gathered-time");
            try {
                gathered = t.empty() ? 0 : std::stoll(t);
            } catch (const std::logic_error&) {
                gathered = 0;
            }
        }

        std::error_code ec;
        auto mtime = fs::last_write_time(path, ec);
        if (ec) return ProbeResult::unavailable();
        std::int64_t modified = std::chrono::duration_cast<std::chrono::seconds>(
                                    std::chrono::file_clock::to_sys(mtime).time_since_epoch())
                                    .count();
        if (modified <= gathered) return ProbeResult::available();

        std::ifstream in(path, std::ios::binary);
        if (!in) return ProbeResult::unavailable();
        std::ostringstream buf;
        buf << in.rdbuf();
        std::string hint = "text";
        if (path.ends_with(".html") || path.ends_with(".htm")) hint = "html";
        else if (path.ends_with(".json")) hint = "bib";
        return ProbeResult::changed(buf.str(), hint);
    };
}

}  // namespace trilogy::indexer
