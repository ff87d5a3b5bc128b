#pragma once

#include <cstdint>
#include <functional>
#include <string>

namespace trilogy::indexer {

enum class ProbeStatus {
    Available,    // source verified, content unchanged
    Unavailable,  // source could not be reached
    Changed,      // source reachable with new content
};

struct ProbeResult {
    ProbeStatus status = ProbeStatus::Available;
    std::string content;     // replacement bytes when Changed
    std::string media_hint;  // optional; derived from the record when empty

    static ProbeResult available() { return {ProbeStatus::Available, {}, {}}; }
    static ProbeResult unavailable() { return {ProbeStatus::Unavailable, {}, {}}; }
    static ProbeResult changed(std::string bytes, std::string hint = {}) {
        return {ProbeStatus::Changed, std::move(bytes), std::move(hint)};
    }
};

// Availability checker for one url. A throwing probe counts as unavailable;
// refresh records probe failures and never propagates them.
using Probe = std::function<ProbeResult(const std::string& url)>;

// A document is dropped after this many consecutive failed probes, so a
// single transient outage never evicts anything.
constexpr int kRemovalFailureThreshold = 2;

struct MaintenanceReport {
    int refreshed = 0;     // documents re-gathered because their source changed
    int removed = 0;       // documents dropped after repeated failed probes
    int failed_probe = 0;  // unavailable probe results in this run
    std::int64_t elapsed_ms = 0;
};

}  // namespace trilogy::indexer
