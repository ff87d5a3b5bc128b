#pragma once

#include "trilogy/broker.hpp"
#include "trilogy/maintenance.hpp"

namespace trilogy::indexer {

// Availability probe for locally stored sources. Urls of the form
// file:///path or a bare path are checked on disk: a missing file is
// unavailable, a file modified after the document was gathered comes back
// as changed (with the new bytes and a media hint from the extension).
// Urls with any other scheme (bib:, http:, ...) cannot be verified here
// and always probe as available.
Probe local_file_probe(const broker::DocumentStore& store);

// Resolves file:///path and bare paths; empty for other schemes.
std::string local_path_for_url(const std::string& url);

}  // namespace trilogy::indexer
