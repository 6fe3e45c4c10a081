#pragma once

#include <span>
#include <string>
#include <string_view>

#include "hotspot/data_model.hpp"

namespace hotspot {

// Lower-case hex SHA-256.
std::string sha256_hex(std::string_view bytes);

// Digest of the events in order, over a canonical text rendering of every
// field (17 significant digits for coordinates and times).
std::string events_digest(std::span<const EventRecord> events);

}  // namespace hotspot
