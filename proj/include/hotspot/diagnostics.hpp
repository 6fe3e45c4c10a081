#pragma once

#include <functional>
#include <string>

namespace hotspot {

// Non-fatal numerical warnings (concentration cap hit, degenerate Gamma rate,
// underflowing density). Routed to a process-wide sink, stderr by default.
using DiagnosticSink = std::function<void(const std::string&)>;

void set_diagnostic_sink(DiagnosticSink sink);
void warn(const std::string& message);

// Number of warnings emitted since start-up; tests use it to check that a
// degenerate path actually reported itself.
unsigned long diagnostic_count();

}  // namespace hotspot
