#include "hotspot/diagnostics.hpp"

#include <atomic>
#include <iostream>
#include <mutex>

namespace hotspot {
namespace {

std::mutex g_sink_mutex;
DiagnosticSink g_sink;
std::atomic<unsigned long> g_count{0};

}  // namespace

void set_diagnostic_sink(DiagnosticSink sink) {
  std::lock_guard lock(g_sink_mutex);
  g_sink = std::move(sink);
}

void warn(const std::string& message) {
  ++g_count;
  std::lock_guard lock(g_sink_mutex);
  if (g_sink) {
    g_sink(message);
  } else {
    std::cerr << "hotspot: warning: " << message << '\n';
  }
}

unsigned long diagnostic_count() { return g_count.load(); }

}  // namespace hotspot
