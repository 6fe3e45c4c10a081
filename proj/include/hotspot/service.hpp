#pragma once

#include <memory>
#include <string>

#include "hotspot/workspace.hpp"

namespace hotspot {

struct ServiceOptions {
  int fit_workers = 1;  // background fits running at once
};

// JSON-over-HTTP front end of a workspace.
//
//   GET  /api/weeks
//   GET  /api/forecast?week=&window=        GeoJSON
//   POST /api/intel                          {points: [...]} -> {intel_id, count}
//   GET  /api/intel?id=
//   POST /api/forecast/what-if               {week, window, intel_id | points, include_intel}
//   GET  /api/eval?forecast_id=
//   GET  /api/diff?a=&b=                     GeoJSON
//   GET  /api/params?model_id=
//   POST /api/fit                            {week[, window]} -> 202 {job_id}
//   GET  /api/fit/status?job_id=
//
// Every response carries the config hash (body field and X-Config-Hash).
// Weeks are forecast weeks; a fit for week W trains on the week before it.
class Service {
 public:
  Service(std::shared_ptr<Workspace> workspace, ServiceOptions options = {});
  ~Service();
  Service(const Service&) = delete;
  Service& operator=(const Service&) = delete;

  // Binds to `port` (0 picks a free one) and returns the port, or -1.
  int bind(const std::string& host, int port);
  // Serves until stop(); call after bind().
  bool listen();
  void stop();
  // Blocks until queued and running fits have finished.
  void wait_for_fits();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace hotspot
