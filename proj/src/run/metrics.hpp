#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fdfuse {

// Everything one run reports. The key=value form parses back losslessly; the
// table form is for eyes only.
struct Metrics {
  std::string spec;
  std::string mode;
  std::string transport;  // dist modes only, empty otherwise
  int64_t steps = 0;
  int64_t interiorPoints = 0;  // global interior cells
  int nThreads = 1;
  int64_t nRanks = 1;
  int64_t nbl[3] = {1, 1, 1};  // rank-0 blocking plan
  int64_t workingSetBytes = 0;
  bool blockingFallback = false;

  double initS = 0, computeS = 0, exchangeS = 0, gatherS = 0, totalS = 0;
  double mpointsPerSec = 0;  // interior * steps / (compute+exchange) / 1e6

  // Cost model, fused programs combined.
  int64_t flopPerPoint = 0, memPerPoint = 0;
  double totalGFlop = 0, totalGBytes = 0;

  // Task modes.
  int64_t aTasks = 0, bTasks = 0, cTasks = 0;
  std::vector<double> laneBusyS;
  double laneWallS = 0;  // wall time lanes were live (busy+idle per lane)

  int64_t bytesSent = 0, bytesRecv = 0;  // this process's transport endpoints
  std::string note;

  bool operator==(const Metrics&) const = default;
};

std::string metrics_kv(const Metrics& m);
std::string metrics_table(const Metrics& m);
// Inverse of metrics_kv. Throws Error(Io) on malformed lines.
Metrics parse_metrics_kv(const std::string& text);

}  // namespace fdfuse
