#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "dist/transport.hpp"
#include "exec/exec.hpp"
#include "exec/tasks.hpp"
#include "frontend/problem.hpp"
#include "run/dump.hpp"
#include "run/metrics.hpp"
#include "run/sim.hpp"

namespace fdfuse {

struct RunOptions {
  Mode mode = Mode::Seq;
  SimConfig cfg;
  int64_t nRanks = 1;
  std::string rankGrid;              // "AxBxC" override, empty = balanced
  std::string transport = "inproc";  // dist runs: "inproc" | "socket"
  std::string socketDir;             // socket rendezvous dir (empty = temp)
  int64_t dumpEvery = 0;             // extra dumps every N steps (0 = none)
  std::string specName;              // metrics label only
  bool baseline = false;             // seq only: tree-walk reference executor
  // >= 0: this process is one rank of an externally launched socket run and
  // executes only that rank (socketDir must point at the shared rendezvous
  // dir). -1: run_problem launches all nRanks itself.
  int procRank = -1;
};

struct RunResult {
  std::vector<FieldDump> finalFields;  // global interior state after the run
  std::vector<std::pair<int64_t, std::vector<FieldDump>>> cadence;
  Metrics metrics;
  // Task modes with cfg.trace; covers the last segment (ids restart per
  // segment, so cadence dumps truncate earlier records).
  TaskTrace trace;
};

int64_t effective_steps(const Problem& p, const SimConfig& cfg);

// Whole-run orchestration. Local modes run in this thread (forkjoin/task
// spin their lanes internally); dist modes run one rank per thread over the
// chosen transport. Throws Error on any failure.
RunResult run_problem(const Problem& p, const RunOptions& opt);

// One rank of a distributed run over an externally built transport — the
// multi-process driver calls this directly. Rank 0 returns the full result;
// other ranks return metrics only (their own counters).
RunResult run_dist_rank(const Problem& p, const RunOptions& opt, Transport& tr);

}  // namespace fdfuse
