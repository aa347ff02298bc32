#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "run/sim.hpp"

namespace fdfuse {

enum class Mode { Seq, ForkJoin, Task, DistPure, DistForkJoin, DistTask };

std::optional<Mode> parse_mode(const std::string& s);
const char* mode_name(Mode m);
inline bool is_dist(Mode m) {
  return m == Mode::DistPure || m == Mode::DistForkJoin || m == Mode::DistTask;
}

// Single-rank step drivers over [t0, t1). Ghosts must be valid for step t0
// (Sim::init or the previous segment's B phase). All drivers leave the grid
// ready for step t1, so a run can be segmented at dump boundaries.
void run_baseline(Sim& sim, int64_t t0, int64_t t1);  // tree-walk oracle
void run_seq(Sim& sim, int64_t t0, int64_t t1);
void run_forkjoin(Sim& sim, int64_t t0, int64_t t1);

// Deterministic block sweep order shared by seq/forkjoin/tasks: bx fastest,
// then by, then bz (bi = (bz*nblY + by)*nblX + bx).
std::vector<BlockBox> plan_boxes(const BlockingPlan& plan);

}  // namespace fdfuse
