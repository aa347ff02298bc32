#pragma once

#include <atomic>
#include <condition_variable>
#include <cstdint>
#include <deque>
#include <functional>
#include <mutex>
#include <vector>

#include "exec/exec.hpp"
#include "run/sim.hpp"

namespace fdfuse {

struct TaskRecord {
  char type = '?';  // 'A' block update, 'B' ghost fill, 'C' halo message
  int16_t lane = -1;
  int64_t block[3] = {0, 0, 0};
  int64_t step = -1;
  int64_t startTick = -1, endTick = -1;  // global happens-before ticks
};

// One record per task id; metadata written at build time, lane/ticks by the
// engine. The schedule audit checks endTick(dep) < startTick(task).
struct TaskTrace {
  std::vector<TaskRecord> records;
};

struct TaskCounts {
  int64_t a = 0, b = 0, c = 0;
};

// Dependency-counting scheduler: the whole graph is materialized up front,
// each task carries an atomic remaining-dependency counter, and ready tasks
// go through a mutex/condvar deque served by nThreads lanes. External tasks
// have no body; the transport completes them (complete_external) once their
// own dependencies are satisfied (armed). Idle lanes call the poll hook
// instead of blocking so a parked communication never starves.
class TaskEngine {
 public:
  using Fn = std::function<void(int lane)>;

  int32_t add(Fn fn);
  int32_t add_external();
  void dep(int32_t before, int32_t after);

  bool armed(int32_t id) const;              // deps satisfied (external tasks)
  void complete_external(int32_t id);        // must be armed; thread-safe
  void set_poll(std::function<bool()> poll) { poll_ = std::move(poll); }

  size_t size() const { return tasks_.size(); }
  // Optional: set before the first add. add() appends a blank record per task
  // (callers fill metadata at [id]); the engine writes lane and ticks.
  TaskTrace* trace = nullptr;
  std::vector<int64_t> laneBusyNs;  // filled by run(), one entry per lane

  // Runs every task; rethrows the first task exception after draining.
  void run(int nThreads);

 private:
  struct T {
    Fn fn;
    std::atomic<int32_t> remaining{0};
    std::atomic<bool> armed{false};
    std::vector<int32_t> succ;
  };
  void satisfied(int32_t id);   // push ready / arm external
  void finish(int32_t id);      // release successors, count completion
  void lane_main(int lane);

  std::deque<T> tasks_;
  std::function<bool()> poll_;
  std::mutex mu_;
  std::condition_variable cv_;
  std::deque<int32_t> ready_;
  int64_t done_ = 0;
  std::exception_ptr err_;
  std::atomic<int64_t> tick_{0};
};

// Sentinel boards: last A / last B producer task per block, with one extra
// cell per side so face-neighbor lookups never branch (-1 = no producer).
class SentinelBoard {
 public:
  explicit SentinelBoard(const int64_t nbl[3]);
  int32_t& a(int64_t bx, int64_t by, int64_t bz) { return abuf_[at(bx, by, bz)]; }
  int32_t& b(int64_t bx, int64_t by, int64_t bz) { return bbuf_[at(bx, by, bz)]; }

 private:
  size_t at(int64_t bx, int64_t by, int64_t bz) const;
  int64_t e_[3];
  std::vector<int32_t> abuf_, bbuf_;
};

struct StepIds {
  std::vector<int32_t> a, b;  // indexed by block index (bx fastest)
};

// Adds one step's A and B layers with sentinel-derived dependencies:
//   A(b,t) <- B(n,t-1), n = b and face neighbors along cut dims
//   B(b,t) <- A(b,t), plus A of blocks owning mirror/wrap source rows
// postA runs right after each A task is created so a distributed caller can
// add halo-receive dependencies and collect frontier ids. boxes, planes and
// scratch must outlive the engine run (task bodies hold pointers into them).
StepIds build_step_tasks(
    TaskEngine& eng, Sim& sim, int64_t t, const std::vector<BlockBox>& boxes,
    const StepPlanes planes[2], std::vector<ExecScratch>& scratch,
    SentinelBoard& board, TaskTrace* trace,
    const std::function<void(int64_t blockIdx, int32_t aId)>& postA = {});

// Single-rank task-dataflow driver. laneBusyNs, when given, accumulates per-
// lane task execution time across the run.
void run_tasks(Sim& sim, int64_t t0, int64_t t1, TaskCounts* counts = nullptr,
               TaskTrace* trace = nullptr,
               std::vector<int64_t>* laneBusyNs = nullptr);

}  // namespace fdfuse
