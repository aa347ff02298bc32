#include <algorithm>
#include <atomic>
#include <barrier>
#include <mutex>
#include <thread>
#include <vector>

#include "exec/exec.hpp"

namespace fdfuse {

// Fork-join: nThreads lanes, blocks dealt round-robin, one barrier after the
// A phase and one after the B phase. A lane that throws keeps arriving at the
// barriers as a no-op so the others can drain; the first error is rethrown.
void run_forkjoin(Sim& sim, int64_t t0, int64_t t1) {
  int nThreads = std::max(1, sim.cfg.nThreads);
  std::vector<BlockBox> boxes = plan_boxes(sim.plan);
  int64_t nblocks = int64_t(boxes.size());
  StepPlanes planes[2] = {bind_planes(*sim.gs, 0), bind_planes(*sim.gs, 1)};

  std::vector<ExecScratch> scratch(static_cast<size_t>(nThreads));
  for (ExecScratch& sc : scratch) sc.prepare(sim.low, sim.cfg.vectorSize);

  std::barrier<> bar(nThreads);
  std::mutex errMu;
  std::exception_ptr err;
  std::atomic<bool> stop{false};

  auto guard = [&](auto&& work) {
    if (stop.load(std::memory_order_relaxed)) return;
    try {
      work();
    } catch (...) {
      std::lock_guard<std::mutex> lk(errMu);
      if (!err) err = std::current_exception();
      stop.store(true, std::memory_order_relaxed);
    }
  };

  auto lane_main = [&](int lane) {
    for (int64_t t = t0; t < t1; ++t) {
      const StepPlanes& pl = planes[t & 1];
      guard([&] {
        for (int64_t bi = lane; bi < nblocks; bi += nThreads)
          sim.a_block(pl, boxes[size_t(bi)], scratch[size_t(lane)]);
      });
      bar.arrive_and_wait();
      guard([&] {
        for (int64_t bi = lane; bi < nblocks; bi += nThreads)
          sim.b_fill_window(t, boxes[size_t(bi)]);
      });
      bar.arrive_and_wait();
      if (lane == 0 && sim.cfg.checkFinite) guard([&] { sim.check_finite(t); });
      bar.arrive_and_wait();
      if (stop.load(std::memory_order_relaxed)) break;
    }
  };

  std::vector<std::thread> lanes;
  lanes.reserve(size_t(nThreads));
  for (int lane = 1; lane < nThreads; ++lane) lanes.emplace_back(lane_main, lane);
  lane_main(0);
  for (std::thread& th : lanes) th.join();
  if (err) std::rethrow_exception(err);
}

}  // namespace fdfuse
