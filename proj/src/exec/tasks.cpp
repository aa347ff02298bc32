#include "exec/tasks.hpp"

#include <algorithm>
#include <chrono>
#include <set>
#include <thread>

#include "numerics/bcs.hpp"
#include "support.hpp"

namespace fdfuse {

int32_t TaskEngine::add(Fn fn) {
  tasks_.emplace_back();
  tasks_.back().fn = std::move(fn);
  if (trace) trace->records.emplace_back();  // caller fills metadata at [id]
  return int32_t(tasks_.size()) - 1;
}

int32_t TaskEngine::add_external() {
  tasks_.emplace_back();
  if (trace) trace->records.emplace_back();
  return int32_t(tasks_.size()) - 1;
}

void TaskEngine::dep(int32_t before, int32_t after) {
  if (before < 0) return;
  tasks_[size_t(before)].succ.push_back(after);
  tasks_[size_t(after)].remaining.fetch_add(1, std::memory_order_relaxed);
}

bool TaskEngine::armed(int32_t id) const {
  return tasks_[size_t(id)].armed.load(std::memory_order_acquire);
}

void TaskEngine::satisfied(int32_t id) {
  T& t = tasks_[size_t(id)];
  if (!t.fn) {
    t.armed.store(true, std::memory_order_release);
    cv_.notify_all();  // pollers may now complete it
    return;
  }
  {
    std::lock_guard<std::mutex> lk(mu_);
    ready_.push_back(id);
  }
  cv_.notify_one();
}

void TaskEngine::finish(int32_t id) {
  for (int32_t s : tasks_[size_t(id)].succ)
    if (tasks_[size_t(s)].remaining.fetch_sub(1, std::memory_order_acq_rel) == 1)
      satisfied(s);
  {
    std::lock_guard<std::mutex> lk(mu_);
    ++done_;
  }
  cv_.notify_all();
}

void TaskEngine::complete_external(int32_t id) {
  if (!armed(id))
    throw Error(Errc::Internal, "external task completed before its dependencies");
  if (trace) {
    TaskRecord& rec = trace->records[size_t(id)];
    rec.startTick = tick_.fetch_add(1, std::memory_order_seq_cst);
    rec.endTick = tick_.fetch_add(1, std::memory_order_seq_cst);
  }
  finish(id);
}

void TaskEngine::lane_main(int lane) {
  for (;;) {
    int32_t id = -1;
    {
      std::unique_lock<std::mutex> lk(mu_);
      for (;;) {
        if (err_) return;
        if (!ready_.empty()) {
          id = ready_.front();
          ready_.pop_front();
          break;
        }
        if (done_ == int64_t(tasks_.size())) return;
        if (poll_) {
          lk.unlock();
          bool progressed = false;
          try {
            progressed = poll_();
          } catch (...) {
            lk.lock();
            if (!err_) err_ = std::current_exception();
            cv_.notify_all();
            return;
          }
          lk.lock();
          if (!progressed && ready_.empty() && done_ < int64_t(tasks_.size()) && !err_)
            cv_.wait_for(lk, std::chrono::milliseconds(1));
        } else {
          cv_.wait(lk);
        }
      }
    }
    T& t = tasks_[size_t(id)];
    TaskRecord* rec = trace ? &trace->records[size_t(id)] : nullptr;
    if (rec) {
      rec->lane = int16_t(lane);
      rec->startTick = tick_.fetch_add(1, std::memory_order_seq_cst);
    }
    auto tBegin = std::chrono::steady_clock::now();
    try {
      t.fn(lane);
    } catch (...) {
      std::lock_guard<std::mutex> lk(mu_);
      if (!err_) err_ = std::current_exception();
      cv_.notify_all();
      return;
    }
    laneBusyNs[size_t(lane)] +=
        std::chrono::duration_cast<std::chrono::nanoseconds>(
            std::chrono::steady_clock::now() - tBegin)
            .count();
    if (rec) rec->endTick = tick_.fetch_add(1, std::memory_order_seq_cst);
    finish(id);
  }
}

void TaskEngine::run(int nThreads) {
  done_ = 0;
  err_ = nullptr;
  laneBusyNs.assign(size_t(std::max(1, nThreads)), 0);
  for (size_t i = 0; i < tasks_.size(); ++i)
    if (tasks_[i].remaining.load(std::memory_order_relaxed) == 0)
      satisfied(int32_t(i));

  nThreads = std::max(1, nThreads);
  std::vector<std::thread> lanes;
  lanes.reserve(size_t(nThreads - 1));
  for (int lane = 1; lane < nThreads; ++lane)
    lanes.emplace_back([this, lane] { lane_main(lane); });
  lane_main(0);
  for (std::thread& th : lanes) th.join();
  if (err_) std::rethrow_exception(err_);
}

SentinelBoard::SentinelBoard(const int64_t nbl[3]) {
  for (int d = 0; d < 3; ++d) e_[d] = nbl[d] + 2;
  abuf_.assign(size_t(e_[0] * e_[1] * e_[2]), -1);
  bbuf_.assign(size_t(e_[0] * e_[1] * e_[2]), -1);
}

size_t SentinelBoard::at(int64_t bx, int64_t by, int64_t bz) const {
  return size_t(((bz + 1) * e_[1] + (by + 1)) * e_[0] + (bx + 1));
}

StepIds build_step_tasks(
    TaskEngine& eng, Sim& sim, int64_t t, const std::vector<BlockBox>& boxes,
    const StepPlanes planes[2], std::vector<ExecScratch>& scratch,
    SentinelBoard& board, TaskTrace* trace,
    const std::function<void(int64_t blockIdx, int32_t aId)>& postA) {
  const BlockingPlan& plan = sim.plan;
  const int64_t* nbl = plan.nbl;
  StepIds ids;
  ids.a.resize(size_t(plan.nblocks()));
  ids.b.resize(size_t(plan.nblocks()));
  const StepPlanes* pl = &planes[t & 1];

  auto meta = [&](int32_t id, char type, int64_t bx, int64_t by, int64_t bz) {
    if (!trace) return;
    TaskRecord& rec = trace->records[size_t(id)];
    rec.type = type;
    rec.block[0] = bx;
    rec.block[1] = by;
    rec.block[2] = bz;
    rec.step = t;
  };

  for (int64_t bz = 0; bz < nbl[2]; ++bz)
    for (int64_t by = 0; by < nbl[1]; ++by)
      for (int64_t bx = 0; bx < nbl[0]; ++bx) {
        int64_t bi = (bz * nbl[1] + by) * nbl[0] + bx;
        const BlockBox* box = &boxes[size_t(bi)];
        int32_t aId = eng.add([&sim, pl, box, &scratch](int lane) {
          sim.a_block(*pl, *box, scratch[size_t(lane)]);
        });
        meta(aId, 'A', bx, by, bz);
        eng.dep(board.b(bx, by, bz), aId);
        for (int d = 0; d < 3; ++d) {
          if (nbl[d] <= 1) continue;
          int64_t nb[3] = {bx, by, bz};
          nb[d] -= 1;
          eng.dep(board.b(nb[0], nb[1], nb[2]), aId);
          nb[d] += 2;
          eng.dep(board.b(nb[0], nb[1], nb[2]), aId);
        }
        board.a(bx, by, bz) = aId;
        ids.a[size_t(bi)] = aId;
        if (postA) postA(bi, aId);
      }

  const GridGeom& g = sim.geom;
  for (int64_t bz = 0; bz < nbl[2]; ++bz)
    for (int64_t by = 0; by < nbl[1]; ++by)
      for (int64_t bx = 0; bx < nbl[0]; ++bx) {
        int64_t bi = (bz * nbl[1] + by) * nbl[0] + bx;
        const BlockBox* box = &boxes[size_t(bi)];
        int32_t bId = eng.add([&sim, t, box](int) { sim.b_fill_window(t, *box); });
        meta(bId, 'B', bx, by, bz);
        std::set<int32_t> deps;
        deps.insert(board.a(bx, by, bz));
        // Mirror/wrap fills read interior rows that may live in other blocks
        // along the face axis (same coordinates in the other cut dims).
        int64_t bcoord[3] = {bx, by, bz};
        for (int face = 0; face < 2 * sim.p.mesh.dims; ++face) {
          int axis = face / 2;
          bool minFace = (face & 1) == 0;
          if (axis != 0) {  // y/z faces belong to boundary blocks only
            if (minFace && box->lo[axis] != 0) continue;
            if (!minFace && box->hi[axis] != g.n[axis]) continue;
          }
          for (size_t f = 0; f < sim.p.fields.size(); ++f) {
            if (!sim.local_face(int(f), face)) continue;
            int64_t lo = 0, hi = 0;
            bc_source_range(g, face, sim.p.bcs[f][size_t(face)].kind, lo, hi);
            if (lo >= hi) continue;
            for (int64_t sb = 0; sb < nbl[axis]; ++sb) {
              if (plan.starts[axis][size_t(sb) + 1] <= lo ||
                  plan.starts[axis][size_t(sb)] >= hi)
                continue;
              int64_t src[3] = {bcoord[0], bcoord[1], bcoord[2]};
              src[axis] = sb;
              deps.insert(board.a(src[0], src[1], src[2]));
            }
          }
        }
        for (int32_t d : deps) eng.dep(d, bId);
        board.b(bx, by, bz) = bId;
        ids.b[size_t(bi)] = bId;
      }

  return ids;
}

void run_tasks(Sim& sim, int64_t t0, int64_t t1, TaskCounts* counts,
               TaskTrace* trace, std::vector<int64_t>* laneBusyNs) {
  TaskEngine eng;
  eng.trace = trace;
  std::vector<BlockBox> boxes = plan_boxes(sim.plan);
  StepPlanes planes[2] = {bind_planes(*sim.gs, 0), bind_planes(*sim.gs, 1)};
  int nThreads = std::max(1, sim.cfg.nThreads);
  std::vector<ExecScratch> scratch(static_cast<size_t>(nThreads));
  for (ExecScratch& sc : scratch) sc.prepare(sim.low, sim.cfg.vectorSize);

  SentinelBoard board(sim.plan.nbl);
  for (int64_t t = t0; t < t1; ++t) {
    build_step_tasks(eng, sim, t, boxes, planes, scratch, board, trace);
    if (counts) {
      counts->a += sim.plan.nblocks();
      counts->b += sim.plan.nblocks();
    }
  }
  eng.run(nThreads);
  if (laneBusyNs) {
    laneBusyNs->resize(eng.laneBusyNs.size(), 0);
    for (size_t i = 0; i < eng.laneBusyNs.size(); ++i)
      (*laneBusyNs)[i] += eng.laneBusyNs[i];
  }
  if (sim.cfg.checkFinite && t1 > t0) sim.check_finite(t1 - 1);
}

}  // namespace fdfuse
