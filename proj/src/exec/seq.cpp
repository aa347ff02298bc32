#include "exec/exec.hpp"

#include "eqtree/reference.hpp"

namespace fdfuse {

std::optional<Mode> parse_mode(const std::string& s) {
  if (s == "seq") return Mode::Seq;
  if (s == "forkjoin") return Mode::ForkJoin;
  if (s == "task") return Mode::Task;
  if (s == "dist-pure") return Mode::DistPure;
  if (s == "dist-forkjoin") return Mode::DistForkJoin;
  if (s == "dist-task") return Mode::DistTask;
  return std::nullopt;
}

const char* mode_name(Mode m) {
  switch (m) {
    case Mode::Seq: return "seq";
    case Mode::ForkJoin: return "forkjoin";
    case Mode::Task: return "task";
    case Mode::DistPure: return "dist-pure";
    case Mode::DistForkJoin: return "dist-forkjoin";
    case Mode::DistTask: return "dist-task";
  }
  return "?";
}

std::vector<BlockBox> plan_boxes(const BlockingPlan& plan) {
  std::vector<BlockBox> boxes;
  boxes.reserve(size_t(plan.nblocks()));
  for (int64_t bz = 0; bz < plan.nbl[2]; ++bz)
    for (int64_t by = 0; by < plan.nbl[1]; ++by)
      for (int64_t bx = 0; bx < plan.nbl[0]; ++bx)
        boxes.push_back(block_box(plan, bx, by, bz));
  return boxes;
}

void run_baseline(Sim& sim, int64_t t0, int64_t t1) {
  for (int64_t t = t0; t < t1; ++t) {
    reference_step(*sim.gs, sim.p, sim.st, t);
    sim.b_fill(t);
    if (sim.cfg.checkFinite) sim.check_finite(t);
  }
}

void run_seq(Sim& sim, int64_t t0, int64_t t1) {
  ExecScratch sc;
  sc.prepare(sim.low, sim.cfg.vectorSize);
  std::vector<BlockBox> boxes = plan_boxes(sim.plan);
  StepPlanes planes[2] = {bind_planes(*sim.gs, 0), bind_planes(*sim.gs, 1)};
  for (int64_t t = t0; t < t1; ++t) {
    const StepPlanes& pl = planes[t & 1];
    for (const BlockBox& box : boxes) sim.a_block(pl, box, sc);
    sim.b_fill(t);
    if (sim.cfg.checkFinite) sim.check_finite(t);
  }
}

}  // namespace fdfuse
