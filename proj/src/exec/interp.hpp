#pragma once

#include <cstdint>
#include <vector>

#include "grid/blocking.hpp"
#include "grid/grid.hpp"
#include "lowering/kernel.hpp"
#include "numerics/stencil.hpp"

namespace fdfuse {

// Per-thread scratch for one program: a row-chunk buffer per register, laid
// out like field storage (point-major, components inner). Registers spill to
// memory between ops; doubles round-trip bit-exactly, so chunking cannot
// perturb results.
class LaneRegs {
 public:
  void prepare(const KernelProgram& prog, int vectorSize);
  double* reg(int i) { return buf_.data() + off_[size_t(i)]; }
  int64_t chunk() const { return chunk_; }

 private:
  std::vector<double> buf_;
  std::vector<int64_t> off_;
  int64_t chunk_ = 0;
};

// Per-step plane bindings, one src/dst pair per field (parity-resolved).
struct StepPlanes {
  std::vector<const double*> src;
  std::vector<double*> dst;
};

StepPlanes bind_planes(GridStore& gs, int64_t step);

// Runs one fused program over a block: X sweeps the ghosted row [-r, n0+r),
// Y/Z stay inside the block's interior range. Per-point results are bitwise
// identical to tree_eval_point.
void run_program_block(const KernelProgram& prog, const GridGeom& g,
                       const StencilSet& st, const StepPlanes& pl,
                       const BlockBox& box, LaneRegs& regs, double dt);

}  // namespace fdfuse
