#pragma once

#include <functional>
#include <memory>

#include "exec/interp.hpp"
#include "frontend/problem.hpp"
#include "grid/blocking.hpp"
#include "grid/grid.hpp"
#include "lowering/kernel.hpp"
#include "numerics/bcs.hpp"
#include "numerics/stencil.hpp"

namespace fdfuse {

struct SimConfig {
  int alignBytes = 64;
  int vectorSize = 8;
  int64_t l3Bytes = 32ll << 20;
  int nThreads = 1;
  int64_t stepsOverride = -1;  // <0: run the problem's step count
  int windowSteps = 1;         // task-mode step window (engine clamps to 1)
  int64_t commBlocks = 1;      // hybrid-task halo chunks per face
  bool checkFinite = false;
  bool trace = false;
};

// Per-thread interpreter scratch, one lane per fused program.
struct ExecScratch {
  LaneRegs time, algebraic;
  void prepare(const Lowered& low, int vectorSize) {
    time.prepare(low.time, vectorSize);
    algebraic.prepare(low.algebraic, vectorSize);
  }
};

// Everything one rank needs: lowered programs, bound stencils, local grid and
// blocking plan, plus the face policy deciding which ghost fills are local
// and which arrive by halo exchange.
class Sim {
 public:
  // localN/off: this rank's interior extents and its global cell offset
  // (whole mesh and zero for single-rank runs). Spacing stays global.
  Sim(const Problem& prob, const SimConfig& config, const int64_t localN[3],
      const int64_t globalOff[3]);

  Problem p;
  SimConfig cfg;
  Lowered low;
  StencilSet st;
  GridGeom geom;
  BlockingPlan plan;
  std::unique_ptr<GridStore> gs;
  int64_t steps = 0;
  int64_t off[3] = {0, 0, 0};

  // Face policy, rewritten by the distributed runner before init().
  bool atEdge[6] = {true, true, true, true, true, true};
  bool axisCut[3] = {false, false, false};

  // Initial conditions from global coordinates (bitwise rank-count invariant),
  // ghost fills, then algebraic init sweeps in declaration order with a ghost
  // refresh after each. `exchange` refreshes one field's cut-face ghosts on
  // parity plane 0; single-rank runs pass nothing.
  void init(const std::function<void(int fieldId)>& exchange = {});

  // A phase: both fused programs over one block.
  void a_block(const StepPlanes& pl, const BlockBox& box, ExecScratch& sc);

  // B phase: local ghost fills on this step's dst planes. The windowed form
  // fills only the face portions a block owns (x ghosts of its rows; y/z
  // faces only when the block touches that boundary).
  void b_fill(int64_t step);
  void b_fill_window(int64_t step, const BlockBox& box);

  bool local_face(int fid, int face) const;
  bool needs_ghosts(int fid) const;        // any BC rule present
  BlockBox whole_box() const;

  // Scans interior cells of every equation-defined field's dst plane; throws
  // Error(Numeric) naming the first bad field when a value is not finite.
  void check_finite(int64_t step) const;

 private:
  void fill_ics();
  void fill_ghosts_plane0(int fid);
};

// Per-point working set used to size cache blocks: every field plane touched
// per point plus interpreter temporaries.
int64_t bytes_per_point(const Problem& p, const Lowered& low);

}  // namespace fdfuse
