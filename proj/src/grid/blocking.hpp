#pragma once

#include <vector>

#include "grid/grid.hpp"

namespace fdfuse {

struct BlockBox {
  int64_t lo[3] = {0, 0, 0};
  int64_t hi[3] = {1, 1, 1};  // half-open interior ranges
};

// 2.5D plan: X streams whole rows (nblX = 1), Y/Z are cut until every thread
// has a block and the per-thread ghosted working set fits in L3.
struct BlockingPlan {
  int64_t nbl[3] = {1, 1, 1};
  std::vector<int64_t> starts[3];  // per dim, nbl[d]+1 entries over [0, n[d]]
  int64_t maxBs[3] = {1, 1, 1};
  int64_t workingSetBytes = 0;     // per block: pX * ghosted max extents * bytesPerPoint
  bool fallback = false;           // cuts exhausted before satisfying the invariants

  int64_t nblocks() const { return nbl[0] * nbl[1] * nbl[2]; }
};

BlockingPlan derive_blocking(const GridGeom& geom, int64_t l3Bytes, int nThreads,
                             int64_t bytesPerPoint);

BlockBox block_box(const BlockingPlan& plan, int64_t xb, int64_t yb, int64_t zb);

}  // namespace fdfuse
