#include "grid/blocking.hpp"

#include <algorithm>

namespace fdfuse {
namespace {

// Near-equal partition: remainders spread one extra point at a time.
std::vector<int64_t> partition_starts(int64_t n, int64_t k) {
  std::vector<int64_t> starts(size_t(k) + 1, 0);
  int64_t base = n / k, rem = n % k;
  for (int64_t i = 0; i < k; ++i)
    starts[size_t(i) + 1] = starts[size_t(i)] + base + (i < rem ? 1 : 0);
  return starts;
}

int64_t ghosted(int64_t extent, int r, bool present) {
  return present ? extent + 2 * r : 1;
}

}  // namespace

BlockingPlan derive_blocking(const GridGeom& geom, int64_t l3Bytes, int nThreads,
                             int64_t bytesPerPoint) {
  BlockingPlan plan;
  const bool cutY = geom.dims > 1;
  const bool cutZ = geom.dims > 2;
  int64_t by = 1, bz = 1;

  auto extentY = [&] { return ceil_div(geom.n[1], by); };
  auto extentZ = [&] { return ceil_div(geom.n[2], bz); };
  auto workingSet = [&] {
    return geom.pX * ghosted(extentY(), geom.r, cutY) * ghosted(extentZ(), geom.r, cutZ) *
           bytesPerPoint;
  };
  auto satisfied = [&] {
    bool enough = nThreads <= 1 || !(cutY || cutZ) || by * bz >= nThreads;
    return enough && nThreads * workingSet() <= l3Bytes;
  };

  if (cutY || cutZ) {
    while (!satisfied()) {
      bool canY = cutY && by * 2 <= geom.n[1];
      bool canZ = cutZ && bz * 2 <= geom.n[2];
      if (!canY && !canZ) {
        // Cuts exhausted: one block per Y/Z line, reported to the caller.
        by = cutY ? geom.n[1] : 1;
        bz = cutZ ? geom.n[2] : 1;
        plan.fallback = true;
        break;
      }
      // Double-cut the dimension with the larger current block extent; ties
      // go to Z (the outermost dimension).
      if (canY && canZ)
        (extentY() > extentZ() ? by : bz) *= 2;
      else if (canY)
        by *= 2;
      else
        bz *= 2;
    }
  }

  plan.nbl[0] = 1;
  plan.nbl[1] = by;
  plan.nbl[2] = bz;
  plan.starts[0] = partition_starts(geom.n[0], 1);
  plan.starts[1] = partition_starts(geom.n[1], by);
  plan.starts[2] = partition_starts(geom.n[2], bz);
  for (int d = 0; d < 3; ++d) {
    int64_t m = 0;
    for (size_t i = 0; i + 1 < plan.starts[d].size(); ++i)
      m = std::max(m, plan.starts[d][i + 1] - plan.starts[d][i]);
    plan.maxBs[d] = m;
  }
  plan.workingSetBytes = workingSet();
  return plan;
}

BlockBox block_box(const BlockingPlan& plan, int64_t xb, int64_t yb, int64_t zb) {
  if (xb < 0 || xb >= plan.nbl[0] || yb < 0 || yb >= plan.nbl[1] || zb < 0 ||
      zb >= plan.nbl[2])
    throw Error(Errc::Internal, "block id out of range");
  BlockBox box;
  int64_t ids[3] = {xb, yb, zb};
  for (int d = 0; d < 3; ++d) {
    box.lo[d] = plan.starts[d][size_t(ids[d])];
    box.hi[d] = plan.starts[d][size_t(ids[d]) + 1];
  }
  return box;
}

}  // namespace fdfuse
