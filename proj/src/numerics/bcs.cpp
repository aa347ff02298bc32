#include "numerics/bcs.hpp"

namespace fdfuse {
namespace {

// Ghost index and its mirror/wrap source along one axis, for layer g = 1..r.
struct GhostMap {
  int64_t ghost, mirror, wrap;
};

GhostMap ghost_map(int64_t n, bool minFace, int64_t g) {
  if (minFace) return {-g, g - 1, n - g};
  return {n - 1 + g, n - g, g - 1};
}

}  // namespace

void apply_bc_face(const GridGeom& g, double* plane, int comps, int face,
                   const BcRule& rule, int64_t yLo, int64_t yHi, int64_t zLo,
                   int64_t zHi) {
  const int axis = face / 2;
  const bool minFace = (face & 1) == 0;
  const int64_t n = g.n[axis];
  for (int64_t layer = 1; layer <= g.r; ++layer) {
    GhostMap m = ghost_map(n, minFace, layer);
    if (axis == 0) {
      for (int64_t k = zLo; k < zHi; ++k)
        for (int64_t j = yLo; j < yHi; ++j) {
          double* gcell = plane + g.idx(m.ghost, j, k) * comps;
          switch (rule.kind) {
            case BcKind::Dirichlet:
              for (int c = 0; c < comps; ++c) gcell[c] = rule.value;
              break;
            case BcKind::Neumann: {
              const double* s = plane + g.idx(m.mirror, j, k) * comps;
              for (int c = 0; c < comps; ++c) gcell[c] = s[c];
              break;
            }
            case BcKind::Periodic: {
              const double* s = plane + g.idx(m.wrap, j, k) * comps;
              for (int c = 0; c < comps; ++c) gcell[c] = s[c];
              break;
            }
          }
        }
    } else if (axis == 1) {
      for (int64_t k = zLo; k < zHi; ++k)
        for (int64_t i = 0; i < g.n[0]; ++i) {
          double* gcell = plane + g.idx(i, m.ghost, k) * comps;
          const double* s = rule.kind == BcKind::Neumann
                                ? plane + g.idx(i, m.mirror, k) * comps
                                : plane + g.idx(i, m.wrap, k) * comps;
          for (int c = 0; c < comps; ++c)
            gcell[c] = rule.kind == BcKind::Dirichlet ? rule.value : s[c];
        }
    } else {
      for (int64_t j = yLo; j < yHi; ++j)
        for (int64_t i = 0; i < g.n[0]; ++i) {
          double* gcell = plane + g.idx(i, j, m.ghost) * comps;
          const double* s = rule.kind == BcKind::Neumann
                                ? plane + g.idx(i, j, m.mirror) * comps
                                : plane + g.idx(i, j, m.wrap) * comps;
          for (int c = 0; c < comps; ++c)
            gcell[c] = rule.kind == BcKind::Dirichlet ? rule.value : s[c];
        }
    }
  }
}

void bc_source_range(const GridGeom& g, int face, BcKind kind, int64_t& lo, int64_t& hi) {
  const int axis = face / 2;
  const bool minFace = (face & 1) == 0;
  const int64_t n = g.n[axis];
  switch (kind) {
    case BcKind::Dirichlet:
      lo = hi = 0;
      return;
    case BcKind::Neumann:
      lo = minFace ? 0 : n - g.r;
      hi = minFace ? g.r : n;
      return;
    case BcKind::Periodic:
      lo = minFace ? n - g.r : 0;
      hi = minFace ? n : g.r;
      return;
  }
  lo = hi = 0;
}

}  // namespace fdfuse
