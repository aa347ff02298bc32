#pragma once

#include <memory>
#include <string>
#include <vector>

#include "frontend/problem.hpp"
#include "support.hpp"

namespace fdfuse {

// Geometry of one (possibly rank-local) grid: padded row length, halo radius,
// ghosted row/plane counts. Logical coordinates run over [-r, n+r) per
// present dimension; cell (i,j,k) maps to ((k+r)*rowsY + (j+r))*pX + (i+r).
struct GridGeom {
  int dims = 1;
  int64_t n[3] = {1, 1, 1};   // interior extents (1 for absent dims)
  double h[3] = {1, 1, 1};    // spacing is global even for rank-local grids
  int r = 1;
  int alignBytes = 64;
  int vectorSize = 8;
  int64_t pX = 0;             // padded row length (cells)
  int64_t rowsY = 1, rowsZ = 1;
  int64_t guard = 0;          // cells before cell 0 and after the last row

  int64_t row_cells() const { return n[0] + 2 * r; }  // swept cells per row
  int64_t cells() const { return pX * rowsY * rowsZ; }
  int64_t interior_cells() const { return n[0] * n[1] * n[2]; }
  int64_t stride(int axis) const { return axis == 0 ? 1 : axis == 1 ? pX : pX * rowsY; }
  int64_t row_base(int64_t j, int64_t k) const {
    int64_t jj = dims > 1 ? j + r : 0;
    int64_t kk = dims > 2 ? k + r : 0;
    return (kk * rowsY + jj) * pX;
  }
  int64_t idx(int64_t i, int64_t j, int64_t k) const { return row_base(j, k) + i + r; }
};

GridGeom make_geom(int dims, const int64_t n[3], const double h[3], int acc,
                   int alignBytes, int vectorSize);
GridGeom make_geom(const MeshSpec& mesh, int acc, int alignBytes, int vectorSize);

// One field's storage: 1 (static) or 2 (defined by an equation) parity planes,
// components interleaved point-major. Plane pointers are cell-0 based; the
// guard cells in front absorb the stencil reach of the redundant ghost-column
// sweep and keep cell 0 of every plane on an aligned address.
struct FieldStore {
  std::string name;
  int comps = 1;
  bool dynamic = false;
  bool stencilRead = false;
  double* plane[2] = {nullptr, nullptr};

  double* src(int64_t step) { return plane[dynamic ? step & 1 : 0]; }
  double* dst(int64_t step) { return plane[dynamic ? (step & 1) ^ 1 : 0]; }
  const double* src(int64_t step) const { return plane[dynamic ? step & 1 : 0]; }
  const double* dst(int64_t step) const { return plane[dynamic ? (step & 1) ^ 1 : 0]; }
};

class GridStore {
 public:
  GridStore(const GridGeom& geom, const Problem& p);

  GridGeom geom;
  std::vector<FieldStore> fields;

  int64_t plane_doubles(int f) const {
    return geom.cells() * fields[size_t(f)].comps;
  }

 private:
  struct FreeDeleter {
    void operator()(double* p) const { std::free(p); }
  };
  std::vector<std::unique_ptr<double, FreeDeleter>> allocs_;
};

}  // namespace fdfuse
