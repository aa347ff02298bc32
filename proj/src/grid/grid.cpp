#include "grid/grid.hpp"

#include <cstdlib>
#include <cstring>

namespace fdfuse {

GridGeom make_geom(int dims, const int64_t n[3], const double h[3], int acc,
                   int alignBytes, int vectorSize) {
  if (alignBytes < 8 || (alignBytes & (alignBytes - 1)) != 0)
    throw Error(Errc::Config, "alignment must be a power of two >= 8");
  if (vectorSize < 1 || (vectorSize & (vectorSize - 1)) != 0)
    throw Error(Errc::Config, "vectorSize must be a power of two >= 1");
  GridGeom g;
  g.dims = dims;
  for (int d = 0; d < 3; ++d) {
    g.n[d] = d < dims ? n[d] : 1;
    g.h[d] = h[d];
  }
  g.r = acc / 2;
  g.alignBytes = alignBytes;
  g.vectorSize = vectorSize;
  // Row length: nx + 2r rounded up so rows stay cache-line aligned and the
  // row is a whole number of vector lanes.
  int64_t unit = lcm64(alignBytes / 8, vectorSize);
  g.pX = align_up(g.n[0] + 2 * g.r, unit);
  g.rowsY = dims > 1 ? g.n[1] + 2 * g.r : 1;
  g.rowsZ = dims > 2 ? g.n[2] + 2 * g.r : 1;
  g.guard = align_up(g.r, alignBytes / 8);
  return g;
}

GridGeom make_geom(const MeshSpec& mesh, int acc, int alignBytes, int vectorSize) {
  double h[3] = {mesh.h(0), mesh.dims > 1 ? mesh.h(1) : 1.0,
                 mesh.dims > 2 ? mesh.h(2) : 1.0};
  return make_geom(mesh.dims, mesh.n, h, acc, alignBytes, vectorSize);
}

GridStore::GridStore(const GridGeom& g, const Problem& p) : geom(g) {
  fields.reserve(p.fields.size());
  for (size_t f = 0; f < p.fields.size(); ++f) {
    FieldStore fs;
    fs.name = p.fields[f].name;
    fs.comps = p.fields[f].comps;
    fs.dynamic = p.defining_equation(int(f)) >= 0;
    fs.stencilRead = p.stencil_read(int(f));
    int planes = fs.dynamic ? 2 : 1;
    for (int b = 0; b < planes; ++b) {
      int64_t doubles = (geom.cells() + 2 * geom.guard) * fs.comps;
      size_t bytes = size_t(align_up(doubles * 8, geom.alignBytes));
      double* raw = static_cast<double*>(std::aligned_alloc(size_t(geom.alignBytes), bytes));
      if (!raw) throw Error(Errc::Internal, "grid allocation failed");
      std::memset(raw, 0, bytes);
      allocs_.emplace_back(raw);
      fs.plane[b] = raw + geom.guard * fs.comps;
    }
    if (planes == 1) fs.plane[1] = fs.plane[0];
    fields.push_back(std::move(fs));
  }
}

}  // namespace fdfuse
