#pragma once

#include "frontend/problem.hpp"
#include "grid/grid.hpp"

namespace fdfuse {

// Fills the ghost layer of one face of one plane, restricted to the caller's
// y/z span (block-local B work). X faces fill ghost columns of rows in
// [yLo,yHi)x[zLo,zHi); Y/Z faces fill ghost rows/planes over the interior X
// range only (ghost corners are never written and never read: star stencils).
//   dirichlet: ghost = value
//   neumann:   ghost[-k] = interior[k-1] (mirror, zero gradient)
//   periodic:  ghost = wrap copy from the opposite interior
void apply_bc_face(const GridGeom& g, double* plane, int comps, int face,
                   const BcRule& rule, int64_t yLo, int64_t yHi, int64_t zLo,
                   int64_t zHi);

// Interior rows whose values a face fill reads (mirror/wrap sources); used to
// compute cross-block task dependencies. Returns a [lo,hi) range along the
// face's axis; empty for dirichlet.
void bc_source_range(const GridGeom& g, int face, BcKind kind, int64_t& lo, int64_t& hi);

}  // namespace fdfuse
