#pragma once

#include <cstdint>
#include <vector>

#include "eqtree/tree.hpp"
#include "frontend/problem.hpp"
#include "grid/grid.hpp"
#include "numerics/stencil.hpp"

namespace fdfuse {

// Buffer binding for one equation: pointwise reads may see this step's fresh
// values, stencil reads always see start-of-step state.
struct EvalPlanes {
  std::vector<const double*> point;  // per field, VAR reads
  std::vector<const double*> sten;   // per field, stencil reads
};

// Evaluates component `comp` of tree node `ni` at cell `cell` by direct
// recursion. This is the semantic baseline; fused executors must match it
// bitwise, so per-point arithmetic funnels through stencil_axis/euler_update
// and multi-axis sums run in ascending axis order here and everywhere else.
double tree_eval_point(const Problem& p, const Tree& t, int ni, int comp,
                       const GridGeom& g, const StencilSet& st,
                       const EvalPlanes& pl, int64_t cell);

// One explicit-Euler step by tree walk. Sweeps the same cells as the fused
// executors (X ghost columns included, Y/Z interior) so whole planes compare
// bitwise afterwards.
void reference_step(GridStore& gs, const Problem& p, const StencilSet& st,
                    int64_t step);

// One algebraic equation swept over the whole grid with every buffer bound to
// the t=0 parity plane. Init runs these in declaration order, refreshing the
// lhs ghosts between sweeps so a later equation may stencil-read the result.
void init_sweep_equation(GridStore& gs, const Problem& p, const StencilSet& st,
                         int eqIdx);

// All algebraic init sweeps back to back (single-grid convenience).
void reference_algebraic_init(GridStore& gs, const Problem& p,
                              const StencilSet& st);

}  // namespace fdfuse
