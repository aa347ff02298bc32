#include "eqtree/reference.hpp"

#include <set>

#include "support.hpp"

namespace fdfuse {

double tree_eval_point(const Problem& p, const Tree& t, int ni, int comp,
                       const GridGeom& g, const StencilSet& st,
                       const EvalPlanes& pl, int64_t cell) {
  const TreeNode& n = t.at(ni);
  switch (n.op) {
    case Op::Const:
      return n.value;
    case Op::Field: {
      int comps = p.fields[n.fieldId].comps;
      return pl.point[n.fieldId][cell * comps + comp];
    }
    case Op::Add:
    case Op::Sub:
    case Op::Times: {
      int ca = t.at(n.a).dims == 1 ? 0 : comp;
      int cb = t.at(n.b).dims == 1 ? 0 : comp;
      double a = tree_eval_point(p, t, n.a, ca, g, st, pl, cell);
      double b = tree_eval_point(p, t, n.b, cb, g, st, pl, cell);
      return n.op == Op::Add ? a + b : n.op == Op::Sub ? a - b : a * b;
    }
    case Op::Der: {
      int f = t.at(n.a).fieldId;
      int comps = p.fields[f].comps;
      return stencil_axis(pl.sten[f], cell * comps + comp,
                          g.stride(n.axis) * comps, st.get(n.derivOrder, n.axis));
    }
    case Op::Grad: {
      int f = t.at(n.a).fieldId;  // scalar arg; component index is the axis
      return stencil_axis(pl.sten[f], cell, g.stride(comp), st.get(1, comp));
    }
    case Op::Div: {
      int f = t.at(n.a).fieldId;
      int comps = p.fields[f].comps;
      double s = 0.0;
      for (int a = 0; a < p.mesh.dims; ++a)
        s += stencil_axis(pl.sten[f], cell * comps + a, g.stride(a) * comps,
                          st.get(1, a));
      return s;
    }
    case Op::Lapla: {
      int f = t.at(n.a).fieldId;
      int comps = p.fields[f].comps;
      double s = 0.0;
      for (int a = 0; a < p.mesh.dims; ++a)
        s += stencil_axis(pl.sten[f], cell * comps + comp,
                          g.stride(a) * comps, st.get(2, a));
      return s;
    }
  }
  throw Error(Errc::Internal, "unevaluable tree node");
}

namespace {

void sweep_equation(GridStore& gs, const Problem& p, const StencilSet& st,
                    const Equation& eq, const EvalPlanes& pl,
                    const double* usrc, double* out) {
  const GridGeom& g = gs.geom;
  int comps = p.fields[eq.lhsField].comps;
  for (int64_t k = 0; k < g.n[2]; ++k)
    for (int64_t j = 0; j < g.n[1]; ++j) {
      int64_t base = g.row_base(j, k);
      for (int64_t i = -g.r; i < g.n[0] + g.r; ++i) {
        int64_t cell = base + i + g.r;
        for (int c = 0; c < comps; ++c) {
          double rhs = tree_eval_point(p, eq.rhs, eq.rhs.root, c, g, st, pl, cell);
          out[cell * comps + c] =
              eq.kind == EqKind::TimeDerivative
                  ? euler_update(usrc[cell * comps + c], p.dt, rhs)
                  : rhs;
        }
      }
    }
}

}  // namespace

void reference_step(GridStore& gs, const Problem& p, const StencilSet& st,
                    int64_t step) {
  size_t nf = p.fields.size();
  std::set<int> updated;
  for (const Equation& eq : p.equations)
    if (eq.kind == EqKind::TimeDerivative) updated.insert(eq.lhsField);

  // Time group first (pointwise reads all stale), then algebraic equations in
  // declaration order, each seeing fresh values of fields updated before it.
  for (int pass = 0; pass < 2; ++pass) {
    EqKind kind = pass == 0 ? EqKind::TimeDerivative : EqKind::Algebraic;
    for (const Equation& eq : p.equations) {
      if (eq.kind != kind) continue;
      EvalPlanes pl;
      pl.point.resize(nf);
      pl.sten.resize(nf);
      for (size_t f = 0; f < nf; ++f) {
        pl.sten[f] = gs.fields[f].src(step);
        pl.point[f] = kind == EqKind::Algebraic && updated.count(int(f))
                          ? gs.fields[f].dst(step)
                          : gs.fields[f].src(step);
      }
      sweep_equation(gs, p, st, eq, pl, gs.fields[eq.lhsField].src(step),
                     gs.fields[eq.lhsField].dst(step));
      if (kind == EqKind::Algebraic) updated.insert(eq.lhsField);
    }
  }
}

void init_sweep_equation(GridStore& gs, const Problem& p, const StencilSet& st,
                         int eqIdx) {
  const Equation& eq = p.equations[size_t(eqIdx)];
  size_t nf = p.fields.size();
  EvalPlanes pl;
  pl.point.resize(nf);
  pl.sten.resize(nf);
  for (size_t f = 0; f < nf; ++f)
    pl.point[f] = pl.sten[f] = gs.fields[f].plane[0];
  sweep_equation(gs, p, st, eq, pl, gs.fields[eq.lhsField].plane[0],
                 gs.fields[eq.lhsField].plane[0]);
}

void reference_algebraic_init(GridStore& gs, const Problem& p,
                              const StencilSet& st) {
  for (size_t e = 0; e < p.equations.size(); ++e)
    if (p.equations[e].kind == EqKind::Algebraic)
      init_sweep_equation(gs, p, st, int(e));
}

}  // namespace fdfuse
