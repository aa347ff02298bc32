#include "run/sim.hpp"

#include <cmath>

#include "eqtree/reference.hpp"
#include "support.hpp"

namespace fdfuse {

int64_t bytes_per_point(const Problem& p, const Lowered& low) {
  int64_t b = 0;
  for (size_t f = 0; f < p.fields.size(); ++f) {
    bool dynamic = p.defining_equation(int(f)) >= 0;
    b += int64_t(p.fields[f].comps) * 8 * (dynamic ? 2 : 1);
  }
  return b + low.time.temp_bytes_per_point() + low.algebraic.temp_bytes_per_point();
}

Sim::Sim(const Problem& prob, const SimConfig& config, const int64_t localN[3],
         const int64_t globalOff[3])
    : p(prob), cfg(config), low(lower(prob)) {
  double h[3] = {p.mesh.h(0), p.mesh.dims > 1 ? p.mesh.h(1) : 1.0,
                 p.mesh.dims > 2 ? p.mesh.h(2) : 1.0};
  st = make_stencil_set(p.acc, h, p.mesh.dims);
  geom = make_geom(p.mesh.dims, localN, h, p.acc, cfg.alignBytes, cfg.vectorSize);
  plan = derive_blocking(geom, cfg.l3Bytes, cfg.nThreads, bytes_per_point(p, low));
  gs = std::make_unique<GridStore>(geom, p);
  steps = cfg.stepsOverride >= 0 ? cfg.stepsOverride : p.niter;
  for (int d = 0; d < 3; ++d) off[d] = globalOff[d];
}

bool Sim::needs_ghosts(int fid) const {
  for (const BcRule& r : p.bcs[size_t(fid)])
    if (r.set) return true;
  return false;
}

bool Sim::local_face(int fid, int face) const {
  const BcRule& r = p.bcs[size_t(fid)][size_t(face)];
  if (!r.set || !atEdge[face]) return false;
  if (r.kind == BcKind::Periodic && axisCut[face / 2]) return false;
  return true;
}

BlockBox Sim::whole_box() const {
  BlockBox b;
  for (int d = 0; d < 3; ++d) {
    b.lo[d] = 0;
    b.hi[d] = geom.n[d];
  }
  return b;
}

void Sim::fill_ics() {
  const GridGeom& g = geom;
  for (size_t f = 0; f < p.fields.size(); ++f) {
    const InitExpr& e = p.ics[f];
    if (e.empty()) continue;
    int comps = p.fields[f].comps;
    double* plane = gs->fields[f].plane[0];
    for (int64_t k = 0; k < g.n[2]; ++k)
      for (int64_t j = 0; j < g.n[1]; ++j) {
        int64_t base = g.row_base(j, k);
        double y = p.mesh.dims > 1 ? double(off[1] + j) * g.h[1] : 0.0;
        double z = p.mesh.dims > 2 ? double(off[2] + k) * g.h[2] : 0.0;
        for (int64_t i = 0; i < g.n[0]; ++i) {
          double x = double(off[0] + i) * g.h[0];
          double v = e.eval(x, y, z);
          double* cell = plane + (base + i + g.r) * comps;
          for (int c = 0; c < comps; ++c) cell[c] = v;
        }
      }
  }
}

void Sim::fill_ghosts_plane0(int fid) {
  const FieldBcs& rules = p.bcs[size_t(fid)];
  double* plane = gs->fields[size_t(fid)].plane[0];
  int comps = p.fields[size_t(fid)].comps;
  for (int face = 0; face < 2 * p.mesh.dims; ++face)
    if (local_face(fid, face))
      apply_bc_face(geom, plane, comps, face, rules[size_t(face)], 0, geom.n[1],
                    0, geom.n[2]);
}

void Sim::init(const std::function<void(int fieldId)>& exchange) {
  fill_ics();

  std::vector<uint8_t> algLhs(p.fields.size(), 0);
  for (const Equation& eq : p.equations)
    if (eq.kind == EqKind::Algebraic) algLhs[size_t(eq.lhsField)] = 1;

  // Input and dt-updated fields have complete interiors now; put their ghosts
  // in place before any algebraic init sweep can stencil-read them.
  for (size_t f = 0; f < p.fields.size(); ++f) {
    if (algLhs[f]) continue;
    if (needs_ghosts(int(f))) fill_ghosts_plane0(int(f));
    if (exchange && p.stencil_read(int(f))) exchange(int(f));
  }

  for (size_t e = 0; e < p.equations.size(); ++e) {
    const Equation& eq = p.equations[e];
    if (eq.kind != EqKind::Algebraic) continue;
    init_sweep_equation(*gs, p, st, int(e));
    if (needs_ghosts(eq.lhsField)) fill_ghosts_plane0(eq.lhsField);
    if (exchange && p.stencil_read(eq.lhsField)) exchange(eq.lhsField);
  }
}

void Sim::a_block(const StepPlanes& pl, const BlockBox& box, ExecScratch& sc) {
  run_program_block(low.time, geom, st, pl, box, sc.time, p.dt);
  run_program_block(low.algebraic, geom, st, pl, box, sc.algebraic, p.dt);
}

void Sim::b_fill_window(int64_t step, const BlockBox& box) {
  for (size_t f = 0; f < p.fields.size(); ++f) {
    if (!needs_ghosts(int(f))) continue;
    double* plane = gs->fields[f].dst(step);
    int comps = p.fields[f].comps;
    for (int face = 0; face < 2 * p.mesh.dims; ++face) {
      if (!local_face(int(f), face)) continue;
      int axis = face / 2;
      bool minFace = (face & 1) == 0;
      // X ghosts belong to every block (rows are never cut); y/z faces only
      // to blocks touching that boundary.
      if (axis != 0) {
        if (minFace && box.lo[axis] != 0) continue;
        if (!minFace && box.hi[axis] != geom.n[axis]) continue;
      }
      apply_bc_face(geom, plane, comps, face, p.bcs[f][size_t(face)],
                    box.lo[1], box.hi[1], box.lo[2], box.hi[2]);
    }
  }
}

void Sim::b_fill(int64_t step) { b_fill_window(step, whole_box()); }

void Sim::check_finite(int64_t step) const {
  const GridGeom& g = geom;
  for (size_t f = 0; f < p.fields.size(); ++f) {
    if (p.defining_equation(int(f)) < 0) continue;
    const double* plane = gs->fields[f].dst(step);
    int comps = p.fields[f].comps;
    for (int64_t k = 0; k < g.n[2]; ++k)
      for (int64_t j = 0; j < g.n[1]; ++j) {
        int64_t base = g.row_base(j, k);
        for (int64_t i = 0; i < g.n[0]; ++i) {
          const double* cell = plane + (base + i + g.r) * comps;
          for (int c = 0; c < comps; ++c)
            if (!std::isfinite(cell[c]))
              throw Error(Errc::Numeric,
                          "non-finite value in field '" + p.fields[f].name +
                              "' after step " + std::to_string(step));
        }
      }
  }
}

}  // namespace fdfuse
