#include <algorithm>
#include <cmath>
#include <sstream>

#include "frontend/problem.hpp"

namespace fdfuse {
namespace {

void err(ValidationReport& r, int line, const std::string& msg) {
  r.errors.push_back({line, 1, msg});
}
void warn(ValidationReport& r, int line, const std::string& msg) {
  r.warnings.push_back({line, 1, msg});
}

bool tree_fields_valid(const Tree& t, int i, int nFields) {
  if (i < 0) return true;
  const TreeNode& n = t.at(i);
  if (n.op == Op::Field && (n.fieldId < 0 || n.fieldId >= nFields)) return false;
  return tree_fields_valid(t, n.a, nFields) && tree_fields_valid(t, n.b, nFields);
}

bool tree_reads(const Tree& t, int i, int fieldId) {
  if (i < 0) return false;
  const TreeNode& n = t.at(i);
  if (n.op == Op::Field && n.fieldId == fieldId) return true;
  return tree_reads(t, n.a, fieldId) || tree_reads(t, n.b, fieldId);
}

// Accumulates |constant| multipliers down to stencil vertices; the basis of
// the diffusive/advective time-step estimates. Unknown (field) coefficients
// count as 1, so this is a heuristic floor, reported as warnings only.
void scan_coefs(const Tree& t, int i, double m, double& maxDiff, double& maxAdv) {
  if (i < 0) return;
  const TreeNode& n = t.at(i);
  switch (n.op) {
    case Op::Add:
    case Op::Sub:
      scan_coefs(t, n.a, m, maxDiff, maxAdv);
      scan_coefs(t, n.b, m, maxDiff, maxAdv);
      return;
    case Op::Times: {
      const TreeNode& a = t.at(n.a);
      const TreeNode& b = t.at(n.b);
      if (a.op == Op::Const) {
        scan_coefs(t, n.b, m * std::fabs(a.value), maxDiff, maxAdv);
      } else if (b.op == Op::Const) {
        scan_coefs(t, n.a, m * std::fabs(b.value), maxDiff, maxAdv);
      } else {
        scan_coefs(t, n.a, m, maxDiff, maxAdv);
        scan_coefs(t, n.b, m, maxDiff, maxAdv);
      }
      return;
    }
    case Op::Der:
      if (n.derivOrder == 2)
        maxDiff = std::max(maxDiff, m);
      else
        maxAdv = std::max(maxAdv, m);
      return;
    case Op::Grad:
    case Op::Div:
      maxAdv = std::max(maxAdv, m);
      return;
    case Op::Lapla:
      maxDiff = std::max(maxDiff, m);
      return;
    case Op::Field:
    case Op::Const:
      return;
  }
}

}  // namespace

std::string ValidationReport::to_text() const {
  std::ostringstream out;
  for (const Diag& d : errors) {
    out << "error: ";
    if (d.line > 0) out << "line " << d.line << ": ";
    out << d.msg << "\n";
  }
  for (const Diag& d : warnings) {
    out << "warning: ";
    if (d.line > 0) out << "line " << d.line << ": ";
    out << d.msg << "\n";
  }
  return out.str();
}

ValidationReport validate_problem(const Problem& p) {
  ValidationReport r;
  const int nf = int(p.fields.size());

  if (p.mesh.dims < 1 || p.mesh.dims > 3) {
    err(r, 0, "mesh rank must be 1, 2 or 3");
    return r;
  }
  for (int d = 0; d < p.mesh.dims; ++d) {
    if (p.mesh.n[d] < 3)
      err(r, 0, std::string("mesh dimension ") + char('x' + d) + " needs at least 3 points");
    if (!(p.mesh.len[d] > 0))
      err(r, 0, std::string("mesh length ") + char('x' + d) + " must be > 0");
  }
  if (p.acc != 2 && p.acc != 4 && p.acc != 6 && p.acc != 8)
    err(r, 0, "acc must be one of 2, 4, 6, 8");
  else
    for (int d = 0; d < p.mesh.dims; ++d)
      if (p.mesh.n[d] <= p.acc)
        err(r, 0, std::string("mesh dimension ") + char('x' + d) +
                      " has too few points for acc=" + std::to_string(p.acc));
  if (!(p.dt > 0)) err(r, 0, "dt must be > 0");
  if (p.niter < 1) err(r, 0, "steps must be >= 1");
  if (p.equations.empty()) err(r, 0, "no equations");
  if (p.ics.size() != p.fields.size()) err(r, 0, "init entry for an undeclared field");
  if (p.bcs.size() != p.fields.size()) err(r, 0, "bc entry for an undeclared field");

  std::vector<int> comps = p.field_comps();
  std::vector<int> lhsSeen(size_t(nf), 0);
  for (const Equation& eq : p.equations) {
    if (eq.lhsField < 0 || eq.lhsField >= nf) {
      err(r, eq.line, "equation left-hand side is not a declared field");
      continue;
    }
    if (++lhsSeen[size_t(eq.lhsField)] == 2)
      err(r, eq.line, "duplicate left-hand side '" + p.fields[size_t(eq.lhsField)].name + "'");
    if (!tree_fields_valid(eq.rhs, eq.rhs.root, nf)) {
      err(r, eq.line, "equation references an undeclared field");
      continue;
    }
    Tree copy = eq.rhs;  // builder-made problems may be unannotated
    try {
      infer_dims(copy, p.mesh.dims, comps);
    } catch (const Error& e) {
      err(r, eq.line, e.what());
      continue;
    }
    if (copy.at(copy.root).dims != comps[size_t(eq.lhsField)])
      err(r, eq.line, "rhs component count does not match '" +
                          p.fields[size_t(eq.lhsField)].name + "'");
  }

  // BC coverage: every stencil-read field needs a rule on each face of each
  // mesh axis, with periodic faces paired. Pointwise-only fields need none.
  for (int f = 0; f < nf && p.bcs.size() == p.fields.size(); ++f) {
    bool needs = p.stencil_read(f);
    const FieldBcs& fb = p.bcs[size_t(f)];
    for (int face = 2 * p.mesh.dims; face < 6; ++face)
      if (fb[size_t(face)].set)
        err(r, fb[size_t(face)].line,
            "bc face beyond mesh rank for '" + p.fields[size_t(f)].name + "'");
    for (int axis = 0; axis < p.mesh.dims; ++axis) {
      const BcRule& lo = fb[size_t(2 * axis)];
      const BcRule& hi = fb[size_t(2 * axis + 1)];
      if (needs) {
        if (!lo.set || !hi.set) {
          err(r, p.fields[size_t(f)].line,
              "stencil-read field '" + p.fields[size_t(f)].name + "' is missing a bc on axis " +
                  std::string(1, char('x' + axis)));
          continue;
        }
      }
      if (lo.set && hi.set &&
          ((lo.kind == BcKind::Periodic) != (hi.kind == BcKind::Periodic)))
        err(r, lo.line, "periodic bc must be set on both faces of axis " +
                            std::string(1, char('x' + axis)) + " for '" +
                            p.fields[size_t(f)].name + "'");
    }
  }

  for (int f = 0; f < nf; ++f) {
    bool used = p.defining_equation(f) >= 0;
    for (const Equation& eq : p.equations) used = used || tree_reads(eq.rhs, eq.rhs.root, f);
    if (!used)
      warn(r, p.fields[size_t(f)].line, "field '" + p.fields[size_t(f)].name + "' is never used");
  }

  // Stability estimates (explicit Euler + central differences).
  double hmin = p.mesh.h(0);
  for (int d = 1; d < p.mesh.dims; ++d) hmin = std::min(hmin, p.mesh.h(d));
  double maxDiff = 0.0, maxAdv = 0.0;
  for (const Equation& eq : p.equations)
    if (eq.kind == EqKind::TimeDerivative)
      scan_coefs(eq.rhs, eq.rhs.root, 1.0, maxDiff, maxAdv);
  if (maxDiff > 0) {
    double bound = hmin * hmin / (2.0 * p.mesh.dims * maxDiff);
    if (p.dt > bound * (1 + 1e-9))
      warn(r, 0, "stability: dt=" + fmt_real(p.dt) + " exceeds the diffusive estimate " +
                     fmt_real(bound) + " (h_min^2 / (2*dims*maxcoef))");
  }
  if (maxAdv > 0) {
    double bound = hmin / maxAdv;
    if (p.dt > bound * (1 + 1e-9))
      warn(r, 0, "stability: dt=" + fmt_real(p.dt) + " exceeds the advective estimate " +
                     fmt_real(bound) + " (h_min / |v|_max)");
  }
  return r;
}

}  // namespace fdfuse
