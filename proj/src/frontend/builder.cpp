#include <cmath>

#include "frontend/problem.hpp"

namespace fdfuse {

int Problem::field_index(const std::string& name) const {
  for (size_t i = 0; i < fields.size(); ++i)
    if (fields[i].name == name) return int(i);
  return -1;
}

std::vector<int> Problem::field_comps() const {
  std::vector<int> out;
  out.reserve(fields.size());
  for (const FieldSpec& f : fields) out.push_back(f.comps);
  return out;
}

std::vector<std::string> Problem::field_names() const {
  std::vector<std::string> out;
  out.reserve(fields.size());
  for (const FieldSpec& f : fields) out.push_back(f.name);
  return out;
}

int Problem::defining_equation(int fieldId) const {
  for (size_t i = 0; i < equations.size(); ++i)
    if (equations[i].lhsField == fieldId) return int(i);
  return -1;
}

static bool tree_stencil_reads(const Tree& t, int i, int fieldId) {
  if (i < 0) return false;
  const TreeNode& n = t.at(i);
  if (n.op == Op::Der || n.op == Op::Grad || n.op == Op::Div || n.op == Op::Lapla)
    return t.at(n.a).fieldId == fieldId;
  return tree_stencil_reads(t, n.a, fieldId) || tree_stencil_reads(t, n.b, fieldId);
}

bool Problem::stencil_read(int fieldId) const {
  for (const Equation& eq : equations)
    if (tree_stencil_reads(eq.rhs, eq.rhs.root, fieldId)) return true;
  return false;
}

static double eval_node(const InitExpr& e, int i, double x, double y, double z) {
  const InitNode& n = e.nodes[size_t(i)];
  switch (n.op) {
    case IOp::Num: return n.value;
    case IOp::Coord: return n.axis == 0 ? x : n.axis == 1 ? y : z;
    case IOp::Add: return eval_node(e, n.a, x, y, z) + eval_node(e, n.b, x, y, z);
    case IOp::Sub: return eval_node(e, n.a, x, y, z) - eval_node(e, n.b, x, y, z);
    case IOp::Mul: return eval_node(e, n.a, x, y, z) * eval_node(e, n.b, x, y, z);
    case IOp::Div: return eval_node(e, n.a, x, y, z) / eval_node(e, n.b, x, y, z);
    case IOp::Neg: return -eval_node(e, n.a, x, y, z);
    case IOp::Sin: return std::sin(eval_node(e, n.a, x, y, z));
    case IOp::Cos: return std::cos(eval_node(e, n.a, x, y, z));
    case IOp::Exp: return std::exp(eval_node(e, n.a, x, y, z));
  }
  return 0.0;
}

double InitExpr::eval(double x, double y, double z) const {
  return root < 0 ? 0.0 : eval_node(*this, root, x, y, z);
}

static bool init_equal(const InitExpr& a, int ra, const InitExpr& b, int rb) {
  if ((ra < 0) != (rb < 0)) return false;
  if (ra < 0) return true;
  const InitNode& na = a.nodes[size_t(ra)];
  const InitNode& nb = b.nodes[size_t(rb)];
  if (na.op != nb.op || na.axis != nb.axis) return false;
  if (na.op == IOp::Num && na.value != nb.value) return false;
  return init_equal(a, na.a, b, nb.a) && init_equal(a, na.b, b, nb.b);
}

bool problem_equal(const Problem& a, const Problem& b) {
  if (a.mesh.dims != b.mesh.dims || a.dt != b.dt || a.niter != b.niter || a.acc != b.acc)
    return false;
  for (int d = 0; d < 3; ++d)
    if (a.mesh.n[d] != b.mesh.n[d] || a.mesh.len[d] != b.mesh.len[d]) return false;
  if (a.fields.size() != b.fields.size() || a.constants.size() != b.constants.size() ||
      a.equations.size() != b.equations.size())
    return false;
  for (size_t i = 0; i < a.fields.size(); ++i)
    if (a.fields[i].name != b.fields[i].name || a.fields[i].comps != b.fields[i].comps)
      return false;
  for (size_t i = 0; i < a.constants.size(); ++i)
    if (a.constants[i].name != b.constants[i].name ||
        a.constants[i].value != b.constants[i].value)
      return false;
  for (size_t i = 0; i < a.equations.size(); ++i) {
    const Equation& ea = a.equations[i];
    const Equation& eb = b.equations[i];
    if (ea.kind != eb.kind || ea.lhsField != eb.lhsField ||
        !tree_equal(ea.rhs, ea.rhs.root, eb.rhs, eb.rhs.root))
      return false;
  }
  for (size_t i = 0; i < a.fields.size(); ++i) {
    if (!init_equal(a.ics[i], a.ics[i].root, b.ics[i], b.ics[i].root)) return false;
    for (int f = 0; f < 6; ++f) {
      const BcRule& ra = a.bcs[i][size_t(f)];
      const BcRule& rb = b.bcs[i][size_t(f)];
      if (ra.set != rb.set) return false;
      if (ra.set && (ra.kind != rb.kind || ra.value != rb.value)) return false;
    }
  }
  return true;
}

ProblemBuilder& ProblemBuilder::mesh(int dims, std::array<int64_t, 3> n,
                                     std::array<double, 3> len) {
  p_.mesh.dims = dims;
  for (int d = 0; d < 3; ++d) {
    p_.mesh.n[d] = d < dims ? n[size_t(d)] : 1;
    p_.mesh.len[d] = d < dims ? len[size_t(d)] : 1.0;
  }
  return *this;
}

ProblemBuilder& ProblemBuilder::field(const std::string& name, int comps) {
  p_.fields.push_back({name, comps, 0});
  p_.ics.resize(p_.fields.size());
  p_.bcs.resize(p_.fields.size());
  return *this;
}

ProblemBuilder& ProblemBuilder::constant(const std::string& name, double value) {
  p_.constants.push_back({name, value, 0});
  return *this;
}

ProblemBuilder& ProblemBuilder::eq_time(const std::string& lhs, Tree rhs) {
  Equation eq;
  eq.kind = EqKind::TimeDerivative;
  eq.lhsField = p_.field_index(lhs);
  eq.rhs = std::move(rhs);
  p_.equations.push_back(std::move(eq));
  return *this;
}

ProblemBuilder& ProblemBuilder::eq_algebraic(const std::string& lhs, Tree rhs) {
  Equation eq;
  eq.kind = EqKind::Algebraic;
  eq.lhsField = p_.field_index(lhs);
  eq.rhs = std::move(rhs);
  p_.equations.push_back(std::move(eq));
  return *this;
}

ProblemBuilder& ProblemBuilder::init(const std::string& field, InitExpr e) {
  int fid = p_.field_index(field);
  if (fid >= 0) p_.ics[size_t(fid)] = std::move(e);
  return *this;
}

ProblemBuilder& ProblemBuilder::bc(const std::string& field, int face, BcKind kind,
                                   double value) {
  int fid = p_.field_index(field);
  if (fid >= 0) p_.bcs[size_t(fid)][size_t(face)] = {true, kind, value, 0};
  return *this;
}

ProblemBuilder& ProblemBuilder::bc_all(const std::string& field, BcKind kind, double value) {
  for (int f = 0; f < 2 * p_.mesh.dims; ++f) bc(field, f, kind, value);
  return *this;
}

ProblemBuilder& ProblemBuilder::time(double dt, int64_t steps) {
  p_.dt = dt;
  p_.niter = steps;
  return *this;
}

ProblemBuilder& ProblemBuilder::accuracy(int acc) {
  p_.acc = acc;
  return *this;
}

Problem ProblemBuilder::build() {
  if (p_.mesh.dims == 0) throw Error(Errc::Validate, "builder: mesh not set");
  std::vector<int> comps = p_.field_comps();
  for (Equation& eq : p_.equations) {
    if (eq.lhsField < 0) throw Error(Errc::Validate, "builder: equation lhs is not a declared field");
    infer_dims(eq.rhs, p_.mesh.dims, comps);
  }
  return p_;
}

}  // namespace fdfuse
