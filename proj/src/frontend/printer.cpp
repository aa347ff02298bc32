#include <sstream>

#include "frontend/problem.hpp"

namespace fdfuse {
namespace {

// Precedence: additive = 1, multiplicative = 2, atoms = 3.
int prec(Op op) {
  switch (op) {
    case Op::Add:
    case Op::Sub: return 1;
    case Op::Times: return 2;
    default: return 3;
  }
}

void print_expr(const Tree& t, int i, int parentPrec, const Problem& p, std::ostream& out) {
  const TreeNode& n = t.at(i);
  int my = prec(n.op);
  bool paren = my < parentPrec;
  if (paren) out << "(";
  switch (n.op) {
    case Op::Field: out << p.fields[size_t(n.fieldId)].name; break;
    case Op::Const:
      out << (n.constName.empty() ? fmt_real(n.value) : n.constName);
      break;
    case Op::Add:
      print_expr(t, n.a, my, p, out);
      out << " + ";
      print_expr(t, n.b, my, p, out);
      break;
    case Op::Sub:
      print_expr(t, n.a, my, p, out);
      out << " - ";
      // Right operand of '-' needs parens when it is additive itself.
      print_expr(t, n.b, my + 1, p, out);
      break;
    case Op::Times:
      print_expr(t, n.a, my, p, out);
      out << " * ";
      print_expr(t, n.b, my, p, out);
      break;
    case Op::Der: {
      const char* name = n.axis == 0 ? "derx" : n.axis == 1 ? "dery" : "derz";
      if (n.derivOrder == 2)
        out << name << "(" << name << "(" << p.fields[size_t(t.at(n.a).fieldId)].name << "))";
      else
        out << name << "(" << p.fields[size_t(t.at(n.a).fieldId)].name << ")";
      break;
    }
    case Op::Grad: out << "grad(" << p.fields[size_t(t.at(n.a).fieldId)].name << ")"; break;
    case Op::Div: out << "div(" << p.fields[size_t(t.at(n.a).fieldId)].name << ")"; break;
    case Op::Lapla: out << "lapla(" << p.fields[size_t(t.at(n.a).fieldId)].name << ")"; break;
  }
  if (paren) out << ")";
}

int iprec(IOp op) {
  switch (op) {
    case IOp::Add:
    case IOp::Sub: return 1;
    case IOp::Mul:
    case IOp::Div: return 2;
    default: return 3;
  }
}

void print_init(const InitExpr& e, int i, int parentPrec, std::ostream& out) {
  const InitNode& n = e.nodes[size_t(i)];
  int my = iprec(n.op);
  bool paren = my < parentPrec;
  if (paren) out << "(";
  switch (n.op) {
    case IOp::Num: out << (n.name.empty() ? fmt_real(n.value) : n.name); break;
    case IOp::Coord: out << char('x' + n.axis); break;
    case IOp::Add:
      print_init(e, n.a, my, out);
      out << " + ";
      print_init(e, n.b, my, out);
      break;
    case IOp::Sub:
      print_init(e, n.a, my, out);
      out << " - ";
      print_init(e, n.b, my + 1, out);
      break;
    case IOp::Mul:
      print_init(e, n.a, my, out);
      out << " * ";
      print_init(e, n.b, my, out);
      break;
    case IOp::Div:
      print_init(e, n.a, my, out);
      out << " / ";
      print_init(e, n.b, my + 1, out);
      break;
    case IOp::Neg:
      out << "-";
      print_init(e, n.a, 3, out);
      break;
    case IOp::Sin:
    case IOp::Cos:
    case IOp::Exp:
      out << (n.op == IOp::Sin ? "sin" : n.op == IOp::Cos ? "cos" : "exp") << "(";
      print_init(e, n.a, 0, out);
      out << ")";
      break;
  }
  if (paren) out << ")";
}

const char* face_name(int f) {
  static const char* names[6] = {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};
  return names[f];
}

}  // namespace

std::string print_problem(const Problem& p) {
  std::ostringstream out;
  out << "mesh " << p.mesh.dims << "d";
  const char* nk[3] = {"nx", "ny", "nz"};
  const char* lk[3] = {"lx", "ly", "lz"};
  for (int d = 0; d < p.mesh.dims; ++d) out << " " << nk[d] << "=" << p.mesh.n[d];
  for (int d = 0; d < p.mesh.dims; ++d) out << " " << lk[d] << "=" << fmt_real(p.mesh.len[d]);
  out << "\n";
  for (const FieldSpec& f : p.fields) {
    out << "field " << f.name << " ";
    if (f.comps == 1)
      out << "scalar";
    else
      out << "vector" << f.comps;
    out << "\n";
  }
  for (const ConstSpec& c : p.constants)
    out << "const " << c.name << " = " << fmt_real(c.value) << "\n";
  for (const Equation& eq : p.equations) {
    out << "eq ";
    if (eq.kind == EqKind::TimeDerivative)
      out << "dt(" << p.fields[size_t(eq.lhsField)].name << ")";
    else
      out << p.fields[size_t(eq.lhsField)].name;
    out << " = ";
    print_expr(eq.rhs, eq.rhs.root, 0, p, out);
    out << "\n";
  }
  for (size_t i = 0; i < p.fields.size(); ++i) {
    if (p.ics[i].empty()) continue;
    out << "init " << p.fields[i].name << " = ";
    print_init(p.ics[i], p.ics[i].root, 0, out);
    out << "\n";
  }
  for (size_t i = 0; i < p.fields.size(); ++i) {
    for (int f = 0; f < 6; ++f) {
      const BcRule& r = p.bcs[i][size_t(f)];
      if (!r.set) continue;
      out << "bc " << p.fields[i].name << " ";
      switch (r.kind) {
        case BcKind::Dirichlet: out << "dirichlet value=" << fmt_real(r.value); break;
        case BcKind::Neumann: out << "neumann"; break;
        case BcKind::Periodic: out << "periodic"; break;
      }
      out << " on " << face_name(f) << "\n";
    }
  }
  out << "time dt=" << fmt_real(p.dt) << " steps=" << p.niter << "\n";
  out << "numerics acc=" << p.acc << "\n";
  return out.str();
}

}  // namespace fdfuse
