#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "eqtree/tree.hpp"
#include "support.hpp"

namespace fdfuse {

struct MeshSpec {
  int dims = 0;
  int64_t n[3] = {1, 1, 1};
  double len[3] = {1.0, 1.0, 1.0};
  // Point x_i = i * h with h = L / n (periodic-friendly spacing; coordinates
  // are always global_index * h so ICs are identical across rank counts).
  double h(int axis) const { return len[axis] / double(n[axis]); }
};

struct FieldSpec {
  std::string name;
  int comps = 1;
  int line = 0;
};

struct ConstSpec {
  std::string name;
  double value = 0.0;
  int line = 0;
};

enum class EqKind { TimeDerivative, Algebraic };

struct Equation {
  EqKind kind = EqKind::Algebraic;
  int lhsField = -1;
  Tree rhs;
  int line = 0;
};

// Init expressions are plain functions of the point coordinates.
enum class IOp { Num, Coord, Add, Sub, Mul, Div, Neg, Sin, Cos, Exp };

struct InitNode {
  IOp op = IOp::Num;
  double value = 0.0;
  std::string name;  // display-only for Num (named constant / pi)
  int axis = 0;      // Coord
  int a = -1, b = -1;
};

struct InitExpr {
  std::vector<InitNode> nodes;
  int root = -1;
  bool empty() const { return root < 0; }
  double eval(double x, double y, double z) const;
};

enum class BcKind { Dirichlet, Neumann, Periodic };

struct BcRule {
  bool set = false;
  BcKind kind = BcKind::Dirichlet;
  double value = 0.0;
  int line = 0;
};

// Face ids: 0 xmin, 1 xmax, 2 ymin, 3 ymax, 4 zmin, 5 zmax.
using FieldBcs = std::array<BcRule, 6>;

struct Problem {
  MeshSpec mesh;
  std::vector<FieldSpec> fields;
  std::vector<ConstSpec> constants;
  std::vector<Equation> equations;
  std::vector<InitExpr> ics;    // indexed by field id; empty() = all zero
  std::vector<FieldBcs> bcs;    // indexed by field id
  double dt = 0.0;
  int64_t niter = 0;
  int acc = 2;

  int field_index(const std::string& name) const;
  std::vector<int> field_comps() const;
  std::vector<std::string> field_names() const;
  // -1 when the field has no defining equation (static input field).
  int defining_equation(int fieldId) const;
  bool stencil_read(int fieldId) const;  // appears under Der/Grad/Div/Lapla
};

// Semantic equality ignoring source locations and const display names; the
// canonical-print round trip is tested against this.
bool problem_equal(const Problem& a, const Problem& b);

// Parses the line-oriented specification text. Throws Error(Parse) with a
// line/column diagnostic on the first failure. The result is fully resolved:
// dims inferred and equations classified.
Problem parse_problem(const std::string& text);

// Canonical text form; parse_problem(print_problem(p)) == p for valid p.
std::string print_problem(const Problem& p);

struct ValidationReport {
  std::vector<Diag> errors;
  std::vector<Diag> warnings;
  bool ok() const { return errors.empty(); }
  std::string to_text() const;
};

// Semantic validation (referential integrity, BC coverage of stencil-read
// fields, stencil fit, stability estimates). Never throws; problems built
// programmatically get their dims inferred here if still missing.
ValidationReport validate_problem(const Problem& p);

// Programmatic construction producing the same model as the parser.
class ProblemBuilder {
 public:
  ProblemBuilder& mesh(int dims, std::array<int64_t, 3> n, std::array<double, 3> len);
  ProblemBuilder& field(const std::string& name, int comps = 1);
  ProblemBuilder& constant(const std::string& name, double value);
  // The tree may reference fields by id in declaration order.
  ProblemBuilder& eq_time(const std::string& lhs, Tree rhs);
  ProblemBuilder& eq_algebraic(const std::string& lhs, Tree rhs);
  ProblemBuilder& init(const std::string& field, InitExpr e);
  ProblemBuilder& bc(const std::string& field, int face, BcKind kind, double value = 0.0);
  ProblemBuilder& bc_all(const std::string& field, BcKind kind, double value = 0.0);
  ProblemBuilder& time(double dt, int64_t steps);
  ProblemBuilder& accuracy(int acc);
  // Infers dims and classifies; throws Error on structural problems.
  Problem build();

 private:
  Problem p_;
};

}  // namespace fdfuse
