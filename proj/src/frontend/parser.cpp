#include <charconv>
#include <cstdlib>
#include <map>
#include <optional>
#include <set>

#include "frontend/problem.hpp"

namespace fdfuse {
namespace {

struct Tok {
  enum Kind { Ident, Number, Sym, End } kind = End;
  std::string text;
  double num = 0.0;
  int line = 0, col = 0;
};

[[noreturn]] void fail(int line, int col, const std::string& msg) {
  throw Error(Errc::Parse, Diag{line, col, msg});
}
[[noreturn]] void fail(const Tok& t, const std::string& msg) { fail(t.line, t.col, msg); }

std::vector<Tok> lex_line(const std::string& s, int lineNo) {
  std::vector<Tok> out;
  size_t i = 0;
  while (i < s.size()) {
    char c = s[i];
    if (c == '#') break;
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      continue;
    }
    Tok t;
    t.line = lineNo;
    t.col = int(i) + 1;
    if (isalpha(uint8_t(c)) || c == '_') {
      size_t j = i;
      while (j < s.size() && (isalnum(uint8_t(s[j])) || s[j] == '_')) ++j;
      t.kind = Tok::Ident;
      t.text = s.substr(i, j - i);
      i = j;
    } else if (isdigit(uint8_t(c)) || (c == '.' && i + 1 < s.size() && isdigit(uint8_t(s[i + 1])))) {
      double v = 0.0;
      auto res = std::from_chars(s.data() + i, s.data() + s.size(), v);
      if (res.ec != std::errc()) fail(lineNo, t.col, "malformed number");
      t.kind = Tok::Number;
      t.num = v;
      t.text = s.substr(i, size_t(res.ptr - (s.data() + i)));
      i = size_t(res.ptr - s.data());
    } else if (std::string("=()+-*/,").find(c) != std::string::npos) {
      t.kind = Tok::Sym;
      t.text = std::string(1, c);
      ++i;
    } else {
      fail(lineNo, int(i) + 1, std::string("unexpected character '") + c + "'");
    }
    out.push_back(std::move(t));
  }
  Tok end;
  end.kind = Tok::End;
  end.line = lineNo;
  end.col = int(s.size()) + 1;
  out.push_back(std::move(end));
  return out;
}

// Identifiers with grammar meaning; declaring fields or constants under these
// names would make expressions ambiguous.
const std::set<std::string> kReserved = {"dt", "x",   "y",   "z",    "pi",   "sin",
                                         "cos", "exp", "grad", "div", "lapla",
                                         "derx", "dery", "derz"};

struct Cursor {
  const std::vector<Tok>* toks;
  size_t pos = 0;
  const Tok& peek() const { return (*toks)[pos]; }
  const Tok& next() { return (*toks)[pos++]; }
  bool is_sym(const char* s) const { return peek().kind == Tok::Sym && peek().text == s; }
  bool is_ident(const char* s) const { return peek().kind == Tok::Ident && peek().text == s; }
  void expect_sym(const char* s) {
    if (!is_sym(s)) fail(peek(), std::string("expected '") + s + "'");
    ++pos;
  }
  std::string expect_ident(const char* what) {
    if (peek().kind != Tok::Ident) fail(peek(), std::string("expected ") + what);
    return next().text;
  }
  double expect_number(const char* what) {
    bool neg = false;
    if (is_sym("-")) {
      neg = true;
      ++pos;
    }
    if (peek().kind != Tok::Number) fail(peek(), std::string("expected ") + what);
    double v = next().num;
    return neg ? -v : v;
  }
  void expect_end() {
    if (peek().kind != Tok::End) fail(peek(), "unexpected trailing tokens");
  }
};

// key=value attribute list, order-insensitive, each key at most once.
std::map<std::string, double> parse_attrs(Cursor& c, const std::set<std::string>& allowed) {
  std::map<std::string, double> out;
  while (c.peek().kind == Tok::Ident) {
    Tok key = c.next();
    if (!allowed.count(key.text)) fail(key, "unknown attribute '" + key.text + "'");
    if (out.count(key.text)) fail(key, "duplicate attribute '" + key.text + "'");
    c.expect_sym("=");
    out[key.text] = c.expect_number("value");
  }
  c.expect_end();
  return out;
}

struct StashedLine {
  std::vector<Tok> toks;  // includes the leading keyword
};

int face_id(const Tok& t) {
  static const char* names[6] = {"xmin", "xmax", "ymin", "ymax", "zmin", "zmax"};
  for (int f = 0; f < 6; ++f)
    if (t.text == names[f]) return f;
  if (t.text == "all") return -1;
  fail(t, "unknown face '" + t.text + "'");
}

int stencil_axis_of(const std::string& name) {
  if (name == "derx") return 0;
  if (name == "dery") return 1;
  if (name == "derz") return 2;
  return -1;
}

class ExprParser {
 public:
  ExprParser(Cursor& c, const Problem& p, Tree& t) : c_(c), p_(p), t_(t) {}

  int parse_expr() {
    int lhs = parse_term();
    while (c_.is_sym("+") || c_.is_sym("-")) {
      bool add = c_.next().text == "+";
      int rhs = parse_term();
      lhs = add ? t_.add(lhs, rhs) : t_.sub(lhs, rhs);
    }
    return lhs;
  }

 private:
  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (c_.is_sym("*")) {
        c_.next();
        lhs = t_.times(lhs, parse_factor());
      } else if (c_.is_sym("/")) {
        fail(c_.peek(), "division is not supported in equations (fold it into a constant)");
      } else {
        return lhs;
      }
    }
  }

  int parse_factor() {
    if (c_.is_sym("-")) {
      c_.next();
      int v = parse_factor();
      if (t_.at(v).op == Op::Const) return t_.leaf_const(-t_.at(v).value);
      return t_.times(t_.leaf_const(-1.0), v);
    }
    return parse_primary();
  }

  int field_ref(const std::string& name, int line, int col) {
    int fid = p_.field_index(name);
    if (fid < 0) fail(line, col, "'" + name + "' is not a field");
    return t_.leaf_field(fid);
  }

  int parse_field_arg() {
    Tok at = c_.peek();
    std::string name = c_.expect_ident("field name");
    return field_ref(name, at.line, at.col);
  }

  int parse_primary() {
    const Tok& t = c_.peek();
    if (t.kind == Tok::Number) return t_.leaf_const(c_.next().num);
    if (t.kind == Tok::Sym && t.text == "(") {
      c_.next();
      int e = parse_expr();
      c_.expect_sym(")");
      return e;
    }
    if (t.kind != Tok::Ident) fail(t, "expected expression");
    Tok id = c_.next();
    int axis = stencil_axis_of(id.text);
    if (axis >= 0) return parse_der(id, axis);
    if (id.text == "grad" || id.text == "div" || id.text == "lapla") {
      c_.expect_sym("(");
      int f = parse_field_arg();
      c_.expect_sym(")");
      if (id.text == "grad") return t_.grad(f);
      if (id.text == "div") return t_.div(f);
      return t_.lapla(f);
    }
    if (id.text == "pi") return t_.leaf_const(3.14159265358979323846, "pi");
    int fid = p_.field_index(id.text);
    if (fid >= 0) return t_.leaf_field(fid);
    for (const ConstSpec& cs : p_.constants)
      if (cs.name == id.text) return t_.leaf_const(cs.value, cs.name);
    fail(id, "unknown identifier '" + id.text + "'");
  }

  // derx(f) -> first derivative; derx(derx(f)) collapses to the exact
  // second-derivative stencil (the only nesting the fixed halo radius admits).
  int parse_der(const Tok&, int axis) {
    c_.expect_sym("(");
    const Tok& inner = c_.peek();
    if (inner.kind == Tok::Ident && stencil_axis_of(inner.text) >= 0) {
      Tok op2 = c_.next();
      int axis2 = stencil_axis_of(op2.text);
      if (axis2 != axis)
        fail(op2, "mixed-axis derivative nesting is not supported (materialize an "
                  "intermediate field instead)");
      c_.expect_sym("(");
      int f = parse_field_arg();
      c_.expect_sym(")");
      c_.expect_sym(")");
      return t_.der(axis, 2, f);
    }
    if (inner.kind == Tok::Ident &&
        (inner.text == "grad" || inner.text == "div" || inner.text == "lapla"))
      fail(inner, "nested stencil operators are not supported");
    int f = parse_field_arg();
    c_.expect_sym(")");
    return t_.der(axis, 1, f);
  }

  Cursor& c_;
  const Problem& p_;
  Tree& t_;
};

class InitParser {
 public:
  InitParser(Cursor& c, const Problem& p, InitExpr& e) : c_(c), p_(p), e_(e) {}

  int parse_expr() {
    int lhs = parse_term();
    while (c_.is_sym("+") || c_.is_sym("-")) {
      bool add = c_.next().text == "+";
      lhs = node(add ? IOp::Add : IOp::Sub, lhs, parse_term());
    }
    return lhs;
  }

 private:
  int node(IOp op, int a = -1, int b = -1, double v = 0.0, std::string name = {}, int axis = 0) {
    InitNode n;
    n.op = op;
    n.a = a;
    n.b = b;
    n.value = v;
    n.name = std::move(name);
    n.axis = axis;
    e_.nodes.push_back(std::move(n));
    return int(e_.nodes.size()) - 1;
  }

  int parse_term() {
    int lhs = parse_factor();
    for (;;) {
      if (c_.is_sym("*")) {
        c_.next();
        lhs = node(IOp::Mul, lhs, parse_factor());
      } else if (c_.is_sym("/")) {
        c_.next();
        lhs = node(IOp::Div, lhs, parse_factor());
      } else {
        return lhs;
      }
    }
  }

  int parse_factor() {
    if (c_.is_sym("-")) {
      c_.next();
      return node(IOp::Neg, parse_factor());
    }
    return parse_primary();
  }

  int parse_primary() {
    const Tok& t = c_.peek();
    if (t.kind == Tok::Number) return node(IOp::Num, -1, -1, c_.next().num);
    if (t.kind == Tok::Sym && t.text == "(") {
      c_.next();
      int e = parse_expr();
      c_.expect_sym(")");
      return e;
    }
    if (t.kind != Tok::Ident) fail(t, "expected expression");
    Tok id = c_.next();
    if (id.text == "x" || id.text == "y" || id.text == "z")
      return node(IOp::Coord, -1, -1, 0.0, {}, id.text[0] - 'x');
    if (id.text == "sin" || id.text == "cos" || id.text == "exp") {
      c_.expect_sym("(");
      int a = parse_expr();
      c_.expect_sym(")");
      IOp op = id.text == "sin" ? IOp::Sin : id.text == "cos" ? IOp::Cos : IOp::Exp;
      return node(op, a);
    }
    if (id.text == "pi") return node(IOp::Num, -1, -1, 3.14159265358979323846, "pi");
    for (const ConstSpec& cs : p_.constants)
      if (cs.name == id.text) return node(IOp::Num, -1, -1, cs.value, cs.name);
    if (p_.field_index(id.text) >= 0)
      fail(id, "init expressions are functions of coordinates only; '" + id.text +
                   "' is a field");
    fail(id, "unknown identifier '" + id.text + "'");
  }

  Cursor& c_;
  const Problem& p_;
  InitExpr& e_;
};

}  // namespace

Problem parse_problem(const std::string& text) {
  Problem p;
  bool haveMesh = false, haveTime = false, haveNumerics = false;
  std::vector<StashedLine> eqLines, initLines, bcLines;

  // Pass 1: declarations; equation/init/bc lines are stashed so they may
  // reference declarations made further down.
  int lineNo = 0;
  size_t start = 0;
  while (start <= text.size()) {
    size_t nl = text.find('\n', start);
    std::string line = text.substr(start, nl == std::string::npos ? nl : nl - start);
    start = nl == std::string::npos ? text.size() + 1 : nl + 1;
    ++lineNo;
    std::vector<Tok> toks = lex_line(line, lineNo);
    if (toks.front().kind == Tok::End) continue;
    Cursor c{&toks, 0};
    Tok kw = c.next();
    if (kw.kind != Tok::Ident) fail(kw, "expected a statement keyword");

    if (kw.text == "mesh") {
      if (haveMesh) fail(kw, "duplicate mesh statement");
      haveMesh = true;
      if (c.peek().kind != Tok::Number) fail(c.peek(), "expected mesh rank (1d/2d/3d)");
      int d = int(c.next().num);
      std::string suffix = c.expect_ident("'d'");
      if (suffix != "d" || d < 1 || d > 3) fail(kw, "mesh rank must be 1d, 2d or 3d");
      p.mesh.dims = d;
      std::set<std::string> allowed = {"nx", "lx"};
      if (d >= 2) {
        allowed.insert("ny");
        allowed.insert("ly");
      }
      if (d >= 3) {
        allowed.insert("nz");
        allowed.insert("lz");
      }
      auto attrs = parse_attrs(c, allowed);
      const char* nk[3] = {"nx", "ny", "nz"};
      const char* lk[3] = {"lx", "ly", "lz"};
      for (int a = 0; a < d; ++a) {
        if (!attrs.count(nk[a])) fail(kw, std::string("mesh is missing ") + nk[a]);
        if (!attrs.count(lk[a])) fail(kw, std::string("mesh is missing ") + lk[a]);
        double nv = attrs[nk[a]];
        if (nv < 3 || nv != int64_t(nv)) fail(kw, std::string(nk[a]) + " must be an integer >= 3");
        if (attrs[lk[a]] <= 0) fail(kw, std::string(lk[a]) + " must be > 0");
        p.mesh.n[a] = int64_t(nv);
        p.mesh.len[a] = attrs[lk[a]];
      }
    } else if (kw.text == "field") {
      Tok name = c.peek();
      std::string fname = c.expect_ident("field name");
      if (kReserved.count(fname)) fail(name, "'" + fname + "' is a reserved word");
      if (p.field_index(fname) >= 0) fail(name, "duplicate field '" + fname + "'");
      Tok shape = c.peek();
      std::string sh = c.expect_ident("scalar|vector<k>");
      int comps = 0;
      if (sh == "scalar") {
        comps = 1;
      } else if (sh == "vector") {
        if (c.peek().kind != Tok::Number) fail(c.peek(), "expected component count");
        comps = int(c.next().num);
      } else if (sh.rfind("vector", 0) == 0) {
        comps = atoi(sh.c_str() + 6);
      }
      if (comps < 1) fail(shape, "field shape must be scalar or vector<k> with k >= 1");
      c.expect_end();
      p.fields.push_back({fname, comps, lineNo});
    } else if (kw.text == "const") {
      Tok name = c.peek();
      std::string cname = c.expect_ident("constant name");
      if (kReserved.count(cname)) fail(name, "'" + cname + "' is a reserved word");
      for (const ConstSpec& cs : p.constants)
        if (cs.name == cname) fail(name, "duplicate constant '" + cname + "'");
      c.expect_sym("=");
      double v = c.expect_number("constant value");
      c.expect_end();
      p.constants.push_back({cname, v, lineNo});
    } else if (kw.text == "time") {
      if (haveTime) fail(kw, "duplicate time statement");
      haveTime = true;
      auto attrs = parse_attrs(c, {"dt", "steps"});
      if (!attrs.count("dt") || !attrs.count("steps")) fail(kw, "time requires dt= and steps=");
      if (attrs["dt"] <= 0) fail(kw, "dt must be > 0");
      double st = attrs["steps"];
      if (st < 1 || st != int64_t(st)) fail(kw, "steps must be an integer >= 1");
      p.dt = attrs["dt"];
      p.niter = int64_t(st);
    } else if (kw.text == "numerics") {
      if (haveNumerics) fail(kw, "duplicate numerics statement");
      haveNumerics = true;
      auto attrs = parse_attrs(c, {"acc"});
      if (!attrs.count("acc")) fail(kw, "numerics requires acc=");
      double a = attrs["acc"];
      if (a != 2 && a != 4 && a != 6 && a != 8)
        fail(kw, "acc must be one of 2, 4, 6, 8");
      p.acc = int(a);
    } else if (kw.text == "eq" || kw.text == "init" || kw.text == "bc") {
      StashedLine sl;
      sl.toks = std::move(toks);
      (kw.text == "eq" ? eqLines : kw.text == "init" ? initLines : bcLines)
          .push_back(std::move(sl));
    } else {
      fail(kw, "unknown statement '" + kw.text + "'");
    }
  }

  if (!haveMesh) fail(1, 1, "missing mesh statement");
  if (!haveTime) fail(1, 1, "missing time statement");
  p.ics.resize(p.fields.size());
  p.bcs.resize(p.fields.size());

  // Pass 2: equations, ICs, BCs against the complete symbol table.
  for (StashedLine& sl : eqLines) {
    Cursor c{&sl.toks, 1};
    Equation eq;
    eq.line = sl.toks[0].line;
    Tok head = c.peek();
    std::string first = c.expect_ident("equation left-hand side");
    if (first == "dt") {
      c.expect_sym("(");
      Tok inner = c.peek();
      std::string fname = c.expect_ident("field name");
      if (fname == "dt") fail(inner, "second time derivative is not supported");
      eq.kind = EqKind::TimeDerivative;
      eq.lhsField = p.field_index(fname);
      if (eq.lhsField < 0) fail(inner, "unknown identifier '" + fname + "'");
      c.expect_sym(")");
    } else {
      eq.kind = EqKind::Algebraic;
      eq.lhsField = p.field_index(first);
      if (eq.lhsField < 0) fail(head, "unknown identifier '" + first + "'");
    }
    c.expect_sym("=");
    ExprParser ep(c, p, eq.rhs);
    eq.rhs.root = ep.parse_expr();
    c.expect_end();
    for (const Equation& prev : p.equations)
      if (prev.lhsField == eq.lhsField)
        fail(head, "duplicate left-hand side '" + p.fields[size_t(eq.lhsField)].name + "'");
    p.equations.push_back(std::move(eq));
  }
  if (p.equations.empty()) fail(lineNo, 1, "no equations");

  for (StashedLine& sl : initLines) {
    Cursor c{&sl.toks, 1};
    Tok name = c.peek();
    std::string fname = c.expect_ident("field name");
    int fid = p.field_index(fname);
    if (fid < 0) fail(name, "unknown identifier '" + fname + "'");
    if (!p.ics[size_t(fid)].empty()) fail(name, "duplicate init for '" + fname + "'");
    c.expect_sym("=");
    InitExpr e;
    InitParser ip(c, p, e);
    e.root = ip.parse_expr();
    c.expect_end();
    p.ics[size_t(fid)] = std::move(e);
  }

  for (StashedLine& sl : bcLines) {
    Cursor c{&sl.toks, 1};
    Tok name = c.peek();
    std::string fname = c.expect_ident("field name");
    int fid = p.field_index(fname);
    if (fid < 0) fail(name, "unknown identifier '" + fname + "'");
    Tok kindTok = c.peek();
    std::string kind = c.expect_ident("dirichlet|neumann|periodic");
    BcRule rule;
    rule.set = true;
    rule.line = sl.toks[0].line;
    if (kind == "dirichlet") {
      rule.kind = BcKind::Dirichlet;
      Tok vk = c.peek();
      if (c.expect_ident("value=") != "value") fail(vk, "dirichlet requires value=<real>");
      c.expect_sym("=");
      rule.value = c.expect_number("boundary value");
    } else if (kind == "neumann") {
      rule.kind = BcKind::Neumann;
    } else if (kind == "periodic") {
      rule.kind = BcKind::Periodic;
    } else {
      fail(kindTok, "unknown boundary kind '" + kind + "'");
    }
    if (c.expect_ident("'on'") != "on") fail(kindTok, "expected 'on <face>'");
    Tok faceTok = c.peek();
    c.expect_ident("face");
    int face = face_id(faceTok);
    c.expect_end();
    auto apply = [&](int f) {
      if (f / 2 >= p.mesh.dims)
        fail(faceTok, "face '" + faceTok.text + "' is invalid for a " +
                          std::to_string(p.mesh.dims) + "d mesh");
      if (p.bcs[size_t(fid)][size_t(f)].set)
        fail(faceTok, "duplicate bc for '" + fname + "' on face " + std::to_string(f));
      p.bcs[size_t(fid)][size_t(f)] = rule;
    };
    if (face < 0) {
      for (int f = 0; f < 2 * p.mesh.dims; ++f) apply(f);
    } else {
      apply(face);
    }
  }

  // Resolve: dims inference + lhs/rhs shape agreement, with equation context.
  std::vector<int> comps = p.field_comps();
  for (Equation& eq : p.equations) {
    try {
      infer_dims(eq.rhs, p.mesh.dims, comps);
    } catch (const Error& e) {
      fail(eq.line, 1, e.what());
    }
    int want = comps[size_t(eq.lhsField)];
    int got = eq.rhs.at(eq.rhs.root).dims;
    if (want != got)
      fail(eq.line, 1,
           "equation for '" + p.fields[size_t(eq.lhsField)].name + "' has " +
               std::to_string(got) + "-component rhs but the field has " +
               std::to_string(want));
  }
  for (int a = 0; a < p.mesh.dims; ++a)
    if (p.mesh.n[a] <= p.acc)
      fail(1, 1, "mesh dimension " + std::string(1, char('x' + a)) +
                     " has too few points for acc=" + std::to_string(p.acc));
  return p;
}

}  // namespace fdfuse
