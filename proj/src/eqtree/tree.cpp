#include "eqtree/tree.hpp"

#include <bit>
#include <sstream>

#include "support.hpp"

namespace fdfuse {

int Tree::leaf_field(int fieldId) {
  TreeNode n;
  n.op = Op::Field;
  n.fieldId = fieldId;
  nodes.push_back(std::move(n));
  return int(nodes.size()) - 1;
}

int Tree::leaf_const(double value, std::string name) {
  TreeNode n;
  n.op = Op::Const;
  n.value = value;
  n.constName = std::move(name);
  nodes.push_back(std::move(n));
  return int(nodes.size()) - 1;
}

static bool both_const(const Tree& t, int a, int b) {
  return t.at(a).op == Op::Const && t.at(b).op == Op::Const;
}

int Tree::add(int a, int b) {
  if (both_const(*this, a, b)) return leaf_const(at(a).value + at(b).value);
  TreeNode n;
  n.op = Op::Add;
  n.a = a;
  n.b = b;
  nodes.push_back(std::move(n));
  return int(nodes.size()) - 1;
}

int Tree::sub(int a, int b) {
  if (both_const(*this, a, b)) return leaf_const(at(a).value - at(b).value);
  TreeNode n;
  n.op = Op::Sub;
  n.a = a;
  n.b = b;
  nodes.push_back(std::move(n));
  return int(nodes.size()) - 1;
}

int Tree::times(int a, int b) {
  if (both_const(*this, a, b)) return leaf_const(at(a).value * at(b).value);
  TreeNode n;
  n.op = Op::Times;
  n.a = a;
  n.b = b;
  nodes.push_back(std::move(n));
  return int(nodes.size()) - 1;
}

static int stencil_node(Tree& t, Op op, int child, int axis = -1, int order = 0) {
  if (t.at(child).op != Op::Field)
    throw Error(Errc::Parse, "stencil operator requires a field argument");
  TreeNode n;
  n.op = op;
  n.a = child;
  n.axis = axis;
  n.derivOrder = order;
  t.nodes.push_back(std::move(n));
  return int(t.nodes.size()) - 1;
}

int Tree::der(int axis, int order, int c) { return stencil_node(*this, Op::Der, c, axis, order); }
int Tree::grad(int c) { return stencil_node(*this, Op::Grad, c); }
int Tree::div(int c) { return stencil_node(*this, Op::Div, c); }
int Tree::lapla(int c) { return stencil_node(*this, Op::Lapla, c); }

static void mark(const Tree& t, int i, std::vector<char>& seen) {
  if (i < 0 || seen[size_t(i)]) return;
  seen[size_t(i)] = 1;
  mark(t, t.at(i).a, seen);
  mark(t, t.at(i).b, seen);
}

int Tree::reachable_count() const {
  if (root < 0) return 0;
  std::vector<char> seen(nodes.size(), 0);
  mark(*this, root, seen);
  int n = 0;
  for (char c : seen) n += c;
  return n;
}

static uint64_t mix(uint64_t h, uint64_t v) {
  h ^= v + 0x9e3779b97f4a7c15ull + (h << 6) + (h >> 2);
  return h * 0x100000001b3ull;
}

static void infer_node(Tree& t, int i, int meshDims, const std::vector<int>& comps) {
  TreeNode& n = t.at(i);
  switch (n.op) {
    case Op::Field:
      n.dims = comps[size_t(n.fieldId)];
      n.hash = mix(1, uint64_t(n.fieldId));
      return;
    case Op::Const:
      n.dims = 1;
      n.hash = mix(2, std::bit_cast<uint64_t>(n.value));
      return;
    case Op::Add:
    case Op::Sub: {
      infer_node(t, n.a, meshDims, comps);
      infer_node(t, n.b, meshDims, comps);
      int da = t.at(n.a).dims, db = t.at(n.b).dims;
      if (da != db)
        throw Error(Errc::Validate, std::string(n.op == Op::Add ? "add" : "sub") +
                                        ": operand dimensions differ (" + std::to_string(da) +
                                        " vs " + std::to_string(db) + ")");
      TreeNode& m = t.at(i);
      m.dims = da;
      m.hash = mix(mix(n.op == Op::Add ? 3 : 4, t.at(m.a).hash), t.at(m.b).hash);
      return;
    }
    case Op::Times: {
      infer_node(t, n.a, meshDims, comps);
      infer_node(t, n.b, meshDims, comps);
      int da = t.at(n.a).dims, db = t.at(n.b).dims;
      if (da != 1 && db != 1)
        throw Error(Errc::Validate, "times: at least one operand must be scalar");
      TreeNode& m = t.at(i);
      m.dims = da == 1 ? db : da;
      m.hash = mix(mix(5, t.at(m.a).hash), t.at(m.b).hash);
      return;
    }
    case Op::Der: {
      infer_node(t, n.a, meshDims, comps);
      if (n.axis >= meshDims)
        throw Error(Errc::Validate, "derivative axis " + std::string(1, char('x' + n.axis)) +
                                        " invalid for a " + std::to_string(meshDims) + "d mesh");
      TreeNode& m = t.at(i);
      m.dims = t.at(m.a).dims;
      m.hash = mix(mix(mix(6, uint64_t(m.axis)), uint64_t(m.derivOrder)), t.at(m.a).hash);
      return;
    }
    case Op::Grad: {
      infer_node(t, n.a, meshDims, comps);
      if (t.at(n.a).dims != 1) throw Error(Errc::Validate, "grad requires a scalar field");
      TreeNode& m = t.at(i);
      m.dims = meshDims;
      m.hash = mix(7, t.at(m.a).hash);
      return;
    }
    case Op::Div: {
      infer_node(t, n.a, meshDims, comps);
      if (t.at(n.a).dims != meshDims)
        throw Error(Errc::Validate, "div requires a vector field of " +
                                        std::to_string(meshDims) + " components");
      TreeNode& m = t.at(i);
      m.dims = 1;
      m.hash = mix(8, t.at(m.a).hash);
      return;
    }
    case Op::Lapla: {
      infer_node(t, n.a, meshDims, comps);
      TreeNode& m = t.at(i);
      m.dims = t.at(m.a).dims;
      m.hash = mix(9, t.at(m.a).hash);
      return;
    }
  }
}

void infer_dims(Tree& t, int meshDims, const std::vector<int>& fieldComps) {
  if (t.root < 0) throw Error(Errc::Internal, "infer_dims on empty tree");
  infer_node(t, t.root, meshDims, fieldComps);
}

bool tree_equal(const Tree& ta, int ra, const Tree& tb, int rb) {
  if ((ra < 0) != (rb < 0)) return false;
  if (ra < 0) return true;
  const TreeNode& a = ta.at(ra);
  const TreeNode& b = tb.at(rb);
  if (a.op != b.op || a.fieldId != b.fieldId || a.axis != b.axis ||
      a.derivOrder != b.derivOrder)
    return false;
  if (a.op == Op::Const &&
      std::bit_cast<uint64_t>(a.value) != std::bit_cast<uint64_t>(b.value))
    return false;
  return tree_equal(ta, a.a, tb, b.a) && tree_equal(ta, a.b, tb, b.b);
}

static const char* op_name(Op op) {
  switch (op) {
    case Op::Field: return "field";
    case Op::Const: return "const";
    case Op::Add: return "add";
    case Op::Sub: return "sub";
    case Op::Times: return "times";
    case Op::Der: return "der";
    case Op::Grad: return "grad";
    case Op::Div: return "div";
    case Op::Lapla: return "lapla";
  }
  return "?";
}

static void dump_node(const Tree& t, int i, int depth,
                      const std::vector<std::string>& names, std::ostringstream& out) {
  const TreeNode& n = t.at(i);
  for (int d = 0; d < depth; ++d) out << "  ";
  out << op_name(n.op);
  if (n.op == Op::Field) out << " " << names[size_t(n.fieldId)];
  if (n.op == Op::Const) {
    out << " " << (n.constName.empty() ? fmt_real(n.value) : n.constName) << "="
        << fmt_real(n.value);
  }
  if (n.op == Op::Der) out << " axis=" << char('x' + n.axis) << " order=" << n.derivOrder;
  out << " dims=" << n.dims << " hash=" << std::hex << n.hash << std::dec << "\n";
  if (n.a >= 0) dump_node(t, n.a, depth + 1, names, out);
  if (n.b >= 0) dump_node(t, n.b, depth + 1, names, out);
}

std::string dump_tree(const Tree& t, const std::vector<std::string>& fieldNames) {
  std::ostringstream out;
  if (t.root >= 0) dump_node(t, t.root, 0, fieldNames, out);
  return out.str();
}

}  // namespace fdfuse
