#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace fdfuse {

// Equation-tree IR. Leaves are Field/Const; stencil vertices (Der/Grad/Div/
// Lapla) take a single Field child, which is how the halo radius stays fixed
// at acc/2 for every program.
enum class Op : uint8_t { Field, Const, Add, Sub, Times, Der, Grad, Div, Lapla };

struct TreeNode {
  Op op;
  int a = -1, b = -1;      // child slots (b used by Add/Sub/Times only)
  int fieldId = -1;        // Field leaves
  double value = 0.0;      // Const leaves
  std::string constName;   // display-only origin name ("" when folded/literal)
  int axis = -1;           // Der: 0/1/2
  int derivOrder = 0;      // Der: 1 or 2
  int dims = 0;            // components of the vertex value; set by infer_dims
  uint64_t hash = 0;       // structural hash; set by infer_dims
};

struct Tree {
  std::vector<TreeNode> nodes;
  int root = -1;

  int leaf_field(int fieldId);
  int leaf_const(double value, std::string name = {});
  int add(int a, int b);
  int sub(int a, int b);
  int times(int a, int b);
  int der(int axis, int order, int fieldChild);
  int grad(int fieldChild);
  int div(int fieldChild);
  int lapla(int fieldChild);

  const TreeNode& at(int i) const { return nodes[size_t(i)]; }
  TreeNode& at(int i) { return nodes[size_t(i)]; }
  int reachable_count() const;  // nodes reachable from root (folding may orphan)
};

// Fills dims and structural hash for every vertex reachable from the root.
// Throws Error(Validate) on dimension mismatches (Add(scalar, vector), Div of
// a scalar, axis beyond the mesh, ...). Deterministic and idempotent.
void infer_dims(Tree& t, int meshDims, const std::vector<int>& fieldComps);

// Structural equality on values and shape; const display names are ignored.
bool tree_equal(const Tree& ta, int ra, const Tree& tb, int rb);

// Indented one-vertex-per-line debug dump: op, dims, hash.
std::string dump_tree(const Tree& t, const std::vector<std::string>& fieldNames);

}  // namespace fdfuse
