#include <cmath>

#include "doctest.h"
#include "eqtree/reference.hpp"
#include "eqtree/tree.hpp"
#include "run/sim.hpp"
#include "test_util.hpp"

using namespace fdfuse;

TEST_CASE("dims inference over scalars and vectors") {
  // 2d mesh, fields: s scalar (id 0), v vector-2 (id 1)
  std::vector<int> comps = {1, 2};

  {
    Tree t;
    int g = t.grad(t.leaf_field(0));
    t.root = t.times(t.leaf_const(2.0), g);
    infer_dims(t, 2, comps);
    CHECK(t.at(t.root).dims == 2);  // const * grad(s) is a vector
  }
  {
    Tree t;
    t.root = t.div(t.leaf_field(1));
    infer_dims(t, 2, comps);
    CHECK(t.at(t.root).dims == 1);
  }
  {
    Tree t;
    t.root = t.lapla(t.leaf_field(1));
    infer_dims(t, 2, comps);
    CHECK(t.at(t.root).dims == 2);  // componentwise
  }
  {
    Tree t;
    t.root = t.der(0, 1, t.leaf_field(1));
    infer_dims(t, 2, comps);
    CHECK(t.at(t.root).dims == 2);
  }
  {  // vector + scalar is meaningless
    Tree t;
    t.root = t.add(t.leaf_field(1), t.leaf_field(0));
    CHECK_THROWS_AS(infer_dims(t, 2, comps), Error);
  }
  {  // grad of a vector is out of model
    Tree t;
    t.root = t.grad(t.leaf_field(1));
    CHECK_THROWS_AS(infer_dims(t, 2, comps), Error);
  }
  {  // div needs exactly mesh-rank components
    Tree t;
    t.root = t.div(t.leaf_field(0));
    CHECK_THROWS_AS(infer_dims(t, 2, comps), Error);
  }
  {  // vector * vector has no single meaning here
    Tree t;
    t.root = t.times(t.leaf_field(1), t.leaf_field(1));
    CHECK_THROWS_AS(infer_dims(t, 2, comps), Error);
  }
  {  // stencil operators take plain fields only
    Tree t;
    int c = t.leaf_const(1.0);
    CHECK_THROWS_AS(t.lapla(c), Error);
  }
}

TEST_CASE("constant folding in the builders") {
  Tree t;
  int s = t.add(t.leaf_const(1.5), t.leaf_const(0.5));
  CHECK(t.at(s).op == Op::Const);
  CHECK(t.at(s).value == 2.0);
  int m = t.times(t.leaf_const(3.0), t.leaf_const(-2.0));
  CHECK(t.at(m).value == -6.0);
}

TEST_CASE("structural hashing backs tree equality") {
  std::vector<int> comps = {1};
  Tree a;
  a.root = a.times(a.leaf_const(0.1, "D"), a.lapla(a.leaf_field(0)));
  Tree b;
  b.root = b.times(b.leaf_const(0.1, "k"), b.lapla(b.leaf_field(0)));
  Tree c;
  c.root = c.times(c.leaf_const(0.2, "D"), c.lapla(c.leaf_field(0)));
  infer_dims(a, 1, comps);
  infer_dims(b, 1, comps);
  infer_dims(c, 1, comps);

  CHECK(tree_equal(a, a.root, b, b.root));  // display name is not structure
  CHECK(a.at(a.root).hash == b.at(b.root).hash);
  CHECK_FALSE(tree_equal(a, a.root, c, c.root));
  CHECK(a.at(a.root).hash != c.at(c.root).hash);

  // operand order matters
  Tree d;
  d.root = d.sub(d.leaf_field(0), d.leaf_const(1.0));
  Tree e;
  e.root = e.sub(e.leaf_const(1.0), e.leaf_field(0));
  infer_dims(d, 1, comps);
  infer_dims(e, 1, comps);
  CHECK_FALSE(tree_equal(d, d.root, e, e.root));
  CHECK(d.at(d.root).hash != e.at(e.root).hash);

  // derivative order and axis are structure
  Tree f1;
  f1.root = f1.der(0, 1, f1.leaf_field(0));
  Tree f2;
  f2.root = f2.der(0, 2, f2.leaf_field(0));
  infer_dims(f1, 2, comps);
  infer_dims(f2, 2, comps);
  CHECK(f1.at(f1.root).hash != f2.at(f2.root).hash);
  Tree f3;
  f3.root = f3.der(1, 1, f3.leaf_field(0));
  infer_dims(f3, 2, comps);
  CHECK(f1.at(f1.root).hash != f3.at(f3.root).hash);
}

TEST_CASE("tree evaluation: second derivative of x^2 is exactly 2") {
  // h = 1/64 keeps every coordinate, square and stencil weight a dyadic
  // rational, so the tree walk must land on 2.0 bitwise.
  Problem p = test::make(
      "mesh 1d nx=64 lx=1.0\nfield u scalar\ntime dt=1e-6 steps=1\n"
      "numerics acc=2\neq dt(u) = lapla(u)\ninit u = x * x\n"
      "bc u neumann on all\n");
  SimConfig cfg;
  int64_t localN[3] = {64, 1, 1};
  int64_t off[3] = {0, 0, 0};
  Sim sim(p, cfg, localN, off);
  sim.init();

  Tree t;
  t.root = t.lapla(t.leaf_field(0));
  infer_dims(t, 1, {1});

  EvalPlanes pl;
  pl.point.push_back(sim.gs->fields[0].plane[0]);
  pl.sten.push_back(sim.gs->fields[0].plane[0]);

  for (int64_t i = 1; i < 63; ++i) {
    double got = tree_eval_point(p, t, t.root, 0, sim.geom, sim.st, pl,
                                 sim.geom.idx(i, 0, 0));
    CHECK(got == 2.0);
  }

  // a constant field has zero laplacian, including at the neumann edges
  Problem pc = test::make(
      "mesh 1d nx=64 lx=1.0\nfield u scalar\ntime dt=1e-6 steps=1\n"
      "numerics acc=2\neq dt(u) = lapla(u)\ninit u = 3\n"
      "bc u neumann on all\n");
  Sim simc(pc, cfg, localN, off);
  simc.init();
  EvalPlanes plc;
  plc.point.push_back(simc.gs->fields[0].plane[0]);
  plc.sten.push_back(simc.gs->fields[0].plane[0]);
  for (int64_t i = 0; i < 64; ++i)
    CHECK(tree_eval_point(pc, t, t.root, 0, simc.geom, simc.st, plc,
                          simc.geom.idx(i, 0, 0)) == 0.0);
}

TEST_CASE("reference step is forward euler") {
  // one step of dt(u) = lapla(u) on u = x^2: u' = u + dt * 2 exactly
  // (dt = 2^-20 keeps the product dyadic)
  Problem p = test::make(
      "mesh 1d nx=64 lx=1.0\nfield u scalar\ntime dt=9.5367431640625e-07 steps=1\n"
      "numerics acc=2\neq dt(u) = lapla(u)\ninit u = x * x\n"
      "bc u neumann on all\n");
  SimConfig cfg;
  int64_t localN[3] = {64, 1, 1};
  int64_t off[3] = {0, 0, 0};
  Sim sim(p, cfg, localN, off);
  sim.init();
  reference_step(*sim.gs, p, sim.st, 0);

  const double* before = sim.gs->fields[0].plane[0];
  const double* after = sim.gs->fields[0].plane[1];
  double dt = 9.5367431640625e-07;
  for (int64_t i = 1; i < 63; ++i) {
    int64_t cell = sim.geom.idx(i, 0, 0);
    CHECK(after[cell] == before[cell] + dt * 2.0);
  }
}

TEST_CASE("reachable_count ignores dead nodes") {
  Tree t;
  t.leaf_const(42.0);  // orphan
  t.root = t.add(t.leaf_field(0), t.leaf_field(0));
  CHECK(t.reachable_count() == 3);  // two distinct leaves + add
  Tree empty;
  CHECK(empty.reachable_count() == 0);
}
