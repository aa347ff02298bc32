#include <cstdlib>
#include <filesystem>
#include <random>
#include <thread>

#include "dist/decompose.hpp"
#include "dist/halo.hpp"
#include "dist/transport.hpp"
#include "doctest.h"
#include "run/run.hpp"
#include "test_util.hpp"

using namespace fdfuse;
using fdfuse::test::ModeOpt;

namespace {

struct TempDir {
  std::string path;
  TempDir() {
    char tmpl[] = "/tmp/fdfuse-test.XXXXXX";
    path = mkdtemp(tmpl);
  }
  ~TempDir() { std::filesystem::remove_all(path); }
};

// Largest of {1,2,4,8} whose balanced grid keeps every local extent >= r.
bool ranks_feasible(const Problem& p, int64_t nranks) {
  RankGrid rg = decompose_ranks(p.mesh.dims, nranks);
  int r = p.acc / 2;
  for (int d = 0; d < p.mesh.dims; ++d)
    if (rg.nbg[d] > 1 && p.mesh.n[d] / rg.nbg[d] < r) return false;
  return true;
}

}  // namespace

TEST_CASE("balanced rank factorization") {
  RankGrid g8 = decompose_ranks(3, 8);
  CHECK(g8.nbg[0] == 2);
  CHECK(g8.nbg[1] == 2);
  CHECK(g8.nbg[2] == 2);
  RankGrid g2 = decompose_ranks(3, 2);
  CHECK(g2.nbg[0] == 1);
  CHECK(g2.nbg[1] == 1);
  CHECK(g2.nbg[2] == 2);  // largest factor outermost
  RankGrid g12 = decompose_ranks(3, 12);
  CHECK(g12.nbg[0] == 2);
  CHECK(g12.nbg[1] == 2);
  CHECK(g12.nbg[2] == 3);
  RankGrid g1 = decompose_ranks(3, 1);
  CHECK(g1.nranks() == 1);

  RankGrid f4 = decompose_ranks(2, 4);
  CHECK(f4.nbg[0] == 2);
  CHECK(f4.nbg[1] == 2);
  CHECK(f4.nbg[2] == 1);  // absent dim stays 1
  RankGrid f6 = decompose_ranks(2, 6);
  CHECK(f6.nbg[0] == 2);
  CHECK(f6.nbg[1] == 3);

  RankGrid o5 = decompose_ranks(1, 5);
  CHECK(o5.nbg[0] == 5);
  CHECK(o5.nbg[1] == 1);
  CHECK(o5.nbg[2] == 1);
}

TEST_CASE("manual rank grids parse and validate") {
  RankGrid g = parse_rank_grid("2x2x2", 3, 8);
  CHECK(g.nbg[0] == 2);
  CHECK(g.nbg[1] == 2);
  CHECK(g.nbg[2] == 2);
  RankGrid g2 = parse_rank_grid("1x4", 2, 4);
  CHECK(g2.nbg[1] == 4);
  CHECK(g2.nbg[2] == 1);
  RankGrid g3 = parse_rank_grid("4", 1, 4);
  CHECK(g3.nbg[0] == 4);

  CHECK_THROWS_AS(parse_rank_grid("2x2", 2, 8), Error);  // product mismatch
  CHECK_THROWS_AS(parse_rank_grid("0x4", 2, 4), Error);  // zero factor
  CHECK_THROWS_AS(parse_rank_grid("abc", 1, 1), Error);
  CHECK_THROWS_AS(parse_rank_grid("1x1x2", 2, 2), Error);  // cut beyond rank
  CHECK_THROWS_AS(parse_rank_grid("2x2x2x2", 3, 16), Error);
}

TEST_CASE("rank numbering round-trips") {
  RankGrid g;
  g.nbg[0] = 2;
  g.nbg[1] = 3;
  g.nbg[2] = 4;
  CHECK(rank_of(g, 0, 0, 0) == 0);
  CHECK(rank_of(g, 1, 0, 0) == 1);
  CHECK(rank_of(g, 0, 1, 0) == 2);
  CHECK(rank_of(g, 0, 0, 1) == 6);
  for (int64_t r = 0; r < g.nranks(); ++r) {
    int64_t c[3];
    rank_coords(g, r, c);
    CHECK(rank_of(g, c[0], c[1], c[2]) == r);
  }
}

TEST_CASE("split_extent spreads the remainder over the leading parts") {
  int64_t off, len;
  split_extent(7, 2, 0, off, len);
  CHECK(off == 0);
  CHECK(len == 4);
  split_extent(7, 2, 1, off, len);
  CHECK(off == 4);
  CHECK(len == 3);

  // any split covers exactly [0, n)
  for (int64_t n : {1ll, 13ll, 64ll, 301ll})
    for (int64_t parts : {1ll, 2ll, 3ll, 7ll}) {
      if (parts > n) continue;
      int64_t expect = 0;
      for (int64_t part = 0; part < parts; ++part) {
        split_extent(n, parts, part, off, len);
        CHECK(off == expect);
        CHECK(len >= n / parts);
        CHECK(len <= n / parts + 1);
        expect += len;
      }
      CHECK(expect == n);
    }
}

TEST_CASE("face frame sizing matches the documented example") {
  int64_t n[3] = {16, 16, 16};
  double h[3] = {1.0 / 16, 1.0 / 16, 1.0 / 16};
  GridGeom g = make_geom(3, n, h, 8, 64, 8);  // r = 4
  FaceWindow w = full_face_window(g);
  // 16 x 16 interior window, 4 layers deep: 1024 doubles per scalar face
  CHECK(face_doubles(g, 1, 0, w) == 1024);
  CHECK(face_doubles(g, 1, 3, w) == 1024);
  CHECK(face_doubles(g, 2, 4, w) == 2048);  // two components double it
}

TEST_CASE("gather/scatter round-trips a face") {
  Problem p = test::make(
      "mesh 2d nx=8 lx=1 ny=8 ly=1\nfield u scalar\ntime dt=1e-6 steps=1\n"
      "numerics acc=4\neq dt(u) = lapla(u)\ninit u = x + y\n"
      "bc u periodic on all\n");
  GridGeom g = make_geom(p.mesh, p.acc, 64, 8);
  GridStore gs(g, p);
  double* u = gs.fields[0].plane[0];
  for (int64_t j = 0; j < 8; ++j)
    for (int64_t i = 0; i < 8; ++i) u[g.idx(i, j, 0)] = double(10 * j + i);

  // sender gathers its xmax frontier; receiver scatters into its xmin ghosts
  FaceWindow w = full_face_window(g);
  std::vector<double> frame;
  gather_face(g, u, 1, 1, w, frame);
  CHECK(int64_t(frame.size()) == face_doubles(g, 1, 1, w));

  GridStore peer(g, p);
  double* v = peer.fields[0].plane[0];
  int64_t used = scatter_face(g, v, 1, 0, w, frame.data());
  CHECK(used == int64_t(frame.size()));
  // ghost column -k holds the sender's interior column n-k
  for (int64_t j = 0; j < 8; ++j)
    for (int64_t k = 1; k <= g.r; ++k)
      CHECK(v[g.idx(-k, j, 0)] == u[g.idx(8 - k, j, 0)]);
}

TEST_CASE("exchange field lists are peer-symmetric filters") {
  Problem p = test::make(
      "mesh 1d nx=32 lx=1.0\nfield a scalar\nfield b scalar\nfield s scalar\n"
      "time dt=1e-6 steps=2\nnumerics acc=2\n"
      "eq dt(a) = lapla(a) + derx(s)\neq b = derx(a)\n"
      "init a = sin(2 * pi * x)\ninit s = cos(2 * pi * x)\n"
      "bc a periodic on all\nbc s dirichlet value=0 on all\n");
  // per-step frames: defined by an equation AND stencil-read; s is static
  std::vector<int> step = exchange_fields(p, 0, false);
  REQUIRE(step.size() == 1);
  CHECK(step[0] == p.field_index("a"));
  // wrap frames additionally require periodicity on the axis
  std::vector<int> wrap = exchange_fields(p, 0, true);
  REQUIRE(wrap.size() == 1);
  CHECK(wrap[0] == p.field_index("a"));
  // t=0 seeding covers every stencil-read field, static inputs included
  std::vector<int> init = init_exchange_fields(p, 0, false);
  REQUIRE(init.size() == 2);
  CHECK(init[0] == p.field_index("a"));
  CHECK(init[1] == p.field_index("s"));
  // ...but the wrap filter drops the dirichlet-bounded static field
  std::vector<int> initWrap = init_exchange_fields(p, 0, true);
  REQUIRE(initWrap.size() == 1);
  CHECK(initWrap[0] == p.field_index("a"));
}

TEST_CASE("inproc transport: loopback, fifo, byte accounting") {
  InprocHub hub(2);
  std::unique_ptr<Transport> t0 = hub.endpoint(0);
  std::unique_ptr<Transport> t1 = hub.endpoint(1);
  CHECK(t0->rank() == 0);
  CHECK(t0->nranks() == 2);

  Message m;
  m.kind = kMsgHalo;
  m.fieldId = 7;
  m.face = 3;
  m.group = 2;
  m.step = 41;
  m.payload.resize(1024);
  for (size_t i = 0; i < m.payload.size(); ++i) m.payload[i] = double(i) * 0.5;
  t0->send(1, m);

  Message got;
  REQUIRE(t1->recv(got, 5000));
  CHECK(got.src == 0);
  CHECK(got.kind == kMsgHalo);
  CHECK(got.fieldId == 7);
  CHECK(got.face == 3);
  CHECK(got.group == 2);
  CHECK(got.step == 41);
  REQUIRE(got.payload.size() == 1024);
  for (size_t i = 0; i < 1024; ++i) CHECK(got.payload[i] == double(i) * 0.5);
  CHECK(t0->bytes_sent() >= 1024 * 8);
  CHECK(t1->bytes_received() >= 1024 * 8);

  // per-source fifo
  for (int i = 0; i < 100; ++i) {
    Message s;
    s.kind = kMsgGather;
    s.step = i;
    s.payload = {double(i)};
    t0->send(1, s);
  }
  for (int i = 0; i < 100; ++i) {
    Message r;
    REQUIRE(t1->recv(r, 5000));
    CHECK(r.step == i);
    CHECK(r.payload[0] == double(i));
  }
  Message none;
  CHECK_FALSE(t1->try_recv(none));
}

TEST_CASE("socket transport matches the same contract") {
  TempDir dir;
  std::unique_ptr<Transport> t0, t1;
  std::thread other([&] { t1 = make_socket_transport(1, 2, dir.path); });
  t0 = make_socket_transport(0, 2, dir.path);
  other.join();
  REQUIRE(t0);
  REQUIRE(t1);

  Message m;
  m.kind = kMsgInit;
  m.fieldId = 3;
  m.step = -1;
  m.payload = {1.5, -2.25, 3.75};
  t1->send(0, m);
  Message got;
  REQUIRE(t0->recv(got, 10000));
  CHECK(got.src == 1);
  CHECK(got.kind == kMsgInit);
  CHECK(got.fieldId == 3);
  REQUIRE(got.payload.size() == 3);
  CHECK(got.payload[0] == 1.5);
  CHECK(got.payload[1] == -2.25);
  CHECK(got.payload[2] == 3.75);

  for (int i = 0; i < 100; ++i) {
    Message s;
    s.kind = kMsgHalo;
    s.step = i;
    s.payload = {double(i), double(2 * i)};
    t0->send(1, s);
  }
  for (int i = 0; i < 100; ++i) {
    Message r;
    REQUIRE(t1->recv(r, 10000));
    CHECK(r.step == i);
    CHECK(r.payload[1] == double(2 * i));
  }
  CHECK(transport_name_valid("socket"));
  CHECK(transport_name_valid("inproc"));
  CHECK_FALSE(transport_name_valid("mpi"));
}

TEST_CASE("dist modes are bitwise rank-count invariant") {
  Problem heat = test::make(
      "mesh 3d nx=24 lx=1 ny=24 ly=1 nz=24 lz=1\nfield T scalar\nconst D = 0.05\n"
      "time dt=1e-6 steps=4\nnumerics acc=4\neq dt(T) = D * lapla(T)\n"
      "init T = sin(2 * pi * x) * cos(2 * pi * y) + sin(2 * pi * z)\n"
      "bc T periodic on all\n");
  RunResult seq = test::run_mode(heat, Mode::Seq);
  for (Mode m : {Mode::DistPure, Mode::DistForkJoin, Mode::DistTask})
    for (int64_t ranks : {1, 2, 4, 8}) {
      ModeOpt mo;
      mo.ranks = ranks;
      mo.threads = m == Mode::DistPure ? 1 : 2;
      RunResult r = test::run_mode(heat, m, mo);
      INFO("mode=", mode_name(m), " ranks=", ranks);
      CHECK(test::bitwise_equal(seq.finalFields, r.finalFields));
      CHECK(r.metrics.nRanks == ranks);
      if (ranks > 1) CHECK(r.metrics.bytesSent > 0);
    }
}

TEST_CASE("dist runs agree with seq on random systems") {
  std::mt19937 rng(8080);
  int done = 0;
  while (done < 10) {
    Problem p = test::random_problem(rng);
    if (!ranks_feasible(p, 4)) continue;
    RunResult seq = test::run_mode(p, Mode::Seq);
    for (Mode m : {Mode::DistPure, Mode::DistTask}) {
      ModeOpt mo;
      mo.ranks = 4;
      mo.threads = m == Mode::DistPure ? 1 : 2;
      mo.commBlocks = 1 + done % 3;
      RunResult r = test::run_mode(p, m, mo);
      INFO("case ", done, " mode=", mode_name(m), "\n", print_problem(p));
      CHECK(test::bitwise_equal(seq.finalFields, r.finalFields));
    }
    ++done;
  }
}

TEST_CASE("socket transport reproduces inproc results bitwise") {
  Problem p = test::make(
      "mesh 2d nx=20 lx=1 ny=20 ly=1\nfield phi scalar\n"
      "const cx = 0.7\nconst cy = 0.4\ntime dt=1e-4 steps=6\nnumerics acc=2\n"
      "eq dt(phi) = -cx * derx(phi) - cy * dery(phi)\n"
      "init phi = sin(2 * pi * x) * sin(2 * pi * y)\n"
      "bc phi periodic on all\n");
  ModeOpt inproc;
  inproc.ranks = 4;
  RunResult a = test::run_mode(p, Mode::DistPure, inproc);
  ModeOpt socket = inproc;
  socket.transport = "socket";
  RunResult b = test::run_mode(p, Mode::DistPure, socket);
  RunResult seq = test::run_mode(p, Mode::Seq);
  CHECK(test::bitwise_equal(a.finalFields, b.finalFields));
  CHECK(test::bitwise_equal(a.finalFields, seq.finalFields));
  CHECK(b.metrics.transport == "socket");
}

TEST_CASE("explicit rank grids override the balanced choice") {
  Problem p = test::make(
      "mesh 2d nx=16 lx=1 ny=16 ly=1\nfield u scalar\ntime dt=1e-5 steps=3\n"
      "numerics acc=2\neq dt(u) = lapla(u)\n"
      "init u = sin(2 * pi * x) + cos(2 * pi * y)\nbc u periodic on all\n");
  RunResult seq = test::run_mode(p, Mode::Seq);
  for (const char* grid : {"4x1", "1x4", "2x2"}) {
    ModeOpt mo;
    mo.ranks = 4;
    mo.rankGrid = grid;
    RunResult r = test::run_mode(p, Mode::DistPure, mo);
    INFO("grid=", grid);
    CHECK(test::bitwise_equal(seq.finalFields, r.finalFields));
  }
  // malformed or mismatched grids are config errors
  ModeOpt bad;
  bad.ranks = 4;
  bad.rankGrid = "3x1";
  CHECK_THROWS_AS(test::run_mode(p, Mode::DistPure, bad), Error);
}

TEST_CASE("rank pieces smaller than the stencil radius are rejected") {
  Problem p = test::make(
      "mesh 1d nx=16 lx=1.0\nfield u scalar\ntime dt=1e-6 steps=2\n"
      "numerics acc=8\neq dt(u) = lapla(u)\ninit u = sin(2 * pi * x)\n"
      "bc u periodic on all\n");
  ModeOpt mo;
  mo.ranks = 8;  // 2 cells per rank < r=4
  try {
    test::run_mode(p, Mode::DistPure, mo);
    FAIL("expected a config error");
  } catch (const Error& e) {
    CHECK(e.code() == Errc::Config);
  }
}
