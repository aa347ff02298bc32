#pragma once

// Shared helpers for the test binaries: spec parsing with validation,
// single-call mode runs, bitwise dump comparison, and a random-problem
// generator that only emits specs the validator accepts.

#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "frontend/problem.hpp"
#include "run/dump.hpp"
#include "run/run.hpp"

namespace fdfuse::test {

inline Problem make(const std::string& text) {
  Problem p = parse_problem(text);
  ValidationReport rep = validate_problem(p);
  if (!rep.ok()) throw Error(Errc::Validate, "test spec invalid:\n" + rep.to_text());
  return p;
}

struct ModeOpt {
  int threads = 1;
  int64_t ranks = 1;
  std::string rankGrid;
  std::string transport = "inproc";
  int64_t commBlocks = 4;
  int64_t steps = -1;  // <0: spec's niter
  bool trace = false;
};

inline RunResult run_mode(const Problem& p, Mode mode, const ModeOpt& mo = {}) {
  RunOptions opt;
  opt.mode = mode;
  opt.cfg.nThreads = mo.threads;
  opt.cfg.stepsOverride = mo.steps;
  opt.cfg.commBlocks = mo.commBlocks;
  opt.cfg.trace = mo.trace;
  opt.nRanks = mo.ranks;
  opt.rankGrid = mo.rankGrid;
  opt.transport = mo.transport;
  return run_problem(p, opt);
}

inline bool bitwise_equal(const std::vector<FieldDump>& a,
                          const std::vector<FieldDump>& b) {
  return compare_dumps(a, b, 0.0).pass;
}

// --- random valid problems -------------------------------------------------

// Sized so dist runs with up to 8 ranks keep local extents >= the radius.
inline std::string random_spec(std::mt19937& rng) {
  auto pick = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  auto real = [&](double lo, double hi) {
    return std::uniform_real_distribution<double>(lo, hi)(rng);
  };

  int dims = pick(1, 3);
  int acc = 2 * pick(1, 2);              // 2 or 4 keeps tiny meshes legal
  if (dims == 1 && pick(0, 1)) acc = 2 * pick(1, 4);  // wide stencils in 1D
  int64_t n[3];
  for (int d = 0; d < dims; ++d) n[d] = pick(4 * std::max(2, acc / 2), 28);

  std::ostringstream s;
  s << "mesh " << dims << "d";
  const char* nk[3] = {"nx", "ny", "nz"};
  const char* lk[3] = {"lx", "ly", "lz"};
  for (int d = 0; d < dims; ++d)
    s << " " << nk[d] << "=" << n[d] << " " << lk[d] << "=" << real(0.5, 2.0);
  s << "\n";

  int nf = pick(1, 3);  // scalar fields f0..f{nf-1}; f0 always dynamic
  for (int f = 0; f < nf; ++f) s << "field f" << f << " scalar\n";
  bool vec = dims >= 2 && pick(0, 3) == 0;
  if (vec) s << "field v vector " << dims << "\nfield vdiv scalar\n";

  s << "time dt=" << real(1e-6, 1e-4) << " steps=" << pick(3, 12) << "\n";
  s << "numerics acc=" << acc << "\n";

  // Equation shapes: f0 diffuses plus random extra stencil terms on other
  // fields; optional algebraic readout; optional vector pair via grad/div.
  std::vector<bool> stencilRead(size_t(nf) + 1, false);
  auto term = [&](int f) {
    stencilRead[size_t(f)] = true;
    int kind = pick(0, 2 + (dims > 1 ? 1 : 0));
    std::ostringstream t;
    t << real(-0.2, 0.2) << " * ";
    const char* der[3] = {"derx", "dery", "derz"};
    int ax = pick(0, dims - 1);
    if (kind == 0) t << "lapla(f" << f << ")";
    else if (kind == 1) t << der[ax] << "(f" << f << ")";
    else t << der[ax] << "(" << der[ax] << "(f" << f << "))";
    return t.str();
  };
  s << "eq dt(f0) = " << real(0.01, 0.2) << " * lapla(f0)";
  int extra = pick(0, 2);
  for (int e = 0; e < extra; ++e) s << " + " << term(pick(0, nf - 1));
  s << "\n";
  if (nf >= 2 && pick(0, 1)) {
    // second dynamic field coupled back to f0
    s << "eq dt(f1) = " << term(0);
    if (pick(0, 1)) s << " + " << real(-0.5, 0.5) << " * f1";
    s << "\n";
  }
  if (nf >= 3 && pick(0, 1))
    s << "eq f2 = " << real(0.5, 2.0) << " * f0"
      << (pick(0, 1) ? " + f1 * f0" : "") << "\n";
  if (vec) {
    s << "eq dt(v) = grad(f0)\n";
    s << "eq vdiv = div(v)\n";  // algebraic; stencil reads take old values
  }

  // ICs: smooth coordinate expressions on every scalar field.
  const char* co[3] = {"x", "y", "z"};
  for (int f = 0; f < nf; ++f) {
    s << "init f" << f << " = " << real(-1.0, 1.0);
    int terms = pick(1, 2);
    for (int t = 0; t < terms; ++t) {
      int d = pick(0, dims - 1);
      s << " + " << real(-1.0, 1.0) << " * " << (pick(0, 1) ? "sin" : "cos")
        << "(" << pick(1, 3) << " * pi * " << co[d] << ")";
    }
    s << "\n";
  }

  // BCs for everything stencil-read (f0 and v always end up read).
  stencilRead[0] = true;
  auto bcs = [&](const std::string& name) {
    for (int d = 0; d < dims; ++d) {
      if (pick(0, 1)) {
        s << "bc " << name << " periodic on " << co[d] << "min\n";
        s << "bc " << name << " periodic on " << co[d] << "max\n";
      } else {
        for (int side = 0; side < 2; ++side) {
          const char* mm = side ? "max" : "min";
          if (pick(0, 1))
            s << "bc " << name << " dirichlet value=" << real(-1.0, 1.0)
              << " on " << co[d] << mm << "\n";
          else
            s << "bc " << name << " neumann on " << co[d] << mm << "\n";
        }
      }
    }
  };
  for (int f = 0; f < nf; ++f)
    if (stencilRead[size_t(f)]) bcs("f" + std::to_string(f));
  if (vec) bcs("v");
  return s.str();
}

// A generated spec that parses and validates into a Problem; regenerates on
// the rare shape the validator rejects (e.g. the vector-eq name dodge).
inline Problem random_problem(std::mt19937& rng) {
  for (;;) {
    std::string text = random_spec(rng);
    try {
      return make(text);
    } catch (const Error&) {
      continue;
    }
  }
}

// --- task-schedule audit -----------------------------------------------

// Checks the blocking discipline of a local task trace over steps [t0, t1):
// every A(b,t) starts after B(n,t-1) ends for n = b and its face neighbors
// (clamped at the block-grid edges), and B(b,t) starts after A(b,t) ends.
// Returns an empty string on success, else a description of the violation.
inline std::string audit_schedule(const TaskTrace& tr, const int64_t nbl[3],
                                  int64_t t0, int64_t t1) {
  auto key = [&](int64_t bx, int64_t by, int64_t bz, int64_t t) {
    return ((t * nbl[2] + bz) * nbl[1] + by) * nbl[0] + bx;
  };
  int64_t perStep = nbl[0] * nbl[1] * nbl[2];
  std::vector<const TaskRecord*> as(size_t(perStep * (t1 - t0)), nullptr);
  std::vector<const TaskRecord*> bs(size_t(perStep * (t1 - t0)), nullptr);
  for (const TaskRecord& r : tr.records) {
    if (r.type != 'A' && r.type != 'B') continue;
    if (r.step < t0 || r.step >= t1) return "record outside the step range";
    int64_t k = key(r.block[0], r.block[1], r.block[2], r.step - t0);
    auto& slot = (r.type == 'A' ? as : bs)[size_t(k)];
    if (slot) return "duplicate task record";
    if (r.startTick < 0 || r.endTick <= r.startTick) return "bad ticks";
    slot = &r;
  }
  for (const TaskRecord* r : as)
    if (!r) return "missing A record";
  for (const TaskRecord* r : bs)
    if (!r) return "missing B record";

  std::ostringstream bad;
  for (int64_t t = t0; t < t1; ++t)
    for (int64_t bz = 0; bz < nbl[2]; ++bz)
      for (int64_t by = 0; by < nbl[1]; ++by)
        for (int64_t bx = 0; bx < nbl[0]; ++bx) {
          const TaskRecord* a = as[size_t(key(bx, by, bz, t - t0))];
          const TaskRecord* b = bs[size_t(key(bx, by, bz, t - t0))];
          if (b->startTick <= a->endTick) {
            bad << "B(" << bx << "," << by << "," << bz << "," << t
                << ") started before its A ended";
            return bad.str();
          }
          if (t == t0) continue;
          const int64_t d[7][3] = {{0, 0, 0}, {-1, 0, 0}, {1, 0, 0}, {0, -1, 0},
                                   {0, 1, 0},  {0, 0, -1}, {0, 0, 1}};
          for (const int64_t* dd : d) {
            int64_t nx = bx + dd[0], ny = by + dd[1], nz = bz + dd[2];
            if (nx < 0 || nx >= nbl[0] || ny < 0 || ny >= nbl[1] || nz < 0 ||
                nz >= nbl[2])
              continue;
            const TaskRecord* dep = bs[size_t(key(nx, ny, nz, t - 1 - t0))];
            if (a->startTick <= dep->endTick) {
              bad << "A(" << bx << "," << by << "," << bz << "," << t
                  << ") started before B(" << nx << "," << ny << "," << nz
                  << "," << t - 1 << ") ended";
              return bad.str();
            }
          }
        }
  return "";
}

}  // namespace fdfuse::test
