#include "run/run.hpp"

#include <unistd.h>

#include <chrono>
#include <filesystem>
#include <thread>

#include "dist/runner.hpp"
#include "support.hpp"

namespace fdfuse {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::vector<int64_t> cadence_points(int64_t steps, int64_t every) {
  std::vector<int64_t> pts;
  if (every > 0)
    for (int64_t t = every; t < steps; t += every) pts.push_back(t);
  return pts;
}

Metrics base_metrics(const Problem& p, const RunOptions& opt, const Sim& sim,
                     int64_t steps) {
  Metrics m;
  m.spec = opt.specName;
  m.mode = mode_name(opt.mode);
  m.transport = is_dist(opt.mode) ? opt.transport : "";
  m.steps = steps;
  m.interiorPoints = p.mesh.n[0] * p.mesh.n[1] * p.mesh.n[2];
  m.nThreads = sim.cfg.nThreads;
  m.nRanks = opt.nRanks;
  for (int d = 0; d < 3; ++d) m.nbl[d] = sim.plan.nbl[d];
  m.workingSetBytes = sim.plan.workingSetBytes;
  m.blockingFallback = sim.plan.fallback;
  CostModel cm = cost_model_total(sim.low, p.acc, p.mesh.dims);
  m.flopPerPoint = cm.flopPerPoint;
  m.memPerPoint = cm.memPerPoint;
  double pointSteps = double(m.interiorPoints) * double(steps);
  m.totalGFlop = double(cm.flopPerPoint) * pointSteps / 1e9;
  m.totalGBytes = double(cm.memPerPoint) * 8.0 * pointSteps / 1e9;
  return m;
}

void finish_metrics(Metrics& m) {
  double runS = m.computeS + m.exchangeS;
  if (m.steps > 0 && runS > 0)
    m.mpointsPerSec =
        double(m.interiorPoints) * double(m.steps) / runS / 1e6;
  else if (m.steps == 0)
    m.note = "zero-step run; Mpoints/s undefined";
}

void busy_ns_to_metrics(const std::vector<int64_t>& ns, Metrics& m) {
  m.laneBusyS.clear();
  for (int64_t v : ns) m.laneBusyS.push_back(double(v) / 1e9);
  m.laneWallS = m.computeS;
}

RunResult run_local(const Problem& p, const RunOptions& opt) {
  Clock::time_point wall0 = Clock::now();
  int64_t localN[3] = {p.mesh.n[0], p.mesh.n[1], p.mesh.n[2]};
  int64_t off[3] = {0, 0, 0};
  Sim sim(p, opt.cfg, localN, off);
  int64_t steps = effective_steps(p, opt.cfg);

  RunResult res;
  res.metrics = base_metrics(p, opt, sim, steps);

  Clock::time_point t0 = Clock::now();
  sim.init();
  res.metrics.initS = seconds_since(t0);

  TaskCounts counts;
  std::vector<int64_t> laneBusy;
  auto run_segment = [&](int64_t a, int64_t b) {
    Clock::time_point tb = Clock::now();
    if (opt.baseline) {
      run_baseline(sim, a, b);
    } else if (opt.mode == Mode::Seq) {
      run_seq(sim, a, b);
    } else if (opt.mode == Mode::ForkJoin) {
      run_forkjoin(sim, a, b);
    } else {
      res.trace.records.clear();
      run_tasks(sim, a, b, &counts,
                opt.cfg.trace ? &res.trace : nullptr, &laneBusy);
    }
    res.metrics.computeS += seconds_since(tb);
  };

  int64_t prev = 0;
  for (int64_t t : cadence_points(steps, opt.dumpEvery)) {
    run_segment(prev, t);
    prev = t;
    res.cadence.emplace_back(t, collect_dump(*sim.gs, p, t));
  }
  run_segment(prev, steps);
  res.finalFields = collect_dump(*sim.gs, p, steps);

  res.metrics.aTasks = counts.a;
  res.metrics.bTasks = counts.b;
  res.metrics.cTasks = counts.c;
  busy_ns_to_metrics(laneBusy, res.metrics);
  res.metrics.totalS = seconds_since(wall0);
  finish_metrics(res.metrics);
  return res;
}

}  // namespace

int64_t effective_steps(const Problem& p, const SimConfig& cfg) {
  return cfg.stepsOverride >= 0 ? cfg.stepsOverride : p.niter;
}

RunResult run_dist_rank(const Problem& p, const RunOptions& opt,
                        Transport& tr) {
  Clock::time_point wall0 = Clock::now();
  RankGrid rg = opt.rankGrid.empty()
                    ? decompose_ranks(p.mesh.dims, opt.nRanks)
                    : parse_rank_grid(opt.rankGrid, p.mesh.dims, opt.nRanks);
  RankRunner rr(p, opt.cfg, opt.mode, rg, tr);
  int64_t steps = effective_steps(p, opt.cfg);

  RunResult res;
  rr.init();

  int64_t prev = 0;
  for (int64_t t : cadence_points(steps, opt.dumpEvery)) {
    rr.run_segment(prev, t);
    prev = t;
    rr.gather_to_root(t);
    if (tr.rank() == 0)
      res.cadence.emplace_back(t, collect_dump(*rr.globalStore, p, t));
  }
  rr.run_segment(prev, steps);
  rr.gather_to_root(steps);
  if (tr.rank() == 0)
    res.finalFields = collect_dump(*rr.globalStore, p, steps);
  if (opt.cfg.trace && opt.mode == Mode::DistTask) res.trace = rr.taskTrace;

  res.metrics = base_metrics(p, opt, rr.sim, steps);
  res.metrics.initS = rr.stats.initS;
  res.metrics.computeS = rr.stats.computeS;
  res.metrics.exchangeS = rr.stats.exchangeS;
  res.metrics.gatherS = rr.stats.gatherS;
  res.metrics.aTasks = rr.stats.tasks.a;
  res.metrics.bTasks = rr.stats.tasks.b;
  res.metrics.cTasks = rr.stats.tasks.c;
  busy_ns_to_metrics(rr.stats.laneBusyNs, res.metrics);
  res.metrics.bytesSent = tr.bytes_sent();
  res.metrics.bytesRecv = tr.bytes_received();
  res.metrics.totalS = seconds_since(wall0);
  finish_metrics(res.metrics);
  return res;
}

RunResult run_problem(const Problem& p, const RunOptions& opt) {
  if (opt.nRanks < 1)
    throw Error(Errc::Config, "rank count must be at least 1");
  if (!is_dist(opt.mode)) {
    if (opt.nRanks != 1)
      throw Error(Errc::Config,
                  std::string("mode ") + mode_name(opt.mode) +
                      " runs on exactly 1 rank");
    return run_local(p, opt);
  }
  if (opt.transport != "inproc" && opt.transport != "socket")
    throw Error(Errc::Config, "unknown transport: " + opt.transport);

  int n = int(opt.nRanks);
  if (opt.procRank >= 0) {
    // One rank of a multi-process launch; peers rendezvous through the
    // socket dir, so the in-process hub never applies here.
    if (opt.transport != "socket")
      throw Error(Errc::Config, "per-process ranks require the socket transport");
    if (opt.procRank >= n)
      throw Error(Errc::Config, "proc rank out of range");
    if (opt.socketDir.empty())
      throw Error(Errc::Config, "per-process ranks need an explicit socket dir");
    std::unique_ptr<Transport> tr =
        make_socket_transport(opt.procRank, n, opt.socketDir);
    return run_dist_rank(p, opt, *tr);
  }
  std::string dir = opt.socketDir;
  bool ownDir = false;
  if (opt.transport == "socket" && dir.empty()) {
    std::string tmpl = "/tmp/fdfuse.XXXXXX";
    if (!mkdtemp(tmpl.data()))
      throw Error(Errc::Io, "cannot create socket dir");
    dir = tmpl;
    ownDir = true;
  }

  InprocHub hub(opt.transport == "inproc" ? n : 0);
  std::vector<RunResult> results(static_cast<size_t>(n));
  std::vector<std::exception_ptr> errs(static_cast<size_t>(n));
  std::vector<std::thread> ranks;
  ranks.reserve(size_t(n));
  for (int r = 0; r < n; ++r) {
    ranks.emplace_back([&, r] {
      try {
        std::unique_ptr<Transport> tr =
            opt.transport == "inproc" ? hub.endpoint(r)
                                      : make_socket_transport(r, n, dir);
        results[size_t(r)] = run_dist_rank(p, opt, *tr);
      } catch (...) {
        errs[size_t(r)] = std::current_exception();
      }
    });
  }
  for (std::thread& th : ranks) th.join();
  if (ownDir) {
    std::error_code ec;
    std::filesystem::remove_all(dir, ec);
  }

  // Prefer the root cause over downstream comm timeouts.
  std::exception_ptr first;
  for (const std::exception_ptr& e : errs) {
    if (!e) continue;
    if (!first) first = e;
    try {
      std::rethrow_exception(e);
    } catch (const Error& err) {
      if (err.code() != Errc::Io) {
        first = e;
        break;
      }
    } catch (...) {
      first = e;
      break;
    }
  }
  if (first) std::rethrow_exception(first);

  RunResult res = std::move(results[0]);
  for (int r = 1; r < n; ++r) {
    const Metrics& m = results[size_t(r)].metrics;
    res.metrics.aTasks += m.aTasks;
    res.metrics.bTasks += m.bTasks;
    res.metrics.cTasks += m.cTasks;
    res.metrics.bytesSent += m.bytesSent;
    res.metrics.bytesRecv += m.bytesRecv;
  }
  return res;
}

}  // namespace fdfuse
