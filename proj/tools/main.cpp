// Driver binary. Everything goes through the C API in fdfuse.h; this file
// only parses flags, moves strings around, and forks worker processes for
// --launch proc.

#include <sys/wait.h>
#include <unistd.h>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "fdfuse.h"

namespace {

// Exit codes: 0 ok, 1 run/data failure (non-finite values, bad spec, I/O,
// mismatched compare), 2 usage (bad flags or flag combinations).
int exit_code(fdf_status st) {
  if (st == FDF_OK) return 0;
  if (st == FDF_ERR_CONFIG) return 2;
  return 1;
}

int complain(fdf_status st) {
  std::cerr << "error: " << fdf_last_error() << "\n";
  return exit_code(st);
}

int usage_error(const std::string& msg) {
  std::cerr << "error: " << msg << "\n";
  return 2;
}

struct StrFree {
  void operator()(char* s) const { fdf_string_free(s); }
};
using CStr = std::unique_ptr<char, StrFree>;

struct ProblemFree {
  void operator()(fdf_problem* p) const { fdf_problem_free(p); }
};
using ProblemPtr = std::unique_ptr<fdf_problem, ProblemFree>;

struct ConfigFree {
  void operator()(fdf_config* c) const { fdf_config_free(c); }
};
using ConfigPtr = std::unique_ptr<fdf_config, ConfigFree>;

struct ResultFree {
  void operator()(fdf_result* r) const { fdf_result_free(r); }
};
using ResultPtr = std::unique_ptr<fdf_result, ResultFree>;

ProblemPtr load_spec(const std::string& path, fdf_status& st) {
  fdf_problem* p = nullptr;
  st = fdf_problem_parse_file(path.c_str(), &p);
  return ProblemPtr(p);
}

bool write_text(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return bool(std::cout);
  }
  std::ofstream os(path, std::ios::binary);
  os << text;
  return bool(os);
}

// All flags of the `run` subcommand (also reused by the proc launcher to
// rebuild the child command line).
struct RunFlags {
  std::string spec;
  std::string mode = "seq";
  int64_t threads = 1;
  int64_t ranks = 1;
  int64_t alignment = 64;
  int64_t vectorSize = 8;
  int64_t l3Size = 33ll << 20;
  int64_t commBlocks = 4;
  int64_t stepsOverride = -1;
  std::string dump;
  std::string trace;
  bool checkFinite = false;
  std::string compare;
  double tol = 0.0;
  std::string metrics;
  int64_t dumpEvery = 0;
  std::string rankGrid;
  int64_t windowSteps = 1;
  std::string launch = "thread";
  // set on children spawned by --launch proc; hidden from help
  int64_t internalRank = -1;
  std::string internalSocketDir;
};

void add_run_flags(CLI::App* cmd, RunFlags& f) {
  cmd->add_option("--spec", f.spec, "problem spec file")->required();
  cmd->add_option("--mode", f.mode,
                  "seq | forkjoin | task | dist-pure | dist-forkjoin | "
                  "dist-task")
      ->capture_default_str();
  cmd->add_option("--threads", f.threads, "worker lanes per rank")
      ->capture_default_str();
  cmd->add_option("--ranks", f.ranks, "rank count (dist modes)")
      ->capture_default_str();
  cmd->add_option("--alignment", f.alignment, "row alignment in bytes")
      ->capture_default_str();
  cmd->add_option("--vector-size", f.vectorSize, "vector lanes (doubles)")
      ->capture_default_str();
  cmd->add_option("--l3-size", f.l3Size, "cache budget for blocking, bytes")
      ->capture_default_str();
  cmd->add_option("--comm-blocks", f.commBlocks,
                  "halo chunks per face (dist-task)")
      ->capture_default_str();
  cmd->add_option("--steps-override", f.stepsOverride,
                  "run this many steps instead of the spec's niter")
      ->capture_default_str();
  cmd->add_option("--dump", f.dump, "write final fields to this file");
  cmd->add_option("--trace", f.trace,
                  "write the task execution trace here (task modes)");
  cmd->add_flag("--check-finite", f.checkFinite,
                "abort when a non-finite value appears");
  cmd->add_option("--compare", f.compare,
                  "compare the final dump against this reference dump");
  cmd->add_option("--tol", f.tol,
                  "comparison tolerance (0 = bitwise)")
      ->capture_default_str();
  cmd->add_option("--metrics", f.metrics,
                  "write machine-readable metrics here ('-' = stdout)");
  cmd->add_option("--dump-every", f.dumpEvery,
                  "also dump every N steps to <dump>.step<N>")
      ->capture_default_str();
  cmd->add_option("--rank-grid", f.rankGrid,
                  "rank decomposition AxBxC (default: balanced)");
  cmd->add_option("--window-steps", f.windowSteps,
                  "steps fused per task window")
      ->capture_default_str();
  cmd->add_option("--launch", f.launch,
                  "dist ranks as 'thread's or separate 'proc'esses")
      ->capture_default_str();
  cmd->add_option("--internal-rank", f.internalRank, "")->group("");
  cmd->add_option("--internal-socket-dir", f.internalSocketDir, "")
      ->group("");
}

bool is_dist_mode(const std::string& m) { return m.rfind("dist-", 0) == 0; }

std::string spec_label(const std::string& path) {
  return std::filesystem::path(path).stem().string();
}

// ---- --launch proc: one OS process per rank over the socket transport ----

int spawn_ranks(const RunFlags& f, const std::string& transport) {
  if (transport != "socket")
    return usage_error("--launch proc requires the socket transport");
  std::string dir = "/tmp/fdfuse.XXXXXX";
  if (!mkdtemp(dir.data())) {
    std::cerr << "error: cannot create socket dir\n";
    return 1;
  }

  char exe[4096];
  ssize_t len = readlink("/proc/self/exe", exe, sizeof exe - 1);
  if (len <= 0) {
    std::cerr << "error: cannot resolve own executable\n";
    return 1;
  }
  exe[len] = '\0';

  std::vector<std::string> base = {
      exe, "run",
      "--spec", f.spec,
      "--mode", f.mode,
      "--threads", std::to_string(f.threads),
      "--ranks", std::to_string(f.ranks),
      "--alignment", std::to_string(f.alignment),
      "--vector-size", std::to_string(f.vectorSize),
      "--l3-size", std::to_string(f.l3Size),
      "--comm-blocks", std::to_string(f.commBlocks),
      "--steps-override", std::to_string(f.stepsOverride),
      "--dump-every", std::to_string(f.dumpEvery),
      "--window-steps", std::to_string(f.windowSteps),
      "--tol", std::to_string(f.tol),
      "--internal-socket-dir", dir,
  };
  if (!f.dump.empty()) { base.push_back("--dump"); base.push_back(f.dump); }
  if (!f.trace.empty()) { base.push_back("--trace"); base.push_back(f.trace); }
  if (!f.compare.empty()) {
    base.push_back("--compare");
    base.push_back(f.compare);
  }
  if (!f.metrics.empty()) {
    base.push_back("--metrics");
    base.push_back(f.metrics);
  }
  if (!f.rankGrid.empty()) {
    base.push_back("--rank-grid");
    base.push_back(f.rankGrid);
  }
  if (f.checkFinite) base.push_back("--check-finite");

  std::vector<pid_t> pids;
  for (int64_t r = 0; r < f.ranks; ++r) {
    std::vector<std::string> args = base;
    args.push_back("--internal-rank");
    args.push_back(std::to_string(r));
    std::vector<char*> argv;
    argv.reserve(args.size() + 1);
    for (std::string& a : args) argv.push_back(a.data());
    argv.push_back(nullptr);

    pid_t pid = fork();
    if (pid == 0) {
      execv(exe, argv.data());
      _exit(127);
    }
    if (pid < 0) {
      std::cerr << "error: fork failed\n";
      for (pid_t p : pids) kill(p, SIGKILL);
      break;
    }
    pids.push_back(pid);
  }

  int worst = pids.size() == size_t(f.ranks) ? 0 : 1;
  for (size_t i = 0; i < pids.size(); ++i) {
    int st = 0;
    waitpid(pids[i], &st, 0);
    int code;
    if (WIFEXITED(st)) {
      code = WEXITSTATUS(st);
    } else {
      std::cerr << "error: rank " << i << " died on signal " << WTERMSIG(st)
                << "\n";
      code = 1;
    }
    // rank 0 carries the primary result, so its failure wins the report
    if (code != 0 && (worst == 0 || i == 0)) worst = code;
  }
  std::error_code ec;
  std::filesystem::remove_all(dir, ec);
  return worst;
}

int cmd_run(RunFlags& f) {
  const char* env = std::getenv("FDFUSE_TRANSPORT");
  std::string transport = env && *env ? env : "inproc";
  if (f.internalRank >= 0) transport = "socket";
  if (transport != "inproc" && transport != "socket")
    return usage_error("FDFUSE_TRANSPORT must be 'inproc' or 'socket', got '" +
                       transport + "'");

  bool dist = is_dist_mode(f.mode);
  bool taskMode = f.mode == "task" || f.mode == "dist-task";
  if (!dist && f.ranks != 1)
    return usage_error("--ranks " + std::to_string(f.ranks) +
                       " needs a dist-* mode; mode " + f.mode +
                       " runs on exactly 1 rank");
  if ((f.mode == "seq" || f.mode == "dist-pure") && f.threads != 1)
    return usage_error("mode " + f.mode + " is single-threaded per rank");
  if (!f.trace.empty() && !taskMode)
    return usage_error("--trace requires a task mode");
  if (f.launch != "thread" && f.launch != "proc")
    return usage_error("--launch must be 'thread' or 'proc'");
  if (f.launch == "proc" && !dist)
    return usage_error("--launch proc needs a dist-* mode");
  if (f.launch == "proc" && f.internalRank < 0)
    return spawn_ranks(f, env && *env ? transport : "socket");

  fdf_status st;
  ProblemPtr prob = load_spec(f.spec, st);
  if (!prob) return complain(st);

  ConfigPtr cfg(fdf_config_new());
  if ((st = fdf_config_set_mode(cfg.get(), f.mode.c_str())) != FDF_OK)
    return complain(st);
  struct {
    const char* key;
    int64_t val;
  } ints[] = {
      {"threads", f.threads},         {"ranks", f.ranks},
      {"alignment", f.alignment},     {"vector-size", f.vectorSize},
      {"l3-size", f.l3Size},          {"comm-blocks", f.commBlocks},
      {"steps-override", f.stepsOverride},
      {"dump-every", f.dumpEvery},    {"window-steps", f.windowSteps},
      {"check-finite", f.checkFinite ? 1 : 0},
      {"trace", f.trace.empty() ? 0 : 1},
      {"proc-rank", f.internalRank},
  };
  for (auto& kv : ints)
    if ((st = fdf_config_set_int(cfg.get(), kv.key, kv.val)) != FDF_OK)
      return complain(st);
  if ((st = fdf_config_set_str(cfg.get(), "transport", transport.c_str())) !=
      FDF_OK)
    return complain(st);
  if (!f.rankGrid.empty() &&
      (st = fdf_config_set_str(cfg.get(), "rank-grid", f.rankGrid.c_str())) !=
          FDF_OK)
    return complain(st);
  if (!f.internalSocketDir.empty() &&
      (st = fdf_config_set_str(cfg.get(), "socket-dir",
                               f.internalSocketDir.c_str())) != FDF_OK)
    return complain(st);
  std::string label = spec_label(f.spec);
  if ((st = fdf_config_set_str(cfg.get(), "spec-name", label.c_str())) !=
      FDF_OK)
    return complain(st);

  fdf_result* raw = nullptr;
  st = fdf_run(prob.get(), cfg.get(), &raw);
  ResultPtr res(raw);
  if (st != FDF_OK) {
    if (f.internalRank > 0)
      std::cerr << "rank " << f.internalRank << ": ";
    return complain(st);
  }

  // Ranks above 0 of a proc launch hold no global state; rank 0 (or the
  // single local process) writes every artifact.
  if (f.internalRank > 0) return 0;

  std::string dumpPath = f.dump;
  bool tmpDump = false;
  if (dumpPath.empty() && !f.compare.empty()) {
    dumpPath = (std::filesystem::temp_directory_path() /
                ("fdfuse-cmp-" + std::to_string(getpid()) + ".dump"))
                   .string();
    tmpDump = true;
  }
  if (!dumpPath.empty()) {
    if ((st = fdf_result_write_dump(res.get(), dumpPath.c_str())) != FDF_OK)
      return complain(st);
  }
  if (!f.trace.empty()) {
    char* text = nullptr;
    if ((st = fdf_result_trace_text(res.get(), &text)) != FDF_OK)
      return complain(st);
    CStr owned(text);
    if (!write_text(f.trace, owned.get())) {
      std::cerr << "error: cannot write " << f.trace << "\n";
      return 1;
    }
  }

  char* table = nullptr;
  if ((st = fdf_result_metrics_table(res.get(), &table)) != FDF_OK)
    return complain(st);
  std::cout << CStr(table).get();
  if (!f.metrics.empty()) {
    char* kv = nullptr;
    if ((st = fdf_result_metrics_kv(res.get(), &kv)) != FDF_OK)
      return complain(st);
    CStr owned(kv);
    if (!write_text(f.metrics, owned.get())) {
      std::cerr << "error: cannot write " << f.metrics << "\n";
      return 1;
    }
  }

  if (!f.compare.empty()) {
    char* report = nullptr;
    int pass = 0;
    st = fdf_compare_dumps(dumpPath.c_str(), f.compare.c_str(), f.tol,
                           &report, &pass);
    if (tmpDump) {
      std::error_code ec;
      std::filesystem::remove(dumpPath, ec);
    }
    if (st != FDF_OK) return complain(st);
    CStr owned(report);
    std::cout << owned.get();
    if (!pass) return 1;
  }
  return 0;
}

// ---- spec inspection commands ----

int cmd_validate(const std::string& spec) {
  fdf_status st;
  ProblemPtr prob = load_spec(spec, st);
  if (!prob) return complain(st);
  char* report = nullptr;
  int ok = 0;
  if ((st = fdf_problem_validate(prob.get(), &report, &ok)) != FDF_OK)
    return complain(st);
  CStr owned(report);
  std::cout << owned.get();
  std::cout << (ok ? "ok\n" : "invalid\n");
  return ok ? 0 : 1;
}

int cmd_text(const std::string& spec, bool listing) {
  fdf_status st;
  ProblemPtr prob = load_spec(spec, st);
  if (!prob) return complain(st);
  char* text = nullptr;
  st = listing ? fdf_problem_listing(prob.get(), &text)
               : fdf_problem_print(prob.get(), &text);
  if (st != FDF_OK) return complain(st);
  std::cout << CStr(text).get();
  return 0;
}

int cmd_compare(const std::string& a, const std::string& b, double tol) {
  char* report = nullptr;
  int pass = 0;
  fdf_status st = fdf_compare_dumps(a.c_str(), b.c_str(), tol, &report, &pass);
  if (st != FDF_OK) return complain(st);
  CStr owned(report);
  std::cout << owned.get();
  return pass ? 0 : 1;
}

// ---- bench: tree-walking reference vs the fused kernel program ----

double kv_lookup(const std::string& kv, const std::string& key) {
  std::string needle = key + "=";
  size_t pos = 0;
  while (pos < kv.size()) {
    size_t eol = kv.find('\n', pos);
    if (eol == std::string::npos) eol = kv.size();
    if (kv.compare(pos, needle.size(), needle) == 0)
      return std::strtod(kv.c_str() + pos + needle.size(), nullptr);
    pos = eol + 1;
  }
  return 0.0;
}

int bench_once(fdf_problem* prob, int64_t steps, bool baseline, double& outS,
               double& outMp) {
  ConfigPtr cfg(fdf_config_new());
  fdf_status st;
  if ((st = fdf_config_set_int(cfg.get(), "steps-override", steps)) != FDF_OK)
    return complain(st);
  if ((st = fdf_config_set_int(cfg.get(), "baseline", baseline ? 1 : 0)) !=
      FDF_OK)
    return complain(st);
  fdf_result* raw = nullptr;
  if ((st = fdf_run(prob, cfg.get(), &raw)) != FDF_OK) return complain(st);
  ResultPtr res(raw);
  char* kv = nullptr;
  if ((st = fdf_result_metrics_kv(res.get(), &kv)) != FDF_OK)
    return complain(st);
  CStr owned(kv);
  std::string text = owned.get();
  outS = kv_lookup(text, "compute_s");
  outMp = kv_lookup(text, "mpoints_per_s");
  return 0;
}

int cmd_bench(const std::string& spec, int64_t steps) {
  fdf_status st;
  ProblemPtr prob = load_spec(spec, st);
  if (!prob) return complain(st);
  double baseS = 0, baseMp = 0, optS = 0, optMp = 0;
  int rc = bench_once(prob.get(), steps, true, baseS, baseMp);
  if (rc) return rc;
  rc = bench_once(prob.get(), steps, false, optS, optMp);
  if (rc) return rc;
  std::printf("baseline_s=%.6f\n", baseS);
  std::printf("optimized_s=%.6f\n", optS);
  std::printf("baseline_mpoints_s=%.3f\n", baseMp);
  std::printf("optimized_mpoints_s=%.3f\n", optMp);
  std::printf("speedup=%.3f\n", optS > 0 ? baseS / optS : 0.0);
  return 0;
}

// ---- plot-csv: index-coordinate slices for external plotting ----

int cmd_plot(const std::string& spec, const std::string& field, int64_t kSlice,
             const std::string& out, int64_t steps) {
  fdf_status st;
  ProblemPtr prob = load_spec(spec, st);
  if (!prob) return complain(st);
  ConfigPtr cfg(fdf_config_new());
  if ((st = fdf_config_set_int(cfg.get(), "steps-override", steps)) != FDF_OK)
    return complain(st);
  fdf_result* raw = nullptr;
  if ((st = fdf_run(prob.get(), cfg.get(), &raw)) != FDF_OK)
    return complain(st);
  ResultPtr res(raw);

  int count = 0;
  fdf_result_field_count(res.get(), &count);
  int pick = -1;
  const char* name = nullptr;
  int comps = 0;
  int64_t n[3] = {0, 0, 0};
  for (int i = 0; i < count; ++i) {
    fdf_result_field_info(res.get(), i, &name, &comps, n);
    if (field.empty() || field == name) {
      pick = i;
      break;
    }
  }
  if (pick < 0) return usage_error("no field named '" + field + "'");
  const double* data = nullptr;
  int64_t total = 0;
  if ((st = fdf_result_field_data(res.get(), pick, &data, &total)) != FDF_OK)
    return complain(st);

  bool flat = n[2] == 1;  // 1D/2D: no slicing needed
  if (!flat && (kSlice < 0 || kSlice >= n[2]))
    return usage_error("--k out of range [0," + std::to_string(n[2]) + ")");
  int64_t k = flat ? 0 : kSlice;

  std::string csv;
  csv += n[1] == 1 ? "i" : "i,j";
  for (int c = 0; c < comps; ++c) {
    csv += ',';
    csv += name;
    if (comps > 1) csv += std::to_string(c);
  }
  csv += '\n';
  char buf[64];
  for (int64_t j = 0; j < n[1]; ++j)
    for (int64_t i = 0; i < n[0]; ++i) {
      csv += std::to_string(i);
      if (n[1] > 1) {
        csv += ',';
        csv += std::to_string(j);
      }
      const double* v = data + ((k * n[1] + j) * n[0] + i) * comps;
      for (int c = 0; c < comps; ++c) {
        std::snprintf(buf, sizeof buf, ",%.17g", v[c]);
        csv += buf;
      }
      csv += '\n';
    }
  if (!write_text(out, csv)) {
    std::cerr << "error: cannot write " << out << "\n";
    return 1;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"finite-difference kernel fusion compiler and runtime",
               "fdfuse"};
  app.require_subcommand(1);
  app.footer("Transport for dist-* modes comes from FDFUSE_TRANSPORT "
             "(inproc | socket, default inproc).");

  RunFlags rf;
  CLI::App* run = app.add_subcommand(
      "run", "compile a spec and run it in the chosen mode");
  add_run_flags(run, rf);

  std::string vSpec;
  CLI::App* val =
      app.add_subcommand("validate", "parse + semantic checks, report only");
  val->add_option("--spec", vSpec, "problem spec file")->required();

  std::string lSpec;
  CLI::App* lst = app.add_subcommand(
      "listing", "print the fused kernel program and its cost model");
  lst->add_option("--spec", lSpec, "problem spec file")->required();

  std::string pSpec;
  CLI::App* prt =
      app.add_subcommand("print", "echo the spec in canonical form");
  prt->add_option("--spec", pSpec, "problem spec file")->required();

  std::string cmpA, cmpB;
  double cmpTol = 0.0;
  CLI::App* cmp = app.add_subcommand("compare", "diff two dump files");
  cmp->add_option("a", cmpA, "first dump")->required();
  cmp->add_option("b", cmpB, "second dump")->required();
  cmp->add_option("--tol", cmpTol, "tolerance (0 = bitwise)")
      ->capture_default_str();

  std::string bSpec;
  int64_t bSteps = -1;
  CLI::App* bench = app.add_subcommand(
      "bench", "time the tree-walking reference against the fused kernels");
  bench->add_option("--spec", bSpec, "problem spec file")->required();
  bench->add_option("--steps-override", bSteps, "steps for both runs")
      ->capture_default_str();

  std::string plSpec, plField, plOut = "-";
  int64_t plK = 0, plSteps = -1;
  CLI::App* plot = app.add_subcommand(
      "plot-csv", "run and emit a 1D/2D slice of a field as CSV");
  plot->add_option("--spec", plSpec, "problem spec file")->required();
  plot->add_option("--field", plField, "field name (default: first field)");
  plot->add_option("--k", plK, "z-plane index for 3D meshes")
      ->capture_default_str();
  plot->add_option("--out", plOut, "output path ('-' = stdout)")
      ->capture_default_str();
  plot->add_option("--steps-override", plSteps, "steps to run")
      ->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::vector<CLI::App*> subs = app.get_subcommands();
    std::cerr << "error: " << e.what() << "\n\n"
              << (subs.empty() ? app.help() : subs[0]->help());
    return 2;
  }

  if (run->parsed()) return cmd_run(rf);
  if (val->parsed()) return cmd_validate(vSpec);
  if (lst->parsed()) return cmd_text(lSpec, true);
  if (prt->parsed()) return cmd_text(pSpec, false);
  if (cmp->parsed()) return cmd_compare(cmpA, cmpB, cmpTol);
  if (bench->parsed()) return cmd_bench(bSpec, bSteps);
  if (plot->parsed()) return cmd_plot(plSpec, plField, plK, plOut, plSteps);
  return 2;
}
