#include "fdfuse.h"

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <sstream>

#include "frontend/problem.hpp"
#include "lowering/kernel.hpp"
#include "run/run.hpp"
#include "support.hpp"

using namespace fdfuse;

namespace {

thread_local std::string g_lastError;

fdf_status fail(Errc c, const std::string& msg) {
  g_lastError = msg;
  return fdf_status(int(c));
}

template <typename F>
fdf_status guarded(F&& f) {
  try {
    return f();
  } catch (const Error& e) {
    return fail(e.code(), e.what());
  } catch (const std::exception& e) {
    return fail(Errc::Internal, e.what());
  } catch (...) {
    return fail(Errc::Internal, "unknown error");
  }
}

char* dup_string(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (p) std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

}  // namespace

struct fdf_problem {
  Problem p;
};

struct fdf_config {
  RunOptions opt;
};

struct fdf_result {
  RunResult res;
};

extern "C" {

const char* fdf_last_error(void) { return g_lastError.c_str(); }

fdf_status fdf_problem_parse(const char* text, fdf_problem** out) {
  if (!text || !out) return fail(Errc::Config, "null argument");
  return guarded([&] {
    *out = new fdf_problem{parse_problem(text)};
    return FDF_OK;
  });
}

fdf_status fdf_problem_parse_file(const char* path, fdf_problem** out) {
  if (!path || !out) return fail(Errc::Config, "null argument");
  return guarded([&] {
    std::ifstream is(path);
    if (!is) throw Error(Errc::Io, std::string("cannot open: ") + path);
    std::ostringstream ss;
    ss << is.rdbuf();
    *out = new fdf_problem{parse_problem(ss.str())};
    return FDF_OK;
  });
}

fdf_status fdf_problem_validate(const fdf_problem* p, char** report,
                                int* ok) {
  if (!p) return fail(Errc::Config, "null problem");
  return guarded([&] {
    ValidationReport rep = validate_problem(p->p);
    if (report) *report = dup_string(rep.to_text());
    if (ok) *ok = rep.ok() ? 1 : 0;
    return FDF_OK;
  });
}

fdf_status fdf_problem_print(const fdf_problem* p, char** text) {
  if (!p || !text) return fail(Errc::Config, "null argument");
  return guarded([&] {
    *text = dup_string(print_problem(p->p));
    return FDF_OK;
  });
}

fdf_status fdf_problem_listing(const fdf_problem* p, char** text) {
  if (!p || !text) return fail(Errc::Config, "null argument");
  return guarded([&] {
    Lowered low = lower(p->p);
    CostModel cm = cost_model_total(low, p->p.acc, p->p.mesh.dims);
    std::string s = emit_listing(low, p->p);
    s += "cost mem_per_point=" + std::to_string(cm.memPerPoint) +
         " flop_per_point=" + std::to_string(cm.flopPerPoint) +
         " stencil_ops=" + std::to_string(cm.ops) + "\n";
    *text = dup_string(s);
    return FDF_OK;
  });
}

void fdf_problem_free(fdf_problem* p) { delete p; }

fdf_config* fdf_config_new(void) {
  fdf_config* c = new fdf_config;
  c->opt.cfg.commBlocks = 4;
  return c;
}

fdf_status fdf_config_set_mode(fdf_config* c, const char* mode) {
  if (!c || !mode) return fail(Errc::Config, "null argument");
  std::optional<Mode> m = parse_mode(mode);
  if (!m) return fail(Errc::Config, std::string("unknown mode: ") + mode);
  c->opt.mode = *m;
  return FDF_OK;
}

fdf_status fdf_config_set_int(fdf_config* c, const char* key, int64_t value) {
  if (!c || !key) return fail(Errc::Config, "null argument");
  std::string k = key;
  if (k == "threads") c->opt.cfg.nThreads = int(value);
  else if (k == "ranks") c->opt.nRanks = value;
  else if (k == "alignment") c->opt.cfg.alignBytes = int(value);
  else if (k == "vector-size") c->opt.cfg.vectorSize = int(value);
  else if (k == "l3-size") c->opt.cfg.l3Bytes = value;
  else if (k == "comm-blocks") c->opt.cfg.commBlocks = value;
  else if (k == "steps-override") c->opt.cfg.stepsOverride = value;
  else if (k == "dump-every") c->opt.dumpEvery = value;
  else if (k == "window-steps") c->opt.cfg.windowSteps = int(value);
  else if (k == "check-finite") c->opt.cfg.checkFinite = value != 0;
  else if (k == "trace") c->opt.cfg.trace = value != 0;
  else if (k == "baseline") c->opt.baseline = value != 0;
  else if (k == "proc-rank") c->opt.procRank = int(value);
  else return fail(Errc::Config, "unknown config key: " + k);
  return FDF_OK;
}

fdf_status fdf_config_set_str(fdf_config* c, const char* key,
                              const char* value) {
  if (!c || !key || !value) return fail(Errc::Config, "null argument");
  std::string k = key;
  if (k == "transport") c->opt.transport = value;
  else if (k == "socket-dir") c->opt.socketDir = value;
  else if (k == "rank-grid") c->opt.rankGrid = value;
  else if (k == "spec-name") c->opt.specName = value;
  else return fail(Errc::Config, "unknown config key: " + k);
  return FDF_OK;
}

void fdf_config_free(fdf_config* c) { delete c; }

fdf_status fdf_run(const fdf_problem* p, const fdf_config* c,
                   fdf_result** out) {
  if (!p || !c || !out) return fail(Errc::Config, "null argument");
  return guarded([&] {
    ValidationReport rep = validate_problem(p->p);
    if (!rep.ok()) throw Error(Errc::Validate, rep.to_text());
    *out = new fdf_result{run_problem(p->p, c->opt)};
    return FDF_OK;
  });
}

fdf_status fdf_result_metrics_kv(const fdf_result* r, char** text) {
  if (!r || !text) return fail(Errc::Config, "null argument");
  *text = dup_string(metrics_kv(r->res.metrics));
  return FDF_OK;
}

fdf_status fdf_result_metrics_table(const fdf_result* r, char** text) {
  if (!r || !text) return fail(Errc::Config, "null argument");
  *text = dup_string(metrics_table(r->res.metrics));
  return FDF_OK;
}

fdf_status fdf_result_trace_text(const fdf_result* r, char** text) {
  if (!r || !text) return fail(Errc::Config, "null argument");
  std::string s;
  char line[160];
  for (const TaskRecord& t : r->res.trace.records) {
    std::snprintf(line, sizeof line,
                  "%c lane=%d block=%lld,%lld,%lld step=%lld start=%lld "
                  "end=%lld\n",
                  t.type, t.lane, (long long)t.block[0], (long long)t.block[1],
                  (long long)t.block[2], (long long)t.step,
                  (long long)t.startTick, (long long)t.endTick);
    s += line;
  }
  *text = dup_string(s);
  return FDF_OK;
}

fdf_status fdf_result_write_dump(const fdf_result* r, const char* path) {
  if (!r || !path) return fail(Errc::Config, "null argument");
  return guarded([&] {
    for (const auto& [step, fields] : r->res.cadence)
      write_dump(fields, std::string(path) + ".step" + std::to_string(step));
    write_dump(r->res.finalFields, path);
    return FDF_OK;
  });
}

fdf_status fdf_result_field_count(const fdf_result* r, int* count) {
  if (!r || !count) return fail(Errc::Config, "null argument");
  *count = int(r->res.finalFields.size());
  return FDF_OK;
}

fdf_status fdf_result_field_info(const fdf_result* r, int index,
                                 const char** name, int* comps,
                                 int64_t n[3]) {
  if (!r) return fail(Errc::Config, "null result");
  if (index < 0 || size_t(index) >= r->res.finalFields.size())
    return fail(Errc::Config, "field index out of range");
  const FieldDump& d = r->res.finalFields[size_t(index)];
  if (name) *name = d.name.c_str();
  if (comps) *comps = d.comps;
  if (n)
    for (int a = 0; a < 3; ++a) n[a] = d.n[a];
  return FDF_OK;
}

fdf_status fdf_result_field_data(const fdf_result* r, int index,
                                 const double** data, int64_t* count) {
  if (!r || !data) return fail(Errc::Config, "null argument");
  if (index < 0 || size_t(index) >= r->res.finalFields.size())
    return fail(Errc::Config, "field index out of range");
  const FieldDump& d = r->res.finalFields[size_t(index)];
  *data = d.data.data();
  if (count) *count = int64_t(d.data.size());
  return FDF_OK;
}

void fdf_result_free(fdf_result* r) { delete r; }

fdf_status fdf_compare_dumps(const char* path_a, const char* path_b,
                             double tol, char** report, int* pass) {
  if (!path_a || !path_b) return fail(Errc::Config, "null argument");
  if (tol < 0) return fail(Errc::Config, "negative tolerance");
  return guarded([&] {
    CompareReport rep =
        compare_dumps(load_dump(path_a), load_dump(path_b), tol);
    if (report) *report = dup_string(rep.to_text());
    if (pass) *pass = rep.pass ? 1 : 0;
    return FDF_OK;
  });
}

void fdf_string_free(char* s) { std::free(s); }

}  // extern "C"
