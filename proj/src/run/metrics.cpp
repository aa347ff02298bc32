#include "run/metrics.hpp"

#include <cinttypes>
#include <cstdio>
#include <cstdlib>
#include <map>
#include <sstream>

#include "support.hpp"

namespace fdfuse {

namespace {

std::string fmt_f(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_f(const std::vector<double>& v) {
  std::string s;
  for (size_t i = 0; i < v.size(); ++i) {
    if (i) s += ',';
    s += fmt_f(v[i]);
  }
  return s;
}

std::vector<double> split_f(const std::string& s) {
  std::vector<double> out;
  size_t at = 0;
  while (at < s.size()) {
    size_t end = s.find(',', at);
    if (end == std::string::npos) end = s.size();
    out.push_back(std::strtod(s.substr(at, end - at).c_str(), nullptr));
    at = end + 1;
  }
  return out;
}

}  // namespace

std::string metrics_kv(const Metrics& m) {
  std::ostringstream os;
  os << "spec=" << m.spec << "\n";
  os << "mode=" << m.mode << "\n";
  os << "transport=" << m.transport << "\n";
  os << "steps=" << m.steps << "\n";
  os << "interior_points=" << m.interiorPoints << "\n";
  os << "threads=" << m.nThreads << "\n";
  os << "ranks=" << m.nRanks << "\n";
  os << "nbl_x=" << m.nbl[0] << "\n";
  os << "nbl_y=" << m.nbl[1] << "\n";
  os << "nbl_z=" << m.nbl[2] << "\n";
  os << "working_set_bytes=" << m.workingSetBytes << "\n";
  os << "blocking_fallback=" << (m.blockingFallback ? 1 : 0) << "\n";
  os << "init_s=" << fmt_f(m.initS) << "\n";
  os << "compute_s=" << fmt_f(m.computeS) << "\n";
  os << "exchange_s=" << fmt_f(m.exchangeS) << "\n";
  os << "gather_s=" << fmt_f(m.gatherS) << "\n";
  os << "total_s=" << fmt_f(m.totalS) << "\n";
  os << "mpoints_per_s=" << fmt_f(m.mpointsPerSec) << "\n";
  os << "flop_per_point=" << m.flopPerPoint << "\n";
  os << "mem_per_point=" << m.memPerPoint << "\n";
  os << "total_gflop=" << fmt_f(m.totalGFlop) << "\n";
  os << "total_gbytes=" << fmt_f(m.totalGBytes) << "\n";
  os << "a_tasks=" << m.aTasks << "\n";
  os << "b_tasks=" << m.bTasks << "\n";
  os << "c_tasks=" << m.cTasks << "\n";
  os << "lane_busy_s=" << join_f(m.laneBusyS) << "\n";
  os << "lane_wall_s=" << fmt_f(m.laneWallS) << "\n";
  os << "bytes_sent=" << m.bytesSent << "\n";
  os << "bytes_recv=" << m.bytesRecv << "\n";
  os << "note=" << m.note << "\n";
  return os.str();
}

Metrics parse_metrics_kv(const std::string& text) {
  std::map<std::string, std::string> kv;
  std::istringstream is(text);
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(Errc::Io, "malformed metrics line: " + line);
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  auto s = [&](const char* k) { return kv.count(k) ? kv[k] : std::string(); };
  auto i = [&](const char* k) -> int64_t {
    return kv.count(k) ? std::strtoll(kv[k].c_str(), nullptr, 10) : 0;
  };
  auto f = [&](const char* k) -> double {
    return kv.count(k) ? std::strtod(kv[k].c_str(), nullptr) : 0.0;
  };
  Metrics m;
  m.spec = s("spec");
  m.mode = s("mode");
  m.transport = s("transport");
  m.steps = i("steps");
  m.interiorPoints = i("interior_points");
  m.nThreads = int(i("threads"));
  m.nRanks = i("ranks");
  m.nbl[0] = i("nbl_x");
  m.nbl[1] = i("nbl_y");
  m.nbl[2] = i("nbl_z");
  m.workingSetBytes = i("working_set_bytes");
  m.blockingFallback = i("blocking_fallback") != 0;
  m.initS = f("init_s");
  m.computeS = f("compute_s");
  m.exchangeS = f("exchange_s");
  m.gatherS = f("gather_s");
  m.totalS = f("total_s");
  m.mpointsPerSec = f("mpoints_per_s");
  m.flopPerPoint = i("flop_per_point");
  m.memPerPoint = i("mem_per_point");
  m.totalGFlop = f("total_gflop");
  m.totalGBytes = f("total_gbytes");
  m.aTasks = i("a_tasks");
  m.bTasks = i("b_tasks");
  m.cTasks = i("c_tasks");
  m.laneBusyS = split_f(s("lane_busy_s"));
  m.laneWallS = f("lane_wall_s");
  m.bytesSent = i("bytes_sent");
  m.bytesRecv = i("bytes_recv");
  m.note = s("note");
  return m;
}

std::string metrics_table(const Metrics& m) {
  std::ostringstream os;
  char buf[160];
  auto row = [&](const char* k, const std::string& v) {
    std::snprintf(buf, sizeof buf, "  %-22s %s\n", k, v.c_str());
    os << buf;
  };
  auto fsec = [&](double v) {
    std::snprintf(buf, sizeof buf, "%.3f s", v);
    return std::string(buf);
  };
  os << "run metrics\n";
  row("spec", m.spec);
  row("mode", m.mode + (m.transport.empty() ? "" : " (" + m.transport + ")"));
  {
    std::snprintf(buf, sizeof buf, "%" PRId64 " step%s over %" PRId64
                  " interior points", m.steps, m.steps == 1 ? "" : "s",
                  m.interiorPoints);
    row("work", buf);
  }
  {
    std::snprintf(buf, sizeof buf,
                  "%d thread%s, %" PRId64 " rank%s, blocks %" PRId64
                  "x%" PRId64 "x%" PRId64 "%s",
                  m.nThreads, m.nThreads == 1 ? "" : "s", m.nRanks,
                  m.nRanks == 1 ? "" : "s", m.nbl[0], m.nbl[1], m.nbl[2],
                  m.blockingFallback ? " (fallback)" : "");
    row("layout", buf);
  }
  {
    std::snprintf(buf, sizeof buf, "%.1f KiB per block",
                  double(m.workingSetBytes) / 1024.0);
    row("working set", buf);
  }
  row("init", fsec(m.initS));
  row("compute", fsec(m.computeS));
  if (m.exchangeS > 0 || m.nRanks > 1) row("exchange", fsec(m.exchangeS));
  if (m.gatherS > 0 || m.nRanks > 1) row("gather", fsec(m.gatherS));
  row("total", fsec(m.totalS));
  {
    std::snprintf(buf, sizeof buf, "%.2f", m.mpointsPerSec);
    row("Mpoints/s", buf);
  }
  {
    std::snprintf(buf, sizeof buf,
                  "%" PRId64 " flop, %" PRId64 " mem accesses / point; "
                  "%.3f GFLOP, %.3f GB moved",
                  m.flopPerPoint, m.memPerPoint, m.totalGFlop, m.totalGBytes);
    row("cost model", buf);
  }
  if (m.aTasks > 0) {
    std::snprintf(buf, sizeof buf,
                  "A=%" PRId64 " B=%" PRId64 " C=%" PRId64, m.aTasks,
                  m.bTasks, m.cTasks);
    row("tasks", buf);
    for (size_t l = 0; l < m.laneBusyS.size(); ++l) {
      double busy = m.laneBusyS[l];
      double idle = m.laneWallS > busy ? m.laneWallS - busy : 0.0;
      std::snprintf(buf, sizeof buf, "busy %.3f s, idle %.3f s", busy, idle);
      char key[32];
      std::snprintf(key, sizeof key, "lane %zu", l);
      row(key, buf);
    }
  }
  if (m.bytesSent > 0 || m.bytesRecv > 0 || m.nRanks > 1) {
    std::snprintf(buf, sizeof buf, "%" PRId64 " sent, %" PRId64 " received",
                  m.bytesSent, m.bytesRecv);
    row("comm bytes", buf);
  }
  if (!m.note.empty()) row("note", m.note);
  return os.str();
}

}  // namespace fdfuse
