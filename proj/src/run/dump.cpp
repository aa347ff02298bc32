#include "run/dump.hpp"

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <limits>
#include <sstream>

#include "support.hpp"

namespace fdfuse {

std::vector<FieldDump> collect_dump(const GridStore& gs, const Problem& p,
                                    int64_t step) {
  const GridGeom& g = gs.geom;
  std::vector<FieldDump> out;
  out.reserve(p.fields.size());
  for (size_t f = 0; f < p.fields.size(); ++f) {
    const FieldStore& fs = gs.fields[f];
    FieldDump d;
    d.name = fs.name;
    d.comps = fs.comps;
    for (int a = 0; a < 3; ++a) d.n[a] = g.n[a];
    d.step = step;
    d.dt = p.dt;
    d.data.resize(size_t(g.interior_cells() * fs.comps));
    const double* plane = fs.src(step);
    int64_t rowLen = g.n[0] * fs.comps;
    double* w = d.data.data();
    for (int64_t k = 0; k < g.n[2]; ++k)
      for (int64_t j = 0; j < g.n[1]; ++j) {
        std::memcpy(w, plane + g.idx(0, j, k) * fs.comps,
                    size_t(rowLen) * sizeof(double));
        w += rowLen;
      }
    out.push_back(std::move(d));
  }
  return out;
}

void write_dump(const std::vector<FieldDump>& fields,
                const std::string& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw Error(Errc::Io, "cannot open for writing: " + path);
  for (const FieldDump& d : fields) {
    char head[256];
    std::snprintf(head, sizeof head,
                  "field %s dims=%d nx=%" PRId64 " ny=%" PRId64 " nz=%" PRId64
                  " step=%" PRId64 " dt=%s\n",
                  d.name.c_str(), d.comps, d.n[0], d.n[1], d.n[2], d.step,
                  fmt_real(d.dt).c_str());
    os << head;
    os.write(reinterpret_cast<const char*>(d.data.data()),
             std::streamsize(d.data.size() * sizeof(double)));
  }
  os.flush();
  if (!os) throw Error(Errc::Io, "write failed: " + path);
}

namespace {

int64_t parse_header_i64(const std::string& line, const char* key) {
  std::string pat = std::string(key) + "=";
  size_t at = line.find(pat);
  if (at == std::string::npos)
    throw Error(Errc::Io, "dump header missing " + std::string(key));
  return std::strtoll(line.c_str() + at + pat.size(), nullptr, 10);
}

double parse_header_f64(const std::string& line, const char* key) {
  std::string pat = std::string(key) + "=";
  size_t at = line.find(pat);
  if (at == std::string::npos)
    throw Error(Errc::Io, "dump header missing " + std::string(key));
  return std::strtod(line.c_str() + at + pat.size(), nullptr);
}

}  // namespace

std::vector<FieldDump> load_dump(const std::string& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw Error(Errc::Io, "cannot open: " + path);
  std::vector<FieldDump> out;
  std::string line;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    if (line.rfind("field ", 0) != 0)
      throw Error(Errc::Io, "malformed dump header in " + path);
    FieldDump d;
    size_t nameEnd = line.find(' ', 6);
    if (nameEnd == std::string::npos)
      throw Error(Errc::Io, "malformed dump header in " + path);
    d.name = line.substr(6, nameEnd - 6);
    d.comps = int(parse_header_i64(line, "dims"));
    d.n[0] = parse_header_i64(line, "nx");
    d.n[1] = parse_header_i64(line, "ny");
    d.n[2] = parse_header_i64(line, "nz");
    d.step = parse_header_i64(line, "step");
    d.dt = parse_header_f64(line, "dt");
    if (d.comps < 1 || d.n[0] < 1 || d.n[1] < 1 || d.n[2] < 1)
      throw Error(Errc::Io, "bad dump extents in " + path);
    int64_t count = d.n[0] * d.n[1] * d.n[2] * d.comps;
    d.data.resize(size_t(count));
    is.read(reinterpret_cast<char*>(d.data.data()),
            std::streamsize(size_t(count) * sizeof(double)));
    if (is.gcount() != std::streamsize(size_t(count) * sizeof(double)))
      throw Error(Errc::Io, "truncated dump payload in " + path);
    out.push_back(std::move(d));
  }
  return out;
}

std::string CompareReport::to_text() const {
  std::ostringstream os;
  os << (pass ? "PASS" : "FAIL") << " values=" << nValues;
  char buf[64];
  std::snprintf(buf, sizeof buf, " max_abs=%.6g max_rel=%.6g", maxAbs, maxRel);
  os << buf;
  if (!pass && firstIndex >= 0) {
    std::snprintf(buf, sizeof buf, "%.17g", firstA);
    os << " first_mismatch=" << firstField << "[" << firstIndex << "] " << buf;
    std::snprintf(buf, sizeof buf, "%.17g", firstB);
    os << " vs " << buf << " beyond_tol=" << beyondTol;
  }
  os << "\n";
  return os.str();
}

CompareReport compare_dumps(const std::vector<FieldDump>& a,
                            const std::vector<FieldDump>& b, double tol) {
  if (a.size() != b.size())
    throw Error(Errc::Config, "dump field counts differ");
  CompareReport rep;
  rep.pass = true;
  for (size_t f = 0; f < a.size(); ++f) {
    const FieldDump& fa = a[f];
    const FieldDump& fb = b[f];
    if (fa.name != fb.name || fa.comps != fb.comps || fa.n[0] != fb.n[0] ||
        fa.n[1] != fb.n[1] || fa.n[2] != fb.n[2])
      throw Error(Errc::Config, "dump extents mismatch on field " + fa.name);
    rep.nValues += int64_t(fa.data.size());
    for (size_t i = 0; i < fa.data.size(); ++i) {
      double va = fa.data[i], vb = fb.data[i];
      bool mismatch;
      if (tol == 0.0) {
        uint64_t ba, bb;
        std::memcpy(&ba, &va, 8);
        std::memcpy(&bb, &vb, 8);
        mismatch = ba != bb;
      } else {
        mismatch = !(std::fabs(va - vb) <= tol);  // NaN counts as mismatch
      }
      double ad = std::fabs(va - vb);
      if (std::isnan(ad)) ad = std::numeric_limits<double>::infinity();
      if (ad > rep.maxAbs) rep.maxAbs = ad;
      double den = std::max(std::fabs(va), std::fabs(vb));
      if (den > 0) rep.maxRel = std::max(rep.maxRel, ad / den);
      if (mismatch) {
        ++rep.beyondTol;
        if (rep.firstIndex < 0) {
          rep.firstField = fa.name;
          rep.firstIndex = int64_t(i);
          rep.firstA = va;
          rep.firstB = vb;
        }
        rep.pass = false;
      }
    }
  }
  return rep;
}

}  // namespace fdfuse
