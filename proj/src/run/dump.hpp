#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frontend/problem.hpp"
#include "grid/grid.hpp"

namespace fdfuse {

// One field as dumped: interior cells only, X fastest, components interleaved
// per point. File layout per field: one ASCII header line
//   field <name> dims=<comps> nx=<nx> ny=<ny> nz=<nz> step=<step> dt=<dt>
// followed immediately by nx*ny*nz*comps raw little-endian doubles.
struct FieldDump {
  std::string name;
  int comps = 1;
  int64_t n[3] = {1, 1, 1};
  int64_t step = 0;
  double dt = 0.0;
  std::vector<double> data;
};

// Extracts every field's interior from its step-`step` source plane.
std::vector<FieldDump> collect_dump(const GridStore& gs, const Problem& p,
                                    int64_t step);

void write_dump(const std::vector<FieldDump>& fields, const std::string& path);
std::vector<FieldDump> load_dump(const std::string& path);

struct CompareReport {
  bool pass = false;
  int64_t nValues = 0;
  double maxAbs = 0.0;
  double maxRel = 0.0;              // |a-b| / max(|a|,|b|)
  int64_t beyondTol = 0;
  std::string firstField;           // first mismatching field
  int64_t firstIndex = -1;          // flat index within that field's data
  double firstA = 0.0, firstB = 0.0;
  std::string to_text() const;
};

// tol = 0 compares bit patterns; tol > 0 bounds the absolute difference.
// Throws Error(Config) when field names/extents/steps don't line up.
CompareReport compare_dumps(const std::vector<FieldDump>& a,
                            const std::vector<FieldDump>& b, double tol);

}  // namespace fdfuse
