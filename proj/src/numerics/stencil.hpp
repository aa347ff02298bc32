#pragma once

#include <cstdint>

namespace fdfuse {

// Central-difference weights c_{-r..r} stored at c[k+r], already divided by
// h^derivOrder. radius r = acc/2; widest supported stencil is 9 points.
struct StencilCoeffs {
  int derivOrder = 0;
  int acc = 0;
  int r = 0;
  double c[9] = {};
};

// Throws Error(Config) for unsupported (derivOrder, acc).
StencilCoeffs stencil_coeffs(int derivOrder, int acc, double h);

// Per-point kernels. Every executor (tree walker, fused interpreter) funnels
// through these so per-point arithmetic order is identical everywhere.
inline double stencil_axis(const double* buf, int64_t idx, int64_t stride,
                           const StencilCoeffs& sc) {
  double s = 0.0;
  for (int k = -sc.r; k <= sc.r; ++k) s += sc.c[k + sc.r] * buf[idx + int64_t(k) * stride];
  return s;
}

inline double euler_update(double u, double dt, double rhs) { return u + dt * rhs; }

// Interleaved (point-major) component access: component i of the value at
// linear cell index idx lives at buf[idx*varDims + i].
inline const double* var(const double* buf, int64_t idx, int varDims) {
  return buf + idx * varDims;
}

// One bound stencil per (derivOrder, axis): axis spacing differs per axis.
struct StencilSet {
  StencilCoeffs d[2][3];  // [derivOrder-1][axis]
  const StencilCoeffs& get(int derivOrder, int axis) const { return d[derivOrder - 1][axis]; }
};

StencilSet make_stencil_set(int acc, const double h[3], int dims);

}  // namespace fdfuse
