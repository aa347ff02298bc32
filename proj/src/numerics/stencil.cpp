#include "numerics/stencil.hpp"

#include <cmath>

#include "support.hpp"

namespace fdfuse {
namespace {

// Canonical central-difference weights as integer numerators over a common
// denominator, so bound coefficients are exact rationals divided once by h^o.
struct Table {
  int num[9];
  int den;
};

// First derivative, acc = 2,4,6,8.
const Table kD1[4] = {
    {{-1, 0, 1, 0, 0, 0, 0, 0, 0}, 2},
    {{1, -8, 0, 8, -1, 0, 0, 0, 0}, 12},
    {{-1, 9, -45, 0, 45, -9, 1, 0, 0}, 60},
    {{3, -32, 168, -672, 0, 672, -168, 32, -3}, 840},
};

// Second derivative, acc = 2,4,6,8.
const Table kD2[4] = {
    {{1, -2, 1, 0, 0, 0, 0, 0, 0}, 1},
    {{-1, 16, -30, 16, -1, 0, 0, 0, 0}, 12},
    {{2, -27, 270, -490, 270, -27, 2, 0, 0}, 180},
    {{-9, 128, -1008, 8064, -14350, 8064, -1008, 128, -9}, 5040},
};

}  // namespace

StencilCoeffs stencil_coeffs(int derivOrder, int acc, double h) {
  if ((derivOrder != 1 && derivOrder != 2) ||
      (acc != 2 && acc != 4 && acc != 6 && acc != 8))
    throw Error(Errc::Config, "unsupported stencil order: derivOrder=" +
                                  std::to_string(derivOrder) + " acc=" + std::to_string(acc));
  const Table& t = (derivOrder == 1 ? kD1 : kD2)[acc / 2 - 1];
  StencilCoeffs sc;
  sc.derivOrder = derivOrder;
  sc.acc = acc;
  sc.r = acc / 2;
  double scale = derivOrder == 1 ? h : h * h;
  for (int k = 0; k < 2 * sc.r + 1; ++k)
    sc.c[k] = double(t.num[k]) / double(t.den) / scale;
  return sc;
}

StencilSet make_stencil_set(int acc, const double h[3], int dims) {
  StencilSet set;
  for (int axis = 0; axis < dims; ++axis) {
    set.d[0][axis] = stencil_coeffs(1, acc, h[axis]);
    set.d[1][axis] = stencil_coeffs(2, acc, h[axis]);
  }
  return set;
}

}  // namespace fdfuse
