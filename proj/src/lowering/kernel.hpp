#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "frontend/problem.hpp"

namespace fdfuse {

enum class KOp : uint8_t {
  VAR,           // load field components at the point
  CONST,         // materialize an immediate (bare-constant rhs only)
  ADD,
  SUB,
  TIMES,
  DER,           // stencil ops read a field buffer directly
  LAPLA,
  GRAD,
  DIV,
  EULER_UPDATE,  // dst[f] = u + dt * rhs
  STORE,         // dst[f] = rhs
};

struct KernelOp {
  KOp op = KOp::VAR;
  int out = -1;            // result register (-1 for terminators)
  int in0 = -1, in1 = -1;  // input registers
  double imm = 0.0;        // bound constant when immSlot >= 0
  int immSlot = -1;        // which operand of ADD/SUB/TIMES is the immediate
  int fieldId = -1;        // VAR/DER/LAPLA/GRAD/DIV source; EULER/STORE dest
  bool fresh = false;      // VAR: read this step's updated value (algebraic group)
  int axis = -1;           // DER
  int derivOrder = 0;      // DER
  int dims = 1;            // compile-time component count of the result
};

// Flat, CSE'd, single-assignment op sequence for one equation group. All dims
// are compile-time constants of the program; every register is written once.
struct KernelProgram {
  EqKind group = EqKind::TimeDerivative;
  std::vector<KernelOp> ops;
  std::vector<int> regDims;

  int64_t temp_bytes_per_point() const {
    int64_t b = 0;
    for (int d : regDims) b += int64_t(d) * 8;
    return b;
  }
};

struct Lowered {
  KernelProgram time;
  KernelProgram algebraic;
};

// Lowers the annotated, classified equations into the two fused programs.
// Common subtrees share registers across equations of the same group.
Lowered lower(const Problem& p);

// Deterministic one-line-per-op listing (golden-file testable).
std::string emit_listing(const KernelProgram& prog, const Problem& p);
std::string emit_listing(const Lowered& l, const Problem& p);

// Cost model: ops = scalar stencil applications (LAPLA counts meshDims per
// component, GRAD/DIV count meshDims); x/y measured from the non-stencil IR.
struct CostModel {
  int64_t ops = 0;
  int64_t x = 0;  // non-stencil memory accesses per point
  int64_t y = 0;  // non-stencil FLOP per point
  int64_t memPerPoint = 0;      // x + ops*(acc+1)
  int64_t flopPerPoint = 0;     // y + ops*(2*(acc+1)+1)
  int64_t stencilMem = 0;       // ops*(acc+1)
  int64_t stencilFlop = 0;      // ops*(2*(acc+1)+1)
};

CostModel cost_model(const KernelProgram& prog, int acc, int meshDims);
CostModel cost_model_total(const Lowered& l, int acc, int meshDims);

}  // namespace fdfuse
