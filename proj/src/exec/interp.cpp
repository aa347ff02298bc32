#include "exec/interp.hpp"

#include <algorithm>

#include "support.hpp"

namespace fdfuse {

namespace {
constexpr int64_t kChunkTargetBytes = 32768;
}

void LaneRegs::prepare(const KernelProgram& prog, int vectorSize) {
  int64_t tpp = std::max<int64_t>(8, prog.temp_bytes_per_point());
  int64_t chunk = kChunkTargetBytes / tpp;
  chunk -= chunk % std::max(1, vectorSize);
  chunk_ = std::clamp<int64_t>(chunk, std::max(1, vectorSize), 4096);
  off_.clear();
  int64_t total = 0;
  for (int d : prog.regDims) {
    off_.push_back(total);
    total += int64_t(d) * chunk_;
  }
  buf_.assign(size_t(total), 0.0);
}

StepPlanes bind_planes(GridStore& gs, int64_t step) {
  StepPlanes pl;
  pl.src.reserve(gs.fields.size());
  pl.dst.reserve(gs.fields.size());
  for (FieldStore& f : gs.fields) {
    pl.src.push_back(f.src(step));
    pl.dst.push_back(f.dst(step));
  }
  return pl;
}

namespace {

// One op over chunk cells [cell0, cell0+nw). Field comps are recoverable from
// the op itself: componentwise ops carry them in dims, GRAD reads a scalar,
// DIV reads a meshDims vector.
inline void run_op(const KernelOp& op, const KernelProgram& prog,
                   const GridGeom& g, const StencilSet& st,
                   const StepPlanes& pl, LaneRegs& regs, double dt,
                   int64_t cell0, int64_t nw) {
  switch (op.op) {
    case KOp::VAR: {
      const double* s = op.fresh ? pl.dst[size_t(op.fieldId)] : pl.src[size_t(op.fieldId)];
      int d = op.dims;
      double* o = regs.reg(op.out);
      for (int64_t w = 0; w < nw; ++w)
        for (int c = 0; c < d; ++c) o[w * d + c] = s[(cell0 + w) * d + c];
      break;
    }
    case KOp::CONST: {
      int d = op.dims;
      double* o = regs.reg(op.out);
      for (int64_t w = 0; w < nw * d; ++w) o[w] = op.imm;
      break;
    }
    case KOp::ADD:
    case KOp::SUB:
    case KOp::TIMES: {
      int od = op.dims;
      const double* A = op.immSlot == 0 ? nullptr : regs.reg(op.in0);
      const double* B = op.immSlot == 1 ? nullptr : regs.reg(op.in1);
      int ad = A ? prog.regDims[size_t(op.in0)] : 1;
      int bd = B ? prog.regDims[size_t(op.in1)] : 1;
      double* o = regs.reg(op.out);
      for (int64_t w = 0; w < nw; ++w)
        for (int c = 0; c < od; ++c) {
          double a = A ? A[w * ad + (ad == 1 ? 0 : c)] : op.imm;
          double b = B ? B[w * bd + (bd == 1 ? 0 : c)] : op.imm;
          o[w * od + c] = op.op == KOp::ADD   ? a + b
                          : op.op == KOp::SUB ? a - b
                                              : a * b;
        }
      break;
    }
    case KOp::DER: {
      int comps = op.dims;
      const double* s = pl.src[size_t(op.fieldId)];
      const StencilCoeffs& sc = st.get(op.derivOrder, op.axis);
      int64_t stride = g.stride(op.axis) * comps;
      double* o = regs.reg(op.out);
      for (int64_t w = 0; w < nw; ++w)
        for (int c = 0; c < comps; ++c)
          o[w * comps + c] = stencil_axis(s, (cell0 + w) * comps + c, stride, sc);
      break;
    }
    case KOp::GRAD: {
      const double* s = pl.src[size_t(op.fieldId)];
      int od = op.dims;  // meshDims; source is scalar
      double* o = regs.reg(op.out);
      for (int64_t w = 0; w < nw; ++w)
        for (int c = 0; c < od; ++c)
          o[w * od + c] = stencil_axis(s, cell0 + w, g.stride(c), st.get(1, c));
      break;
    }
    case KOp::DIV: {
      const double* s = pl.src[size_t(op.fieldId)];
      int comps = g.dims;  // vector source, scalar result
      double* o = regs.reg(op.out);
      for (int64_t w = 0; w < nw; ++w) {
        double sum = 0.0;
        for (int a = 0; a < comps; ++a)
          sum += stencil_axis(s, (cell0 + w) * comps + a, g.stride(a) * comps,
                              st.get(1, a));
        o[w] = sum;
      }
      break;
    }
    case KOp::LAPLA: {
      int comps = op.dims;
      const double* s = pl.src[size_t(op.fieldId)];
      double* o = regs.reg(op.out);
      for (int64_t w = 0; w < nw; ++w)
        for (int c = 0; c < comps; ++c) {
          double sum = 0.0;
          for (int a = 0; a < g.dims; ++a)
            sum += stencil_axis(s, (cell0 + w) * comps + c,
                                g.stride(a) * comps, st.get(2, a));
          o[w * comps + c] = sum;
        }
      break;
    }
    case KOp::EULER_UPDATE: {
      int d = op.dims;
      const double* u = regs.reg(op.in0);
      const double* rhs = regs.reg(op.in1);
      double* dst = pl.dst[size_t(op.fieldId)];
      for (int64_t w = 0; w < nw; ++w)
        for (int c = 0; c < d; ++c)
          dst[(cell0 + w) * d + c] = euler_update(u[w * d + c], dt, rhs[w * d + c]);
      break;
    }
    case KOp::STORE: {
      int d = op.dims;
      const double* rhs = regs.reg(op.in0);
      double* dst = pl.dst[size_t(op.fieldId)];
      for (int64_t w = 0; w < nw; ++w)
        for (int c = 0; c < d; ++c) dst[(cell0 + w) * d + c] = rhs[w * d + c];
      break;
    }
  }
}

}  // namespace

void run_program_block(const KernelProgram& prog, const GridGeom& g,
                       const StencilSet& st, const StepPlanes& pl,
                       const BlockBox& box, LaneRegs& regs, double dt) {
  if (prog.ops.empty()) return;
  int64_t x0 = box.lo[0] - g.r;  // blocks never cut X: the ghost columns ride along
  int64_t x1 = box.hi[0] + g.r;
  int64_t chunk = regs.chunk();
  for (int64_t k = box.lo[2]; k < box.hi[2]; ++k)
    for (int64_t j = box.lo[1]; j < box.hi[1]; ++j) {
      int64_t base = g.row_base(j, k);
      for (int64_t cx = x0; cx < x1; cx += chunk) {
        int64_t nw = std::min(chunk, x1 - cx);
        int64_t cell0 = base + cx + g.r;
        for (const KernelOp& op : prog.ops)
          run_op(op, prog, g, st, pl, regs, dt, cell0, nw);
      }
    }
}

}  // namespace fdfuse
