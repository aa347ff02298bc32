#include "lowering/kernel.hpp"

#include <bit>
#include <map>
#include <set>
#include <sstream>
#include <tuple>

#include "eqtree/tree.hpp"
#include "support.hpp"

namespace fdfuse {
namespace {

// Structural value-numbering key. Two ops with equal keys compute the same
// value, so the second one reuses the first register (works across equations
// of the same group because the programs are fused).
using CseKey = std::tuple<int /*op*/, int /*in0*/, int /*in1*/,
                          uint64_t /*imm bits*/, int /*immSlot*/,
                          int /*fieldId*/, int /*fresh*/, int /*axis*/,
                          int /*derivOrder*/>;

struct Val {
  bool isConst = false;
  double v = 0.0;
  int reg = -1;
};

class Lowering {
 public:
  Lowering(const Problem& p, EqKind group) : p_(p) { prog_.group = group; }

  int emit(KernelOp op) {
    CseKey key{int(op.op), op.in0,    op.in1,
               std::bit_cast<uint64_t>(op.imm), op.immSlot, op.fieldId,
               op.fresh ? 1 : 0,      op.axis,  op.derivOrder};
    auto it = cse_.find(key);
    if (it != cse_.end()) return it->second;
    op.out = int(prog_.regDims.size());
    prog_.regDims.push_back(op.dims);
    prog_.ops.push_back(op);
    cse_.emplace(key, op.out);
    return op.out;
  }

  void terminate(KernelOp op) {
    op.out = -1;
    prog_.ops.push_back(op);
  }

  Val lower_node(const Tree& t, int ni, const std::set<int>& updated) {
    const TreeNode& n = t.at(ni);
    switch (n.op) {
      case Op::Const:
        return Val{true, n.value, -1};
      case Op::Field: {
        KernelOp op;
        op.op = KOp::VAR;
        op.fieldId = n.fieldId;
        op.fresh = updated.count(n.fieldId) != 0;
        op.dims = n.dims;
        return Val{false, 0.0, emit(op)};
      }
      case Op::Der:
      case Op::Grad:
      case Op::Div:
      case Op::Lapla: {
        const TreeNode& arg = t.at(n.a);
        KernelOp op;
        switch (n.op) {
          case Op::Der: op.op = KOp::DER; break;
          case Op::Grad: op.op = KOp::GRAD; break;
          case Op::Div: op.op = KOp::DIV; break;
          default: op.op = KOp::LAPLA; break;
        }
        op.fieldId = arg.fieldId;
        op.axis = n.axis;
        op.derivOrder = n.derivOrder;
        op.dims = n.dims;
        return Val{false, 0.0, emit(op)};
      }
      case Op::Add:
      case Op::Sub:
      case Op::Times: {
        Val a = lower_node(t, n.a, updated);
        Val b = lower_node(t, n.b, updated);
        if (a.isConst && b.isConst) {
          double v = n.op == Op::Add   ? a.v + b.v
                     : n.op == Op::Sub ? a.v - b.v
                                       : a.v * b.v;
          return Val{true, v, -1};
        }
        KernelOp op;
        op.op = n.op == Op::Add ? KOp::ADD : n.op == Op::Sub ? KOp::SUB : KOp::TIMES;
        op.dims = n.dims;
        if (a.isConst) {
          op.imm = a.v;
          op.immSlot = 0;
          op.in1 = b.reg;
        } else if (b.isConst) {
          op.imm = b.v;
          op.immSlot = 1;
          op.in0 = a.reg;
        } else {
          op.in0 = a.reg;
          op.in1 = b.reg;
        }
        return Val{false, 0.0, emit(op)};
      }
    }
    throw Error(Errc::Internal, "unlowerable tree node");
  }

  int materialize(Val v, int dims) {
    if (!v.isConst) return v.reg;
    KernelOp op;
    op.op = KOp::CONST;
    op.imm = v.v;
    op.dims = dims;
    return emit(op);
  }

  KernelProgram take() { return std::move(prog_); }

 private:
  const Problem& p_;
  KernelProgram prog_;
  std::map<CseKey, int> cse_;
};

}  // namespace

Lowered lower(const Problem& p) {
  Lowered out;
  std::set<int> noneFresh;

  // Time-derivative group: every pointwise read sees start-of-step state.
  {
    Lowering lw(p, EqKind::TimeDerivative);
    for (const Equation& eq : p.equations) {
      if (eq.kind != EqKind::TimeDerivative) continue;
      int comps = p.fields[eq.lhsField].comps;
      KernelOp u;
      u.op = KOp::VAR;
      u.fieldId = eq.lhsField;
      u.dims = comps;
      int uReg = lw.emit(u);
      Val rhs = lw.lower_node(eq.rhs, eq.rhs.root, noneFresh);
      int rhsReg = lw.materialize(rhs, eq.rhs.at(eq.rhs.root).dims);
      KernelOp term;
      term.op = KOp::EULER_UPDATE;
      term.fieldId = eq.lhsField;
      term.in0 = uReg;
      term.in1 = rhsReg;
      term.dims = comps;
      lw.terminate(term);
    }
    out.time = lw.take();
  }

  // Algebraic group runs after the time group, so pointwise reads of fields
  // updated earlier this step (any dt lhs, or an algebraic lhs stored by a
  // preceding equation) take the fresh value. Stencil reads never do.
  {
    Lowering lw(p, EqKind::Algebraic);
    std::set<int> updated;
    for (const Equation& eq : p.equations)
      if (eq.kind == EqKind::TimeDerivative) updated.insert(eq.lhsField);
    for (const Equation& eq : p.equations) {
      if (eq.kind != EqKind::Algebraic) continue;
      Val rhs = lw.lower_node(eq.rhs, eq.rhs.root, updated);
      int rhsReg = lw.materialize(rhs, eq.rhs.at(eq.rhs.root).dims);
      KernelOp term;
      term.op = KOp::STORE;
      term.fieldId = eq.lhsField;
      term.in0 = rhsReg;
      term.dims = p.fields[eq.lhsField].comps;
      lw.terminate(term);
      updated.insert(eq.lhsField);
    }
    out.algebraic = lw.take();
  }
  return out;
}

namespace {

const char* kop_name(KOp op) {
  switch (op) {
    case KOp::VAR: return "VAR";
    case KOp::CONST: return "CONST";
    case KOp::ADD: return "ADD";
    case KOp::SUB: return "SUB";
    case KOp::TIMES: return "TIMES";
    case KOp::DER: return "DER";
    case KOp::LAPLA: return "LAPLA";
    case KOp::GRAD: return "GRAD";
    case KOp::DIV: return "DIV";
    case KOp::EULER_UPDATE: return "EULER_UPDATE";
    case KOp::STORE: return "STORE";
  }
  return "?";
}

const char* group_name(EqKind g) {
  return g == EqKind::TimeDerivative ? "time" : "algebraic";
}

}  // namespace

std::string emit_listing(const KernelProgram& prog, const Problem& p) {
  std::ostringstream os;
  os << "program " << group_name(prog.group);
  if (prog.ops.empty()) {
    os << " <empty>\n";
    return os.str();
  }
  os << " regs=" << prog.regDims.size()
     << " temp_bytes=" << prog.temp_bytes_per_point() << "\n";
  for (const KernelOp& op : prog.ops) {
    os << "  ";
    switch (op.op) {
      case KOp::VAR:
        os << "r" << op.out << " = VAR " << p.fields[op.fieldId].name
           << " dims=" << op.dims;
        if (op.fresh) os << " fresh";
        break;
      case KOp::CONST:
        os << "r" << op.out << " = CONST " << fmt_real(op.imm)
           << " dims=" << op.dims;
        break;
      case KOp::ADD:
      case KOp::SUB:
      case KOp::TIMES: {
        os << "r" << op.out << " = " << kop_name(op.op) << " ";
        if (op.immSlot == 0)
          os << fmt_real(op.imm) << " r" << op.in1;
        else if (op.immSlot == 1)
          os << "r" << op.in0 << " " << fmt_real(op.imm);
        else
          os << "r" << op.in0 << " r" << op.in1;
        os << " dims=" << op.dims;
        break;
      }
      case KOp::DER:
        os << "r" << op.out << " = DER " << p.fields[op.fieldId].name
           << " axis=" << "xyz"[op.axis] << " order=" << op.derivOrder
           << " dims=" << op.dims;
        break;
      case KOp::GRAD:
      case KOp::DIV:
      case KOp::LAPLA:
        os << "r" << op.out << " = " << kop_name(op.op) << " "
           << p.fields[op.fieldId].name << " dims=" << op.dims;
        break;
      case KOp::EULER_UPDATE:
        os << "EULER_UPDATE " << p.fields[op.fieldId].name << " u=r" << op.in0
           << " rhs=r" << op.in1;
        break;
      case KOp::STORE:
        os << "STORE " << p.fields[op.fieldId].name << " r" << op.in0;
        break;
    }
    os << "\n";
  }
  return os.str();
}

std::string emit_listing(const Lowered& l, const Problem& p) {
  return emit_listing(l.time, p) + emit_listing(l.algebraic, p);
}

CostModel cost_model(const KernelProgram& prog, int acc, int meshDims) {
  CostModel cm;
  for (const KernelOp& op : prog.ops) {
    switch (op.op) {
      case KOp::VAR: cm.x += op.dims; break;
      case KOp::CONST: break;
      case KOp::ADD:
      case KOp::SUB:
      case KOp::TIMES: cm.y += op.dims; break;
      case KOp::DER: cm.ops += op.dims; break;
      case KOp::LAPLA: cm.ops += int64_t(meshDims) * op.dims; break;
      case KOp::GRAD:
      case KOp::DIV: cm.ops += meshDims; break;
      case KOp::EULER_UPDATE:
        cm.x += op.dims;      // write of the updated value
        cm.y += 2 * int64_t(op.dims);  // mul + add
        break;
      case KOp::STORE: cm.x += op.dims; break;
    }
  }
  cm.stencilMem = cm.ops * (acc + 1);
  cm.stencilFlop = cm.ops * (2 * (acc + 1) + 1);
  cm.memPerPoint = cm.x + cm.stencilMem;
  cm.flopPerPoint = cm.y + cm.stencilFlop;
  return cm;
}

CostModel cost_model_total(const Lowered& l, int acc, int meshDims) {
  CostModel a = cost_model(l.time, acc, meshDims);
  CostModel b = cost_model(l.algebraic, acc, meshDims);
  CostModel t;
  t.ops = a.ops + b.ops;
  t.x = a.x + b.x;
  t.y = a.y + b.y;
  t.stencilMem = a.stencilMem + b.stencilMem;
  t.stencilFlop = a.stencilFlop + b.stencilFlop;
  t.memPerPoint = a.memPerPoint + b.memPerPoint;
  t.flopPerPoint = a.flopPerPoint + b.flopPerPoint;
  return t;
}

}  // namespace fdfuse
