#include "ergo/ir.hpp"

#include "ergo/error.hpp"

#include <algorithm>
#include <set>
#include <sstream>

namespace ergo {

namespace {

struct OpcodeInfo {
  Opcode op;
  const char* name;
};

constexpr OpcodeInfo kOpcodes[] = {
    {Opcode::Add, "add"},         {Opcode::Sub, "sub"},
    {Opcode::Mul, "mul"},         {Opcode::SDiv, "sdiv"},
    {Opcode::SRem, "srem"},       {Opcode::Shl, "shl"},
    {Opcode::LShr, "lshr"},       {Opcode::And, "and"},
    {Opcode::Or, "or"},           {Opcode::Xor, "xor"},
    {Opcode::ICmpEq, "icmp-eq"},  {Opcode::ICmpNe, "icmp-ne"},
    {Opcode::ICmpSlt, "icmp-slt"}, {Opcode::ICmpSle, "icmp-sle"},
    {Opcode::ICmpSgt, "icmp-sgt"}, {Opcode::ICmpSge, "icmp-sge"},
    {Opcode::Select, "select"},
};

}  // namespace

const char* opcode_name(Opcode op) {
  for (const auto& info : kOpcodes)
    if (info.op == op) return info.name;
  return "?";
}

std::optional<Opcode> opcode_from_name(const std::string& name) {
  for (const auto& info : kOpcodes)
    if (name == info.name) return info.op;
  return std::nullopt;
}

bool is_icmp(Opcode op) {
  switch (op) {
    case Opcode::ICmpEq:
    case Opcode::ICmpNe:
    case Opcode::ICmpSlt:
    case Opcode::ICmpSle:
    case Opcode::ICmpSgt:
    case Opcode::ICmpSge:
      return true;
    default:
      return false;
  }
}

bool is_division(Opcode op) { return op == Opcode::SDiv || op == Opcode::SRem; }

int opcode_arity(Opcode op) { return op == Opcode::Select ? 3 : 2; }

bool is_terminator(const Instruction& inst) {
  return inst.is<CondBr>() || inst.is<Br>() || inst.is<Ret>();
}

std::optional<std::string> defined_var(const Instruction& inst) {
  if (const auto* phi = inst.as<Phi>()) return phi->dest;
  if (const auto* op = inst.as<Op>()) return op->dest;
  if (const auto* call = inst.as<Call>()) return call->dest;
  if (const auto* load = inst.as<MemLoad>()) return load->dest;
  return std::nullopt;
}

std::vector<Operand> used_operands(const Instruction& inst) {
  std::vector<Operand> out;
  if (const auto* phi = inst.as<Phi>()) {
    for (const auto& in : phi->incomings) out.push_back(in.value);
  } else if (const auto* op = inst.as<Op>()) {
    out = op->args;
  } else if (const auto* call = inst.as<Call>()) {
    out = call->args;
  } else if (const auto* br = inst.as<CondBr>()) {
    out.push_back(br->pred);
  } else if (const auto* ret = inst.as<Ret>()) {
    if (ret->value) out.push_back(*ret->value);
  }
  return out;
}

std::size_t BasicBlock::phi_count() const {
  std::size_t n = 0;
  while (n < insts.size() && insts[n].is<Phi>()) ++n;
  return n;
}

const Phi* BasicBlock::phi_for(const std::string& dest) const {
  for (std::size_t i = 0; i < phi_count(); ++i) {
    const auto* phi = insts[i].as<Phi>();
    if (phi->dest == dest) return phi;
  }
  return nullptr;
}

const BasicBlock* Function::block(const std::string& label) const {
  int idx = block_index(label);
  return idx < 0 ? nullptr : &blocks[idx];
}

int Function::block_index(const std::string& label) const {
  for (std::size_t i = 0; i < blocks.size(); ++i)
    if (blocks[i].label == label) return static_cast<int>(i);
  return -1;
}

const Function* Module::function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

const ExternalDecl* Module::external(const std::string& name) const {
  for (const auto& e : externals)
    if (e.name == name) return &e;
  return nullptr;
}

namespace {

std::vector<std::string> successor_labels(const Instruction& term) {
  if (const auto* br = term.as<Br>()) return {br->target};
  if (const auto* cbr = term.as<CondBr>()) return {cbr->then_label, cbr->else_label};
  return {};
}

void validate_function(const Module& m, const Function& f, std::vector<Violation>& out) {
  auto fail = [&](const std::string& where, const std::string& msg) {
    out.push_back({f.name + (where.empty() ? "" : ":" + where), msg});
  };

  if (f.blocks.empty()) {
    fail("", "function has no blocks");
    return;
  }

  std::set<std::string> labels;
  for (const auto& bb : f.blocks)
    if (!labels.insert(bb.label).second) fail(bb.label, "duplicate block label");

  // single static assignment across the whole function body, params included
  std::set<std::string> defined(f.params.begin(), f.params.end());
  if (defined.size() != f.params.size()) fail("", "duplicate parameter name");
  for (const auto& bb : f.blocks)
    for (const auto& inst : bb.insts)
      if (auto dest = defined_var(inst); dest && !defined.insert(*dest).second)
        fail(bb.label, "variable %" + *dest + " assigned more than once");

  // predecessor map for phi consistency
  std::map<std::string, std::vector<std::string>> preds;
  for (const auto& bb : f.blocks) {
    if (bb.insts.empty()) {
      fail(bb.label, "empty block");
      continue;
    }
    if (!is_terminator(bb.insts.back())) fail(bb.label, "block does not end in a terminator");
    for (std::size_t i = 0; i + 1 < bb.insts.size(); ++i)
      if (is_terminator(bb.insts[i])) fail(bb.label, "terminator before end of block");
    std::size_t phis = bb.phi_count();
    for (std::size_t i = phis; i < bb.insts.size(); ++i)
      if (bb.insts[i].is<Phi>()) fail(bb.label, "phi after non-phi instruction");
    for (const std::string& succ : successor_labels(bb.insts.back())) {
      if (f.block_index(succ) < 0)
        fail(bb.label, "branch to unknown block %" + succ);
      else
        preds[succ].push_back(bb.label);
    }
  }

  // operand scoping: every read of a variable must have *some* definition in
  // the function (SSA dominance is enforced dynamically by the interpreter)
  for (const auto& bb : f.blocks)
    for (const auto& inst : bb.insts)
      for (const auto& opnd : used_operands(inst))
        if (opnd.is_var() && !defined.count(opnd.var))
          fail(bb.label, "use of undefined variable %" + opnd.var);

  // phis: exactly one incoming per predecessor, no strays
  for (const auto& bb : f.blocks) {
    auto it = preds.find(bb.label);
    const std::vector<std::string> empty;
    const std::vector<std::string>& ps = it == preds.end() ? empty : it->second;
    for (std::size_t i = 0; i < bb.phi_count(); ++i) {
      const auto* phi = bb.insts[i].as<Phi>();
      std::set<std::string> seen;
      for (const auto& in : phi->incomings) {
        if (!seen.insert(in.pred).second)
          fail(bb.label, "phi %" + phi->dest + " repeats predecessor %" + in.pred);
        if (std::find(ps.begin(), ps.end(), in.pred) == ps.end())
          fail(bb.label, "phi %" + phi->dest + " names non-predecessor %" + in.pred);
      }
      for (const auto& p : ps)
        if (!seen.count(p))
          fail(bb.label, "phi %" + phi->dest + " missing incoming for predecessor %" + p);
    }
  }

  // calls: callee must exist; internal calls must match arity
  for (const auto& bb : f.blocks)
    for (const auto& inst : bb.insts)
      if (const auto* call = inst.as<Call>()) {
        if (const Function* callee = m.function(call->callee)) {
          if (callee->params.size() != call->args.size())
            fail(bb.label, "call to @" + call->callee + " with " +
                               std::to_string(call->args.size()) + " args, expected " +
                               std::to_string(callee->params.size()));
        } else if (!m.external(call->callee)) {
          fail(bb.label, "call to unknown function @" + call->callee);
        }
      }

  // reachability from the entry block
  std::set<std::string> reached;
  std::vector<std::string> work{f.entry()};
  while (!work.empty()) {
    std::string label = work.back();
    work.pop_back();
    if (!reached.insert(label).second) continue;
    if (const BasicBlock* bb = f.block(label); bb && !bb->insts.empty())
      for (const auto& succ : successor_labels(bb->insts.back()))
        if (f.block_index(succ) >= 0) work.push_back(succ);
  }
  for (const auto& bb : f.blocks)
    if (!reached.count(bb.label)) fail(bb.label, "block unreachable from entry");
}

}  // namespace

std::vector<Violation> validate(const Module& m) {
  std::vector<Violation> out;
  std::set<std::string> names;
  for (const auto& f : m.functions)
    if (!names.insert(f.name).second) out.push_back({f.name, "duplicate function name"});
  for (const auto& e : m.externals) {
    if (!names.insert(e.name).second) out.push_back({e.name, "duplicate function name"});
    if (e.cost < 0) out.push_back({e.name, "negative declared cost"});
  }
  for (const auto& f : m.functions) validate_function(m, f, out);
  return out;
}

void validate_or_throw(const Module& m) {
  auto violations = validate(m);
  if (violations.empty()) return;
  std::ostringstream os;
  os << violations.size() << " violation(s); first: " << violations.front().where << ": "
     << violations.front().message;
  throw AnalysisError(ErrorKind::Validation, os.str());
}

namespace {

std::string operand_text(const Operand& o) {
  return o.is_var() ? "%" + o.var : o.lit.str();
}

}  // namespace

std::string print_instruction(const Instruction& inst) {
  std::ostringstream os;
  if (const auto* phi = inst.as<Phi>()) {
    os << "%" << phi->dest << " = phi ";
    for (std::size_t i = 0; i < phi->incomings.size(); ++i) {
      if (i) os << ", ";
      os << "[ " << operand_text(phi->incomings[i].value) << ", %" << phi->incomings[i].pred
         << " ]";
    }
  } else if (const auto* op = inst.as<Op>()) {
    os << "%" << op->dest << " = ";
    if (is_icmp(op->op)) {
      std::string name = opcode_name(op->op);  // "icmp-eq" -> "icmp eq"
      os << "icmp " << name.substr(5);
    } else {
      os << opcode_name(op->op);
    }
    if (op->bits != 32) os << " i" << op->bits;
    for (std::size_t i = 0; i < op->args.size(); ++i)
      os << (i ? ", " : " ") << operand_text(op->args[i]);
  } else if (const auto* call = inst.as<Call>()) {
    if (call->dest) os << "%" << *call->dest << " = ";
    os << "call @" << call->callee << "(";
    for (std::size_t i = 0; i < call->args.size(); ++i)
      os << (i ? ", " : "") << operand_text(call->args[i]);
    os << ")";
  } else if (const auto* load = inst.as<MemLoad>()) {
    os << "%" << load->dest << " = memload";
  } else if (inst.is<MemStore>()) {
    os << "memstore";
  } else if (const auto* cbr = inst.as<CondBr>()) {
    os << "br " << operand_text(cbr->pred) << ", label %" << cbr->then_label << ", label %"
       << cbr->else_label;
  } else if (const auto* br = inst.as<Br>()) {
    os << "br label %" << br->target;
  } else if (const auto* ret = inst.as<Ret>()) {
    os << "ret";
    if (ret->value) os << " " << operand_text(*ret->value);
  }
  return os.str();
}

std::string print_module(const Module& m) {
  std::ostringstream os;
  for (const auto& e : m.externals)
    os << "declare @" << e.name << " cost " << rat_string(e.cost) << "\n";
  if (!m.externals.empty()) os << "\n";
  for (std::size_t fi = 0; fi < m.functions.size(); ++fi) {
    const Function& f = m.functions[fi];
    if (fi) os << "\n";
    os << "define @" << f.name << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) os << (i ? ", " : "") << "%" << f.params[i];
    os << ") {\n";
    for (const auto& bb : f.blocks) {
      os << bb.label << ":\n";
      for (const auto& inst : bb.insts) os << "  " << print_instruction(inst) << "\n";
    }
    os << "}\n";
  }
  return os.str();
}

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::IrreducibleLoop: return "IrreducibleLoop";
    case ErrorKind::OuterInductionMutated: return "OuterInductionMutated";
    case ErrorKind::Nondeterministic: return "Nondeterministic";
    case ErrorKind::NonTerminating: return "NonTerminating";
    case ErrorKind::DomainViolation: return "DomainViolation";
    case ErrorKind::Eval: return "EvalError";
    case ErrorKind::Model: return "ModelError";
    case ErrorKind::Fixture: return "FixtureError";
    case ErrorKind::Validation: return "ValidationFailed";
  }
  return "Error";
}

}  // namespace ergo
