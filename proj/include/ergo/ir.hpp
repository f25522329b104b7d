#pragma once

#include "ergo/numeric.hpp"

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace ergo {

/// Deterministic value-producing opcodes. Comparisons yield 0/1.
enum class Opcode {
  Add,
  Sub,
  Mul,
  SDiv,
  SRem,
  Shl,
  LShr,
  And,
  Or,
  Xor,
  ICmpEq,
  ICmpNe,
  ICmpSlt,
  ICmpSle,
  ICmpSgt,
  ICmpSge,
  Select,
};

const char* opcode_name(Opcode op);  // "add", "icmp-eq", "select", ...
std::optional<Opcode> opcode_from_name(const std::string& name);
bool is_icmp(Opcode op);
bool is_division(Opcode op);  // sdiv / srem
int opcode_arity(Opcode op);  // 3 for select, else 2

/// Variable/parameter reference (stored without the % sigil) or literal.
struct Operand {
  enum class Kind { Var, Lit };
  Kind kind = Kind::Lit;
  std::string var;
  Int lit = 0;

  static Operand variable(std::string name) {
    Operand o;
    o.kind = Kind::Var;
    o.var = std::move(name);
    return o;
  }
  static Operand literal(Int v) {
    Operand o;
    o.kind = Kind::Lit;
    o.lit = std::move(v);
    return o;
  }
  bool is_var() const { return kind == Kind::Var; }
  bool operator==(const Operand& other) const {
    return kind == other.kind && var == other.var && lit == other.lit;
  }
};

struct CondBr {
  Operand pred;  // taken branch when pred != 0
  std::string then_label;
  std::string else_label;
};

struct Br {
  std::string target;
};

struct Op {
  std::string dest;
  Opcode op = Opcode::Add;
  std::vector<Operand> args;
  int bits = 32;  // data-type tag; > 32 counts as wide for pricing
};

struct PhiIncoming {
  std::string pred;  // predecessor block label
  Operand value;
};

struct Phi {
  std::string dest;
  std::vector<PhiIncoming> incomings;
};

struct Call {
  std::optional<std::string> dest;  // absent for value-less calls
  std::string callee;
  std::vector<Operand> args;
};

struct MemLoad {
  std::string dest;  // address and value come from the run fixture
};

struct MemStore {};  // fully abstracted store; fixture decides the effect

struct Ret {
  std::optional<Operand> value;
};

struct Instruction {
  std::variant<Phi, Op, Call, MemLoad, MemStore, CondBr, Br, Ret> v;
  int line = 0;  // source line for diagnostics, 0 if synthesized

  template <class T>
  const T* as() const {
    return std::get_if<T>(&v);
  }
  template <class T>
  bool is() const {
    return std::holds_alternative<T>(v);
  }
};

bool is_terminator(const Instruction& inst);
/// Destination variable for Phi/Op/Call/MemLoad, nullopt otherwise.
std::optional<std::string> defined_var(const Instruction& inst);
/// Operands read by the instruction (phi incomings included).
std::vector<Operand> used_operands(const Instruction& inst);

struct BasicBlock {
  std::string label;
  std::vector<Instruction> insts;

  const Instruction& terminator() const { return insts.back(); }
  /// Number of leading phi instructions.
  std::size_t phi_count() const;
  const Phi* phi_for(const std::string& dest) const;
};

struct Function {
  std::string name;  // without the @ sigil
  std::vector<std::string> params;
  std::vector<BasicBlock> blocks;  // blocks[0] is the entry block

  const std::string& entry() const { return blocks.front().label; }
  const BasicBlock* block(const std::string& label) const;
  int block_index(const std::string& label) const;  // -1 if absent
};

/// External function declared with a constant energy cost (nanojoules).
struct ExternalDecl {
  std::string name;
  Rat cost;
};

struct Module {
  std::vector<Function> functions;
  std::vector<ExternalDecl> externals;

  const Function* function(const std::string& name) const;
  const ExternalDecl* external(const std::string& name) const;
};

/// One well-formedness violation; `where` names the function/block/line.
struct Violation {
  std::string where;
  std::string message;
};

/// Structural checks: block shape (phis first, exactly one trailing
/// terminator), single static assignment per function, operand scoping,
/// phi/predecessor consistency, label uniqueness, callee existence and arity,
/// reachability of every block from the entry.
std::vector<Violation> validate(const Module& m);

/// Throwing convenience wrapper around validate().
void validate_or_throw(const Module& m);

/// Canonical text form; parse(print(m)) reproduces the module.
std::string print_module(const Module& m);
std::string print_instruction(const Instruction& inst);

}  // namespace ergo
