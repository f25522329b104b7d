#pragma once

#include "ergo/ir.hpp"
#include "ergo/symexpr.hpp"

namespace ergo {

/// How `srem` is summarized when the operands do not fold to constants.
/// The remainder of a nonnegative value by y lies in [0, y-1]; the three
/// approximations pick a representative from that interval, Exact keeps the
/// operation opaque.
enum class ModApprox {
  Exact,    // keep a mod node; evaluation stays precise
  Upper,    // y - 1
  Lower,    // 0
  Typical,  // (y - 1) / 2, the interval midpoint
};

const char* mod_approx_name(ModApprox m);

/// Symbolic value of `v` after `bb` runs, in terms of values at block entry.
/// Phi destinations of `bb` itself read as entry values; call and memory-load
/// results are Unknown. Variables not assigned in `bb` read as themselves.
SymExprPtr seval(const BasicBlock& bb, const std::string& v, ModApprox mode);
SymExprPtr seval(const BasicBlock& bb, const Operand& v, ModApprox mode);

}  // namespace ergo
