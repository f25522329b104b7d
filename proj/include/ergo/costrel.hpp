#pragma once

#include "ergo/block_args.hpp"
#include "ergo/closed_form.hpp"
#include "ergo/energy.hpp"
#include "ergo/extract.hpp"
#include "ergo/ir.hpp"
#include "ergo/linear.hpp"
#include "ergo/seval.hpp"

#include <nlohmann/json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace ergo {

/// Call argument floor(num / div); div 1 means the plain affine form.
/// `amort` > 1 marks a value that reaches the floor only every amort-th
/// concrete step (a remainder summarized as its interval midpoint halves
/// over two steps, not one); loop counting multiplies by it.
struct CrArg {
  LinearForm num;
  Int div = 1;
  Int amort = 1;

  bool is_affine() const { return div == 1; }
  bool operator==(const CrArg& o) const {
    return div == o.div && amort == o.amort && num == o.num;
  }
  std::string text() const;
};

/// A call to another relation. A nullopt argument is a value the caller
/// cannot express (loop-computed, memory, or non-affine); the callee's cost
/// must not depend on that parameter for a closed form to exist.
struct CrCall {
  std::string name;
  std::vector<std::optional<CrArg>> args;
};

/// cost + sum(calls), applicable when every guard constraint holds.
/// An empty guard is unconditional. guard_exact records whether a branch
/// condition had to be dropped (non-affine), making the guard an
/// over-approximation.
struct CrEquation {
  Rat cost = 0;
  std::vector<CrCall> calls;
  std::vector<LinearConstraint> guard;
  bool guard_exact = true;
  std::string origin;  // "fn:block" the equation was generated from
};

struct CrRelation {
  std::string name;
  std::string fn;  // owning function
  std::vector<std::string> params;
  std::vector<CrEquation> equations;
};

struct CostRelationSystem {
  std::vector<CrRelation> relations;
  std::map<std::string, std::size_t> index;   // name -> position in relations
  std::map<std::string, std::string> entry;   // function name -> entry relation
  /// Facts about each function's parameters (default: all nonnegative).
  /// Used to discharge max(0, .) and domain obligations; never conjoined
  /// into guards.
  std::map<std::string, std::vector<LinearConstraint>> assumptions;
  /// Program-level cost charged once per run, outside every relation.
  Rat constant = 0;
  std::vector<std::string> warnings;

  const CrRelation* relation(const std::string& name) const;
};

struct CrOptions {
  /// Mode used to rewrite call/continuation arguments; guards always use
  /// exact evaluation (a non-affine guard is dropped, not approximated).
  ModApprox arg_mode = ModApprox::Typical;
  /// Assume every function parameter is nonnegative.
  bool default_assumptions = true;
  std::map<std::string, std::vector<LinearConstraint>> extra_assumptions;
};

/// One relation per block and per loop-call node, one equation per outgoing
/// edge (plus one base-case equation per loop exit edge); relation
/// parameters are the inferred block arguments.
CostRelationSystem generate_crs(const Module& m,
                                const std::map<std::string, ExtractedProgram>& programs,
                                const std::map<std::string, FunctionArgs>& args,
                                const EnergyModel& model, const CrOptions& opts = {});

std::string crs_text(const CostRelationSystem& sys);
nlohmann::json crs_json(const CostRelationSystem& sys);
CostRelationSystem crs_from_json(const nlohmann::json& j);

}  // namespace ergo
