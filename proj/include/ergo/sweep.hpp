#pragma once

#include "ergo/closed_form.hpp"
#include "ergo/interp.hpp"
#include "ergo/pipeline.hpp"

#include <nlohmann/json.hpp>

#include <cstdint>
#include <map>
#include <random>
#include <string>
#include <utility>
#include <vector>

namespace ergo {

inline constexpr std::uint64_t kDefaultSeed = 1729;

/// One slot a generator fills per sweep point: either the memory range
/// cells[base .. base+count-1] or the literal value stream of a load site.
struct FillTarget {
  bool is_site = false;
  Int base = 0;                            // range target
  SiteKey site;                            // stream target
  std::optional<std::string> count_param;  // count read from the sweep binding
  Int count = 0;                           // or fixed here
};

/// A fixture plus generator-filled targets. The JSON is the plain fixture
/// shape extended by two sections the fixture loader ignores:
///   "fill":        [{"base": 0, "count": "P" | 7}]
///   "fill_values": [{"fn": ..., "block": ..., "index": ..., "count": "P" | 7}]
struct SweepTemplate {
  RunFixture base;
  std::vector<FillTarget> fills;
};

SweepTemplate load_sweep_template(const std::string& text);
SweepTemplate load_sweep_template_file(const std::string& path);

/// Named input builders; `count` values each:
///   zeros           0, 0, ...
///   sorted          1, 2, ..., count
///   reverse_sorted  count, count-1, ..., 1
///   random_perm     a shuffle of 0 .. count-1
///   random_values   independent draws from [0, 999]
std::vector<std::string> generator_names();
std::vector<Int> generate_values(const std::string& generator, const Int& count,
                                 std::mt19937_64& rng);

/// The template instantiated at one sweep point: fixed parts copied, every
/// fill target populated by the generator.
RunFixture instantiate(const SweepTemplate& tpl, const std::map<std::string, Int>& binding,
                       const std::string& generator, std::mt19937_64& rng);

struct ComparePoint {
  std::map<std::string, Int> args;
  int sample = 0;
  Rat bound = 0;        // closed form (or numeric fallback) value
  Rat interpreted = 0;  // concrete run's energy
  Rat abs_gap = 0;      // bound - interpreted
  Rat rel_gap = 0;      // abs_gap / interpreted, 0 when interpreted is 0
};

struct CompareReport {
  int schema_version = 1;
  std::string fn;
  std::string model;
  std::string source;        // "formula" or "numeric"
  std::string formula_text;  // empty when numeric
  std::string generator;
  std::uint64_t seed = kDefaultSeed;
  int samples = 1;
  std::vector<ComparePoint> points;
  bool bound_holds = true;  // bound >= interpreted at every point
  Rat min_rel = 0, max_rel = 0, mean_rel = 0;
};

struct CompareOptions {
  std::string generator = "zeros";
  int samples = 1;  // runs per sweep point (fresh generator draws each)
  std::uint64_t seed = kDefaultSeed;
  long step_budget = kDefaultStepBudget;
};

/// Sweeps `ranges` (inclusive bounds, cartesian product in the given order;
/// together they must bind every parameter of `fn`), instantiates the
/// template at each point, prices a concrete run, and compares against the
/// function's closed form — or, when the entry relation has no closed form,
/// against worst-mode numeric evaluation of the cost relations. Evaluating
/// the form outside its validity domain is an error, not a silent point.
CompareReport run_compare(const Module& m, const AnalysisReport& analysis, const std::string& fn,
                          const std::vector<std::pair<std::string, std::pair<Int, Int>>>& ranges,
                          const SweepTemplate& tpl, const EnergyModel& model,
                          const CompareOptions& opts = {});

std::string compare_text(const CompareReport& r);
nlohmann::json compare_json(const CompareReport& r);

}  // namespace ergo
