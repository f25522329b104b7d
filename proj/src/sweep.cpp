#include "ergo/sweep.hpp"

#include "ergo/error.hpp"
#include "ergo/solver.hpp"

#include <algorithm>
#include <fstream>
#include <iomanip>
#include <numeric>
#include <set>
#include <sstream>

namespace ergo {

namespace {

using nlohmann::json;

Int int_field(const json& j, const std::string& where) {
  if (j.is_number_integer()) return Int(j.get<long long>());
  if (j.is_string()) {
    try {
      return Int(j.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw AnalysisError(ErrorKind::Fixture, where + " must be an integer");
}

FillTarget fill_from_json(const json& j, bool site) {
  if (!j.is_object())
    throw AnalysisError(ErrorKind::Fixture, "fill entries must be JSON objects");
  FillTarget t;
  t.is_site = site;
  if (site) {
    for (const char* key : {"fn", "block", "index"})
      if (!j.contains(key))
        throw AnalysisError(ErrorKind::Fixture, std::string("fill_values entry misses '") + key + "'");
    t.site = {j.at("fn").get<std::string>(), j.at("block").get<std::string>(),
              j.at("index").get<int>()};
  } else {
    if (!j.contains("base"))
      throw AnalysisError(ErrorKind::Fixture, "fill entry misses 'base'");
    t.base = int_field(j.at("base"), "fill base");
  }
  if (!j.contains("count"))
    throw AnalysisError(ErrorKind::Fixture, "fill entry misses 'count'");
  const auto& c = j.at("count");
  if (c.is_string())
    t.count_param = c.get<std::string>();
  else
    t.count = int_field(c, "fill count");
  return t;
}

/// Exact decimal when one exists, otherwise a 4-significant-digit
/// approximation marked with '~'. Tables are for reading; the JSON report
/// keeps the exact rationals.
std::string approx_string(const Rat& r) {
  std::string exact = rat_decimal_string(r);
  if (exact.find('/') == std::string::npos) return exact;
  std::ostringstream os;
  os << "~" << std::setprecision(4) << r.convert_to<double>();
  return os.str();
}

}  // namespace

SweepTemplate load_sweep_template(const std::string& text) {
  SweepTemplate tpl;
  tpl.base = load_fixture_json(text);  // validates the fixture part
  json j = json::parse(text);
  if (j.contains("fill"))
    for (const auto& e : j.at("fill")) tpl.fills.push_back(fill_from_json(e, false));
  if (j.contains("fill_values"))
    for (const auto& e : j.at("fill_values")) tpl.fills.push_back(fill_from_json(e, true));
  return tpl;
}

SweepTemplate load_sweep_template_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw AnalysisError(ErrorKind::Fixture, "cannot read fixture file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_sweep_template(ss.str());
}

std::vector<std::string> generator_names() {
  return {"zeros", "sorted", "reverse_sorted", "random_perm", "random_values"};
}

std::vector<Int> generate_values(const std::string& generator, const Int& count,
                                 std::mt19937_64& rng) {
  long n = count > 0 ? count.convert_to<long>() : 0;
  std::vector<Int> out;
  out.reserve(static_cast<std::size_t>(n));
  if (generator == "zeros") {
    out.assign(static_cast<std::size_t>(n), Int(0));
  } else if (generator == "sorted") {
    for (long k = 0; k < n; ++k) out.push_back(Int(k + 1));
  } else if (generator == "reverse_sorted") {
    for (long k = 0; k < n; ++k) out.push_back(Int(n - k));
  } else if (generator == "random_perm") {
    std::vector<long> perm(static_cast<std::size_t>(n));
    std::iota(perm.begin(), perm.end(), 0L);
    std::shuffle(perm.begin(), perm.end(), rng);
    for (long v : perm) out.push_back(Int(v));
  } else if (generator == "random_values") {
    std::uniform_int_distribution<long> dist(0, 999);
    for (long k = 0; k < n; ++k) out.push_back(Int(dist(rng)));
  } else {
    throw AnalysisError(ErrorKind::Fixture, "unknown input generator '" + generator + "'");
  }
  return out;
}

RunFixture instantiate(const SweepTemplate& tpl, const std::map<std::string, Int>& binding,
                       const std::string& generator, std::mt19937_64& rng) {
  RunFixture fx = tpl.base;
  for (const auto& t : tpl.fills) {
    Int count = t.count;
    if (t.count_param) {
      auto it = binding.find(*t.count_param);
      if (it == binding.end())
        throw AnalysisError(ErrorKind::Fixture,
                            "fill count parameter '" + *t.count_param + "' is not bound");
      count = it->second;
    }
    auto values = generate_values(generator, count, rng);
    if (t.is_site) {
      LoadSpec spec;
      spec.values = std::move(values);
      if (spec.values.empty()) spec.values.push_back(0);  // streams cycle, never run dry
      fx.loads[t.site] = std::move(spec);
    } else {
      Int addr = t.base;
      for (const auto& v : values) fx.cells[addr++] = v;
    }
  }
  return fx;
}

CompareReport run_compare(const Module& m, const AnalysisReport& analysis, const std::string& fn,
                          const std::vector<std::pair<std::string, std::pair<Int, Int>>>& ranges,
                          const SweepTemplate& tpl, const EnergyModel& model,
                          const CompareOptions& opts) {
  const Function* f = m.function(fn);
  if (!f) throw AnalysisError(ErrorKind::Eval, "no function @" + fn);
  for (const auto& p : f->params)
    if (std::none_of(ranges.begin(), ranges.end(), [&](const auto& r) { return r.first == p; }))
      throw AnalysisError(ErrorKind::Fixture, "no sweep range binds parameter " + p);
  std::set<std::string> seen;
  for (const auto& [name, bounds] : ranges) {
    if (std::find(f->params.begin(), f->params.end(), name) == f->params.end())
      throw AnalysisError(ErrorKind::Fixture, "@" + fn + " has no parameter " + name);
    if (!seen.insert(name).second)
      throw AnalysisError(ErrorKind::Fixture, "parameter " + name + " swept twice");
    if (bounds.second < bounds.first)
      throw AnalysisError(ErrorKind::Fixture, "empty sweep range for " + name);
  }

  const FunctionReport* fr = analysis.function(fn);
  if (!fr) throw AnalysisError(ErrorKind::Eval, "analysis carries no function @" + fn);

  CompareReport rep;
  rep.fn = fn;
  rep.model = analysis.model;
  rep.generator = opts.generator;
  rep.seed = opts.seed;
  rep.samples = opts.samples;
  if (fr->formula) {
    rep.source = "formula";
    rep.formula_text = fr->formula->text();
  } else {
    rep.source = "numeric";
  }

  std::mt19937_64 rng(opts.seed);
  std::map<std::string, Int> binding;
  Rat rel_sum = 0;

  // Odometer over the ranges, first range outermost.
  std::vector<Int> current;
  for (const auto& r : ranges) current.push_back(r.second.first);
  bool done = false;  // an empty range list still runs the single empty binding
  while (!done) {
    for (std::size_t i = 0; i < ranges.size(); ++i) binding[ranges[i].first] = current[i];
    for (int sample = 0; sample < opts.samples; ++sample) {
      RunFixture fx = instantiate(tpl, binding, opts.generator, rng);
      std::vector<Int> call_args;
      for (const auto& p : f->params) call_args.push_back(binding.at(p));
      RunResult run_res = run(m, fn, call_args, fx, model, opts.step_budget);

      Rat bound;
      if (fr->formula) {
        bound = cf_eval(*fr->formula, binding);
      } else {
        std::vector<Rat> num_args;
        for (const auto& v : call_args) num_args.push_back(Rat(v));
        bound = evaluate_numeric(analysis.crs, fr->entry_relation, num_args) +
                analysis.crs.constant;
      }

      ComparePoint pt;
      pt.args = binding;
      pt.sample = sample;
      pt.bound = bound;
      pt.interpreted = run_res.energy;
      pt.abs_gap = bound - run_res.energy;
      pt.rel_gap = run_res.energy == 0 ? Rat(0) : pt.abs_gap / run_res.energy;
      if (pt.abs_gap < 0) rep.bound_holds = false;
      if (rep.points.empty()) {
        rep.min_rel = rep.max_rel = pt.rel_gap;
      } else {
        rep.min_rel = std::min(rep.min_rel, pt.rel_gap);
        rep.max_rel = std::max(rep.max_rel, pt.rel_gap);
      }
      rel_sum += pt.rel_gap;
      rep.points.push_back(std::move(pt));
    }
    // Advance the odometer, last range fastest.
    std::size_t i = ranges.size();
    while (i > 0) {
      --i;
      if (current[i] < ranges[i].second.second) {
        ++current[i];
        break;
      }
      current[i] = ranges[i].second.first;
      if (i == 0) done = true;
    }
    if (ranges.empty()) done = true;
  }

  if (!rep.points.empty()) rep.mean_rel = rel_sum / Rat(rep.points.size());
  return rep;
}

std::string compare_text(const CompareReport& r) {
  std::ostringstream os;
  os << "compare @" << r.fn << " under " << r.model << " model (generator " << r.generator
     << ", seed " << r.seed << ", " << r.samples << " sample" << (r.samples == 1 ? "" : "s")
     << "/point)\n";
  if (r.source == "formula")
    os << "bound: " << r.formula_text << "\n";
  else
    os << "bound: numeric evaluation of the cost relations (no closed form)\n";
  std::vector<std::string> params;
  if (!r.points.empty())
    for (const auto& [p, v] : r.points.front().args) params.push_back(p);
  os << "\n";
  for (const auto& p : params) os << p << "\t";
  os << "sample\tbound\tinterpreted\tgap\trel\n";
  for (const auto& pt : r.points) {
    for (const auto& p : params) os << pt.args.at(p) << "\t";
    os << pt.sample << "\t" << approx_string(pt.bound) << "\t" << approx_string(pt.interpreted)
       << "\t" << approx_string(pt.abs_gap) << "\t" << approx_string(pt.rel_gap) << "\n";
  }
  os << "\nbound " << (r.bound_holds ? "holds" : "VIOLATED") << " over " << r.points.size()
     << " points; rel gap min " << approx_string(r.min_rel) << " max " << approx_string(r.max_rel)
     << " mean " << approx_string(r.mean_rel) << "\n";
  return os.str();
}

nlohmann::json compare_json(const CompareReport& r) {
  json points = json::array();
  for (const auto& pt : r.points) {
    json args = json::object();
    for (const auto& [p, v] : pt.args) args[p] = v.str();
    points.push_back({{"args", args},
                      {"sample", pt.sample},
                      {"bound", rat_string(pt.bound)},
                      {"interpreted", rat_string(pt.interpreted)},
                      {"abs_gap", rat_string(pt.abs_gap)},
                      {"rel_gap", rat_string(pt.rel_gap)}});
  }
  json j = {{"schema_version", r.schema_version},
            {"fn", r.fn},
            {"model", r.model},
            {"source", r.source},
            {"generator", r.generator},
            {"seed", r.seed},
            {"samples", r.samples},
            {"points", points},
            {"summary",
             {{"points", r.points.size()},
              {"bound_holds", r.bound_holds},
              {"min_rel_gap", rat_string(r.min_rel)},
              {"max_rel_gap", rat_string(r.max_rel)},
              {"mean_rel_gap", rat_string(r.mean_rel)}}}};
  if (r.source == "formula") j["formula"] = r.formula_text;
  return j;
}

}  // namespace ergo
