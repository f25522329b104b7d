#include "ergo/pipeline.hpp"

#include "ergo/cfg.hpp"
#include "ergo/error.hpp"

#include <sstream>
#include <utility>

namespace ergo {

namespace {

/// Blocks priced as straight-line code even though a select discards one
/// operand: flagged when selects make up at least half of the computational
/// (non-phi, non-terminator) instructions, since the formula then leans on
/// work that a predicated machine would skip.
std::vector<std::string> select_heavy_blocks(const Module& m) {
  std::vector<std::string> out;
  for (const auto& f : m.functions)
    for (const auto& bb : f.blocks) {
      int selects = 0;
      int computational = 0;
      for (const auto& inst : bb.insts) {
        if (inst.is<Phi>() || is_terminator(inst)) continue;
        ++computational;
        if (const auto* op = inst.as<Op>(); op && op->op == Opcode::Select) ++selects;
      }
      if (selects >= 1 && 2 * selects >= computational)
        out.push_back(f.name + ":" + bb.label + ": " + std::to_string(selects) + " of " +
                      std::to_string(computational) +
                      " computational instructions are select; both alternatives are priced");
    }
  return out;
}

}  // namespace

const FunctionReport* AnalysisReport::function(const std::string& name) const {
  for (const auto& f : functions)
    if (f.name == name) return &f;
  return nullptr;
}

AnalysisReport analyze_module(const Module& m, const EnergyModel& model, const CrOptions& opts) {
  validate_or_throw(m);
  auto programs = extract_module(m);
  auto args = infer_module_args(m, programs);
  auto sys = generate_crs(m, programs, args, model, opts);
  auto outcome = solve(sys);

  AnalysisReport r;
  r.model = model_kind(model);
  r.warnings = sys.warnings;
  for (const auto& w : outcome.warnings) r.warnings.push_back(w);
  for (const auto& [fn, prog] : programs)
    for (const auto& u : prog.units)
      for (const auto& note : u.notes) r.warnings.push_back(fn + " unit " + u.name + ": " + note);
  for (const auto& [fn, fa] : args)
    for (const auto& note : fa.notes) r.warnings.push_back(fn + ": " + note);
  for (auto& w : select_heavy_blocks(m)) r.warnings.push_back(std::move(w));
  for (const auto& [rel, why] : outcome.unsolved)
    r.warnings.push_back("relation " + rel + " has no closed form (" + why +
                         "); numeric fallback: simulate or compare still evaluate it");

  for (const auto& f : m.functions) {
    FunctionReport fr;
    fr.name = f.name;
    fr.params = f.params;
    fr.entry_relation = sys.entry.at(f.name);
    if (auto it = outcome.entry_forms.find(f.name); it != outcome.entry_forms.end())
      fr.formula = it->second;
    for (const auto& [rel, why] : outcome.unsolved) {
      const CrRelation* cr = sys.relation(rel);
      if (cr && cr->fn == f.name) fr.unsolved.emplace(rel, why);
    }
    r.functions.push_back(std::move(fr));
  }

  r.args = std::move(args);
  r.crs = std::move(sys);
  r.outcome = std::move(outcome);
  return r;
}

std::string report_text(const AnalysisReport& r) {
  std::ostringstream os;
  os << "energy analysis report (schema " << r.schema_version << ", model " << r.model << ")\n";
  for (const auto& f : r.functions) {
    os << "\nfunction @" << f.name << "(";
    for (std::size_t i = 0; i < f.params.size(); ++i) os << (i ? ", " : "") << f.params[i];
    os << ")\n";
    os << "  entry relation: " << f.entry_relation << "\n";
    if (f.formula) {
      os << "  energy: " << f.formula->text() << " nJ\n";
      if (!f.formula->domain.empty()) {
        os << "  valid when:";
        for (std::size_t i = 0; i < f.formula->domain.size(); ++i)
          os << (i ? " and " : " ") << f.formula->domain[i].text();
        os << "\n";
      }
    } else {
      os << "  energy: no closed form\n";
      for (const auto& [rel, why] : f.unsolved) os << "    " << rel << ": " << why << "\n";
    }
    auto ait = r.args.find(f.name);
    if (ait == r.args.end()) continue;
    os << "  block arguments:\n";
    for (const auto& [unit, ua] : ait->second.by_unit)
      for (const auto& [block, vars] : ua.args_in) {
        os << "    " << unit << "/" << block << "(";
        for (std::size_t i = 0; i < vars.size(); ++i) os << (i ? ", " : "") << vars[i];
        os << ")\n";
      }
  }
  if (!r.warnings.empty()) {
    os << "\nwarnings:\n";
    for (const auto& w : r.warnings) os << "  - " << w << "\n";
  }
  os << "\ncost relations:\n" << crs_text(r.crs);
  return os.str();
}

nlohmann::json report_json(const AnalysisReport& r) {
  nlohmann::json fns = nlohmann::json::array();
  for (const auto& f : r.functions) {
    nlohmann::json fj = {{"name", f.name},
                         {"params", f.params},
                         {"entry_relation", f.entry_relation},
                         {"solved", f.formula.has_value()}};
    if (f.formula) {
      nlohmann::json domain = nlohmann::json::array();
      for (const auto& c : f.formula->domain) domain.push_back(constraint_json(c));
      fj["formula"] = {{"text", f.formula->text()},
                       {"ast", cf_json(*f.formula)},
                       {"domain", domain}};
    } else {
      fj["unsolved"] = f.unsolved;
    }
    fns.push_back(std::move(fj));
  }
  return {{"schema_version", r.schema_version},
          {"model", r.model},
          {"functions", fns},
          {"relations", crs_json(r.crs)},
          {"block_args", args_json(r.args)},
          {"warnings", r.warnings}};
}

nlohmann::json args_json(const std::map<std::string, FunctionArgs>& args) {
  nlohmann::json out = nlohmann::json::object();
  for (const auto& [fn, fa] : args) {
    nlohmann::json units = nlohmann::json::object();
    for (const auto& [unit, ua] : fa.by_unit) {
      nlohmann::json blocks = nlohmann::json::object();
      for (const auto& [block, vars] : ua.args_in) blocks[block] = vars;
      units[unit] = {{"blocks", blocks}, {"entry", ua.entry_args}};
    }
    out[fn] = {{"units", units}, {"notes", fa.notes}};
  }
  return out;
}

}  // namespace ergo
