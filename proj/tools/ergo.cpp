// Batch front door: analyze | solve | simulate | compare | dump-cfg.
// Exit codes: 0 success, 1 input error, 2 partial result (some relation has
// no closed form; numeric evaluation still works).

#include "ergo/cfg.hpp"
#include "ergo/error.hpp"
#include "ergo/interp.hpp"
#include "ergo/loops.hpp"
#include "ergo/parser.hpp"
#include "ergo/pipeline.hpp"
#include "ergo/solver.hpp"
#include "ergo/sweep.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cctype>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

namespace {

using namespace ergo;
using nlohmann::json;

std::string slurp(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

EnergyModel unit_group_model() {
  GroupModel g;
  g.e = {{Group::M, 1}, {Group::B, 1}, {Group::D, 1}, {Group::G, 1}};
  return g;
}

/// --model M.json picks any model file; --mapping map.json is the spelling
/// for site-priced mapping files. Exactly one may be given; the default is
/// the unit group model (every instruction 1 nJ).
EnergyModel pick_model(const std::string& model_path, const std::string& mapping_path) {
  if (!model_path.empty() && !mapping_path.empty())
    throw Error("--model and --mapping are alternatives; give one");
  if (!model_path.empty()) return load_model_file(model_path);
  if (!mapping_path.empty()) {
    EnergyModel m = load_model_file(mapping_path);
    if (!std::holds_alternative<MappingModel>(m))
      throw Error("--mapping expects a site-priced mapping file (key \"sites\")");
    return m;
  }
  return unit_group_model();
}

std::vector<Int> parse_int_list(const std::string& text) {
  std::vector<Int> out;
  std::string item;
  std::istringstream in(text);
  while (std::getline(in, item, ',')) {
    item.erase(0, item.find_first_not_of(" \t"));
    item.erase(item.find_last_not_of(" \t") + 1);
    if (item.empty()) continue;
    try {
      out.push_back(Int(item));
    } catch (const std::exception&) {
      throw Error("'" + item + "' is not an integer");
    }
  }
  return out;
}

/// "P=2..12" or "P=5" (both bounds inclusive).
std::pair<std::string, std::pair<Int, Int>> parse_range(const std::string& text) {
  auto eq = text.find('=');
  if (eq == std::string::npos || eq == 0) throw Error("range '" + text + "' is not NAME=LO..HI");
  std::string name = text.substr(0, eq);
  std::string rest = text.substr(eq + 1);
  auto dots = rest.find("..");
  try {
    if (dots == std::string::npos) {
      Int v(rest);
      return {name, {v, v}};
    }
    return {name, {Int(rest.substr(0, dots)), Int(rest.substr(dots + 2))}};
  } catch (const std::exception&) {
    throw Error("range '" + text + "' is not NAME=LO..HI");
  }
}

/// Mini-language for --assume: "fn: a*X + b <= Y" and friends. Identifiers
/// are letters, digits, '.', '_' (optionally %-sigiled); operators
/// <= < >= > == !=; terms are K, X, or K*X.
LinearForm parse_affine(const std::string& text, std::size_t& pos) {
  auto skip = [&] {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
  };
  auto ident_char = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) || c == '.' || c == '_';
  };
  auto atom = [&](Rat& coeff, std::string& var) {
    skip();
    if (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) {
      std::size_t start = pos;
      while (pos < text.size() && std::isdigit(static_cast<unsigned char>(text[pos]))) ++pos;
      coeff = Rat(Int(text.substr(start, pos - start)));
      skip();
      if (pos < text.size() && text[pos] == '*') {
        ++pos;
        skip();
      } else {
        return;  // plain constant
      }
    }
    if (pos < text.size() && text[pos] == '%') ++pos;
    std::size_t start = pos;
    while (pos < text.size() && ident_char(text[pos])) ++pos;
    if (pos == start) throw Error("expected a variable in '" + text + "'");
    var = text.substr(start, pos - start);
  };
  LinearForm form;
  bool negate = false;
  skip();
  if (pos < text.size() && (text[pos] == '-' || text[pos] == '+')) negate = text[pos++] == '-';
  while (true) {
    Rat coeff = 1;
    std::string var;
    atom(coeff, var);
    LinearForm term = var.empty() ? LinearForm::konst(coeff) : LinearForm::var(var, coeff);
    form += negate ? -term : term;
    skip();
    if (pos < text.size() && (text[pos] == '+' || text[pos] == '-')) {
      negate = text[pos++] == '-';
      continue;
    }
    return form;
  }
}

std::pair<std::string, LinearConstraint> parse_assume(const std::string& text) {
  auto colon = text.find(':');
  if (colon == std::string::npos || colon == 0)
    throw Error("--assume wants 'fn: CONSTRAINT', got '" + text + "'");
  std::string fn = text.substr(0, colon);
  std::string body = text.substr(colon + 1);
  static const std::vector<std::pair<std::string, CmpOp>> ops = {
      {"<=", CmpOp::Le}, {">=", CmpOp::Ge}, {"==", CmpOp::Eq},
      {"!=", CmpOp::Ne}, {"<", CmpOp::Lt},  {">", CmpOp::Gt}};
  for (const auto& [tok, op] : ops) {
    auto at = body.find(tok);
    if (at == std::string::npos) continue;
    std::size_t pos = 0;
    std::string lhs_text = body.substr(0, at);
    LinearForm lhs = parse_affine(lhs_text, pos);
    pos = 0;
    std::string rhs_text = body.substr(at + tok.size());
    LinearForm rhs = parse_affine(rhs_text, pos);
    return {fn, LinearConstraint{lhs - rhs, op}};
  }
  throw Error("no comparison operator in --assume '" + text + "'");
}

json formula_json(const ClosedForm& f) {
  json domain = json::array();
  for (const auto& c : f.domain) domain.push_back(constraint_json(c));
  return {{"text", f.text()}, {"ast", cf_json(f)}, {"domain", domain}};
}

std::string formula_line(const ClosedForm& f) {
  std::string s = f.text();
  if (!f.domain.empty()) {
    s += "  valid when";
    for (std::size_t i = 0; i < f.domain.size(); ++i)
      s += (i ? " and " : " ") + f.domain[i].text();
  }
  return s;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// ---------------------------------------------------------------------------

struct AnalyzeArgs {
  std::string file, model, mapping, format = "text", emit_crs, mod_approx = "typical";
  std::vector<std::string> assumes;
  bool dump_args = false, no_default_assumptions = false;
};

int cmd_analyze(const AnalyzeArgs& a) {
  Module m = parse_file(a.file);
  EnergyModel model = pick_model(a.model, a.mapping);
  CrOptions opts;
  if (a.mod_approx == "exact") opts.arg_mode = ModApprox::Exact;
  else if (a.mod_approx == "upper") opts.arg_mode = ModApprox::Upper;
  else if (a.mod_approx == "lower") opts.arg_mode = ModApprox::Lower;
  else opts.arg_mode = ModApprox::Typical;
  opts.default_assumptions = !a.no_default_assumptions;
  for (const auto& s : a.assumes) {
    auto [fn, c] = parse_assume(s);
    opts.extra_assumptions[fn].push_back(c);
  }

  AnalysisReport rep = analyze_module(m, model, opts);
  if (!a.emit_crs.empty()) {
    std::ofstream out(a.emit_crs);
    if (!out) throw Error("cannot write " + a.emit_crs);
    out << crs_json(rep.crs).dump(2) << "\n";
  }
  if (a.dump_args)
    emit(args_json(rep.args));
  else if (a.format == "json")
    emit(report_json(rep));
  else
    std::cout << report_text(rep);
  return rep.fully_solved() ? 0 : 2;
}

struct SolveArgs {
  std::string file, format = "text";
};

int cmd_solve(const SolveArgs& a) {
  json j;
  try {
    j = json::parse(slurp(a.file));
  } catch (const json::exception& e) {
    throw Error(a.file + " is not valid JSON: " + std::string(e.what()));
  }
  CostRelationSystem sys = crs_from_json(j);
  SolveOutcome out = solve(sys);

  if (a.format == "json") {
    json entries = json::object();
    for (const auto& [fn, rel] : sys.entry) {
      auto it = out.entry_forms.find(fn);
      entries[fn] = it == out.entry_forms.end() ? json(nullptr) : formula_json(it->second);
    }
    json rels = json::object();
    for (const auto& r : sys.relations) {
      if (const ClosedForm* f = out.form(r.name))
        rels[r.name] = formula_json(*f);
      else
        rels[r.name] = {{"unsolved", out.unsolved.at(r.name)}};
    }
    emit({{"schema_version", 1},
          {"entry", entries},
          {"relations", rels},
          {"warnings", out.warnings}});
  } else {
    for (const auto& [fn, rel] : sys.entry) {
      auto it = out.entry_forms.find(fn);
      std::cout << "entry @" << fn << ": "
                << (it == out.entry_forms.end() ? "no closed form" : formula_line(it->second))
                << "\n";
    }
    std::cout << "\n";
    for (const auto& r : sys.relations) {
      std::cout << r.name << "(";
      for (std::size_t i = 0; i < r.params.size(); ++i) std::cout << (i ? ", " : "") << r.params[i];
      std::cout << "): ";
      if (const ClosedForm* f = out.form(r.name))
        std::cout << formula_line(*f) << "\n";
      else
        std::cout << "unsolved: " << out.unsolved.at(r.name) << "\n";
    }
    for (const auto& w : out.warnings) std::cout << "warning: " << w << "\n";
  }
  return out.unsolved.empty() ? 0 : 2;
}

struct SimulateArgs {
  std::string file, fn, args, memory, model, format = "text";
  long budget = kDefaultStepBudget;
};

int cmd_simulate(const SimulateArgs& a) {
  Module m = parse_file(a.file);
  validate_or_throw(m);
  EnergyModel model = pick_model(a.model, "");
  RunFixture fx = a.memory.empty() ? RunFixture{} : load_fixture_file(a.memory);
  std::vector<Int> call_args = parse_int_list(a.args);
  RunResult res = run(m, a.fn, call_args, fx, model, a.budget);

  if (a.format == "json") {
    json trace = json::array();
    for (const auto& [fn, block] : res.trace) trace.push_back({fn, block});
    json memory = json::object();
    for (const auto& [addr, val] : res.memory) memory[addr.str()] = val.str();
    json counts = json::object();
    for (const auto& [name, n] : res.counts.by_name) counts[name] = n.str();
    emit({{"schema_version", 1},
          {"fn", a.fn},
          {"args", a.args},
          {"model", model_kind(model)},
          {"energy_nj", rat_string(res.energy)},
          {"energy_by_instruction_nj", rat_string(res.energy_by_instruction)},
          {"ret", res.ret ? json(res.ret->str()) : json(nullptr)},
          {"steps", res.steps},
          {"trace", trace},
          {"memory", memory},
          {"instruction_counts", counts}});
  } else {
    std::cout << "simulate @" << a.fn << "(" << a.args << ") under " << model_kind(model)
              << " model\n";
    std::cout << "energy: " << rat_decimal_string(res.energy) << " nJ\n";
    std::cout << "per-instruction tally: " << rat_decimal_string(res.energy_by_instruction)
              << " nJ\n";
    if (res.ret) std::cout << "return: " << *res.ret << "\n";
    std::cout << "steps: " << res.steps << "\n";
    std::cout << "trace (" << res.trace.size() << " blocks):\n";
    std::vector<std::string> order;
    std::map<std::string, long> visits;
    for (const auto& [fn, block] : res.trace) {
      std::string key = fn + ":" + block;
      if (visits.emplace(key, 0).second) order.push_back(key);
      ++visits[key];
    }
    for (const auto& key : order) std::cout << "  " << key << " x" << visits[key] << "\n";
    if (!res.memory.empty()) {
      std::cout << "memory:\n";
      for (const auto& [addr, val] : res.memory) std::cout << "  " << addr << ": " << val << "\n";
    }
  }
  return 0;
}

struct CompareArgs {
  std::string file, fn, memory, model, input = "zeros", format = "text";
  std::vector<std::string> ranges;
  int samples = 1;
  std::uint64_t seed = kDefaultSeed;
  long budget = kDefaultStepBudget;
};

int cmd_compare(const CompareArgs& a) {
  Module m = parse_file(a.file);
  EnergyModel model = pick_model(a.model, "");
  AnalysisReport rep = analyze_module(m, model);
  SweepTemplate tpl = a.memory.empty() ? SweepTemplate{} : load_sweep_template_file(a.memory);
  std::vector<std::pair<std::string, std::pair<Int, Int>>> ranges;
  for (const auto& r : a.ranges) ranges.push_back(parse_range(r));

  CompareOptions opts;
  opts.generator = a.input;
  opts.samples = a.samples;
  opts.seed = a.seed;
  opts.step_budget = a.budget;
  CompareReport cr = run_compare(m, rep, a.fn, ranges, tpl, model, opts);

  if (a.format == "json")
    emit(compare_json(cr));
  else
    std::cout << compare_text(cr);
  if (!cr.bound_holds) {
    std::cerr << "error: bound violated; the reported formula is not an upper bound on these runs\n";
    return 1;
  }
  return cr.source == "numeric" ? 2 : 0;
}

struct DumpCfgArgs {
  std::string file, fn, format = "text";
  bool extracted = false;
};

int cmd_dump_cfg(const DumpCfgArgs& a) {
  Module m = parse_file(a.file);
  validate_or_throw(m);
  json out = json::object();
  for (const auto& f : m.functions) {
    if (!a.fn.empty() && f.name != a.fn) continue;
    Cfg g = build_cfg(f);
    if (a.extracted) {
      ExtractedProgram prog = extract_nested_loops(f, g, find_loops(g));
      for (const auto& u : prog.units) {
        if (a.format == "json") {
          json edges = json::array();
          for (const auto& e : u.cfg.edges)
            edges.push_back({{"from", u.cfg.nodes[e.from]},
                             {"to", u.cfg.nodes[e.to]},
                             {"kind", edge_kind_name(e.kind)}});
          json exits = json::array();
          for (const auto& e : u.exits)
            exits.push_back({{"from", e.from}, {"to", e.to}, {"kind", edge_kind_name(e.kind)}});
          out[u.name] = {{"fn", u.fn},
                         {"loop", u.is_loop},
                         {"nodes", u.cfg.nodes},
                         {"edges", edges},
                         {"exits", exits}};
        } else {
          std::cout << cfg_dot(u.cfg, u.name, u.exits) << "\n";
        }
      }
    } else {
      if (a.format == "json") {
        json edges = json::array();
        for (const auto& e : g.edges)
          edges.push_back({{"from", g.nodes[e.from]},
                           {"to", g.nodes[e.to]},
                           {"kind", edge_kind_name(e.kind)}});
        out[f.name] = {{"nodes", g.nodes}, {"edges", edges}};
      } else {
        std::cout << cfg_dot(g, f.name) << "\n";
      }
    }
  }
  if (!a.fn.empty() && !m.function(a.fn)) throw Error("no function @" + a.fn);
  if (a.format == "json") emit(out);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"parametric energy-consumption analysis for the mini IR"};
  app.require_subcommand(1);

  AnalyzeArgs an;
  CLI::App* analyze = app.add_subcommand("analyze", "infer energy formulas for every function");
  analyze->add_option("file", an.file, "IR module (.mir)")->required();
  analyze->add_option("--model", an.model, "energy model JSON (default: every instruction 1 nJ)");
  analyze->add_option("--mapping", an.mapping, "site-priced mapping model JSON");
  analyze->add_option("--format", an.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));
  analyze->add_flag("--dump-args", an.dump_args, "print the inferred block arguments as JSON");
  analyze->add_option("--emit-crs", an.emit_crs, "also write the cost-relation system to a file");
  analyze->add_option("--assume", an.assumes,
                      "extra fact about a function's parameters, e.g. 'sort: P >= 2'");
  analyze->add_flag("--no-default-assumptions", an.no_default_assumptions,
                    "do not assume parameters are nonnegative");
  analyze->add_option("--mod-approx", an.mod_approx, "srem summary for call arguments")
      ->check(CLI::IsMember({"typical", "exact", "upper", "lower"}));

  SolveArgs so;
  CLI::App* solve_cmd = app.add_subcommand("solve", "solve a dumped cost-relation system");
  solve_cmd->add_option("file", so.file, "cost relations JSON (from analyze --emit-crs)")
      ->required();
  solve_cmd->add_option("--format", so.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  SimulateArgs si;
  CLI::App* simulate = app.add_subcommand("simulate", "price one concrete run");
  simulate->add_option("file", si.file, "IR module (.mir)")->required();
  simulate->add_option("--fn", si.fn, "function to run")->required();
  simulate->add_option("--args", si.args, "comma-separated integer arguments");
  simulate->add_option("--memory,--fixture", si.memory, "memory/input fixture JSON");
  simulate->add_option("--model", si.model, "energy model JSON");
  simulate->add_option("--budget", si.budget, "instruction step budget");
  simulate->add_option("--format", si.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  CompareArgs co;
  CLI::App* compare = app.add_subcommand("compare", "sweep inputs and check formula vs runs");
  compare->add_option("file", co.file, "IR module (.mir)")->required();
  compare->add_option("--fn", co.fn, "function to sweep")->required();
  compare->add_option("--range", co.ranges, "parameter range NAME=LO..HI (repeatable)");
  compare->add_option("--memory,--fixture", co.memory,
                      "fixture template JSON (may carry fill/fill_values sections)");
  compare->add_option("--model", co.model, "energy model JSON");
  compare->add_option("--input", co.input, "input generator")
      ->check(CLI::IsMember(generator_names()));
  compare->add_option("--samples", co.samples, "runs per sweep point")
      ->check(CLI::PositiveNumber);
  compare->add_option("--seed", co.seed, "random generator seed");
  compare->add_option("--budget", co.budget, "instruction step budget per run");
  compare->add_option("--format", co.format, "text or json")
      ->check(CLI::IsMember({"text", "json"}));

  DumpCfgArgs dc;
  CLI::App* dump = app.add_subcommand("dump-cfg", "print control-flow graphs (graphviz)");
  dump->add_option("file", dc.file, "IR module (.mir)")->required();
  dump->add_option("--fn", dc.fn, "only this function");
  dump->add_flag("--extracted", dc.extracted, "dump the loop-extracted units instead");
  dump->add_option("--format", dc.format, "text (graphviz) or json")
      ->check(CLI::IsMember({"text", "json"}));

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (*analyze) return cmd_analyze(an);
    if (*solve_cmd) return cmd_solve(so);
    if (*simulate) return cmd_simulate(si);
    if (*compare) return cmd_compare(co);
    if (*dump) return cmd_dump_cfg(dc);
  } catch (const ergo::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
