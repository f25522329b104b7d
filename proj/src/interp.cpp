#include "ergo/interp.hpp"

#include "ergo/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <functional>
#include <sstream>

namespace ergo {

namespace {

// shifts beyond this are runtime errors, matching symbolic evaluation
const Int kMaxShift = 1000000;

using Env = std::map<std::string, Int>;

Int next_from(const std::vector<Int>& stream, std::size_t& pos) {
  if (stream.empty()) return 0;
  return stream[pos++ % stream.size()];
}

struct BlockOutcome {
  std::string next;  // successor label, empty when returned
  bool returned = false;
  std::optional<Int> value;
};

struct UnitOutcome {
  bool returned = false;
  std::optional<Int> value;
  std::string from;    // real block whose terminator left the unit
  std::string target;  // label outside the unit, empty when returned
};

struct Exec {
  const Module& mod;
  const RunFixture& fixture;
  const EnergyModel& model;
  const std::map<std::string, ExtractedProgram>* programs;  // null: run originals
  long budget;
  RunResult out;
  std::map<SiteKey, std::size_t> stream_pos;
  std::map<std::string, std::size_t> extern_pos;

  Exec(const Module& m, const RunFixture& fx, const EnergyModel& mdl,
       const std::map<std::string, ExtractedProgram>* progs, long budget_)
      : mod(m), fixture(fx), model(mdl), programs(progs), budget(budget_) {
    out.memory = fx.cells;
  }

  void step() {
    if (++out.steps > budget)
      throw AnalysisError(ErrorKind::NonTerminating,
                          "step budget of " + std::to_string(budget) + " instructions exhausted");
  }

  Int value(const Env& env, const Operand& o) const {
    if (!o.is_var()) return o.lit;
    auto it = env.find(o.var);
    if (it == env.end())
      throw AnalysisError(ErrorKind::Eval, "read of undefined variable %" + o.var);
    return it->second;
  }

  Int op_value(const Env& env, const Op& op) const {
    if (op.op == Opcode::Select)
      return value(env, op.args[0]) != 0 ? value(env, op.args[1]) : value(env, op.args[2]);
    Int a = value(env, op.args[0]);
    Int b = value(env, op.args[1]);
    switch (op.op) {
      case Opcode::Add: return a + b;
      case Opcode::Sub: return a - b;
      case Opcode::Mul: return a * b;
      case Opcode::SDiv:
        if (b == 0) throw AnalysisError(ErrorKind::Eval, "division by zero in %" + op.dest);
        return a / b;  // truncation toward zero
      case Opcode::SRem:
        if (b == 0) throw AnalysisError(ErrorKind::Eval, "division by zero in %" + op.dest);
        return a % b;
      case Opcode::Shl:
        if (b < 0 || b > kMaxShift)
          throw AnalysisError(ErrorKind::Eval, "bad shift amount in %" + op.dest);
        return a << static_cast<unsigned>(b);
      case Opcode::LShr:
        if (a < 0 || b < 0 || b > kMaxShift)
          throw AnalysisError(ErrorKind::Eval, "bad shift in %" + op.dest);
        return a >> static_cast<unsigned>(b);
      case Opcode::And:
      case Opcode::Or:
      case Opcode::Xor: {
        if (a < 0 || b < 0)
          throw AnalysisError(ErrorKind::Eval, "bitwise op on negative value in %" + op.dest);
        if (op.op == Opcode::And) return a & b;
        if (op.op == Opcode::Or) return a | b;
        return a ^ b;
      }
      case Opcode::ICmpEq: return a == b ? 1 : 0;
      case Opcode::ICmpNe: return a != b ? 1 : 0;
      case Opcode::ICmpSlt: return a < b ? 1 : 0;
      case Opcode::ICmpSle: return a <= b ? 1 : 0;
      case Opcode::ICmpSgt: return a > b ? 1 : 0;
      case Opcode::ICmpSge: return a >= b ? 1 : 0;
      default: throw AnalysisError(ErrorKind::Eval, "bad opcode in %" + op.dest);
    }
  }

  Int resolve_addr(const Env& env, const AddrExpr& a) const {
    Int v = a.base;
    if (a.var) {
      auto it = env.find(*a.var);
      if (it == env.end())
        throw AnalysisError(ErrorKind::Fixture, "address variable %" + *a.var + " is undefined");
      v += a.scale * it->second;
    }
    return v;
  }

  Int load_value(const std::string& fn, const std::string& block, int index, const Env& env) {
    auto it = fixture.loads.find(SiteKey{fn, block, index});
    if (it == fixture.loads.end()) return 0;
    const LoadSpec& spec = it->second;
    if (!spec.values.empty()) return next_from(spec.values, stream_pos[it->first]);
    Int addr = spec.addr ? resolve_addr(env, *spec.addr)
                         : next_from(spec.addrs, stream_pos[it->first]);
    auto cell = out.memory.find(addr);
    return cell == out.memory.end() ? Int(0) : cell->second;
  }

  void do_store(const std::string& fn, const std::string& block, int index, const Env& env) {
    auto it = fixture.stores.find(SiteKey{fn, block, index});
    if (it == fixture.stores.end()) return;  // fully abstract store: no effect
    const StoreSpec& spec = it->second;
    Int addr = spec.addr ? resolve_addr(env, *spec.addr)
                         : next_from(spec.addrs, stream_pos[it->first]);
    Int v = spec.value_var ? value(env, Operand::variable(*spec.value_var)) : spec.value_lit;
    out.memory[addr] = v;
  }

  std::optional<Int> do_call(const Call& call, const Env& env) {
    if (mod.external(call.callee)) {
      auto it = fixture.extern_returns.find(call.callee);
      if (it == fixture.extern_returns.end()) return Int(0);
      return next_from(it->second, extern_pos[call.callee]);
    }
    const Function* callee = mod.function(call.callee);
    if (!callee) throw AnalysisError(ErrorKind::Eval, "unknown callee @" + call.callee);
    std::vector<Int> argv;
    argv.reserve(call.args.size());
    for (const auto& a : call.args) argv.push_back(value(env, a));
    if (programs) return run_program(programs->at(call.callee), argv);
    return run_function(*callee, argv);
  }

  BlockOutcome exec_block(const Function& f, const BasicBlock& bb, const std::string& prev,
                          Env& env) {
    out.trace.emplace_back(f.name, bb.label);
    out.energy += block_cost(mod, f, bb, model);
    add_block_counts(bb, out.counts);

    std::size_t nphi = bb.phi_count();
    std::vector<std::pair<std::string, Int>> writes;  // parallel phi assignment
    for (std::size_t i = 0; i < nphi; ++i) {
      step();
      out.energy_by_instruction += instruction_cost(mod, f, bb, i, model);
      const Phi& phi = *bb.insts[i].as<Phi>();
      const PhiIncoming* in = nullptr;
      for (const auto& cand : phi.incomings)
        if (cand.pred == prev) {
          in = &cand;
          break;
        }
      if (!in)
        throw AnalysisError(ErrorKind::Eval, "phi %" + phi.dest + " in block " + bb.label +
                                                 " has no incoming for predecessor '" + prev +
                                                 "'");
      writes.emplace_back(phi.dest, value(env, in->value));
    }
    for (auto& [dest, v] : writes) env[dest] = std::move(v);

    for (std::size_t i = nphi; i < bb.insts.size(); ++i) {
      step();
      out.energy_by_instruction += instruction_cost(mod, f, bb, i, model);
      const Instruction& inst = bb.insts[i];
      if (const auto* op = inst.as<Op>()) {
        env[op->dest] = op_value(env, *op);
      } else if (const auto* call = inst.as<Call>()) {
        std::optional<Int> r = do_call(*call, env);
        if (call->dest) {
          if (!r)
            throw AnalysisError(ErrorKind::Eval, "@" + call->callee +
                                                     " returned no value but %" + *call->dest +
                                                     " expects one");
          env[*call->dest] = *r;
        }
      } else if (const auto* ml = inst.as<MemLoad>()) {
        env[ml->dest] = load_value(f.name, bb.label, static_cast<int>(i), env);
      } else if (inst.is<MemStore>()) {
        do_store(f.name, bb.label, static_cast<int>(i), env);
      } else if (const auto* cbr = inst.as<CondBr>()) {
        return {value(env, cbr->pred) != 0 ? cbr->then_label : cbr->else_label, false, {}};
      } else if (const auto* br = inst.as<Br>()) {
        return {br->target, false, {}};
      } else if (const auto* rt = inst.as<Ret>()) {
        BlockOutcome o;
        o.returned = true;
        if (rt->value) o.value = value(env, *rt->value);
        return o;
      }
    }
    throw AnalysisError(ErrorKind::Eval, "block " + bb.label + " has no terminator");
  }

  std::optional<Int> run_function(const Function& f, const std::vector<Int>& args) {
    Env env = bind_params(f, args);
    const BasicBlock* cur = &f.blocks.front();
    std::string prev;
    while (true) {
      BlockOutcome o = exec_block(f, *cur, prev, env);
      if (o.returned) return o.value;
      prev = cur->label;
      const BasicBlock* next = f.block(o.next);
      if (!next) throw AnalysisError(ErrorKind::Eval, "branch to unknown block " + o.next);
      cur = next;
    }
  }

  UnitOutcome exec_unit(const ExtractedProgram& prog, const ExtractedUnit& unit,
                        const Function& src, std::string cur, std::string prev, Env& env) {
    while (true) {
      if (unit.is_call_node(cur)) {
        const CallSite& cs = unit.calls.at(cur);
        const ExtractedUnit* callee = prog.unit(cs.callee);
        if (!callee) throw AnalysisError(ErrorKind::Eval, "unknown loop unit " + cs.callee);
        UnitOutcome sub = exec_unit(prog, *callee, src, callee->cfg.entry(), prev, env);
        if (sub.returned) return sub;
        prev = sub.from;  // resume phis see the real exiting block
        if (unit.cfg.node(sub.target) < 0) return sub;  // multi-level exit
        cur = sub.target;
        continue;
      }
      const BasicBlock* bb = src.block(cur);
      if (!bb) throw AnalysisError(ErrorKind::Eval, "branch to unknown block " + cur);
      BlockOutcome o = exec_block(src, *bb, prev, env);
      if (o.returned) return {true, o.value, cur, ""};
      prev = cur;
      if (unit.cfg.node(o.next) < 0) return {false, {}, cur, o.next};
      cur = o.next;
    }
  }

  std::optional<Int> run_program(const ExtractedProgram& prog, const std::vector<Int>& args) {
    const Function* src = mod.function(prog.fn);
    if (!src) throw AnalysisError(ErrorKind::Eval, "unknown function @" + prog.fn);
    Env env = bind_params(*src, args);
    const ExtractedUnit& residual = prog.residual();
    UnitOutcome o = exec_unit(prog, residual, *src, residual.cfg.entry(), "", env);
    if (!o.returned)
      throw AnalysisError(ErrorKind::Eval,
                          "control left @" + prog.fn + " through " + o.target + " without ret");
    return o.value;
  }

  Env bind_params(const Function& f, const std::vector<Int>& args) const {
    if (args.size() != f.params.size())
      throw AnalysisError(ErrorKind::Eval, "@" + f.name + " expects " +
                                               std::to_string(f.params.size()) +
                                               " arguments, got " + std::to_string(args.size()));
    Env env;
    for (std::size_t i = 0; i < args.size(); ++i) env[f.params[i]] = args[i];
    return env;
  }

  RunResult finish(std::optional<Int> ret) {
    Rat once = program_constant(model);
    out.energy += once;
    out.energy_by_instruction += once;
    out.ret = std::move(ret);
    return std::move(out);
  }
};

}  // namespace

RunResult run(const Module& m, const std::string& fn, const std::vector<Int>& args,
              const RunFixture& fixture, const EnergyModel& model, long step_budget) {
  const Function* f = m.function(fn);
  if (!f) throw AnalysisError(ErrorKind::Eval, "unknown function @" + fn);
  Exec e(m, fixture, model, nullptr, step_budget);
  return e.finish(e.run_function(*f, args));
}

RunResult run_extracted(const Module& m,
                        const std::map<std::string, ExtractedProgram>& programs,
                        const std::string& fn, const std::vector<Int>& args,
                        const RunFixture& fixture, const EnergyModel& model, long step_budget) {
  auto it = programs.find(fn);
  if (it == programs.end()) throw AnalysisError(ErrorKind::Eval, "unknown function @" + fn);
  Exec e(m, fixture, model, &programs, step_budget);
  return e.finish(e.run_program(it->second, args));
}

namespace {

using nlohmann::json;

Int int_from_json(const json& v, const std::string& where) {
  if (v.is_number_integer()) return Int(static_cast<long long>(v.get<std::int64_t>()));
  if (v.is_number_unsigned())
    return Int(static_cast<unsigned long long>(v.get<std::uint64_t>()));
  if (v.is_string()) {
    try {
      return Int(v.get<std::string>());
    } catch (const std::exception&) {
    }
  }
  throw AnalysisError(ErrorKind::Fixture, "bad integer for " + where);
}

std::string var_name(const json& v, const std::string& where) {
  if (!v.is_string()) throw AnalysisError(ErrorKind::Fixture, where + " must name a variable");
  std::string s = v.get<std::string>();
  if (!s.empty() && s[0] == '%') s.erase(0, 1);
  if (s.empty()) throw AnalysisError(ErrorKind::Fixture, where + " must name a variable");
  return s;
}

AddrExpr addr_from_json(const json& v, const std::string& where) {
  if (!v.is_object()) throw AnalysisError(ErrorKind::Fixture, where + " must be an object");
  AddrExpr a;
  if (v.contains("base")) a.base = int_from_json(v.at("base"), where + ".base");
  if (v.contains("var")) a.var = var_name(v.at("var"), where + ".var");
  if (v.contains("scale")) a.scale = int_from_json(v.at("scale"), where + ".scale");
  return a;
}

std::vector<Int> int_list(const json& v, const std::string& where) {
  if (!v.is_array()) throw AnalysisError(ErrorKind::Fixture, where + " must be an array");
  std::vector<Int> out;
  for (const auto& e : v) out.push_back(int_from_json(e, where));
  return out;
}

SiteKey site_key(const json& site, const std::string& where) {
  for (const char* key : {"fn", "block", "index"})
    if (!site.contains(key))
      throw AnalysisError(ErrorKind::Fixture, where + " needs fn/block/index");
  if (!site.at("fn").is_string() || !site.at("block").is_string() ||
      !site.at("index").is_number_integer())
    throw AnalysisError(ErrorKind::Fixture, where + " needs fn/block/index");
  int index = site.at("index").get<int>();
  if (index < 0) throw AnalysisError(ErrorKind::Fixture, where + " index must be >= 0");
  return {site.at("fn").get<std::string>(), site.at("block").get<std::string>(), index};
}

std::string site_text(const SiteKey& k) {
  return "@" + std::get<0>(k) + ":" + std::get<1>(k) + "[" + std::to_string(std::get<2>(k)) +
         "]";
}

}  // namespace

RunFixture load_fixture_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw AnalysisError(ErrorKind::Fixture, std::string("fixture is not valid JSON: ") + e.what());
  }
  if (!j.is_object()) throw AnalysisError(ErrorKind::Fixture, "fixture must be a JSON object");
  RunFixture fx;
  try {
    if (j.contains("cells")) {
      const auto& cells = j.at("cells");
      if (cells.is_array()) {
        Int addr = 0;
        for (const auto& v : cells) fx.cells[addr++] = int_from_json(v, "cells");
      } else if (cells.is_object()) {
        for (const auto& [key, v] : cells.items()) {
          Int addr;
          try {
            addr = Int(key);
          } catch (const std::exception&) {
            throw AnalysisError(ErrorKind::Fixture, "cell address '" + key + "' is not an integer");
          }
          fx.cells[addr] = int_from_json(v, "cells." + key);
        }
      } else {
        throw AnalysisError(ErrorKind::Fixture, "cells must be an array or object");
      }
    }
    if (j.contains("loads"))
      for (const auto& site : j.at("loads")) {
        SiteKey key = site_key(site, "load site");
        LoadSpec spec;
        int sources = 0;
        if (site.contains("values")) {
          spec.values = int_list(site.at("values"), "values of " + site_text(key));
          ++sources;
        }
        if (site.contains("addr")) {
          spec.addr = addr_from_json(site.at("addr"), "addr of " + site_text(key));
          ++sources;
        }
        if (site.contains("addrs")) {
          spec.addrs = int_list(site.at("addrs"), "addrs of " + site_text(key));
          ++sources;
        }
        if (sources != 1)
          throw AnalysisError(ErrorKind::Fixture, "load site " + site_text(key) +
                                                      " needs exactly one of values/addr/addrs");
        if (!fx.loads.emplace(key, std::move(spec)).second)
          throw AnalysisError(ErrorKind::Fixture, "duplicate load site " + site_text(key));
      }
    if (j.contains("stores"))
      for (const auto& site : j.at("stores")) {
        SiteKey key = site_key(site, "store site");
        StoreSpec spec;
        if (site.contains("addr"))
          spec.addr = addr_from_json(site.at("addr"), "addr of " + site_text(key));
        else if (site.contains("addrs"))
          spec.addrs = int_list(site.at("addrs"), "addrs of " + site_text(key));
        else
          throw AnalysisError(ErrorKind::Fixture,
                              "store site " + site_text(key) + " needs addr or addrs");
        if (!site.contains("value"))
          throw AnalysisError(ErrorKind::Fixture,
                              "store site " + site_text(key) + " needs a value");
        const auto& v = site.at("value");
        if (v.is_string())
          spec.value_var = var_name(v, "value of " + site_text(key));
        else
          spec.value_lit = int_from_json(v, "value of " + site_text(key));
        if (!fx.stores.emplace(key, std::move(spec)).second)
          throw AnalysisError(ErrorKind::Fixture, "duplicate store site " + site_text(key));
      }
    if (j.contains("extern_returns"))
      for (const auto& [name, v] : j.at("extern_returns").items())
        fx.extern_returns[name] = int_list(v, "extern_returns." + name);
  } catch (const json::exception& e) {
    throw AnalysisError(ErrorKind::Fixture, std::string("malformed fixture: ") + e.what());
  }
  return fx;
}

RunFixture load_fixture_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open fixture file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_fixture_json(ss.str());
}

}  // namespace ergo
