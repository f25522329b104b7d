#include "ergo/energy.hpp"

#include "ergo/error.hpp"

#include <nlohmann/json.hpp>

#include <fstream>
#include <sstream>

namespace ergo {

using nlohmann::json;

char group_letter(Group g) {
  switch (g) {
    case Group::M: return 'M';
    case Group::B: return 'B';
    case Group::D: return 'D';
    case Group::G: return 'G';
  }
  return '?';
}

Group classify(const Instruction& inst) {
  if (inst.is<CondBr>() || inst.is<Br>() || inst.is<Call>() || inst.is<Ret>())
    return Group::B;
  if (inst.is<MemLoad>() || inst.is<MemStore>()) return Group::M;
  if (const auto* op = inst.as<Op>())
    return is_division(op->op) ? Group::D : Group::G;
  return Group::G;  // phi
}

std::string instruction_name(const Instruction& inst) {
  if (inst.is<Phi>()) return "phi";
  if (inst.is<Call>()) return "call";
  if (inst.is<MemLoad>()) return "memload";
  if (inst.is<MemStore>()) return "memstore";
  if (inst.is<CondBr>() || inst.is<Br>()) return "br";
  if (inst.is<Ret>()) return "ret";
  return opcode_name(inst.as<Op>()->op);
}

const char* model_kind(const EnergyModel& m) {
  switch (m.index()) {
    case 0: return "group";
    case 1: return "xs1";
    case 2: return "tiwari";
    case 3: return "mapping";
  }
  return "?";
}

void add_block_counts(const BasicBlock& bb, InstructionCounts& c) {
  std::string prev;
  for (const auto& inst : bb.insts) {
    std::string name = instruction_name(inst);
    c.by_name[name] += 1;
    c.by_thread[{1, name}] += 1;
    if (!prev.empty()) c.by_pair[{prev, name}] += 1;
    prev = std::move(name);
  }
}

Rat tiwari_energy(const InstructionCounts& c, const TiwariModel& m) {
  Rat total = 0;
  for (const auto& [name, n] : c.by_name) {
    auto it = m.base.find(name);
    if (it == m.base.end())
      throw AnalysisError(ErrorKind::Model, "no base cost for instruction '" + name + "'");
    total += it->second * Rat(n);
  }
  for (const auto& [pair, n] : c.by_pair) {
    auto it = m.overhead.find(pair);
    if (it != m.overhead.end()) total += it->second * Rat(n);
  }
  for (const auto& e : m.externals) total += e;
  return total;
}

namespace {

Rat xs1_instruction_cost(const Xs1Model& m, int level, const std::string& name) {
  if (level < 1 || level > static_cast<int>(m.m.size()))
    throw AnalysisError(ErrorKind::Model,
                        "no thread scale M_" + std::to_string(level) + " in xs1 model");
  auto it = m.p.find(name);
  if (it == m.p.end())
    throw AnalysisError(ErrorKind::Model, "no power P for instruction '" + name + "'");
  return (m.m[level - 1] * it->second * m.o + m.p_base) * m.t_clk;
}

}  // namespace

Rat xs1_energy(const InstructionCounts& c, const Xs1Model& m) {
  Rat total = m.p_base * Rat(c.idle_periods) * m.t_clk;
  for (const auto& [key, n] : c.by_thread)
    total += xs1_instruction_cost(m, key.first, key.second) * Rat(n);
  return total;
}

Rat xs1_single_thread(const InstructionCounts& c, const Xs1Model& m) {
  Rat total = 0;
  for (const auto& [name, n] : c.by_name)
    total += xs1_instruction_cost(m, 1, name) * Rat(n);
  return total;
}

Rat group_energy(const std::map<Group, Int>& counts, const GroupModel& m) {
  Rat total = 0;
  for (const auto& [g, n] : counts) {
    auto it = m.e.find(g);
    Rat cost = it == m.e.end() ? Rat(0) : it->second;
    total += cost * Rat(n);
  }
  return total;
}

std::map<Group, Int> group_counts(const BasicBlock& bb) {
  std::map<Group, Int> out;
  for (const auto& inst : bb.insts) out[classify(inst)] += 1;
  return out;
}

namespace {

Rat external_call_costs(const Module& mod, const BasicBlock& bb) {
  Rat total = 0;
  for (const auto& inst : bb.insts)
    if (const auto* call = inst.as<Call>())
      if (const auto* ext = mod.external(call->callee)) total += ext->cost;
  return total;
}

Rat group_block_cost(const BasicBlock& bb, const GroupModel& m) {
  Rat total = 0;
  for (const auto& inst : bb.insts) {
    Group g = classify(inst);
    auto it = m.e.find(g);
    Rat cost = it == m.e.end() ? Rat(0) : it->second;
    if (const auto* op = inst.as<Op>())
      if (op->bits > 32) cost *= m.widen_mul;
    total += cost;
    if (const auto* call = inst.as<Call>()) {
      total += m.call_arg_nj * Rat(static_cast<long>(call->args.size()));
      if (call->dest) total += m.call_ret_nj;
    }
  }
  return total;
}

Rat xs1_block_cost(const BasicBlock& bb, const Xs1Model& m) {
  Rat joules = 0;
  for (const auto& inst : bb.insts) joules += xs1_instruction_cost(m, 1, instruction_name(inst));
  return joules * 1000000000;  // block costs are carried in nanojoules
}

Rat tiwari_block_cost(const BasicBlock& bb, const TiwariModel& m) {
  InstructionCounts c;
  add_block_counts(bb, c);
  Rat total = 0;
  for (const auto& [name, n] : c.by_name) {
    auto it = m.base.find(name);
    if (it == m.base.end())
      throw AnalysisError(ErrorKind::Model, "no base cost for instruction '" + name + "'");
    total += it->second * Rat(n);
  }
  for (const auto& [pair, n] : c.by_pair) {
    auto it = m.overhead.find(pair);
    if (it != m.overhead.end()) total += it->second * Rat(n);
  }
  return total;
}

Rat mapping_block_cost(const Function& f, const BasicBlock& bb, const MappingModel& m) {
  Rat total = 0;
  for (std::size_t i = 0; i < bb.insts.size(); ++i) {
    auto it = m.per_ir.find({f.name, bb.label, static_cast<int>(i)});
    if (it == m.per_ir.end())
      throw AnalysisError(ErrorKind::Model, "no mapping entry for @" + f.name + ":" + bb.label +
                                                "[" + std::to_string(i) + "]");
    Rat cost = it->second;
    if (bb.insts[i].is<Phi>()) cost *= m.phi_adjust;
    total += cost;
  }
  return total;
}

Rat one_group_cost(const Instruction& inst, const GroupModel& m) {
  Group g = classify(inst);
  auto it = m.e.find(g);
  Rat cost = it == m.e.end() ? Rat(0) : it->second;
  if (const auto* op = inst.as<Op>())
    if (op->bits > 32) cost *= m.widen_mul;
  if (const auto* call = inst.as<Call>()) {
    cost += m.call_arg_nj * Rat(static_cast<long>(call->args.size()));
    if (call->dest) cost += m.call_ret_nj;
  }
  return cost;
}

Rat one_tiwari_cost(const BasicBlock& bb, std::size_t index, const TiwariModel& m) {
  std::string name = instruction_name(bb.insts[index]);
  auto it = m.base.find(name);
  if (it == m.base.end())
    throw AnalysisError(ErrorKind::Model, "no base cost for instruction '" + name + "'");
  Rat cost = it->second;
  if (index > 0) {
    auto pair = m.overhead.find({instruction_name(bb.insts[index - 1]), name});
    if (pair != m.overhead.end()) cost += pair->second;
  }
  return cost;
}

Rat one_mapping_cost(const Function& f, const BasicBlock& bb, std::size_t index,
                     const MappingModel& m) {
  auto it = m.per_ir.find({f.name, bb.label, static_cast<int>(index)});
  if (it == m.per_ir.end())
    throw AnalysisError(ErrorKind::Model, "no mapping entry for @" + f.name + ":" + bb.label +
                                              "[" + std::to_string(index) + "]");
  Rat cost = it->second;
  if (bb.insts[index].is<Phi>()) cost *= m.phi_adjust;
  return cost;
}

}  // namespace

Rat instruction_cost(const Module& mod, const Function& f, const BasicBlock& bb,
                     std::size_t index, const EnergyModel& model) {
  const Instruction& inst = bb.insts[index];
  Rat base = std::visit(
      [&](const auto& m) -> Rat {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GroupModel>) return one_group_cost(inst, m);
        if constexpr (std::is_same_v<T, Xs1Model>)
          return xs1_instruction_cost(m, 1, instruction_name(inst)) * 1000000000;
        if constexpr (std::is_same_v<T, TiwariModel>) return one_tiwari_cost(bb, index, m);
        if constexpr (std::is_same_v<T, MappingModel>) return one_mapping_cost(f, bb, index, m);
      },
      model);
  if (const auto* call = inst.as<Call>())
    if (const auto* ext = mod.external(call->callee)) base += ext->cost;
  return base;
}

Rat block_cost(const Module& mod, const Function& f, const BasicBlock& bb,
               const EnergyModel& model) {
  Rat base = std::visit(
      [&](const auto& m) -> Rat {
        using T = std::decay_t<decltype(m)>;
        if constexpr (std::is_same_v<T, GroupModel>) return group_block_cost(bb, m);
        if constexpr (std::is_same_v<T, Xs1Model>) return xs1_block_cost(bb, m);
        if constexpr (std::is_same_v<T, TiwariModel>) return tiwari_block_cost(bb, m);
        if constexpr (std::is_same_v<T, MappingModel>) return mapping_block_cost(f, bb, m);
      },
      model);
  return base + external_call_costs(mod, bb);
}

Rat program_constant(const EnergyModel& model) {
  if (const auto* tiwari = std::get_if<TiwariModel>(&model)) {
    Rat total = 0;
    for (const auto& e : tiwari->externals) total += e;
    return total;
  }
  return 0;
}

namespace {

Rat rat_from_json(const json& v, const std::string& where) {
  if (v.is_number_integer()) return Rat(static_cast<long long>(v.get<std::int64_t>()));
  if (v.is_number_unsigned()) return Rat(static_cast<unsigned long long>(v.get<std::uint64_t>()));
  if (v.is_number_float()) {
    // shortest round-trip decimal keeps the author's literal exact
    if (auto r = parse_rat(json(v.get<double>()).dump())) return *r;
  }
  if (v.is_string())
    if (auto r = parse_rat(v.get<std::string>())) return *r;
  throw AnalysisError(ErrorKind::Model, "bad number for " + where);
}

Rat nonneg(const json& v, const std::string& where) {
  Rat r = rat_from_json(v, where);
  if (r < 0) throw AnalysisError(ErrorKind::Model, where + " must be nonnegative");
  return r;
}

GroupModel load_group(const json& j) {
  GroupModel m;
  const auto& e = j.at("E");
  const std::pair<const char*, Group> groups[] = {
      {"M", Group::M}, {"B", Group::B}, {"D", Group::D}, {"G", Group::G}};
  for (const auto& [key, g] : groups) {
    if (!e.contains(key))
      throw AnalysisError(ErrorKind::Model, std::string("group model misses E.") + key);
    m.e[g] = nonneg(e.at(key), std::string("E.") + key);
  }
  if (j.contains("call_arg_nj")) m.call_arg_nj = nonneg(j.at("call_arg_nj"), "call_arg_nj");
  if (j.contains("call_ret_nj")) m.call_ret_nj = nonneg(j.at("call_ret_nj"), "call_ret_nj");
  if (j.contains("widen_mul")) m.widen_mul = nonneg(j.at("widen_mul"), "widen_mul");
  return m;
}

Xs1Model load_xs1(const json& j) {
  Xs1Model m;
  m.p_base = nonneg(j.at("p_base_w"), "p_base_w");
  m.t_clk = rat_from_json(j.at("t_clk_s"), "t_clk_s");
  if (m.t_clk <= 0) throw AnalysisError(ErrorKind::Model, "t_clk_s must be positive");
  m.o = j.contains("O") ? rat_from_json(j.at("O"), "O") : Rat(1);
  for (const auto& v : j.at("M")) m.m.push_back(rat_from_json(v, "M"));
  if (m.m.empty()) throw AnalysisError(ErrorKind::Model, "xs1 model needs at least M_1");
  for (const auto& [name, v] : j.at("P").items()) m.p[name] = nonneg(v, "P." + name);
  return m;
}

TiwariModel load_tiwari(const json& j) {
  TiwariModel m;
  for (const auto& [name, v] : j.at("B").items()) m.base[name] = nonneg(v, "B." + name);
  if (j.contains("O"))
    for (const auto& [key, v] : j.at("O").items()) {
      auto comma = key.find(',');
      if (comma == std::string::npos)
        throw AnalysisError(ErrorKind::Model, "pair key '" + key + "' is not \"i,j\"");
      m.overhead[{key.substr(0, comma), key.substr(comma + 1)}] = nonneg(v, "O." + key);
    }
  if (j.contains("ext"))
    for (const auto& v : j.at("ext")) m.externals.push_back(nonneg(v, "ext"));
  return m;
}

MappingModel load_mapping(const json& j) {
  MappingModel m;
  for (const auto& site : j.at("sites")) {
    std::string fn = site.at("fn").get<std::string>();
    std::string block = site.at("block").get<std::string>();
    int index = site.at("index").get<int>();
    Rat total = 0;
    for (const auto& v : site.at("isa_nj")) total += nonneg(v, "isa_nj");
    auto [it, fresh] = m.per_ir.emplace(std::tuple{fn, block, index}, total);
    if (!fresh)
      throw AnalysisError(ErrorKind::Model,
                          "duplicate mapping site @" + fn + ":" + block + "[" +
                              std::to_string(index) + "]");
  }
  if (j.contains("phi_adjust")) m.phi_adjust = nonneg(j.at("phi_adjust"), "phi_adjust");
  return m;
}

}  // namespace

EnergyModel load_model_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw AnalysisError(ErrorKind::Model, std::string("model is not valid JSON: ") + e.what());
  }
  std::string kind = j.value("kind", "");
  if (kind.empty()) {
    if (j.contains("E")) kind = "group";
    else if (j.contains("p_base_w")) kind = "xs1";
    else if (j.contains("B")) kind = "tiwari";
    else if (j.contains("sites")) kind = "mapping";
  }
  try {
    if (kind == "group") return load_group(j);
    if (kind == "xs1") return load_xs1(j);
    if (kind == "tiwari") return load_tiwari(j);
    if (kind == "mapping") return load_mapping(j);
  } catch (const json::exception& e) {
    throw AnalysisError(ErrorKind::Model, std::string("malformed model: ") + e.what());
  }
  throw AnalysisError(ErrorKind::Model, "cannot tell the model kind from its keys");
}

EnergyModel load_model_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open model file " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return load_model_json(ss.str());
}

}  // namespace ergo
