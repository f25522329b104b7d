#pragma once

#include "ergo/ir.hpp"

#include <map>
#include <string>
#include <variant>
#include <vector>

namespace ergo {

/// Instruction groups: memory, program flow, division, everything else.
enum class Group { M, B, D, G };

char group_letter(Group g);

/// Total classification: CondBr/Br/Call/Ret -> B, MemLoad/MemStore -> M,
/// sdiv/srem -> D, Phi and every other Op (select included) -> G.
Group classify(const Instruction& inst);

/// Mnemonic used by name-keyed models: "add", "icmp-slt", "phi", "call",
/// "memload", "memstore", "br" (either branch form), "ret".
std::string instruction_name(const Instruction& inst);

/// Per-group energy in nanojoules plus adjustments: each call costs an extra
/// increment per argument and one more when it produces a value; ops on data
/// wider than 32 bits scale by widen_mul.
struct GroupModel {
  std::map<Group, Rat> e;
  Rat call_arg_nj = 0;
  Rat call_ret_nj = 0;
  Rat widen_mul = 1;
};

/// Power-and-period model: each instruction at thread level t costs
/// (M_t * P_i * O + P_base) * T_clk joules; idle periods cost P_base * T_clk.
struct Xs1Model {
  Rat p_base;            // watts
  Rat t_clk;             // seconds
  Rat o = 1;             // constant inter-instruction overhead scale
  std::vector<Rat> m;    // m[t-1] scales thread level t; size = max level
  std::map<std::string, Rat> p;  // instruction power in watts, by mnemonic
};

/// Base-plus-pair-overhead model: B_i per instruction, O_{i,j} per adjacent
/// pair within a block, plus program-level external effects E_k.
struct TiwariModel {
  std::map<std::string, Rat> base;                              // nJ
  std::map<std::pair<std::string, std::string>, Rat> overhead;  // nJ; unlisted pair = 0
  std::vector<Rat> externals;                                   // nJ, added once per program
};

/// Site-priced model from an ISA mapping: nanojoules per
/// (function, block, instruction index), each entry the sum of the ISA
/// instructions the IR instruction lowered to. phi_adjust rescales phi sites
/// (loop-hoisted phi copies can otherwise be overcounted); default 1.
struct MappingModel {
  std::map<std::tuple<std::string, std::string, int>, Rat> per_ir;
  Rat phi_adjust = 1;
};

using EnergyModel = std::variant<GroupModel, Xs1Model, TiwariModel, MappingModel>;

const char* model_kind(const EnergyModel& m);

/// Execution tallies consumed by the pricing equations.
struct InstructionCounts {
  std::map<std::string, Int> by_name;
  std::map<std::pair<std::string, std::string>, Int> by_pair;
  Int idle_periods = 0;
  std::map<std::pair<int, std::string>, Int> by_thread;  // (level, mnemonic)
};

/// Adds one execution of `bb`: names, within-block adjacent pairs (the pair
/// chain does not cross block boundaries), and thread-level-1 tallies.
void add_block_counts(const BasicBlock& bb, InstructionCounts& c);

/// sum B_i*N_i + sum O_ij*N_ij + sum E_k, in nanojoules.
/// Errors on a counted name the model does not price; unlisted pairs cost 0.
Rat tiwari_energy(const InstructionCounts& c, const TiwariModel& m);

/// P_base*N_idle*T_clk + sum over t,i of (M_t*P_i*O + P_base)*N_it*T_clk,
/// in joules. Errors when a used thread level has no M_t or a name no P_i.
Rat xs1_energy(const InstructionCounts& c, const Xs1Model& m);

/// Single-thread restriction: sum (M_1*P_i*O + P_base)*N_i*T_clk over
/// by_name, in joules. Identical to xs1_energy at level 1 with no idling.
Rat xs1_single_thread(const InstructionCounts& c, const Xs1Model& m);

/// sum E_i * N_i over the four groups, in nanojoules.
Rat group_energy(const std::map<Group, Int>& counts, const GroupModel& m);

std::map<Group, Int> group_counts(const BasicBlock& bb);

/// Energy of one execution of the block in nanojoules: model pricing plus the
/// declared cost of every external callee. Pair overhead stays within the
/// block; xs1 pricing is converted from joules (1 J = 1e9 nJ).
Rat block_cost(const Module& mod, const Function& f, const BasicBlock& bb,
               const EnergyModel& model);

/// Energy of the single instruction bb.insts[index] in nanojoules, including
/// its share of pair overhead (charged to the second instruction of a pair)
/// and any declared external call cost. Summed over a block this equals
/// block_cost exactly under every model.
Rat instruction_cost(const Module& mod, const Function& f, const BasicBlock& bb,
                     std::size_t index, const EnergyModel& model);

/// Program-level constant a run pays once regardless of trace: the external
/// effects of a Tiwari model, zero for the others.
Rat program_constant(const EnergyModel& model);

/// Model files are JSON; the shape is sniffed from the keys ("E" group,
/// "p_base_w" xs1, "B"/"O" tiwari, "sites" mapping) or forced by an optional
/// "kind". Numbers load exactly: integers directly, floats via their shortest
/// decimal form, strings as "7/2" or "0.25".
EnergyModel load_model_json(const std::string& text);
EnergyModel load_model_file(const std::string& path);

}  // namespace ergo
