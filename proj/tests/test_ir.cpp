#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "ergo/error.hpp"
#include "ergo/ir.hpp"
#include "ergo/parser.hpp"

#include "support.hpp"

using namespace ergo;

TEST_CASE("parse and reprint every corpus module is a fixed point") {
  for (const auto& stem : ergotest::corpus_stems()) {
    Module m = ergotest::corpus_module(stem);
    std::string once = print_module(m);
    Module m2 = parse_module(once);
    CHECK(print_module(m2) == once);
    CHECK(validate(m).empty());
  }
}

TEST_CASE("instruction forms parse and classify") {
  Module m = parse_module(R"(
declare @ext cost 7/2

define @f(%a, %b) {
entry:
  %s = add %a, %b
  %w = mul i64 %s, 3
  %q = sdiv %s, 2
  %r = srem %s, 2
  %sh = shl %a, 1
  %lo = lshr %a, 1
  %m = and %a, %b
  %o = or %a, %b
  %x = xor %a, %b
  %c = icmp slt %a, %b
  %sel = select %c, %a, %b
  %v = memload
  memstore
  %e = call @ext(%sel)
  call @ext(%v)
  br label %next
next:
  %p = phi [ %s, %entry ]
  ret %p
}
)");
  REQUIRE(m.functions.size() == 1);
  const Function& f = m.functions[0];
  REQUIRE(f.blocks.size() == 2);
  const BasicBlock& entry = f.blocks[0];
  CHECK(entry.insts.size() == 16);
  CHECK(entry.insts[1].as<Op>()->bits == 64);
  CHECK(entry.insts[0].as<Op>()->bits == 32);
  CHECK(entry.insts[11].is<MemLoad>());
  CHECK(entry.insts[12].is<MemStore>());
  CHECK(entry.insts[13].as<Call>()->dest == "e");
  CHECK(!entry.insts[14].as<Call>()->dest);
  CHECK(is_terminator(entry.insts.back()));
  CHECK(f.blocks[1].phi_count() == 1);
  CHECK(m.external("ext")->cost == Rat(7) / 2);

  CHECK(defined_var(entry.insts[11]) == "v");
  CHECK(!defined_var(entry.insts[12]));
  auto uses = used_operands(f.blocks[1].insts[0]);
  REQUIRE(uses.size() == 1);
  CHECK(uses[0].var == "s");
}

TEST_CASE("opcode names round-trip") {
  for (Opcode op : {Opcode::Add, Opcode::Sub, Opcode::Mul, Opcode::SDiv, Opcode::SRem,
                    Opcode::Shl, Opcode::LShr, Opcode::And, Opcode::Or, Opcode::Xor,
                    Opcode::ICmpEq, Opcode::ICmpNe, Opcode::ICmpSlt, Opcode::ICmpSle,
                    Opcode::ICmpSgt, Opcode::ICmpSge, Opcode::Select}) {
    auto back = opcode_from_name(opcode_name(op));
    REQUIRE(back.has_value());
    CHECK(*back == op);
  }
  CHECK(!opcode_from_name("fadd"));
  CHECK(opcode_arity(Opcode::Select) == 3);
  CHECK(opcode_arity(Opcode::Add) == 2);
  CHECK(is_division(Opcode::SRem));
  CHECK(!is_division(Opcode::Mul));
  CHECK(is_icmp(Opcode::ICmpSge));
  CHECK(!is_icmp(Opcode::Select));
}

TEST_CASE("parse errors carry positions") {
  CHECK_THROWS_AS(parse_module("nonsense"), ParseError);
  try {
    parse_module("define @f() {\nentry:\n  %x = bogus %y, 1\n  ret\n}\n");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line == 3);
  }
  // missing operand count
  CHECK_THROWS_AS(parse_module("define @f() {\nentry:\n  %x = add 1\n  ret\n}\n"), ParseError);
  // select needs three operands
  CHECK_THROWS_AS(parse_module("define @f() {\nentry:\n  %x = select 1, 2\n  ret\n}\n"),
                  ParseError);
  // memload takes no operands
  CHECK_THROWS_AS(parse_module("define @f() {\nentry:\n  %x = memload %a\n  ret\n}\n"),
                  ParseError);
}

TEST_CASE("validation rejects structural mistakes") {
  auto violations = [](const std::string& text) { return validate(parse_module(text)); };

  // assigning the same name twice in a function
  CHECK(!violations("define @f(%a) {\nentry:\n  %x = add %a, 1\n  %x = add %a, 2\n  ret %x\n}\n")
             .empty());
  // reading a name never assigned
  CHECK(!violations("define @f() {\nentry:\n  %x = add %y, 1\n  ret %x\n}\n").empty());
  // phi lists a predecessor that is not one
  CHECK(!violations("define @f(%a) {\nentry:\n  br label %b\nb:\n  %p = phi [ %a, %nope ]\n  "
                    "ret %p\n}\n")
             .empty());
  // unknown callee
  CHECK(!violations("define @f() {\nentry:\n  call @ghost()\n  ret\n}\n").empty());
  // internal callee arity (externals carry no signature)
  CHECK(!violations("define @g(%x) {\nentry:\n  ret %x\n}\ndefine @f() {\nentry:\n  %r = call "
                    "@g(1, 2)\n  ret %r\n}\n")
             .empty());
  CHECK(violations("declare @e cost 1\ndefine @f() {\nentry:\n  call @e(1, 2)\n  ret\n}\n")
            .empty());
  // unreachable block
  CHECK(!violations("define @f() {\nentry:\n  ret\nlost:\n  ret\n}\n").empty());
  // phis must come first
  CHECK(!violations("define @f(%a) {\nentry:\n  br label %b\nb:\n  %y = add %a, 1\n  %p = phi [ "
                    "%a, %entry ]\n  ret %p\n}\n")
             .empty());
  // terminator required
  CHECK(!violations("define @f() {\nentry:\n  %x = add 1, 2\n}\n").empty());

  validate_or_throw(parse_module("define @f() {\nentry:\n  ret\n}\n"));
  CHECK_THROWS_AS(validate_or_throw(parse_module(
                      "define @f() {\nentry:\n  %x = add %y, 1\n  ret %x\n}\n")),
                  AnalysisError);
}

TEST_CASE("print_instruction matches source spelling") {
  Module m = ergotest::corpus_module("euclid");
  const Function& f = m.functions[0];
  const BasicBlock* loop = f.block("loop");
  REQUIRE(loop != nullptr);
  CHECK(print_instruction(loop->insts[0]) == "%x = phi [ %a, %entry ], [ %y, %body ]");
  CHECK(print_instruction(loop->insts[2]) == "%go = icmp sgt %y, 0");
  CHECK(print_instruction(loop->insts[3]) == "br %go, label %body, label %done");
  CHECK(print_instruction(f.block("body")->insts[0]) == "%r = srem %x, %y");
  CHECK(print_instruction(f.block("done")->insts[0]) == "ret %x");
}
