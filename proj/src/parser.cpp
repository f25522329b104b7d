#include "ergo/parser.hpp"

#include "ergo/error.hpp"

#include <cctype>
#include <fstream>
#include <sstream>

namespace ergo {

namespace {

enum class Tok {
  Ident,    // bare identifier or keyword (may contain . and _)
  Local,    // %name
  Global,   // @name
  Number,   // optionally signed integer or decimal
  LBrace,
  RBrace,
  LParen,
  RParen,
  LBracket,
  RBracket,
  Comma,
  Colon,
  Equals,
  Slash,
  End,
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int line = 0;
  int col = 0;
};

bool ident_char(char c) {
  return std::isalnum(static_cast<unsigned char>(c)) || c == '_' || c == '.' || c == '-';
}

class Lexer {
 public:
  explicit Lexer(const std::string& text) : text_(text) { advance(); }

  const Token& peek() const { return tok_; }

  Token take() {
    Token t = tok_;
    advance();
    return t;
  }

 private:
  void advance() {
    while (pos_ < text_.size()) {
      char c = text_[pos_];
      if (c == '#') {
        while (pos_ < text_.size() && text_[pos_] != '\n') ++pos_;
      } else if (c == '\n') {
        ++line_;
        col_ = 1;
        ++pos_;
      } else if (std::isspace(static_cast<unsigned char>(c))) {
        ++col_;
        ++pos_;
      } else {
        break;
      }
    }
    tok_ = {Tok::End, "", line_, col_};
    if (pos_ >= text_.size()) return;
    char c = text_[pos_];
    switch (c) {
      case '{': single(Tok::LBrace); return;
      case '}': single(Tok::RBrace); return;
      case '(': single(Tok::LParen); return;
      case ')': single(Tok::RParen); return;
      case '[': single(Tok::LBracket); return;
      case ']': single(Tok::RBracket); return;
      case ',': single(Tok::Comma); return;
      case ':': single(Tok::Colon); return;
      case '=': single(Tok::Equals); return;
      case '/': single(Tok::Slash); return;
      default: break;
    }
    if (c == '%' || c == '@') {
      std::size_t start = ++pos_;
      ++col_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) consume();
      if (pos_ == start) throw ParseError("empty name after sigil", line_, col_);
      tok_.kind = c == '%' ? Tok::Local : Tok::Global;
      tok_.text = text_.substr(start, pos_ - start);
      return;
    }
    bool neg = c == '-' && pos_ + 1 < text_.size() &&
               std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]));
    if (std::isdigit(static_cast<unsigned char>(c)) || neg) {
      std::size_t start = pos_;
      if (neg) consume();
      while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) consume();
      if (pos_ + 1 < text_.size() && text_[pos_] == '.' &&
          std::isdigit(static_cast<unsigned char>(text_[pos_ + 1]))) {
        consume();
        while (pos_ < text_.size() && std::isdigit(static_cast<unsigned char>(text_[pos_]))) consume();
      }
      tok_.kind = Tok::Number;
      tok_.text = text_.substr(start, pos_ - start);
      return;
    }
    if (ident_char(c)) {
      std::size_t start = pos_;
      while (pos_ < text_.size() && ident_char(text_[pos_])) consume();
      tok_.kind = Tok::Ident;
      tok_.text = text_.substr(start, pos_ - start);
      return;
    }
    throw ParseError(std::string("unexpected character '") + c + "'", line_, col_);
  }

  void single(Tok kind) {
    tok_.kind = kind;
    tok_.text = text_[pos_];
    consume();
  }

  void consume() {
    ++pos_;
    ++col_;
  }

  const std::string& text_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
  Token tok_;
};

class Parser {
 public:
  explicit Parser(const std::string& text) : lex_(text) {}

  Module run() {
    Module m;
    while (lex_.peek().kind != Tok::End) {
      Token t = expect(Tok::Ident, "'define' or 'declare'");
      if (t.text == "declare")
        m.externals.push_back(parse_declare());
      else if (t.text == "define")
        m.functions.push_back(parse_define());
      else
        fail(t, "expected 'define' or 'declare'");
    }
    return m;
  }

 private:
  [[noreturn]] void fail(const Token& t, const std::string& msg) {
    throw ParseError(msg + (t.text.empty() ? "" : ", got '" + t.text + "'"), t.line, t.col);
  }

  Token expect(Tok kind, const std::string& what) {
    Token t = lex_.take();
    if (t.kind != kind) fail(t, "expected " + what);
    return t;
  }

  bool accept(Tok kind, const std::string& text = "") {
    if (lex_.peek().kind != kind) return false;
    if (!text.empty() && lex_.peek().text != text) return false;
    lex_.take();
    return true;
  }

  ExternalDecl parse_declare() {
    ExternalDecl d;
    d.name = expect(Tok::Global, "@name").text;
    Token kw = expect(Tok::Ident, "'cost'");
    if (kw.text != "cost") fail(kw, "expected 'cost'");
    Token num = expect(Tok::Number, "cost value");
    std::string text = num.text;
    if (accept(Tok::Slash)) text += "/" + expect(Tok::Number, "denominator").text;
    auto value = parse_rat(text);
    if (!value) fail(num, "malformed cost value");
    d.cost = *value;
    return d;
  }

  Function parse_define() {
    Function f;
    f.name = expect(Tok::Global, "@name").text;
    expect(Tok::LParen, "'('");
    if (lex_.peek().kind != Tok::RParen) {
      do {
        f.params.push_back(expect(Tok::Local, "%param").text);
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "')'");
    expect(Tok::LBrace, "'{'");
    while (!accept(Tok::RBrace)) {
      if (lex_.peek().kind == Tok::End) fail(lex_.peek(), "missing '}'");
      f.blocks.push_back(parse_block());
    }
    if (f.blocks.empty()) {
      Token t = lex_.peek();
      throw ParseError("function @" + f.name + " has no blocks", t.line, t.col);
    }
    return f;
  }

  BasicBlock parse_block() {
    BasicBlock bb;
    Token name = expect(Tok::Ident, "block label");
    bb.label = name.text;
    expect(Tok::Colon, "':' after block label");
    while (true) {
      Token t = lex_.peek();
      if (t.kind == Tok::RBrace || t.kind == Tok::End) break;
      // a new block starts with `label:`
      if (t.kind == Tok::Ident && !is_instruction_head(t.text)) break;
      bb.insts.push_back(parse_instruction());
      if (is_terminator(bb.insts.back())) break;
    }
    return bb;
  }

  static bool is_instruction_head(const std::string& word) {
    return word == "br" || word == "ret" || word == "memstore" || word == "call";
  }

  Instruction parse_instruction() {
    Token t = lex_.take();
    Instruction inst;
    inst.line = t.line;
    if (t.kind == Tok::Local) {
      expect(Tok::Equals, "'='");
      Token head = lex_.take();
      if (head.kind != Tok::Ident) fail(head, "expected instruction name");
      if (head.text == "phi") {
        inst.v = parse_phi(t.text);
      } else if (head.text == "call") {
        Call c = parse_call();
        c.dest = t.text;
        inst.v = std::move(c);
      } else if (head.text == "memload") {
        inst.v = MemLoad{t.text};
      } else {
        inst.v = parse_op(t.text, head);
      }
      return inst;
    }
    if (t.kind != Tok::Ident) fail(t, "expected instruction");
    if (t.text == "br") {
      inst.v = parse_br();
    } else if (t.text == "ret") {
      Ret r;
      if (lex_.peek().kind == Tok::Local || lex_.peek().kind == Tok::Number)
        r.value = parse_operand();
      inst.v = std::move(r);
    } else if (t.text == "memstore") {
      inst.v = MemStore{};
    } else if (t.text == "call") {
      inst.v = parse_call();
    } else {
      fail(t, "unknown instruction");
    }
    return inst;
  }

  Phi parse_phi(std::string dest) {
    Phi phi;
    phi.dest = std::move(dest);
    do {
      expect(Tok::LBracket, "'['");
      PhiIncoming in;
      in.value = parse_operand();
      expect(Tok::Comma, "','");
      in.pred = expect(Tok::Local, "%pred").text;
      expect(Tok::RBracket, "']'");
      phi.incomings.push_back(std::move(in));
    } while (accept(Tok::Comma));
    return phi;
  }

  Op parse_op(std::string dest, const Token& head) {
    Op op;
    op.dest = std::move(dest);
    std::string name = head.text;
    if (name == "icmp") {
      Token cond = expect(Tok::Ident, "icmp condition");
      name += "-" + cond.text;
    }
    auto opc = opcode_from_name(name);
    if (!opc) fail(head, "unknown opcode '" + name + "'");
    op.op = *opc;
    maybe_type_tag(op);
    op.args.push_back(parse_operand());
    for (int i = 1; i < opcode_arity(op.op); ++i) {
      expect(Tok::Comma, "','");
      op.args.push_back(parse_operand());
    }
    return op;
  }

  void maybe_type_tag(Op& op) {
    const Token& t = lex_.peek();
    if (t.kind != Tok::Ident || t.text.size() < 2 || t.text[0] != 'i') return;
    for (std::size_t i = 1; i < t.text.size(); ++i)
      if (!std::isdigit(static_cast<unsigned char>(t.text[i]))) return;
    op.bits = std::stoi(lex_.take().text.substr(1));
  }

  Call parse_call() {
    accept(Tok::Ident, "void");
    Call c;
    c.callee = expect(Tok::Global, "@callee").text;
    expect(Tok::LParen, "'('");
    if (lex_.peek().kind != Tok::RParen) {
      do {
        c.args.push_back(parse_operand());
      } while (accept(Tok::Comma));
    }
    expect(Tok::RParen, "')'");
    return c;
  }

  std::variant<Phi, Op, Call, MemLoad, MemStore, CondBr, Br, Ret> parse_br() {
    if (accept(Tok::Ident, "label")) {
      Br br;
      br.target = expect(Tok::Local, "%target").text;
      return br;
    }
    accept(Tok::Ident, "i1");  // optional flavor tag on conditional branches
    CondBr cbr;
    cbr.pred = parse_operand();
    expect(Tok::Comma, "','");
    expect_label_kw();
    cbr.then_label = expect(Tok::Local, "%label").text;
    expect(Tok::Comma, "','");
    expect_label_kw();
    cbr.else_label = expect(Tok::Local, "%label").text;
    return cbr;
  }

  void expect_label_kw() {
    Token t = expect(Tok::Ident, "'label'");
    if (t.text != "label") fail(t, "expected 'label'");
  }

  Operand parse_operand() {
    Token t = lex_.take();
    if (t.kind == Tok::Local) return Operand::variable(t.text);
    if (t.kind == Tok::Number) {
      if (t.text.find('.') != std::string::npos) fail(t, "integer literal expected");
      return Operand::literal(Int(t.text));
    }
    fail(t, "expected operand");
  }

  Lexer lex_;
};

}  // namespace

Module parse_module(const std::string& text) { return Parser(text).run(); }

Module parse_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  try {
    return parse_module(buf.str());
  } catch (const ParseError& e) {
    std::string msg = e.what();
    if (auto at = msg.rfind(" at line "); at != std::string::npos)
      msg.resize(at);  // the constructor re-appends the position
    throw ParseError(path + ": " + msg, e.line, e.col);
  }
}

}  // namespace ergo
