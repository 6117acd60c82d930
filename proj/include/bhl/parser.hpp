// Recursive-descent parser for .swl programs and their annotation formulas.
//
// Precedence in formulas: \/ binds tighter than /\, so a requires clause is a
// top-level conjunction of possibly-disjunctive items. The sugar that omits
// "(World (!st) interp) |=" produces the same AST as the explicit form.
#pragma once

#include <set>
#include <string>
#include <vector>

#include "bhl/ast.hpp"
#include "bhl/lexer.hpp"
#include "bhl/specs.hpp"

namespace bhl {

class Parser {
 public:
  Parser(std::string source, const std::map<std::string, CommandSpec>& specs = builtin_specs())
      : specs_(specs) {
    Lexer lex(std::move(source));
    toks_ = lex.run();
  }

  ProgramAST parse_program() {
    ProgramAST prog;
    sym_ = &prog.symbols;
    while (!at(Tok::Eof)) {
      if (at_ident("population"))
        parse_population(prog);
      else if (at_ident("dataset"))
        parse_dataset(prog);
      else if (at_ident("hyp"))
        parse_hyp(prog);
      else if (at_ident("let"))
        prog.functions.push_back(parse_function());
      else
        fail("expected declaration or function (one of: population, dataset, hyp, let)");
    }
    return prog;
  }

  // Entry point for parsing a formula in isolation against known symbols.
  FormulaPtr parse_formula_only(const SymbolTable& sym) {
    sym_external_ = &sym;
    sym_ = nullptr;
    FormulaPtr f = parse_formula();
    expect(Tok::Eof, "end of formula");
    return f;
  }

 private:
  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  const std::map<std::string, CommandSpec>& specs_;
  SymbolTable* sym_ = nullptr;                  // being built (program mode)
  const SymbolTable* sym_external_ = nullptr;   // formula-only mode

  const SymbolTable& sym() const { return sym_ ? *sym_ : *sym_external_; }

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(std::size_t k = 1) const {
    return toks_[std::min(pos_ + k, toks_.size() - 1)];
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool at_ident(const char* s) const { return at(Tok::Ident) && cur().text == s; }
  Token advance() { return toks_[pos_++]; }

  [[noreturn]] void fail(const std::string& msg, const char* code = "E002") const {
    throw FrontendError({cur().span, "error", code, msg});
  }
  [[noreturn]] void unresolved(const Token& t) const {
    throw FrontendError({t.span, "error", "E003",
                         "unresolved identifier '" + t.text + "'"});
  }

  Token expect(Tok k, const std::string& what) {
    if (!at(k)) fail("expected " + what + ", found '" + cur().text + "'");
    return advance();
  }
  Token expect_ident(const char* s) {
    if (!at_ident(s)) fail(std::string("expected '") + s + "', found '" + cur().text + "'");
    return advance();
  }

  // index of the token matching the LParen at position i
  std::size_t matching_paren(std::size_t i) const {
    int depth = 0;
    for (std::size_t j = i; j < toks_.size(); ++j) {
      if (toks_[j].kind == Tok::LParen) ++depth;
      if (toks_[j].kind == Tok::RParen && --depth == 0) return j;
    }
    return toks_.size() - 1;
  }

  static bool is_cmp(Tok k) {
    return k == Tok::CmpLt || k == Tok::CmpGt || k == Tok::CmpNeq || k == Tok::CmpEq ||
           k == Tok::CmpLe || k == Tok::CmpGe;
  }
  static Pred cmp_pred(Tok k) {
    switch (k) {
      case Tok::CmpLt: return Pred::Lt;
      case Tok::CmpGt: return Pred::Gt;
      case Tok::CmpNeq: return Pred::Neq;
      case Tok::CmpEq: return Pred::Eq;
      case Tok::CmpLe: return Pred::Leq;
      default: return Pred::Geq;
    }
  }

  // -------------------------------------------------------------------------
  // Declarations

  void parse_population(ProgramAST& prog) {
    advance();  // population
    Token id = expect(Tok::Ident, "population name");
    expect(Tok::Colon, "':'");
    Population p;
    p.id = id.text;
    if (at_ident("normal")) {
      advance();
      expect(Tok::LParen, "'('");
      p.dist = DistKind::Normal;
      p.mu = expect(Tok::Ident, "mean parameter").text;
      expect(Tok::Comma, "','");
      p.sigma = expect(Tok::Ident, "sd parameter").text;
      expect(Tok::RParen, "')'");
      prog.symbols.real_vars.insert(p.mu);
      prog.symbols.real_vars.insert(p.sigma);
    } else if (at_ident("unknown")) {
      advance();
      p.dist = DistKind::Unknown;
    } else {
      fail("expected 'normal(mu, sigma)' or 'unknown'");
    }
    if (prog.symbols.populations.count(p.id))
      fail("population '" + p.id + "' declared twice");
    prog.symbols.populations.emplace(p.id, std::move(p));
  }

  void parse_dataset(ProgramAST& prog) {
    advance();  // dataset
    Token id = expect(Tok::Ident, "dataset name");
    expect_ident("from");
    Token src = expect(Tok::Ident, "population name");
    if (!prog.symbols.populations.count(src.text))
      throw FrontendError({src.span, "error", "E004",
                           "undeclared population '" + src.text + "'"});
    Dataset d;
    d.id = id.text;
    d.source = src.text;
    if (at_ident("size")) {
      advance();
      Token n = expect(Tok::Number, "dataset size");
      d.size = static_cast<int>(n.value.numerator());
      if (!n.is_integer || d.size < 2)
        throw FrontendError({n.span, "error", "E005", "dataset size must be an integer >= 2"});
    }
    prog.symbols.datasets.emplace(d.id, std::move(d));
  }

  void parse_hyp(ProgramAST& prog) {
    advance();  // hyp
    Token id = expect(Tok::Ident, "hypothesis name");
    expect(Tok::Equal, "'='");
    FormulaPtr f = parse_formula();
    if (!modality_free(f))
      throw FrontendError({id.span, "error", "E006",
                           "hypothesis '" + id.text + "' must not contain modal operators"});
    prog.symbols.hyps.emplace(id.text, f);
  }

  // -------------------------------------------------------------------------
  // Formulas

  FormulaPtr parse_formula() {  // conjunction level
    std::vector<FormulaPtr> items;
    items.push_back(parse_disj());
    while (at(Tok::AndOp)) {
      advance();
      items.push_back(parse_disj());
    }
    return items.size() == 1 ? items[0] : Formula::conj(std::move(items));
  }

  FormulaPtr parse_disj() {
    std::vector<FormulaPtr> items;
    items.push_back(parse_funit());
    while (at(Tok::OrOp)) {
      advance();
      items.push_back(parse_funit());
    }
    return items.size() == 1 ? items[0] : Formula::disj(std::move(items));
  }

  FormulaPtr parse_funit() {
    if (at(Tok::Ident)) {
      const std::string& w = cur().text;
      if (w == "Not") { advance(); return Formula::negate(parse_funit()); }
      if (w == "Possible") { advance(); return Formula::possible(parse_funit()); }
      if (w == "Know") { advance(); return Formula::know(parse_funit()); }
      if (w == "StatB") { advance(); return parse_statb(); }
      if (w == "Conj" || w == "Disj") {
        bool is_conj = w == "Conj";
        advance();
        FormulaPtr a = parse_funit();
        FormulaPtr b = parse_funit();
        return is_conj ? Formula::conj({a, b}) : Formula::disj({a, b});
      }
      if (w == "sampled" || w == "non_paired" || w == "paired" || w == "is_normal" ||
          w == "eq_var" || w == "is_empty" || w == "pvalue")
        return parse_predapp();
      if (w == "World") return parse_world_prefixed(/*parenthesized=*/false);
    }
    if (at(Tok::LParen)) {
      if (peek().kind == Tok::Ident && peek().text == "World") {
        advance();  // (
        FormulaPtr f = parse_world_prefixed(/*parenthesized=*/true);
        return f;
      }
      // Distinguish "(formula)" from a parenthesized comparison operand
      std::size_t close = matching_paren(pos_);
      if (is_cmp(toks_[std::min(close + 1, toks_.size() - 1)].kind))
        return parse_comparison();
      advance();  // (
      FormulaPtr f = parse_formula();
      expect(Tok::RParen, "')'");
      return f;
    }
    if (at(Tok::Ident)) {
      // hypothesis abbreviation, unless it starts a comparison
      auto it = sym().hyps.find(cur().text);
      if (it != sym().hyps.end() && !is_cmp(peek().kind)) {
        advance();
        return it->second;  // expanded at the use site
      }
    }
    return parse_comparison();
  }

  FormulaPtr parse_world_prefixed(bool parenthesized) {
    expect_ident("World");
    if (at(Tok::LParen)) { advance(); expect(Tok::Bang, "'!'"); expect_ident("st"); expect(Tok::RParen, "')'"); }
    else { expect(Tok::Bang, "'!'"); expect_ident("st"); }
    expect_ident("interp");
    if (parenthesized) expect(Tok::RParen, "')'");
    expect(Tok::Sat, "'|='");
    return parse_funit();
  }

  FormulaPtr parse_statb() {
    expect(Tok::LParen, "'('");
    PValueRecord::Kind kind;
    if (at_ident("Leq")) { advance(); kind = PValueRecord::AtMost; }
    else if (at_ident("Eq")) { advance(); kind = PValueRecord::Exact; }
    else fail("expected 'Leq' or 'Eq' in StatB record");
    PvExpr bound;
    if (at(Tok::Number)) bound = PvExpr::constant(advance().value);
    else bound = PvExpr::variable(expect(Tok::Ident, "p-value variable").text);
    expect(Tok::RParen, "')'");
    FormulaPtr hyp = parse_funit();
    if (!modality_free(hyp))
      fail("StatB hypothesis must not contain modal operators", "E006");
    return Formula::stat_b(PValueRecord(kind, std::move(bound)), std::move(hyp));
  }

  FormulaPtr parse_predapp() {
    Token p = advance();
    auto named_arg = [&]() -> Token {
      if (at(Tok::LParen)) {
        advance();
        Token t = expect(Tok::Ident, "identifier");
        expect(Tok::RParen, "')'");
        return t;
      }
      return expect(Tok::Ident, "identifier");
    };
    auto pop_arg = [&]() {
      Token t = named_arg();
      if (!sym().populations.count(t.text)) unresolved(t);
      return Term::pop(t.text);
    };
    auto data_arg = [&]() {
      Token t = named_arg();
      if (!sym().datasets.count(t.text)) unresolved(t);
      return Term::data(t.text);
    };
    if (p.text == "is_empty") {
      if (at(Tok::LParen)) { advance(); expect(Tok::Bang, "'!'"); expect_ident("st"); expect(Tok::RParen, "')'"); }
      else { expect(Tok::Bang, "'!'"); expect_ident("st"); }
      return Formula::make_atom(Pred::IsEmpty, {});
    }
    if (p.text == "sampled") {
      Term y = data_arg();
      Term pop = pop_arg();
      return Formula::make_atom(Pred::Sampled, {y, pop});
    }
    if (p.text == "non_paired" || p.text == "paired") {
      Term a = data_arg(), b = data_arg();
      return Formula::make_atom(p.text == "paired" ? Pred::Paired : Pred::NonPaired, {a, b});
    }
    if (p.text == "is_normal") return Formula::make_atom(Pred::IsNormal, {pop_arg()});
    if (p.text == "eq_var") {
      Term a = pop_arg(), b = pop_arg();
      return Formula::make_atom(Pred::EqVar, {a, b});
    }
    // pvalue
    Term t = parse_term();
    return Formula::make_atom(Pred::PValue, {t});
  }

  FormulaPtr parse_comparison() {
    Term lhs = parse_term();
    if (!is_cmp(cur().kind))
      fail("expected a comparison operator after term");
    Pred p = cmp_pred(advance().kind);
    Term rhs = parse_term();
    return Formula::make_atom(p, {lhs, rhs});
  }

  Term parse_term() {
    if (at(Tok::LParen)) {
      advance();
      Term t = parse_term();
      expect(Tok::RParen, "')'");
      return t;
    }
    if (at(Tok::Number)) return Term::real(advance().value);
    if (at_ident("mean")) {
      advance();
      Token id = [&] {
        if (at(Tok::LParen)) {
          advance();
          Token t = expect(Tok::Ident, "identifier");
          expect(Tok::RParen, "')'");
          return t;
        }
        return expect(Tok::Ident, "identifier");
      }();
      if (sym().populations.count(id.text)) return Term::mean_pop(id.text);
      if (sym().datasets.count(id.text)) return Term::mean_data(id.text);
      unresolved(id);
    }
    if (at_ident("const_term")) {
      advance();
      if (at(Tok::Number)) return Term::real(advance().value);
      Token id = expect(Tok::Ident, "real variable");
      if (!sym().real_vars.count(id.text)) unresolved(id);
      return Term::real_var(id.text);
    }
    if (at(Tok::Ident)) {
      Token id = advance();
      if (sym().populations.count(id.text)) return Term::pop(id.text);
      if (sym().datasets.count(id.text)) return Term::data(id.text);
      if (sym().real_vars.count(id.text)) return Term::real_var(id.text);
      unresolved(id);
    }
    fail("expected a term");
  }

  // -------------------------------------------------------------------------
  // Functions

  FunctionDef parse_function() {
    FunctionDef fn;
    fn.span = cur().span;
    advance();  // let
    fn.name = expect(Tok::Ident, "function name").text;
    while (at(Tok::Ident)) fn.params.push_back(advance().text);
    expect(Tok::Equal, "'='");
    while (at_ident("let")) {
      LetStmt st;
      st.span = cur().span;
      advance();
      st.var = expect(Tok::Ident, "variable name").text;
      expect(Tok::Equal, "'='");
      st.value = parse_expr();
      expect_ident("in");
      fn.lets.push_back(std::move(st));
    }
    fn.result = parse_expr();
    expect(Tok::AnnotStart, "annotation '(*@'");
    parse_annotation(fn);
    expect(Tok::AnnotEnd, "'*)'");
    return fn;
  }

  ExprPtr parse_expr() {
    if (at_ident("min")) {
      auto e = std::make_shared<Expr>();
      e->kind = ExprKind::MinOp;
      e->span = cur().span;
      advance();
      e->parts.push_back(parse_aexpr());
      e->parts.push_back(parse_aexpr());
      return e;
    }
    ExprPtr first = parse_aexpr();
    if (!at(Tok::PlusDot)) return first;
    auto e = std::make_shared<Expr>();
    e->kind = ExprKind::SumOp;
    e->span = first->span;
    e->parts.push_back(first);
    while (at(Tok::PlusDot)) {
      advance();
      e->parts.push_back(parse_aexpr());
    }
    return e;
  }

  ExprPtr parse_aexpr() {
    auto e = std::make_shared<Expr>();
    e->span = cur().span;
    if (at(Tok::Number)) {
      e->kind = ExprKind::RealLit;
      e->value = advance().value;
      return e;
    }
    if (at(Tok::LParen)) {
      advance();
      ExprPtr inner = parse_expr();
      if (at(Tok::Comma)) {
        e->kind = ExprKind::Tuple;
        e->parts.push_back(inner);
        while (at(Tok::Comma)) {
          advance();
          e->parts.push_back(parse_expr());
        }
        expect(Tok::RParen, "')'");
        return e;
      }
      expect(Tok::RParen, "')'");
      return inner;
    }
    Token id = expect(Tok::Ident, "expression");
    if (specs_.count(id.text)) {
      e->kind = ExprKind::Call;
      e->name = id.text;
      parse_call_args(*e);
      return e;
    }
    e->kind = ExprKind::Var;
    e->name = id.text;
    return e;
  }

  void parse_call_args(Expr& call) {
    while (true) {
      CallArg a;
      a.span = cur().span;
      if (at(Tok::Number)) {
        Token t = advance();
        a.kind = CallArg::RealLit;
        a.value = t.value;
        a.int_value = static_cast<int>(t.value.numerator());
        if (!t.is_integer) a.int_value = -1;
      } else if (at(Tok::Ident) && cur().text != "in") {
        const std::string& w = cur().text;
        if (w == "Two" || w == "Up" || w == "Low") {
          a.kind = CallArg::Alt;
          a.alt = w == "Two" ? AlternativeKind::Two
                             : w == "Up" ? AlternativeKind::Up : AlternativeKind::Low;
          advance();
        } else {
          a.kind = CallArg::Ident;
          a.name = advance().text;
        }
      } else if (at(Tok::LParen)) {
        advance();
        a.kind = CallArg::Pair;
        a.pair.first = expect(Tok::Ident, "dataset name").text;
        expect(Tok::Comma, "','");
        a.pair.second = expect(Tok::Ident, "dataset name").text;
        expect(Tok::RParen, "')'");
      } else if (at(Tok::LBracket)) {
        advance();
        a.kind = CallArg::Groups;
        while (!at(Tok::RBracket)) {
          expect(Tok::LParen, "'('");
          std::string pop = expect(Tok::Ident, "population name").text;
          expect(Tok::Comma, "','");
          std::string data = expect(Tok::Ident, "dataset name").text;
          expect(Tok::RParen, "')'");
          a.groups.emplace_back(pop, data);
          if (at(Tok::Semi) || at(Tok::Comma)) advance();
        }
        advance();  // ]
      } else {
        return;
      }
      call.args.push_back(std::move(a));
    }
  }

  void parse_annotation(FunctionDef& fn) {
    if (!at_ident("requires")) {
      // result pattern: "p = f a b" or "(p1, p2, p) = f a b"
      if (at(Tok::LParen)) {
        advance();
        fn.result_pattern.push_back(expect(Tok::Ident, "name").text);
        while (at(Tok::Comma)) {
          advance();
          fn.result_pattern.push_back(expect(Tok::Ident, "name").text);
        }
        expect(Tok::RParen, "')'");
      } else {
        fn.result_pattern.push_back(expect(Tok::Ident, "name").text);
      }
      expect(Tok::Equal, "'='");
      expect(Tok::Ident, "function name");
      while (at(Tok::Ident) && cur().text != "requires") advance();
    }
    expect_ident("requires");
    // top-level conjuncts, each with its own span for diagnostics
    while (true) {
      Span sp = cur().span;
      FormulaPtr item = parse_disj();
      fn.requires_.emplace_back(item, sp);
      if (at(Tok::AndOp)) advance();
      else break;
    }
    expect_ident("ensures");
    bool wrapped = false;
    if (at(Tok::LParen)) {
      std::size_t close = matching_paren(pos_);
      if (toks_[std::min(close + 1, toks_.size() - 1)].kind == Tok::AnnotEnd) {
        wrapped = true;
        advance();
      }
    }
    while (true) {
      fn.ensures_.push_back(parse_ensure());
      if (at(Tok::AmpAmp)) advance();
      else break;
    }
    if (wrapped) expect(Tok::RParen, "')'");
  }

  EnsureClause parse_ensure() {
    EnsureClause e;
    e.span = cur().span;
    // try a compose claim: [ "(" ] ("Leq"|"Eq") var [ ")" ] "=" "compose_pvs" H "!st"
    std::size_t save = pos_;
    bool opened = false;
    if (at(Tok::LParen)) { advance(); opened = true; }
    if (at_ident("Leq") || at_ident("Eq")) {
      e.rec_kind = cur().text == "Leq" ? PValueRecord::AtMost : PValueRecord::Exact;
      advance();
      if (at(Tok::Ident)) {
        e.var = advance().text;
        if (opened && at(Tok::RParen)) advance();
        if (at(Tok::Equal) && peek().kind == Tok::Ident && peek().text == "compose_pvs") {
          advance();  // =
          advance();  // compose_pvs
          e.hyp = parse_funit();
          expect(Tok::Bang, "'!'");
          expect_ident("st");
          e.is_compose = true;
          return e;
        }
      }
    }
    pos_ = save;
    e.formula = parse_disj();
    return e;
  }
};

inline ProgramAST parse(const std::string& source) {
  Parser p(source);
  return p.parse_program();
}

inline FormulaPtr parse_formula(const std::string& text, const SymbolTable& sym) {
  Parser p(text);
  return p.parse_formula_only(sym);
}

}  // namespace bhl
