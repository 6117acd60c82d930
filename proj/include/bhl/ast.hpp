// Program AST for the statistical DSL and its diagnostics.
#pragma once

#include <map>
#include <memory>
#include <set>
#include <string>
#include <vector>

#include "bhl/logic.hpp"
#include "bhl/specs.hpp"

namespace bhl {

struct Span {
  int line = 1, col = 1, end_line = 1, end_col = 1;
};

struct Diagnostic {
  Span span;
  std::string severity = "error";
  std::string code;
  std::string message;
};

inline std::string render_diagnostic(const std::string& file, const Diagnostic& d) {
  return file + ":" + std::to_string(d.span.line) + ":" + std::to_string(d.span.col) +
         ": " + d.severity + ": " + d.code + ": " + d.message;
}

struct FrontendError : std::runtime_error {
  Diagnostic diag;
  explicit FrontendError(Diagnostic d)
      : std::runtime_error(d.code + ": " + d.message), diag(std::move(d)) {}
};

// ---------------------------------------------------------------------------
// Expressions

struct Expr;
using ExprPtr = std::shared_ptr<Expr>;

enum class ExprKind { RealLit, Var, Call, Tuple, SumOp, MinOp };

struct CallArg {
  enum Kind { Ident, RealLit, Alt, Pair, Groups, Int } kind = Ident;
  std::string name;
  Rat value{0};
  AlternativeKind alt = AlternativeKind::Two;
  std::pair<std::string, std::string> pair;
  GroupList groups;
  int int_value = 0;
  Span span;
};

struct Expr {
  ExprKind kind = ExprKind::Var;
  Span span;
  Rat value{0};                  // RealLit
  std::string name;              // Var / Call callee
  std::vector<ExprPtr> parts;    // Tuple / SumOp / MinOp operands
  std::vector<CallArg> args;     // Call
  std::vector<ArgValue> resolved_args;  // filled in by the binder
};

struct LetStmt {
  std::string var;
  ExprPtr value;
  Span span;
};

// One conjunct of an ensures clause: either a record-level p-value claim
// "(Leq p) = compose_pvs H !st" or an ordinary formula.
struct EnsureClause {
  bool is_compose = false;
  PValueRecord::Kind rec_kind = PValueRecord::AtMost;
  std::string var;     // compose claim: the program variable on the left
  FormulaPtr hyp;      // compose claim: the composed hypothesis
  FormulaPtr formula;  // plain formula claim
  Span span;
};

struct FunctionDef {
  std::string name;
  std::vector<std::string> params;
  std::vector<LetStmt> lets;
  ExprPtr result;
  std::vector<std::string> result_pattern;  // "(p1, p2, p) = f ..." names
  std::vector<std::pair<FormulaPtr, Span>> requires_;  // top-level conjuncts
  std::vector<EnsureClause> ensures_;
  Span span;
};

struct SymbolTable {
  std::map<std::string, Population> populations;
  std::map<std::string, Dataset> datasets;
  std::map<std::string, FormulaPtr> hyps;
  std::set<std::string> real_vars;  // distribution parameters usable in terms
};

struct ProgramAST {
  SymbolTable symbols;
  std::vector<FunctionDef> functions;
};

}  // namespace bhl
