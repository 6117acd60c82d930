// Symbolic execution of a function body into verification conditions.
//
// Entry facts are the requires conjuncts plus an is_normal fact for every
// population declared normal. The history starts empty only when the requires
// clause states is_empty (!st); otherwise its tail is unknown. Each command
// call emits one VC per instantiated requirement, then appends its history
// entries with fresh symbolic p-values named after the let variable. Ensures
// conjuncts become exit VCs against the final state.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "bhl/ast.hpp"
#include "bhl/entail.hpp"
#include "bhl/specs.hpp"

namespace bhl {

namespace detail {

inline SourceSpan to_loc(const Span& s) {
  return {s.line, s.col, s.end_line, s.end_col};
}

class VcGen {
 public:
  VcGen(const ProgramAST& prog, const FunctionDef& fn,
        const std::map<std::string, CommandSpec>& specs,
        std::optional<std::size_t> drop_requires)
      : prog_(prog), fn_(fn), specs_(specs), drop_(drop_requires) {}

  std::vector<VerifCondition> run() {
    init_state();
    for (const LetStmt& st : fn_.lets) step_let(st);
    bind_result_pattern();
    for (const EnsureClause& e : fn_.ensures_) exit_vc(e);
    return std::move(vcs_);
  }

 private:
  const ProgramAST& prog_;
  const FunctionDef& fn_;
  const std::map<std::string, CommandSpec>& specs_;
  std::optional<std::size_t> drop_;

  std::vector<FormulaPtr> facts_;
  TestHistory hist_;
  std::map<std::string, PvExpr> env_;  // program variable -> symbolic p-value
  std::vector<VerifCondition> vcs_;
  std::size_t next_index_ = 0;

  [[noreturn]] void err(const Span& sp, const char* code, const std::string& msg) {
    throw FrontendError({sp, "error", code, msg});
  }

  void init_state() {
    bool empty_stated = false;
    for (std::size_t i = 0; i < fn_.requires_.size(); ++i) {
      if (drop_ && *drop_ == i) continue;
      FormulaPtr f = normalize(fn_.requires_[i].first);
      if (f->conn == Conn::Atom && f->atom.pred == Pred::IsEmpty) empty_stated = true;
      facts_.push_back(f);
    }
    hist_.tail_unknown = !empty_stated;
    for (const auto& [id, pop] : prog_.symbols.populations)
      if (pop.dist == DistKind::Normal)
        facts_.push_back(Formula::make_atom(Pred::IsNormal, {Term::pop(id)}));
  }

  void push_vc(std::string label, Goal goal, const Span& sp) {
    VerifCondition vc;
    vc.id = fn_.name + ":" + std::to_string(next_index_++);
    vc.label = std::move(label);
    vc.hypothesis_facts = facts_;
    vc.history = hist_;
    vc.goal = std::move(goal);
    vc.loc = to_loc(sp);
    vcs_.push_back(std::move(vc));
  }

  void step_let(const LetStmt& st) {
    if (st.value->kind == ExprKind::Call) {
      step_command(st);
      return;
    }
    env_[st.var] = eval_pv(*st.value);
  }

  void step_command(const LetStmt& st) {
    const Expr& call = *st.value;
    const CommandSpec& spec = specs_.at(call.name);
    Instantiation inst = instantiate(spec, call.resolved_args);

    for (const LabeledFormula& lf : inst.requires_)
      push_vc(call.name + ": " + lf.label, lf.formula, st.span);

    std::size_t k = inst.entries.size();
    for (std::size_t i = 0; i < k; ++i) {
      const auto& [test_name, hyp] = inst.entries[i];
      std::string pv = k == 1 ? st.var : st.var + "_" + std::to_string(i + 1);
      hist_ = hist_.cons(HistoryEntry(
          test_name, hyp, PValueRecord(PValueRecord::Exact, PvExpr::variable(pv))));
    }
    if (k == 1) {
      env_[st.var] = PvExpr::variable(st.var);
    } else {
      // a multiple-comparison call reports the family-wise bound of its
      // disjunctive hypothesis; if the history cannot be composed (unknown
      // tail) the variable stays opaque and the exit VC fails downstream
      ComposeOutcome out = compose_pvs_ex(inst.hypothesis, hist_);
      env_[st.var] = out.ok() ? out.record->bound : PvExpr::variable(st.var);
    }
  }

  PvExpr eval_pv(const Expr& e) {
    switch (e.kind) {
      case ExprKind::RealLit:
        return PvExpr::constant(e.value);
      case ExprKind::Var: {
        auto it = env_.find(e.name);
        if (it == env_.end())
          err(e.span, "E009", "'" + e.name + "' has no p-value here");
        return it->second;
      }
      case ExprKind::MinOp:
      case ExprKind::SumOp: {
        std::vector<PvExpr> xs;
        for (const ExprPtr& p : e.parts) xs.push_back(eval_pv(*p));
        return e.kind == ExprKind::MinOp ? pv_min(std::move(xs)) : pv_sum(std::move(xs));
      }
      case ExprKind::Call:
        err(e.span, "E012", "commands must be bound by a let");
      case ExprKind::Tuple:
        err(e.span, "E012", "a tuple is not a p-value expression");
    }
    err(e.span, "E012", "not a p-value expression");
  }

  // Make the annotation's result names usable in ensures clauses.
  void bind_result_pattern() {
    if (fn_.result_pattern.empty()) return;
    if (fn_.result_pattern.size() == 1) {
      env_[fn_.result_pattern[0]] = eval_pv(*fn_.result);
      return;
    }
    for (std::size_t i = 0; i < fn_.result_pattern.size(); ++i)
      env_[fn_.result_pattern[i]] = eval_pv(*fn_.result->parts[i]);
  }

  // Replace program p-value variables in a StatB record bound by their
  // symbolic expressions, so "StatB (Leq p) h" talks about what p computes.
  PvExpr subst_pv(const PvExpr& e) {
    switch (e.kind) {
      case PvKind::Const:
        return e;
      case PvKind::Var: {
        auto it = env_.find(e.var);
        return it != env_.end() ? it->second : e;
      }
      case PvKind::Sum:
      case PvKind::Min: {
        std::vector<PvExpr> xs;
        for (const PvExpr& k : e.args) xs.push_back(subst_pv(k));
        return e.kind == PvKind::Sum ? pv_sum(std::move(xs)) : pv_min(std::move(xs));
      }
    }
    return e;
  }

  FormulaPtr subst_pv_vars(const FormulaPtr& f) {
    switch (f->conn) {
      case Conn::Atom:
        return f;
      case Conn::StatB:
        return Formula::stat_b(PValueRecord(f->pv.kind, subst_pv(f->pv.bound)), f->kids[0]);
      default: {
        std::vector<FormulaPtr> kids;
        bool changed = false;
        for (const FormulaPtr& k : f->kids) {
          kids.push_back(subst_pv_vars(k));
          changed = changed || kids.back() != k;
        }
        if (!changed) return f;
        switch (f->conn) {
          case Conn::Not: return Formula::negate(kids[0]);
          case Conn::Conj: return Formula::conj(std::move(kids));
          case Conn::Disj: return Formula::disj(std::move(kids));
          case Conn::Possible: return Formula::possible(kids[0]);
          default: return Formula::know(kids[0]);
        }
      }
    }
  }

  void exit_vc(const EnsureClause& e) {
    if (!e.is_compose) {
      FormulaPtr goal = normalize(subst_pv_vars(e.formula));
      push_vc("ensures " + pretty_print(normalize(e.formula)), goal, e.span);
      return;
    }
    auto it = env_.find(e.var);
    if (it == env_.end())
      err(e.span, "E009", "'" + e.var + "' has no p-value here");
    PValueGoal g;
    g.kind = e.rec_kind;
    g.program_expr = it->second;
    g.hypothesis = normalize(e.hyp);
    std::string label = "ensures " +
                        std::string(e.rec_kind == PValueRecord::Exact ? "Eq " : "Leq ") +
                        e.var + " = compose_pvs " + pretty_print(g.hypothesis) + " !st";
    push_vc(std::move(label), std::move(g), e.span);
  }
};

}  // namespace detail

inline std::vector<VerifCondition> generate_vcs(
    const ProgramAST& prog, const FunctionDef& fn,
    const std::map<std::string, CommandSpec>& specs = builtin_specs(),
    std::optional<std::size_t> drop_requires = std::nullopt) {
  return detail::VcGen(prog, fn, specs, drop_requires).run();
}

}  // namespace bhl
