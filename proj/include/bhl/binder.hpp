// Name resolution and kind checking for parsed programs. Resolves each
// command call against its spec, flattening (y1, y2) pair arguments into the
// two dataset parameters, and fills Expr::resolved_args for the executor.
#pragma once

#include <set>
#include <string>

#include "bhl/ast.hpp"
#include "bhl/specs.hpp"

namespace bhl {

namespace detail {

class Binder {
 public:
  Binder(ProgramAST& prog, const std::map<std::string, CommandSpec>& specs)
      : prog_(prog), specs_(specs) {}

  void run() {
    for (FunctionDef& fn : prog_.functions) bind_function(fn);
  }

 private:
  ProgramAST& prog_;
  const std::map<std::string, CommandSpec>& specs_;
  std::set<std::string> defined_;  // in-scope value names for the current fn

  [[noreturn]] void err(const Span& sp, const char* code, const std::string& msg) {
    throw FrontendError({sp, "error", code, msg});
  }

  void bind_function(FunctionDef& fn) {
    defined_.clear();
    for (const std::string& p : fn.params) {
      if (!prog_.symbols.datasets.count(p))
        err(fn.span, "E010", "function parameter '" + p + "' is not a declared dataset");
      if (!defined_.insert(p).second)
        err(fn.span, "E011", "duplicate parameter '" + p + "'");
    }
    for (LetStmt& st : fn.lets) {
      bind_expr(*st.value);
      if (!defined_.insert(st.var).second)
        err(st.span, "E011", "'" + st.var + "' is defined twice");
    }
    bind_expr(*fn.result);
    if (!fn.result_pattern.empty() && fn.result->kind == ExprKind::Tuple &&
        fn.result_pattern.size() != fn.result->parts.size())
      err(fn.span, "E008",
          "result pattern has " + std::to_string(fn.result_pattern.size()) +
              " names but the result tuple has " +
              std::to_string(fn.result->parts.size()) + " components");
  }

  void bind_expr(Expr& e) {
    switch (e.kind) {
      case ExprKind::RealLit:
        return;
      case ExprKind::Var:
        if (!defined_.count(e.name))
          err(e.span, "E009", "undefined variable '" + e.name + "'");
        return;
      case ExprKind::Tuple:
      case ExprKind::SumOp:
      case ExprKind::MinOp:
        for (ExprPtr& p : e.parts) bind_expr(*p);
        return;
      case ExprKind::Call:
        bind_call(e);
        return;
    }
  }

  void bind_call(Expr& call) {
    auto sit = specs_.find(call.name);
    if (sit == specs_.end())
      err(call.span, "E007", "unknown command '" + call.name + "'");
    const CommandSpec& spec = sit->second;

    // flatten pair arguments so they can fill consecutive dataset params
    std::vector<CallArg> flat;
    for (const CallArg& a : call.args) {
      if (a.kind == CallArg::Pair) {
        CallArg x;
        x.kind = CallArg::Ident;
        x.span = a.span;
        x.name = a.pair.first;
        flat.push_back(x);
        x.name = a.pair.second;
        flat.push_back(std::move(x));
      } else {
        flat.push_back(a);
      }
    }
    if (flat.size() != spec.params.size())
      err(call.span, "E008",
          call.name + " expects " + std::to_string(spec.params.size()) +
              " arguments, got " + std::to_string(flat.size()));

    call.resolved_args.clear();
    for (std::size_t i = 0; i < flat.size(); ++i)
      call.resolved_args.push_back(resolve_arg(call.name, spec.params[i], flat[i]));
  }

  ArgValue resolve_arg(const std::string& callee, const SpecParam& par, const CallArg& a) {
    auto mismatch = [&]() -> ArgValue {
      err(a.span, "E008",
          "argument for parameter '" + par.name + "' of " + callee +
              " has the wrong kind");
    };
    switch (par.kind) {
      case ParamKind::PopulationK:
        if (a.kind != CallArg::Ident) return mismatch();
        if (!prog_.symbols.populations.count(a.name))
          err(a.span, "E004", "undeclared population '" + a.name + "'");
        return Term::pop(a.name);
      case ParamKind::DatasetK:
        if (a.kind != CallArg::Ident) return mismatch();
        if (!prog_.symbols.datasets.count(a.name))
          err(a.span, "E003", "unresolved identifier '" + a.name + "'");
        return Term::data(a.name);
      case ParamKind::RealK:
        if (a.kind == CallArg::RealLit) return Term::real(a.value);
        if (a.kind == CallArg::Ident && prog_.symbols.real_vars.count(a.name))
          return Term::real_var(a.name);
        return mismatch();
      case ParamKind::AltK:
        if (a.kind != CallArg::Alt) return mismatch();
        return a.alt;
      case ParamKind::GroupListK: {
        if (a.kind != CallArg::Groups) return mismatch();
        for (const auto& [pop, data] : a.groups) {
          if (!prog_.symbols.populations.count(pop))
            err(a.span, "E004", "undeclared population '" + pop + "'");
          auto dit = prog_.symbols.datasets.find(data);
          if (dit == prog_.symbols.datasets.end())
            err(a.span, "E003", "unresolved identifier '" + data + "'");
          if (dit->second.source != pop)
            err(a.span, "E008",
                "dataset '" + data + "' was declared from population '" +
                    dit->second.source + "', not '" + pop + "'");
        }
        return a.groups;
      }
      case ParamKind::ControlK:
        if (a.kind != CallArg::RealLit || a.int_value < 0) return mismatch();
        return a.int_value;
    }
    return mismatch();
  }
};

}  // namespace detail

inline void bind_and_check(ProgramAST& prog,
                           const std::map<std::string, CommandSpec>& specs = builtin_specs()) {
  detail::Binder(prog, specs).run();
}

}  // namespace bhl
