// The hypothesis-testing command library: pre/postcondition templates for
// each supported command, tail conventions per alternative kind, p-value
// composition over test histories, and multiple-comparison expansion.
#pragma once

#include <map>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include "bhl/logic.hpp"
#include "bhl/pretty.hpp"

namespace bhl {

enum class AlternativeKind { Two, Up, Low };

inline const char* alt_name(AlternativeKind a) {
  switch (a) {
    case AlternativeKind::Two: return "Two";
    case AlternativeKind::Up: return "Up";
    case AlternativeKind::Low: return "Low";
  }
  return "?";
}

enum class MultipleComparisonMethod { TukeyHSD, Dunnett, Williams, SteelDwass, Steel };

inline const char* method_name(MultipleComparisonMethod m) {
  switch (m) {
    case MultipleComparisonMethod::TukeyHSD: return "tukey_hsd";
    case MultipleComparisonMethod::Dunnett: return "dunnett";
    case MultipleComparisonMethod::Williams: return "williams";
    case MultipleComparisonMethod::SteelDwass: return "steel_dwass";
    case MultipleComparisonMethod::Steel: return "steel";
  }
  return "?";
}

// All-pairs methods compare every unordered pair; the others compare a
// designated control group against each of the rest.
inline bool method_all_pairs(MultipleComparisonMethod m) {
  return m == MultipleComparisonMethod::TukeyHSD ||
         m == MultipleComparisonMethod::SteelDwass;
}

// Rank-based methods drop the normality and equal-variance requirements.
inline bool method_parametric(MultipleComparisonMethod m) {
  return m != MultipleComparisonMethod::SteelDwass &&
         m != MultipleComparisonMethod::Steel;
}

struct SpecParam {
  std::string name;
  ParamKind kind;
};

struct LabeledFormula {
  std::string label;
  FormulaPtr formula;
};

struct CommandSpec {
  std::string name;
  std::vector<SpecParam> params;
  // Requirements independent of the alternative kind (templates over params).
  std::vector<LabeledFormula> base_requires;
  // Tail prior-belief requirements and the alternative hypothesis, per kind.
  std::map<AlternativeKind, std::vector<LabeledFormula>> tail_requires;
  std::map<AlternativeKind, FormulaPtr> hypothesis;
  std::optional<MultipleComparisonMethod> group_method;
};

using GroupList = std::vector<std::pair<std::string, std::string>>;  // (population, dataset)
using ArgValue = std::variant<Term, AlternativeKind, GroupList, int>;

// One pairwise comparison produced by a multiple-comparison command.
struct ComparisonInstance {
  std::size_t lhs = 0, rhs = 0;  // indices into the group list
  std::string test_name;
  std::vector<LabeledFormula> requires_;
  FormulaPtr hypothesis;
};

// A fully substituted command call: the requirement formulas to check, the
// history entries to append (p-values bound later by the symbolic executor),
// and the hypothesis whose belief the call establishes.
struct Instantiation {
  std::vector<LabeledFormula> requires_;
  FormulaPtr hypothesis;
  std::vector<std::pair<std::string, FormulaPtr>> entries;  // (test name, hypothesis)
};

// ---------------------------------------------------------------------------
// Template construction helpers

namespace detail {

inline FormulaPtr cmp(Pred p, Term a, Term b) {
  return Formula::make_atom(p, {std::move(a), std::move(b)});
}

// Tail requirements for a pairwise alternative over (lo_term, hi_term):
//   Two: Possible(l < r) and Possible(l > r)
//   Up : Possible(l > r) and Not (Possible(l < r))
//   Low: Possible(l < r) and Not (Possible(l > r))
inline std::vector<LabeledFormula> tails_for(AlternativeKind alt, const Term& l,
                                             const Term& r) {
  FormulaPtr lower = cmp(Pred::Lt, l, r);
  FormulaPtr upper = cmp(Pred::Gt, l, r);
  switch (alt) {
    case AlternativeKind::Two:
      return {{"prior belief: lower tail possible", Formula::possible(lower)},
              {"prior belief: upper tail possible", Formula::possible(upper)}};
    case AlternativeKind::Up:
      return {{"prior belief: upper tail possible", Formula::possible(upper)},
              {"prior belief: lower tail excluded",
               Formula::negate(Formula::possible(lower))}};
    case AlternativeKind::Low:
      return {{"prior belief: lower tail possible", Formula::possible(lower)},
              {"prior belief: upper tail excluded",
               Formula::negate(Formula::possible(upper))}};
  }
  return {};
}

inline FormulaPtr hypothesis_for(AlternativeKind alt, const Term& l, const Term& r) {
  switch (alt) {
    case AlternativeKind::Two: return cmp(Pred::Neq, l, r);
    case AlternativeKind::Up: return cmp(Pred::Gt, l, r);
    case AlternativeKind::Low: return cmp(Pred::Lt, l, r);
  }
  return nullptr;
}

inline CommandSpec make_ttest_1samp() {
  CommandSpec s;
  s.name = "exec_ttest_1samp";
  s.params = {{"P", ParamKind::PopulationK},
              {"MU", ParamKind::RealK},
              {"Y", ParamKind::DatasetK},
              {"A", ParamKind::AltK}};
  Term y = Term::placeholder("Y", ParamKind::DatasetK);
  Term p = Term::placeholder("P", ParamKind::PopulationK);
  Term meanp = Term::mean_pop("P");
  Term mu = Term::placeholder("MU", ParamKind::RealK);
  s.base_requires = {
      {"dataset sampled from population", Formula::make_atom(Pred::Sampled, {y, p})},
      {"normality of population", Formula::make_atom(Pred::IsNormal, {p})}};
  for (auto alt : {AlternativeKind::Two, AlternativeKind::Up, AlternativeKind::Low}) {
    s.tail_requires[alt] = tails_for(alt, meanp, mu);
    s.hypothesis[alt] = hypothesis_for(alt, meanp, mu);
  }
  return s;
}

inline CommandSpec make_ttest_two_sample(const std::string& name, bool paired) {
  CommandSpec s;
  s.name = name;
  s.params = {{"P1", ParamKind::PopulationK},
              {"P2", ParamKind::PopulationK},
              {"Y1", ParamKind::DatasetK},
              {"Y2", ParamKind::DatasetK},
              {"A", ParamKind::AltK}};
  Term p1 = Term::placeholder("P1", ParamKind::PopulationK);
  Term p2 = Term::placeholder("P2", ParamKind::PopulationK);
  Term y1 = Term::placeholder("Y1", ParamKind::DatasetK);
  Term y2 = Term::placeholder("Y2", ParamKind::DatasetK);
  Term m1 = Term::mean_pop("P1");
  Term m2 = Term::mean_pop("P2");
  s.base_requires = {
      {"first dataset sampled from first population",
       Formula::make_atom(Pred::Sampled, {y1, p1})},
      {"second dataset sampled from second population",
       Formula::make_atom(Pred::Sampled, {y2, p2})},
      {"normality of first population", Formula::make_atom(Pred::IsNormal, {p1})},
      {"normality of second population", Formula::make_atom(Pred::IsNormal, {p2})}};
  if (paired)
    s.base_requires.push_back(
        {"paired datasets", Formula::make_atom(Pred::Paired, {y1, y2})});
  else {
    s.base_requires.push_back(
        {"independent (non-paired) datasets", Formula::make_atom(Pred::NonPaired, {y1, y2})});
    s.base_requires.push_back(
        {"equal variances", Formula::make_atom(Pred::EqVar, {p1, p2})});
  }
  for (auto alt : {AlternativeKind::Two, AlternativeKind::Up, AlternativeKind::Low}) {
    s.tail_requires[alt] = tails_for(alt, m1, m2);
    s.hypothesis[alt] = hypothesis_for(alt, m1, m2);
  }
  return s;
}

inline CommandSpec make_group_spec(MultipleComparisonMethod m) {
  CommandSpec s;
  s.name = std::string("exec_") + method_name(m);
  s.params.push_back({"GROUPS", ParamKind::GroupListK});
  if (!method_all_pairs(m)) {
    s.params.push_back({"CONTROL", ParamKind::ControlK});
    s.params.push_back({"A", ParamKind::AltK});
  }
  s.group_method = m;
  return s;
}

}  // namespace detail

inline const std::map<std::string, CommandSpec>& builtin_specs() {
  static const std::map<std::string, CommandSpec> specs = [] {
    std::map<std::string, CommandSpec> m;
    auto add = [&m](CommandSpec s) { m.emplace(s.name, std::move(s)); };
    add(detail::make_ttest_1samp());
    add(detail::make_ttest_two_sample("exec_ttest_ind_eq", /*paired=*/false));
    add(detail::make_ttest_two_sample("exec_ttest_paired", /*paired=*/true));
    for (auto mm : {MultipleComparisonMethod::TukeyHSD, MultipleComparisonMethod::Dunnett,
                    MultipleComparisonMethod::Williams, MultipleComparisonMethod::SteelDwass,
                    MultipleComparisonMethod::Steel})
      add(detail::make_group_spec(mm));
    return m;
  }();
  return specs;
}

// ---------------------------------------------------------------------------
// Multiple-comparison expansion

inline std::vector<ComparisonInstance> expand_comparisons(
    MultipleComparisonMethod method, const GroupList& groups,
    std::optional<std::size_t> control = std::nullopt,
    AlternativeKind alt = AlternativeKind::Two) {
  if (groups.size() < 2) throw VerifyError("TooFewGroups", "need at least 2 groups");
  std::vector<std::pair<std::size_t, std::size_t>> pairs;
  if (method_all_pairs(method)) {
    alt = AlternativeKind::Two;  // all-pairs methods are inherently two-sided
    for (std::size_t i = 0; i + 1 < groups.size(); ++i)
      for (std::size_t j = i + 1; j < groups.size(); ++j) pairs.emplace_back(i, j);
  } else {
    if (!control || *control >= groups.size())
      throw VerifyError("MissingControl",
                        std::string(method_name(method)) + " needs a valid control index");
    for (std::size_t j = 0; j < groups.size(); ++j)
      if (j != *control) pairs.emplace_back(*control, j);
  }
  std::vector<ComparisonInstance> out;
  for (auto [i, j] : pairs) {
    const auto& [pi, yi] = groups[i];
    const auto& [pj, yj] = groups[j];
    ComparisonInstance inst;
    inst.lhs = i;
    inst.rhs = j;
    inst.test_name =
        std::string(method_name(method)) + "[" + yi + "," + yj + "]";
    std::string prefix = "pair (" + yi + " vs " + yj + "): ";
    auto req = [&](std::string label, FormulaPtr f) {
      inst.requires_.push_back({prefix + std::move(label), normalize(f)});
    };
    req("dataset " + yi + " sampled from " + pi,
        Formula::make_atom(Pred::Sampled, {Term::data(yi), Term::pop(pi)}));
    req("dataset " + yj + " sampled from " + pj,
        Formula::make_atom(Pred::Sampled, {Term::data(yj), Term::pop(pj)}));
    req("independent (non-paired) datasets",
        Formula::make_atom(Pred::NonPaired, {Term::data(yi), Term::data(yj)}));
    if (method_parametric(method)) {
      req("normality of population " + pi,
          Formula::make_atom(Pred::IsNormal, {Term::pop(pi)}));
      req("normality of population " + pj,
          Formula::make_atom(Pred::IsNormal, {Term::pop(pj)}));
      req("equal variances",
          Formula::make_atom(Pred::EqVar, {Term::pop(pi), Term::pop(pj)}));
    }
    Term mi = Term::mean_pop(pi), mj = Term::mean_pop(pj);
    for (auto& lf : detail::tails_for(alt, mi, mj))
      inst.requires_.push_back({prefix + lf.label, normalize(lf.formula)});
    inst.hypothesis = normalize(detail::hypothesis_for(alt, mi, mj));
    out.push_back(std::move(inst));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Instantiation

inline Instantiation instantiate(const CommandSpec& spec,
                                 const std::vector<ArgValue>& args) {
  if (args.size() != spec.params.size())
    throw VerifyError("ArityMismatch",
                      spec.name + " expects " + std::to_string(spec.params.size()) +
                          " arguments, got " + std::to_string(args.size()));
  Binding binding;
  std::optional<AlternativeKind> alt;
  GroupList groups;
  std::optional<int> control;
  for (std::size_t i = 0; i < args.size(); ++i) {
    const SpecParam& par = spec.params[i];
    const ArgValue& v = args[i];
    switch (par.kind) {
      case ParamKind::PopulationK:
      case ParamKind::DatasetK:
      case ParamKind::RealK: {
        const Term* t = std::get_if<Term>(&v);
        if (!t) throw VerifyError("KindMismatch", par.name);
        Binding probe;
        probe.terms[par.name] = *t;
        // substitute_term performs the kind check against the placeholder
        binding.terms[par.name] =
            substitute_term(Term::placeholder(par.name, par.kind), probe);
        break;
      }
      case ParamKind::AltK: {
        const AlternativeKind* a = std::get_if<AlternativeKind>(&v);
        if (!a) throw VerifyError("KindMismatch", par.name);
        alt = *a;
        break;
      }
      case ParamKind::GroupListK: {
        const GroupList* g = std::get_if<GroupList>(&v);
        if (!g) throw VerifyError("KindMismatch", par.name);
        groups = *g;
        break;
      }
      case ParamKind::ControlK: {
        const int* c = std::get_if<int>(&v);
        if (!c) throw VerifyError("KindMismatch", par.name);
        control = *c;
        break;
      }
    }
  }

  Instantiation inst;
  if (spec.group_method) {
    auto comparisons = expand_comparisons(
        *spec.group_method, groups,
        control ? std::optional<std::size_t>(static_cast<std::size_t>(*control))
                : std::nullopt,
        alt.value_or(AlternativeKind::Two));
    std::vector<FormulaPtr> hyps;
    for (auto& c : comparisons) {
      for (auto& r : c.requires_) inst.requires_.push_back(r);
      inst.entries.emplace_back(c.test_name, c.hypothesis);
      hyps.push_back(c.hypothesis);
    }
    inst.hypothesis = normalize(Formula::disj(std::move(hyps)));
    return inst;
  }

  for (const auto& lf : spec.base_requires) {
    FormulaPtr f = normalize(substitute(lf.formula, binding));
    inst.requires_.push_back({lf.label + " (" + pretty_print(f) + ")", f});
  }
  auto tit = spec.tail_requires.find(alt.value_or(AlternativeKind::Two));
  if (!spec.tail_requires.empty()) {
    if (tit == spec.tail_requires.end())
      throw VerifyError("KindMismatch", "alternative kind for " + spec.name);
    for (const auto& lf : tit->second) {
      FormulaPtr f = normalize(substitute(lf.formula, binding));
      inst.requires_.push_back({lf.label + " (" + pretty_print(f) + ")", f});
    }
  }
  auto hit = spec.hypothesis.find(alt.value_or(AlternativeKind::Two));
  if (hit == spec.hypothesis.end())
    throw VerifyError("KindMismatch", "alternative kind for " + spec.name);
  inst.hypothesis = normalize(substitute(hit->second, binding));
  std::string short_name = spec.name.rfind("exec_", 0) == 0 ? spec.name.substr(5) : spec.name;
  inst.entries.emplace_back(short_name, inst.hypothesis);
  return inst;
}

// ---------------------------------------------------------------------------
// P-value composition over a test history

struct ComposeOutcome {
  std::optional<PValueRecord> record;
  std::vector<FormulaPtr> unmatched;   // hypotheses never tested
  bool unknown_tail = false;           // history prefix is unconstrained
  bool ok() const { return record && unmatched.empty() && !unknown_tail; }
};

namespace detail {

// Upper bounds above 1 are vacuous; clamp constants.
inline PvExpr cap_one(PvExpr e) {
  if (e.kind == PvKind::Const && e.value > Rat(1)) return PvExpr::constant(Rat(1));
  return e;
}

inline void compose_rec(const FormulaPtr& h, const TestHistory& st, ComposeOutcome& out,
                        std::optional<PValueRecord>& result) {
  std::vector<const HistoryEntry*> matches;
  for (const HistoryEntry& e : st.entries)
    if (formula_equal(e.hypothesis, h)) matches.push_back(&e);
  if (st.tail_unknown) {
    // Older, unconstrained tests could also have tested h (or parts of it);
    // no composition is justified.
    out.unknown_tail = true;
    result.reset();
    return;
  }
  if (matches.size() == 1) {
    result = matches[0]->pvalue;
    return;
  }
  if (matches.size() > 1) {
    // The same hypothesis tested repeatedly: the family-wise bound is the
    // Bonferroni sum over all runs.
    std::vector<PvExpr> bounds;
    for (const HistoryEntry* e : matches) bounds.push_back(e->pvalue.bound);
    result = PValueRecord(PValueRecord::AtMost, cap_one(pv_sum(std::move(bounds))));
    return;
  }
  if (h->conn == Conn::Disj || h->conn == Conn::Conj) {
    std::vector<PvExpr> bounds;
    bool all_ok = true;
    for (const FormulaPtr& k : h->kids) {
      std::optional<PValueRecord> sub;
      compose_rec(k, st, out, sub);
      if (sub)
        bounds.push_back(sub->bound);
      else
        all_ok = false;
    }
    if (!all_ok) { result.reset(); return; }
    PvExpr combined = h->conn == Conn::Disj ? cap_one(pv_sum(std::move(bounds)))
                                            : pv_min(std::move(bounds));
    result = PValueRecord(PValueRecord::AtMost, std::move(combined));
    return;
  }
  out.unmatched.push_back(h);
  result.reset();
}

}  // namespace detail

inline ComposeOutcome compose_pvs_ex(const FormulaPtr& h, const TestHistory& st) {
  ComposeOutcome out;
  FormulaPtr n = normalize(h);
  std::optional<PValueRecord> result;
  detail::compose_rec(n, st, out, result);
  out.record = std::move(result);
  return out;
}

inline PValueRecord compose_pvs(const FormulaPtr& h, const TestHistory& st) {
  ComposeOutcome out = compose_pvs_ex(h, st);
  if (out.unknown_tail)
    throw VerifyError("UnknownHistoryTail",
                      "test history is not known to be empty at function entry");
  if (!out.unmatched.empty())
    throw VerifyError("UnmatchedHypothesis", pretty_print(out.unmatched.front()));
  return *out.record;
}

}  // namespace bhl
