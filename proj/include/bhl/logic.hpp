// Terms, atomic formulas, epistemic formulas, test histories and worlds:
// the shared vocabulary of the whole verifier.
//
// Formulas are immutable trees behind shared_ptr. Conj/Disj are n-ary after
// normalization (flattened, sorted under a total syntactic order, deduped),
// double negation is eliminated, and Possible stays primitive; its duality
// with Know is an entailment rule, not a rewrite.
#pragma once

#include <algorithm>
#include <cassert>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bhl/pvexpr.hpp"
#include "bhl/rational.hpp"

namespace bhl {

struct VerifyError : std::runtime_error {
  std::string code;
  VerifyError(std::string c, const std::string& msg)
      : std::runtime_error(c + ": " + msg), code(std::move(c)) {}
};

// ---------------------------------------------------------------------------
// Declarations

enum class DistKind { Normal, Unknown };

struct Population {
  std::string id;
  DistKind dist = DistKind::Unknown;
  std::string mu;     // symbolic mean parameter (NormalD)
  std::string sigma;  // symbolic sd parameter (NormalD)
};

struct Dataset {
  std::string id;
  std::string source;  // id of the population it was sampled from
  int size = 0;        // 0 = unspecified
};

// ---------------------------------------------------------------------------
// Terms

enum class ParamKind { PopulationK, DatasetK, RealK, AltK, GroupListK, ControlK };

enum class TermKind {
  RealConst,   // exact rational
  RealVar,     // symbolic real (e.g. a distribution parameter)
  MeanPop,     // mean of a population
  MeanData,    // mean of a dataset
  PopRef,      // a population as a term
  DataRef,     // a dataset as a term
  Placeholder  // template parameter, replaced by substitute()
};

struct Term {
  TermKind kind = TermKind::RealConst;
  Rat value{0};       // RealConst
  std::string name;   // all named kinds
  ParamKind ph_kind = ParamKind::RealK;  // Placeholder only

  static Term real(Rat r) { Term t; t.kind = TermKind::RealConst; t.value = r; return t; }
  static Term real_var(std::string n) { Term t; t.kind = TermKind::RealVar; t.name = std::move(n); return t; }
  static Term mean_pop(std::string p) { Term t; t.kind = TermKind::MeanPop; t.name = std::move(p); return t; }
  static Term mean_data(std::string d) { Term t; t.kind = TermKind::MeanData; t.name = std::move(d); return t; }
  static Term pop(std::string p) { Term t; t.kind = TermKind::PopRef; t.name = std::move(p); return t; }
  static Term data(std::string d) { Term t; t.kind = TermKind::DataRef; t.name = std::move(d); return t; }
  static Term placeholder(std::string n, ParamKind k) {
    Term t; t.kind = TermKind::Placeholder; t.name = std::move(n); t.ph_kind = k; return t;
  }
};

inline int term_compare(const Term& a, const Term& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  if (a.kind == TermKind::RealConst)
    return a.value < b.value ? -1 : b.value < a.value ? 1 : 0;
  int c = a.name.compare(b.name);
  return c < 0 ? -1 : c > 0 ? 1 : 0;
}

// ---------------------------------------------------------------------------
// Atomic formulas

enum class Pred {
  Sampled,    // sampled y p
  IsEmpty,    // is_empty (!st)  -- refers to the ambient test history
  NonPaired,  // non_paired y1 y2
  Paired,     // paired y1 y2
  IsNormal,   // is_normal p
  EqVar,      // eq_var p1 p2
  PValue,     // pvalue x : 0 <= x <= 1
  Lt, Gt, Neq, Eq, Leq, Geq  // comparisons over real terms
};

inline std::size_t pred_arity(Pred p) {
  switch (p) {
    case Pred::IsEmpty: return 0;
    case Pred::IsNormal:
    case Pred::PValue: return 1;
    default: return 2;
  }
}

inline const char* pred_name(Pred p) {
  switch (p) {
    case Pred::Sampled: return "sampled";
    case Pred::IsEmpty: return "is_empty";
    case Pred::NonPaired: return "non_paired";
    case Pred::Paired: return "paired";
    case Pred::IsNormal: return "is_normal";
    case Pred::EqVar: return "eq_var";
    case Pred::PValue: return "pvalue";
    case Pred::Lt: return "<'";
    case Pred::Gt: return ">'";
    case Pred::Neq: return "$!=";
    case Pred::Eq: return "='";
    case Pred::Leq: return "<='";
    case Pred::Geq: return ">='";
  }
  return "?";
}

struct AtomicFormula {
  Pred pred = Pred::IsEmpty;
  std::vector<Term> args;

  AtomicFormula() = default;
  AtomicFormula(Pred p, std::vector<Term> a) : pred(p), args(std::move(a)) {
    if (args.size() != pred_arity(pred))
      throw VerifyError("ArityMismatch", std::string("predicate ") + pred_name(pred));
  }
};

inline int atom_compare(const AtomicFormula& a, const AtomicFormula& b) {
  if (a.pred != b.pred) return a.pred < b.pred ? -1 : 1;
  for (std::size_t i = 0; i < a.args.size(); ++i)
    if (int c = term_compare(a.args[i], b.args[i])) return c;
  return 0;
}

// A comparison whose sides are both rational constants has a fixed truth
// value shared by the oracle and the entailment engine.
inline std::optional<bool> eval_ground_atom(const AtomicFormula& a) {
  auto is_const = [](const Term& t) { return t.kind == TermKind::RealConst; };
  switch (a.pred) {
    case Pred::Lt: case Pred::Gt: case Pred::Neq:
    case Pred::Eq: case Pred::Leq: case Pred::Geq: {
      if (!is_const(a.args[0]) || !is_const(a.args[1])) return std::nullopt;
      const Rat &x = a.args[0].value, &y = a.args[1].value;
      switch (a.pred) {
        case Pred::Lt: return x < y;
        case Pred::Gt: return x > y;
        case Pred::Neq: return x != y;
        case Pred::Eq: return x == y;
        case Pred::Leq: return x <= y;
        default: return x >= y;
      }
    }
    case Pred::PValue:
      if (is_const(a.args[0]))
        return a.args[0].value >= Rat(0) && a.args[0].value <= Rat(1);
      return std::nullopt;
    default:
      return std::nullopt;
  }
}

// ---------------------------------------------------------------------------
// Formulas

enum class Conn { Atom, Not, Conj, Disj, Possible, Know, StatB };

class Formula;
using FormulaPtr = std::shared_ptr<const Formula>;

class Formula {
 public:
  Conn conn = Conn::Atom;
  AtomicFormula atom;             // Atom
  std::vector<FormulaPtr> kids;   // Not/Possible/Know/StatB: 1; Conj/Disj: n
  PValueRecord pv;                // StatB

  static FormulaPtr make_atom(AtomicFormula a) {
    auto f = std::make_shared<Formula>();
    f->conn = Conn::Atom;
    f->atom = std::move(a);
    return f;
  }
  static FormulaPtr make_atom(Pred p, std::vector<Term> args) {
    return make_atom(AtomicFormula(p, std::move(args)));
  }
  static FormulaPtr negate(FormulaPtr f) {
    auto r = std::make_shared<Formula>();
    r->conn = Conn::Not;
    r->kids = {std::move(f)};
    return r;
  }
  static FormulaPtr conj(std::vector<FormulaPtr> fs) {
    auto r = std::make_shared<Formula>();
    r->conn = Conn::Conj;
    r->kids = std::move(fs);
    return r;
  }
  static FormulaPtr disj(std::vector<FormulaPtr> fs) {
    auto r = std::make_shared<Formula>();
    r->conn = Conn::Disj;
    r->kids = std::move(fs);
    return r;
  }
  static FormulaPtr possible(FormulaPtr f) {
    auto r = std::make_shared<Formula>();
    r->conn = Conn::Possible;
    r->kids = {std::move(f)};
    return r;
  }
  static FormulaPtr know(FormulaPtr f) {
    auto r = std::make_shared<Formula>();
    r->conn = Conn::Know;
    r->kids = {std::move(f)};
    return r;
  }
  static FormulaPtr stat_b(PValueRecord rec, FormulaPtr hyp) {
    auto r = std::make_shared<Formula>();
    r->conn = Conn::StatB;
    r->pv = std::move(rec);
    r->kids = {std::move(hyp)};
    return r;
  }
};

inline int formula_compare(const FormulaPtr& a, const FormulaPtr& b) {
  if (a.get() == b.get()) return 0;
  if (a->conn != b->conn) return a->conn < b->conn ? -1 : 1;
  if (a->conn == Conn::Atom) return atom_compare(a->atom, b->atom);
  if (a->conn == Conn::StatB)
    if (int c = pvrecord_compare(a->pv, b->pv)) return c;
  for (std::size_t i = 0; i < a->kids.size() && i < b->kids.size(); ++i)
    if (int c = formula_compare(a->kids[i], b->kids[i])) return c;
  return a->kids.size() < b->kids.size() ? -1 : a->kids.size() > b->kids.size() ? 1 : 0;
}

inline bool formula_equal(const FormulaPtr& a, const FormulaPtr& b) {
  return formula_compare(a, b) == 0;
}

struct FormulaLess {
  bool operator()(const FormulaPtr& a, const FormulaPtr& b) const {
    return formula_compare(a, b) < 0;
  }
};

// Hypotheses (StatB payloads, history entries) are about the population, not
// about beliefs: no modal operator may appear inside them.
inline bool modality_free(const FormulaPtr& f) {
  if (f->conn == Conn::Possible || f->conn == Conn::Know || f->conn == Conn::StatB)
    return false;
  for (const auto& k : f->kids)
    if (!modality_free(k)) return false;
  return true;
}

inline FormulaPtr normalize(const FormulaPtr& f) {
  switch (f->conn) {
    case Conn::Atom:
      return f;
    case Conn::Not: {
      FormulaPtr k = normalize(f->kids[0]);
      if (k->conn == Conn::Not) return k->kids[0];  // double negation
      return Formula::negate(k);
    }
    case Conn::Conj:
    case Conn::Disj: {
      std::vector<FormulaPtr> flat;
      for (const auto& k : f->kids) {
        FormulaPtr n = normalize(k);
        if (n->conn == f->conn)
          flat.insert(flat.end(), n->kids.begin(), n->kids.end());
        else
          flat.push_back(n);
      }
      std::sort(flat.begin(), flat.end(), FormulaLess{});
      flat.erase(std::unique(flat.begin(), flat.end(),
                             [](const FormulaPtr& a, const FormulaPtr& b) {
                               return formula_equal(a, b);
                             }),
                 flat.end());
      if (flat.size() == 1) return flat[0];
      return f->conn == Conn::Conj ? Formula::conj(std::move(flat))
                                   : Formula::disj(std::move(flat));
    }
    case Conn::Possible:
      return Formula::possible(normalize(f->kids[0]));
    case Conn::Know:
      return Formula::know(normalize(f->kids[0]));
    case Conn::StatB: {
      FormulaPtr hyp = normalize(f->kids[0]);
      assert(modality_free(hyp) && "StatB payload must be modality-free");
      return Formula::stat_b(f->pv, std::move(hyp));
    }
  }
  return f;
}

inline bool hypothesis_equal(const FormulaPtr& a, const FormulaPtr& b) {
  return formula_equal(normalize(a), normalize(b));
}

// ---------------------------------------------------------------------------
// Substitution of template placeholders

struct Binding {
  // placeholder name -> concrete term (PopRef / DataRef / RealConst / RealVar)
  std::map<std::string, Term> terms;
};

inline Term substitute_term(const Term& t, const Binding& b) {
  if (t.kind != TermKind::Placeholder) return t;
  auto it = b.terms.find(t.name);
  if (it == b.terms.end())
    throw VerifyError("UnboundPlaceholder", t.name);
  const Term& v = it->second;
  switch (t.ph_kind) {
    case ParamKind::PopulationK:
      if (v.kind != TermKind::PopRef) throw VerifyError("KindMismatch", t.name);
      break;
    case ParamKind::DatasetK:
      if (v.kind != TermKind::DataRef) throw VerifyError("KindMismatch", t.name);
      break;
    case ParamKind::RealK:
      if (v.kind != TermKind::RealConst && v.kind != TermKind::RealVar)
        throw VerifyError("KindMismatch", t.name);
      break;
    default:
      throw VerifyError("KindMismatch", t.name);
  }
  return v;
}

// A placeholder of population kind under mean(.) instantiates to mean of the
// bound population.
inline FormulaPtr substitute(const FormulaPtr& f, const Binding& b) {
  switch (f->conn) {
    case Conn::Atom: {
      std::vector<Term> args;
      for (const Term& t : f->atom.args) {
        if (t.kind == TermKind::Placeholder) {
          Term v = substitute_term(t, b);
          args.push_back(v);
        } else if (t.kind == TermKind::MeanPop || t.kind == TermKind::MeanData) {
          auto it = b.terms.find(t.name);
          if (it != b.terms.end()) {
            const Term& v = it->second;
            if (v.kind == TermKind::PopRef)
              args.push_back(Term::mean_pop(v.name));
            else if (v.kind == TermKind::DataRef)
              args.push_back(Term::mean_data(v.name));
            else
              throw VerifyError("KindMismatch", t.name);
          } else {
            args.push_back(t);
          }
        } else {
          args.push_back(t);
        }
      }
      return Formula::make_atom(f->atom.pred, std::move(args));
    }
    case Conn::Not:
      return Formula::negate(substitute(f->kids[0], b));
    case Conn::Conj:
    case Conn::Disj: {
      std::vector<FormulaPtr> ks;
      for (const auto& k : f->kids) ks.push_back(substitute(k, b));
      return f->conn == Conn::Conj ? Formula::conj(std::move(ks))
                                   : Formula::disj(std::move(ks));
    }
    case Conn::Possible:
      return Formula::possible(substitute(f->kids[0], b));
    case Conn::Know:
      return Formula::know(substitute(f->kids[0], b));
    case Conn::StatB:
      return Formula::stat_b(f->pv, substitute(f->kids[0], b));
  }
  return f;
}

inline void collect_atoms(const FormulaPtr& f, std::vector<AtomicFormula>& out) {
  if (f->conn == Conn::Atom) out.push_back(f->atom);
  for (const auto& k : f->kids) collect_atoms(k, out);
}

// ---------------------------------------------------------------------------
// Test histories and worlds

struct HistoryEntry {
  std::string test_name;
  FormulaPtr hypothesis;  // stored normalized
  PValueRecord pvalue;

  HistoryEntry(std::string n, FormulaPtr h, PValueRecord p)
      : test_name(std::move(n)), hypothesis(normalize(h)), pvalue(std::move(p)) {
    assert(modality_free(hypothesis));
  }
};

// Newest entry first. tail_unknown marks a symbolic history whose older part
// is unconstrained (the function's requires did not state is_empty (!st)).
struct TestHistory {
  std::vector<HistoryEntry> entries;
  bool tail_unknown = false;

  bool empty() const { return entries.empty() && !tail_unknown; }
  TestHistory cons(HistoryEntry e) const {
    TestHistory h = *this;
    h.entries.insert(h.entries.begin(), std::move(e));
    return h;
  }
};

struct World {
  TestHistory history;
  std::string interp;  // opaque interpretation token
};

}  // namespace bhl
