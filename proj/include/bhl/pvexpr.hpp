// Symbolic p-value expressions and p-value records.
//
// During symbolic execution each executed test yields a fresh p-value symbol;
// programs combine them with +. and min. Expressions are kept in a canonical
// form (flattened, sorted, constants folded) so that the exit check of a
// verified function is a syntactic comparison, never a numeric one.
#pragma once

#include <algorithm>
#include <cassert>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "bhl/rational.hpp"

namespace bhl {

enum class PvKind { Const, Var, Sum, Min };

struct PvExpr {
  PvKind kind = PvKind::Const;
  Rat value{0};             // Const
  std::string var;          // Var
  std::vector<PvExpr> args; // Sum, Min

  static PvExpr constant(Rat r) {
    PvExpr e;
    e.kind = PvKind::Const;
    e.value = r;
    return e;
  }
  static PvExpr variable(std::string name) {
    PvExpr e;
    e.kind = PvKind::Var;
    e.var = std::move(name);
    return e;
  }
};

int pv_compare(const PvExpr& a, const PvExpr& b);

inline int pv_compare_vec(const std::vector<PvExpr>& a, const std::vector<PvExpr>& b) {
  for (std::size_t i = 0; i < a.size() && i < b.size(); ++i)
    if (int c = pv_compare(a[i], b[i])) return c;
  return a.size() < b.size() ? -1 : a.size() > b.size() ? 1 : 0;
}

inline int pv_compare(const PvExpr& a, const PvExpr& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  switch (a.kind) {
    case PvKind::Const:
      return a.value < b.value ? -1 : b.value < a.value ? 1 : 0;
    case PvKind::Var:
      return a.var.compare(b.var) < 0 ? -1 : a.var == b.var ? 0 : 1;
    default:
      return pv_compare_vec(a.args, b.args);
  }
}

inline bool pv_equal(const PvExpr& a, const PvExpr& b) { return pv_compare(a, b) == 0; }

// Canonical form: nested Sum/Min flattened, constant parts folded, children
// sorted; Min children deduplicated; single-child nodes collapsed.
inline PvExpr pv_canon(const PvExpr& e) {
  if (e.kind == PvKind::Const || e.kind == PvKind::Var) return e;
  std::vector<PvExpr> flat;
  for (const PvExpr& a : e.args) {
    PvExpr c = pv_canon(a);
    if (c.kind == e.kind)
      flat.insert(flat.end(), c.args.begin(), c.args.end());
    else
      flat.push_back(c);
  }
  std::vector<PvExpr> rest;
  std::optional<Rat> cst;
  for (PvExpr& a : flat) {
    if (a.kind == PvKind::Const) {
      if (!cst)
        cst = a.value;
      else
        cst = e.kind == PvKind::Sum ? *cst + a.value : std::min(*cst, a.value);
    } else {
      rest.push_back(std::move(a));
    }
  }
  std::sort(rest.begin(), rest.end(),
            [](const PvExpr& x, const PvExpr& y) { return pv_compare(x, y) < 0; });
  if (e.kind == PvKind::Min)
    rest.erase(std::unique(rest.begin(), rest.end(),
                           [](const PvExpr& x, const PvExpr& y) { return pv_equal(x, y); }),
               rest.end());
  if (cst) {
    if (rest.empty()) return PvExpr::constant(*cst);
    // Sum with a zero constant / Min dominated by nothing drops the constant.
    if (!(e.kind == PvKind::Sum && *cst == Rat(0)))
      rest.insert(rest.begin(), PvExpr::constant(*cst));
  }
  if (rest.size() == 1) return rest[0];
  PvExpr out;
  out.kind = e.kind;
  out.args = std::move(rest);
  return out;
}

inline PvExpr pv_sum(std::vector<PvExpr> xs) {
  PvExpr e;
  e.kind = PvKind::Sum;
  e.args = std::move(xs);
  return pv_canon(e);
}

inline PvExpr pv_min(std::vector<PvExpr> xs) {
  PvExpr e;
  e.kind = PvKind::Min;
  e.args = std::move(xs);
  return pv_canon(e);
}

inline std::string pv_to_string(const PvExpr& e) {
  switch (e.kind) {
    case PvKind::Const: return rat_to_string(e.value);
    case PvKind::Var: return e.var;
    case PvKind::Sum: {
      std::string out = "(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += " +. ";
        out += pv_to_string(e.args[i]);
      }
      return out + ")";
    }
    case PvKind::Min: {
      std::string out = "min(";
      for (std::size_t i = 0; i < e.args.size(); ++i) {
        if (i) out += ", ";
        out += pv_to_string(e.args[i]);
      }
      return out + ")";
    }
  }
  return "";
}

// a <= b, provable from the p-value axioms alone (every p-value symbol lies
// in [0,1]). Sound but deliberately incomplete.
inline bool pv_leq(const PvExpr& a, const PvExpr& b) {
  if (pv_equal(a, b)) return true;
  if (a.kind == PvKind::Const && b.kind == PvKind::Const) return a.value <= b.value;
  if (a.kind == PvKind::Min)
    for (const PvExpr& x : a.args)
      if (pv_leq(x, b)) return true;
  if (b.kind == PvKind::Min) {
    bool all = true;
    for (const PvExpr& y : b.args) all = all && pv_leq(a, y);
    if (all && !b.args.empty()) return true;
  }
  // summands are nonnegative, so a subterm of a sum bounds from below
  if (b.kind == PvKind::Sum)
    for (const PvExpr& y : b.args)
      if (pv_leq(a, y)) return true;
  // a sum is bounded by a bigger sum (multiset inclusion of summands)
  if (a.kind == PvKind::Sum && b.kind == PvKind::Sum) {
    std::vector<PvExpr> remaining = b.args;
    bool ok = true;
    for (const PvExpr& x : a.args) {
      auto it = std::find_if(remaining.begin(), remaining.end(),
                             [&](const PvExpr& y) { return pv_equal(x, y); });
      if (it == remaining.end()) { ok = false; break; }
      remaining.erase(it);
    }
    if (ok) return true;
  }
  // any single p-value bound is at most 1
  if (b.kind == PvKind::Const && b.value >= Rat(1) &&
      (a.kind == PvKind::Var || a.kind == PvKind::Min))
    return true;
  if (a.kind == PvKind::Const && a.value <= Rat(0)) return true;
  return false;
}

// ---------------------------------------------------------------------------

// A p-value record: either the exact p-value of a single test ("Eq result" in
// a command's history update) or an upper bound ("Leq p").
struct PValueRecord {
  enum Kind { Exact, AtMost };
  Kind kind = Exact;
  PvExpr bound;

  PValueRecord() : bound(PvExpr::constant(Rat(0))) {}
  PValueRecord(Kind k, PvExpr e) : kind(k), bound(pv_canon(std::move(e))) {
    if (bound.kind == PvKind::Const && (bound.value < Rat(0) || bound.value > Rat(1)))
      throw std::out_of_range("p-value outside [0,1]: " + rat_to_string(bound.value));
  }

  static PValueRecord exact(Rat p) { return PValueRecord(Exact, PvExpr::constant(p)); }
  static PValueRecord at_most(Rat p) { return PValueRecord(AtMost, PvExpr::constant(p)); }
};

inline int pvrecord_compare(const PValueRecord& a, const PValueRecord& b) {
  if (a.kind != b.kind) return a.kind < b.kind ? -1 : 1;
  return pv_compare(a.bound, b.bound);
}

inline std::string pvrecord_to_string(const PValueRecord& r) {
  return std::string(r.kind == PValueRecord::Exact ? "Eq " : "Leq ") + pv_to_string(r.bound);
}

}  // namespace bhl
