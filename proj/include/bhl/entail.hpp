// Discharges verification conditions: decides facts |- goal for the epistemic
// fragment by saturating the fact base with a fixed, deterministically ordered
// rule set (boolean closure, S5 modal rules, Possible/Know duality, p-value
// composition and comparison), then proving the goal top-down.
//
// All outcomes are values; inconsistent fact sets prove everything (classical
// explosion) since requires-clauses are user input.
#pragma once

#include <chrono>
#include <deque>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <variant>
#include <vector>

#include "bhl/logic.hpp"
#include "bhl/pretty.hpp"
#include "bhl/specs.hpp"

namespace bhl {

// Record-level goal from a function's ensures clause: the program's returned
// p-value expression against the composition over the final history.
struct PValueGoal {
  PValueRecord::Kind kind = PValueRecord::AtMost;
  PvExpr program_expr;
  FormulaPtr hypothesis;
};

using Goal = std::variant<FormulaPtr, PValueGoal>;

struct SourceSpan {
  int line = 0, col = 0, end_line = 0, end_col = 0;
};

struct VerifCondition {
  std::string id;       // "<function>:<index>"
  std::string label;    // human-readable requirement name
  std::vector<FormulaPtr> hypothesis_facts;
  TestHistory history;
  Goal goal;
  SourceSpan loc;
};

struct DischargeResult {
  enum Status { Proved, Failed, DepthExceeded, TimedOut };
  Status status = Failed;
  std::vector<std::string> trace;       // applied rule names, in order
  std::vector<FormulaPtr> missing;      // failure frontier (Failed only)
  std::set<std::size_t> used_facts;     // indices into the input fact list
  bool used_history = false;            // proof relied on the concrete history
  std::string detail;                   // extra diagnostic text
};

class Entailer {
 public:
  Entailer(std::vector<FormulaPtr> facts, TestHistory hist, int depth_limit = 12,
           double timeout_secs = 0.0)
      : facts_(std::move(facts)), hist_(std::move(hist)), depth_limit_(depth_limit) {
    if (timeout_secs > 0.0)
      deadline_ = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(timeout_secs));
    for (std::size_t i = 0; i < facts_.size(); ++i) add(normalize(facts_[i]), {i});
    saturate();
  }

  DischargeResult discharge(const Goal& goal) {
    trace_.clear();
    used_.clear();
    used_history_ = false;
    missing_.clear();
    detail_.clear();
    DischargeResult r;
    int code = std::holds_alternative<FormulaPtr>(goal)
                   ? prove(normalize(std::get<FormulaPtr>(goal)), depth_limit_, used_)
                   : prove_pvgoal(std::get<PValueGoal>(goal));
    r.trace = trace_;
    r.used_facts = used_;
    r.used_history = used_history_;
    r.detail = detail_;
    switch (code) {
      case kYes:
        r.status = DischargeResult::Proved;
        break;
      case kDepth:
        r.status = DischargeResult::DepthExceeded;
        break;
      case kTime:
        r.status = DischargeResult::TimedOut;
        break;
      default:
        r.status = DischargeResult::Failed;
        if (std::holds_alternative<FormulaPtr>(goal))
          collect_missing(normalize(std::get<FormulaPtr>(goal)), r.missing);
        else
          r.missing = missing_;
        break;
    }
    return r;
  }

 private:
  static constexpr int kNo = 0, kYes = 1, kDepth = 2, kTime = 3;

  std::vector<FormulaPtr> facts_;
  TestHistory hist_;
  int depth_limit_;
  std::optional<std::chrono::steady_clock::time_point> deadline_;

  // closure: derived formula -> indices of the original facts it came from
  std::map<FormulaPtr, std::set<std::size_t>, FormulaLess> closure_;
  std::deque<FormulaPtr> worklist_;
  bool inconsistent_ = false;
  std::set<std::size_t> incons_used_;

  // per-discharge state
  std::vector<std::string> trace_;
  std::set<std::size_t> used_;
  bool used_history_ = false;
  std::vector<FormulaPtr> missing_;
  std::string detail_;
  std::map<FormulaPtr, std::pair<int, std::set<std::size_t>>, FormulaLess> memo_;

  bool timed_out() const {
    return deadline_ && std::chrono::steady_clock::now() > *deadline_;
  }

  void add(const FormulaPtr& f, std::set<std::size_t> prov) {
    auto it = closure_.find(f);
    if (it != closure_.end()) return;
    if (f->conn == Conn::Atom) {
      if (auto g = eval_ground_atom(f->atom); g && !*g) mark_inconsistent(prov);
    }
    FormulaPtr neg = normalize(Formula::negate(f));
    if (auto n = closure_.find(neg); n != closure_.end()) {
      std::set<std::size_t> u = prov;
      u.insert(n->second.begin(), n->second.end());
      mark_inconsistent(u);
    }
    closure_.emplace(f, std::move(prov));
    worklist_.push_back(f);
    memo_.clear();  // derived set changed
  }

  void mark_inconsistent(const std::set<std::size_t>& u) {
    inconsistent_ = true;
    incons_used_.insert(u.begin(), u.end());
  }

  void saturate() {
    bool progress = true;
    while (progress) {
      while (!worklist_.empty()) {
        FormulaPtr f = worklist_.front();
        worklist_.pop_front();
        const std::set<std::size_t>& prov = closure_.at(f);
        switch (f->conn) {
          case Conn::Conj:
            for (const auto& k : f->kids) add(k, prov);
            break;
          case Conn::Know:
            add(f->kids[0], prov);  // axiom T
            break;
          case Conn::Not: {
            const FormulaPtr& x = f->kids[0];
            if (x->conn == Conn::Possible)  // ~P f == K ~f
              add(normalize(Formula::know(Formula::negate(x->kids[0]))), prov);
            else if (x->conn == Conn::Know)  // ~K f == P ~f
              add(normalize(Formula::possible(Formula::negate(x->kids[0]))), prov);
            else if (x->conn == Conn::Conj || x->conn == Conn::Disj) {
              std::vector<FormulaPtr> neg;
              for (const auto& k : x->kids) neg.push_back(Formula::negate(k));
              add(normalize(x->conn == Conn::Conj ? Formula::disj(std::move(neg))
                                                  : Formula::conj(std::move(neg))),
                  prov);
            }
            break;
          }
          default:
            break;
        }
      }
      // unit resolution over disjunctive facts
      progress = false;
      for (auto it = closure_.begin(); it != closure_.end(); ++it) {
        if (it->first->conn != Conn::Disj) continue;
        std::vector<FormulaPtr> open;
        std::set<std::size_t> prov = it->second;
        for (const auto& k : it->first->kids) {
          FormulaPtr nk = normalize(Formula::negate(k));
          auto r = closure_.find(nk);
          bool refuted = r != closure_.end();
          if (refuted) {
            prov.insert(r->second.begin(), r->second.end());
          } else if (k->conn == Conn::Atom) {
            if (auto g = eval_ground_atom(k->atom); g && !*g) refuted = true;
          }
          if (!refuted) open.push_back(k);
        }
        if (open.empty()) {
          mark_inconsistent(prov);
        } else if (open.size() == 1 && closure_.find(open[0]) == closure_.end()) {
          add(open[0], prov);
          progress = true;
          break;  // restart: iterators invalidated
        }
      }
    }
  }

  // A formula whose truth is uniform across an S5 equivalence class: every
  // boolean combination of Know/Possible formulas and ground atoms.
  static bool rigid(const FormulaPtr& f) {
    switch (f->conn) {
      case Conn::Know:
      case Conn::Possible:
        return true;
      case Conn::Not:
        return rigid(f->kids[0]);
      case Conn::Conj:
      case Conn::Disj:
        for (const auto& k : f->kids)
          if (!rigid(k)) return false;
        return true;
      case Conn::Atom:
        return eval_ground_atom(f->atom).has_value();
      case Conn::StatB:
        return false;  // depends on the world's own history
    }
    return false;
  }

  int prove(const FormulaPtr& g, int depth, std::set<std::size_t>& used) {
    if (timed_out()) return kTime;
    if (inconsistent_) {
      trace_.push_back("ex-falso");
      used.insert(incons_used_.begin(), incons_used_.end());
      return kYes;
    }
    if (depth < 0) return kDepth;
    if (auto m = memo_.find(g); m != memo_.end()) {
      if (m->second.first == kYes) {
        trace_.push_back("memo");
        used.insert(m->second.second.begin(), m->second.second.end());
      }
      return m->second.first;
    }
    std::set<std::size_t> local;
    int res = prove_uncached(g, depth, local);
    if (res == kYes) used.insert(local.begin(), local.end());
    if (res != kTime && res != kDepth) memo_[g] = {res, std::move(local)};
    return res;
  }

  int prove_uncached(const FormulaPtr& g, int depth, std::set<std::size_t>& used) {
    if (auto it = closure_.find(g); it != closure_.end()) {
      trace_.push_back("assumption");
      used.insert(it->second.begin(), it->second.end());
      return kYes;
    }
    switch (g->conn) {
      case Conn::Atom: {
        if (auto v = eval_ground_atom(g->atom); v && *v) {
          trace_.push_back("ground-eval");
          return kYes;
        }
        return kNo;
      }
      case Conn::Not: {
        const FormulaPtr& x = g->kids[0];
        if (x->conn == Conn::Atom) {
          if (auto v = eval_ground_atom(x->atom); v && !*v) {
            trace_.push_back("ground-eval");
            return kYes;
          }
        }
        if (x->conn == Conn::Know)  // ~K f from P ~f
          return tag("dual",
                     prove(normalize(Formula::possible(Formula::negate(x->kids[0]))),
                           depth - 1, used));
        if (x->conn == Conn::Possible)  // ~P f from K ~f
          return tag("dual",
                     prove(normalize(Formula::know(Formula::negate(x->kids[0]))),
                           depth - 1, used));
        return kNo;
      }
      case Conn::Conj: {
        trace_.push_back("split");
        for (const auto& k : g->kids) {
          int r = prove(k, depth - 1, used);
          if (r != kYes) return r;
        }
        return kYes;
      }
      case Conn::Disj: {
        for (const auto& k : g->kids)
          if (prove(k, depth - 1, used) == kYes) {
            trace_.push_back("disj-intro");
            return kYes;
          }
        return kNo;
      }
      case Conn::Know: {
        // introspection: class-invariant truths are known
        if (rigid(g->kids[0]) && prove(g->kids[0], depth - 1, used) == kYes) {
          trace_.push_back("K-introspection");
          return kYes;
        }
        return kNo;
      }
      case Conn::Possible: {
        // reflexivity: what holds here is possible
        if (prove(g->kids[0], depth - 1, used) == kYes) {
          trace_.push_back("P-refl");
          return kYes;
        }
        return kNo;
      }
      case Conn::StatB:
        return prove_statb(g->pv, g->kids[0], used);
    }
    return kNo;
  }

  int tag(const char* rule, int r) {
    if (r == kYes) trace_.push_back(rule);
    return r;
  }

  static bool weakens(const PValueRecord& have, const PValueRecord& want) {
    if (want.kind == PValueRecord::Exact)
      return have.kind == PValueRecord::Exact && pv_equal(have.bound, want.bound);
    return pv_leq(have.bound, want.bound);
  }

  int prove_statb(const PValueRecord& claim, const FormulaPtr& hyp,
                  std::set<std::size_t>& used) {
    // from an assumed statistical belief, by weakening the bound
    for (const auto& [f, prov] : closure_) {
      if (f->conn != Conn::StatB) continue;
      if (!formula_equal(f->kids[0], hyp)) continue;
      if (weakens(f->pv, claim)) {
        trace_.push_back("statb-weaken");
        used.insert(prov.begin(), prov.end());
        return kYes;
      }
    }
    // from the test history, via p-value composition
    ComposeOutcome out = compose_pvs_ex(hyp, hist_);
    if (out.ok()) {
      used_history_ = true;
      if (weakens(*out.record, claim)) {
        trace_.push_back(out.record->kind == PValueRecord::Exact &&
                                 claim.kind == PValueRecord::Exact
                             ? "history-lookup"
                             : "history-compose");
        return kYes;
      }
      detail_ = "history composition gives (" + pvrecord_to_string(*out.record) +
                ") which does not establish (" + pvrecord_to_string(claim) + ")";
    }
    return kNo;
  }

  int prove_pvgoal(const PValueGoal& goal) {
    ComposeOutcome out = compose_pvs_ex(goal.hypothesis, hist_);
    if (out.unknown_tail) {
      missing_.push_back(Formula::make_atom(Pred::IsEmpty, {}));
      detail_ = "the test history is not known to be empty at entry, so "
                "compose_pvs cannot be evaluated";
      return kNo;
    }
    if (!out.unmatched.empty()) {
      missing_ = out.unmatched;
      detail_ = "hypothesis never tested: " + pretty_print(out.unmatched.front());
      return kNo;
    }
    used_history_ = true;
    const PValueRecord& composed = *out.record;
    PValueRecord claimed(goal.kind == PValueRecord::Exact ? PValueRecord::Exact
                                                          : PValueRecord::AtMost,
                         goal.program_expr);
    bool kind_ok = composed.kind == claimed.kind ||
                   (composed.kind == PValueRecord::Exact &&
                    claimed.kind == PValueRecord::AtMost);
    if (kind_ok && pv_equal(composed.bound, claimed.bound)) {
      trace_.push_back("compose-eval");
      return kYes;
    }
    detail_ = "compose_pvs gives (" + pvrecord_to_string(composed) +
              ") but the program reports (" + pvrecord_to_string(claimed) + ")";
    return kNo;
  }

  // Frontier of unproved subgoals: the formulas that, added as facts, would
  // let the proof go through.
  void collect_missing(const FormulaPtr& g, std::vector<FormulaPtr>& out) {
    std::set<std::size_t> scratch;
    if (prove(g, depth_limit_, scratch) == kYes) return;
    switch (g->conn) {
      case Conn::Conj:
        for (const auto& k : g->kids) collect_missing(k, out);
        return;
      case Conn::StatB: {
        ComposeOutcome c = compose_pvs_ex(g->kids[0], hist_);
        if (c.unknown_tail) {
          out.push_back(Formula::make_atom(Pred::IsEmpty, {}));
          return;
        }
        if (!c.unmatched.empty()) {
          out.insert(out.end(), c.unmatched.begin(), c.unmatched.end());
          return;
        }
        out.push_back(g);
        return;
      }
      default:
        out.push_back(g);
        return;
    }
  }
};

inline DischargeResult discharge(const std::vector<FormulaPtr>& facts,
                                 const TestHistory& hist, const Goal& goal,
                                 int depth_limit = 12, double timeout_secs = 0.0) {
  Entailer e(facts, hist, depth_limit, timeout_secs);
  return e.discharge(goal);
}

// The frontier subgoals that make a failed discharge succeed when added as
// facts, shrunk greedily to a set minimal under inclusion.
inline std::vector<FormulaPtr> minimal_missing(const std::vector<FormulaPtr>& facts,
                                               const TestHistory& hist, const Goal& goal,
                                               int depth_limit = 12) {
  DischargeResult r = discharge(facts, hist, goal, depth_limit);
  if (r.status == DischargeResult::Proved) return {};
  std::vector<FormulaPtr> frontier = r.missing;
  auto proves_with = [&](const std::vector<FormulaPtr>& extra) {
    std::vector<FormulaPtr> fs = facts;
    // an added is_empty fact also resolves the symbolic history tail
    TestHistory h = hist;
    for (const auto& f : extra) {
      fs.push_back(f);
      if (f->conn == Conn::Atom && f->atom.pred == Pred::IsEmpty) h.tail_unknown = false;
    }
    return discharge(fs, h, goal, depth_limit).status == DischargeResult::Proved;
  };
  if (!proves_with(frontier)) return frontier;  // best effort: not completable
  for (std::size_t i = 0; i < frontier.size();) {
    std::vector<FormulaPtr> trial = frontier;
    trial.erase(trial.begin() + static_cast<std::ptrdiff_t>(i));
    if (proves_with(trial))
      frontier = std::move(trial);
    else
      ++i;
  }
  return frontier;
}

// ---------------------------------------------------------------------------
// SMT-LIB2 emission (optional interoperability path; the goal is asserted
// negated, so `unsat` means proved)

namespace detail {

class SmtEmitter {
 public:
  std::string emit(const VerifCondition& vc) {
    check_supported(vc);
    std::ostringstream decls, asserts;
    collect(vc);
    for (const auto& [a, name] : atom_names_)
      decls << "(declare-const " << name << " Bool)\n";
    for (const auto& [m, name] : modal_names_)
      decls << "(declare-const " << name << " Bool)\n";
    for (const auto& v : pv_vars_) {
      decls << "(declare-const " << v << " Real)\n";
      asserts << "(assert (and (<= 0.0 " << v << ") (<= " << v << " 1.0)))\n";
    }
    // one saturation pass over the facts plus the modal bridge axioms
    for (const auto& f : vc.hypothesis_facts)
      asserts << "(assert " << enc(normalize(f)) << ")\n";
    for (const auto& [m, name] : modal_names_) {
      if (m->conn == Conn::Know)  // axiom T
        asserts << "(assert (=> " << name << " " << enc(m->kids[0]) << "))\n";
      else if (m->conn == Conn::Possible)  // reflexivity
        asserts << "(assert (=> " << enc(m->kids[0]) << " " << name << "))\n";
      else if (m->conn == Conn::StatB)
        emit_statb_def(asserts, m, name, vc.history);
    }
    std::ostringstream out;
    out << "; " << vc.id << ": " << vc.label << "\n(set-logic QF_LRA)\n"
        << decls.str() << asserts.str();
    if (const FormulaPtr* f = std::get_if<FormulaPtr>(&vc.goal))
      out << "(assert (not " << enc(normalize(*f)) << "))\n";
    else
      out << "(assert (not " << enc_pvgoal(std::get<PValueGoal>(vc.goal), vc.history)
          << "))\n";
    out << "(check-sat)\n";
    return out.str();
  }

 private:
  std::map<FormulaPtr, std::string, FormulaLess> atom_names_, modal_names_;
  std::set<std::string> pv_vars_;

  static void check_supported(const VerifCondition& vc) {
    auto walk = [](auto&& self, const FormulaPtr& f) -> void {
      if (f->conn == Conn::StatB && !modality_free(f->kids[0]))
        throw VerifyError("UnsupportedConstruct",
                          "modal operator inside a StatB hypothesis");
      for (const auto& k : f->kids) self(self, k);
    };
    for (const auto& f : vc.hypothesis_facts) walk(walk, f);
    if (const FormulaPtr* f = std::get_if<FormulaPtr>(&vc.goal)) walk(walk, *f);
  }

  void collect_pv(const PvExpr& e) {
    if (e.kind == PvKind::Var) pv_vars_.insert(e.var);
    for (const auto& a : e.args) collect_pv(a);
  }

  void collect_f(const FormulaPtr& f) {
    FormulaPtr n = normalize(f);
    if (n->conn == Conn::Atom) {
      if (!eval_ground_atom(n->atom) && !atom_names_.count(n))
        atom_names_.emplace(n, "a" + std::to_string(atom_names_.size()));
      return;
    }
    if (n->conn == Conn::Know || n->conn == Conn::Possible || n->conn == Conn::StatB) {
      if (!modal_names_.count(n))
        modal_names_.emplace(n, "m" + std::to_string(modal_names_.size()));
      if (n->conn == Conn::StatB) collect_pv(n->pv.bound);
    }
    for (const auto& k : n->kids) collect_f(k);
  }

  void collect(const VerifCondition& vc) {
    for (const auto& e : vc.history.entries) {
      collect_f(e.hypothesis);
      collect_pv(e.pvalue.bound);
    }
    for (const auto& f : vc.hypothesis_facts) collect_f(f);
    if (const FormulaPtr* f = std::get_if<FormulaPtr>(&vc.goal))
      collect_f(*f);
    else {
      collect_f(std::get<PValueGoal>(vc.goal).hypothesis);
      collect_pv(std::get<PValueGoal>(vc.goal).program_expr);
    }
  }

  static std::string rat_smt(const Rat& r) {
    std::string num = std::to_string(r.numerator() < 0 ? -r.numerator() : r.numerator());
    std::string s = "(/ " + num + ".0 " + std::to_string(r.denominator()) + ".0)";
    return r.numerator() < 0 ? "(- " + s + ")" : s;
  }

  static std::string enc_pv(const PvExpr& e) {
    switch (e.kind) {
      case PvKind::Const: return rat_smt(e.value);
      case PvKind::Var: return e.var;
      case PvKind::Sum: {
        std::string out = "(+";
        for (const auto& a : e.args) out += " " + enc_pv(a);
        return out + ")";
      }
      case PvKind::Min: {
        // SMT-LIB has no n-ary min; fold with ite
        std::string out = enc_pv(e.args[0]);
        for (std::size_t i = 1; i < e.args.size(); ++i) {
          std::string b = enc_pv(e.args[i]);
          out = "(ite (<= " + out + " " + b + ") " + out + " " + b + ")";
        }
        return out;
      }
    }
    return "0.0";
  }

  std::string enc(const FormulaPtr& f) {
    switch (f->conn) {
      case Conn::Atom: {
        if (auto g = eval_ground_atom(f->atom)) return *g ? "true" : "false";
        return atom_names_.at(f);
      }
      case Conn::Not:
        return "(not " + enc(f->kids[0]) + ")";
      case Conn::Conj:
      case Conn::Disj: {
        std::string out = f->conn == Conn::Conj ? "(and" : "(or";
        for (const auto& k : f->kids) out += " " + enc(k);
        return out + ")";
      }
      default:
        return modal_names_.at(f);
    }
  }

  void emit_statb_def(std::ostringstream& asserts, const FormulaPtr& statb,
                      const std::string& name, const TestHistory& hist) {
    ComposeOutcome out = compose_pvs_ex(statb->kids[0], hist);
    if (!out.ok()) return;  // belief not derivable from this history
    const PValueRecord& got = *out.record;
    const PValueRecord& claim = statb->pv;
    if (claim.kind == PValueRecord::AtMost)
      asserts << "(assert (=> (<= " << enc_pv(got.bound) << " "
              << enc_pv(claim.bound) << ") " << name << "))\n";
    else if (got.kind == PValueRecord::Exact)
      asserts << "(assert (=> (= " << enc_pv(got.bound) << " "
              << enc_pv(claim.bound) << ") " << name << "))\n";
  }

  std::string enc_pvgoal(const PValueGoal& g, const TestHistory& hist) {
    ComposeOutcome out = compose_pvs_ex(g.hypothesis, hist);
    if (!out.ok()) return "false";
    if ((out.record->kind == PValueRecord::Exact) != (g.kind == PValueRecord::Exact))
      return "false";
    return "(= " + enc_pv(out.record->bound) + " " + enc_pv(g.program_expr) + ")";
  }
};

}  // namespace detail

inline std::string emit_smtlib(const VerifCondition& vc) {
  detail::SmtEmitter e;
  return e.emit(vc);
}

}  // namespace bhl
