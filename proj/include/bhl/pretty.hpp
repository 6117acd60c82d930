// Surface-syntax rendering of terms and formulas. Deterministic: normalized
// input yields stable output, and parse(pretty_print(f)) == normalize(f).
#pragma once

#include <string>

#include "bhl/logic.hpp"

namespace bhl {

inline std::string pretty_term(const Term& t) {
  switch (t.kind) {
    case TermKind::RealConst: return rat_to_string(t.value);
    case TermKind::RealVar: return t.name;
    case TermKind::MeanPop:
    case TermKind::MeanData: return "mean " + t.name;
    case TermKind::PopRef:
    case TermKind::DataRef: return t.name;
    case TermKind::Placeholder: return t.name;
  }
  return "?";
}

inline std::string pretty_atom(const AtomicFormula& a) {
  switch (a.pred) {
    case Pred::IsEmpty: return "is_empty (!st)";
    case Pred::Lt: case Pred::Gt: case Pred::Neq:
    case Pred::Eq: case Pred::Leq: case Pred::Geq: {
      auto wrap = [](const Term& t) {
        std::string s = pretty_term(t);
        return (t.kind == TermKind::MeanPop || t.kind == TermKind::MeanData)
                   ? "(" + s + ")" : s;
      };
      return wrap(a.args[0]) + " " + pred_name(a.pred) + " " + wrap(a.args[1]);
    }
    default: {
      std::string out = pred_name(a.pred);
      for (const Term& t : a.args) {
        std::string s = pretty_term(t);
        out += (t.kind == TermKind::MeanPop || t.kind == TermKind::MeanData)
                   ? " (" + s + ")" : " " + s;
      }
      return out;
    }
  }
}

inline std::string pretty_print(const FormulaPtr& f) {
  switch (f->conn) {
    case Conn::Atom:
      return pretty_atom(f->atom);
    case Conn::Not:
      return "Not (" + pretty_print(f->kids[0]) + ")";
    case Conn::Conj:
    case Conn::Disj: {
      const char* op = f->conn == Conn::Conj ? " /\\ " : " \\/ ";
      std::string out = "(";
      for (std::size_t i = 0; i < f->kids.size(); ++i) {
        if (i) out += op;
        out += pretty_print(f->kids[i]);
      }
      return out + ")";
    }
    case Conn::Possible:
      return "Possible (" + pretty_print(f->kids[0]) + ")";
    case Conn::Know:
      return "Know (" + pretty_print(f->kids[0]) + ")";
    case Conn::StatB:
      return "StatB (" + pvrecord_to_string(f->pv) + ") (" +
             pretty_print(f->kids[0]) + ")";
  }
  return "?";
}

}  // namespace bhl
