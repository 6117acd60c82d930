// Numeric engine for the demo subcommand: Student t statistics and their
// two- and one-sided p-values via the regularized incomplete beta function.
#pragma once

#include <cmath>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "bhl/ast.hpp"
#include "bhl/specs.hpp"

namespace bhl {

namespace detail {

// Continued-fraction evaluation (Lentz) of the regularized incomplete beta
// function I_x(a, b), following the classic numerical-recipes scheme.
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-14, kFpmin = 1e-300;
  double qab = a + b, qap = a + 1.0, qam = a - 1.0;
  double c = 1.0, d = 1.0 - qab * x / qap;
  if (std::fabs(d) < kFpmin) d = kFpmin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpmin) d = kFpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpmin) c = kFpmin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::fabs(d) < kFpmin) d = kFpmin;
    c = 1.0 + aa / c;
    if (std::fabs(c) < kFpmin) c = kFpmin;
    d = 1.0 / d;
    double del = d * c;
    h *= del;
    if (std::fabs(del - 1.0) < kEps) break;
  }
  return h;
}

inline double reg_inc_beta(double a, double b, double x) {
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  double ln_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                    a * std::log(x) + b * std::log1p(-x);
  double front = std::exp(ln_front);
  if (x < (a + 1.0) / (a + b + 2.0)) return front * betacf(a, b, x) / a;
  return 1.0 - front * betacf(b, a, 1.0 - x) / b;
}

}  // namespace detail

// P(|T_df| >= |t|)
inline double t_two_sided_pvalue(double t, double df) {
  double x = df / (df + t * t);
  return detail::reg_inc_beta(df / 2.0, 0.5, x);
}

// P(T_df >= t)
inline double t_upper_pvalue(double t, double df) {
  double two = t_two_sided_pvalue(t, df);
  return t >= 0.0 ? two / 2.0 : 1.0 - two / 2.0;
}

inline double t_pvalue(double t, double df, AlternativeKind alt) {
  switch (alt) {
    case AlternativeKind::Two: return t_two_sided_pvalue(t, df);
    case AlternativeKind::Up: return t_upper_pvalue(t, df);
    case AlternativeKind::Low: return t_upper_pvalue(-t, df);
  }
  return 1.0;
}

inline double sample_mean(const std::vector<double>& xs) {
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

inline double sample_var(const std::vector<double>& xs) {
  double m = sample_mean(xs), s = 0.0;
  for (double x : xs) s += (x - m) * (x - m);
  return s / static_cast<double>(xs.size() - 1);
}

// One-sample t statistic against mean mu.
inline double t_statistic(const std::vector<double>& xs, double mu) {
  if (xs.size() < 2) throw VerifyError("DegenerateSample", "need at least 2 observations");
  double v = sample_var(xs);
  if (v == 0.0) throw VerifyError("DegenerateSample", "zero sample variance");
  return (sample_mean(xs) - mu) / std::sqrt(v / static_cast<double>(xs.size()));
}

// Pooled-variance two-sample t statistic.
inline double t_statistic_ind(const std::vector<double>& a, const std::vector<double>& b) {
  if (a.size() < 2 || b.size() < 2)
    throw VerifyError("DegenerateSample", "need at least 2 observations per group");
  double n1 = static_cast<double>(a.size()), n2 = static_cast<double>(b.size());
  double sp2 = ((n1 - 1.0) * sample_var(a) + (n2 - 1.0) * sample_var(b)) / (n1 + n2 - 2.0);
  if (sp2 == 0.0) throw VerifyError("DegenerateSample", "zero pooled variance");
  return (sample_mean(a) - sample_mean(b)) / std::sqrt(sp2 * (1.0 / n1 + 1.0 / n2));
}

// ---------------------------------------------------------------------------
// CSV data: header row of dataset ids, one column per dataset, blank cells
// allowed once a shorter column ends.

using DataTable = std::map<std::string, std::vector<double>>;

inline DataTable read_csv(std::istream& in) {
  DataTable table;
  std::string line;
  if (!std::getline(in, line)) throw VerifyError("BadData", "empty CSV input");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  std::vector<std::string> cols;
  {
    std::stringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cols.push_back(cell);
  }
  for (const std::string& c : cols)
    if (c.empty() || !table.emplace(c, std::vector<double>{}).second)
      throw VerifyError("BadData", "bad CSV header column '" + c + "'");
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::stringstream ss(line);
    std::string cell;
    std::size_t i = 0;
    while (std::getline(ss, cell, ',')) {
      if (i >= cols.size()) throw VerifyError("BadData", "row wider than header");
      if (!cell.empty()) {
        try {
          table[cols[i]].push_back(std::stod(cell));
        } catch (const std::exception&) {
          throw VerifyError("BadData", "non-numeric cell '" + cell + "'");
        }
      }
      ++i;
    }
  }
  return table;
}

inline DataTable read_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw VerifyError("IoError", "cannot open '" + path + "'");
  return read_csv(in);
}

// ---------------------------------------------------------------------------
// Demo evaluation: run a verified function's body on concrete data.

struct DemoValue {
  double p = 0.0;
  std::string test;  // which test produced it, empty for derived values
};

struct DemoReport {
  std::vector<std::pair<std::string, DemoValue>> steps;  // (variable, value)
  std::vector<std::pair<std::string, double>> results;   // flattened result
};

namespace detail {

class DemoRunner {
 public:
  DemoRunner(const ProgramAST& prog, const DataTable& data) : prog_(prog), data_(data) {}

  DemoReport run(const FunctionDef& fn) {
    DemoReport rep;
    for (const LetStmt& st : fn.lets) {
      DemoValue v = eval(*st.value);
      env_[st.var] = v.p;
      rep.steps.emplace_back(st.var, v);
    }
    flatten_result(fn, *fn.result, 0, rep);
    return rep;
  }

 private:
  const ProgramAST& prog_;
  const DataTable& data_;
  std::map<std::string, double> env_;

  const std::vector<double>& column(const std::string& id) {
    auto it = data_.find(id);
    if (it == data_.end())
      throw VerifyError("BadData", "no CSV column for dataset '" + id + "'");
    return it->second;
  }

  DemoValue eval(const Expr& e) {
    switch (e.kind) {
      case ExprKind::RealLit:
        return {rat_to_double(e.value), ""};
      case ExprKind::Var: {
        auto it = env_.find(e.name);
        if (it == env_.end()) throw VerifyError("BadData", "unbound '" + e.name + "'");
        return {it->second, ""};
      }
      case ExprKind::MinOp: {
        double a = eval(*e.parts[0]).p, b = eval(*e.parts[1]).p;
        return {std::min(a, b), ""};
      }
      case ExprKind::SumOp: {
        double s = 0.0;
        for (const ExprPtr& p : e.parts) s += eval(*p).p;
        return {s, ""};
      }
      case ExprKind::Call:
        return eval_call(e);
      case ExprKind::Tuple:
        throw VerifyError("BadData", "tuple in value position");
    }
    throw VerifyError("BadData", "unexpected expression");
  }

  DemoValue eval_call(const Expr& call) {
    auto term_name = [&](std::size_t i) { return std::get<Term>(call.resolved_args[i]).name; };
    if (call.name == "exec_ttest_1samp") {
      double mu = rat_to_double(std::get<Term>(call.resolved_args[1]).value);
      const auto& y = column(term_name(2));
      AlternativeKind alt = std::get<AlternativeKind>(call.resolved_args[3]);
      double t = t_statistic(y, mu);
      return {t_pvalue(t, static_cast<double>(y.size()) - 1.0, alt), "ttest_1samp"};
    }
    if (call.name == "exec_ttest_ind_eq") {
      const auto& y1 = column(term_name(2));
      const auto& y2 = column(term_name(3));
      AlternativeKind alt = std::get<AlternativeKind>(call.resolved_args[4]);
      double t = t_statistic_ind(y1, y2);
      double df = static_cast<double>(y1.size() + y2.size()) - 2.0;
      return {t_pvalue(t, df, alt), "ttest_ind_eq"};
    }
    if (call.name == "exec_ttest_paired") {
      const auto& y1 = column(term_name(2));
      const auto& y2 = column(term_name(3));
      if (y1.size() != y2.size())
        throw VerifyError("DegenerateSample", "paired samples differ in length");
      AlternativeKind alt = std::get<AlternativeKind>(call.resolved_args[4]);
      std::vector<double> d(y1.size());
      for (std::size_t i = 0; i < y1.size(); ++i) d[i] = y1[i] - y2[i];
      double t = t_statistic(d, 0.0);
      return {t_pvalue(t, static_cast<double>(d.size()) - 1.0, alt), "ttest_paired"};
    }
    throw VerifyError("NumericUnsupported",
                      "numeric engine not implemented for " + call.name);
  }

  void flatten_result(const FunctionDef& fn, const Expr& e, std::size_t idx, DemoReport& rep) {
    if (e.kind == ExprKind::Tuple) {
      for (std::size_t i = 0; i < e.parts.size(); ++i) flatten_result(fn, *e.parts[i], i, rep);
      return;
    }
    std::string name = idx < fn.result_pattern.size() ? fn.result_pattern[idx]
                       : e.kind == ExprKind::Var      ? e.name
                                                      : "result";
    rep.results.emplace_back(name, eval(e).p);
  }
};

}  // namespace detail

inline DemoReport run_demo(const ProgramAST& prog, const FunctionDef& fn,
                           const DataTable& data) {
  return detail::DemoRunner(prog, data).run(fn);
}

}  // namespace bhl
