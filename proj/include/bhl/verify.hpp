// Whole-program driver: parse, bind, generate VCs, discharge them, and render
// the outcome as text or JSON.
#pragma once

#include <chrono>
#include <future>
#include <string>
#include <vector>

#include <json.hpp>

#include "bhl/binder.hpp"
#include "bhl/entail.hpp"
#include "bhl/parser.hpp"
#include "bhl/pretty.hpp"
#include "bhl/vcgen.hpp"

namespace bhl {

struct VerifyOptions {
  int depth = 12;
  double timeout_secs = 10.0;
  int jobs = 1;
  bool compute_missing = true;  // run minimal_missing on failed VCs
};

struct VcOutcome {
  VerifCondition vc;
  DischargeResult result;
  std::vector<FormulaPtr> missing;  // inclusion-minimal repair set (Failed only)
  double wall_ms = 0.0;
};

struct FunctionReport {
  std::string name;
  std::vector<VcOutcome> outcomes;
  bool verified = true;
};

struct ProgramReport {
  std::string file;
  std::uint64_t digest = 0;
  std::vector<FunctionReport> functions;
  bool verified = true;
  double wall_ms = 0.0;
};

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ull;
  }
  return h;
}

namespace detail {

inline VcOutcome run_one_vc(const VerifCondition& vc, const VerifyOptions& opt) {
  VcOutcome out;
  out.vc = vc;
  auto t0 = std::chrono::steady_clock::now();
  out.result = discharge(vc.hypothesis_facts, vc.history, vc.goal, opt.depth,
                         opt.timeout_secs);
  if (out.result.status == DischargeResult::Failed && opt.compute_missing)
    out.missing = minimal_missing(vc.hypothesis_facts, vc.history, vc.goal, opt.depth);
  out.wall_ms = std::chrono::duration<double, std::milli>(
                    std::chrono::steady_clock::now() - t0)
                    .count();
  return out;
}

// Consecutive VCs from one command call share their facts and history, so
// the saturated fact base (and proof memo) can be reused across them.
inline bool same_context(const VerifCondition& a, const VerifCondition& b) {
  if (a.hypothesis_facts.size() != b.hypothesis_facts.size() ||
      a.history.tail_unknown != b.history.tail_unknown ||
      a.history.entries.size() != b.history.entries.size())
    return false;
  for (std::size_t i = 0; i < a.hypothesis_facts.size(); ++i)
    if (!formula_equal(a.hypothesis_facts[i], b.hypothesis_facts[i])) return false;
  for (std::size_t i = 0; i < a.history.entries.size(); ++i) {
    const HistoryEntry &x = a.history.entries[i], &y = b.history.entries[i];
    if (x.pvalue.kind != y.pvalue.kind || !pv_equal(x.pvalue.bound, y.pvalue.bound) ||
        !formula_equal(x.hypothesis, y.hypothesis))
      return false;
  }
  return true;
}

}  // namespace detail

inline ProgramReport verify_program(const ProgramAST& prog,
                                    const VerifyOptions& opt = {},
                                    const std::string& file = "<input>") {
  ProgramReport rep;
  rep.file = file;
  auto t0 = std::chrono::steady_clock::now();
  for (const FunctionDef& fn : prog.functions) {
    FunctionReport fr;
    fr.name = fn.name;
    std::vector<VerifCondition> vcs = generate_vcs(prog, fn);
    if (opt.jobs > 1) {
      std::vector<std::future<VcOutcome>> futs;
      for (const VerifCondition& vc : vcs)
        futs.push_back(std::async(std::launch::async,
                                  [&vc, &opt] { return detail::run_one_vc(vc, opt); }));
      for (auto& f : futs) fr.outcomes.push_back(f.get());
    } else {
      std::optional<Entailer> ent;
      const VerifCondition* ctx = nullptr;
      for (const VerifCondition& vc : vcs) {
        auto t1 = std::chrono::steady_clock::now();
        if (!ctx || !detail::same_context(*ctx, vc)) {
          ent.emplace(vc.hypothesis_facts, vc.history, opt.depth, opt.timeout_secs);
          ctx = &vc;
        }
        VcOutcome out;
        out.vc = vc;
        out.result = ent->discharge(vc.goal);
        if (out.result.status == DischargeResult::Failed && opt.compute_missing)
          out.missing =
              minimal_missing(vc.hypothesis_facts, vc.history, vc.goal, opt.depth);
        out.wall_ms = std::chrono::duration<double, std::milli>(
                          std::chrono::steady_clock::now() - t1)
                          .count();
        fr.outcomes.push_back(std::move(out));
      }
    }
    for (const VcOutcome& o : fr.outcomes)
      if (o.result.status != DischargeResult::Proved) fr.verified = false;
    rep.verified = rep.verified && fr.verified;
    rep.functions.push_back(std::move(fr));
  }
  rep.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0)
          .count();
  return rep;
}

inline ProgramReport verify_source(const std::string& source,
                                   const VerifyOptions& opt = {},
                                   const std::string& file = "<input>") {
  ProgramAST prog = parse(source);
  bind_and_check(prog);
  ProgramReport rep = verify_program(prog, opt, file);
  rep.digest = fnv1a(source);
  return rep;
}

inline const char* status_name(DischargeResult::Status s) {
  switch (s) {
    case DischargeResult::Proved: return "proved";
    case DischargeResult::Failed: return "failed";
    case DischargeResult::DepthExceeded: return "depth_exceeded";
    case DischargeResult::TimedOut: return "timed_out";
  }
  return "?";
}

inline std::string render_text(const ProgramReport& rep) {
  std::string out;
  for (const FunctionReport& fr : rep.functions) {
    out += "function " + fr.name + ": " + std::to_string(fr.outcomes.size()) +
           " verification condition(s)\n";
    for (const VcOutcome& o : fr.outcomes) {
      bool ok = o.result.status == DischargeResult::Proved;
      out += std::string("  [") + (ok ? "ok" : status_name(o.result.status)) + "] " +
             o.vc.id + "  " + o.vc.label + "\n";
      if (!ok && !o.result.detail.empty()) out += "       " + o.result.detail + "\n";
      for (const FormulaPtr& m : o.missing)
        out += "       missing: " + pretty_print(m) + "\n";
    }
    out += std::string("  ") + (fr.verified ? "verified" : "NOT verified") + "\n";
  }
  out += rep.verified ? "verdict: verified\n" : "verdict: NOT verified\n";
  return out;
}

inline nlohmann::json report_to_json(const ProgramReport& rep) {
  nlohmann::json j;
  j["schema_version"] = 1;
  j["file"] = rep.file;
  char buf[32];
  std::snprintf(buf, sizeof buf, "fnv1a:%016llx",
                static_cast<unsigned long long>(rep.digest));
  j["input_digest"] = buf;
  j["verified"] = rep.verified;
  j["wall_ms"] = rep.wall_ms;
  j["functions"] = nlohmann::json::array();
  for (const FunctionReport& fr : rep.functions) {
    nlohmann::json jf;
    jf["name"] = fr.name;
    jf["verified"] = fr.verified;
    jf["vcs"] = nlohmann::json::array();
    for (const VcOutcome& o : fr.outcomes) {
      nlohmann::json jv;
      jv["id"] = o.vc.id;
      jv["label"] = o.vc.label;
      jv["status"] = status_name(o.result.status);
      jv["line"] = o.vc.loc.line;
      jv["col"] = o.vc.loc.col;
      jv["trace_len"] = o.result.trace.size();
      jv["wall_ms"] = o.wall_ms;
      if (!o.result.detail.empty()) jv["detail"] = o.result.detail;
      jv["missing"] = nlohmann::json::array();
      for (const FormulaPtr& m : o.missing) jv["missing"].push_back(pretty_print(m));
      jf["vcs"].push_back(std::move(jv));
    }
    j["functions"].push_back(std::move(jf));
  }
  return j;
}

}  // namespace bhl
