// Brute-force finite-model semantics for the epistemic fragment. This is a
// test oracle only: the entailment engine's rules are validated against it on
// exhaustively enumerated small models. Never used at verification time.
//
// Accessibility is an equivalence relation by construction (worlds carry a
// partition block id), so the S5 axioms hold by definition of the model class.
#pragma once

#include <vector>

#include "bhl/logic.hpp"
#include "bhl/specs.hpp"

namespace bhl {

struct KripkeModel {
  std::vector<AtomicFormula> atom_universe;
  std::size_t n_worlds = 0;
  std::vector<std::size_t> block_of;          // world -> equivalence class id
  std::vector<std::vector<bool>> valuation;   // [world][atom]
  std::vector<TestHistory> histories;         // per world
};

namespace detail {

inline bool statb_holds(const PValueRecord& claim, const FormulaPtr& hyp,
                        const TestHistory& hist) {
  ComposeOutcome out = compose_pvs_ex(hyp, hist);
  if (!out.ok()) return false;
  const PValueRecord& got = *out.record;
  if (claim.kind == PValueRecord::Exact)
    return got.kind == PValueRecord::Exact && pv_equal(got.bound, claim.bound);
  return pv_leq(got.bound, claim.bound);
}

}  // namespace detail

inline bool satisfies(const KripkeModel& m, std::size_t w, const FormulaPtr& f) {
  switch (f->conn) {
    case Conn::Atom: {
      if (auto g = eval_ground_atom(f->atom)) return *g;
      for (std::size_t i = 0; i < m.atom_universe.size(); ++i)
        if (atom_compare(m.atom_universe[i], f->atom) == 0) return m.valuation[w][i];
      throw VerifyError("UnknownAtom", pretty_atom(f->atom));
    }
    case Conn::Not:
      return !satisfies(m, w, f->kids[0]);
    case Conn::Conj:
      for (const auto& k : f->kids)
        if (!satisfies(m, w, k)) return false;
      return true;
    case Conn::Disj:
      for (const auto& k : f->kids)
        if (satisfies(m, w, k)) return true;
      return false;
    case Conn::Know:
      for (std::size_t v = 0; v < m.n_worlds; ++v)
        if (m.block_of[v] == m.block_of[w] && !satisfies(m, v, f->kids[0]))
          return false;
      return true;
    case Conn::Possible:
      for (std::size_t v = 0; v < m.n_worlds; ++v)
        if (m.block_of[v] == m.block_of[w] && satisfies(m, v, f->kids[0]))
          return true;
      return false;
    case Conn::StatB:
      return detail::statb_holds(f->pv, f->kids[0], m.histories[w]);
  }
  return false;
}

// Enumerates every model with exactly n worlds: all partitions (restricted
// growth strings) x all valuations x all history assignments from the pool.
inline std::vector<KripkeModel> enumerate_models_exact(
    const std::vector<AtomicFormula>& atoms, std::size_t n_worlds,
    const std::vector<TestHistory>& history_pool) {
  std::vector<TestHistory> pool = history_pool;
  if (pool.empty()) pool.push_back(TestHistory{});

  std::vector<std::vector<std::size_t>> partitions;
  std::vector<std::size_t> rgs(n_worlds, 0);
  auto gen_partitions = [&](auto&& self, std::size_t i, std::size_t max_used) -> void {
    if (i == n_worlds) {
      partitions.push_back(rgs);
      return;
    }
    for (std::size_t b = 0; b <= max_used + 1 && b < n_worlds; ++b) {
      rgs[i] = b;
      self(self, i + 1, std::max(max_used, b));
    }
  };
  rgs[0] = 0;
  if (n_worlds > 0) gen_partitions(gen_partitions, 1, 0);

  std::vector<KripkeModel> models;
  std::size_t n_val = std::size_t(1) << (atoms.size() * n_worlds);
  for (const auto& part : partitions) {
    for (std::size_t val = 0; val < n_val; ++val) {
      std::vector<std::vector<bool>> valuation(n_worlds,
                                               std::vector<bool>(atoms.size()));
      std::size_t bit = 0;
      for (std::size_t w = 0; w < n_worlds; ++w)
        for (std::size_t a = 0; a < atoms.size(); ++a)
          valuation[w][a] = (val >> bit++) & 1;
      std::vector<std::size_t> hist_idx(n_worlds, 0);
      while (true) {
        KripkeModel m;
        m.atom_universe = atoms;
        m.n_worlds = n_worlds;
        m.block_of = part;
        m.valuation = valuation;
        for (std::size_t w = 0; w < n_worlds; ++w) m.histories.push_back(pool[hist_idx[w]]);
        models.push_back(std::move(m));
        std::size_t k = 0;
        while (k < n_worlds && ++hist_idx[k] == pool.size()) hist_idx[k++] = 0;
        if (k == n_worlds) break;
      }
    }
  }
  return models;
}

inline std::vector<KripkeModel> enumerate_models(
    const std::vector<AtomicFormula>& atoms, std::size_t max_worlds,
    const std::vector<TestHistory>& history_pool) {
  if (max_worlds > 4)
    throw VerifyError("LimitExceeded", "model enumeration is capped at 4 worlds");
  std::vector<KripkeModel> all;
  for (std::size_t n = 1; n <= max_worlds; ++n) {
    auto ms = enumerate_models_exact(atoms, n, history_pool);
    all.insert(all.end(), std::make_move_iterator(ms.begin()),
               std::make_move_iterator(ms.end()));
  }
  return all;
}

}  // namespace bhl
