#pragma once

// Published models, keyed by short names usable on the command line.

#include "tlbm/model_solver.hpp"

#include <cmath>
#include <limits>
#include <string>
#include <vector>

namespace tlbm {

struct CatalogEntry {
  std::string name;
  int q = 3;
  /// pbar_4, pbar_6, ... relative to p_2 = 1.
  std::vector<long long> ratios;
  /// Published base speed, 6 decimals.
  double published_v2 = 0.0;
  /// Expansions the model was run with in the shock-tube experiments.
  std::string note;

  [[nodiscard]] RatioTuple tuple() const { return RatioTuple::from_ratios(q, ratios); }
};

inline const std::vector<CatalogEntry>& catalog() {
  static const std::vector<CatalogEntry> entries{
      {"q3", 3, {}, 1.224745, "sqrt(3/2), w-bar_2 = 1/6"},
      {"q5", 5, {3}, 0.553432, "ghost-free branch at r = 1/3; HE3 and TE2 shock tubes"},
      {"q7", 7, {2, 3}, 0.846393, "TE3 shock tube"},
      {"q11", 11, {2, 3, 4, 5}, 0.685900, "TE4 shock tube"},
      {"q21", 21, {2, 3, 4, 5, 6, 7, 8, 9, 11}, 0.372889, "TE5 shock tube at rho-bar = 11"},
  };
  return entries;
}

inline const CatalogEntry& find_catalog_entry(const std::string& name) {
  for (const auto& e : catalog()) {
    if (e.name == name) {
      return e;
    }
  }
  throw InvalidArgument("unknown catalog model '" + name + "' (try: q3, q5, q7, q11, q21)");
}

/// Solves the entry's ratio tuple and returns the branch closest to the published v_2.
inline VelocityModel resolve(const CatalogEntry& entry, double ghost_threshold = kDefaultGhostThreshold) {
  const auto models = solve_model(entry.tuple(), ghost_threshold);
  if (models.empty()) {
    throw NumericalFailure("catalog model " + entry.name + " has no positive root");
  }
  const VelocityModel* best = &models.front();
  double best_gap = std::numeric_limits<double>::infinity();
  for (const auto& m : models) {
    const double gap = std::abs(m.v2 - entry.published_v2);
    if (gap < best_gap) {
      best_gap = gap;
      best = &m;
    }
  }
  return *best;
}

inline VelocityModel catalog_model(const std::string& name) { return resolve(find_catalog_entry(name)); }

}  // namespace tlbm
