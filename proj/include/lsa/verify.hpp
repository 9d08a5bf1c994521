#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

namespace lsa {

/// One property checked over many cases. Margins are (right side - left
/// side), so a property holds on a case when its margin is >= -tolerance.
struct PropertyRow {
  std::string module;
  std::string property;
  std::size_t cases = 0;
  std::size_t failures = 0;
  double worst_margin = std::numeric_limits<double>::infinity();
  double tolerance = 1e-9;
  /// Extra measured quantity, e.g. the largest ratio seen.
  double observed = 0.0;
  /// Minimal reproduction of the first failing case.
  nlohmann::json repro;

  bool passed() const { return failures == 0 && cases > 0; }
  void record(double margin, const nlohmann::json& detail = {});
};

struct VerifyTable {
  std::uint64_t seed = 0;
  std::vector<PropertyRow> rows;

  bool passed() const;
  std::string to_csv() const;
  nlohmann::json to_json() const;
};

/// Exact finite-set properties of excess, relative excess and the relative
/// Walkup-Wets distance on random triples in R^1..R^3.
std::vector<PropertyRow> exact_property_rows(std::uint64_t seed, std::size_t triples = 1000);

/// D~_{0,1}[{0,1},{0,1+1/i}] = 1 and D~_{0,1+1/i} = 1/(i+1); observed is
/// the largest failure ratio, which should be imax + 1.
PropertyRow hausdorff_monotonicity_row(int imax = 100);

/// D_{0,r}[{0,1+1/i},{0,1}] = 1/(i r) for r in {2,4,8}.
PropertyRow walkup_wets_convergence_row(int imax = 100);

/// Size bounds dist(x,A)/r - slack <= Theta <= 1 + dist(x,A)/r + slack and
/// beta <= Theta + gaps on random G(2,1) queries against analytic sets.
std::vector<PropertyRow> approximability_rows(std::uint64_t seed, std::size_t queries = 500);

/// exact <= greedy on small clouds and monotonicity of greedy counts in s.
std::vector<PropertyRow> covering_rows(std::uint64_t seed, std::size_t cases = 200);

/// Every suite above at desk scale.
VerifyTable verify_suite(std::uint64_t seed, std::size_t scale = 1000);

}  // namespace lsa
