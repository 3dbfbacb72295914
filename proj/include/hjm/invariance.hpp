#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "hjm/curve.hpp"
#include "hjm/model.hpp"
#include "hjm/solver.hpp"

namespace hjm {

struct ConeViolation {
  std::size_t i = 0, j = 0;  // i < j with h^j(xi) - h^i(xi) = gap > 0
  double xi = 0.0;
  double gap = 0.0;
};

struct ConeReport {
  bool member = true;
  std::optional<ConeViolation> worst;
  std::string note;
};

// h^1 >= ... >= h^m on the grid, riskless index excluded
ConeReport cone_membership(const CurveFamily& f, double tol = 1e-12);

struct ConeCounterexample {
  std::string condition;
  std::size_t i = 0, j = 0, factor = 0;
  double xi_star = 0.0;
  double chi = 0.0;
  double mark = 0.0;
  double t = 0.0;
  double lhs = 0.0, rhs = 0.0;
  std::optional<CurveFamily> family;
};

struct ConeCoeffReport {
  bool pass = true;
  std::vector<CheckResult> checks;  // cone-1, cone-2, cone-4, cone-3
  std::optional<ConeCounterexample> counterexample;
  std::size_t touchings = 0;
};

struct ConeCheckGrid {
  double step = 0.01;
  std::size_t intervals = 400;
  double horizon_t = 1.0;
  double tol = 1e-10;
};

ConeCoeffReport check_cone_coeff_conditions(const ModelSpec& spec, std::size_t samples, std::uint64_t seed,
                                            const ConeCheckGrid& grid = {});

struct PriceViolation {
  std::size_t path = 0;
  double t = 0.0;
  std::size_t i = 0, j = 0;
  double maturity = 0.0;
  double gap = 0.0;  // S^i B^i - S^j B^j
};

struct MonotonicityReport {
  bool pass = true;
  std::vector<CheckResult> preconditions;
  std::size_t comparisons = 0;
  std::size_t price_violations = 0;
  std::optional<PriceViolation> worst;
  std::size_t cone_violations = 0;  // recorded states outside K
  double worst_cone_gap = 0.0;
  // paths staying in K with ordered spots whose prices are still out of order
  std::size_t implication_failures = 0;
};

// S^i_t B^i(t,T) <= S^j_t B^j(t,T) + tol * scale for risky i < j over all records
MonotonicityReport monotonicity_report(const PathEnsemble& ens, const ModelSpec& spec, double tol = 1e-10);

}  // namespace hjm
