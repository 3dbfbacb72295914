#pragma once

#include <cstddef>
#include <vector>

#include "hjm/model.hpp"
#include "hjm/solver.hpp"

namespace hjm {

// z exp(lambda.dW - |lambda|^2 dt/2 - dt int psi dF) prod (1 + psi(x)), lambda and psi at time t
double lmd_step(double z, double dt, const StepInputs& in, const ModelSpec& spec, double t);

class DeflatedSeries {
 public:
  DeflatedSeries(std::vector<double> times, std::vector<std::size_t> indices,
                 std::vector<double> maturities, std::size_t paths);

  const std::vector<double>& times() const { return times_; }
  const std::vector<std::size_t>& indices() const { return indices_; }
  const std::vector<double>& maturities() const { return maturities_; }
  std::size_t paths() const { return paths_; }
  // a = position in indices(), b = position in maturities(), r = record
  double& at(std::size_t a, std::size_t b, std::size_t p, std::size_t r) {
    return values_[((a * maturities_.size() + b) * paths_ + p) * times_.size() + r];
  }
  double at(std::size_t a, std::size_t b, std::size_t p, std::size_t r) const {
    return values_[((a * maturities_.size() + b) * paths_ + p) * times_.size() + r];
  }

 private:
  std::vector<double> times_;
  std::vector<std::size_t> indices_;
  std::vector<double> maturities_;
  std::size_t paths_;
  std::vector<double> values_;
};

// Z_t (X^0_t)^{-1} S^i_t B^i(t,T); NaN after maturity
DeflatedSeries deflated_series(const PathEnsemble& ens, const std::vector<double>& maturities,
                               const std::vector<std::size_t>& indices);

struct ZScore {
  std::size_t index;
  double maturity;
  double t;
  double mean;
  double value0;
  double se;
  double z;
  bool pass;
};

std::vector<ZScore> martingale_zscore(const DeflatedSeries& s, double t);

struct YCheckResult {
  double max_gap = 0.0;  // max over paths and steps of |direct - via Y| / |direct|
  std::size_t worst_path = 0;
  double worst_t = 0.0;
};

// Accumulates Y^i(., T) along each simulated path and compares S_0 B(0,T) E(Y)
// with (X^0)^{-1} S^i B^i(., T) at every step t <= T. Needs per-step
// volatilities, so it runs its own simulation.
YCheckResult y_representation_check(const SimulationConfig& cfg, const ModelSpec& spec, std::size_t i,
                                    double T);

}  // namespace hjm
