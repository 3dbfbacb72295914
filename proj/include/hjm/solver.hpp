#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "hjm/curve.hpp"
#include "hjm/model.hpp"

namespace hjm {

struct SimulationGrid {
  double dt = 0.01;  // equals the maturity step
  double horizon_t = 1.0;
  double horizon_xi = 6.0;
  // Brownian increments are sums of normals on this finer grid, so runs at
  // different dt can share one Brownian path. Zero means dt.
  double noise_dt = 0.0;

  std::size_t steps() const;
  std::size_t xi_intervals() const;
  std::size_t noise_substeps() const;
  void validate() const;
};

struct SimulationConfig {
  SimulationGrid grid;
  std::size_t n_paths = 10000;
  std::uint64_t seed = 42;
  std::size_t threads = 1;
  std::vector<double> maturities;  // absolute maturities T for recorded bond prices
  std::size_t record_every = 0;    // zero: about ten records per path
  std::size_t store_curves_paths = 0;
  bool track_cone = true;
  bool allow_fast_path = true;
  std::size_t max_ensemble_bytes = std::size_t{2} << 30;
};

struct JumpEvent {
  double mark;
  std::size_t count = 1;
};

struct StepInputs {
  std::vector<double> dW;
  std::vector<JumpEvent> jumps;
};

struct PathState {
  double t = 0.0;
  CurveFamily family;
  std::vector<double> spots;
  double numeraire = 1.0;
  double deflator = 1.0;
};

PathState initial_state(const ModelSpec& spec, const SimulationGrid& grid);

PathState euler_step(const PathState& s, double dt, const StepInputs& in, const ModelSpec& spec);

// exp(-int_0^tau eta)
double bond_price(const Curve& c, double tau);

// Per-path noise: Brownian increments keyed by (seed, path, fine step) and an
// exact compound Poisson path drawn from a per-path stream.
class NoiseSource {
 public:
  NoiseSource(const SimulationConfig& cfg, const ModelSpec& spec, std::size_t path);
  StepInputs step(std::size_t k) const;
  void brownian(std::size_t k, std::vector<double>& dW) const;
  const std::vector<std::pair<std::size_t, double>>& jump_events() const { return events_; }

 private:
  std::uint64_t seed_;
  std::size_t path_, d_, substeps_;
  double sqrt_noise_dt_;
  std::vector<std::pair<std::size_t, double>> events_;  // (step, mark), sorted by time
};

class PathEnsemble {
 public:
  PathEnsemble(std::size_t paths, std::vector<std::size_t> record_steps, double dt,
               std::size_t indices, std::vector<double> maturities, std::size_t store_curves_paths);

  std::size_t paths() const { return paths_; }
  std::size_t records() const { return steps_.size(); }
  std::size_t indices() const { return indices_; }
  const std::vector<double>& maturities() const { return maturities_; }
  const std::vector<double>& times() const { return times_; }
  const std::vector<std::size_t>& record_steps() const { return steps_; }
  std::optional<std::size_t> record_at(double t) const;
  std::optional<std::size_t> maturity_index(double T) const;

  double spot(std::size_t p, std::size_t r, std::size_t i) const { return spots_[(p * records() + r) * indices_ + i]; }
  double short_end(std::size_t p, std::size_t r, std::size_t i) const { return shorts_[(p * records() + r) * indices_ + i]; }
  double numeraire(std::size_t p, std::size_t r) const { return numeraire_[p * records() + r]; }
  double deflator(std::size_t p, std::size_t r) const { return deflator_[p * records() + r]; }
  double cone_gap(std::size_t p, std::size_t r) const { return cone_gap_[p * records() + r]; }
  // NaN when the maturity has passed
  double bond_price(std::size_t p, std::size_t r, std::size_t i, std::size_t j) const {
    return bonds_[((p * records() + r) * indices_ + i) * maturities_.size() + j];
  }
  const CurveFamily* family(std::size_t p, std::size_t r) const;

  void record(std::size_t p, std::size_t r, const PathState& s, bool keep_family);
  void record_scalars(std::size_t p, std::size_t r, const double* spots, const double* shorts,
                      double numeraire, double deflator, const double* bonds, double cone_gap);

  bool fast_path = false;
  double dt;

  static std::size_t estimate_bytes(std::size_t paths, std::size_t records, std::size_t indices,
                                    std::size_t maturities);

 private:
  std::size_t paths_, indices_;
  std::vector<std::size_t> steps_;
  std::vector<double> times_, maturities_;
  std::vector<double> spots_, shorts_, numeraire_, deflator_, cone_gap_, bonds_;
  std::size_t store_paths_;
  std::vector<std::optional<CurveFamily>> families_;
};

std::vector<std::size_t> record_schedule(const SimulationConfig& cfg);

PathEnsemble simulate(const SimulationConfig& cfg, const ModelSpec& spec);

// Called from the worker thread owning `path`; must only touch per-path data.
using StepObserver = std::function<void(std::size_t path, std::size_t step, const PathState& before,
                                        const StepInputs& in, const PathState& after)>;

// Full curve stepping with an observer; no ensemble is kept.
void simulate_paths(const SimulationConfig& cfg, const ModelSpec& spec, const StepObserver& observer);

// Runs fn(i) for i in [0, n) over contiguous blocks on `threads` workers.
void run_parallel(std::size_t n, std::size_t threads, const std::function<void(std::size_t)>& fn);

// max over risky i<j and nodes of eta^j - eta^i (positive means outside the cone)
double cone_gap(const CurveFamily& f);

// r_t and a^i_t from the pre-step short ends eta^j_t(0)
double short_rate_at(const ModelSpec& spec, double t, const double* shorts);
double spot_drift_at(const ModelSpec& spec, double t, const double* shorts, std::size_t i);

}  // namespace hjm
