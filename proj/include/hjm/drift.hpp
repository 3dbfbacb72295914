#pragma once

#include <cstddef>
#include <vector>

#include "hjm/curve.hpp"
#include "hjm/model.hpp"

namespace hjm {

struct DriftInputs {
  const CurveFamily& family;  // pre-jump state
  double t;
  const ModelSpec& spec;
  Measure mode;
};

DriftInputs drift_inputs(const CurveFamily& family, double t, const ModelSpec& spec);

// alpha^i = beta.Ibeta - (lambda + b^i).beta + int gamma [1 - e^{-I gamma}(1+psi)(1+c^i)] F(dx)
CurveFamily rw_drift(const DriftInputs& in);

// a^i = r - eta^i(0) - lambda.b^i - int c^i psi F(dx); entry 0 is the r - eta^0(0) residual
std::vector<double> short_end_drift(const DriftInputs& in);

// int_0^{T-t} alpha^i minus the closed right-hand side of the integrated condition
std::vector<double> integrated_drift_residual(const DriftInputs& in, double T);

struct JumpIntegrability {
  double value = 0.0;
  std::size_t active = 0;
  bool pass = true;
};

std::vector<JumpIntegrability> jump_integrability_check(const DriftInputs& in, double T);

}  // namespace hjm
