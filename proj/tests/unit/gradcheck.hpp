#pragma once

#include "texcomp/nn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>
#include <vector>

namespace texcomp::test {

// Relative error with a floor so that gradients that are both ~0 compare equal.
inline double relative_error(double analytic, double numeric, double floor = 1e-7) {
  return std::abs(analytic - numeric) / std::max({std::abs(analytic), std::abs(numeric), floor});
}

struct GradCheckResult {
  int checked = 0;
  int passed = 0;
  double worst = 0;
  double pass_fraction() const { return checked ? double(passed) / checked : 0.0; }
};

// Central differences on up to `samples` entries of `values`, compared with
// `analytic` (same layout). `loss` re-evaluates the scalar objective.
inline GradCheckResult finite_difference_check(nn::Storage& values, const nn::Storage& analytic,
                                               const std::function<double()>& loss, int samples, double step,
                                               double tolerance, std::mt19937_64& rng) {
  GradCheckResult r;
  std::vector<std::size_t> order(values.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::shuffle(order.begin(), order.end(), rng);
  order.resize(std::min<std::size_t>(order.size(), std::size_t(samples)));
  for (std::size_t i : order) {
    const nn::Real saved = values[i];
    values[i] = saved + nn::Real(step);
    const double plus = loss();
    values[i] = saved - nn::Real(step);
    const double minus = loss();
    values[i] = saved;
    const double numeric = (plus - minus) / (2 * step);
    const double err = relative_error(analytic[i], numeric);
    ++r.checked;
    r.passed += err <= tolerance;
    r.worst = std::max(r.worst, err);
  }
  return r;
}

}  // namespace texcomp::test
