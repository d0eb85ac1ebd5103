#include "texcomp/nn/adam.hpp"

#include <cmath>

namespace texcomp::nn {
inline namespace TEXCOMP_PRECISION_NS {

Adam::Adam(std::vector<Parameter*> parameters, AdamOptions options)
    : params_(std::move(parameters)), options_(options) {
  for (Parameter* p : params_) {
    m_.emplace_back(p->value.shape);
    v_.emplace_back(p->value.shape);
  }
}

void Adam::zero_grad() {
  for (Parameter* p : params_) p->zero_grad();
}

void Adam::step() {
  ++step_count_;
  const double b1 = options_.beta1, b2 = options_.beta2;
  const double c1 = 1.0 - std::pow(b1, double(step_count_));
  const double c2 = 1.0 - std::pow(b2, double(step_count_));
  const double lr = options_.learning_rate;
  if (lr == 0.0) return;
  for (std::size_t k = 0; k < params_.size(); ++k) {
    Real* w = params_[k]->value.ptr();
    const Real* g = params_[k]->grad.ptr();
    Real* m = m_[k].ptr();
    Real* v = v_[k].ptr();
    for (std::size_t i = 0; i < m_[k].numel(); ++i) {
      m[i] = Real(b1 * m[i] + (1 - b1) * g[i]);
      v[i] = Real(b2 * v[i] + (1 - b2) * double(g[i]) * g[i]);
      const double mhat = m[i] / c1, vhat = v[i] / c2;
      w[i] = Real(w[i] - lr * mhat / (std::sqrt(vhat) + options_.epsilon));
    }
  }
}

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp::nn
