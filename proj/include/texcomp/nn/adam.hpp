#pragma once

#include "texcomp/nn/tensor.hpp"

#include <vector>

namespace texcomp::nn {
inline namespace TEXCOMP_PRECISION_NS {

struct AdamOptions {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam(std::vector<Parameter*> parameters, AdamOptions options);

  void zero_grad();
  void step();
  long steps() const { return step_count_; }
  const AdamOptions& options() const { return options_; }

  // Moment estimates, exposed for checkpointing.
  std::vector<Tensor>& first_moments() { return m_; }
  std::vector<Tensor>& second_moments() { return v_; }
  void set_steps(long n) { step_count_ = n; }

 private:
  std::vector<Parameter*> params_;
  AdamOptions options_;
  std::vector<Tensor> m_;
  std::vector<Tensor> v_;
  long step_count_ = 0;
};

}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp::nn
