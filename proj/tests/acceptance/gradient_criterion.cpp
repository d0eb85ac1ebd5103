#include "gradient_criterion.hpp"

#include "joint_gradcheck.hpp"

namespace acceptance {

GradientSummary joint_gradient_summary(int samples, double tolerance) {
  texcomp::test::JointGradCheckOptions o;
  o.resolution = 16;
  o.base_channels = 2;
  o.samples = samples;
  o.tolerance = tolerance;
  const auto r = texcomp::test::joint_gradient_check(o);
  return {r.checked, r.pass_fraction()};
}

}  // namespace acceptance
