#pragma once

// The network code is compiled once in float for training and inference, and
// once more in double for finite-difference gradient checks. The inline
// namespace keeps the two builds' symbols apart.
#ifdef TEXCOMP_DOUBLE_PRECISION
#define TEXCOMP_PRECISION_NS f64
#else
#define TEXCOMP_PRECISION_NS f32
#endif

namespace texcomp::nn {
inline namespace TEXCOMP_PRECISION_NS {
#ifdef TEXCOMP_DOUBLE_PRECISION
using Real = double;
#else
using Real = float;
#endif
}  // namespace TEXCOMP_PRECISION_NS
}  // namespace texcomp::nn
