#ifndef SPANPARSE_GRAD_CHECK_H_
#define SPANPARSE_GRAD_CHECK_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>

#include "spanparse/autodiff.h"
#include "spanparse/params.h"

namespace spanparse {

struct GradCheckOptions {
  double eps = 1e-5;
  // At most this many coordinates are probed per tensor (sampled without
  // replacement when the tensor is larger).
  std::size_t max_coords_per_tensor = 200;
  std::uint64_t seed = 17;
  // Relative error is |a - n| / max(|a|, |n|, denom_floor).
  double denom_floor = 1e-4;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t coords_checked = 0;
};

// Builds a scalar (1x1) value on the given graph from the registry's params.
using ScalarFn = std::function<Var(Graph&)>;

// Compares reverse-mode gradients of `f` against central finite differences
// for every parameter in `params`. Parameter values are restored on return.
// Throws NumericError on non-finite values.
GradCheckResult grad_check(const ScalarFn& f, ParamRegistry& params,
                           const GradCheckOptions& options = {});

}  // namespace spanparse

#endif  // SPANPARSE_GRAD_CHECK_H_
