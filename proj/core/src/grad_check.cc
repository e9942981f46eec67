#include "spanparse/grad_check.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

#include "spanparse/errors.h"

namespace spanparse {

namespace {

double evaluate(const ScalarFn& f) {
  Graph g;
  const double v = g.value(f(g))[0];
  if (!std::isfinite(v)) throw NumericError("grad_check: non-finite function value");
  return v;
}

}  // namespace

GradCheckResult grad_check(const ScalarFn& f, ParamRegistry& params,
                           const GradCheckOptions& options) {
  Gradients analytic(params.size());
  {
    Graph g;
    Var out = f(g);
    if (!std::isfinite(g.value(out)[0])) {
      throw NumericError("grad_check: non-finite function value");
    }
    g.backward(out);
    g.collect_param_grads(analytic);
  }

  std::mt19937_64 rng(options.seed);
  GradCheckResult result;
  for (std::size_t p = 0; p < params.size(); ++p) {
    Tensor& value = params[p].value;
    std::vector<std::size_t> coords(value.size());
    std::iota(coords.begin(), coords.end(), 0);
    if (coords.size() > options.max_coords_per_tensor) {
      std::shuffle(coords.begin(), coords.end(), rng);
      coords.resize(options.max_coords_per_tensor);
      std::sort(coords.begin(), coords.end());
    }
    for (std::size_t k : coords) {
      const double saved = value[k];
      value[k] = saved + options.eps;
      const double up = evaluate(f);
      value[k] = saved - options.eps;
      const double down = evaluate(f);
      value[k] = saved;

      const double numeric = (up - down) / (2.0 * options.eps);
      const double a = analytic.has(p) ? analytic.at(p)[k] : 0.0;
      if (!std::isfinite(a)) throw NumericError("grad_check: non-finite gradient in " + params[p].name);
      const double denom = std::max({std::abs(a), std::abs(numeric), options.denom_floor});
      const double rel = std::abs(a - numeric) / denom;
      ++result.coords_checked;
      if (rel > result.max_rel_error) {
        result.max_rel_error = rel;
        result.worst_param = params[p].name;
        result.worst_index = k;
        result.worst_analytic = a;
        result.worst_numeric = numeric;
      }
    }
  }
  return result;
}

}  // namespace spanparse
