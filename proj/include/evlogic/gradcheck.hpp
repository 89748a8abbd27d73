#pragma once

#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "evlogic/mlp.hpp"

namespace evlogic {

struct FiniteDiffReport {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  std::size_t checked = 0;
  bool ok = true;        // false when f returned a non-finite value
  std::string fault;     // names the offending parameter when !ok
};

// Central-difference check of analytic gradients.
//
// `f` evaluates the scalar objective at the current parameter values;
// `params` are mutated in place (+/- step) and restored. Relative error per
// entry is |analytic - fd| / (|fd| + 1e-12); the report carries the max.
inline FiniteDiffReport finite_diff_check(const std::function<double()>& f,
                                          const std::vector<ParamView>& params,
                                          const std::vector<ParamView>& analytic,
                                          double step) {
  require(step > 0.0, "finite_diff_check: step must be positive");
  require(params.size() == analytic.size(), "finite_diff_check: view count mismatch");
  FiniteDiffReport report;
  for (std::size_t i = 0; i < params.size(); ++i) {
    require(params[i].size == analytic[i].size,
            "finite_diff_check: shape mismatch for " + params[i].name);
    for (std::size_t j = 0; j < params[i].size; ++j) {
      double& p = params[i].data[j];
      const double saved = p;
      p = saved + step;
      const double f_plus = f();
      p = saved - step;
      const double f_minus = f();
      p = saved;
      if (!std::isfinite(f_plus) || !std::isfinite(f_minus)) {
        report.ok = false;
        report.fault = params[i].name + "[" + std::to_string(j) + "]";
        return report;
      }
      const double fd = (f_plus - f_minus) / (2.0 * step);
      const double rel = std::fabs(analytic[i].data[j] - fd) / (std::fabs(fd) + 1e-12);
      ++report.checked;
      if (rel > report.max_rel_error) {
        report.max_rel_error = rel;
        report.worst_param = params[i].name;
        report.worst_index = j;
      }
    }
  }
  return report;
}

}  // namespace evlogic
