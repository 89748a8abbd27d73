#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "evlogic/mlp.hpp"

namespace evlogic {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

// Adam with bias correction over a set of named parameter tensors. Moments
// are keyed by view name so the optimizer state survives checkpointing.
class AdamOpt {
 public:
  struct Moments {
    std::vector<double> m;
    std::vector<double> v;
  };

  AdamOpt() = default;
  explicit AdamOpt(AdamConfig cfg) : cfg_(cfg) {}

  // One update over matching (params, grads) views. Refuses the whole step
  // if any gradient entry is non-finite.
  void step(const std::vector<ParamView>& params,
            const std::vector<ParamView>& grads) {
    require(params.size() == grads.size(), "adam: group size mismatch");
    for (std::size_t i = 0; i < params.size(); ++i) {
      require(params[i].size == grads[i].size, "adam: shape mismatch for " + params[i].name);
      for (std::size_t j = 0; j < grads[i].size; ++j) {
        if (!std::isfinite(grads[i].data[j]))
          throw std::runtime_error("adam: non-finite gradient in " + grads[i].name);
      }
    }
    ++step_count_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_count_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_count_));
    for (std::size_t i = 0; i < params.size(); ++i) {
      Moments& mo = moments_[params[i].name];
      if (mo.m.empty()) {
        mo.m.assign(params[i].size, 0.0);
        mo.v.assign(params[i].size, 0.0);
      }
      require(mo.m.size() == params[i].size, "adam: moment shape drift for " + params[i].name);
      double* p = params[i].data;
      const double* g = grads[i].data;
      for (std::size_t j = 0; j < params[i].size; ++j) {
        mo.m[j] = cfg_.beta1 * mo.m[j] + (1.0 - cfg_.beta1) * g[j];
        mo.v[j] = cfg_.beta2 * mo.v[j] + (1.0 - cfg_.beta2) * g[j] * g[j];
        const double mhat = mo.m[j] / bc1;
        const double vhat = mo.v[j] / bc2;
        p[j] -= cfg_.learning_rate * mhat / (std::sqrt(vhat) + cfg_.epsilon);
      }
    }
  }

  std::int64_t step_count() const { return step_count_; }
  const AdamConfig& config() const { return cfg_; }
  const std::map<std::string, Moments>& moments() const { return moments_; }

  void restore(std::int64_t step_count, std::map<std::string, Moments> moments) {
    step_count_ = step_count;
    moments_ = std::move(moments);
  }

 private:
  AdamConfig cfg_;
  std::int64_t step_count_ = 0;
  std::map<std::string, Moments> moments_;
};

}  // namespace evlogic
