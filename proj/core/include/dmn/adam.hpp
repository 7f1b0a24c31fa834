#ifndef DMN_ADAM_HPP_
#define DMN_ADAM_HPP_

#include <cstdint>
#include <vector>

#include "dmn/params.hpp"

namespace dmn::ad {

struct AdamConfig {
  double learning_rate = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct AdamState {
  AdamConfig config;
  std::vector<std::vector<double>> first_moment;
  std::vector<std::vector<double>> second_moment;
  std::uint64_t step = 0;
};

AdamState make_adam_state(const ParameterStore& params, const AdamConfig& config);

// One bias-corrected Adam update over every parameter; zeroes the grads
// afterwards. Throws std::invalid_argument naming the first parameter with
// no populated gradient.
void adam_step(ParameterStore& params, AdamState& state);

}  // namespace dmn::ad

#endif  // DMN_ADAM_HPP_
