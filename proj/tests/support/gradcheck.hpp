#ifndef DMN_TESTS_GRADCHECK_HPP_
#define DMN_TESTS_GRADCHECK_HPP_

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "dmn/ops.hpp"
#include "dmn/rng.hpp"
#include "dmn/tensor.hpp"

namespace dmn::testing {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst;  // tensor index of the worst mismatch
};

// Relative error of two gradient vectors: |a - n| / max(|a| + |n|, floor).
inline double relative_error(const std::vector<double>& a, const std::vector<double>& n,
                             double floor = 1e-7) {
  double diff = 0.0, na = 0.0, nn = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    diff += (a[i] - n[i]) * (a[i] - n[i]);
    na += a[i] * a[i];
    nn += n[i] * n[i];
  }
  return std::sqrt(diff) / std::max(std::sqrt(na) + std::sqrt(nn), floor);
}

// Compares reverse-mode gradients of `loss` against central differences
// with step h for every entry of every input.
inline GradCheckResult grad_check(std::vector<ad::Tensor> inputs,
                                  const std::function<ad::Tensor()>& loss, double h = 1e-4) {
  for (auto& t : inputs) t.zero_grad();
  ad::Tensor l = loss();
  ad::backward(l);
  GradCheckResult r;
  for (std::size_t k = 0; k < inputs.size(); ++k) {
    auto& t = inputs[k];
    std::vector<double> analytic(t.grad().begin(), t.grad().end());
    std::vector<double> numeric(t.numel());
    {
      ad::NoGradGuard guard;
      auto data = t.mutable_data();
      for (std::size_t i = 0; i < data.size(); ++i) {
        const double orig = data[i];
        data[i] = orig + h;
        const double up = loss().item();
        data[i] = orig - h;
        const double down = loss().item();
        data[i] = orig;
        numeric[i] = (up - down) / (2.0 * h);
      }
    }
    const double e = relative_error(analytic, numeric);
    if (e > r.max_rel_error) {
      r.max_rel_error = e;
      r.worst = "input " + std::to_string(k);
    }
  }
  return r;
}

inline ad::Tensor random_param(ad::Shape shape, Rng& rng, double lo = -1.0, double hi = 1.0) {
  std::vector<double> v(ad::shape_numel(shape));
  for (double& x : v) x = rng.uniform(lo, hi);
  return ad::Tensor::parameter(std::move(shape), std::move(v));
}

// Fixed random weights that turn a tensor into a scalar with a generic
// gradient (a plain sum would hide errors that cancel across entries).
inline ad::Tensor weighted_sum(const ad::Tensor& t, std::uint64_t seed) {
  Rng rng(seed);
  std::vector<double> w(t.numel());
  for (double& x : w) x = rng.uniform(-1.0, 1.0);
  return ad::sum(ad::mul(t, ad::Tensor::from(t.shape(), std::move(w))));
}

}  // namespace dmn::testing

#endif  // DMN_TESTS_GRADCHECK_HPP_
