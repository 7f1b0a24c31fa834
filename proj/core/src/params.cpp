#include "dmn/params.hpp"

#include <cmath>
#include <stdexcept>

#include "dmn/adam.hpp"

namespace dmn::ad {

Tensor ParameterStore::add_weight(const std::string& name, std::size_t fan_in,
                                   std::size_t fan_out, Rng& rng) {
  const double a = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  std::vector<double> data(fan_in * fan_out);
  for (double& v : data) v = rng.uniform(-a, a);
  return add(name, Tensor::parameter({fan_in, fan_out}, std::move(data)));
}

Tensor ParameterStore::add_zeros(const std::string& name, Shape shape) {
  const std::size_t n = shape_numel(shape);
  return add(name, Tensor::parameter(std::move(shape), std::vector<double>(n, 0.0)));
}

Tensor ParameterStore::add(const std::string& name, Tensor t) {
  if (index_.contains(name)) throw std::invalid_argument("duplicate parameter " + name);
  index_[name] = tensors_.size();
  names_.push_back(name);
  tensors_.push_back(std::move(t));
  return tensors_.back();
}

Tensor& ParameterStore::get(const std::string& name) {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + name);
  return tensors_[it->second];
}

const Tensor& ParameterStore::get(const std::string& name) const {
  auto it = index_.find(name);
  if (it == index_.end()) throw std::out_of_range("unknown parameter " + name);
  return tensors_[it->second];
}

void ParameterStore::zero_grad() {
  for (Tensor& t : tensors_) t.zero_grad();
}

std::size_t ParameterStore::scalar_count() const {
  std::size_t n = 0;
  for (const Tensor& t : tensors_) n += t.numel();
  return n;
}

double ParameterStore::clip_grad_norm(double max_norm) {
  double sq = 0.0;
  for (const Tensor& t : tensors_) {
    for (double g : t.grad()) sq += g * g;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double f = max_norm / norm;
    for (Tensor& t : tensors_) {
      if (!t.has_grad()) continue;
      for (double& g : t.mutable_grad()) g *= f;
    }
  }
  return norm;
}

void ParameterStore::copy_values_from(const ParameterStore& other) {
  if (other.names_ != names_) throw std::invalid_argument("parameter layouts differ");
  for (std::size_t i = 0; i < tensors_.size(); ++i) {
    if (tensors_[i].shape() != other.tensors_[i].shape()) {
      throw ShapeError("parameter " + names_[i] + " shape mismatch");
    }
    auto src = other.tensors_[i].data();
    std::copy(src.begin(), src.end(), tensors_[i].mutable_data().begin());
  }
}

AdamState make_adam_state(const ParameterStore& params, const AdamConfig& config) {
  AdamState s;
  s.config = config;
  for (const Tensor& t : params.tensors()) {
    s.first_moment.emplace_back(t.numel(), 0.0);
    s.second_moment.emplace_back(t.numel(), 0.0);
  }
  return s;
}

void adam_step(ParameterStore& params, AdamState& state) {
  auto& tensors = params.tensors();
  if (state.first_moment.size() != tensors.size()) {
    throw std::invalid_argument("Adam state does not match parameter store");
  }
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    if (!tensors[i].has_grad()) {
      throw std::invalid_argument("parameter " + params.names()[i] + " has no gradient");
    }
  }
  const AdamConfig& c = state.config;
  ++state.step;
  const double t = static_cast<double>(state.step);
  const double bc1 = 1.0 - std::pow(c.beta1, t);
  const double bc2 = 1.0 - std::pow(c.beta2, t);
  for (std::size_t i = 0; i < tensors.size(); ++i) {
    auto data = tensors[i].mutable_data();
    auto grad = tensors[i].mutable_grad();
    auto& m = state.first_moment[i];
    auto& v = state.second_moment[i];
    for (std::size_t j = 0; j < data.size(); ++j) {
      const double g = grad[j];
      m[j] = c.beta1 * m[j] + (1.0 - c.beta1) * g;
      v[j] = c.beta2 * v[j] + (1.0 - c.beta2) * g * g;
      const double mhat = m[j] / bc1;
      const double vhat = v[j] / bc2;
      data[j] -= c.learning_rate * mhat / (std::sqrt(vhat) + c.epsilon);
      grad[j] = 0.0;
    }
  }
}

}  // namespace dmn::ad
