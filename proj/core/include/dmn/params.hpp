#ifndef DMN_PARAMS_HPP_
#define DMN_PARAMS_HPP_

#include <map>
#include <string>
#include <vector>

#include "dmn/rng.hpp"
#include "dmn/tensor.hpp"

namespace dmn::ad {

// Named, ordered collection of trainable tensors.
class ParameterStore {
 public:
  // Glorot-uniform matrix [fan_in, fan_out].
  Tensor add_weight(const std::string& name, std::size_t fan_in, std::size_t fan_out, Rng& rng);
  Tensor add_zeros(const std::string& name, Shape shape);
  Tensor add(const std::string& name, Tensor t);

  Tensor& get(const std::string& name);
  const Tensor& get(const std::string& name) const;
  bool contains(const std::string& name) const { return index_.contains(name); }

  std::size_t size() const { return tensors_.size(); }
  const std::vector<std::string>& names() const { return names_; }
  std::vector<Tensor>& tensors() { return tensors_; }
  const std::vector<Tensor>& tensors() const { return tensors_; }

  void zero_grad();
  std::size_t scalar_count() const;

  // Scales all gradients so their global L2 norm is at most max_norm.
  // Returns the norm before clipping.
  double clip_grad_norm(double max_norm);

  // Overwrites values (not identity) from another store with the same layout.
  void copy_values_from(const ParameterStore& other);

 private:
  std::vector<std::string> names_;
  std::vector<Tensor> tensors_;
  std::map<std::string, std::size_t> index_;
};

}  // namespace dmn::ad

#endif  // DMN_PARAMS_HPP_
