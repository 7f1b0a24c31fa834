#ifndef DMN_MODULES_HPP_
#define DMN_MODULES_HPP_

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmn/layout.hpp"
#include "dmn/params.hpp"
#include "dmn/rng.hpp"
#include "dmn/scene.hpp"

// Differentiable implementations of the module inventory. Attention maps are
// [G, G] tensors with nonnegative entries summing to one; predictions are
// [1, |answers|] logits.
namespace dmn::nn {

using ad::Tensor;

inline constexpr double kAttentionTolerance = 1e-6;
// Entry floor applied before renormalizing and/or/filter outputs.
inline constexpr double kNormalizeFloor = 1e-12;
// Per-cell mass added before filter renormalizes, so an empty intersection
// comes out near uniform (the same code find uses for "nothing matched").
inline constexpr double kFilterFloor = 1e-4;

class ModuleError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct ModuleConfig {
  int grid_size = 5;
  std::size_t text_dim = 128;
  std::size_t hidden_dim = 64;
  std::size_t feature_dim = scene::kFeatureDim;
  std::size_t answer_dim = 22;

  std::size_t cells() const { return static_cast<std::size_t>(grid_size * grid_size); }
};

// [cells, feature_dim] constant tensor.
Tensor feature_tensor(const scene::FeatureMap& features);

// Throws ModuleError unless t is a nonnegative [G,G] map with mass 1 +- 1e-6.
void check_attention(const Tensor& t, int grid_size);

// 1 / sum(t^2): the number of cells a uniform map over k cells spreads to is k.
Tensor effective_support(const Tensor& flat_map);

struct ModuleOutput {
  Tensor value;
  layout::OutputType type;
};

struct NodeTrace {
  // Child indices from the root, e.g. {} for the root, {0, 1} for the
  // second child of the first child.
  std::vector<int> path;
  layout::ModuleKind kind;
  Tensor output;
};

struct ExecutionResult {
  Tensor logits;
  // Post-order: children precede parents.
  std::vector<NodeTrace> trace;
};

class ModuleNetwork {
 public:
  // Registers parameters under "modules.<kind>.*"; is_present reuses exist's.
  ModuleNetwork(const ModuleConfig& config, ad::ParameterStore& store, Rng& rng);

  const ModuleConfig& config() const { return config_; }

  // text: [1, text_dim]; features: [cells, feature_dim].
  ModuleOutput apply(layout::ModuleKind kind, std::span<const Tensor> inputs, const Tensor& text,
                     const Tensor& features) const;

  // Post-order evaluation; text_vectors[i] belongs to the i-th token of the
  // tree's linearization.
  ExecutionResult execute(const layout::SyntaxTree& tree, std::span<const Tensor> text_vectors,
                          const Tensor& features) const;

 private:
  struct Params {
    Tensor w_feat, w_text, w_pool, w_pair, w_out, w_map, u, bias, bias_hidden;
  };

  const Params& params_for(layout::ModuleKind kind) const;
  Tensor spatial_scores(const Params& p, const Tensor& features, const Tensor& text,
                        const Tensor* pooled) const;
  Tensor to_map(const Tensor& flat) const;
  Tensor flat(const Tensor& map) const;

  ModuleConfig config_;
  std::vector<Params> params_;
};

}  // namespace dmn::nn

#endif  // DMN_MODULES_HPP_
