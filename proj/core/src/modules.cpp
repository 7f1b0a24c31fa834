#include "dmn/modules.hpp"

#include <cmath>
#include <functional>

#include "dmn/ops.hpp"

namespace dmn::nn {
namespace {

using layout::ModuleKind;
using layout::OutputType;

Tensor normalize(const Tensor& t) {
  const Tensor floored = ad::clamp_min(t, kNormalizeFloor);
  return ad::div(floored, ad::sum(floored));
}

// Rescales a distribution to a membership function with peak 1.
Tensor membership(const Tensor& t) { return ad::div(t, ad::max(t)); }

std::string path_str(const std::vector<int>& path) {
  if (path.empty()) return "root";
  std::string s;
  for (std::size_t i = 0; i < path.size(); ++i) {
    if (i) s += '.';
    s += std::to_string(path[i]);
  }
  return s;
}

}  // namespace

Tensor feature_tensor(const scene::FeatureMap& features) {
  return Tensor::from({features.cells(), scene::kFeatureDim}, features.values);
}

void check_attention(const Tensor& t, int grid_size) {
  const auto g = static_cast<std::size_t>(grid_size);
  if (t.shape() != ad::Shape{g, g}) {
    throw ModuleError("attention map has shape " + ad::shape_str(t.shape()) + ", expected " +
                      ad::shape_str({g, g}));
  }
  double total = 0.0;
  for (double v : t.data()) {
    if (!(v >= 0.0)) throw ModuleError("attention map has a negative or NaN entry");
    total += v;
  }
  if (std::abs(total - 1.0) > kAttentionTolerance) {
    throw ModuleError("attention map mass " + std::to_string(total) + " is not 1");
  }
}

Tensor effective_support(const Tensor& flat_map) {
  return ad::div(Tensor::scalar(1.0), ad::sum(ad::mul(flat_map, flat_map)));
}

ModuleNetwork::ModuleNetwork(const ModuleConfig& config, ad::ParameterStore& store, Rng& rng)
    : config_(config), params_(layout::kNumModuleKinds) {
  const std::size_t d_img = config.feature_dim;
  const std::size_t d_txt = config.text_dim;
  const std::size_t dh = config.hidden_dim;
  const std::size_t n_ans = config.answer_dim;
  // Flattened map plus its effective support.
  const std::size_t map_in = 2;
  for (ModuleKind kind : layout::all_kinds()) {
    if (kind == ModuleKind::kIsPresent) continue;
    const std::string prefix = "modules." + std::string(layout::kind_name(kind)) + ".";
    Params& p = params_[static_cast<std::size_t>(kind)];
    switch (kind) {
      case ModuleKind::kFind:
      case ModuleKind::kFilter:
        p.w_feat = store.add_weight(prefix + "w_feat", d_img, dh, rng);
        p.w_text = store.add_weight(prefix + "w_text", d_txt, dh, rng);
        p.u = store.add_weight(prefix + "u", dh, 1, rng);
        break;
      case ModuleKind::kRelocate:
        p.w_feat = store.add_weight(prefix + "w_feat", d_img, dh, rng);
        p.w_text = store.add_weight(prefix + "w_text", d_txt, dh, rng);
        p.w_pool = store.add_weight(prefix + "w_pool", d_img, dh, rng);
        p.u = store.add_weight(prefix + "u", dh, 1, rng);
        break;
      case ModuleKind::kDescribe:
        p.w_pool = store.add_weight(prefix + "w_pool", d_img, dh, rng);
        p.w_text = store.add_weight(prefix + "w_text", d_txt, dh, rng);
        p.w_out = store.add_weight(prefix + "w_out", dh, n_ans, rng);
        break;
      case ModuleKind::kCompare:
        p.w_pair = store.add_weight(prefix + "w_pair", 2 * d_img, dh, rng);
        p.w_text = store.add_weight(prefix + "w_text", d_txt, dh, rng);
        p.w_out = store.add_weight(prefix + "w_out", dh, n_ans, rng);
        break;
      case ModuleKind::kExist:
      case ModuleKind::kCount:
        p.w_map = store.add_weight(prefix + "w_map", map_in, n_ans, rng);
        p.bias = store.add_zeros(prefix + "bias", {n_ans});
        break;
      case ModuleKind::kGreaterThan:
      case ModuleKind::kLessThan:
      case ModuleKind::kEqualTo:
        p.w_pair = store.add_weight(prefix + "w_pair", 2 * map_in, dh, rng);
        p.bias_hidden = store.add_zeros(prefix + "bias_hidden", {dh});
        p.w_out = store.add_weight(prefix + "w_out", dh, n_ans, rng);
        break;
      case ModuleKind::kAnd:
      case ModuleKind::kOr:
      case ModuleKind::kIsPresent:
        break;
    }
  }
  params_[static_cast<std::size_t>(ModuleKind::kIsPresent)] =
      params_[static_cast<std::size_t>(ModuleKind::kExist)];
}

const ModuleNetwork::Params& ModuleNetwork::params_for(ModuleKind kind) const {
  return params_[static_cast<std::size_t>(kind)];
}

Tensor ModuleNetwork::to_map(const Tensor& flat) const {
  const auto g = static_cast<std::size_t>(config_.grid_size);
  return ad::reshape(flat, {g, g});
}

Tensor ModuleNetwork::flat(const Tensor& map) const {
  return ad::reshape(map, {1, config_.cells()});
}

// u . tanh(W_feat x[h,w] + W_text c [+ W_pool a]) for every cell, as [1, cells].
Tensor ModuleNetwork::spatial_scores(const Params& p, const Tensor& features, const Tensor& text,
                                     const Tensor* pooled) const {
  Tensor pre = ad::add(ad::matmul(features, p.w_feat), ad::matmul(text, p.w_text));
  if (pooled) pre = ad::add(pre, ad::matmul(*pooled, p.w_pool));
  return ad::reshape(ad::matmul(ad::tanh(pre), p.u), {1, config_.cells()});
}

ModuleOutput ModuleNetwork::apply(ModuleKind kind, std::span<const Tensor> inputs,
                                  const Tensor& text, const Tensor& features) const {
  const layout::Signature& sig = layout::signature(kind);
  if (inputs.size() != static_cast<std::size_t>(sig.arity)) {
    throw ModuleError(std::string(layout::kind_name(kind)) + " takes " +
                      std::to_string(sig.arity) + " attention input(s), got " +
                      std::to_string(inputs.size()));
  }
  for (const Tensor& t : inputs) check_attention(t, config_.grid_size);
  if (features.shape() != ad::Shape{config_.cells(), config_.feature_dim}) {
    throw ModuleError("feature map has shape " + ad::shape_str(features.shape()));
  }
  if (sig.uses_features && text.shape() != ad::Shape{1, config_.text_dim}) {
    throw ModuleError("text vector has shape " + ad::shape_str(text.shape()));
  }
  const Params& p = params_for(kind);
  auto attention = [](Tensor v) { return ModuleOutput{std::move(v), OutputType::kAttention}; };
  auto prediction = [](Tensor v) { return ModuleOutput{std::move(v), OutputType::kPrediction}; };
  auto pooled = [&](const Tensor& map) { return ad::matmul(flat(map), features); };
  auto map_summary = [&](const Tensor& map) {
    const Tensor k = ad::reshape(effective_support(flat(map)), {1, 1});
    return ad::concat({ad::log(k), ad::scale(k, 1.0 / static_cast<double>(config_.cells()))}, 1);
  };

  switch (kind) {
    case ModuleKind::kFind:
      return attention(to_map(ad::softmax(spatial_scores(p, features, text, nullptr), 1)));
    case ModuleKind::kFilter: {
      const Tensor mask = ad::softmax(spatial_scores(p, features, text, nullptr), 1);
      const Tensor kept = ad::mul(flat(inputs[0]), mask);
      return attention(to_map(normalize(ad::add(kept, Tensor::scalar(kFilterFloor)))));
    }
    case ModuleKind::kRelocate: {
      const Tensor a = pooled(inputs[0]);
      return attention(to_map(ad::softmax(spatial_scores(p, features, text, &a), 1)));
    }
    case ModuleKind::kAnd:
      return attention(normalize(ad::minimum(membership(inputs[0]), membership(inputs[1]))));
    case ModuleKind::kOr:
      return attention(normalize(ad::maximum(membership(inputs[0]), membership(inputs[1]))));
    case ModuleKind::kDescribe: {
      const Tensor hidden = ad::tanh(
          ad::add(ad::matmul(pooled(inputs[0]), p.w_pool), ad::matmul(text, p.w_text)));
      return prediction(ad::matmul(hidden, p.w_out));
    }
    case ModuleKind::kCompare: {
      const Tensor pair = ad::concat({pooled(inputs[0]), pooled(inputs[1])}, 1);
      const Tensor hidden =
          ad::tanh(ad::add(ad::matmul(pair, p.w_pair), ad::matmul(text, p.w_text)));
      return prediction(ad::matmul(hidden, p.w_out));
    }
    case ModuleKind::kExist:
    case ModuleKind::kIsPresent:
    case ModuleKind::kCount:
      return prediction(ad::add(ad::matmul(map_summary(inputs[0]), p.w_map), p.bias));
    case ModuleKind::kGreaterThan:
    case ModuleKind::kLessThan:
    case ModuleKind::kEqualTo: {
      const Tensor pair = ad::concat({map_summary(inputs[0]), map_summary(inputs[1])}, 1);
      const Tensor hidden = ad::tanh(ad::add(ad::matmul(pair, p.w_pair), p.bias_hidden));
      return prediction(ad::matmul(hidden, p.w_out));
    }
  }
  throw ModuleError("unknown module kind");
}

ExecutionResult ModuleNetwork::execute(const layout::SyntaxTree& tree,
                                       std::span<const Tensor> text_vectors,
                                       const Tensor& features) const {
  layout::check_tree(tree);
  ExecutionResult result;
  std::size_t next_text = 0;
  std::vector<int> path;
  std::function<Tensor(const layout::SyntaxNode&)> visit = [&](const layout::SyntaxNode& node) {
    std::vector<Tensor> inputs;
    for (std::size_t i = 0; i < node.children.size(); ++i) {
      path.push_back(static_cast<int>(i));
      inputs.push_back(visit(node.children[i]));
      path.pop_back();
    }
    if (next_text >= text_vectors.size()) {
      throw ModuleError("missing text vector for node " + path_str(path));
    }
    const Tensor& text = text_vectors[next_text++];
    ModuleOutput out;
    try {
      out = apply(node.token.kind, inputs, text, features);
    } catch (const std::exception& e) {
      throw ModuleError("at node " + path_str(path) + " (" +
                        std::string(layout::kind_name(node.token.kind)) + "): " + e.what());
    }
    result.trace.push_back(NodeTrace{path, node.token.kind, out.value});
    return out.value;
  };
  result.logits = visit(tree.root);
  if (next_text != text_vectors.size()) {
    throw ModuleError("got " + std::to_string(text_vectors.size()) + " text vectors for " +
                      std::to_string(next_text) + " nodes");
  }
  return result;
}

}  // namespace dmn::nn
