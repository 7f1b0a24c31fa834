#include "dmn/model.hpp"

#include <sstream>

namespace dmn {
namespace {

std::string join(const std::vector<std::string>& words) {
  std::string s;
  for (std::size_t i = 0; i < words.size(); ++i) {
    if (i) s += ' ';
    s += words[i];
  }
  return s;
}

std::vector<std::string> split(const std::string& s) {
  std::istringstream in(s);
  std::vector<std::string> out;
  std::string w;
  while (in >> w) out.push_back(w);
  return out;
}

std::string token_alphabet() {
  std::vector<std::string> names;
  for (std::size_t i = 0; i < layout::kNumDecoderTokens; ++i) {
    names.emplace_back(layout::token_name(static_cast<int>(i)));
  }
  return join(names);
}

const std::string& meta(const ad::Checkpoint& c, const std::string& key) {
  auto it = c.metadata.find(key);
  if (it == c.metadata.end()) throw ad::CheckpointError("checkpoint lacks metadata '" + key + "'");
  return it->second;
}

std::size_t meta_size(const ad::Checkpoint& c, const std::string& key) {
  return static_cast<std::size_t>(std::stoull(meta(c, key)));
}

}  // namespace

std::string_view ablation_name(Ablation a) {
  switch (a) {
    case Ablation::kFull:
      return "full";
    case Ablation::kBaselineI:
      return "baseline1";
    case Ablation::kBaselineII:
      return "baseline2";
  }
  return "full";
}

Ablation parse_ablation(std::string_view s) {
  if (s == "full") return Ablation::kFull;
  if (s == "baseline1" || s == "baseline_I" || s == "baseline_i") return Ablation::kBaselineI;
  if (s == "baseline2" || s == "baseline_II" || s == "baseline_ii") return Ablation::kBaselineII;
  throw std::invalid_argument("unknown ablation '" + std::string(s) + "'");
}

DmnModel::DmnModel(const ModelConfig& config, policy::WordVocabulary vocab, std::uint64_t seed)
    : config_(config) {
  Rng rng(seed);
  policy_ = std::make_unique<policy::LayoutPolicy>(config.policy, std::move(vocab), params_, rng);
  nn::ModuleConfig mc;
  mc.grid_size = config.grid_size;
  mc.text_dim = config.policy.hidden_dim;
  mc.hidden_dim = config.module_hidden_dim;
  mc.answer_dim = scene::answer_vocab_size();
  modules_ = std::make_unique<nn::ModuleNetwork>(mc, params_, rng);
}

ad::Checkpoint DmnModel::to_checkpoint(std::map<std::string, std::string> extra) const {
  const auto& pc = config_.policy;
  extra["model.word_dim"] = std::to_string(pc.word_dim);
  extra["model.token_dim"] = std::to_string(pc.token_dim);
  extra["model.hidden_dim"] = std::to_string(pc.hidden_dim);
  extra["model.attention_dim"] = std::to_string(pc.attention_dim);
  extra["model.max_len"] = std::to_string(pc.max_len);
  extra["model.use_attention"] = pc.use_attention ? "1" : "0";
  extra["model.module_hidden_dim"] = std::to_string(config_.module_hidden_dim);
  extra["model.grid_size"] = std::to_string(config_.grid_size);
  extra["vocab.words"] = join(policy_->vocabulary().words());
  extra["vocab.answers"] = join(scene::answer_vocabulary());
  extra["vocab.tokens"] = token_alphabet();
  return ad::snapshot(params_, std::move(extra));
}

std::unique_ptr<DmnModel> DmnModel::from_checkpoint(const ad::Checkpoint& ckpt) {
  if (meta(ckpt, "vocab.answers") != join(scene::answer_vocabulary())) {
    throw ad::CheckpointError("checkpoint answer vocabulary does not match this build");
  }
  if (meta(ckpt, "vocab.tokens") != token_alphabet()) {
    throw ad::CheckpointError("checkpoint module-token alphabet does not match this build");
  }
  ModelConfig mc;
  mc.policy.word_dim = meta_size(ckpt, "model.word_dim");
  mc.policy.token_dim = meta_size(ckpt, "model.token_dim");
  mc.policy.hidden_dim = meta_size(ckpt, "model.hidden_dim");
  mc.policy.attention_dim = meta_size(ckpt, "model.attention_dim");
  mc.policy.max_len = meta_size(ckpt, "model.max_len");
  mc.policy.use_attention = meta(ckpt, "model.use_attention") == "1";
  mc.module_hidden_dim = meta_size(ckpt, "model.module_hidden_dim");
  mc.grid_size = static_cast<int>(meta_size(ckpt, "model.grid_size"));
  auto vocab = policy::WordVocabulary::from_words(split(meta(ckpt, "vocab.words")));
  auto model = std::make_unique<DmnModel>(mc, std::move(vocab), 0);
  ad::restore(model->params(), ckpt);
  return model;
}

}  // namespace dmn
