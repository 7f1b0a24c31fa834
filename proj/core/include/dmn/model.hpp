#ifndef DMN_MODEL_HPP_
#define DMN_MODEL_HPP_

#include <filesystem>
#include <memory>
#include <string>

#include "dmn/checkpoint.hpp"
#include "dmn/modules.hpp"
#include "dmn/policy.hpp"

namespace dmn {

enum class Ablation { kFull, kBaselineI, kBaselineII };
std::string_view ablation_name(Ablation a);
// Accepts full, baseline1/baseline_I, baseline2/baseline_II.
Ablation parse_ablation(std::string_view s);

struct ModelConfig {
  policy::PolicyConfig policy;
  std::size_t module_hidden_dim = 64;
  int grid_size = 5;
};

// Layout policy plus module network over one shared parameter store.
class DmnModel {
 public:
  DmnModel(const ModelConfig& config, policy::WordVocabulary vocab, std::uint64_t seed);

  const ModelConfig& config() const { return config_; }
  ad::ParameterStore& params() { return params_; }
  const ad::ParameterStore& params() const { return params_; }
  const policy::LayoutPolicy& policy() const { return *policy_; }
  const nn::ModuleNetwork& modules() const { return *modules_; }

  ad::Checkpoint to_checkpoint(std::map<std::string, std::string> extra = {}) const;
  // Rebuilds the architecture from checkpoint metadata and restores values.
  // Throws ad::CheckpointError when the checkpoint's answer vocabulary or
  // token alphabet differs from this build's.
  static std::unique_ptr<DmnModel> from_checkpoint(const ad::Checkpoint& ckpt);

 private:
  ModelConfig config_;
  ad::ParameterStore params_;
  std::unique_ptr<policy::LayoutPolicy> policy_;
  std::unique_ptr<nn::ModuleNetwork> modules_;
};

}  // namespace dmn

#endif  // DMN_MODEL_HPP_
