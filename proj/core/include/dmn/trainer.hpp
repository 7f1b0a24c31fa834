#ifndef DMN_TRAINER_HPP_
#define DMN_TRAINER_HPP_

#include <array>
#include <functional>
#include <memory>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "dmn/adam.hpp"
#include "dmn/dataset.hpp"
#include "dmn/model.hpp"

namespace dmn::train {

class TrainingError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TrainConfig {
  int cloning_epochs = 30;
  int joint_epochs = 3;
  int batch_size = 16;
  ad::AdamConfig adam{.learning_rate = 5e-3};
  // The joint phase restarts Adam with this learning rate.
  double joint_learning_rate = 2e-4;
  int rollouts = 4;
  double baseline_decay = 0.9;
  double grad_clip = 5.0;
  Ablation ablation = Ablation::kFull;
  std::uint64_t seed = 1;
  ModelConfig model;
  std::size_t eval_beam = 1;
  std::size_t eval_threads = 1;

  // Throws ConfigError on out-of-range values.
  void validate() const;
};

// Softmax cross-entropy of [1, |answers|] logits against an answer index.
ad::Tensor answer_loss(const ad::Tensor& logits, int answer);

// Exponential moving average of observed per-rollout losses.
class RewardBaseline {
 public:
  explicit RewardBaseline(double decay) : decay_(decay) {}
  bool initialized() const { return initialized_; }
  double value() const { return value_; }
  // First call adopts the observation directly.
  void update(double batch_mean_loss);

 private:
  double decay_;
  double value_ = 0.0;
  bool initialized_ = false;
};

// A dataset record with its constant feature tensor and expert token ids.
struct Example {
  const data::Record* record = nullptr;
  ad::Tensor features;
  std::vector<int> expert_tokens;
  layout::SyntaxTree expert_tree;
};

std::vector<Example> prepare(std::span<const data::Record> records);

enum class LayoutSource { kPredicted, kExpert };

struct EvalResult {
  int total = 0;
  int correct = 0;
  std::array<int, scene::kNumCategories> category_total{};
  std::array<int, scene::kNumCategories> category_correct{};
  int layout_matches = 0;

  double overall() const { return total ? static_cast<double>(correct) / total : 0.0; }
  double category(scene::Category c) const;
  double layout_exact_match() const {
    return total ? static_cast<double>(layout_matches) / total : 0.0;
  }
  void merge(const EvalResult& other);
};

struct Prediction {
  std::vector<int> tokens;
  int answer = 0;
  nn::ExecutionResult execution;
  policy::PolicySample layout;
};

// Greedy/beam (or expert) layout, module execution, argmax answer. Requires
// gradients to be disabled by the caller or runs under its own guard.
Prediction predict(const DmnModel& model, const Example& ex, LayoutSource source,
                   std::size_t beam_width);

EvalResult evaluate(const DmnModel& model, std::span<const Example> examples, LayoutSource source,
                    std::size_t beam_width = 1, std::size_t threads = 1);

// Ground-truth ceiling: symbolic execution of every expert layout.
EvalResult evaluate_symbolic(std::span<const data::Record> records);

class Trainer {
 public:
  Trainer(const TrainConfig& config, DmnModel& model);

  // Teacher-forced layout cross-entropy plus answer loss through the expert
  // layout; one Adam step. Returns the mean per-question loss.
  double cloning_step(std::span<const Example* const> batch);
  // Answer loss through expert layouts only; the token head gets no signal.
  double expert_answer_step(std::span<const Example* const> batch);
  // K sampled layouts per question; pathwise plus baseline-subtracted
  // score-function gradient; one Adam step. Returns the mean sampled loss.
  double reinforce_step(std::span<const Example* const> batch, Rng& rng);

  // Fresh moment estimates with a new learning rate.
  void reset_optimizer(double learning_rate);

  const RewardBaseline& baseline() const { return baseline_; }
  const ad::AdamState& adam_state() const { return adam_; }

 private:
  void apply_update(std::size_t batch_size);

  TrainConfig config_;
  DmnModel& model_;
  ad::AdamState adam_;
  RewardBaseline baseline_;
};

struct EpochReport {
  int epoch = 0;
  std::string phase;
  double train_loss = 0.0;
  double layout_accuracy = 0.0;
  EvalResult val;
  double seconds = 0.0;
};

struct TrainReport {
  Ablation ablation = Ablation::kFull;
  std::vector<EpochReport> epochs;
  int best_epoch = -1;
  double best_val_accuracy = -1.0;
};

struct TrainResult {
  TrainReport report;
  ad::Checkpoint best_checkpoint;
  std::unique_ptr<DmnModel> best_model;
};

LayoutSource default_eval_source(Ablation a);

// Cloning phase then joint phase; keeps the checkpoint with the best
// validation accuracy. Deterministic given config.seed.
// `on_epoch`, when set, is called after every epoch's validation pass.
TrainResult train(const TrainConfig& config, std::span<const data::Record> train_split,
                  std::span<const data::Record> val_split,
                  const std::function<void(const EpochReport&)>& on_epoch = {});

std::string report_csv(const TrainReport& report);
std::string eval_csv_header();
std::string eval_csv_row(const EvalResult& r);

}  // namespace dmn::train

#endif  // DMN_TRAINER_HPP_
