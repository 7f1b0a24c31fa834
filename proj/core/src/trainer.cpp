#include "dmn/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <numeric>
#include <sstream>
#include <thread>

#include "dmn/config.hpp"
#include "dmn/ops.hpp"

namespace dmn::train {
namespace {

using ad::Tensor;

int argmax(std::span<const double> v) {
  return static_cast<int>(std::max_element(v.begin(), v.end()) - v.begin());
}

void check_finite(const ad::ParameterStore& params) {
  for (std::size_t i = 0; i < params.size(); ++i) {
    for (double v : params.tensors()[i].data()) {
      if (!std::isfinite(v)) {
        throw TrainingError("non-finite value in parameter " + params.names()[i]);
      }
    }
  }
}

std::vector<const Example*> shuffled(const std::vector<Example>& examples, Rng& rng) {
  std::vector<const Example*> order;
  order.reserve(examples.size());
  for (const Example& e : examples) order.push_back(&e);
  for (std::size_t i = order.size(); i > 1; --i) {
    std::swap(order[i - 1], order[rng.uniform_index(i)]);
  }
  return order;
}

}  // namespace

void TrainConfig::validate() const {
  if (cloning_epochs < 0 || joint_epochs < 0) throw ConfigError("epochs must be >= 0");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (rollouts < 1) throw ConfigError("rollouts (K) must be >= 1");
  if (!(baseline_decay >= 0.0 && baseline_decay < 1.0)) {
    throw ConfigError("baseline_decay must lie in [0, 1)");
  }
  if (!(adam.learning_rate > 0.0)) throw ConfigError("learning_rate must be > 0");
  if (!(joint_learning_rate > 0.0)) throw ConfigError("joint_learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0)) {
    throw ConfigError("Adam betas must lie in [0, 1)");
  }
  if (!(grad_clip > 0.0)) throw ConfigError("grad_clip must be > 0");
  if (eval_beam < 1) throw ConfigError("beam width must be >= 1");
  if (model.policy.max_len < 2 || model.policy.max_len > layout::kDefaultMaxLen) {
    throw ConfigError("max_len must lie in [2, 9]");
  }
}

Tensor answer_loss(const Tensor& logits, int answer) {
  const std::size_t n = logits.numel();
  if (answer < 0 || static_cast<std::size_t>(answer) >= n) {
    throw std::out_of_range("answer index " + std::to_string(answer) +
                            " outside vocabulary of size " + std::to_string(n));
  }
  for (double v : logits.data()) {
    if (!std::isfinite(v)) throw TrainingError("non-finite answer logits");
  }
  const Tensor lp = ad::log_softmax(ad::reshape(logits, {1, n}), 1);
  const auto a = static_cast<std::size_t>(answer);
  return ad::reshape(ad::scale(ad::slice(lp, 1, a, a + 1), -1.0), {1});
}

void RewardBaseline::update(double batch_mean_loss) {
  if (!initialized_) {
    value_ = batch_mean_loss;
    initialized_ = true;
    return;
  }
  value_ = decay_ * value_ + (1.0 - decay_) * batch_mean_loss;
}

std::vector<Example> prepare(std::span<const data::Record> records) {
  std::vector<Example> out;
  out.reserve(records.size());
  for (const data::Record& r : records) {
    Example e;
    e.record = &r;
    e.features = nn::feature_tensor(scene::scene_features(r.scene));
    e.expert_tokens = layout::token_ids(r.question.expert_layout);
    try {
      e.expert_tree = layout::parse_rpn(r.question.expert_layout);
    } catch (const layout::LayoutError& err) {
      throw TrainingError("record " + std::to_string(r.id) + " has an invalid expert layout: " +
                          err.what());
    }
    out.push_back(std::move(e));
  }
  return out;
}

double EvalResult::category(scene::Category c) const {
  const auto i = static_cast<std::size_t>(c);
  return category_total[i] ? static_cast<double>(category_correct[i]) / category_total[i] : 0.0;
}

void EvalResult::merge(const EvalResult& o) {
  total += o.total;
  correct += o.correct;
  layout_matches += o.layout_matches;
  for (std::size_t i = 0; i < scene::kNumCategories; ++i) {
    category_total[i] += o.category_total[i];
    category_correct[i] += o.category_correct[i];
  }
}

Prediction predict(const DmnModel& model, const Example& ex, LayoutSource source,
                   std::size_t beam_width) {
  ad::NoGradGuard no_grad;
  Prediction p;
  const auto& words = ex.record->question.question;
  const policy::EncoderStates enc = model.policy().encode(words);
  if (source == LayoutSource::kExpert) {
    p.layout = model.policy().score(enc, ex.expert_tokens);
  } else {
    p.layout = model.policy().argmax_layout(enc, beam_width);
  }
  p.tokens = p.layout.tokens;
  const layout::SyntaxTree tree = source == LayoutSource::kExpert
                                      ? ex.expert_tree
                                      : layout::parse_rpn(layout::program_from_ids(p.tokens));
  p.execution = model.modules().execute(tree, p.layout.contexts, ex.features);
  p.answer = argmax(p.execution.logits.data());
  return p;
}

EvalResult evaluate(const DmnModel& model, std::span<const Example> examples, LayoutSource source,
                    std::size_t beam_width, std::size_t threads) {
  threads = std::max<std::size_t>(1, std::min(threads, examples.size()));
  std::vector<EvalResult> partial(threads);
  auto work = [&](std::size_t t) {
    for (std::size_t i = t; i < examples.size(); i += threads) {
      const Example& ex = examples[i];
      const Prediction p = predict(model, ex, source, beam_width);
      EvalResult& r = partial[t];
      const auto c = static_cast<std::size_t>(ex.record->question.category);
      const bool ok = p.answer == ex.record->question.answer;
      r.total += 1;
      r.correct += ok ? 1 : 0;
      r.category_total[c] += 1;
      r.category_correct[c] += ok ? 1 : 0;
      r.layout_matches += p.tokens == ex.expert_tokens ? 1 : 0;
    }
  };
  if (threads == 1) {
    work(0);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < threads; ++t) pool.emplace_back(work, t);
    for (auto& th : pool) th.join();
  }
  EvalResult out;
  for (const EvalResult& r : partial) out.merge(r);
  return out;
}

EvalResult evaluate_symbolic(std::span<const data::Record> records) {
  EvalResult r;
  for (const data::Record& rec : records) {
    const auto c = static_cast<std::size_t>(rec.question.category);
    const bool ok = scene::symbolic_execute(rec.question.expert_layout, rec.scene) == rec.question.answer;
    r.total += 1;
    r.correct += ok ? 1 : 0;
    r.category_total[c] += 1;
    r.category_correct[c] += ok ? 1 : 0;
    r.layout_matches += 1;
  }
  return r;
}

Trainer::Trainer(const TrainConfig& config, DmnModel& model)
    : config_(config),
      model_(model),
      adam_(ad::make_adam_state(model.params(), config.adam)),
      baseline_(config.baseline_decay) {
  config_.validate();
}

void Trainer::reset_optimizer(double learning_rate) {
  ad::AdamConfig cfg = config_.adam;
  cfg.learning_rate = learning_rate;
  adam_ = ad::make_adam_state(model_.params(), cfg);
}

void Trainer::apply_update(std::size_t batch_size) {
  (void)batch_size;
  model_.params().clip_grad_norm(config_.grad_clip);
  ad::adam_step(model_.params(), adam_);
  check_finite(model_.params());
}

double Trainer::cloning_step(std::span<const Example* const> batch) {
  model_.params().zero_grad();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const Example* ex : batch) {
    const policy::EncoderStates enc = model_.policy().encode(ex->record->question.question);
    const policy::PolicySample teacher = model_.policy().score(enc, ex->expert_tokens);
    const Tensor layout_loss = ad::scale(teacher.total_log_prob, -1.0);
    const nn::ExecutionResult exec =
        model_.modules().execute(ex->expert_tree, teacher.contexts, ex->features);
    Tensor loss = ad::add(layout_loss, answer_loss(exec.logits, ex->record->question.answer));
    total += loss.item();
    Tensor scaled = ad::scale(loss, inv_b);
    ad::backward(scaled);
  }
  apply_update(batch.size());
  return total * inv_b;
}

double Trainer::expert_answer_step(std::span<const Example* const> batch) {
  model_.params().zero_grad();
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  double total = 0.0;
  for (const Example* ex : batch) {
    const policy::EncoderStates enc = model_.policy().encode(ex->record->question.question);
    const policy::PolicySample teacher = model_.policy().score(enc, ex->expert_tokens);
    const nn::ExecutionResult exec =
        model_.modules().execute(ex->expert_tree, teacher.contexts, ex->features);
    Tensor loss = answer_loss(exec.logits, ex->record->question.answer);
    total += loss.item();
    Tensor scaled = ad::scale(loss, inv_b);
    ad::backward(scaled);
  }
  apply_update(batch.size());
  return total * inv_b;
}

double Trainer::reinforce_step(std::span<const Example* const> batch, Rng& rng) {
  model_.params().zero_grad();
  const auto k_rollouts = static_cast<std::size_t>(config_.rollouts);
  const double inv_b = 1.0 / static_cast<double>(batch.size());
  const double inv_k = 1.0 / static_cast<double>(k_rollouts);
  double loss_sum = 0.0;
  std::size_t loss_count = 0;

  // Baseline used for this batch is the one from previous batches; the very
  // first batch seeds it from a no-grad pass over its own samples.
  struct Rollout {
    Tensor loss;
    Tensor log_prob;
  };
  std::vector<std::vector<Rollout>> per_question;
  per_question.reserve(batch.size());
  std::vector<double> observed;
  for (const Example* ex : batch) {
    const policy::EncoderStates enc = model_.policy().encode(ex->record->question.question);
    std::vector<Rollout> rollouts;
    for (std::size_t k = 0; k < k_rollouts; ++k) {
      policy::PolicySample s = model_.policy().sample(enc, rng);
      const layout::SyntaxTree tree = layout::parse_rpn(layout::program_from_ids(s.tokens));
      const nn::ExecutionResult exec = model_.modules().execute(tree, s.contexts, ex->features);
      Rollout r{answer_loss(exec.logits, ex->record->question.answer), s.total_log_prob};
      observed.push_back(r.loss.item());
      rollouts.push_back(std::move(r));
    }
    per_question.push_back(std::move(rollouts));
  }
  const double batch_mean =
      std::accumulate(observed.begin(), observed.end(), 0.0) / static_cast<double>(observed.size());
  if (!baseline_.initialized()) baseline_.update(batch_mean);
  const double b = baseline_.value();

  Tensor surrogate;
  for (const auto& rollouts : per_question) {
    for (const Rollout& r : rollouts) {
      const double coef = r.loss.item() - b;
      const Tensor term = ad::add(r.loss, ad::scale(r.log_prob, coef));
      surrogate = surrogate.defined() ? ad::add(surrogate, term) : term;
      loss_sum += r.loss.item();
      ++loss_count;
    }
  }
  Tensor scaled = ad::scale(surrogate, inv_b * inv_k);
  ad::backward(scaled);
  baseline_.update(batch_mean);
  apply_update(batch.size());
  return loss_sum / static_cast<double>(loss_count);
}

LayoutSource default_eval_source(Ablation a) {
  return a == Ablation::kBaselineII ? LayoutSource::kExpert : LayoutSource::kPredicted;
}

TrainResult train(const TrainConfig& config_in, std::span<const data::Record> train_split,
                  std::span<const data::Record> val_split,
                  const std::function<void(const EpochReport&)>& on_epoch) {
  TrainConfig config = config_in;
  config.model.policy.use_attention = config.ablation != Ablation::kBaselineI;
  config.validate();
  if (train_split.empty() || val_split.empty()) {
    throw ConfigError("training needs non-empty train and val splits");
  }
  std::vector<std::vector<std::string>> corpus;
  for (const data::Record& r : train_split) corpus.push_back(r.question.question);
  if (!train_split.empty()) config.model.grid_size = train_split.front().scene.grid_size;

  auto model = std::make_unique<DmnModel>(config.model, policy::WordVocabulary::build(corpus),
                                          Rng::mix(config.seed, 1));
  const std::vector<Example> train_ex = prepare(train_split);
  const std::vector<Example> val_ex = prepare(val_split);
  Trainer trainer(config, *model);
  const LayoutSource eval_source = default_eval_source(config.ablation);

  TrainResult result;
  result.report.ablation = config.ablation;
  const int total_epochs = config.cloning_epochs + config.joint_epochs;
  for (int epoch = 0; epoch < total_epochs; ++epoch) {
    const auto t0 = std::chrono::steady_clock::now();
    const bool cloning = epoch < config.cloning_epochs;
    if (epoch == config.cloning_epochs && config.ablation != Ablation::kBaselineII) {
      trainer.reset_optimizer(config.joint_learning_rate);
    }
    Rng rng(Rng::mix(config.seed, 1000 + static_cast<std::uint64_t>(epoch)));
    const std::vector<const Example*> order = shuffled(train_ex, rng);
    double loss_sum = 0.0;
    int batches = 0;
    for (std::size_t start = 0; start < order.size();
         start += static_cast<std::size_t>(config.batch_size)) {
      const std::size_t end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
      const std::span<const Example* const> batch(order.data() + start, end - start);
      double loss = 0.0;
      if (config.ablation == Ablation::kBaselineII) {
        loss = trainer.expert_answer_step(batch);
      } else if (cloning) {
        loss = trainer.cloning_step(batch);
      } else {
        loss = trainer.reinforce_step(batch, rng);
      }
      loss_sum += loss;
      ++batches;
    }
    EpochReport er;
    er.epoch = epoch;
    er.phase = config.ablation == Ablation::kBaselineII ? "expert" : (cloning ? "cloning" : "joint");
    er.train_loss = loss_sum / std::max(1, batches);
    er.val = evaluate(*model, val_ex, eval_source, config.eval_beam, config.eval_threads);
    er.layout_accuracy = er.val.layout_exact_match();
    er.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (er.val.overall() > result.report.best_val_accuracy) {
      result.report.best_val_accuracy = er.val.overall();
      result.report.best_epoch = epoch;
      result.best_checkpoint = model->to_checkpoint({{"train.ablation", std::string(ablation_name(config.ablation))},
                                                     {"train.seed", std::to_string(config.seed)},
                                                     {"train.best_epoch", std::to_string(epoch)}});
    }
    if (on_epoch) on_epoch(er);
    result.report.epochs.push_back(er);
  }
  if (total_epochs == 0) {
    result.best_checkpoint = model->to_checkpoint({{"train.ablation", std::string(ablation_name(config.ablation))},
                                                   {"train.seed", std::to_string(config.seed)}});
  }
  result.best_model = DmnModel::from_checkpoint(result.best_checkpoint);
  return result;
}

std::string eval_csv_header() { return "overall,exist,count,yes_no,compare,layout_exact_match"; }

std::string eval_csv_row(const EvalResult& r) {
  std::ostringstream os;
  os << std::setprecision(6) << std::fixed << r.overall() << ',' << r.category(scene::Category::kExist)
     << ',' << r.category(scene::Category::kCount) << ',' << r.category(scene::Category::kYesNo) << ','
     << r.category(scene::Category::kCompare) << ',' << r.layout_exact_match();
  return os.str();
}

std::string report_csv(const TrainReport& report) {
  std::ostringstream os;
  os << "epoch,phase,train_loss,layout_accuracy,val_overall,val_exist,val_count,val_yes_no,"
        "val_compare,seconds\n";
  os << std::setprecision(6) << std::fixed;
  for (const EpochReport& e : report.epochs) {
    os << e.epoch << ',' << e.phase << ',' << e.train_loss << ',' << e.layout_accuracy << ','
       << e.val.overall() << ',' << e.val.category(scene::Category::kExist) << ','
       << e.val.category(scene::Category::kCount) << ',' << e.val.category(scene::Category::kYesNo)
       << ',' << e.val.category(scene::Category::kCompare) << ',' << e.seconds << '\n';
  }
  return os.str();
}

}  // namespace dmn::train
