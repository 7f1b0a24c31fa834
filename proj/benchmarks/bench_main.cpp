#include <benchmark/benchmark.h>

#include "dmn/dataset.hpp"
#include "dmn/layout.hpp"
#include "dmn/ops.hpp"
#include "dmn/trainer.hpp"

namespace ad = dmn::ad;
namespace data = dmn::data;
namespace layout = dmn::layout;
namespace train = dmn::train;

namespace {

data::Dataset corpus(int train_questions) {
  data::DatasetConfig cfg;
  cfg.train_questions = train_questions;
  cfg.val_questions = 0;
  cfg.test_questions = 0;
  return data::generate_dataset(cfg, 5);
}

std::unique_ptr<dmn::DmnModel> default_model(const data::Dataset& ds) {
  std::vector<std::vector<std::string>> words;
  for (const auto& r : ds.train) words.push_back(r.question.question);
  return std::make_unique<dmn::DmnModel>(dmn::ModelConfig{}, dmn::policy::WordVocabulary::build(words), 3);
}

void BM_MatmulBackward(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  dmn::Rng rng(1);
  std::vector<double> va(n * n), vb(n * n);
  for (double& x : va) x = rng.uniform(-1, 1);
  for (double& x : vb) x = rng.uniform(-1, 1);
  ad::Tensor a = ad::Tensor::parameter({n, n}, va);
  ad::Tensor b = ad::Tensor::parameter({n, n}, vb);
  for (auto _ : state) {
    ad::Tensor loss = ad::sum(ad::tanh(ad::matmul(a, b)));
    ad::backward(loss);
    benchmark::DoNotOptimize(a.grad().data());
  }
}
BENCHMARK(BM_MatmulBackward)->Arg(32)->Arg(128);

void BM_ValidateBruteForce(benchmark::State& state) {
  const auto layouts = layout::enumerate_valid(static_cast<std::size_t>(state.range(0)));
  for (auto _ : state) {
    std::size_t ok = 0;
    for (const auto& seq : layouts) ok += layout::validate(seq).valid;
    benchmark::DoNotOptimize(ok);
  }
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * layouts.size()));
}
BENCHMARK(BM_ValidateBruteForce)->Arg(5)->Arg(7);

void BM_SymbolicExecute(benchmark::State& state) {
  const auto ds = corpus(400);
  for (auto _ : state) benchmark::DoNotOptimize(train::evaluate_symbolic(ds.train).correct);
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * ds.train.size()));
}
BENCHMARK(BM_SymbolicExecute);

void BM_PolicySample(benchmark::State& state) {
  const auto ds = corpus(50);
  const auto model = default_model(ds);
  dmn::Rng rng(2);
  ad::NoGradGuard guard;
  std::size_t i = 0;
  for (auto _ : state) {
    const auto& q = ds.train[i++ % ds.train.size()].question.question;
    benchmark::DoNotOptimize(model->policy().sample(q, rng).tokens.size());
  }
}
BENCHMARK(BM_PolicySample);

void BM_PredictExpert(benchmark::State& state) {
  const auto ds = corpus(50);
  const auto model = default_model(ds);
  const auto examples = train::prepare(ds.train);
  std::size_t i = 0;
  for (auto _ : state) {
    const auto p = train::predict(*model, examples[i++ % examples.size()], train::LayoutSource::kExpert, 1);
    benchmark::DoNotOptimize(p.answer);
  }
}
BENCHMARK(BM_PredictExpert);

void BM_TrainStep(benchmark::State& state) {
  const auto ds = corpus(64);
  const auto model = default_model(ds);
  const auto examples = train::prepare(ds.train);
  std::vector<const train::Example*> batch;
  for (std::size_t i = 0; i < 16; ++i) batch.push_back(&examples[i]);
  train::TrainConfig cfg;
  train::Trainer trainer(cfg, *model);
  dmn::Rng rng(4);
  const bool reinforce = state.range(0) == 1;
  for (auto _ : state) {
    benchmark::DoNotOptimize(reinforce ? trainer.reinforce_step(batch, rng) : trainer.cloning_step(batch));
  }
  state.SetLabel(reinforce ? "reinforce" : "cloning");
  state.SetItemsProcessed(static_cast<std::int64_t>(state.iterations() * batch.size()));
}
BENCHMARK(BM_TrainStep)->Arg(0)->Arg(1)->Unit(benchmark::kMillisecond);

}  // namespace

BENCHMARK_MAIN();
