// Acceptance run: one PASS/FAIL line per criterion, with the measured value
// next to its threshold. Exit status is nonzero if any criterion fails,
// except those named with --expect-fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <iostream>
#include <map>
#include <set>
#include <string>

#include <CLI11.hpp>

#include "dmn/dataset.hpp"
#include "dmn/layout.hpp"
#include "dmn/trainer.hpp"
#include "support/fixtures.hpp"
#include "support/grad_suites.hpp"
#include "support/layout_oracle.hpp"
#include "support/reinforce_oracle.hpp"

namespace ad = dmn::ad;
namespace data = dmn::data;
namespace layout = dmn::layout;
namespace train = dmn::train;
namespace dt = dmn::testing;
using dmn::Ablation;
using dmn::Rng;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Verdicts {
  std::set<std::string> expected_failures;
  int unexpected = 0;

  void report(const std::string& id, const std::string& name, bool pass, const std::string& detail,
              double secs) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1fs", secs);
    std::cout << (pass ? "PASS" : "FAIL") << " " << id << " " << name << ": " << detail << " (" << buf
              << ")" << std::endl;
    if (!pass && !expected_failures.contains(id)) ++unexpected;
  }
};

std::string fmt(const char* f, double a) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, a);
  return buf;
}

// Criterion 1: validate() against brute force and the RPN round trip.
void layout_oracle(Verdicts& v) {
  const auto t0 = Clock::now();
  const auto bf = dt::brute_force_layouts(5);
  std::size_t round_trip_failures = 0;
  const auto valid7 = layout::enumerate_valid(7);
  for (const auto& seq : valid7) {
    const auto prog = layout::program_from_ids(seq);
    if (layout::token_ids(layout::linearize(layout::parse_rpn(prog))) != seq) ++round_trip_failures;
  }
  const double secs = seconds_since(t0);
  const bool pass = bf.disagreements == 0 && bf.matches_enumeration && round_trip_failures == 0 && secs < 60;
  v.report("1", "layout-oracle", pass,
           std::to_string(bf.sequences) + " sequences, " + std::to_string(bf.disagreements) +
               " disagreements, enumeration " + (bf.matches_enumeration ? "equal" : "differs") + "; " +
               std::to_string(valid7.size()) + " round trips, " + std::to_string(round_trip_failures) +
               " failures",
           secs);
}

// Criterion 2: finite differences for primitives, modules and the policy.
void gradient_suite(Verdicts& v) {
  constexpr int kSeeds = 20;
  constexpr double kTol = 1e-4;
  const auto t0 = Clock::now();
  double worst = 0.0;
  std::string worst_name;
  std::size_t checks = 0;
  auto take = [&](const dt::NamedCheck& c, std::uint64_t seed) {
    ++checks;
    if (c.result.max_rel_error > worst) {
      worst = c.result.max_rel_error;
      worst_name = c.name + " seed " + std::to_string(seed);
    }
  };
  for (std::uint64_t seed = 0; seed < kSeeds; ++seed) {
    for (const auto& c : dt::primitive_grad_suite(seed)) take(c, seed);
    for (const auto& c : dt::module_grad_suite(seed)) take(c, seed);
    take(dt::policy_grad_check(seed), seed);
  }
  const double secs = seconds_since(t0);
  v.report("2", "gradient-suite", worst < kTol && secs < 300,
           std::to_string(checks) + " checks over " + std::to_string(kSeeds) +
               " seeds, worst rel err " + fmt("%.2e", worst) + " (" + worst_name + ") < 1e-4",
           secs);
}

// Criterion 3: rollout validity, attention normalization, total probability.
void normalization_suite(Verdicts& v) {
  constexpr int kRollouts = 10000;
  constexpr double kTol = 1e-6;
  const auto t0 = Clock::now();
  const auto ds = dt::small_dataset(200, 0, 31);
  dmn::DmnModel model(dt::tiny_model_config(), dt::vocab_for(ds.train), 31);
  const auto examples = train::prepare(ds.train);
  Rng rng(2024);
  int invalid = 0;
  double worst = 0.0;
  ad::NoGradGuard guard;
  for (int i = 0; i < kRollouts; ++i) {
    const auto& ex = examples[static_cast<std::size_t>(i) % examples.size()];
    const auto s = model.policy().sample(ex.record->question.question, rng);
    if (!layout::validate(s.tokens).valid) {
      ++invalid;
      continue;
    }
    for (const auto& a : s.word_attention) {
      double total = 0.0;
      for (double x : a) total += x;
      worst = std::max(worst, std::abs(total - 1.0));
    }
    const auto exec = model.modules().execute(layout::parse_rpn(layout::program_from_ids(s.tokens)),
                                              s.contexts, ex.features);
    for (const auto& node : exec.trace) {
      if (layout::signature(node.kind).output != layout::OutputType::kAttention) continue;
      double total = 0.0;
      for (double x : node.output.data()) total += x;
      worst = std::max(worst, std::abs(total - 1.0));
    }
  }
  // With max_len 4 every layout the masked decoder can emit is enumerable;
  // the mask forbids unfinished sequences, so truncation mass is zero.
  dmn::DmnModel small(dt::tiny_model_config(4), dt::vocab_for(ds.train), 32);
  double mass = 0.0;
  const auto enc = small.policy().encode(ds.train.front().question.question);
  for (const auto& seq : layout::enumerate_valid(4)) mass += std::exp(small.policy().score(enc, seq).log_prob());
  const double secs = seconds_since(t0);
  const bool pass = invalid == 0 && worst <= kTol && std::abs(mass - 1.0) <= kTol;
  v.report("3", "normalization", pass,
           std::to_string(kRollouts - invalid) + "/" + std::to_string(kRollouts) +
               " valid rollouts, worst attention sum error " + fmt("%.1e", worst) +
               ", total layout probability " + fmt("%.12f", mass) + " (truncation mass 0)",
           secs);
}

// Criterion 4: Monte-Carlo REINFORCE gradient against exact enumeration.
void reinforce_estimator(Verdicts& v, std::uint64_t rollout_seed) {
  constexpr std::size_t kRollouts = 50000;
  const auto t0 = Clock::now();
  auto toy = dt::make_toy_problem();
  // Per-question expected loss as the baseline: any constant per question
  // leaves the expectation unchanged and this one cuts the variance.
  std::vector<double> baselines;
  for (std::size_t q = 0; q < toy.examples.size(); ++q) baselines.push_back(dt::exact_expected_loss(toy, q));
  const auto exact = dt::exact_score_gradient(toy, 0.0);
  const auto exact_shifted = dt::weighted_score_gradient(toy, toy.prob, baselines);
  Rng rng(rollout_seed);
  const auto mc = dt::sampled_score_gradient(toy, kRollouts, rng, baselines);
  const double rel = dt::vector_relative_error(mc, exact);
  const double shift = dt::max_abs_difference(exact, exact_shifted);
  const double secs = seconds_since(t0);
  v.report("4", "reinforce-estimator", rel < 0.05 && shift < 1e-8,
           std::to_string(kRollouts) + " rollouts per question, MC vs exact rel err " + fmt("%.4f", rel) +
               " < 0.05; baseline shift changes exact gradient by " + fmt("%.1e", shift) + " < 1e-8",
           secs);
}

struct RunOutcome {
  train::TrainResult result;
  double seconds = 0.0;
};

RunOutcome train_run(train::TrainConfig cfg, Ablation ablation, std::uint64_t seed,
                     const data::Dataset& ds, bool verbose) {
  cfg.ablation = ablation;
  cfg.seed = seed;
  const auto t0 = Clock::now();
  RunOutcome r;
  r.result = train::train(cfg, ds.train, ds.val, [&](const train::EpochReport& e) {
    if (verbose) {
      std::cout << "  [" << dmn::ablation_name(ablation) << " seed " << seed << "] epoch " << e.epoch << " "
                << e.phase << " val " << fmt("%.4f", e.val.overall()) << " layout "
                << fmt("%.4f", e.layout_accuracy) << std::endl;
    }
  });
  r.seconds = seconds_since(t0);
  return r;
}

double val_accuracy(const dmn::DmnModel& m, const std::vector<train::Example>& val, train::LayoutSource s,
                    double* layout_match = nullptr) {
  const auto r = train::evaluate(m, val, s);
  if (layout_match) *layout_match = r.layout_exact_match();
  return r.overall();
}

// Criterion 5: default corpus, default budget.
void end_to_end(Verdicts& v, const data::Dataset& ds, const train::TrainConfig& cfg, bool verbose) {
  const auto val = train::prepare(ds.val);
  const auto full = train_run(cfg, Ablation::kFull, 1, ds, verbose);
  double match = 0.0;
  const double predicted = val_accuracy(*full.result.best_model, val, train::LayoutSource::kPredicted, &match);
  const auto expert_run = train_run(cfg, Ablation::kBaselineII, 1, ds, verbose);
  const double expert = val_accuracy(*expert_run.result.best_model, val, train::LayoutSource::kExpert);
  const double minutes = (full.seconds + expert_run.seconds) / 60.0;
  const std::string budget = " (budget " + fmt("%.1f", minutes) + " min of 30)";
  v.report("5a", "expert-layout-accuracy", expert >= 0.90 && minutes <= 30,
           "Baseline II val accuracy " + fmt("%.4f", expert) + " >= 0.90" + budget, expert_run.seconds);
  v.report("5b", "predicted-layout-accuracy", predicted >= 0.70 && minutes <= 30,
           "full model val accuracy " + fmt("%.4f", predicted) + " >= 0.70" + budget, full.seconds);
  v.report("5c", "layout-exact-match", match >= 0.80 && minutes <= 30,
           "full model val layout exact match " + fmt("%.4f", match) + " >= 0.80" + budget, full.seconds);
}

// Criterion 6: full >= Baseline I and >= Baseline II (predicted layouts),
// identical seeds and budgets.
void ablation_ordering(Verdicts& v, const data::Dataset& ds, const train::TrainConfig& cfg, bool verbose) {
  const auto t0 = Clock::now();
  const auto val = train::prepare(ds.val);
  bool pass = true;
  std::string detail;
  for (std::uint64_t seed : {11u, 12u, 13u}) {
    const auto full = train_run(cfg, Ablation::kFull, seed, ds, verbose);
    const auto b1 = train_run(cfg, Ablation::kBaselineI, seed, ds, verbose);
    const auto b2 = train_run(cfg, Ablation::kBaselineII, seed, ds, verbose);
    const double a_full = val_accuracy(*full.result.best_model, val, train::LayoutSource::kPredicted);
    const double a_b1 = val_accuracy(*b1.result.best_model, val, train::LayoutSource::kPredicted);
    const double a_b2 = val_accuracy(*b2.result.best_model, val, train::LayoutSource::kPredicted);
    pass = pass && a_full >= a_b1 && a_full >= a_b2;
    detail += (detail.empty() ? "" : "; ") + std::string("seed ") + std::to_string(seed) + " full " +
              fmt("%.4f", a_full) + " B-I " + fmt("%.4f", a_b1) + " B-II " + fmt("%.4f", a_b2);
  }
  v.report("6", "ablation-ordering", pass, detail, seconds_since(t0));
}

// Criterion 7: symbolic execution of expert layouts on every split.
void oracle_ceiling(Verdicts& v, const data::Dataset& ds) {
  const auto t0 = Clock::now();
  const double tr = train::evaluate_symbolic(ds.train).overall();
  const double va = train::evaluate_symbolic(ds.val).overall();
  const double te = train::evaluate_symbolic(ds.test).overall();
  v.report("7", "oracle-ceiling", tr == 1.0 && va == 1.0 && te == 1.0,
           "symbolic accuracy train " + fmt("%.4f", tr) + " val " + fmt("%.4f", va) + " test " + fmt("%.4f", te),
           seconds_since(t0));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Acceptance run; one PASS/FAIL line per criterion", "dmn_acceptance"};
  std::vector<std::string> expect_fail;
  std::set<std::string> only;
  int ordering_cloning = train::TrainConfig{}.cloning_epochs;
  int ordering_joint = train::TrainConfig{}.joint_epochs;
  bool verbose = false;
  std::uint64_t rollout_seed = 99;
  app.add_option("--expect-fail", expect_fail, "criteria whose FAIL does not fail the run");
  app.add_option("--only", only, "run only these criteria (1..7)");
  app.add_option("--ordering-cloning-epochs", ordering_cloning, "cloning epochs per ablation run")
      ->capture_default_str();
  app.add_option("--ordering-joint-epochs", ordering_joint, "joint epochs per ablation run")
      ->capture_default_str();
  app.add_option("--rollout-seed", rollout_seed, "seed for the Monte-Carlo rollouts")->capture_default_str();
  app.add_flag("--verbose", verbose, "print per-epoch progress of training runs");
  CLI11_PARSE(app, argc, argv);

  Verdicts v;
  v.expected_failures.insert(expect_fail.begin(), expect_fail.end());
  auto want = [&](const char* id) { return only.empty() || only.contains(id); };

  if (want("1")) layout_oracle(v);
  if (want("2")) gradient_suite(v);
  if (want("3")) normalization_suite(v);
  if (want("4")) reinforce_estimator(v, rollout_seed);

  if (want("5") || want("6") || want("7")) {
    const data::Dataset corpus = data::generate_dataset(data::DatasetConfig{}, 1);
    const train::TrainConfig defaults;
    if (want("7")) oracle_ceiling(v, corpus);
    if (want("5")) end_to_end(v, corpus, defaults, verbose);
    if (want("6")) {
      train::TrainConfig budget = defaults;
      budget.cloning_epochs = ordering_cloning;
      budget.joint_epochs = ordering_joint;
      ablation_ordering(v, corpus, budget, verbose);
    }
  }
  if (!v.expected_failures.empty()) {
    std::cout << "expected failures:";
    for (const auto& id : v.expected_failures) std::cout << " " << id;
    std::cout << "\n";
  }
  std::cout << (v.unexpected == 0 ? "acceptance: ok" : "acceptance: " + std::to_string(v.unexpected) + " unexpected failure(s)")
            << std::endl;
  return v.unexpected == 0 ? 0 : 1;
}
