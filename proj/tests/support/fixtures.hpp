#ifndef DMN_TESTS_FIXTURES_HPP_
#define DMN_TESTS_FIXTURES_HPP_

#include "dmn/dataset.hpp"
#include "dmn/model.hpp"
#include "dmn/trainer.hpp"

namespace dmn::testing {

// Narrow widths so full training steps run in milliseconds.
inline ModelConfig tiny_model_config(std::size_t max_len = layout::kDefaultMaxLen) {
  ModelConfig m;
  m.policy.word_dim = 12;
  m.policy.token_dim = 8;
  m.policy.hidden_dim = 24;
  m.policy.attention_dim = 12;
  m.policy.max_len = max_len;
  m.module_hidden_dim = 16;
  return m;
}

inline data::Dataset small_dataset(int train, int val, std::uint64_t seed = 4) {
  data::DatasetConfig cfg;
  cfg.train_questions = train;
  cfg.val_questions = val;
  cfg.test_questions = 0;
  return data::generate_dataset(cfg, seed);
}

inline policy::WordVocabulary vocab_for(const std::vector<data::Record>& records) {
  std::vector<std::vector<std::string>> corpus;
  for (const auto& r : records) corpus.push_back(r.question.question);
  return policy::WordVocabulary::build(corpus);
}

inline std::vector<const train::Example*> pointers(const std::vector<train::Example>& xs) {
  std::vector<const train::Example*> out;
  for (const auto& x : xs) out.push_back(&x);
  return out;
}

}  // namespace dmn::testing

#endif  // DMN_TESTS_FIXTURES_HPP_
