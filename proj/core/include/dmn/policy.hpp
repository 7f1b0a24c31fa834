#ifndef DMN_POLICY_HPP_
#define DMN_POLICY_HPP_

#include <map>
#include <span>
#include <string>
#include <vector>

#include "dmn/layout.hpp"
#include "dmn/params.hpp"
#include "dmn/rng.hpp"

// Question encoder and layout decoder producing P(layout | question).
namespace dmn::policy {

using ad::Tensor;

class WordVocabulary {
 public:
  static constexpr int kUnk = 0;
  static constexpr const char* kUnkWord = "<unk>";

  WordVocabulary();
  // Index order: UNK, then words in order of first appearance.
  static WordVocabulary build(const std::vector<std::vector<std::string>>& corpus);
  static WordVocabulary from_words(const std::vector<std::string>& words);

  int index(const std::string& word) const;
  bool contains(const std::string& word) const { return index_.contains(word); }
  std::size_t size() const { return words_.size(); }
  const std::vector<std::string>& words() const { return words_; }

 private:
  void add(const std::string& word);
  std::vector<std::string> words_;
  std::map<std::string, int> index_;
};

struct PolicyConfig {
  std::size_t word_dim = 64;
  std::size_t token_dim = 32;
  // Encoder and decoder LSTM width; also the text-vector width.
  std::size_t hidden_dim = 128;
  std::size_t attention_dim = 64;
  std::size_t max_len = layout::kDefaultMaxLen;
  // false: the decoder sees the encoder's final state instead of an
  // attention context (the no-attention ablation).
  bool use_attention = true;
};

struct EncoderStates {
  Tensor states;       // [n, hidden]
  Tensor keys;         // [n, attention] precomputed W_h h_i
  Tensor final_h;      // [1, hidden]
  Tensor final_c;      // [1, hidden]
  std::size_t length() const { return states.dim(0); }
};

struct DecoderState {
  Tensor h;
  Tensor c;
  layout::StackState stack;
  std::size_t emitted = 0;
  int prev_token = -1;
};

struct DecoderStep {
  DecoderState next;     // state after the LSTM update (stack not yet advanced)
  Tensor word_attention; // [1, n]
  Tensor context;        // [1, hidden]
  Tensor log_probs;      // [1, 14]; illegal tokens are -inf
};

struct PolicySample {
  // Module tokens; the END that follows is implied.
  std::vector<int> tokens;
  // One entry per decoder step including END (whose log-prob is 0).
  std::vector<double> step_log_probs;
  // One [1, hidden] text vector per module token.
  std::vector<Tensor> contexts;
  std::vector<std::vector<double>> word_attention;
  Tensor total_log_prob;  // scalar; on the tape when gradients are enabled

  double log_prob() const { return total_log_prob.item(); }
};

class PolicyError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LayoutPolicy {
 public:
  LayoutPolicy(const PolicyConfig& config, WordVocabulary vocab, ad::ParameterStore& store,
               Rng& rng);

  const PolicyConfig& config() const { return config_; }
  const WordVocabulary& vocabulary() const { return vocab_; }
  std::size_t text_dim() const { return config_.hidden_dim; }

  EncoderStates encode(std::span<const std::string> words) const;

  DecoderState initial_state(const EncoderStates& enc) const;
  DecoderStep decode_step(const DecoderState& prev, const EncoderStates& enc,
                          const layout::TokenMask& mask) const;

  // Ancestral sampling under the legality mask. temperature <= 0 is greedy.
  PolicySample sample(const EncoderStates& enc, Rng& rng, double temperature = 1.0) const;
  PolicySample sample(std::span<const std::string> words, Rng& rng, double temperature = 1.0) const;

  // Masked beam search by total log-prob; ties go to the lower token ids.
  PolicySample argmax_layout(const EncoderStates& enc, std::size_t beam_width) const;
  PolicySample argmax_layout(std::span<const std::string> words, std::size_t beam_width) const;

  // Teacher-forced log P(tokens | question) with per-step contexts. Throws
  // PolicyError if the sequence is not reachable under the mask.
  PolicySample score(const EncoderStates& enc, std::span<const int> tokens) const;
  PolicySample layout_logprob(std::span<const std::string> words, std::span<const int> tokens) const;

 private:
  Tensor lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c, const Tensor& w,
                   const Tensor& b, Tensor& c_out) const;

  PolicyConfig config_;
  WordVocabulary vocab_;
  Tensor word_embed_, enc_w_, enc_b_;
  Tensor token_embed_, dec_w_, dec_b_;
  Tensor att_wh_, att_ws_, att_v_;
  Tensor out_w_, out_b_;
};

}  // namespace dmn::policy

#endif  // DMN_POLICY_HPP_
