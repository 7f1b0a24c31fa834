#include "dmn/policy.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>

#include "dmn/ops.hpp"

namespace dmn::policy {
namespace {

constexpr int kStartToken = static_cast<int>(layout::kNumDecoderTokens);
constexpr double kNegInf = -std::numeric_limits<double>::infinity();

Tensor mask_tensor(const layout::TokenMask& mask) {
  std::vector<double> v(layout::kNumDecoderTokens);
  for (std::size_t i = 0; i < v.size(); ++i) v[i] = mask[i] ? 0.0 : kNegInf;
  return Tensor::from({1, layout::kNumDecoderTokens}, std::move(v));
}

Tensor row(const Tensor& table, int index) {
  const auto i = static_cast<std::size_t>(index);
  return ad::slice(table, 0, i, i + 1);
}

}  // namespace

WordVocabulary::WordVocabulary() { add(kUnkWord); }

WordVocabulary WordVocabulary::build(const std::vector<std::vector<std::string>>& corpus) {
  WordVocabulary v;
  for (const auto& sentence : corpus) {
    for (const auto& w : sentence) v.add(w);
  }
  return v;
}

WordVocabulary WordVocabulary::from_words(const std::vector<std::string>& words) {
  if (words.empty() || words.front() != kUnkWord) {
    throw PolicyError("word vocabulary must start with " + std::string(kUnkWord));
  }
  WordVocabulary v;
  for (std::size_t i = 1; i < words.size(); ++i) {
    if (v.contains(words[i])) throw PolicyError("duplicate vocabulary word " + words[i]);
    v.add(words[i]);
  }
  return v;
}

void WordVocabulary::add(const std::string& word) {
  if (index_.contains(word)) return;
  index_[word] = static_cast<int>(words_.size());
  words_.push_back(word);
}

int WordVocabulary::index(const std::string& word) const {
  auto it = index_.find(word);
  return it == index_.end() ? kUnk : it->second;
}

LayoutPolicy::LayoutPolicy(const PolicyConfig& config, WordVocabulary vocab,
                           ad::ParameterStore& store, Rng& rng)
    : config_(config), vocab_(std::move(vocab)) {
  const std::size_t d = config.hidden_dim;
  const std::size_t n_tok = layout::kNumDecoderTokens;
  word_embed_ = store.add_weight("policy.word_embed", vocab_.size(), config.word_dim, rng);
  enc_w_ = store.add_weight("policy.encoder.w", config.word_dim + d, 4 * d, rng);
  enc_b_ = store.add_zeros("policy.encoder.b", {4 * d});
  token_embed_ = store.add_weight("policy.token_embed", n_tok + 1, config.token_dim, rng);
  dec_w_ = store.add_weight("policy.decoder.w", config.token_dim + d, 4 * d, rng);
  dec_b_ = store.add_zeros("policy.decoder.b", {4 * d});
  att_wh_ = store.add_weight("policy.attention.w_h", d, config.attention_dim, rng);
  att_ws_ = store.add_weight("policy.attention.w_s", d, config.attention_dim, rng);
  att_v_ = store.add_weight("policy.attention.v", config.attention_dim, 1, rng);
  out_w_ = store.add_weight("policy.out.w", 2 * d, n_tok, rng);
  out_b_ = store.add_zeros("policy.out.b", {n_tok});
}

Tensor LayoutPolicy::lstm_cell(const Tensor& x, const Tensor& h, const Tensor& c, const Tensor& w,
                               const Tensor& b, Tensor& c_out) const {
  const std::size_t d = config_.hidden_dim;
  const Tensor z = ad::add(ad::matmul(ad::concat({x, h}, 1), w), b);
  const Tensor i = ad::sigmoid(ad::slice(z, 1, 0, d));
  const Tensor f = ad::sigmoid(ad::slice(z, 1, d, 2 * d));
  const Tensor g = ad::tanh(ad::slice(z, 1, 2 * d, 3 * d));
  const Tensor o = ad::sigmoid(ad::slice(z, 1, 3 * d, 4 * d));
  c_out = ad::add(ad::mul(f, c), ad::mul(i, g));
  return ad::mul(o, ad::tanh(c_out));
}

EncoderStates LayoutPolicy::encode(std::span<const std::string> words) const {
  if (words.empty()) throw PolicyError("cannot encode an empty question");
  const std::size_t d = config_.hidden_dim;
  Tensor h = Tensor::zeros({1, d});
  Tensor c = Tensor::zeros({1, d});
  std::vector<Tensor> states;
  states.reserve(words.size());
  for (const std::string& w : words) {
    Tensor c_next;
    h = lstm_cell(row(word_embed_, vocab_.index(w)), h, c, enc_w_, enc_b_, c_next);
    c = c_next;
    states.push_back(h);
  }
  EncoderStates enc;
  enc.states = ad::concat(states, 0);
  enc.keys = ad::matmul(enc.states, att_wh_);
  enc.final_h = h;
  enc.final_c = c;
  return enc;
}

DecoderState LayoutPolicy::initial_state(const EncoderStates& enc) const {
  DecoderState s;
  s.h = enc.final_h;
  s.c = enc.final_c;
  s.prev_token = kStartToken;
  return s;
}

DecoderStep LayoutPolicy::decode_step(const DecoderState& prev, const EncoderStates& enc,
                                      const layout::TokenMask& mask) const {
  if (std::none_of(mask.begin(), mask.end(), [](bool b) { return b; })) {
    throw PolicyError("decoder step with every token masked");
  }
  DecoderStep step;
  step.next = prev;
  Tensor c_next;
  step.next.h = lstm_cell(row(token_embed_, prev.prev_token), prev.h, prev.c, dec_w_, dec_b_, c_next);
  step.next.c = c_next;
  if (config_.use_attention) {
    const Tensor energy =
        ad::matmul(ad::tanh(ad::add(enc.keys, ad::matmul(step.next.h, att_ws_))), att_v_);
    step.word_attention = ad::softmax(ad::reshape(energy, {1, enc.length()}), 1);
    step.context = ad::matmul(step.word_attention, enc.states);
  } else {
    step.context = enc.final_h;
  }
  const Tensor logits =
      ad::add(ad::matmul(ad::concat({step.next.h, step.context}, 1), out_w_), out_b_);
  step.log_probs = ad::log_softmax(ad::add(logits, mask_tensor(mask)), 1);
  return step;
}

namespace {

// Runs the decoder, asking `choose` for each token given the step's
// log-probabilities. The END step after a Prediction token has probability 1
// under the mask, so it is recorded without running the decoder.
using Chooser = std::function<int(std::size_t step, std::span<const double> log_probs)>;

PolicySample rollout(const LayoutPolicy& policy, const EncoderStates& enc, const Chooser& choose) {
  PolicySample s;
  DecoderState state = policy.initial_state(enc);
  Tensor total;
  for (std::size_t t = 0;; ++t) {
    if (state.stack.finished) {
      s.step_log_probs.push_back(0.0);
      break;
    }
    const layout::TokenMask mask =
        layout::legal_next_tokens(state.stack, state.emitted, policy.config().max_len);
    DecoderStep step = policy.decode_step(state, enc, mask);
    const int tok = choose(t, step.log_probs.data());
    if (tok < 0 || tok >= static_cast<int>(layout::kNumModuleKinds) ||
        !mask[static_cast<std::size_t>(tok)]) {
      throw PolicyError("token " + std::string(layout::token_name(tok)) +
                        " is not legal at step " + std::to_string(t));
    }
    const auto ut = static_cast<std::size_t>(tok);
    const Tensor lp = ad::slice(step.log_probs, 1, ut, ut + 1);
    total = total.defined() ? ad::add(total, lp) : lp;
    s.tokens.push_back(tok);
    s.step_log_probs.push_back(lp.item());
    s.contexts.push_back(step.context);
    if (step.word_attention.defined()) {
      s.word_attention.emplace_back(step.word_attention.data().begin(),
                                    step.word_attention.data().end());
    }
    state = step.next;
    state.stack = layout::advance(state.stack, tok);
    state.emitted += 1;
    state.prev_token = tok;
  }
  s.total_log_prob = ad::reshape(total, {1});
  return s;
}

int argmax_token(std::span<const double> lp) {
  return static_cast<int>(std::max_element(lp.begin(), lp.end()) - lp.begin());
}

}  // namespace

PolicySample LayoutPolicy::sample(const EncoderStates& enc, Rng& rng, double temperature) const {
  return rollout(*this, enc, [&](std::size_t, std::span<const double> lp) {
    if (temperature <= 0.0) return argmax_token(lp);
    const double top = *std::max_element(lp.begin(), lp.end());
    std::vector<double> w(lp.size());
    for (std::size_t i = 0; i < lp.size(); ++i) w[i] = std::exp((lp[i] - top) / temperature);
    return static_cast<int>(rng.categorical(w));
  });
}

PolicySample LayoutPolicy::sample(std::span<const std::string> words, Rng& rng,
                                  double temperature) const {
  return sample(encode(words), rng, temperature);
}

PolicySample LayoutPolicy::score(const EncoderStates& enc, std::span<const int> tokens) const {
  PolicySample s = rollout(*this, enc, [&](std::size_t t, std::span<const double>) {
    if (t >= tokens.size()) throw PolicyError("layout ends without a Prediction token");
    return tokens[t];
  });
  if (s.tokens.size() != tokens.size()) {
    throw PolicyError("tokens after the final Prediction token");
  }
  return s;
}

PolicySample LayoutPolicy::layout_logprob(std::span<const std::string> words,
                                          std::span<const int> tokens) const {
  return score(encode(words), tokens);
}

PolicySample LayoutPolicy::argmax_layout(const EncoderStates& enc, std::size_t beam_width) const {
  if (beam_width < 1) throw PolicyError("beam width must be >= 1");
  struct Beam {
    DecoderState state;
    std::vector<int> tokens;
    double log_prob = 0.0;
  };
  std::vector<Beam> beams{Beam{initial_state(enc), {}, 0.0}};
  {
    ad::NoGradGuard no_grad;
    while (!std::all_of(beams.begin(), beams.end(),
                        [](const Beam& b) { return b.state.stack.finished; })) {
      std::vector<Beam> candidates;
      for (const Beam& b : beams) {
        if (b.state.stack.finished) {
          candidates.push_back(b);
          continue;
        }
        const layout::TokenMask mask =
            layout::legal_next_tokens(b.state.stack, b.state.emitted, config_.max_len);
        const DecoderStep step = decode_step(b.state, enc, mask);
        const auto lp = step.log_probs.data();
        for (std::size_t k = 0; k < layout::kNumModuleKinds; ++k) {
          if (!mask[k]) continue;
          Beam nb{step.next, b.tokens, b.log_prob + lp[k]};
          nb.tokens.push_back(static_cast<int>(k));
          nb.state.stack = layout::advance(b.state.stack, static_cast<int>(k));
          nb.state.emitted = b.state.emitted + 1;
          nb.state.prev_token = static_cast<int>(k);
          candidates.push_back(std::move(nb));
        }
      }
      std::stable_sort(candidates.begin(), candidates.end(), [](const Beam& a, const Beam& b) {
        if (a.log_prob != b.log_prob) return a.log_prob > b.log_prob;
        return a.tokens < b.tokens;
      });
      if (candidates.size() > beam_width) candidates.resize(beam_width);
      beams = std::move(candidates);
    }
  }
  return score(enc, beams.front().tokens);
}

PolicySample LayoutPolicy::argmax_layout(std::span<const std::string> words,
                                         std::size_t beam_width) const {
  return argmax_layout(encode(words), beam_width);
}

}  // namespace dmn::policy
