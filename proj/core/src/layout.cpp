#include "dmn/layout.hpp"

#include <algorithm>
#include <cctype>
#include <sstream>

namespace dmn::layout {
namespace {

using enum ModuleKind;
using enum OutputType;

constexpr std::array<Signature, kNumModuleKinds> kSignatures = {{
    {0, kAttention, true},    // find
    {2, kPrediction, true},   // compare
    {1, kPrediction, true},   // describe
    {1, kPrediction, false},  // exist
    {2, kPrediction, false},  // equal_to
    {2, kAttention, false},   // and
    {1, kAttention, true},    // filter
    {1, kAttention, true},    // relocate
    {2, kAttention, false},   // or
    {2, kPrediction, false},  // greater_than
    {2, kPrediction, false},  // less_than
    {1, kPrediction, false},  // is_present
    {1, kPrediction, false},  // count
}};

constexpr std::array<std::string_view, kNumDecoderTokens> kNames = {
    "find", "compare", "describe", "exist",   "equal_to",  "and",   "filter",
    "relocate", "or",  "greater_than", "less_than", "is_present", "count", "END"};

// Fewest tokens that turn `depth` pending attention values into one
// prediction.
int min_tokens_to_finish(int depth) { return depth <= 1 ? 1 : depth - 1; }

ValidityReport fail(ValidityReport r, std::size_t index, std::string message) {
  r.valid = false;
  r.error_index = index;
  r.message = std::move(message);
  return r;
}

}  // namespace

const Signature& signature(ModuleKind kind) { return kSignatures[static_cast<std::size_t>(kind)]; }

std::string_view kind_name(ModuleKind kind) { return kNames[static_cast<std::size_t>(kind)]; }

std::string_view token_name(int token) {
  if (token < 0 || token >= static_cast<int>(kNumDecoderTokens)) return "<invalid>";
  return kNames[static_cast<std::size_t>(token)];
}

std::optional<ModuleKind> parse_kind(std::string_view name) {
  for (std::size_t i = 0; i < kNumModuleKinds; ++i) {
    if (kNames[i] == name) return static_cast<ModuleKind>(i);
  }
  return std::nullopt;
}

std::array<ModuleKind, kNumModuleKinds> all_kinds() {
  std::array<ModuleKind, kNumModuleKinds> out{};
  for (std::size_t i = 0; i < kNumModuleKinds; ++i) out[i] = static_cast<ModuleKind>(i);
  return out;
}

ValidityReport validate(std::span<const int> tokens) {
  ValidityReport r;
  if (tokens.empty()) return fail(std::move(r), 0, "empty layout");
  int depth = 0;
  bool finished = false;
  for (std::size_t i = 0; i < tokens.size(); ++i) {
    const int t = tokens[i];
    if (t < 0 || t >= static_cast<int>(kNumModuleKinds)) {
      return fail(std::move(r), i, std::string(token_name(t)) + " is not a module token");
    }
    if (finished) {
      return fail(std::move(r), i, "token after the final Prediction token");
    }
    const Signature& sig = kSignatures[static_cast<std::size_t>(t)];
    if (depth < sig.arity) {
      return fail(std::move(r), i,
                  "stack underflow: " + std::string(token_name(t)) + " needs " +
                      std::to_string(sig.arity) + " attention input(s), stack holds " +
                      std::to_string(depth));
    }
    if (sig.output == kPrediction) {
      if (depth != sig.arity) {
        return fail(std::move(r), i,
                    std::string(token_name(t)) + " leaves " + std::to_string(depth - sig.arity) +
                        " unconsumed attention value(s)");
      }
      finished = true;
    }
    depth = depth - sig.arity + 1;
    r.depths.push_back(depth);
  }
  if (!finished) {
    return fail(std::move(r), tokens.size(),
                "layout ends without a Prediction token (stack depth " + std::to_string(depth) + ")");
  }
  r.valid = true;
  return r;
}

ValidityReport validate(const Program& program) {
  const std::vector<int> ids = token_ids(program);
  return validate(ids);
}

SyntaxTree parse_rpn(const Program& program) {
  const ValidityReport report = validate(program);
  if (!report.valid) {
    throw LayoutError("invalid layout at token " + std::to_string(*report.error_index) + ": " +
                      report.message);
  }
  std::vector<SyntaxNode> stack;
  for (const ModuleToken& tok : program) {
    const auto arity = static_cast<std::size_t>(signature(tok.kind).arity);
    SyntaxNode node{tok, {}};
    // First-pushed operand becomes the first child.
    node.children.assign(std::make_move_iterator(stack.end() - static_cast<std::ptrdiff_t>(arity)),
                         std::make_move_iterator(stack.end()));
    stack.resize(stack.size() - arity);
    stack.push_back(std::move(node));
  }
  return SyntaxTree{std::move(stack.back())};
}

namespace {

void post_order(const SyntaxNode& node, Program& out) {
  for (const SyntaxNode& c : node.children) post_order(c, out);
  out.push_back(node.token);
}

void check_node(const SyntaxNode& node, bool is_root) {
  const Signature& sig = signature(node.token.kind);
  if (node.children.size() != static_cast<std::size_t>(sig.arity)) {
    throw LayoutError(std::string(kind_name(node.token.kind)) + " node has " +
                      std::to_string(node.children.size()) + " children, arity is " +
                      std::to_string(sig.arity));
  }
  if (is_root != (sig.output == kPrediction)) {
    throw LayoutError(is_root ? "root must produce a Prediction"
                              : std::string(kind_name(node.token.kind)) +
                                    " produces a Prediction below the root");
  }
  for (const SyntaxNode& c : node.children) check_node(c, false);
}

}  // namespace

Program linearize(const SyntaxTree& tree) {
  Program out;
  post_order(tree.root, out);
  return out;
}

void check_tree(const SyntaxTree& tree) { check_node(tree.root, true); }

StackState advance(StackState state, int token) {
  if (token == kEndToken) return state;
  const Signature& sig = kSignatures[static_cast<std::size_t>(token)];
  state.depth = state.depth - sig.arity + 1;
  if (sig.output == kPrediction) state.finished = true;
  return state;
}

TokenMask legal_next_tokens(StackState state, std::size_t emitted_len, std::size_t max_len) {
  TokenMask mask{};
  if (state.finished) {
    mask[kEndToken] = true;
    return mask;
  }
  const auto remaining = static_cast<long>(max_len) - static_cast<long>(emitted_len) - 1;
  if (remaining < 0) return mask;
  for (std::size_t k = 0; k < kNumModuleKinds; ++k) {
    const Signature& sig = kSignatures[k];
    if (sig.arity > state.depth) continue;
    if (sig.output == kPrediction) {
      mask[k] = state.depth == sig.arity;
    } else {
      const int next_depth = state.depth - sig.arity + 1;
      mask[k] = min_tokens_to_finish(next_depth) <= remaining;
    }
  }
  return mask;
}

std::vector<std::vector<int>> enumerate_valid(std::size_t max_len) {
  if (max_len > kDefaultMaxLen) {
    throw std::invalid_argument("enumerate_valid supports max_len <= 9");
  }
  using Seqs = std::vector<std::vector<int>>;
  constexpr std::array<ModuleKind, 2> kUnaryAtt = {kFilter, kRelocate};
  constexpr std::array<ModuleKind, 2> kBinaryAtt = {kAnd, kOr};
  constexpr std::array<ModuleKind, 4> kUnaryPred = {kDescribe, kExist, kIsPresent, kCount};
  constexpr std::array<ModuleKind, 4> kBinaryPred = {kCompare, kEqualTo, kGreaterThan, kLessThan};

  // attention[n]: attention-typed trees with exactly n tokens, in post-order.
  std::vector<Seqs> attention(max_len + 1);
  if (max_len >= 1) attention[1].push_back({token_id(kFind)});
  auto extend = [](const std::vector<int>& base, ModuleKind k) {
    std::vector<int> s = base;
    s.push_back(token_id(k));
    return s;
  };
  auto join = [](const std::vector<int>& a, const std::vector<int>& b, ModuleKind k) {
    std::vector<int> s = a;
    s.insert(s.end(), b.begin(), b.end());
    s.push_back(token_id(k));
    return s;
  };
  for (std::size_t n = 2; n < max_len; ++n) {
    for (ModuleKind u : kUnaryAtt) {
      for (const auto& s : attention[n - 1]) attention[n].push_back(extend(s, u));
    }
    for (ModuleKind b : kBinaryAtt) {
      for (std::size_t i = 1; i + 1 < n; ++i) {
        for (const auto& l : attention[i]) {
          for (const auto& r : attention[n - 1 - i]) attention[n].push_back(join(l, r, b));
        }
      }
    }
  }
  Seqs out;
  for (std::size_t n = 2; n <= max_len; ++n) {
    for (ModuleKind u : kUnaryPred) {
      for (const auto& s : attention[n - 1]) out.push_back(extend(s, u));
    }
    for (ModuleKind b : kBinaryPred) {
      for (std::size_t i = 1; i + 1 < n; ++i) {
        for (const auto& l : attention[i]) {
          for (const auto& r : attention[n - 1 - i]) out.push_back(join(l, r, b));
        }
      }
    }
  }
  std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) {
    if (a.size() != b.size()) return a.size() < b.size();
    return a < b;
  });
  return out;
}

std::vector<int> token_ids(const Program& program) {
  std::vector<int> ids;
  ids.reserve(program.size());
  for (const ModuleToken& t : program) ids.push_back(token_id(t.kind));
  return ids;
}

Program program_from_ids(std::span<const int> ids) {
  Program p;
  p.reserve(ids.size());
  for (int id : ids) {
    if (id < 0 || id >= static_cast<int>(kNumModuleKinds)) {
      throw LayoutError(std::string(token_name(id)) + " is not a module token");
    }
    p.push_back(ModuleToken{kind_of(id), std::nullopt});
  }
  return p;
}

Program parse_layout_text(std::string_view text) {
  Program out;
  std::size_t i = 0;
  const auto is_space = [](char c) { return std::isspace(static_cast<unsigned char>(c)) != 0; };
  const auto is_word = [](char c) {
    return std::isalnum(static_cast<unsigned char>(c)) != 0 || c == '_' || c == '-';
  };
  while (i < text.size()) {
    if (is_space(text[i])) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < text.size() && is_word(text[i])) ++i;
    if (i == start) throw LayoutParseError("unexpected character '" + std::string(1, text[i]) + "'", i + 1);
    const std::string_view name = text.substr(start, i - start);
    const auto kind = parse_kind(name);
    if (!kind) throw LayoutParseError("unknown module '" + std::string(name) + "'", start + 1);
    ModuleToken tok{*kind, std::nullopt};
    if (i < text.size() && text[i] == '[') {
      const std::size_t open = i;
      const std::size_t close = text.find(']', open);
      if (close == std::string_view::npos) throw LayoutParseError("unterminated binding", open + 1);
      const std::string_view body = text.substr(open + 1, close - open - 1);
      const std::size_t eq = body.find('=');
      if (eq == std::string_view::npos || eq == 0 || eq + 1 == body.size()) {
        throw LayoutParseError("binding must be key=value", open + 2);
      }
      const std::string_view key = body.substr(0, eq);
      const std::string_view value = body.substr(eq + 1);
      for (std::size_t k = 0; k < body.size(); ++k) {
        if (k != eq && !is_word(body[k])) {
          throw LayoutParseError("invalid character in binding", open + 2 + k);
        }
      }
      tok.binding = Binding{std::string(key), std::string(value)};
      i = close + 1;
    }
    if (i < text.size() && !is_space(text[i])) {
      throw LayoutParseError("expected whitespace after token", i + 1);
    }
    out.push_back(std::move(tok));
  }
  if (out.empty()) throw LayoutParseError("empty layout", 1);
  return out;
}

std::string format_token(const ModuleToken& token) {
  std::string s(kind_name(token.kind));
  if (token.binding) s += "[" + token.binding->key + "=" + token.binding->value + "]";
  return s;
}

std::string format_layout(const Program& program) {
  std::string s;
  for (std::size_t i = 0; i < program.size(); ++i) {
    if (i) s += ' ';
    s += format_token(program[i]);
  }
  return s;
}

std::string format_ids(std::span<const int> ids) {
  std::ostringstream os;
  for (std::size_t i = 0; i < ids.size(); ++i) {
    if (i) os << ' ';
    os << token_name(ids[i]);
  }
  return os.str();
}

}  // namespace dmn::layout
