#ifndef DMN_LAYOUT_HPP_
#define DMN_LAYOUT_HPP_

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// The reverse-polish module layout language.
namespace dmn::layout {

enum class ModuleKind : std::uint8_t {
  kFind,
  kCompare,
  kDescribe,
  kExist,
  kEqualTo,
  kAnd,
  kFilter,
  kRelocate,
  kOr,
  kGreaterThan,
  kLessThan,
  kIsPresent,
  kCount,
};

inline constexpr std::size_t kNumModuleKinds = 13;
// Decoder alphabet: the 13 module kinds followed by END.
inline constexpr int kEndToken = 13;
inline constexpr std::size_t kNumDecoderTokens = 14;
inline constexpr std::size_t kDefaultMaxLen = 9;

enum class OutputType : std::uint8_t { kAttention, kPrediction };

struct Signature {
  int arity;
  OutputType output;
  bool uses_features;
};

const Signature& signature(ModuleKind kind);
std::string_view kind_name(ModuleKind kind);
std::optional<ModuleKind> parse_kind(std::string_view name);
std::string_view token_name(int token);
inline int token_id(ModuleKind k) { return static_cast<int>(k); }
inline ModuleKind kind_of(int token) { return static_cast<ModuleKind>(token); }
std::array<ModuleKind, kNumModuleKinds> all_kinds();

// Symbolic argument, e.g. color=red or rel=left. Only the oracle reads it.
struct Binding {
  std::string key;
  std::string value;
  bool operator==(const Binding&) const = default;
};

struct ModuleToken {
  ModuleKind kind;
  std::optional<Binding> binding;
  bool operator==(const ModuleToken&) const = default;
};

using Program = std::vector<ModuleToken>;

class LayoutError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class LayoutParseError : public LayoutError {
 public:
  LayoutParseError(const std::string& what, std::size_t column)
      : LayoutError(what + " at column " + std::to_string(column)), column_(column) {}
  std::size_t column() const { return column_; }

 private:
  std::size_t column_;
};

struct ValidityReport {
  bool valid = false;
  // First violating token index (0-based) when invalid.
  std::optional<std::size_t> error_index;
  std::string message;
  // Stack depth after each accepted token.
  std::vector<int> depths;
};

ValidityReport validate(std::span<const int> tokens);
ValidityReport validate(const Program& program);

struct SyntaxNode {
  ModuleToken token;
  std::vector<SyntaxNode> children;
  bool operator==(const SyntaxNode&) const = default;
};

struct SyntaxTree {
  SyntaxNode root;
  bool operator==(const SyntaxTree&) const = default;
};

// Throws LayoutError carrying the validation message on invalid input.
SyntaxTree parse_rpn(const Program& program);
// Post-order traversal; inverse of parse_rpn.
Program linearize(const SyntaxTree& tree);
// Throws LayoutError if the tree is not well typed.
void check_tree(const SyntaxTree& tree);

struct StackState {
  int depth = 0;
  // A Prediction token has been emitted; only END may follow.
  bool finished = false;
};

StackState advance(StackState state, int token);

using TokenMask = std::array<bool, kNumDecoderTokens>;
TokenMask legal_next_tokens(StackState state, std::size_t emitted_len, std::size_t max_len);

// Every valid program of length <= max_len (max_len <= 9), generated from the
// typed tree grammar and sorted by (length, token ids).
std::vector<std::vector<int>> enumerate_valid(std::size_t max_len);

std::vector<int> token_ids(const Program& program);
Program program_from_ids(std::span<const int> ids);

// Whitespace-separated tokens with optional [key=value] bindings.
Program parse_layout_text(std::string_view text);
std::string format_token(const ModuleToken& token);
std::string format_layout(const Program& program);
std::string format_ids(std::span<const int> ids);

}  // namespace dmn::layout

#endif  // DMN_LAYOUT_HPP_
