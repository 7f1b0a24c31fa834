#include <gtest/gtest.h>

#include <set>

#include "dmn/layout.hpp"
#include "dmn/rng.hpp"
#include "support/layout_oracle.hpp"

namespace layout = dmn::layout;
using layout::ModuleKind;

namespace {

std::vector<int> ids(std::initializer_list<ModuleKind> kinds) {
  std::vector<int> out;
  for (ModuleKind k : kinds) out.push_back(layout::token_id(k));
  return out;
}

}  // namespace

TEST(Layout, SignatureTable) {
  using layout::OutputType;
  struct Row {
    ModuleKind k;
    int arity;
    OutputType out;
    bool feats;
  };
  const Row rows[] = {
      {ModuleKind::kFind, 0, OutputType::kAttention, true},
      {ModuleKind::kCompare, 2, OutputType::kPrediction, true},
      {ModuleKind::kDescribe, 1, OutputType::kPrediction, true},
      {ModuleKind::kExist, 1, OutputType::kPrediction, false},
      {ModuleKind::kEqualTo, 2, OutputType::kPrediction, false},
      {ModuleKind::kAnd, 2, OutputType::kAttention, false},
      {ModuleKind::kFilter, 1, OutputType::kAttention, true},
      {ModuleKind::kRelocate, 1, OutputType::kAttention, true},
      {ModuleKind::kOr, 2, OutputType::kAttention, false},
      {ModuleKind::kGreaterThan, 2, OutputType::kPrediction, false},
      {ModuleKind::kLessThan, 2, OutputType::kPrediction, false},
      {ModuleKind::kIsPresent, 1, OutputType::kPrediction, false},
      {ModuleKind::kCount, 1, OutputType::kPrediction, false},
  };
  for (const Row& r : rows) {
    const auto& s = layout::signature(r.k);
    EXPECT_EQ(s.arity, r.arity) << layout::kind_name(r.k);
    EXPECT_EQ(s.output, r.out) << layout::kind_name(r.k);
    EXPECT_EQ(s.uses_features, r.feats) << layout::kind_name(r.k);
  }
}

TEST(Layout, ValidateExamples) {
  EXPECT_TRUE(layout::validate(ids({ModuleKind::kFind, ModuleKind::kCount})).valid);
  const auto under = layout::validate(ids({ModuleKind::kCount}));
  EXPECT_FALSE(under.valid);
  EXPECT_EQ(under.error_index, 0u);
  EXPECT_NE(under.message.find("underflow"), std::string::npos);
  EXPECT_TRUE(layout::validate(ids({ModuleKind::kFind, ModuleKind::kFind, ModuleKind::kAnd,
                                    ModuleKind::kExist}))
                  .valid);
  const auto deep =
      layout::validate(ids({ModuleKind::kFind, ModuleKind::kFind, ModuleKind::kExist}));
  EXPECT_FALSE(deep.valid);
  EXPECT_EQ(deep.error_index, 2u);
  EXPECT_FALSE(layout::validate(std::vector<int>{}).valid);
  // Prediction token followed by more tokens.
  const auto tail = layout::validate(
      ids({ModuleKind::kFind, ModuleKind::kCount, ModuleKind::kFind}));
  EXPECT_FALSE(tail.valid);
  EXPECT_EQ(tail.error_index, 2u);
  // Attention-only program never terminates.
  EXPECT_FALSE(layout::validate(ids({ModuleKind::kFind})).valid);
  EXPECT_FALSE(layout::validate(std::vector<int>{0, layout::kEndToken}).valid);
}

TEST(Layout, ParseRpnShapes) {
  const auto unary = layout::parse_rpn(layout::parse_layout_text("find count"));
  EXPECT_EQ(unary.root.token.kind, ModuleKind::kCount);
  ASSERT_EQ(unary.root.children.size(), 1u);
  EXPECT_EQ(unary.root.children[0].token.kind, ModuleKind::kFind);

  const auto bin =
      layout::parse_rpn(layout::parse_layout_text("find[color=red] find[shape=circle] compare"));
  ASSERT_EQ(bin.root.children.size(), 2u);
  EXPECT_EQ(bin.root.children[0].token.binding->value, "red");
  EXPECT_EQ(bin.root.children[1].token.binding->value, "circle");

  EXPECT_THROW(layout::parse_rpn(layout::parse_layout_text("find find exist")),
               layout::LayoutError);
}

TEST(Layout, RoundTripUpToSeven) {
  for (const auto& seq : layout::enumerate_valid(7)) {
    const auto prog = layout::program_from_ids(seq);
    const auto tree = layout::parse_rpn(prog);
    EXPECT_EQ(layout::token_ids(layout::linearize(tree)), seq);
    EXPECT_EQ(layout::parse_rpn(layout::linearize(tree)), tree);
  }
}

TEST(Layout, CheckTreeRejectsIllTyped) {
  layout::SyntaxTree t;
  t.root.token.kind = ModuleKind::kCount;  // missing child
  EXPECT_THROW(layout::check_tree(t), layout::LayoutError);
  t.root.children.push_back({{ModuleKind::kCount, std::nullopt}, {}});
  EXPECT_THROW(layout::check_tree(t), layout::LayoutError);
  layout::SyntaxTree attention_root;
  attention_root.root.token.kind = ModuleKind::kFind;
  EXPECT_THROW(layout::check_tree(attention_root), layout::LayoutError);
}

TEST(Layout, EnumerateSmallCases) {
  EXPECT_TRUE(layout::enumerate_valid(1).empty());
  const auto two = layout::enumerate_valid(2);
  ASSERT_EQ(two.size(), 4u);
  std::set<int> heads;
  for (const auto& s : two) {
    ASSERT_EQ(s.size(), 2u);
    EXPECT_EQ(s[0], layout::token_id(ModuleKind::kFind));
    heads.insert(s[1]);
  }
  EXPECT_EQ(heads, (std::set<int>{layout::token_id(ModuleKind::kDescribe),
                                  layout::token_id(ModuleKind::kExist),
                                  layout::token_id(ModuleKind::kIsPresent),
                                  layout::token_id(ModuleKind::kCount)}));
  EXPECT_THROW(layout::enumerate_valid(10), std::invalid_argument);
}

TEST(Layout, EnumerateIsMonotone) {
  for (std::size_t k = 1; k < 7; ++k) {
    const auto a = layout::enumerate_valid(k);
    const auto b = layout::enumerate_valid(k + 1);
    const std::set<std::vector<int>> sb(b.begin(), b.end());
    for (const auto& s : a) EXPECT_TRUE(sb.contains(s));
  }
}

TEST(Layout, ValidateMatchesBruteForceUpToFour) {
  // The length-5 sweep lives in the acceptance suite.
  const auto r = dmn::testing::brute_force_layouts(4);
  EXPECT_EQ(r.disagreements, 0u);
  EXPECT_TRUE(r.matches_enumeration);
  EXPECT_EQ(r.sequences, 14u + 14u * 14u + 14u * 14u * 14u + 14u * 14u * 14u * 14u);
}

TEST(Layout, MaskExamples) {
  const auto empty = layout::legal_next_tokens({0, false}, 0, 9);
  for (std::size_t t = 0; t < layout::kNumDecoderTokens; ++t) {
    EXPECT_EQ(empty[t], t == static_cast<std::size_t>(layout::token_id(ModuleKind::kFind)));
  }
  const auto one = layout::legal_next_tokens({1, false}, 1, 9);
  for (ModuleKind k : layout::all_kinds()) {
    EXPECT_EQ(one[static_cast<std::size_t>(k)], layout::signature(k).arity <= 1)
        << layout::kind_name(k);
  }
  EXPECT_FALSE(one[layout::kEndToken]);
  const auto done = layout::legal_next_tokens({1, true}, 2, 9);
  for (std::size_t t = 0; t < layout::kNumDecoderTokens; ++t) {
    EXPECT_EQ(done[t], static_cast<int>(t) == layout::kEndToken);
  }
  // One slot left with depth 1: only a unary Prediction can finish.
  const auto last = layout::legal_next_tokens({1, false}, 8, 9);
  for (ModuleKind k : layout::all_kinds()) {
    const auto& s = layout::signature(k);
    EXPECT_EQ(last[static_cast<std::size_t>(k)],
              s.arity == 1 && s.output == layout::OutputType::kPrediction);
  }
  // Depth 3 with 2 slots left cannot finish; depth 2 needs a binary Prediction.
  const auto two_left = layout::legal_next_tokens({2, false}, 8, 9);
  for (ModuleKind k : layout::all_kinds()) {
    const auto& s = layout::signature(k);
    EXPECT_EQ(two_left[static_cast<std::size_t>(k)],
              s.arity == 2 && s.output == layout::OutputType::kPrediction);
  }
}

TEST(Layout, MaskedRandomRolloutsAlwaysValid) {
  dmn::Rng rng(42);
  for (int trial = 0; trial < 2000; ++trial) {
    layout::StackState st;
    std::vector<int> seq;
    while (!st.finished) {
      const auto mask = layout::legal_next_tokens(st, seq.size(), 9);
      std::vector<double> w(mask.begin(), mask.end());
      const int t = static_cast<int>(rng.categorical(w));
      ASSERT_NE(t, layout::kEndToken);
      seq.push_back(t);
      st = layout::advance(st, t);
    }
    ASSERT_LE(seq.size(), 9u);
    ASSERT_TRUE(layout::validate(seq).valid) << layout::format_ids(seq);
  }
}

TEST(Layout, TextSyntax) {
  const auto p = layout::parse_layout_text("  find[color=red]   find[shape=circle] and count ");
  ASSERT_EQ(p.size(), 4u);
  EXPECT_EQ(p[0].binding, (layout::Binding{"color", "red"}));
  EXPECT_FALSE(p[2].binding.has_value());
  EXPECT_EQ(layout::format_layout(p), "find[color=red] find[shape=circle] and count");
  EXPECT_EQ(layout::parse_layout_text(layout::format_layout(p)), p);
}

TEST(Layout, ParseErrorsCarryColumns) {
  try {
    layout::parse_layout_text("find frobnicate count");
    FAIL();
  } catch (const layout::LayoutParseError& e) {
    EXPECT_EQ(e.column(), 6u);
  }
  try {
    layout::parse_layout_text("find[color=red count");
    FAIL();
  } catch (const layout::LayoutParseError& e) {
    EXPECT_EQ(e.column(), 5u);
  }
  EXPECT_THROW(layout::parse_layout_text("find[=red] count"), layout::LayoutParseError);
  EXPECT_THROW(layout::parse_layout_text(""), layout::LayoutParseError);
}
