#include <gtest/gtest.h>

#include "dmn/config.hpp"
#include "dmn/harness.hpp"

using dmn::ConfigError;
using dmn::KeyValueConfig;

TEST(Config, ParsesKeysCommentsAndWhitespace) {
  const auto c = KeyValueConfig::parse(
      "# header\n"
      "\n"
      "  train.learning_rate =  0.005  # trailing\n"
      "model.hidden_dim=64\n"
      "train.ablation = baseline1\n"
      "flag = true\n");
  EXPECT_DOUBLE_EQ(c.get_double("train.learning_rate", 0.0), 0.005);
  EXPECT_EQ(c.get_int("model.hidden_dim", 0), 64);
  EXPECT_EQ(c.get_string("train.ablation", ""), "baseline1");
  EXPECT_TRUE(c.get_bool("flag", false));
  EXPECT_EQ(c.get_int("absent", 7), 7);
  EXPECT_FALSE(c.contains("absent"));
}

TEST(Config, TextRoundTrip) {
  KeyValueConfig c;
  c.set("a.b", "1");
  c.set("c", "x y");
  EXPECT_EQ(KeyValueConfig::parse(c.to_text()).values(), c.values());
}

TEST(Config, RejectsMalformedInput) {
  EXPECT_THROW(KeyValueConfig::parse("no equals sign\n"), ConfigError);
  EXPECT_THROW(KeyValueConfig::parse(" = 3\n"), ConfigError);
  const auto c = KeyValueConfig::parse("n = 12abc\nx = fast\nb = maybe\n");
  EXPECT_THROW(c.get_int("n", 0), ConfigError);
  EXPECT_THROW(c.get_double("x", 0.0), ConfigError);
  EXPECT_THROW(c.get_bool("b", false), ConfigError);
  EXPECT_THROW(KeyValueConfig::load("/nonexistent/dmn.cfg"), ConfigError);
}

TEST(Config, EffectiveConfigRejectsUnknownKeys) {
  const auto defaults = dmn::harness::default_config();
  EXPECT_EQ(dmn::harness::effective_config({}).values(), defaults.values());
  EXPECT_THROW(dmn::harness::effective_config(KeyValueConfig::parse("train.lr = 1\n")), ConfigError);
  const auto tc = dmn::harness::train_config(KeyValueConfig::parse("model.hidden_dim = 32\n"));
  EXPECT_EQ(tc.model.policy.hidden_dim, 32u);
}

TEST(Config, TrainConfigValidatesRanges) {
  EXPECT_THROW(dmn::harness::train_config(KeyValueConfig::parse("train.ablation = nope\n")), ConfigError);
  EXPECT_THROW(dmn::harness::dataset_config(KeyValueConfig::parse("scene.min_objects = 9\nscene.max_objects = 2\n")),
               ConfigError);
}
