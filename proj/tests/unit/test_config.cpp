#include "probcast/config.hpp"

#include <gtest/gtest.h>

using namespace probcast;
using namespace probcast::config;

TEST(Config, DeskDefaultsAreValid) {
  const auto c = desk_config();
  EXPECT_NO_THROW(c.validate());
  EXPECT_EQ(c.models, known_models());
  EXPECT_EQ(c.trading_levels.size(), 49u);
  EXPECT_NO_THROW(paper_config().validate());
  EXPECT_EQ(paper_config().lear_windows, (std::vector<int>{56, 84, 1092, 1461}));
}

TEST(Config, OverridesKeepUnlistedValues) {
  const auto c = parse_config(R"({"runs": 2, "lear": {"lambda": 0.03, "lambda_range": [0.001, 0.2]},
                                  "models": ["LEAR", "LEAR-CP"], "conformal": {"n_cal": 50}})");
  EXPECT_EQ(c.runs, 2);
  EXPECT_EQ(*c.lear_lambda, 0.03);
  EXPECT_EQ(c.lambda_low, 0.001);
  EXPECT_EQ(c.lambda_high, 0.2);
  EXPECT_EQ(c.n_cal, 50);
  EXPECT_EQ(c.lear_windows, desk_config().lear_windows);
}

TEST(Config, Rejections) {
  EXPECT_THROW(parse_config(R"({"models": ["LEAR", "Prophet"]})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"models": ["LEAR", "LEAR"]})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"rnus": 3})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"lear": {"lambda_range": [0.1, 0.01]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"lear": {"lambda_range": [0.1]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"trading": {"levels": [51]}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"neural": {"mcd_dropout": 0.95}})"), ConfigError);
  EXPECT_THROW(parse_config(R"({"runs": "ten"})"), ConfigError);
  EXPECT_THROW(parse_config("{not json"), ConfigError);
  EXPECT_THROW(parse_config(R"({"splits": {"test": ["2022-06-01", "2022-07-01"]}})"), ConfigError);
  EXPECT_THROW(load_config("/nonexistent/config.json"), ConfigError);
}

TEST(Config, ProfileSwitch) {
  const auto c = parse_config(R"({"profile": "paper", "runs": 1})");
  EXPECT_EQ(c.runs, 1);
  EXPECT_EQ(c.lear_windows, paper_config().lear_windows);
  EXPECT_THROW(parse_config(R"({"profile": "huge"})"), ConfigError);
}
