#include <gtest/gtest.h>

#include "fault2flow/config.hpp"
#include "fault2flow/pipeline.hpp"
#include "support/expect_error.hpp"
#include "support/fixtures.hpp"

namespace f2f = fault2flow;
using f2f::ErrorKind;

TEST(Config, ParsesKeyValueLines) {
  auto cfg = f2f::Config::parse("# comment\n\nseed = 7\n  epsilon=0.25  # trailing\nname = a b\nseed = 9\n");
  EXPECT_EQ(cfg.get_count("seed", 0), 9u);
  EXPECT_EQ(cfg.get_number("epsilon", 0), 0.25);
  EXPECT_EQ(cfg.get("name", ""), "a b");
  EXPECT_EQ(cfg.get("missing", "fallback"), "fallback");
  EXPECT_FALSE(cfg.contains("missing"));
}

TEST(Config, Errors) {
  EXPECT_F2F_ERROR(f2f::Config::parse("just words\n"), ErrorKind::ConfigError);
  EXPECT_F2F_ERROR(f2f::Config::parse("= 3\n"), ErrorKind::ConfigError);
  auto cfg = f2f::Config::parse("seed = -1\nepsilon = small\n");
  EXPECT_F2F_ERROR(cfg.get_count("seed", 0), ErrorKind::ConfigError);
  EXPECT_F2F_ERROR(cfg.get_number("epsilon", 0), ErrorKind::ConfigError);
  EXPECT_F2F_ERROR(f2f::Config::load("/nonexistent/fault2flow.config"), ErrorKind::IoError);
}

TEST(Config, FixtureDrivesPipelineOptions) {
  auto cfg = f2f::Config::load(f2f_test::fixture_path("fault2flow.config"));
  auto opts = f2f::PipelineOptions::from_config(cfg);
  EXPECT_EQ(opts.strategy.seed, cfg.get_count("seed", 99));
  EXPECT_EQ(opts.strategy.boundary_epsilon, cfg.get_number("epsilon", 99));
  EXPECT_EQ(opts.max_iterations, cfg.get_count("max_iter", 99));
  EXPECT_EQ(opts.leaf_cap, cfg.get_count("leaf_cap", 99));
  EXPECT_EQ(opts.compile.no_fault_label, cfg.get("no_fault_label", "?"));
}

TEST(Config, DefaultsWithoutKeys) {
  auto opts = f2f::PipelineOptions::from_config(f2f::Config{});
  EXPECT_EQ(opts.max_iterations, 5u);
  EXPECT_EQ(opts.leaf_cap, 12u);
  EXPECT_EQ(opts.strategy.region_cap, 4096u);
  EXPECT_EQ(opts.compile.no_fault_label, "no_fault");
}
