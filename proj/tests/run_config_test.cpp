#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include <string>

#include "moodnet/errors.hpp"
#include "moodnet/run_config.hpp"
#include "support/testio.hpp"

using moodnet::ConfigError;
using moodnet::IoError;
using moodnet::Precision;
using moodnet::RunConfig;
using nlohmann::json;

namespace {

json base_json() {
  return json::parse(R"({
    "model": {
      "depth": 4,
      "modalities": ["audio", "lyrics"],
      "lines_max": 10,
      "words_max": 24,
      "dropout": 0.1,
      "seed": 42,
      "channel_div": 8,
      "head_div": 4
    },
    "optimizer": {
      "alpha": 0.0005,
      "beta1": 0.85,
      "beta2": 0.99,
      "epsilon": 1e-7,
      "batch": 8,
      "epochs": 12,
      "early_stop_train_f1": 0.9
    },
    "paths": {
      "embeddings": "glove.txt",
      "manifest": "data/manifest.jsonl",
      "feature_cache": "/abs/cache",
      "checkpoint_dir": "ckpt"
    },
    "precision": "single"
  })");
}

}  // namespace

TEST(RunConfigTest, ParsesEveryField) {
  const RunConfig cfg = moodnet::run_config_from_json(base_json());
  EXPECT_EQ(cfg.model.depth, 4);
  EXPECT_TRUE(cfg.model.use_audio);
  EXPECT_TRUE(cfg.model.use_lyrics);
  EXPECT_EQ(cfg.model.lines_max, 10);
  EXPECT_EQ(cfg.model.words_max, 24);
  EXPECT_EQ(cfg.model.dropout, 0.1);
  EXPECT_EQ(cfg.model.seed, 42u);
  EXPECT_EQ(cfg.model.channel_div, 8);
  EXPECT_EQ(cfg.model.head_div, 4);
  EXPECT_EQ(cfg.optimizer.adam.alpha, 0.0005);
  EXPECT_EQ(cfg.optimizer.adam.beta1, 0.85);
  EXPECT_EQ(cfg.optimizer.adam.beta2, 0.99);
  EXPECT_EQ(cfg.optimizer.adam.epsilon, 1e-7);
  EXPECT_EQ(cfg.optimizer.batch, 8);
  EXPECT_EQ(cfg.optimizer.epochs, 12);
  ASSERT_TRUE(cfg.optimizer.early_stop_train_f1.has_value());
  EXPECT_EQ(*cfg.optimizer.early_stop_train_f1, 0.9);
  EXPECT_EQ(cfg.paths.embeddings, "glove.txt");
  EXPECT_EQ(cfg.precision, Precision::kSingle);
}

TEST(RunConfigTest, OmittedSectionsFallBackToDefaults) {
  const RunConfig cfg = moodnet::run_config_from_json(json::parse(
      R"({"model": {"depth": 5, "modalities": ["audio"], "seed": 0}})"));
  EXPECT_EQ(cfg.optimizer.adam.alpha, 0.001);
  EXPECT_EQ(cfg.optimizer.adam.beta1, 0.9);
  EXPECT_EQ(cfg.optimizer.adam.beta2, 0.999);
  EXPECT_EQ(cfg.optimizer.adam.epsilon, 1e-8);
  EXPECT_EQ(cfg.optimizer.batch, 16);
  EXPECT_EQ(cfg.optimizer.epochs, 50);
  EXPECT_FALSE(cfg.optimizer.early_stop_train_f1.has_value());
  EXPECT_EQ(cfg.precision, Precision::kDouble);
  EXPECT_EQ(cfg.model.dropout, 0.2);
  EXPECT_EQ(cfg.model.audio_bins, 96);
  EXPECT_EQ(cfg.model.audio_frames, 1366);
  EXPECT_FALSE(cfg.model.use_lyrics);
  EXPECT_TRUE(cfg.paths.manifest.empty());
}

TEST(RunConfigTest, UnknownKeysAreRejectedAtEveryLevel) {
  json j = base_json();
  j["surprise"] = 1;
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["model"]["depht"] = 5;  // typo must not be ignored
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["optimizer"]["learning_rate"] = 0.1;
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["paths"]["cache"] = "x";
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);
}

TEST(RunConfigTest, RequiredModelKeysMustBePresent) {
  json j = base_json();
  j["model"].erase("depth");
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["model"].erase("seed");
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["model"].erase("modalities");
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j.erase("model");
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);
}

TEST(RunConfigTest, ModalityListIsValidated) {
  json j = base_json();
  j["model"]["modalities"] = {"audio", "audio"};
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["model"]["modalities"] = {"video"};
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["model"]["modalities"] = {"lyrics"};
  const RunConfig cfg = moodnet::run_config_from_json(j);
  EXPECT_FALSE(cfg.model.use_audio);
  EXPECT_TRUE(cfg.model.use_lyrics);
}

TEST(RunConfigTest, BadValuesAreRejected) {
  json j = base_json();
  j["optimizer"]["batch"] = 0;
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["optimizer"]["epochs"] = -1;
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["optimizer"]["beta1"] = 1.0;
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["precision"] = "half";
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);

  j = base_json();
  j["model"]["depth"] = "five";
  EXPECT_THROW(moodnet::run_config_from_json(j), ConfigError);
}

TEST(RunConfigTest, PrecisionNamesRoundTrip) {
  EXPECT_STREQ(moodnet::precision_name(Precision::kDouble), "double");
  EXPECT_STREQ(moodnet::precision_name(Precision::kSingle), "single");
  EXPECT_EQ(moodnet::precision_from_name("double"), Precision::kDouble);
  EXPECT_EQ(moodnet::precision_from_name("single"), Precision::kSingle);
  EXPECT_THROW(moodnet::precision_from_name("fp16"), ConfigError);
}

TEST(RunConfigTest, JsonRoundTripPreservesTheConfig) {
  const RunConfig cfg = moodnet::run_config_from_json(base_json());
  const RunConfig back = moodnet::run_config_from_json(moodnet::run_config_to_json(cfg));
  EXPECT_EQ(back.model.depth, cfg.model.depth);
  EXPECT_EQ(back.model.seed, cfg.model.seed);
  EXPECT_EQ(back.model.lines_max, cfg.model.lines_max);
  EXPECT_EQ(back.optimizer.adam.alpha, cfg.optimizer.adam.alpha);
  EXPECT_EQ(back.optimizer.early_stop_train_f1, cfg.optimizer.early_stop_train_f1);
  EXPECT_EQ(back.paths.feature_cache, cfg.paths.feature_cache);
  EXPECT_EQ(back.precision, cfg.precision);
}

TEST(RunConfigTest, LoadResolvesRelativePathsAgainstTheConfigDir) {
  testio::TempDir dir;
  std::filesystem::create_directories(dir / "conf");
  testio::write_file(dir / "conf" / "run.json", base_json().dump());
  const RunConfig cfg = moodnet::load_run_config(dir / "conf" / "run.json");
  EXPECT_EQ(cfg.paths.embeddings, (dir / "conf" / "glove.txt").lexically_normal().string());
  EXPECT_EQ(cfg.paths.manifest,
            (dir / "conf" / "data" / "manifest.jsonl").lexically_normal().string());
  EXPECT_EQ(cfg.paths.feature_cache, "/abs/cache");  // absolute stays put
  EXPECT_EQ(cfg.paths.checkpoint_dir, (dir / "conf" / "ckpt").lexically_normal().string());
}

TEST(RunConfigTest, LoadRejectsMissingOrBrokenFiles) {
  testio::TempDir dir;
  EXPECT_THROW(moodnet::load_run_config(dir / "absent.json"), IoError);
  testio::write_file(dir / "broken.json", "{\"model\":");
  EXPECT_THROW(moodnet::load_run_config(dir / "broken.json"), ConfigError);
}
