#include <gtest/gtest.h>

#include <cmath>
#include <fstream>
#include <sstream>
#include <string>

#include "moodnet/checkpoint.hpp"
#include "moodnet/dataset.hpp"
#include "moodnet/errors.hpp"
#include "moodnet/tensor_io.hpp"
#include "moodnet/train.hpp"
#include "support/testio.hpp"

using moodnet::DatasetManifest;
using moodnet::DatasetRecord;
using moodnet::Index;
using moodnet::InputError;
using moodnet::Model;
using moodnet::ModelConfig;
using moodnet::RunConfig;
using moodnet::Split;
using moodnet::Tensor;
using moodnet::TrainingError;
using moodnet::TrainOutcome;

namespace {

RunConfig tiny_run() {
  RunConfig run;
  run.model.depth = 3;
  run.model.use_lyrics = false;
  run.model.audio_bins = 8;
  run.model.audio_frames = 12;
  run.model.channel_div = 32;
  run.model.head_div = 16;
  run.model.dropout = 0.0;
  run.model.seed = 21;
  run.optimizer.adam.alpha = 0.002;
  run.optimizer.batch = 4;
  run.optimizer.epochs = 5;
  return run;
}

// Class-separable synthetic features: each label gets its own brightness
// level plus a little seeded noise.
DatasetManifest make_dataset(const std::filesystem::path& dir, int n, bool with_val) {
  std::filesystem::create_directories(dir);
  DatasetManifest m;
  for (int i = 0; i < n; ++i) {
    const int label = i % 5;
    Tensor<float> feat = Tensor<float>::uniform({8, 12, 1}, -0.02f, 0.02f, 900 + std::uint64_t(i));
    for (Index k = 0; k < feat.size(); ++k) feat[k] += 0.15f * float(label + 1);
    const std::string name = "clip" + std::to_string(i) + ".mnt";
    moodnet::write_tensor(dir / name, feat);

    DatasetRecord rec;
    rec.clip_id = "clip" + std::to_string(i);
    rec.audio_feat = name;
    rec.audio_path = dir / name;
    rec.label = label;
    rec.split = with_val && i % 5 == 4 && i >= n - 5 ? Split::kVal : Split::kTrain;
    m.records.push_back(rec);
  }
  return m;
}

std::vector<std::string> read_lines(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) lines.push_back(line);
  return lines;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST(TrainTest, LossDecreasesOnASeparableTask) {
  testio::TempDir dir;
  const DatasetManifest m = make_dataset(dir / "data", 20, false);
  const RunConfig run = tiny_run();

  const TrainOutcome out = moodnet::train_model<double>(run, m, dir / "ck");
  ASSERT_EQ(out.log.size(), 5u);
  EXPECT_EQ(out.epochs_run, 5);
  EXPECT_FALSE(out.early_stopped);
  EXPECT_LT(out.log.back().loss, out.log.front().loss);
  for (const auto& stats : out.log) EXPECT_TRUE(std::isfinite(stats.loss));
}

TEST(TrainTest, WritesCheckpointAndCsvLog) {
  testio::TempDir dir;
  const DatasetManifest m = make_dataset(dir / "data", 10, true);
  RunConfig run = tiny_run();
  run.optimizer.epochs = 2;

  std::ostringstream progress;
  const TrainOutcome out = moodnet::train_model<double>(run, m, dir / "ck", &progress);
  ASSERT_EQ(out.log.size(), 2u);

  const auto ckpt = moodnet::load_checkpoint<double>(dir / "ck");
  EXPECT_EQ(ckpt.epoch, 2);
  EXPECT_GT(ckpt.adam.t, 0);

  const auto lines = read_lines(dir / "ck" / "train_log.csv");
  ASSERT_EQ(lines.size(), 3u);
  EXPECT_EQ(lines[0], "epoch,loss,val_macro_f1");
  EXPECT_EQ(lines[1].substr(0, 2), "0,");
  EXPECT_EQ(lines[2].substr(0, 2), "1,");

  EXPECT_NE(progress.str().find("epoch 0"), std::string::npos);
  EXPECT_NE(progress.str().find("val_f1"), std::string::npos);
}

TEST(TrainTest, EpochZeroLossIsDeterministic) {
  testio::TempDir dir;
  const DatasetManifest m = make_dataset(dir / "data", 12, false);
  RunConfig run = tiny_run();
  run.optimizer.epochs = 1;
  run.model.dropout = 0.3;  // exercises the seeded dropout stream too

  const TrainOutcome a = moodnet::train_model<double>(run, m, dir / "ck_a");
  const TrainOutcome b = moodnet::train_model<double>(run, m, dir / "ck_b");
  ASSERT_EQ(a.log.size(), 1u);
  EXPECT_EQ(a.log[0].loss, b.log[0].loss);
  EXPECT_EQ(slurp(dir / "ck_a" / "train_log.csv"), slurp(dir / "ck_b" / "train_log.csv"));
}

TEST(TrainTest, IdenticalRunsLeaveByteIdenticalCheckpoints) {
  testio::TempDir dir;
  const DatasetManifest m = make_dataset(dir / "data", 10, false);
  RunConfig run = tiny_run();
  run.optimizer.epochs = 2;

  moodnet::train_model<double>(run, m, dir / "ck_a");
  moodnet::train_model<double>(run, m, dir / "ck_b");
  for (const auto& entry : std::filesystem::recursive_directory_iterator(dir / "ck_a")) {
    if (!entry.is_regular_file()) continue;
    const auto rel = std::filesystem::relative(entry.path(), dir / "ck_a");
    EXPECT_EQ(slurp(entry.path()), slurp(dir / "ck_b" / rel)) << rel;
  }
}

TEST(TrainTest, ZeroLearningRateFreezesTheParameters) {
  testio::TempDir dir;
  const DatasetManifest m = make_dataset(dir / "data", 10, false);

  RunConfig init_only = tiny_run();
  init_only.optimizer.epochs = 0;
  moodnet::train_model<double>(init_only, m, dir / "ck_init");

  RunConfig frozen = tiny_run();
  frozen.optimizer.epochs = 3;
  frozen.optimizer.adam.alpha = 0.0;
  moodnet::train_model<double>(frozen, m, dir / "ck_frozen");

  const auto init_ck = moodnet::load_checkpoint<double>(dir / "ck_init");
  for (const auto& [name, value] : init_ck.params) {
    const auto param_file = moodnet::checkpoint_param_path(dir / "ck_frozen", name);
    EXPECT_EQ(slurp(param_file), slurp(moodnet::checkpoint_param_path(dir / "ck_init", name)))
        << name;
  }

  // The optimizer still advanced even though nothing moved.
  const auto frozen_ck = moodnet::load_checkpoint<double>(dir / "ck_frozen");
  EXPECT_GT(frozen_ck.adam.t, 0);
}

TEST(TrainTest, ZeroEpochsLeavesTheInitialCheckpoint) {
  testio::TempDir dir;
  const DatasetManifest m = make_dataset(dir / "data", 8, false);
  RunConfig run = tiny_run();
  run.optimizer.epochs = 0;

  const TrainOutcome out = moodnet::train_model<double>(run, m, dir / "ck");
  EXPECT_EQ(out.epochs_run, 0);
  EXPECT_TRUE(out.log.empty());

  const auto ckpt = moodnet::load_checkpoint<double>(dir / "ck");
  EXPECT_EQ(ckpt.epoch, 0);
  EXPECT_EQ(ckpt.adam.t, 0);

  const auto lines = read_lines(dir / "ck" / "train_log.csv");
  ASSERT_EQ(lines.size(), 1u);
  EXPECT_EQ(lines[0], "epoch,loss,val_macro_f1");
}

TEST(TrainTest, EarlyStopTriggersOnTrainF1) {
  testio::TempDir dir;
  const DatasetManifest m = make_dataset(dir / "data", 20, false);
  RunConfig run = tiny_run();
  run.optimizer.epochs = 60;
  run.optimizer.early_stop_train_f1 = 0.95;

  const TrainOutcome out = moodnet::train_model<double>(run, m, dir / "ck");
  EXPECT_TRUE(out.early_stopped);
  EXPECT_LT(out.epochs_run, 60);

  const auto ckpt = moodnet::load_checkpoint<double>(dir / "ck");
  moodnet::Model<double> model(ckpt.config);
  const auto report = moodnet::evaluate_model(model, ckpt.params, m, Split::kTrain);
  EXPECT_GE(report.macro_f1, 0.95);
}

TEST(TrainTest, RejectsManifestsWithoutTrainRecords) {
  testio::TempDir dir;
  DatasetManifest m = make_dataset(dir / "data", 5, false);
  for (auto& rec : m.records) rec.split = Split::kVal;
  EXPECT_THROW(moodnet::train_model<double>(tiny_run(), m, dir / "ck"), InputError);
}

TEST(TrainTest, RejectsRecordsMissingAnEnabledModality) {
  testio::TempDir dir;
  DatasetManifest m = make_dataset(dir / "data", 5, false);
  m.records[2].audio_feat.clear();
  m.records[2].audio_path.clear();
  try {
    moodnet::train_model<double>(tiny_run(), m, dir / "ck");
    FAIL() << "expected InputError";
  } catch (const InputError& e) {
    EXPECT_NE(std::string(e.what()).find("clip2"), std::string::npos);
  }
}

TEST(TrainTest, NanFeaturesTripTheGradientGuard) {
  // A NaN cell vanishes through ReLU in the forward pass (NaN > 0 is false,
  // so the loss stays finite) but still poisons the conv kernel gradient via
  // input * dz products; the optimizer's finiteness check has to catch it.
  testio::TempDir dir;
  DatasetManifest m = make_dataset(dir / "data", 6, false);
  Tensor<float> bad({8, 12, 1});
  bad[0] = std::numeric_limits<float>::quiet_NaN();
  moodnet::write_tensor(dir / "data" / "clip3.mnt", bad);

  RunConfig run = tiny_run();
  run.optimizer.epochs = 1;
  try {
    moodnet::train_model<double>(run, m, dir / "ck");
    FAIL() << "expected TrainingError";
  } catch (const TrainingError& e) {
    EXPECT_NE(std::string(e.what()).find("non-finite"), std::string::npos);
  }
}

TEST(TrainTest, EvaluateFiltersBySplit) {
  testio::TempDir dir;
  const DatasetManifest m = make_dataset(dir / "data", 15, true);
  int val_count = 0;
  for (const auto& rec : m.records) val_count += rec.split == Split::kVal ? 1 : 0;
  ASSERT_GT(val_count, 0);

  const ModelConfig cfg = tiny_run().model;
  Model<double> model(cfg);
  const auto params = model.init_params();

  const auto all = moodnet::evaluate_model(model, params, m);
  EXPECT_EQ(all.samples, 15);
  const auto val = moodnet::evaluate_model(model, params, m, Split::kVal);
  EXPECT_EQ(val.samples, val_count);
  const auto train = moodnet::evaluate_model(model, params, m, Split::kTrain);
  EXPECT_EQ(train.samples, 15 - val_count);
}

TEST(TrainTest, SinglePrecisionTrainingRuns) {
  testio::TempDir dir;
  const DatasetManifest m = make_dataset(dir / "data", 10, false);
  RunConfig run = tiny_run();
  run.optimizer.epochs = 2;
  run.precision = moodnet::Precision::kSingle;

  const TrainOutcome out = moodnet::train_model<float>(run, m, dir / "ck");
  ASSERT_EQ(out.log.size(), 2u);
  EXPECT_TRUE(std::isfinite(out.log.back().loss));
  const auto ckpt = moodnet::load_checkpoint<float>(dir / "ck");
  EXPECT_EQ(ckpt.epoch, 2);
}
