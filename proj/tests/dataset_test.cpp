#include <gtest/gtest.h>

#include <string>

#include "moodnet/dataset.hpp"
#include "moodnet/errors.hpp"
#include "support/testio.hpp"

using moodnet::ConfigError;
using moodnet::DatasetManifest;
using moodnet::InputError;
using moodnet::IoError;
using moodnet::Split;

namespace {

std::string header_line(int lines, int words) {
  return "{\"lines_max\": " + std::to_string(lines) + ", \"words_max\": " + std::to_string(words) +
         "}\n";
}

std::string record_line(const std::string& clip, const std::string& audio,
                        const std::string& lyrics, const std::string& label,
                        const std::string& split) {
  return "{\"clip_id\": \"" + clip + "\", \"audio_feat\": \"" + audio + "\", \"lyrics_feat\": \"" +
         lyrics + "\", \"label\": \"" + label + "\", \"split\": \"" + split + "\"}\n";
}

}  // namespace

TEST(LabelTest, RomanNumeralsMapToIndices) {
  EXPECT_EQ(moodnet::label_to_index("I"), 0);
  EXPECT_EQ(moodnet::label_to_index("II"), 1);
  EXPECT_EQ(moodnet::label_to_index("III"), 2);
  EXPECT_EQ(moodnet::label_to_index("IV"), 3);
  EXPECT_EQ(moodnet::label_to_index("V"), 4);
  EXPECT_STREQ(moodnet::index_to_label(0), "I");
  EXPECT_STREQ(moodnet::index_to_label(4), "V");
  EXPECT_THROW(moodnet::label_to_index("VI"), InputError);
  EXPECT_THROW(moodnet::label_to_index("i"), InputError);
  EXPECT_THROW(moodnet::index_to_label(5), InputError);
  EXPECT_THROW(moodnet::index_to_label(-1), InputError);
}

TEST(LabelTest, SplitNamesRoundTrip) {
  EXPECT_EQ(moodnet::split_from_name("train"), Split::kTrain);
  EXPECT_EQ(moodnet::split_from_name("val"), Split::kVal);
  EXPECT_STREQ(moodnet::split_name(Split::kTrain), "train");
  EXPECT_STREQ(moodnet::split_name(Split::kVal), "val");
  EXPECT_THROW(moodnet::split_from_name("test"), InputError);
}

TEST(ManifestTest, LoadsHeaderAndRecords) {
  testio::TempDir dir;
  testio::write_file(dir / "a.mnt", "x");
  testio::write_file(dir / "b.mnt", "x");
  testio::write_file(dir / "m.jsonl", header_line(7, 20) +
                                          record_line("clip1", "a.mnt", "b.mnt", "III", "train") +
                                          record_line("clip2", "a.mnt", "", "I", "val"));
  const DatasetManifest m = moodnet::load_dataset_manifest(dir / "m.jsonl");
  EXPECT_EQ(m.lines_max, 7);
  EXPECT_EQ(m.words_max, 20);
  ASSERT_EQ(m.records.size(), 2u);
  EXPECT_EQ(m.records[0].clip_id, "clip1");
  EXPECT_EQ(m.records[0].label, 2);
  EXPECT_EQ(m.records[0].split, Split::kTrain);
  EXPECT_EQ(m.records[0].audio_path, dir / "a.mnt");
  EXPECT_EQ(m.records[1].split, Split::kVal);
  EXPECT_TRUE(m.records[1].lyrics_path.empty());
}

TEST(ManifestTest, SkipsBlankLinesAndResolvesRelativePaths) {
  testio::TempDir dir;
  std::filesystem::create_directories(dir / "sub");
  testio::write_file(dir / "sub" / "feat.mnt", "x");
  testio::write_file(dir / "m.jsonl", "\n" + header_line(4, 4) + "\n" +
                                          record_line("c", "sub/feat.mnt", "", "V", "train") + "\n");
  const DatasetManifest m = moodnet::load_dataset_manifest(dir / "m.jsonl");
  ASSERT_EQ(m.records.size(), 1u);
  EXPECT_EQ(m.records[0].audio_path, dir / "sub" / "feat.mnt");
}

TEST(ManifestTest, RejectsStructuralProblems) {
  testio::TempDir dir;
  testio::write_file(dir / "feat.mnt", "x");

  testio::write_file(dir / "noheader.jsonl", record_line("c", "feat.mnt", "", "I", "train"));
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "noheader.jsonl"), IoError);

  testio::write_file(dir / "badjson.jsonl", header_line(4, 4) + "{not json\n");
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "badjson.jsonl"), IoError);

  testio::write_file(dir / "extrakey.jsonl",
                     header_line(4, 4) +
                         "{\"clip_id\": \"c\", \"audio_feat\": \"feat.mnt\", \"lyrics_feat\": \"\", "
                         "\"label\": \"I\", \"split\": \"train\", \"extra\": 1}\n");
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "extrakey.jsonl"), IoError);

  testio::write_file(dir / "missingkey.jsonl",
                     header_line(4, 4) +
                         "{\"clip_id\": \"c\", \"audio_feat\": \"feat.mnt\", \"label\": \"I\", "
                         "\"split\": \"train\"}\n");
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "missingkey.jsonl"), IoError);

  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "absent.jsonl"), IoError);
}

TEST(ManifestTest, RejectsBadFieldValues) {
  testio::TempDir dir;
  testio::write_file(dir / "feat.mnt", "x");

  testio::write_file(dir / "badlabel.jsonl",
                     header_line(4, 4) + record_line("c", "feat.mnt", "", "X", "train"));
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "badlabel.jsonl"), InputError);

  testio::write_file(dir / "badsplit.jsonl",
                     header_line(4, 4) + record_line("c", "feat.mnt", "", "I", "holdout"));
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "badsplit.jsonl"), InputError);

  testio::write_file(dir / "emptyid.jsonl",
                     header_line(4, 4) + record_line("", "feat.mnt", "", "I", "train"));
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "emptyid.jsonl"), InputError);

  testio::write_file(dir / "dup.jsonl", header_line(4, 4) +
                                            record_line("c", "feat.mnt", "", "I", "train") +
                                            record_line("c", "feat.mnt", "", "II", "val"));
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "dup.jsonl"), InputError);

  testio::write_file(dir / "negheader.jsonl",
                     header_line(-1, 4) + record_line("c", "feat.mnt", "", "I", "train"));
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "negheader.jsonl"), IoError);
}

TEST(ManifestTest, RejectsMissingFeatureFiles) {
  testio::TempDir dir;
  testio::write_file(dir / "m.jsonl",
                     header_line(4, 4) + record_line("c", "gone.mnt", "", "I", "train"));
  EXPECT_THROW(moodnet::load_dataset_manifest(dir / "m.jsonl"), IoError);
}

TEST(ManifestTest, SerializeRoundTrips) {
  testio::TempDir dir;
  testio::write_file(dir / "a.mnt", "x");
  testio::write_file(dir / "l.mnt", "x");
  const std::string text = header_line(5, 9) +
                           record_line("clip1", "a.mnt", "l.mnt", "IV", "val") +
                           record_line("clip2", "", "l.mnt", "I", "train");
  testio::write_file(dir / "m.jsonl", text);
  const DatasetManifest m = moodnet::load_dataset_manifest(dir / "m.jsonl");

  const std::string serialized = moodnet::serialize_dataset_manifest(m);
  testio::write_file(dir / "m2.jsonl", serialized);
  const DatasetManifest m2 = moodnet::load_dataset_manifest(dir / "m2.jsonl");
  EXPECT_EQ(m2.lines_max, m.lines_max);
  EXPECT_EQ(m2.words_max, m.words_max);
  ASSERT_EQ(m2.records.size(), m.records.size());
  for (std::size_t i = 0; i < m.records.size(); ++i) {
    EXPECT_EQ(m2.records[i].clip_id, m.records[i].clip_id);
    EXPECT_EQ(m2.records[i].audio_feat, m.records[i].audio_feat);
    EXPECT_EQ(m2.records[i].lyrics_feat, m.records[i].lyrics_feat);
    EXPECT_EQ(m2.records[i].label, m.records[i].label);
    EXPECT_EQ(m2.records[i].split, m.records[i].split);
  }
}

TEST(RawManifestTest, LoadsWithoutHeaderAndAllowsMissingAssets) {
  testio::TempDir dir;
  testio::write_file(dir / "raw.jsonl",
                     "{\"clip_id\": \"c1\", \"audio\": \"c1.wav\", \"lyrics\": \"c1.txt\", "
                     "\"label\": \"II\", \"split\": \"train\"}\n"
                     "{\"clip_id\": \"c2\", \"audio\": \"missing.wav\", \"lyrics\": \"\", "
                     "\"label\": \"V\", \"split\": \"val\"}\n");
  const auto records = moodnet::load_raw_manifest(dir / "raw.jsonl");
  ASSERT_EQ(records.size(), 2u);
  EXPECT_EQ(records[0].clip_id, "c1");
  EXPECT_EQ(records[0].audio_path, dir / "c1.wav");
  EXPECT_EQ(records[1].label, 4);
  EXPECT_TRUE(records[1].lyrics_path.empty());
}

TEST(RawManifestTest, RejectsFeatureManifestShapedRecords) {
  testio::TempDir dir;
  testio::write_file(dir / "raw.jsonl", record_line("c", "a.mnt", "", "I", "train"));
  EXPECT_THROW(moodnet::load_raw_manifest(dir / "raw.jsonl"), IoError);
}

TEST(GridAdoptionTest, ZeroConfigAdoptsManifestGrid) {
  DatasetManifest m;
  m.lines_max = 9;
  m.words_max = 13;
  moodnet::ModelConfig cfg;
  cfg.lines_max = 0;
  cfg.words_max = 0;
  const auto out = moodnet::apply_manifest_grid(cfg, m);
  EXPECT_EQ(out.lines_max, 9);
  EXPECT_EQ(out.words_max, 13);
}

TEST(GridAdoptionTest, NonzeroConfigMustMatchTheManifest) {
  DatasetManifest m;
  m.lines_max = 9;
  m.words_max = 13;
  moodnet::ModelConfig cfg;
  cfg.lines_max = 9;
  cfg.words_max = 13;
  EXPECT_NO_THROW(moodnet::apply_manifest_grid(cfg, m));
  cfg.words_max = 12;
  EXPECT_THROW(moodnet::apply_manifest_grid(cfg, m), ConfigError);
}

TEST(GridAdoptionTest, AudioOnlyConfigIgnoresTheGrid) {
  DatasetManifest m;
  m.lines_max = 2;  // below the 4x4 floor, but lyrics are off
  m.words_max = 2;
  moodnet::ModelConfig cfg;
  cfg.use_lyrics = false;
  cfg.lines_max = 0;
  cfg.words_max = 0;
  const auto out = moodnet::apply_manifest_grid(cfg, m);
  EXPECT_EQ(out.lines_max, 0);
  EXPECT_EQ(out.words_max, 0);
}
