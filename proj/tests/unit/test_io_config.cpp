#include <doctest.h>

#include <filesystem>
#include <fstream>

#include "painbvp/config.hpp"
#include "painbvp/error.hpp"
#include "painbvp/extraction.hpp"
#include "painbvp/io.hpp"
#include "painbvp/synth.hpp"
#include "support.hpp"

using namespace painbvp;
using testing::error_code_of;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / ("painbvp_" + name)) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

void write(const fs::path& p, const std::string& text) { std::ofstream(p) << text; }

SubjectRecording short_recording(std::uint64_t seed) {
  SynthConfig cfg;
  cfg.duration_s = 60.0;
  cfg.epoch_scores = {0, 6, 9};
  cfg.seed = seed;
  return generate_recording(cfg, "S07").recording;
}

}  // namespace

TEST_CASE("format_double round-trips") {
  Rng rng(1);
  for (int i = 0; i < 1000; ++i) {
    const double v = rng.normal() * std::pow(10.0, rng.uniform(-12.0, 12.0));
    CHECK(std::stod(format_double(v)) == v);
  }
  CHECK(format_double(0.5) == "0.5");
}

TEST_CASE("recording and labels CSV round trip") {
  TempDir dir("rec");
  const auto rec = short_recording(2);
  write_recording_csv(dir.path / "bvp.csv", rec.bvp);
  write_labels_csv(dir.path / "labels.csv", rec.epochs);
  const auto back = read_recording_csv(dir.path / "bvp.csv");
  CHECK(back.sample_rate_hz() == rec.bvp.sample_rate_hz());
  CHECK(back.samples() == rec.bvp.samples());
  const auto epochs = read_labels_csv(dir.path / "labels.csv");
  REQUIRE(epochs.size() == rec.epochs.size());
  for (std::size_t i = 0; i < epochs.size(); ++i) {
    CHECK(epochs[i].start_s == rec.epochs[i].start_s);
    CHECK(epochs[i].pain_score == rec.epochs[i].pain_score);
  }
}

TEST_CASE("malformed CSV input names file and line") {
  TempDir dir("bad");
  const auto reject = [&](const std::string& name, const std::string& text, auto reader) {
    write(dir.path / name, text);
    try {
      reader(dir.path / name);
    } catch (const Error& e) {
      CHECK(e.code() == ErrorCode::kInvalidInput);
      return std::string(e.what());
    }
    FAIL("accepted malformed input " << name);
    return std::string();
  };
  const auto rec = [](const fs::path& p) { read_recording_csv(p); };
  const auto lab = [](const fs::path& p) { read_labels_csv(p); };
  CHECK(reject("a.csv", "time_s,bvp\n0,1\n0.5,x\n", rec).find("a.csv:3") != std::string::npos);
  reject("b.csv", "time_s,bvp\n0,1\n0,2\n", rec);
  reject("c.csv", "time_s,bvp\n0,1\n1,2\n3,2\n", rec);
  reject("d.csv", "t,bvp\n0,1\n", rec);
  const auto msg = reject("e.csv", "epoch_start_s,pain_score\n0,0\n20,11\n", lab);
  CHECK(msg.find("e.csv:3") != std::string::npos);
  CHECK(msg.find("outside the 0-10 range") != std::string::npos);
  reject("f.csv", "epoch_start_s,pain_score\n0,2.5\n", lab);
  reject("g.csv", "epoch_start_s,pain_score\n20,0\n0,1\n", lab);
  CHECK(error_code_of([&] { read_recording_csv(dir.path / "missing.csv"); }) == ErrorCode::kIo);
}

TEST_CASE("manifest") {
  TempDir dir("manifest");
  Manifest m;
  m.entries.push_back({"S01", dir.path / "data" / "S01.csv", dir.path / "data" / "S01_labels.csv"});
  m.entries.push_back({"S02", "/abs/S02.csv", "/abs/S02_labels.csv"});
  write_manifest(dir.path / "manifest.csv", m);
  const auto text = read_text_file(dir.path / "manifest.csv");
  CHECK(text.rfind("# manifest_version=1\n", 0) == 0);
  CHECK(text.find("S01,data/S01.csv,data/S01_labels.csv") != std::string::npos);
  const auto back = read_manifest(dir.path / "manifest.csv");
  REQUIRE(back.entries.size() == 2);
  CHECK(back.entries[0].recording == dir.path / "data/S01.csv");
  CHECK(back.entries[1].labels == fs::path("/abs/S02_labels.csv"));

  write(dir.path / "v2.csv", "# manifest_version=2\nS01,a,b\n");
  CHECK(error_code_of([&] { read_manifest(dir.path / "v2.csv"); }) == ErrorCode::kInvalidInput);
  write(dir.path / "dup.csv", "S01,a,b\nS01,c,d\n");
  CHECK(error_code_of([&] { read_manifest(dir.path / "dup.csv"); }) == ErrorCode::kInvalidInput);
  write(dir.path / "empty.csv", "subject_id,recording_path,labels_path\n");
  CHECK(error_code_of([&] { read_manifest(dir.path / "empty.csv"); }) == ErrorCode::kInvalidConfiguration);
}

TEST_CASE("extraction and feature table round trip") {
  TempDir dir("table");
  const std::vector<SubjectRecording> recs{short_recording(3)};
  std::vector<SubjectExtraction> summary;
  Dataset ds = build_dataset(recs, {}, &summary);
  REQUIRE(summary.size() == 1);
  CHECK(summary[0].windows_total == 23);
  CHECK(ds.rows.size() + summary[0].windows_dropped == 23);
  REQUIRE(ds.rows.size() > 10);
  CHECK(ds.column_names.size() == 44);
  for (const auto& row : ds.rows) {
    CHECK(row.subject_id == "S07");
    for (double v : row.features) CHECK(std::isfinite(v));
  }
  ds.rows[1].is_synthetic = true;
  write_feature_table(dir.path / "features.csv", ds);
  const auto back = read_feature_table(dir.path / "features.csv");
  REQUIRE(back.rows.size() == ds.rows.size());
  for (std::size_t i = 0; i < ds.rows.size(); ++i) {
    CHECK(back.rows[i].features == ds.rows[i].features);
    CHECK(back.rows[i].window_start_s == ds.rows[i].window_start_s);
    CHECK(back.rows[i].pain_state == ds.rows[i].pain_state);
    CHECK(back.rows[i].is_synthetic == ds.rows[i].is_synthetic);
  }
  CHECK(build_dataset(recs).rows.size() == ds.rows.size());
}

TEST_CASE("config overlay, serialisation and validation") {
  const RunConfig defaults;
  CHECK_NOTHROW(validate(defaults));
  CHECK(defaults.extraction.filter_cutoff_hz == 8.0);
  CHECK(defaults.extraction.window_s == 5.0);
  CHECK(defaults.extraction.overlap == 0.5);
  CHECK(defaults.cv.k == 5);
  CHECK(defaults.tuning_fraction == 0.16);

  const auto c = config_from_json(R"({"seed": 9, "cv": {"k": 3}, "model": {"family": "rforest"}})");
  CHECK(c.seed == 9);
  CHECK(c.cv.k == 3);
  CHECK(c.model.family == learn::Family::kRandomForest);
  CHECK(c.extraction.window_s == 5.0);

  const auto round = config_from_json(config_to_json(c));
  CHECK(config_to_json(round) == config_to_json(c));

  const auto code = [](const std::string& text) {
    return error_code_of([&] { validate(config_from_json(text)); });
  };
  CHECK(code(R"({"sede": 1})") == ErrorCode::kInvalidConfiguration);
  CHECK(code(R"({"cv": {"k": 1}})") == ErrorCode::kInvalidConfiguration);
  CHECK(code(R"({"extraction": {"overlap": 1.0}})") == ErrorCode::kInvalidConfiguration);
  CHECK(code(R"({"extraction": {"window_s": "five"}})") == ErrorCode::kInvalidConfiguration);
  CHECK(code(R"({"model": {"family": "gbt", "params": {"depth": 3}}})") == ErrorCode::kInvalidConfiguration);
  CHECK(code(R"({"stats": {"features": ["nope"]}})") == ErrorCode::kInvalidConfiguration);
  CHECK(code("{not json") == ErrorCode::kInvalidConfiguration);
  CHECK(error_code_of([] { load_config("/nonexistent/config.json"); }) == ErrorCode::kInvalidConfiguration);

  try {
    validate(config_from_json(R"({"cv": {"tuning_fraction": 1.5}})"));
  } catch (const Error& e) {
    CHECK(std::string(e.what()).find("cv.tuning_fraction") != std::string::npos);
  }
}
