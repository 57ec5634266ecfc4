#include "painbvp/io.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

#include "painbvp/error.hpp"

namespace painbvp {

namespace fs = std::filesystem;

std::string format_double(double value) {
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), value);
  return std::string(buf, res.ptr);
}

namespace {

/// Line reader that knows its file name and line number for messages.
class CsvReader {
 public:
  explicit CsvReader(const fs::path& path) : path_(path), in_(path) {
    if (!in_) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  }

  bool next(std::string& line) {
    while (std::getline(in_, line)) {
      ++line_no_;
      if (!line.empty() && line.back() == '\r') line.pop_back();
      if (!line.empty()) return true;
    }
    return false;
  }

  [[noreturn]] void fail(const std::string& msg) const {
    throw Error(ErrorCode::kInvalidInput, path_.string() + ":" + std::to_string(line_no_) + ": " + msg);
  }

  std::vector<std::string_view> split(std::string_view line, std::size_t expected) const {
    std::vector<std::string_view> out;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      out.push_back(line.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start));
      if (comma == std::string_view::npos) break;
      start = comma + 1;
    }
    if (expected != 0 && out.size() != expected) {
      fail("expected " + std::to_string(expected) + " fields, found " + std::to_string(out.size()));
    }
    return out;
  }

  double to_double(std::string_view field, std::string_view what) const {
    double v = 0.0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size() || field.empty()) {
      fail("malformed " + std::string(what) + " '" + std::string(field) + "'");
    }
    if (!std::isfinite(v)) fail("non-finite " + std::string(what));
    return v;
  }

  long to_int(std::string_view field, std::string_view what) const {
    long v = 0;
    const auto res = std::from_chars(field.data(), field.data() + field.size(), v);
    if (res.ec != std::errc() || res.ptr != field.data() + field.size() || field.empty()) {
      fail("malformed " + std::string(what) + " '" + std::string(field) + "' (integer expected)");
    }
    return v;
  }

  void expect_header(std::string_view expected) {
    std::string line;
    if (!next(line)) fail("empty file, expected header '" + std::string(expected) + "'");
    if (line != expected) fail("expected header '" + std::string(expected) + "', found '" + line + "'");
  }

 private:
  fs::path path_;
  std::ifstream in_;
  std::size_t line_no_ = 0;
};

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::kIo, "cannot write '" + path.string() + "'");
  return out;
}

}  // namespace

SampledSignal read_recording_csv(const fs::path& path) {
  CsvReader reader(path);
  reader.expect_header("time_s,bvp");
  std::vector<double> times, values;
  std::string line;
  while (reader.next(line)) {
    const auto f = reader.split(line, 2);
    const double t = reader.to_double(f[0], "time_s");
    const double v = reader.to_double(f[1], "bvp");
    if (!times.empty()) {
      const double dt = t - times.back();
      if (!(dt > 0.0)) reader.fail("time is not strictly increasing");
      if (times.size() >= 2) {
        const double step = times[1] - times[0];
        if (std::abs(dt - step) > std::max(1e-9, 0.01 * step)) reader.fail("time step is not uniform");
      }
    }
    times.push_back(t);
    values.push_back(v);
  }
  if (times.size() < 2) reader.fail("recording needs at least two samples");
  double fs_hz = static_cast<double>(times.size() - 1) / (times.back() - times.front());
  // Timestamps written in decimal carry rounding; snap to an integer rate.
  if (std::abs(fs_hz - std::round(fs_hz)) < 1e-6 * fs_hz) fs_hz = std::round(fs_hz);
  return SampledSignal(fs_hz, std::move(values), times.front());
}

void write_recording_csv(const fs::path& path, const SampledSignal& signal) {
  std::ofstream out = open_out(path);
  std::string buf = "time_s,bvp\n";
  const auto samples = signal.samples();
  for (std::size_t i = 0; i < samples.size(); ++i) {
    buf += format_double(signal.time_at(i));
    buf += ',';
    buf += format_double(samples[i]);
    buf += '\n';
  }
  out << buf;
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

std::vector<EpochReport> read_labels_csv(const fs::path& path) {
  CsvReader reader(path);
  reader.expect_header("epoch_start_s,pain_score");
  std::vector<EpochReport> epochs;
  std::string line;
  while (reader.next(line)) {
    const auto f = reader.split(line, 2);
    const double start = reader.to_double(f[0], "epoch_start_s");
    const long score = reader.to_int(f[1], "pain_score");
    if (score < 0 || score > 10) reader.fail("pain score " + std::to_string(score) + " outside the 0-10 range");
    if (!epochs.empty() && !(start > epochs.back().start_s)) reader.fail("epoch starts are not ascending");
    epochs.push_back({start, static_cast<int>(score)});
  }
  if (epochs.empty()) reader.fail("labels file has no epochs");
  return epochs;
}

void write_labels_csv(const fs::path& path, std::span<const EpochReport> epochs) {
  std::ofstream out = open_out(path);
  out << "epoch_start_s,pain_score\n";
  for (const auto& e : epochs) out << format_double(e.start_s) << ',' << e.pain_score << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

Manifest read_manifest(const fs::path& path) {
  CsvReader reader(path);
  Manifest m;
  const fs::path base = path.parent_path();
  std::set<std::string> seen;
  std::string line;
  bool first = true;
  while (reader.next(line)) {
    if (line.rfind('#', 0) == 0) {
      const std::string key = "# manifest_version=";
      if (line.rfind(key, 0) == 0) {
        const long v = reader.to_int(std::string_view(line).substr(key.size()), "manifest version");
        if (v != 1) reader.fail("unsupported manifest version " + std::to_string(v));
        m.schema_version = static_cast<int>(v);
      }
      continue;
    }
    if (first && line == "subject_id,recording_path,labels_path") {
      first = false;
      continue;
    }
    first = false;
    const auto f = reader.split(line, 3);
    if (f[0].empty()) reader.fail("empty subject id");
    if (!seen.insert(std::string(f[0])).second) reader.fail("duplicate subject id '" + std::string(f[0]) + "'");
    auto resolve = [&](std::string_view p) {
      fs::path q{std::string(p)};
      return q.is_absolute() ? q : base / q;
    };
    m.entries.push_back({std::string(f[0]), resolve(f[1]), resolve(f[2])});
  }
  if (m.entries.empty()) {
    throw Error(ErrorCode::kInvalidConfiguration, "manifest '" + path.string() + "' lists no subjects");
  }
  return m;
}

void write_manifest(const fs::path& path, const Manifest& manifest) {
  std::ofstream out = open_out(path);
  const fs::path base = path.parent_path();
  auto rel = [&](const fs::path& p) {
    const fs::path r = p.lexically_relative(base.empty() ? fs::path(".") : base);
    // Paths outside the manifest's directory stay as given.
    if (r.empty() || *r.begin() == "..") return p.generic_string();
    return r.generic_string();
  };
  out << "# manifest_version=" << manifest.schema_version << "\n";
  out << "subject_id,recording_path,labels_path\n";
  for (const auto& e : manifest.entries) out << e.subject_id << ',' << rel(e.recording) << ',' << rel(e.labels) << '\n';
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

void write_feature_table(const fs::path& path, const Dataset& ds) {
  std::ofstream out = open_out(path);
  std::string buf;
  for (auto c : kFeatureTableMetaColumns) {
    buf += c;
    buf += ',';
  }
  for (std::size_t j = 0; j < ds.column_names.size(); ++j) {
    buf += ds.column_names[j];
    buf += j + 1 < ds.column_names.size() ? ',' : '\n';
  }
  for (const auto& row : ds.rows) {
    buf += row.subject_id + ',' + format_double(row.window_start_s) + ',' + std::to_string(row.pain_score) + ',' +
           std::string(to_string(row.pain_state)) + (row.is_synthetic ? ",1" : ",0");
    for (double v : row.features) {
      buf += ',';
      buf += format_double(v);
    }
    buf += '\n';
  }
  out << buf;
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

Dataset read_feature_table(const fs::path& path) {
  CsvReader reader(path);
  std::string expected;
  for (auto c : kFeatureTableMetaColumns) expected += std::string(c) + ",";
  for (std::size_t j = 0; j < kFeatureCount; ++j) {
    expected += std::string(feature_names()[j]) + (j + 1 < kFeatureCount ? "," : "");
  }
  reader.expect_header(expected);
  Dataset ds;
  std::string line;
  const std::size_t meta = kFeatureTableMetaColumns.size();
  while (reader.next(line)) {
    const auto f = reader.split(line, meta + kFeatureCount);
    LabeledWindow w;
    w.subject_id = std::string(f[0]);
    if (w.subject_id.empty()) reader.fail("empty subject id");
    w.window_start_s = reader.to_double(f[1], "window_start_s");
    const long score = reader.to_int(f[2], "pain_score");
    if (score < 0 || score > 10) reader.fail("pain score " + std::to_string(score) + " outside the 0-10 range");
    w.pain_score = static_cast<int>(score);
    w.pain_state = bin_pain(w.pain_score);
    PainState stated = PainState::kNP;
    try {
      stated = pain_state_from_string(f[3]);
    } catch (const Error&) {
      reader.fail("unknown pain state '" + std::string(f[3]) + "'");
    }
    if (stated != w.pain_state) reader.fail("pain_state does not match pain_score");
    if (f[4] != "0" && f[4] != "1") reader.fail("is_synthetic must be 0 or 1");
    w.is_synthetic = f[4] == "1";
    for (std::size_t j = 0; j < kFeatureCount; ++j) w.features[j] = reader.to_double(f[meta + j], feature_names()[j]);
    ds.rows.push_back(std::move(w));
  }
  return ds;
}

void write_text_file(const fs::path& path, std::string_view text) {
  std::ofstream out = open_out(path);
  out << text;
  if (!out) throw Error(ErrorCode::kIo, "failed writing '" + path.string() + "'");
}

std::string read_text_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIo, "cannot open '" + path.string() + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace painbvp
