#pragma once

#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "painbvp/dataset.hpp"

namespace painbvp {

/// Shortest decimal text that parses back to the same double.
std::string format_double(double value);

/// Recording CSV: header `time_s,bvp`, strictly increasing time at a fixed
/// step. Errors carry `file:line`.
SampledSignal read_recording_csv(const std::filesystem::path& path);
void write_recording_csv(const std::filesystem::path& path, const SampledSignal& signal);

/// Labels CSV: header `epoch_start_s,pain_score`, integer scores 0..10.
std::vector<EpochReport> read_labels_csv(const std::filesystem::path& path);
void write_labels_csv(const std::filesystem::path& path, std::span<const EpochReport> epochs);

struct ManifestEntry {
  std::string subject_id;
  std::filesystem::path recording;
  std::filesystem::path labels;
};

struct Manifest {
  int schema_version = 1;
  std::vector<ManifestEntry> entries;
};

/// One line per subject `subject_id,recording_path,labels_path`, after an
/// optional `# manifest_version=N` line and optional header. Relative paths
/// resolve against the manifest's directory. Subject ids must be unique.
Manifest read_manifest(const std::filesystem::path& path);
/// Paths under the manifest's directory are written relative to it.
void write_manifest(const std::filesystem::path& path, const Manifest& manifest);

inline constexpr std::array<std::string_view, 5> kFeatureTableMetaColumns = {
    "subject_id", "window_start_s", "pain_score", "pain_state", "is_synthetic"};

/// Feature table: metadata columns then the 44 canonical feature names.
void write_feature_table(const std::filesystem::path& path, const Dataset& ds);
Dataset read_feature_table(const std::filesystem::path& path);

void write_text_file(const std::filesystem::path& path, std::string_view text);
std::string read_text_file(const std::filesystem::path& path);

}  // namespace painbvp
