// painbvp: synth | ingest | extract | train-eval | importance | stats
#include <CLI11.hpp>
#include <json.hpp>
#include <spdlog/sinks/stdout_color_sinks.h>
#include <spdlog/spdlog.h>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>

#include "painbvp/config.hpp"
#include "painbvp/error.hpp"
#include "painbvp/extraction.hpp"
#include "painbvp/io.hpp"
#include "painbvp/parallel.hpp"
#include "painbvp/stats.hpp"
#include "painbvp/study.hpp"
#include "painbvp/synth.hpp"

namespace fs = std::filesystem;
using namespace painbvp;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kData = 2, kRuntime = 3 };

int exit_code_for(ErrorCode code) {
  switch (code) {
    case ErrorCode::kInvalidConfiguration:
    case ErrorCode::kInvalidParameter:
      return kUsage;
    case ErrorCode::kInvalidInput:
    case ErrorCode::kIo:
    case ErrorCode::kInsufficientData:
    case ErrorCode::kDegenerateInput:
    case ErrorCode::kCannotOversample:
    case ErrorCode::kUndefinedClass:
    case ErrorCode::kUndefinedStatistic:
      return kData;
    default:
      return kRuntime;
  }
}

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> task;
  std::optional<std::string> model;
  std::string out;
  std::optional<std::size_t> threads;
};

void add_common(CLI::App* cmd, CommonFlags& f, bool with_task, bool with_model) {
  cmd->add_option("--config", f.config, "JSON run configuration")->check(CLI::ExistingFile);
  cmd->add_option("--seed", f.seed, "master seed (overrides the config)");
  if (with_task) cmd->add_option("--task", f.task, "NP-HP, LP-MP-HP, ..., regression, or 'all'");
  if (with_model) cmd->add_option("--model", f.model, "model family (gbt, rforest, adaboost, logreg, linsvm, ...)");
  cmd->add_option("--threads", f.threads, "worker threads (0 = hardware)");
}

/// Flag > config file > built-in default.
RunConfig effective_config(const CommonFlags& f) {
  RunConfig c = f.config.empty() ? RunConfig{} : load_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.task) c.task = *f.task;
  if (f.model) c.model.family = learn::family_from_string(*f.model);
  if (f.threads) c.threads = *f.threads;
  validate(c);
  set_num_threads(c.threads);
  return c;
}

struct Loaded {
  std::vector<SubjectRecording> recordings;
  std::vector<std::pair<std::string, std::string>> rejects;  // subject, reason
};

Loaded ingest(const fs::path& manifest_path, const RunConfig& config) {
  const Manifest manifest = read_manifest(manifest_path);
  Loaded out;
  for (const auto& e : manifest.entries) {
    try {
      SubjectRecording rec{e.subject_id, read_recording_csv(e.recording), read_labels_csv(e.labels)};
      validate_recording(rec, config.extraction.epoch_spacing_s);
      out.recordings.push_back(std::move(rec));
    } catch (const Error& err) {
      if (exit_code_for(err.code()) != kData) throw;
      out.rejects.emplace_back(e.subject_id, err.what());
    }
  }
  return out;
}

void print_ingest_summary(const Loaded& l) {
  std::map<int, std::size_t> histogram;
  double total_s = 0.0;
  std::printf("subjects ingested: %zu\nrejected: %zu\n", l.recordings.size(), l.rejects.size());
  for (const auto& r : l.recordings) {
    total_s += r.bvp.duration_s();
    for (const auto& e : r.epochs) ++histogram[e.pain_score];
    std::printf("  %s  %.3f s  %.6g Hz  %zu epochs\n", r.subject_id.c_str(), r.bvp.duration_s(),
                r.bvp.sample_rate_hz(), r.epochs.size());
  }
  std::printf("total duration: %.3f s\nscore histogram:", total_s);
  for (const auto& [score, n] : histogram) std::printf(" %d:%zu", score, n);
  std::printf("\n");
  for (const auto& [id, why] : l.rejects) std::printf("rejected %s: %s\n", id.c_str(), why.c_str());
}

int cmd_synth(const CommonFlags& f, std::optional<std::size_t> subjects) {
  RunConfig c = effective_config(f);
  if (subjects) c.n_subjects = *subjects;
  if (f.out.empty()) throw Error(ErrorCode::kInvalidConfiguration, "--out directory is required");
  const fs::path dir(f.out);
  fs::create_directories(dir);
  const auto cohort = generate_cohort(c.n_subjects, c.synth, c.seed);
  Manifest manifest;
  for (const auto& rec : cohort) {
    const fs::path bvp = dir / (rec.subject_id + "_bvp.csv");
    const fs::path labels = dir / (rec.subject_id + "_labels.csv");
    write_recording_csv(bvp, rec.bvp);
    write_labels_csv(labels, rec.epochs);
    manifest.entries.push_back({rec.subject_id, bvp, labels});
  }
  write_manifest(dir / "manifest.csv", manifest);
  write_text_file(dir / "config.json", config_to_json(c) + "\n");
  std::printf("wrote %zu subjects to %s\n", cohort.size(), dir.string().c_str());
  return kOk;
}

int cmd_ingest(const CommonFlags& f, const std::string& manifest) {
  const RunConfig c = effective_config(f);
  const Loaded l = ingest(manifest, c);
  print_ingest_summary(l);
  if (!f.out.empty()) {
    nlohmann::json j;
    j["subjects"] = l.recordings.size();
    j["rejected"] = nlohmann::json::array();
    for (const auto& [id, why] : l.rejects) j["rejected"].push_back({{"subject_id", id}, {"reason", why}});
    j["config"] = nlohmann::json::parse(config_to_json(c));
    write_text_file(f.out, j.dump(2) + "\n");
  }
  return l.rejects.empty() ? kOk : kData;
}

int cmd_extract(const CommonFlags& f, const std::string& manifest) {
  const RunConfig c = effective_config(f);
  if (f.out.empty()) throw Error(ErrorCode::kInvalidConfiguration, "--out feature table path is required");
  const Loaded l = ingest(manifest, c);
  for (const auto& [id, why] : l.rejects) spdlog::warn("rejected {}: {}", id, why);
  if (l.recordings.empty()) throw Error(ErrorCode::kInvalidInput, "no valid recordings to extract");
  std::vector<SubjectExtraction> summaries;
  const Dataset ds = build_dataset(l.recordings, c.extraction, &summaries);
  for (const auto& s : summaries) {
    if (s.windows_dropped > 0 && s.windows_dropped < s.windows_total) {
      spdlog::info("{}: {} of {} windows dropped", s.subject_id, s.windows_dropped, s.windows_total);
    }
  }
  write_feature_table(f.out, ds);
  std::printf("wrote %zu rows x %zu features to %s\n", ds.size(), kFeatureCount, f.out.c_str());
  return kOk;
}

std::vector<std::string> class_names(const ConfusionMatrix& cm) {
  std::vector<std::string> names;
  for (int c : cm.classes()) names.emplace_back(to_string(static_cast<PainState>(c)));
  return names;
}

void write_study(const StudyResult& r, const RunConfig& c, const fs::path& dir) {
  fs::create_directories(dir);
  write_text_file(dir / "report.json", report_json(r, c));
  const EvalReport& e = r.report;
  if (e.pooled_confusion) {
    write_text_file(dir / "confusion_pooled.csv", confusion_csv(*e.pooled_confusion, class_names(*e.pooled_confusion)));
  }
  for (std::size_t k = 0; k < e.folds.size(); ++k) {
    if (e.folds[k].confusion) {
      const auto& cm = *e.folds[k].confusion;
      write_text_file(dir / ("confusion_fold" + std::to_string(k) + ".csv"), confusion_csv(cm, class_names(cm)));
    }
  }
}

int cmd_train_eval(const CommonFlags& f, const std::string& features) {
  const RunConfig c = effective_config(f);
  if (f.out.empty()) throw Error(ErrorCode::kInvalidConfiguration, "--out directory is required");
  const Dataset ds = prepare_dataset(read_feature_table(features), c);
  std::vector<Task> tasks = c.task == "all" ? standard_tasks() : std::vector<Task>{parse_task(c.task)};
  for (const Task& t : tasks) {
    const TaskData data = select_task(ds, t, c.cv.k);
    const StudyResult r = run_task(data, t, c);
    const fs::path dir = tasks.size() > 1 ? fs::path(f.out) / t.name : fs::path(f.out);
    write_study(r, c, dir);
    std::printf("%s [%s]\n", t.name.c_str(), std::string(learn::to_string(r.spec.family)).c_str());
    for (const auto& [name, s] : r.report.summary) std::printf("  %-18s %s\n", name.c_str(), s.formatted.c_str());
  }
  return kOk;
}

int cmd_importance(const CommonFlags& f, const std::string& features) {
  RunConfig c = effective_config(f);
  if (f.task) c.importance_task = *f.task;
  if (f.out.empty()) throw Error(ErrorCode::kInvalidConfiguration, "--out directory is required");
  const Dataset ds = prepare_dataset(read_feature_table(features), c);
  const Task t = parse_task(c.importance_task);
  if (t.kind != TaskKind::kClassification) {
    throw Error(ErrorCode::kInvalidConfiguration, "importance needs a classification task");
  }
  const ImportanceResult r = fold_importance(select_task(ds, t, c.cv.k), t, c);
  const fs::path dir(f.out);
  fs::create_directories(dir);
  write_text_file(dir / "importance.csv", importance_csv(r, c.importance_threshold));
  std::string folds = "fold,feature,importance\n";
  for (std::size_t k = 0; k < r.per_fold.size(); ++k) {
    for (std::size_t j = 0; j < kFeatureCount; ++j) {
      folds += std::to_string(k) + "," + std::string(feature_names()[j]) + "," + format_double(r.per_fold[k][j]) + "\n";
    }
  }
  write_text_file(dir / "importance_folds.csv", folds);
  nlohmann::json meta = {{"task", t.name},
                         {"threshold", c.importance_threshold},
                         {"config", nlohmann::json::parse(config_to_json(c))}};
  write_text_file(dir / "importance.json", meta.dump(2) + "\n");
  std::printf("top features (importance > %g) for %s:\n", c.importance_threshold, t.name.c_str());
  for (std::size_t j : r.order) {
    if (r.mean[j] <= c.importance_threshold) break;
    std::printf("  %-26s %.4f\n", std::string(feature_names()[j]).c_str(), r.mean[j]);
  }
  return kOk;
}

int cmd_stats(const CommonFlags& f, const std::string& features, std::vector<std::string> names) {
  const RunConfig c = effective_config(f);
  if (f.out.empty()) throw Error(ErrorCode::kInvalidConfiguration, "--out directory is required");
  if (names.empty()) names = c.stats_features;
  const Dataset ds = prepare_dataset(read_feature_table(features), c);
  std::vector<FeaturePainAnalysis> analyses;
  for (const auto& n : names) analyses.push_back(feature_pain_analysis(ds, n));
  const fs::path dir(f.out);
  fs::create_directories(dir);
  write_text_file(dir / "dunn.csv", dunn_csv(analyses));
  nlohmann::json j;
  j["p_value_default"] = "unadjusted";
  j["p_adjustment"] = "bonferroni";
  j["normality_test"] = "kolmogorov-smirnov, normal with estimated mean and std (parameters-estimated)";
  j["features"] = nlohmann::json::array();
  for (const auto& a : analyses) {
    nlohmann::json fa;
    fa["feature"] = a.feature;
    fa["degenerate"] = a.degenerate;
    std::vector<std::string> states;
    for (auto s : a.states) states.emplace_back(to_string(s));
    fa["states"] = states;
    fa["counts"] = a.counts;
    if (a.normality) {
      fa["ks"] = {{"statistic", a.normality->statistic},
                  {"p_value", a.normality->p_value},
                  {"params_estimated", a.normality->params_estimated}};
    }
    if (a.kruskal) fa["kruskal_wallis"] = {{"h", a.kruskal->h}, {"p_value", a.kruskal->p_value}, {"df", a.kruskal->df}};
    j["features"].push_back(fa);
  }
  j["config"] = nlohmann::json::parse(config_to_json(c));
  write_text_file(dir / "stats.json", j.dump(2) + "\n");
  for (const auto& a : analyses) {
    std::printf("%s\n", a.feature.c_str());
    for (const auto& p : a.pairs) {
      std::printf("  %s-%s  z=%+.4f  p=%.4g  p_adj=%.4g%s\n", std::string(to_string(p.a)).c_str(),
                  std::string(to_string(p.b)).c_str(), p.dunn.z, p.dunn.p_value, p.dunn.p_adjusted,
                  p.dunn.significant_at_0_05 ? "  *" : "");
    }
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  auto logger = spdlog::stderr_color_mt("painbvp");
  spdlog::set_default_logger(logger);
  spdlog::set_pattern("[%l] %v");

  CLI::App app{"BVP pain-assessment pipeline"};
  app.require_subcommand(1);
  std::string log_level = "warn";
  app.add_option("--log-level", log_level, "trace, debug, info, warn, error, off");

  CommonFlags f;
  std::string manifest, features;
  std::vector<std::string> stat_features;
  std::optional<std::size_t> subjects;

  auto* synth = app.add_subcommand("synth", "generate a synthetic cohort with a manifest");
  add_common(synth, f, false, false);
  synth->add_option("--out", f.out, "output directory")->required();
  synth->add_option("--subjects", subjects, "number of subjects (overrides the config)");

  auto* ing = app.add_subcommand("ingest", "validate recordings listed in a manifest");
  add_common(ing, f, false, false);
  ing->add_option("--manifest", manifest, "manifest CSV")->required()->check(CLI::ExistingFile);
  ing->add_option("--out", f.out, "optional JSON summary path");

  auto* ext = app.add_subcommand("extract", "compute the 44-feature table");
  add_common(ext, f, false, false);
  ext->add_option("--manifest", manifest, "manifest CSV")->required()->check(CLI::ExistingFile);
  ext->add_option("--out", f.out, "feature table CSV")->required();

  auto* tre = app.add_subcommand("train-eval", "tuning split, grid search and cross-validated evaluation");
  add_common(tre, f, true, true);
  tre->add_option("--features", features, "feature table CSV")->required()->check(CLI::ExistingFile);
  tre->add_option("--out", f.out, "report directory")->required();

  auto* imp = app.add_subcommand("importance", "extra-trees importance averaged over folds");
  add_common(imp, f, true, false);
  imp->add_option("--features", features, "feature table CSV")->required()->check(CLI::ExistingFile);
  imp->add_option("--out", f.out, "output directory")->required();

  auto* sts = app.add_subcommand("stats", "Dunn's test of features across pain states");
  add_common(sts, f, false, false);
  sts->add_option("--features", features, "feature table CSV")->required()->check(CLI::ExistingFile);
  sts->add_option("--feature", stat_features, "feature name (repeatable)");
  sts->add_option("--out", f.out, "output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }
  spdlog::set_level(spdlog::level::from_str(log_level));

  try {
    if (*synth) return cmd_synth(f, subjects);
    if (*ing) return cmd_ingest(f, manifest);
    if (*ext) return cmd_extract(f, manifest);
    if (*tre) return cmd_train_eval(f, features);
    if (*imp) return cmd_importance(f, features);
    if (*sts) return cmd_stats(f, features, stat_features);
  } catch (const Error& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return exit_code_for(e.code());
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
