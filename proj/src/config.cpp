#include "painbvp/config.hpp"

#include <json.hpp>

#include <cmath>
#include <set>

#include "painbvp/error.hpp"
#include "painbvp/io.hpp"

namespace painbvp {

namespace {

using nlohmann::json;

[[noreturn]] void bad(const std::string& field, const std::string& msg) {
  throw Error(ErrorCode::kInvalidConfiguration, field + ": " + msg);
}

/// Reads keys of one JSON object into typed fields and rejects leftovers.
class Section {
 public:
  Section(const json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) bad(path_, "expected an object");
  }
  ~Section() noexcept(false) {
    if (std::uncaught_exceptions() > 0) return;
    for (const auto& [key, value] : j_.items()) {
      if (!used_.count(key)) bad(path_.empty() ? key : path_ + "." + key, "unknown key");
    }
  }

  template <typename T>
  void get(const char* key, T& out) {
    used_.insert(key);
    if (!j_.contains(key)) return;
    try {
      out = j_.at(key).get<T>();
    } catch (const json::exception&) {
      bad(name(key), "wrong type");
    }
  }

  const json* child(const char* key) {
    used_.insert(key);
    return j_.contains(key) ? &j_.at(key) : nullptr;
  }

  std::string name(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

 private:
  const json& j_;
  std::string path_;
  std::set<std::string> used_;
};

void read_extraction(const json& j, ExtractionConfig& e) {
  Section s(j, "extraction");
  s.get("filter_cutoff_hz", e.filter_cutoff_hz);
  s.get("filter_order", e.filter_order);
  s.get("window_s", e.window_s);
  s.get("overlap", e.overlap);
  s.get("hrv_context_s", e.hrv_context_s);
  s.get("epoch_spacing_s", e.epoch_spacing_s);
  if (const json* b = s.child("beats")) {
    Section bs(*b, "extraction.beats");
    bs.get("window_s", e.beats.window_s);
    bs.get("std_factor", e.beats.std_factor);
    bs.get("refractory_s", e.beats.refractory_s);
    bs.get("min_std_fraction", e.beats.min_std_fraction);
  }
  if (const json* g = s.child("ibi_gate")) {
    Section gs(*g, "extraction.ibi_gate");
    gs.get("enabled", e.gate.enabled);
    gs.get("min_ms", e.gate.min_ms);
    gs.get("max_ms", e.gate.max_ms);
  }
  if (const json* h = s.child("hrv")) {
    Section hs(*h, "extraction.hrv");
    hs.get("resample_hz", e.hrv.resample_hz);
    hs.get("vlf_lo_hz", e.hrv.vlf_lo_hz);
    hs.get("lf_lo_hz", e.hrv.lf_lo_hz);
    hs.get("hf_lo_hz", e.hrv.hf_lo_hz);
    hs.get("hf_hi_hz", e.hrv.hf_hi_hz);
    hs.get("apen_m", e.hrv.apen_m);
    hs.get("apen_r_factor", e.hrv.apen_r_factor);
    hs.get("dfa_min_box", e.hrv.dfa_min_box);
    hs.get("dfa_max_box", e.hrv.dfa_max_box);
  }
  if (const json* b = s.child("bvp")) {
    Section bs(*b, "extraction.bvp");
    bs.get("ami_tau", e.bvp.ami_tau);
    bs.get("ami_bins", e.bvp.ami_bins);
  }
}

void read_synth(const json& j, RunConfig& c) {
  Section s(j, "synth");
  SynthConfig& y = c.synth;
  s.get("n_subjects", c.n_subjects);
  s.get("duration_s", y.duration_s);
  s.get("sample_rate_hz", y.sample_rate_hz);
  s.get("epoch_s", y.epoch_s);
  s.get("epoch_scores", y.epoch_scores);
  s.get("mean_rr_ms", y.mean_rr_ms);
  s.get("amplitude", y.amplitude);
  s.get("lf_depth_ms", y.lf_depth_ms);
  s.get("lf_hz", y.lf_hz);
  s.get("hf_depth_ms", y.hf_depth_ms);
  s.get("hf_hz", y.hf_hz);
  s.get("rr_jitter_sd_ms", y.rr_jitter_sd_ms);
  s.get("noise_sd", y.noise_sd);
  s.get("systolic_width_s", y.systolic_width_s);
  s.get("dicrotic_delay_s", y.dicrotic_delay_s);
  s.get("dicrotic_width_s", y.dicrotic_width_s);
  s.get("dicrotic_ratio", y.dicrotic_ratio);
}

void read_model(const json& j, ModelConfig& m) {
  Section s(j, "model");
  std::string family(learn::to_string(m.family));
  s.get("family", family);
  m.family = learn::family_from_string(family);
  s.get("params", m.params);
  s.get("grid_search", m.grid_search);
  if (const json* g = s.child("grid")) {
    if (g->is_null()) {
      m.grid.reset();
    } else {
      try {
        m.grid = g->get<learn::HyperGrid>();
      } catch (const json::exception&) {
        bad("model.grid", "expected an object of number lists");
      }
    }
  }
}

void read_cv(const json& j, RunConfig& c) {
  Section s(j, "cv");
  s.get("k", c.cv.k);
  s.get("smote_k", c.cv.smote_k);
  s.get("oversample", c.cv.oversample);
  std::string mode(to_string(c.cv.mode));
  s.get("mode", mode);
  c.cv.mode = cv_mode_from_string(mode);
  s.get("tuning_fraction", c.tuning_fraction);
}

}  // namespace

void validate(const RunConfig& c) {
  const auto& e = c.extraction;
  if (!(e.filter_cutoff_hz > 0.0)) bad("extraction.filter_cutoff_hz", "must be > 0");
  if (e.filter_order < 1 || e.filter_order > 8) bad("extraction.filter_order", "must be 1..8");
  if (!(e.window_s > 0.0)) bad("extraction.window_s", "must be > 0");
  if (!(e.overlap >= 0.0 && e.overlap < 1.0)) bad("extraction.overlap", "must be in [0, 1)");
  if (!(e.hrv_context_s >= e.window_s)) bad("extraction.hrv_context_s", "must be >= window_s");
  if (!(e.epoch_spacing_s > 0.0)) bad("extraction.epoch_spacing_s", "must be > 0");
  if (!(e.beats.window_s > 0.0) || !(e.beats.refractory_s > 0.0)) bad("extraction.beats", "windows must be > 0");
  if (!(e.gate.min_ms > 0.0 && e.gate.max_ms > e.gate.min_ms)) bad("extraction.ibi_gate", "need 0 < min_ms < max_ms");
  if (!(e.hrv.resample_hz > 0.0)) bad("extraction.hrv.resample_hz", "must be > 0");
  if (!(0.0 <= e.hrv.vlf_lo_hz && e.hrv.vlf_lo_hz < e.hrv.lf_lo_hz && e.hrv.lf_lo_hz < e.hrv.hf_lo_hz &&
        e.hrv.hf_lo_hz < e.hrv.hf_hi_hz)) {
    bad("extraction.hrv", "band edges must ascend");
  }
  if (e.hrv.apen_m < 1 || !(e.hrv.apen_r_factor > 0.0)) bad("extraction.hrv", "apen_m >= 1 and apen_r_factor > 0");
  if (e.hrv.dfa_min_box < 2 || e.hrv.dfa_max_box <= e.hrv.dfa_min_box) bad("extraction.hrv", "dfa box range");
  if (e.bvp.ami_tau < 1 || e.bvp.ami_bins < 2) bad("extraction.bvp", "ami_tau >= 1 and ami_bins >= 2");
  if (c.n_subjects < 1) bad("synth.n_subjects", "must be >= 1");
  try {
    validate(c.synth);
  } catch (const Error& err) {
    bad("synth", err.what());
  }
  learn::resolve_params({c.model.family, c.model.params});
  if (c.model.grid) learn::enumerate_grid(*c.model.grid);
  if (c.cv.k < 2) bad("cv.k", "must be >= 2");
  if (c.cv.smote_k < 1) bad("cv.smote_k", "must be >= 1");
  if (!(c.tuning_fraction >= 0.0 && c.tuning_fraction < 1.0)) bad("cv.tuning_fraction", "must be in [0, 1)");
  if (c.importance_trees < 1) bad("importance.n_trees", "must be >= 1");
  if (!(c.importance_threshold >= 0.0 && c.importance_threshold < 1.0)) bad("importance.threshold", "must be in [0, 1)");
  for (const auto& f : c.stats_features) {
    try {
      feature_index(f);
    } catch (const Error&) {
      bad("stats.features", "unknown feature '" + f + "'");
    }
  }
}

RunConfig config_from_json(std::string_view text, RunConfig c) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::kInvalidConfiguration, std::string("config is not valid JSON: ") + e.what());
  }
  {
    Section s(j, "");
    s.get("seed", c.seed);
    s.get("threads", c.threads);
    s.get("normalize_per_subject", c.normalize_per_subject);
    s.get("task", c.task);
    if (const json* e = s.child("extraction")) read_extraction(*e, c.extraction);
    if (const json* y = s.child("synth")) read_synth(*y, c);
    if (const json* m = s.child("model")) read_model(*m, c.model);
    if (const json* v = s.child("cv")) read_cv(*v, c);
    if (const json* i = s.child("importance")) {
      Section is(*i, "importance");
      is.get("task", c.importance_task);
      is.get("n_trees", c.importance_trees);
      is.get("threshold", c.importance_threshold);
    }
    if (const json* st = s.child("stats")) {
      Section ss(*st, "stats");
      ss.get("features", c.stats_features);
    }
  }
  return c;
}

RunConfig load_config(const std::filesystem::path& path, RunConfig base) {
  std::string text;
  try {
    text = read_text_file(path);
  } catch (const Error& e) {
    throw Error(ErrorCode::kInvalidConfiguration, e.what());
  }
  return config_from_json(text, std::move(base));
}

std::string config_to_json(const RunConfig& c, int indent) {
  const auto& e = c.extraction;
  json j;
  j["seed"] = c.seed;
  j["normalize_per_subject"] = c.normalize_per_subject;
  j["task"] = c.task;
  j["extraction"] = {
      {"filter_cutoff_hz", e.filter_cutoff_hz},
      {"filter_order", e.filter_order},
      {"window_s", e.window_s},
      {"overlap", e.overlap},
      {"hrv_context_s", e.hrv_context_s},
      {"epoch_spacing_s", e.epoch_spacing_s},
      {"beats",
       {{"window_s", e.beats.window_s},
        {"std_factor", e.beats.std_factor},
        {"refractory_s", e.beats.refractory_s},
        {"min_std_fraction", e.beats.min_std_fraction}}},
      {"ibi_gate", {{"enabled", e.gate.enabled}, {"min_ms", e.gate.min_ms}, {"max_ms", e.gate.max_ms}}},
      {"hrv",
       {{"resample_hz", e.hrv.resample_hz},
        {"vlf_lo_hz", e.hrv.vlf_lo_hz},
        {"lf_lo_hz", e.hrv.lf_lo_hz},
        {"hf_lo_hz", e.hrv.hf_lo_hz},
        {"hf_hi_hz", e.hrv.hf_hi_hz},
        {"apen_m", e.hrv.apen_m},
        {"apen_r_factor", e.hrv.apen_r_factor},
        {"dfa_min_box", e.hrv.dfa_min_box},
        {"dfa_max_box", e.hrv.dfa_max_box}}},
      {"bvp", {{"ami_tau", e.bvp.ami_tau}, {"ami_bins", e.bvp.ami_bins}}},
  };
  const SynthConfig& y = c.synth;
  j["synth"] = {{"n_subjects", c.n_subjects},
                {"duration_s", y.duration_s},
                {"sample_rate_hz", y.sample_rate_hz},
                {"epoch_s", y.epoch_s},
                {"epoch_scores", y.epoch_scores},
                {"mean_rr_ms", y.mean_rr_ms},
                {"amplitude", y.amplitude},
                {"lf_depth_ms", y.lf_depth_ms},
                {"lf_hz", y.lf_hz},
                {"hf_depth_ms", y.hf_depth_ms},
                {"hf_hz", y.hf_hz},
                {"rr_jitter_sd_ms", y.rr_jitter_sd_ms},
                {"noise_sd", y.noise_sd},
                {"systolic_width_s", y.systolic_width_s},
                {"dicrotic_delay_s", y.dicrotic_delay_s},
                {"dicrotic_width_s", y.dicrotic_width_s},
                {"dicrotic_ratio", y.dicrotic_ratio}};
  j["model"] = {{"family", std::string(learn::to_string(c.model.family))},
                {"params", c.model.params},
                {"grid_search", c.model.grid_search},
                {"grid", c.model.grid ? json(*c.model.grid) : json(nullptr)}};
  j["cv"] = {{"k", c.cv.k},
             {"smote_k", c.cv.smote_k},
             {"oversample", c.cv.oversample},
             {"mode", std::string(to_string(c.cv.mode))},
             {"tuning_fraction", c.tuning_fraction}};
  j["importance"] = {
      {"task", c.importance_task}, {"n_trees", c.importance_trees}, {"threshold", c.importance_threshold}};
  j["stats"] = {{"features", c.stats_features}};
  return j.dump(indent);
}

}  // namespace painbvp
