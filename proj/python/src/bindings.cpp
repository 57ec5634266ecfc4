#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <algorithm>
#include <set>
#include <string>
#include <vector>

#include "painbvp/beat_ibi.hpp"
#include "painbvp/bvp_features.hpp"
#include "painbvp/config.hpp"
#include "painbvp/dataset.hpp"
#include "painbvp/error.hpp"
#include "painbvp/extraction.hpp"
#include "painbvp/hrv_features.hpp"
#include "painbvp/io.hpp"
#include "painbvp/metrics.hpp"
#include "painbvp/signal.hpp"
#include "painbvp/stats.hpp"
#include "painbvp/study.hpp"
#include "painbvp/synth.hpp"

namespace py = pybind11;
using namespace painbvp;

namespace {

using Array = py::array_t<double, py::array::c_style | py::array::forcecast>;
using IntArray = py::array_t<int, py::array::c_style | py::array::forcecast>;

std::vector<double> to_vector(const Array& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

std::vector<int> to_ints(const IntArray& a) {
  if (a.ndim() != 1) throw py::value_error("expected a 1-D array");
  return {a.data(), a.data() + a.size()};
}

Array to_array(const std::vector<double>& v) {
  Array out(static_cast<py::ssize_t>(v.size()));
  std::copy(v.begin(), v.end(), out.mutable_data());
  return out;
}

Matrix to_matrix(const Array& a) {
  if (a.ndim() != 2) throw py::value_error("expected a 2-D array");
  Matrix m(a.shape(0), a.shape(1));
  std::copy(a.data(), a.data() + a.size(), m.row(0).data());
  return m;
}

Array matrix_to_array(const Matrix& m) {
  Array out({static_cast<py::ssize_t>(m.rows()), static_cast<py::ssize_t>(m.cols())});
  std::copy(m.data().begin(), m.data().end(), out.mutable_data());
  return out;
}

template <std::size_t N>
py::dict feature_dict(const std::array<std::string_view, N>& names, const std::array<Feature, N>& values) {
  py::dict d;
  for (std::size_t i = 0; i < N; ++i) {
    d[py::str(std::string(names[i]))] = values[i] ? py::cast(*values[i]) : py::none();
  }
  return d;
}

RunConfig config_from(const std::string& json) { return json.empty() ? RunConfig{} : config_from_json(json); }

}  // namespace

PYBIND11_MODULE(_painbvp, m) {
  m.doc() = "BVP pain-assessment pipeline";
  static py::exception<Error> error(m, "PainbvpError", PyExc_ValueError);
  py::register_exception_translator([](std::exception_ptr p) {
    try {
      if (p) std::rethrow_exception(p);
    } catch (const Error& e) {
      py::set_error(error, e.what());
    }
  });

  m.def("feature_names", [] {
    std::vector<std::string> out;
    for (auto n : feature_names()) out.emplace_back(n);
    return out;
  });

  m.def(
      "lowpass",
      [](const Array& x, double fs, double cutoff_hz, int order) {
        return to_array(butterworth_lowpass(SampledSignal(fs, to_vector(x)), cutoff_hz, order).samples());
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("cutoff_hz") = 8.0, py::arg("order") = 2,
      "Zero-phase Butterworth low-pass filter.");

  m.def(
      "detect_beats",
      [](const Array& x, double fs, bool filter) {
        SampledSignal s(fs, to_vector(x));
        if (filter) s = butterworth_lowpass(s, 8.0, 2);
        return to_array(detect_beats(s));
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("filter") = true,
      "Systolic peak times in seconds.");

  m.def(
      "hrv_features",
      [](const Array& intervals_ms) {
        const auto ibi = ibi_from_intervals(to_vector(intervals_ms));
        return feature_dict(kHrvFeatureNames, hrv_feature_vector(ibi).to_array());
      },
      py::arg("intervals_ms"), "The 20 IBI features; undefined values are None.");

  m.def(
      "bvp_features",
      [](const Array& window, double fs) {
        return feature_dict(kBvpFeatureNames, bvp_feature_vector(SampledSignal(fs, to_vector(window))).values);
      },
      py::arg("window"), py::arg("sample_rate_hz"), "The 24 waveform features; undefined values are None.");

  m.def(
      "synth_recording",
      [](std::uint64_t seed, double duration_s, double sample_rate_hz, double noise_sd) {
        SynthConfig cfg;
        cfg.seed = seed;
        cfg.duration_s = duration_s;
        cfg.sample_rate_hz = sample_rate_hz;
        cfg.noise_sd = noise_sd;
        cfg.epoch_scores.resize(static_cast<std::size_t>(duration_s / cfg.epoch_s), cfg.epoch_scores.back());
        const auto r = generate_recording(cfg);
        py::dict d;
        d["samples"] = to_array(r.recording.bvp.samples());
        d["sample_rate_hz"] = r.recording.bvp.sample_rate_hz();
        d["beat_times_s"] = to_array(r.truth.beat_times_s);
        d["epoch_scores"] = r.truth.epoch_scores;
        return d;
      },
      py::arg("seed") = 1, py::arg("duration_s") = 220.0, py::arg("sample_rate_hz") = 2048.0,
      py::arg("noise_sd") = 0.02, "Synthetic recording with ground-truth beat times.");

  m.def(
      "extract_features",
      [](const Array& samples, double fs, const std::vector<int>& epoch_scores, const std::string& config_json) {
        const RunConfig c = config_from(config_json);
        std::vector<EpochReport> epochs;
        for (std::size_t i = 0; i < epoch_scores.size(); ++i) {
          epochs.push_back({static_cast<double>(i) * c.extraction.epoch_spacing_s, epoch_scores[i]});
        }
        SubjectRecording rec{"S01", SampledSignal(fs, to_vector(samples)), epochs};
        const auto ex = extract_subject_features(rec, c.extraction);
        Matrix x(ex.rows.size(), kFeatureCount);
        std::vector<double> starts;
        std::vector<int> scores;
        for (std::size_t i = 0; i < ex.rows.size(); ++i) {
          std::copy(ex.rows[i].features.begin(), ex.rows[i].features.end(), x.row(i).begin());
          starts.push_back(ex.rows[i].window_start_s);
          scores.push_back(ex.rows[i].pain_score);
        }
        py::dict d;
        d["features"] = matrix_to_array(x);
        d["window_start_s"] = to_array(starts);
        d["pain_score"] = scores;
        d["windows_total"] = ex.windows_total;
        d["windows_dropped"] = ex.windows_dropped;
        return d;
      },
      py::arg("samples"), py::arg("sample_rate_hz"), py::arg("epoch_scores"), py::arg("config_json") = "",
      "Windowed 44-feature matrix of one recording.");

  m.def(
      "roc_auc", [](const Array& scores, const IntArray& labels) { return roc_auc(to_vector(scores), to_ints(labels)); },
      py::arg("scores"), py::arg("labels"));

  m.def(
      "balanced_accuracy",
      [](const IntArray& truth, const IntArray& predicted) {
        const auto t = to_ints(truth);
        const auto p = to_ints(predicted);
        std::set<int> classes(t.begin(), t.end());
        classes.insert(p.begin(), p.end());
        return balanced_accuracy(ConfusionMatrix::from_predictions({classes.begin(), classes.end()}, t, p));
      },
      py::arg("truth"), py::arg("predicted"));

  m.def(
      "mae_rmse",
      [](const Array& truth, const Array& predicted) {
        const auto e = mae_rmse(to_vector(truth), to_vector(predicted));
        return py::make_tuple(e.mae, e.rmse);
      },
      py::arg("truth"), py::arg("predicted"));

  m.def(
      "smote",
      [](const Array& x, const IntArray& labels, std::size_t k, std::uint64_t seed) {
        const auto r = smote(to_matrix(x), to_ints(labels), k, seed);
        return py::make_tuple(matrix_to_array(r.features), r.labels, r.is_synthetic);
      },
      py::arg("x"), py::arg("labels"), py::arg("k") = 5, py::arg("seed") = 1,
      "Returns (features, labels, is_synthetic) with originals first.");

  m.def(
      "kruskal_wallis",
      [](const std::vector<std::vector<double>>& groups) {
        const auto r = kruskal_wallis(groups);
        return py::make_tuple(r.h, r.p_value, r.df);
      },
      py::arg("groups"));

  m.def(
      "dunn_test",
      [](const std::vector<std::vector<double>>& groups) {
        const auto t = dunn_test(groups);
        py::list out;
        for (const auto& p : t.pairs) {
          py::dict d;
          d["i"] = p.group_i;
          d["j"] = p.group_j;
          d["z"] = p.z;
          d["p"] = p.p_value;
          d["p_adj"] = p.p_adjusted;
          out.append(d);
        }
        return out;
      },
      py::arg("groups"));

  m.def(
      "run_task",
      [](const std::string& feature_csv, const std::string& task, const std::string& config_json) {
        RunConfig c = config_from(config_json);
        c.task = task;
        const Task t = parse_task(task);
        py::gil_scoped_release release;
        const Dataset ds = prepare_dataset(read_feature_table(feature_csv), c);
        return report_json(run_task(select_task(ds, t, c.cv.k), t, c), c);
      },
      py::arg("feature_csv"), py::arg("task"), py::arg("config_json") = "",
      "Tuning split, grid search and cross-validation; returns the JSON report.");
}
