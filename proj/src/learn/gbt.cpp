#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>

#include "learn/common.hpp"
#include "painbvp/learn/ensemble.hpp"
#include "painbvp/parallel.hpp"

namespace painbvp::learn {

namespace {

/// Per-feature bin edges; a value v falls in the first bin b with
/// v <= edges[b]. Split thresholds sit halfway between adjacent edges.
struct Binning {
  std::vector<std::vector<double>> edges;
  std::vector<std::vector<std::uint16_t>> bins;  // [feature][row]
};

Binning make_bins(const Matrix& x, std::size_t max_bins) {
  const std::size_t n = x.rows();
  Binning b;
  b.edges.resize(x.cols());
  b.bins.resize(x.cols());
  std::vector<double> col;
  for (std::size_t f = 0; f < x.cols(); ++f) {
    col = x.column(f);
    std::sort(col.begin(), col.end());
    auto& e = b.edges[f];
    e.assign(col.begin(), col.end());
    e.erase(std::unique(e.begin(), e.end()), e.end());
    if (e.size() > max_bins) {
      e.clear();
      for (std::size_t j = 1; j <= max_bins; ++j) e.push_back(col[j * n / max_bins - 1]);
      e.erase(std::unique(e.begin(), e.end()), e.end());
    }
    auto& bf = b.bins[f];
    bf.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      bf[i] = static_cast<std::uint16_t>(std::lower_bound(e.begin(), e.end(), x(i, f)) - e.begin());
    }
  }
  return b;
}

struct GrowFrame {
  std::size_t node;
  std::vector<std::size_t> rows;
  std::size_t depth;
};

/// Grows one Newton tree on (g, h) over `rows`; adds the shrunken leaf
/// values to `score` for every training row.
DecisionTree grow_newton_tree(const Binning& bins, std::span<const double> g, std::span<const double> h,
                              std::vector<std::size_t> rows, const GbtOptions& o, std::span<double> score,
                              std::span<const std::size_t> all_rows) {
  const double lambda = o.l2_leaf_lambda;
  DecisionTree tree;
  tree.value_dim = 1;
  tree.nodes.emplace_back();
  tree.values.push_back(0.0);
  std::vector<double> hist_g, hist_h;
  std::vector<GrowFrame> stack;
  stack.push_back({0, std::move(rows), 0});
  while (!stack.empty()) {
    GrowFrame fr = std::move(stack.back());
    stack.pop_back();
    double gs = 0.0;
    double hs = 0.0;
    for (std::size_t r : fr.rows) {
      gs += g[r];
      hs += h[r];
    }
    tree.values[fr.node] = -o.learning_rate * gs / (hs + lambda);
    if (fr.depth >= o.max_depth || fr.rows.size() < 2) continue;

    const double parent = gs * gs / (hs + lambda);
    double best_gain = 0.0;
    int best_feature = -1;
    std::size_t best_bin = 0;
    for (std::size_t f = 0; f < bins.edges.size(); ++f) {
      const std::size_t nb = bins.edges[f].size();
      if (nb < 2) continue;
      hist_g.assign(nb, 0.0);
      hist_h.assign(nb, 0.0);
      const auto& bf = bins.bins[f];
      for (std::size_t r : fr.rows) {
        hist_g[bf[r]] += g[r];
        hist_h[bf[r]] += h[r];
      }
      double gl = 0.0;
      double hl = 0.0;
      for (std::size_t b = 0; b + 1 < nb; ++b) {
        gl += hist_g[b];
        hl += hist_h[b];
        const double gr = gs - gl;
        const double hr = hs - hl;
        if (hl < o.min_child_weight || hr < o.min_child_weight) continue;
        const double gain = 0.5 * (gl * gl / (hl + lambda) + gr * gr / (hr + lambda) - parent);
        if (gain > best_gain) {
          best_gain = gain;
          best_feature = static_cast<int>(f);
          best_bin = b;
        }
      }
    }
    if (best_feature < 0 || !(best_gain > 1e-12)) continue;

    const auto f = static_cast<std::size_t>(best_feature);
    std::vector<std::size_t> left, right;
    for (std::size_t r : fr.rows) (bins.bins[f][r] <= best_bin ? left : right).push_back(r);
    const std::size_t left_id = tree.nodes.size();
    tree.nodes.resize(left_id + 2);
    tree.values.resize(left_id + 2, 0.0);
    TreeNode& node = tree.nodes[fr.node];
    node.feature = best_feature;
    // The right child is non-empty, so a next edge exists; split halfway to it.
    const double lo = bins.edges[f][best_bin];
    const double hi = bins.edges[f][best_bin + 1];
    node.threshold = lo + (hi - lo) / 2.0;
    if (!(node.threshold < hi)) node.threshold = lo;
    node.left = static_cast<int>(left_id);
    node.right = static_cast<int>(left_id + 1);
    stack.push_back({left_id + 1, std::move(right), fr.depth + 1});
    stack.push_back({left_id, std::move(left), fr.depth + 1});
  }
  // Score update for every training row, including rows left out by
  // subsampling, by routing each row's bins down the tree.
  for (std::size_t r : all_rows) {
    std::size_t node = 0;
    while (!tree.nodes[node].is_leaf()) {
      const TreeNode& nd = tree.nodes[node];
      const auto f = static_cast<std::size_t>(nd.feature);
      const double edge = bins.edges[f][bins.bins[f][r]];
      node = static_cast<std::size_t>(edge <= nd.threshold ? nd.left : nd.right);
    }
    score[r] += tree.values[node];
  }
  return tree;
}

enum class Loss { kSquared, kLogistic };

double mean_loss(Loss loss, std::span<const double> y, std::span<const double> f) {
  double total = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    if (loss == Loss::kSquared) {
      total += 0.5 * (y[i] - f[i]) * (y[i] - f[i]);
    } else {
      // log(1 + exp(-s)) with s = +/- f
      const double s = y[i] > 0.5 ? f[i] : -f[i];
      total += s > 0.0 ? std::log1p(std::exp(-s)) : -s + std::log1p(std::exp(s));
    }
  }
  return total / static_cast<double>(y.size());
}

GbtModel::Booster boost(const Binning& bins, std::span<const double> y, Loss loss, const GbtOptions& o,
                        std::uint64_t seed, std::vector<double>* losses) {
  const std::size_t n = y.size();
  GbtModel::Booster booster;
  const double mean = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);
  if (loss == Loss::kSquared) {
    booster.base_score = mean;
  } else {
    const double p = std::clamp(mean, 1e-6, 1.0 - 1e-6);
    booster.base_score = std::log(p / (1.0 - p));
  }
  std::vector<double> score(n, booster.base_score), g(n), h(n);
  std::vector<std::size_t> all(n);
  std::iota(all.begin(), all.end(), 0);
  const auto n_sub = static_cast<std::size_t>(std::max(1.0, std::floor(o.subsample * static_cast<double>(n))));
  Rng rng(seed);
  std::vector<std::size_t> perm = all;
  for (std::size_t round = 0; round < o.n_rounds; ++round) {
    for (std::size_t i = 0; i < n; ++i) {
      if (loss == Loss::kSquared) {
        g[i] = score[i] - y[i];
        h[i] = 1.0;
      } else {
        const double p = detail::sigmoid(score[i]);
        g[i] = p - y[i];
        h[i] = std::max(p * (1.0 - p), 1e-16);
      }
    }
    std::vector<std::size_t> rows;
    if (n_sub < n) {
      rng.shuffle(perm);
      rows.assign(perm.begin(), perm.begin() + static_cast<std::ptrdiff_t>(n_sub));
      std::sort(rows.begin(), rows.end());
    } else {
      rows = all;
    }
    booster.trees.push_back(grow_newton_tree(bins, g, h, std::move(rows), o, score, all));
    const double l = mean_loss(loss, y, score);
    if (!std::isfinite(l)) throw Error(ErrorCode::kTrainingDiverged, "boosting loss became non-finite");
    if (losses != nullptr) losses->push_back(l);
  }
  return booster;
}

void check_options(const GbtOptions& o) {
  if (o.n_rounds == 0) throw Error(ErrorCode::kInvalidParameter, "n_rounds must be >= 1");
  if (!(o.learning_rate > 0.0) || !(o.l2_leaf_lambda >= 0.0) || !(o.min_child_weight >= 0.0)) {
    throw Error(ErrorCode::kInvalidParameter, "learning_rate must be > 0; lambda and min_child_weight >= 0");
  }
  if (o.max_bins < 2 || o.max_bins > 65535) throw Error(ErrorCode::kInvalidParameter, "max_bins must be 2..65535");
  if (!(o.subsample > 0.0 && o.subsample <= 1.0)) throw Error(ErrorCode::kInvalidParameter, "subsample in (0, 1]");
}

HyperParams gbt_params(const GbtOptions& o) {
  return {{"n_rounds", static_cast<double>(o.n_rounds)},   {"learning_rate", o.learning_rate},
          {"max_depth", static_cast<double>(o.max_depth)}, {"l2_leaf_lambda", o.l2_leaf_lambda},
          {"min_child_weight", o.min_child_weight},        {"max_bins", static_cast<double>(o.max_bins)},
          {"subsample", o.subsample}};
}

}  // namespace

GbtModel::GbtModel(Family family, std::vector<int> classes, std::size_t n_features, HyperParams params,
                   std::uint64_t seed, State state)
    : Model(std::move(classes), n_features, std::move(params), seed), family_(family), state_(std::move(state)) {}

Matrix GbtModel::raw_scores(const Matrix& x) const {
  check_width(x);
  Matrix out(x.rows(), state_.boosters.size());
  for (std::size_t i = 0; i < x.rows(); ++i) {
    for (std::size_t b = 0; b < state_.boosters.size(); ++b) {
      const Booster& booster = state_.boosters[b];
      double s = booster.base_score;
      for (const auto& tree : booster.trees) s += tree.predict(x.row(i))[0];
      out(i, b) = s;
    }
  }
  return out;
}

Matrix GbtModel::predict_proba(const Matrix& x) const {
  if (!is_classifier()) return Model::predict_proba(x);
  const Matrix raw = raw_scores(x);
  const std::size_t k = classes().size();
  Matrix out(x.rows(), k);
  for (std::size_t i = 0; i < x.rows(); ++i) {
    if (k == 2) {
      const double p = detail::sigmoid(raw(i, 0));
      out(i, 0) = 1.0 - p;
      out(i, 1) = p;
      continue;
    }
    double total = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
      out(i, c) = detail::sigmoid(raw(i, c));
      total += out(i, c);
    }
    for (std::size_t c = 0; c < k; ++c) out(i, c) /= total;
  }
  return out;
}

std::vector<double> GbtModel::predict_value(const Matrix& x) const {
  if (is_classifier()) return Model::predict_value(x);
  const Matrix raw = raw_scores(x);
  return raw.column(0);
}

std::unique_ptr<GbtModel> fit_gbt(const Matrix& x, std::span<const int> labels, const GbtOptions& options,
                                  std::uint64_t seed, GbtTrace* trace) {
  detail::check_training_data(x, labels.size());
  check_options(options);
  const EncodedLabels enc = detail::encode_classifier_labels(labels);
  const std::size_t k = enc.classes.size();
  const std::size_t n_boosters = k == 2 ? 1 : k;
  const Binning bins = make_bins(x, options.max_bins);
  GbtModel::State state;
  state.boosters.resize(n_boosters);
  std::vector<std::vector<double>> losses(n_boosters);
  parallel_for(n_boosters, [&](std::size_t b) {
    const int positive = k == 2 ? 1 : static_cast<int>(b);
    std::vector<double> y(labels.size());
    for (std::size_t i = 0; i < y.size(); ++i) y[i] = enc.codes[i] == positive ? 1.0 : 0.0;
    state.boosters[b] = boost(bins, y, Loss::kLogistic, options, derive_seed(seed, b), &losses[b]);
  });
  if (trace != nullptr) {
    trace->training_loss.assign(options.n_rounds, 0.0);
    for (const auto& l : losses) {
      for (std::size_t r = 0; r < l.size(); ++r) trace->training_loss[r] += l[r];
    }
  }
  return std::make_unique<GbtModel>(Family::kGbt, enc.classes, x.cols(), gbt_params(options), seed,
                                    std::move(state));
}

std::unique_ptr<GbtModel> fit_gbt_reg(const Matrix& x, std::span<const double> y, const GbtOptions& options,
                                      std::uint64_t seed, GbtTrace* trace) {
  detail::check_training_data(x, y.size());
  check_options(options);
  for (double v : y) {
    if (!std::isfinite(v)) throw Error(ErrorCode::kInvalidInput, "non-finite regression target");
  }
  const Binning bins = make_bins(x, options.max_bins);
  GbtModel::State state;
  std::vector<double> losses;
  state.boosters.push_back(boost(bins, y, Loss::kSquared, options, derive_seed(seed, 0), &losses));
  if (trace != nullptr) trace->training_loss = std::move(losses);
  return std::make_unique<GbtModel>(Family::kGbtReg, std::vector<int>{}, x.cols(), gbt_params(options), seed,
                                    std::move(state));
}

}  // namespace painbvp::learn
