#pragma once

// Distributional separation (two-sample Kolmogorov-Smirnov statistic) and
// real-vs-synthetic detector training: full-batch gradient descent on
// L2-regularized logistic loss with per-feature standardization.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "burstlab/error.hpp"
#include "burstlab/metrics.hpp"
#include "burstlab/rng.hpp"

namespace burstlab {

// D = sup_x |F_a(x) - F_b(x)| over the empirical CDFs, exact via a merged
// walk of the two sorted samples.
inline double ks_statistic(std::span<const double> a, std::span<const double> b) {
    if (a.empty() || b.empty()) throw DataError("KS test requires non-empty samples");
    std::vector<double> sa(a.begin(), a.end());
    std::vector<double> sb(b.begin(), b.end());
    std::sort(sa.begin(), sa.end());
    std::sort(sb.begin(), sb.end());

    const double na = static_cast<double>(sa.size());
    const double nb = static_cast<double>(sb.size());
    std::size_t i = 0;
    std::size_t j = 0;
    double d = 0.0;
    while (i < sa.size() && j < sb.size()) {
        const double x = std::min(sa[i], sb[j]);
        while (i < sa.size() && sa[i] == x) ++i;
        while (j < sb.size() && sb[j] == x) ++j;
        d = std::max(d, std::fabs(static_cast<double>(i) / na - static_cast<double>(j) / nb));
    }
    return d;
}

// F1 for label 1; 0 when precision + recall is 0.
inline double f1_score(std::span<const int> predictions, std::span<const int> labels) {
    if (predictions.size() != labels.size()) throw UsageError("predictions/labels length mismatch");
    double tp = 0.0;
    double fp = 0.0;
    double fn = 0.0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == 1 && labels[i] == 1) ++tp;
        if (predictions[i] == 1 && labels[i] != 1) ++fp;
        if (predictions[i] != 1 && labels[i] == 1) ++fn;
    }
    const double denom = 2.0 * tp + fp + fn;
    return denom == 0.0 ? 0.0 : 2.0 * tp / denom;
}

struct DetectorConfig {
    double learning_rate = 0.1;
    double l2 = 1e-3;
    double tol = 1e-6;  // stop when the gradient norm falls below this
    int max_epochs = 10000;
    double split_fraction = 0.8;  // stratified train share
    std::uint64_t seed = 0;
    bool track_loss = false;
};

struct DetectorModel {
    std::vector<std::string> feature_names;  // retained features only
    std::vector<double> means;
    std::vector<double> stds;
    std::vector<double> weights;
    double bias = 0.0;
    std::vector<std::string> dropped_features;  // zero variance on the training fold
    DetectorConfig config;
    double f1 = 0.0;        // held-out F1 for the synthetic class
    double macro_f1 = 0.0;  // mean of per-class F1s

    double predict_probability(std::span<const double> features) const {
        if (features.size() != weights.size()) throw UsageError("feature count mismatch");
        double z = bias;
        for (std::size_t k = 0; k < weights.size(); ++k) {
            z += weights[k] * (features[k] - means[k]) / stds[k];
        }
        return 1.0 / (1.0 + std::exp(-z));
    }
};

struct TrainResult {
    DetectorModel model;
    double f1 = 0.0;
    double macro_f1 = 0.0;
    std::vector<double> loss_trace;  // filled when config.track_loss
};

namespace detail {

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// log(1 + exp(z)) without overflow
inline double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

}  // namespace detail

// Label 1 = synthetic. Features are standardized on the training fold;
// zero-variance features are dropped (and recorded) rather than erroring,
// since degenerate samplers can produce constant metrics.
inline TrainResult train_detector(const std::vector<std::vector<double>>& real,
                                  const std::vector<std::vector<double>>& synth,
                                  std::vector<std::string> feature_names,
                                  const DetectorConfig& config = {}) {
    constexpr std::size_t kMinPerClass = 20;
    if (real.size() < kMinPerClass || synth.size() < kMinPerClass) {
        throw DataError("insufficient data");
    }
    const std::size_t n_features = feature_names.size();
    const auto check = [&](const std::vector<std::vector<double>>& rows) {
        for (const auto& row : rows) {
            if (row.size() != n_features) throw UsageError("feature count mismatch");
            for (std::size_t k = 0; k < row.size(); ++k) {
                if (!std::isfinite(row[k])) {
                    throw DataError("non-finite feature: " + feature_names[k]);
                }
            }
        }
    };
    check(real);
    check(synth);

    // Stratified split, one substream per class so results do not depend on
    // class sizes interleaving.
    struct Example {
        const std::vector<double>* x;
        int y;
    };
    std::vector<Example> train;
    std::vector<Example> test;
    const auto split_class = [&](const std::vector<std::vector<double>>& rows, int label,
                                 std::uint64_t stream) {
        std::vector<std::size_t> idx(rows.size());
        for (std::size_t i = 0; i < idx.size(); ++i) idx[i] = i;
        Rng rng(substream_seed(config.seed, stream));
        rng.shuffle(idx);
        std::size_t n_train = static_cast<std::size_t>(config.split_fraction *
                                                       static_cast<double>(rows.size()));
        n_train = std::clamp<std::size_t>(n_train, 1, rows.size() - 1);
        for (std::size_t i = 0; i < idx.size(); ++i) {
            (i < n_train ? train : test).push_back({&rows[idx[i]], label});
        }
    };
    split_class(real, 0, 0);
    split_class(synth, 1, 1);

    // Standardization parameters from the training fold.
    std::vector<double> mean(n_features, 0.0);
    std::vector<double> stddev(n_features, 0.0);
    const double n_train = static_cast<double>(train.size());
    for (const auto& ex : train) {
        for (std::size_t k = 0; k < n_features; ++k) mean[k] += (*ex.x)[k];
    }
    for (auto& m : mean) m /= n_train;
    for (const auto& ex : train) {
        for (std::size_t k = 0; k < n_features; ++k) {
            const double d = (*ex.x)[k] - mean[k];
            stddev[k] += d * d;
        }
    }
    for (auto& s : stddev) s = std::sqrt(s / n_train);

    std::vector<std::size_t> kept;
    std::vector<std::string> dropped;
    for (std::size_t k = 0; k < n_features; ++k) {
        if (stddev[k] > 0.0) {
            kept.push_back(k);
        } else {
            dropped.push_back(feature_names[k]);
        }
    }
    if (kept.empty()) throw DataError("all features have zero variance");

    const auto standardize = [&](const std::vector<Example>& rows) {
        std::vector<std::vector<double>> out(rows.size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            out[i].reserve(kept.size());
            for (const std::size_t k : kept) out[i].push_back(((*rows[i].x)[k] - mean[k]) / stddev[k]);
        }
        return out;
    };
    const std::vector<std::vector<double>> x_train = standardize(train);
    const std::vector<std::vector<double>> x_test = standardize(test);

    // Full-batch gradient descent on mean logistic loss + (l2/2)||w||^2.
    const std::size_t d = kept.size();
    std::vector<double> w(d, 0.0);
    double bias = 0.0;
    std::vector<double> grad(d, 0.0);
    TrainResult result;
    for (int epoch = 0; epoch < config.max_epochs; ++epoch) {
        std::fill(grad.begin(), grad.end(), 0.0);
        double grad_bias = 0.0;
        double loss = 0.0;
        for (std::size_t i = 0; i < x_train.size(); ++i) {
            double z = bias;
            for (std::size_t k = 0; k < d; ++k) z += w[k] * x_train[i][k];
            const double y = static_cast<double>(train[i].y);
            const double err = detail::sigmoid(z) - y;
            for (std::size_t k = 0; k < d; ++k) grad[k] += err * x_train[i][k];
            grad_bias += err;
            loss += detail::softplus(z) - y * z;
        }
        double grad_norm_sq = 0.0;
        for (std::size_t k = 0; k < d; ++k) {
            grad[k] = grad[k] / n_train + config.l2 * w[k];
            grad_norm_sq += grad[k] * grad[k];
        }
        grad_bias /= n_train;
        grad_norm_sq += grad_bias * grad_bias;

        if (config.track_loss) {
            double w_sq = 0.0;
            for (const double wk : w) w_sq += wk * wk;
            result.loss_trace.push_back(loss / n_train + 0.5 * config.l2 * w_sq);
        }
        if (std::sqrt(grad_norm_sq) < config.tol) break;
        for (std::size_t k = 0; k < d; ++k) w[k] -= config.learning_rate * grad[k];
        bias -= config.learning_rate * grad_bias;
    }

    // Held-out evaluation; p >= 0.5 predicts synthetic.
    std::vector<int> predictions;
    std::vector<int> labels;
    predictions.reserve(test.size());
    labels.reserve(test.size());
    for (std::size_t i = 0; i < x_test.size(); ++i) {
        double z = bias;
        for (std::size_t k = 0; k < d; ++k) z += w[k] * x_test[i][k];
        predictions.push_back(detail::sigmoid(z) >= 0.5 ? 1 : 0);
        labels.push_back(test[i].y);
    }
    const double f1_synth = f1_score(predictions, labels);
    std::vector<int> flipped_pred(predictions.size());
    std::vector<int> flipped_lab(labels.size());
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        flipped_pred[i] = 1 - predictions[i];
        flipped_lab[i] = 1 - labels[i];
    }
    const double f1_real = f1_score(flipped_pred, flipped_lab);

    DetectorModel model;
    for (const std::size_t k : kept) {
        model.feature_names.push_back(feature_names[k]);
        model.means.push_back(mean[k]);
        model.stds.push_back(stddev[k]);
    }
    model.weights = std::move(w);
    model.bias = bias;
    model.dropped_features = std::move(dropped);
    model.config = config;
    model.f1 = f1_synth;
    model.macro_f1 = 0.5 * (f1_synth + f1_real);

    result.model = std::move(model);
    result.f1 = f1_synth;
    result.macro_f1 = result.model.macro_f1;
    return result;
}

struct SeparationReport {
    std::string sampler;
    std::string metric;
    double d = 0.0;
    std::size_t n_real = 0;
    std::size_t n_synth = 0;
};

// One KS statistic per (sampler, scalar metric) pair. GLTR bin fractions are
// excluded here; they feed the detector path instead.
inline std::vector<SeparationReport> separation_table(const MetricTable& real,
                                                      std::span<const MetricTable> synths) {
    std::vector<std::string> scalar_cols;
    for (const auto& c : real.columns) {
        if (!is_gltr_column(c)) scalar_cols.push_back(c);
    }

    std::vector<SeparationReport> out;
    for (const auto& synth : synths) {
        if (synth.columns != real.columns) {
            throw DataError("metric tables have mismatched columns");
        }
        // A synth table may hold several samplers; group rows by source.
        std::vector<std::string> labels;
        for (const auto& s : synth.sources) {
            if (std::find(labels.begin(), labels.end(), s) == labels.end()) labels.push_back(s);
        }
        for (const auto& label : labels) {
            for (const auto& col : scalar_cols) {
                const std::size_t idx = synth.column_index(col);
                std::vector<double> synth_values;
                for (std::size_t i = 0; i < synth.rows.size(); ++i) {
                    if (synth.sources[i] == label) synth_values.push_back(synth.rows[i][idx]);
                }
                const std::vector<double> real_values = real.column(col);
                SeparationReport report;
                report.sampler = label;
                report.metric = col;
                report.d = ks_statistic(real_values, synth_values);
                report.n_real = real_values.size();
                report.n_synth = synth_values.size();
                out.push_back(std::move(report));
            }
        }
    }
    return out;
}

inline void save_detector(const std::filesystem::path& path, const DetectorModel& model) {
    nlohmann::json j;
    j["format"] = "burstlab-detector";
    j["version"] = 1;
    j["features"] = model.feature_names;
    j["standardization"] = {{"means", model.means}, {"stds", model.stds}};
    j["weights"] = model.weights;
    j["bias"] = model.bias;
    j["dropped_features"] = model.dropped_features;
    j["config"] = {{"learning_rate", model.config.learning_rate},
                   {"l2", model.config.l2},
                   {"tol", model.config.tol},
                   {"max_epochs", model.config.max_epochs},
                   {"split_fraction", model.config.split_fraction},
                   {"seed", model.config.seed}};
    j["f1"] = model.f1;
    j["macro_f1"] = model.macro_f1;
    std::ofstream f(path);
    if (!f) throw DataError("cannot write detector file: " + path.string());
    f << j.dump(2) << '\n';
}

inline DetectorModel load_detector(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read detector file: " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed detector file: " + std::string(e.what()));
    }
    if (j.value("format", "") != "burstlab-detector") throw DataError("not a detector file");
    DetectorModel m;
    m.feature_names = j.at("features").get<std::vector<std::string>>();
    m.means = j.at("standardization").at("means").get<std::vector<double>>();
    m.stds = j.at("standardization").at("stds").get<std::vector<double>>();
    m.weights = j.at("weights").get<std::vector<double>>();
    m.bias = j.at("bias").get<double>();
    m.dropped_features = j.at("dropped_features").get<std::vector<std::string>>();
    m.config.learning_rate = j.at("config").at("learning_rate").get<double>();
    m.config.l2 = j.at("config").at("l2").get<double>();
    m.config.tol = j.at("config").at("tol").get<double>();
    m.config.max_epochs = j.at("config").at("max_epochs").get<int>();
    m.config.split_fraction = j.at("config").at("split_fraction").get<double>();
    m.config.seed = j.at("config").at("seed").get<std::uint64_t>();
    m.f1 = j.at("f1").get<double>();
    m.macro_f1 = j.at("macro_f1").get<double>();
    if (m.weights.size() != m.feature_names.size() || m.means.size() != m.feature_names.size() ||
        m.stds.size() != m.feature_names.size()) {
        throw DataError("detector file weight/feature mismatch");
    }
    return m;
}

}  // namespace burstlab
