#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <span>
#include <vector>

#include <gtest/gtest.h>

#include "burstlab/rng.hpp"
#include "burstlab/stats.hpp"

using namespace burstlab;

namespace {

// Brute-force oracle: evaluate both empirical CDFs at every sample point and
// take the largest gap. O(n*m), independent of the merged-walk implementation.
double ks_brute_force(std::span<const double> a, std::span<const double> b) {
    std::vector<double> points(a.begin(), a.end());
    points.insert(points.end(), b.begin(), b.end());
    const auto cdf = [](std::span<const double> s, double x) {
        std::size_t count = 0;
        for (const double v : s) {
            if (v <= x) ++count;
        }
        return static_cast<double>(count) / static_cast<double>(s.size());
    };
    double d = 0.0;
    for (const double x : points) {
        d = std::max(d, std::fabs(cdf(a, x) - cdf(b, x)));
    }
    return d;
}

std::vector<std::vector<double>> constant_rows(std::size_t n, std::vector<double> row) {
    return std::vector<std::vector<double>>(n, std::move(row));
}

}  // namespace

TEST(KsStatistic, IdenticalSamplesGiveZero) {
    const std::vector<double> a = {1.0, 2.0, 3.0};
    EXPECT_EQ(ks_statistic(a, a), 0.0);
}

TEST(KsStatistic, DisjointSupportsGiveOne) {
    const std::vector<double> a = {0.0, 0.0, 0.0};
    const std::vector<double> b = {1.0, 1.0, 1.0};
    EXPECT_EQ(ks_statistic(a, b), 1.0);
}

TEST(KsStatistic, InterleavedSamples) {
    const std::vector<double> a = {1.0, 2.0};
    const std::vector<double> b = {1.5, 2.5};
    EXPECT_EQ(ks_statistic(a, b), 0.5);
}

TEST(KsStatistic, Symmetric) {
    Rng rng(8);
    for (int trial = 0; trial < 50; ++trial) {
        std::vector<double> a(1 + rng.next_below(30));
        std::vector<double> b(1 + rng.next_below(30));
        for (auto& v : a) v = rng.next_double();
        for (auto& v : b) v = rng.next_double();
        EXPECT_EQ(ks_statistic(a, b), ks_statistic(b, a));
    }
}

TEST(KsStatistic, MatchesBruteForceOracle) {
    Rng rng(99);
    for (int trial = 0; trial < 300; ++trial) {
        std::vector<double> a(1 + rng.next_below(50));
        std::vector<double> b(1 + rng.next_below(50));
        // Half the trials draw from a coarse grid so ties, including
        // cross-sample ties, are common.
        const bool gridded = trial % 2 == 0;
        for (auto& v : a) {
            v = gridded ? static_cast<double>(rng.next_below(12)) / 4.0 : rng.next_double();
        }
        for (auto& v : b) {
            v = gridded ? static_cast<double>(rng.next_below(12)) / 4.0 : rng.next_double();
        }
        EXPECT_EQ(ks_statistic(a, b), ks_brute_force(a, b)) << "trial " << trial;
    }
}

TEST(KsStatistic, EmptySampleFails) {
    const std::vector<double> a = {1.0};
    EXPECT_THROW(ks_statistic(a, {}), DataError);
    EXPECT_THROW(ks_statistic({}, a), DataError);
}

TEST(F1Score, PerfectPredictions) {
    const std::vector<int> labels = {0, 1, 0, 1, 1};
    EXPECT_EQ(f1_score(labels, labels), 1.0);
}

TEST(F1Score, ZeroRecallGivesZero) {
    const std::vector<int> predictions = {0, 0, 0, 0};
    const std::vector<int> labels = {0, 1, 0, 1};
    EXPECT_EQ(f1_score(predictions, labels), 0.0);
}

TEST(F1Score, BalancedErrors) {
    // TP=1, FP=1, FN=1 -> precision = recall = 0.5 -> F1 = 0.5.
    const std::vector<int> predictions = {1, 1, 0};
    const std::vector<int> labels = {1, 0, 1};
    EXPECT_EQ(f1_score(predictions, labels), 0.5);
}

TEST(F1Score, LengthMismatchFails) {
    const std::vector<int> a = {1, 0};
    const std::vector<int> b = {1};
    EXPECT_THROW(f1_score(a, b), UsageError);
}

TEST(TrainDetector, PerfectlySeparableFixture) {
    const auto real = constant_rows(100, {0.0});
    const auto synth = constant_rows(100, {1.0});
    const TrainResult r = train_detector(real, synth, {"f0"});
    EXPECT_EQ(r.f1, 1.0);
    EXPECT_EQ(r.macro_f1, 1.0);
    EXPECT_EQ(r.model.feature_names, std::vector<std::string>{"f0"});
    EXPECT_GT(r.model.weights[0], 0.0);  // label 1 sits at the larger value
}

TEST(TrainDetector, RelabeledDataScoresNearChance) {
    // Same vectors in both classes: no signal. Quick 5-seed check here; the
    // acceptance suite runs the full 20-seed version.
    Rng rng(2024);
    std::vector<std::vector<double>> rows;
    for (int i = 0; i < 80; ++i) {
        rows.push_back({rng.next_double(), rng.next_double(), rng.next_double()});
    }
    double sum_f1 = 0.0;
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        DetectorConfig config;
        config.seed = seed;
        const TrainResult r = train_detector(rows, rows, {"f0", "f1", "f2"}, config);
        sum_f1 += r.f1;
    }
    const double mean_f1 = sum_f1 / 5.0;
    EXPECT_GE(mean_f1, 0.2);
    EXPECT_LE(mean_f1, 0.8);
}

TEST(TrainDetector, SeedDeterminism) {
    Rng rng(7);
    std::vector<std::vector<double>> real;
    std::vector<std::vector<double>> synth;
    for (int i = 0; i < 40; ++i) {
        real.push_back({rng.next_double(), rng.next_double()});
        synth.push_back({rng.next_double() + 0.4, rng.next_double()});
    }
    DetectorConfig config;
    config.seed = 31337;
    const TrainResult a = train_detector(real, synth, {"x", "y"}, config);
    const TrainResult b = train_detector(real, synth, {"x", "y"}, config);
    EXPECT_EQ(a.model.weights, b.model.weights);
    EXPECT_EQ(a.model.bias, b.model.bias);
    EXPECT_EQ(a.f1, b.f1);

    DetectorConfig other;
    other.seed = 1;
    const TrainResult c = train_detector(real, synth, {"x", "y"}, other);
    EXPECT_NE(a.model.weights, c.model.weights);  // the split actually moved
}

TEST(TrainDetector, StandardizationAndZeroVarianceDrop) {
    // Identical rows inside each class make the training-fold statistics
    // independent of the shuffle: feature 0 has mean 0.5 and popstd 0.5,
    // feature 1 is constant and must be dropped.
    const auto real = constant_rows(50, {0.0, 5.0});
    const auto synth = constant_rows(50, {1.0, 5.0});
    const TrainResult r = train_detector(real, synth, {"sep", "flat"});
    EXPECT_EQ(r.model.feature_names, std::vector<std::string>{"sep"});
    EXPECT_EQ(r.model.dropped_features, std::vector<std::string>{"flat"});
    EXPECT_EQ(r.model.means, std::vector<double>{0.5});
    EXPECT_EQ(r.model.stds, std::vector<double>{0.5});
}

TEST(TrainDetector, InsufficientDataFails) {
    const auto real = constant_rows(19, {0.0});
    const auto synth = constant_rows(100, {1.0});
    try {
        train_detector(real, synth, {"f0"});
        FAIL();
    } catch (const DataError& e) {
        EXPECT_STREQ(e.what(), "insufficient data");
    }
}

TEST(TrainDetector, NonFiniteFeatureNamed) {
    auto real = constant_rows(30, {0.0, 1.0});
    auto synth = constant_rows(30, {1.0, 1.0});
    synth[3][1] = std::numeric_limits<double>::quiet_NaN();
    try {
        train_detector(real, synth, {"good", "bad"});
        FAIL();
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("bad"), std::string::npos);
    }
}

TEST(TrainDetector, LossDecreasesMonotonically) {
    Rng rng(55);
    std::vector<std::vector<double>> real;
    std::vector<std::vector<double>> synth;
    for (int i = 0; i < 60; ++i) {
        real.push_back({rng.next_double(), rng.next_double() * 2.0});
        synth.push_back({rng.next_double() + 0.7, rng.next_double() * 2.0 - 0.3});
    }
    DetectorConfig config;
    config.track_loss = true;
    config.max_epochs = 400;
    const TrainResult r = train_detector(real, synth, {"a", "b"}, config);
    ASSERT_GT(r.loss_trace.size(), 10u);
    for (std::size_t i = 1; i < r.loss_trace.size(); ++i) {
        EXPECT_LE(r.loss_trace[i], r.loss_trace[i - 1] + 1e-12) << "epoch " << i;
    }
}

TEST(SeparationTable, ShapeAndSelfComparison) {
    const BinLayout layout = BinLayout::for_vocab(100);
    const std::vector<NucleusSpec> specs = {NucleusSpec::top_k(40)};
    MetricTable real;
    real.columns = metric_columns(layout, specs);
    Rng rng(2);
    for (int i = 0; i < 50; ++i) {
        std::vector<double> row(real.columns.size());
        for (auto& v : row) v = rng.next_double();
        real.rows.push_back(std::move(row));
        real.doc_ids.push_back("d" + std::to_string(i));
        real.sources.push_back("real");
    }

    MetricTable synth = real;
    for (auto& s : synth.sources) s = "k=40";

    const std::vector<MetricTable> synths = {synth};
    const auto reports = separation_table(real, synths);

    std::size_t scalar_count = 0;
    for (const auto& c : real.columns) {
        if (!is_gltr_column(c)) ++scalar_count;
    }
    EXPECT_EQ(reports.size(), scalar_count);  // one sampler
    for (const auto& r : reports) {
        EXPECT_EQ(r.sampler, "k=40");
        EXPECT_EQ(r.d, 0.0);  // identical samples
        EXPECT_EQ(r.n_real, 50u);
        EXPECT_EQ(r.n_synth, 50u);
        EXPECT_TRUE(!is_gltr_column(r.metric));
    }
}

TEST(SeparationTable, ConstantMetricsAtDifferentValuesSeparateFully) {
    MetricTable real;
    real.columns = {"m"};
    MetricTable synth;
    synth.columns = {"m"};
    for (int i = 0; i < 30; ++i) {
        real.rows.push_back({0.0});
        real.doc_ids.push_back("r" + std::to_string(i));
        real.sources.push_back("real");
        synth.rows.push_back({1.0});
        synth.doc_ids.push_back("s" + std::to_string(i));
        synth.sources.push_back("t=0.5");
    }
    const std::vector<MetricTable> synths = {synth};
    const auto reports = separation_table(real, synths);
    ASSERT_EQ(reports.size(), 1u);
    EXPECT_EQ(reports[0].d, 1.0);
}

TEST(DetectorIo, RoundTrip) {
    const auto real = constant_rows(40, {0.0, 3.0});
    const auto synth = constant_rows(40, {1.0, 3.0});
    DetectorConfig config;
    config.seed = 5;
    const TrainResult r = train_detector(real, synth, {"a", "b"}, config);

    const auto path = std::filesystem::temp_directory_path() / "burstlab_test_detector.json";
    save_detector(path, r.model);
    const DetectorModel loaded = load_detector(path);
    std::filesystem::remove(path);

    EXPECT_EQ(loaded.feature_names, r.model.feature_names);
    EXPECT_EQ(loaded.means, r.model.means);
    EXPECT_EQ(loaded.stds, r.model.stds);
    EXPECT_EQ(loaded.weights, r.model.weights);
    EXPECT_EQ(loaded.bias, r.model.bias);
    EXPECT_EQ(loaded.dropped_features, r.model.dropped_features);
    EXPECT_EQ(loaded.f1, r.model.f1);
    EXPECT_EQ(loaded.config.seed, r.model.config.seed);
}

TEST(DetectorModel, PredictProbabilityUsesStandardization) {
    const auto real = constant_rows(50, {0.0});
    const auto synth = constant_rows(50, {1.0});
    const TrainResult r = train_detector(real, synth, {"f0"});
    EXPECT_LT(r.model.predict_probability(std::vector<double>{0.0}), 0.5);
    EXPECT_GE(r.model.predict_probability(std::vector<double>{1.0}), 0.5);
}
