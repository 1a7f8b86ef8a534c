// Acceptance suite: exact identities, oracle equivalences, closure
// properties, and an end-to-end reproducibility run over the bundled sample
// corpus. Prints one [ACCEPT] line per criterion.
//
// Requires BURSTLAB_CLI_BIN and BURSTLAB_DATA_DIR (set by ctest).

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <numeric>
#include <sstream>
#include <string>
#include <vector>

#include <gtest/gtest.h>

#include "burstlab/burstlab.hpp"

namespace fs = std::filesystem;
using namespace burstlab;

namespace {

void report(int criterion, const std::string& name, bool soft_note = false) {
    const bool failed = ::testing::Test::HasFailure();
    std::cout << "[ACCEPT] criterion " << criterion << " (" << name
              << "): " << (failed ? "FAIL" : "PASS") << (soft_note ? " (soft)" : "") << std::endl;
}

std::string read_file(const fs::path& p) {
    std::ifstream f(p, std::ios::binary);
    std::ostringstream body;
    body << f.rdbuf();
    return body.str();
}

fs::path data_dir() {
    const char* env = std::getenv("BURSTLAB_DATA_DIR");
    if (env && *env) return env;
    return fs::path("data");
}

std::string cli_bin() {
    const char* env = std::getenv("BURSTLAB_CLI_BIN");
    return env ? env : "";
}

// Shared desk-scale world: a model trained on part of the bundled corpus,
// plus prepared (prefix, sample) pairs and scored real documents.
struct World {
    NgramModel model;
    BinLayout layout = BinLayout::for_vocab(1);
    std::vector<PreparedPair> pairs;
    std::vector<std::vector<TokenId>> real_token_docs;
    std::vector<DocumentScore> real_scores;

    static const World& get() {
        static World w = build();
        return w;
    }

    static World build() {
        World w;
        const LoadResult loaded = load_corpus(data_dir() / "sample_corpus.jsonl");
        if (loaded.documents.size() < 500) {
            throw std::runtime_error("bundled sample corpus missing or too small");
        }
        std::vector<Document> training(loaded.documents.begin(), loaded.documents.begin() + 400);

        std::vector<std::vector<std::string>> tokenized;
        for (const auto& d : training) tokenized.push_back(tokenize(d.text));
        w.model = train_ngram(tokenized, 2, 0.01, 2000);
        w.layout = BinLayout::for_vocab(w.model.vocab_size());

        PrepConfig prep_config;
        prep_config.subset_size = 300;
        prep_config.seed = 7;
        prep_config.prefix_rule = PrefixRule::by_fraction(0.10);
        w.pairs = prepare(training, prep_config);

        for (const auto& pair : w.pairs) {
            w.real_token_docs.push_back(w.model.vocab().encode(tokenize(pair.full)));
        }
        for (std::size_t i = 0; i < w.real_token_docs.size(); ++i) {
            w.real_scores.push_back(
                score_document(w.model, w.real_token_docs[i], w.pairs[i].id));
        }
        return w;
    }
};

// ---------------------------------------------------------------------------
// End-to-end pipeline runner (criteria 7 and 8).

struct PipelineRun {
    fs::path dir;
    double seconds = 0.0;
    bool ok = false;
    std::string failure;
};

int run_cmd(const std::string& args) {
    static int counter = 0;
    const fs::path log =
        fs::temp_directory_path() / ("burstlab_accept_" + std::to_string(counter++) + ".log");
    const std::string cmd = cli_bin() + " " + args + " > " + log.string() + " 2>&1";
    const int rc = std::system(cmd.c_str());
    const int code = WIFEXITED(rc) ? WEXITSTATUS(rc) : -1;
    if (code != 0) {
        std::cerr << "command failed (" << code << "): " << cmd << "\n" << read_file(log);
    }
    fs::remove(log);
    return code;
}

PipelineRun run_pipeline(const std::string& tag) {
    PipelineRun run;
    run.dir = fs::temp_directory_path() / ("burstlab_pipeline_" + tag);
    fs::remove_all(run.dir);
    fs::create_directories(run.dir);
    const std::string d = run.dir.string() + "/";
    const std::string corpus = (data_dir() / "sample_corpus.jsonl").string();

    const auto t0 = std::chrono::steady_clock::now();
    const auto step = [&](const std::string& args) {
        if (!run.ok) return;
        if (run_cmd(args) != 0) {
            run.ok = false;
            run.failure = args;
        }
    };
    run.ok = true;
    step("train --corpus " + corpus + " --order 2 --alpha 0.01 --vocab-cap 5000 --seed 1 --out " +
         d + "model/model.json");
    step("prepare --corpus " + corpus + " --subset 1000 --max-chars 2000 --prefix-fraction 0.10 "
         "--seed 11 --out " + d + "prep/pairs.jsonl");
    step("learn-bins --model " + d + "model/model.json --corpus " + d +
         "prep/pairs.jsonl --subset 500 --seed 12 --out " + d + "bins/theta.json");

    const std::vector<std::pair<std::string, std::string>> strategies = {
        {"k40", "--strategy topk --k 40 --seed 21"},
        {"p99", "--strategy topp --p 0.99 --seed 22"},
        {"t05", "--strategy temp --t 0.5 --seed 23"},
        {"burst", "--strategy burst --theta " + d + "bins/theta.json --seed 24"},
    };
    for (const auto& [name, flags] : strategies) {
        step("generate --model " + d + "model/model.json --pairs " + d + "prep/pairs.jsonl " +
             flags + " --length 256 --out " + d + "gen_" + name + "/gens.jsonl");
    }

    const std::string score_common =
        " --nucleus-specs k=10,k=30,k=40,k=50,p=0.9,p=0.95,p=0.99 --selfbleu-cap 200";
    step("score --model " + d + "model/model.json --texts " + d +
         "prep/pairs.jsonl --source real" + score_common + " --out " + d + "score_real/metrics.csv");
    for (const auto& [name, flags] : strategies) {
        step("score --model " + d + "model/model.json --texts " + d + "gen_" + name +
             "/gens.jsonl" + score_common + " --out " + d + "score_" + name + "/metrics.csv");
    }

    step("separate --real " + d + "score_real/metrics.csv --synth " + d +
         "score_k40/metrics.csv " + d + "score_p99/metrics.csv " + d + "score_t05/metrics.csv " +
         d + "score_burst/metrics.csv --out " + d + "sep/separation.csv");
    step("detect --real " + d + "score_real/metrics.csv --synth " + d +
         "score_t05/metrics.csv --features all --seed 31 --out " + d + "det_all/detector.json");
    step("detect --real " + d + "score_real/metrics.csv --synth " + d +
         "score_t05/metrics.csv --features gltr --seed 31 --out " + d + "det_gltr/detector.json");

    run.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    return run;
}

const PipelineRun& pipeline_run_a() {
    static PipelineRun run = run_pipeline("a");
    return run;
}

const PipelineRun& pipeline_run_b() {
    static PipelineRun run = run_pipeline("b");
    return run;
}

}  // namespace

// ---------------------------------------------------------------------------
// Criterion 1: burst sampling distributional correctness.

TEST(Acceptance, Criterion1BurstDistribution) {
    const World& w = World::get();
    // A frequent unigram context gives a realistic long-tailed distribution.
    const std::vector<TokenId> ctx = {w.model.vocab().id_of("the")};
    const NextTokenDistribution dist = w.model.next_distribution(ctx);
    const std::size_t V = dist.size();
    ASSERT_EQ(w.layout.n_bins(), 4);

    // (a) theta = (1,0,0,0): draws match exact top-10 renormalized
    // probabilities within total-variation distance 0.02.
    {
        BinDistribution theta;
        theta.theta = {1.0, 0.0, 0.0, 0.0};
        Rng rng(1001);
        const int n = 100000;
        std::vector<std::uint64_t> counts(V, 0);
        for (int i = 0; i < n; ++i) {
            const NextTokenDistribution modified = burst_modify(dist, theta, w.layout, rng);
            const TokenId tok = sample_token(modified, NucleusSpec::full(), rng);
            ++counts[dist.position_of(tok)];
        }
        double mass10 = 0.0;
        for (int i = 0; i < 10; ++i) mass10 += dist.entries[i].prob;
        double tv = 0.0;
        for (std::size_t i = 0; i < V; ++i) {
            const double expected = i < 10 ? dist.entries[i].prob / mass10 : 0.0;
            tv += std::fabs(static_cast<double>(counts[i]) / n - expected);
        }
        tv *= 0.5;
        std::cout << "  criterion 1a: TV(empirical, top-10 renorm) = " << tv << "\n";
        EXPECT_LE(tv, 0.02);
    }

    // (b) general theta: bin-selection frequencies pass a chi-square
    // goodness-of-fit test at the 99% level (df = 3, critical 11.3449).
    {
        BinDistribution theta;
        theta.theta = {0.5, 0.3, 0.15, 0.05};
        Rng rng(2002);
        const int n = 100000;
        std::vector<std::uint64_t> bin_counts(4, 0);
        for (int i = 0; i < n; ++i) {
            const NextTokenDistribution modified = burst_modify(dist, theta, w.layout, rng);
            for (std::size_t pos = 0; pos < V; ++pos) {
                if (modified.entries[pos].prob > 0.0) {
                    ++bin_counts[w.layout.bin_of_rank(pos + 1)];
                    break;
                }
            }
        }
        double chi2 = 0.0;
        for (int b = 0; b < 4; ++b) {
            const double expected = theta.theta[b] * n;
            const double diff = static_cast<double>(bin_counts[b]) - expected;
            chi2 += diff * diff / expected;
        }
        std::cout << "  criterion 1b: chi-square = " << chi2 << " (critical 11.3449)\n";
        EXPECT_LE(chi2, 11.3449);
    }
    report(1, "burst sampling distributional correctness");
}

// ---------------------------------------------------------------------------
// Criterion 2: recoverability closure and monotonicity.

TEST(Acceptance, Criterion2RecoverabilityClosure) {
    const World& w = World::get();
    std::vector<NucleusSpec> grid;
    for (const int k : {30, 40, 50}) grid.push_back(NucleusSpec::top_k(k));
    for (const double p : {0.9, 0.95, 0.99}) grid.push_back(NucleusSpec::top_p(p));

    for (const auto& spec : grid) {
        SamplerConfig config;
        if (spec.kind == NucleusSpec::Kind::top_k) {
            config.strategy = SamplerConfig::Strategy::top_k;
            config.k = spec.k;
        } else {
            config.strategy = SamplerConfig::Strategy::top_p;
            config.p = spec.p;
        }
        for (int doc = 0; doc < 40; ++doc) {
            const std::vector<TokenId> prefix_ids =
                w.model.vocab().encode(tokenize(w.pairs[doc].prefix));
            Rng rng(substream_seed(3000 + doc, static_cast<std::uint64_t>(spec.k) +
                                                   static_cast<std::uint64_t>(spec.p * 1000)));
            const std::vector<TokenId> full = generate(w.model, prefix_ids, config, 128, rng);
            DocumentScore score = score_document(w.model, full, "closure");
            // Metrics over the generated continuation only.
            score.records.erase(score.records.begin(),
                                score.records.begin() +
                                    static_cast<std::ptrdiff_t>(prefix_ids.size()));
            ASSERT_EQ(score.records.size(), 128u);
            EXPECT_EQ(recoverability(score, spec), 1.0)
                << "spec " << spec.label() << " doc " << doc;
        }
    }

    // Monotone in k and p on every scored document (real and generated).
    for (std::size_t i = 0; i < 60 && i < w.real_scores.size(); ++i) {
        double prev = 0.0;
        for (const int k : {1, 5, 10, 30, 40, 50, 100, 500}) {
            const double r = recoverability(w.real_scores[i], NucleusSpec::top_k(k));
            EXPECT_GE(r, prev);
            prev = r;
        }
        prev = 0.0;
        for (const double p : {0.1, 0.3, 0.5, 0.7, 0.9, 0.95, 0.99, 1.0}) {
            const double r = recoverability(w.real_scores[i], NucleusSpec::top_p(p));
            EXPECT_GE(r, prev);
            prev = r;
        }
    }
    report(2, "recoverability closure");
}

// ---------------------------------------------------------------------------
// Criterion 3: bin-learning self-consistency.

TEST(Acceptance, Criterion3BinLearningSelfConsistency) {
    const World& w = World::get();
    BinDistribution star;
    star.theta = {0.55, 0.25, 0.15, 0.05};

    SamplerConfig config;
    config.strategy = SamplerConfig::Strategy::burst;
    config.theta = star;

    std::vector<std::vector<TokenId>> generated(200);
    std::size_t total_tokens = 0;
    parallel_for(generated.size(), [&](std::size_t d) {
        const std::vector<TokenId> prefix_ids =
            w.model.vocab().encode(tokenize(w.pairs[d % w.pairs.size()].prefix));
        Rng rng(substream_seed(4004, d));
        std::vector<TokenId> full = generate(w.model, prefix_ids, config, 256, rng);
        // Keep only the burst-sampled continuation.
        full.erase(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(prefix_ids.size()));
        generated[d] = std::move(full);
    });
    for (const auto& doc : generated) total_tokens += doc.size();
    ASSERT_GE(total_tokens, 50000u);

    const BinDistribution learned = learn_bin_distribution(w.model, generated, w.layout);
    double l1 = 0.0;
    for (std::size_t b = 0; b < star.theta.size(); ++b) {
        l1 += std::fabs(learned.theta[b] - star.theta[b]);
    }
    std::cout << "  criterion 3: L1(theta_hat, theta_star) = " << l1 << " over " << total_tokens
              << " tokens\n";
    EXPECT_LT(l1, 0.05);
    report(3, "bin-learning self-consistency");
}

// ---------------------------------------------------------------------------
// Criterion 4: metric identities.

TEST(Acceptance, Criterion4MetricIdentities) {
    const World& w = World::get();
    ASSERT_GE(w.real_scores.size(), 100u);
    for (const auto& doc : w.real_scores) {
        const double ll = log_likelihood(doc);
        const double ppl = perplexity(doc);
        EXPECT_LE(std::fabs(ppl - std::exp(-ll)) / std::exp(-ll), 1e-6);

        const std::vector<double> gltr = gltr_fractions(doc, w.layout);
        EXPECT_NEAR(std::accumulate(gltr.begin(), gltr.end(), 0.0), 1.0, 1e-9);

        EXPECT_LE(std::exp(log_rank_score(doc)), rank_score(doc) + 1e-9);

        EXPECT_EQ(recoverability(doc, NucleusSpec::top_k(10)), gltr[0]);
    }
    report(4, "metric identities");
}

// ---------------------------------------------------------------------------
// Criterion 5: KS oracle equivalence.

namespace {

double ks_oracle(std::span<const double> a, std::span<const double> b) {
    const auto cdf = [](std::span<const double> s, double x) {
        std::size_t count = 0;
        for (const double v : s) {
            if (v <= x) ++count;
        }
        return static_cast<double>(count) / static_cast<double>(s.size());
    };
    double d = 0.0;
    for (const double x : a) d = std::max(d, std::fabs(cdf(a, x) - cdf(b, x)));
    for (const double x : b) d = std::max(d, std::fabs(cdf(a, x) - cdf(b, x)));
    return d;
}

}  // namespace

TEST(Acceptance, Criterion5KsOracleEquivalence) {
    Rng rng(5005);
    for (int trial = 0; trial < 1000; ++trial) {
        std::vector<double> a(1 + rng.next_below(50));
        std::vector<double> b(1 + rng.next_below(50));
        const bool gridded = trial % 3 != 0;  // ties, including across samples
        for (auto& v : a) {
            v = gridded ? static_cast<double>(rng.next_below(15)) / 5.0 : rng.next_double();
        }
        for (auto& v : b) {
            v = gridded ? static_cast<double>(rng.next_below(15)) / 5.0 : rng.next_double();
        }
        ASSERT_EQ(ks_statistic(a, b), ks_oracle(a, b)) << "trial " << trial;
    }

    const std::vector<double> same = {3.0, 1.0, 2.0};
    EXPECT_EQ(ks_statistic(same, same), 0.0);
    const std::vector<double> low = {0.0, 0.1, 0.2};
    const std::vector<double> high = {5.0, 6.0};
    EXPECT_EQ(ks_statistic(low, high), 1.0);
    report(5, "KS oracle equivalence");
}

// ---------------------------------------------------------------------------
// Criterion 6: detector sanity.

TEST(Acceptance, Criterion6DetectorSanity) {
    // Perfectly separable fixture.
    {
        const std::vector<std::vector<double>> real(100, std::vector<double>{0.0});
        const std::vector<std::vector<double>> synth(100, std::vector<double>{1.0});
        const TrainResult r = train_detector(real, synth, {"f0"});
        EXPECT_EQ(r.f1, 1.0);
    }

    // Label-permuted real data concentrates near chance across 20 seeds.
    {
        const World& w = World::get();
        std::vector<NucleusSpec> specs = {NucleusSpec::top_k(40)};
        std::vector<std::vector<double>> vectors;
        for (const auto& doc : w.real_scores) {
            const MetricVector v = compute_metric_vector(doc, w.layout, specs, 0.0);
            vectors.push_back(v.values);
        }
        std::vector<std::string> names = metric_columns(w.layout, specs);

        double sum_f1 = 0.0;
        double min_f1 = 1.0;
        double max_f1 = 0.0;
        const int n_seeds = 20;
        for (int seed = 0; seed < n_seeds; ++seed) {
            std::vector<std::size_t> order(vectors.size());
            std::iota(order.begin(), order.end(), 0);
            Rng rng(substream_seed(6006, static_cast<std::uint64_t>(seed)));
            rng.shuffle(order);
            std::vector<std::vector<double>> fake_real;
            std::vector<std::vector<double>> fake_synth;
            for (std::size_t i = 0; i < order.size(); ++i) {
                (i % 2 == 0 ? fake_real : fake_synth).push_back(vectors[order[i]]);
            }
            DetectorConfig config;
            config.seed = static_cast<std::uint64_t>(seed);
            const TrainResult r = train_detector(fake_real, fake_synth, names, config);
            sum_f1 += r.f1;
            min_f1 = std::min(min_f1, r.f1);
            max_f1 = std::max(max_f1, r.f1);
        }
        const double mean_f1 = sum_f1 / n_seeds;
        std::cout << "  criterion 6: permuted-label F1 mean " << mean_f1 << ", range [" << min_f1
                  << ", " << max_f1 << "] over " << n_seeds << " seeds\n";
        EXPECT_GE(mean_f1, 0.3);
        EXPECT_LE(mean_f1, 0.7);
    }

    // Seed determinism down to the serialized file.
    {
        Rng rng(7007);
        std::vector<std::vector<double>> real;
        std::vector<std::vector<double>> synth;
        for (int i = 0; i < 60; ++i) {
            real.push_back({rng.next_double(), rng.next_double()});
            synth.push_back({rng.next_double() + 0.3, rng.next_double()});
        }
        DetectorConfig config;
        config.seed = 99;
        const TrainResult a = train_detector(real, synth, {"x", "y"}, config);
        const TrainResult b = train_detector(real, synth, {"x", "y"}, config);
        const fs::path pa = fs::temp_directory_path() / "burstlab_accept_det_a.json";
        const fs::path pb = fs::temp_directory_path() / "burstlab_accept_det_b.json";
        save_detector(pa, a.model);
        save_detector(pb, b.model);
        EXPECT_EQ(read_file(pa), read_file(pb));
        fs::remove(pa);
        fs::remove(pb);
    }
    report(6, "detector sanity");
}

// ---------------------------------------------------------------------------
// Criterion 7 (soft): qualitative trend check on the bundled corpus.

TEST(Acceptance, Criterion7QualitativeTrend) {
    const PipelineRun& run = pipeline_run_a();
    ASSERT_TRUE(run.ok) << "pipeline failed at: " << run.failure;

    const auto reports = read_separation_csv(run.dir / "sep" / "separation.csv");
    ASSERT_FALSE(reports.empty());
    std::map<std::string, std::pair<double, std::size_t>> by_sampler;
    for (const auto& r : reports) {
        by_sampler[r.sampler].first += r.d;
        by_sampler[r.sampler].second += 1;
    }
    ASSERT_TRUE(by_sampler.count("t=0.5"));
    ASSERT_TRUE(by_sampler.count("p=0.99"));
    const double avg_t05 = by_sampler["t=0.5"].first / by_sampler["t=0.5"].second;
    const double avg_p99 = by_sampler["p=0.99"].first / by_sampler["p=0.99"].second;
    const bool agrees = avg_t05 > avg_p99;
    std::cout << "  criterion 7: avg D t=0.5 = " << avg_t05 << ", p=0.99 = " << avg_p99
              << " -> trend " << (agrees ? "AGREES" : "DISAGREES")
              << " with the reference ordering (reported, not gated)\n";
    for (const auto& [name, acc] : by_sampler) {
        std::cout << "    avg D " << name << " = " << acc.first / acc.second << "\n";
    }
    report(7, "qualitative trend check", true);
}

// ---------------------------------------------------------------------------
// Criterion 8: end-to-end reproducibility and runtime.

TEST(Acceptance, Criterion8EndToEndReproducibility) {
    const PipelineRun& a = pipeline_run_a();
    const PipelineRun& b = pipeline_run_b();
    ASSERT_TRUE(a.ok) << "pipeline failed at: " << a.failure;
    ASSERT_TRUE(b.ok) << "pipeline failed at: " << b.failure;

    std::cout << "  criterion 8: pipeline runtimes " << a.seconds << "s and " << b.seconds
              << "s (limit 600s each)\n";
    EXPECT_LT(a.seconds, 600.0);
    EXPECT_LT(b.seconds, 600.0);

    // Every produced artifact except the timestamped manifests must be
    // byte-identical across the two runs.
    std::size_t compared = 0;
    for (const auto& entry : fs::recursive_directory_iterator(a.dir)) {
        if (!entry.is_regular_file()) continue;
        if (entry.path().filename() == "manifest.json") continue;
        const fs::path rel = fs::relative(entry.path(), a.dir);
        const fs::path other = b.dir / rel;
        ASSERT_TRUE(fs::exists(other)) << rel;
        EXPECT_EQ(read_file(entry.path()), read_file(other)) << rel;
        ++compared;
    }
    std::cout << "  criterion 8: " << compared << " artifacts byte-identical across runs\n";
    EXPECT_GE(compared, 12u);

    fs::remove_all(a.dir);
    fs::remove_all(b.dir);
    report(8, "end-to-end reproducibility");
}
