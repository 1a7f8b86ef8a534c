#pragma once

// Decoding strategies over sorted next-token distributions: temperature
// reshaping, top-k / top-p nuclei, categorical sampling, burst sampling with
// its corpus-learned bin distribution, and autoregressive generation.

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <span>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "burstlab/distribution.hpp"
#include "burstlab/error.hpp"
#include "burstlab/rng.hpp"
#include "burstlab/scoring.hpp"

namespace burstlab {

// Powers-of-ten rank bins: bin 0 covers ranks 1..10, bin i covers
// 10^i+1..10^(i+1), the final bin runs through V. Always partitions 1..V.
class BinLayout {
public:
    static BinLayout for_vocab(std::size_t vocab_size) {
        if (vocab_size < 1) throw UsageError("vocab_size must be positive");
        int n_bins = 1;
        std::size_t upper = 10;
        while (upper < vocab_size) {
            upper *= 10;
            ++n_bins;
        }
        return BinLayout(vocab_size, n_bins);
    }

    std::size_t vocab_size() const { return vocab_size_; }
    int n_bins() const { return n_bins_; }

    // 1-based inclusive rank range of a bin.
    std::pair<std::size_t, std::size_t> bin_range(int bin) const {
        if (bin < 0 || bin >= n_bins_) throw UsageError("bin index out of range");
        std::size_t lo = 1;
        std::size_t hi = 10;
        for (int i = 0; i < bin; ++i) {
            lo = hi + 1;
            hi *= 10;
        }
        if (bin == n_bins_ - 1) hi = vocab_size_;
        return {lo, std::min(hi, vocab_size_)};
    }

    int bin_of_rank(std::size_t rank) const {
        if (rank < 1 || rank > vocab_size_) throw UsageError("rank out of range");
        int bin = 0;
        std::size_t hi = 10;
        while (rank > hi && bin < n_bins_ - 1) {
            hi *= 10;
            ++bin;
        }
        return bin;
    }

    // Upper rank bound per bin, e.g. {10, 100, 1000, V}.
    std::vector<std::size_t> boundaries() const {
        std::vector<std::size_t> out;
        for (int i = 0; i < n_bins_; ++i) out.push_back(bin_range(i).second);
        return out;
    }

private:
    BinLayout(std::size_t vocab_size, int n_bins) : vocab_size_(vocab_size), n_bins_(n_bins) {}

    std::size_t vocab_size_ = 1;
    int n_bins_ = 1;
};

// Categorical distribution over the layout's bins: how often text uses each
// probability tier.
struct BinDistribution {
    std::vector<double> theta;

    void validate(const BinLayout& layout, double eps = 1e-9) const {
        if (static_cast<int>(theta.size()) != layout.n_bins()) {
            throw UsageError("theta does not match bin layout");
        }
        double total = 0.0;
        for (double t : theta) {
            if (!(t >= 0.0) || !std::isfinite(t)) throw DataError("invalid theta entry");
            total += t;
        }
        if (std::fabs(total - 1.0) > eps) throw DataError("theta does not sum to 1");
    }
};

struct NucleusSpec {
    enum class Kind { top_k, top_p, full };

    Kind kind = Kind::full;
    int k = 0;
    double p = 0.0;

    static NucleusSpec top_k(int k) {
        if (k < 1) throw UsageError("top-k requires k >= 1");
        return {Kind::top_k, k, 0.0};
    }
    static NucleusSpec top_p(double p) {
        if (!(p > 0.0) || p > 1.0) throw UsageError("top-p requires p in (0, 1]");
        return {Kind::top_p, 0, p};
    }
    static NucleusSpec full() { return {Kind::full, 0, 0.0}; }

    std::string label() const;
};

// The nucleus of a sorted distribution is always a rank prefix {1..cutoff}.
struct NucleusSet {
    std::size_t cutoff = 0;

    bool contains(std::size_t rank) const { return rank >= 1 && rank <= cutoff; }
    std::size_t size() const { return cutoff; }
};

// Top-p membership of rank r is decided by (inclusive_prefix - prob) < p,
// the exact expression recoverability applies to stored records, so a token
// sampled here always scores as recoverable under the same spec.
inline NucleusSet nucleus_set(const NextTokenDistribution& dist, const NucleusSpec& spec) {
    const std::size_t V = dist.size();
    if (V == 0) throw DataError("empty distribution");
    switch (spec.kind) {
        case NucleusSpec::Kind::full:
            return {V};
        case NucleusSpec::Kind::top_k:
            return {std::min<std::size_t>(static_cast<std::size_t>(spec.k), V)};
        case NucleusSpec::Kind::top_p: {
            double acc = 0.0;
            std::size_t cutoff = 0;
            for (std::size_t i = 0; i < V; ++i) {
                const double prob = dist.entries[i].prob;
                acc += prob;
                if (acc - prob < spec.p) {
                    cutoff = i + 1;
                } else {
                    break;
                }
            }
            return {cutoff};
        }
    }
    throw UsageError("unknown nucleus kind");
}

// p_i -> p_i^(1/t), renormalized. Monotone, so entry order is untouched.
inline NextTokenDistribution apply_temperature(const NextTokenDistribution& dist, double t) {
    if (!(t > 0.0)) throw UsageError("invalid temperature");
    if (t == 1.0) return dist;
    NextTokenDistribution out;
    out.entries.reserve(dist.size());
    const double inv_t = 1.0 / t;
    double total = 0.0;
    for (const auto& e : dist.entries) {
        const double w = std::pow(e.prob, inv_t);
        out.entries.push_back({e.token_id, w});
        total += w;
    }
    if (!(total > 0.0) || !std::isfinite(total)) throw DataError("temperature underflow");
    for (auto& e : out.entries) e.prob /= total;
    return out;
}

// Draw from the nucleus with probabilities renormalized over it; everything
// outside the nucleus has sampling probability exactly zero.
inline TokenId sample_token(const NextTokenDistribution& dist, const NucleusSpec& spec, Rng& rng) {
    const NucleusSet nucleus = nucleus_set(dist, spec);
    double total = 0.0;
    for (std::size_t i = 0; i < nucleus.cutoff; ++i) total += dist.entries[i].prob;
    if (!(total > 0.0)) throw DataError("empty nucleus");

    const double u = rng.next_double() * total;
    double acc = 0.0;
    std::size_t last_positive = nucleus.cutoff;
    for (std::size_t i = 0; i < nucleus.cutoff; ++i) {
        const double prob = dist.entries[i].prob;
        if (prob <= 0.0) continue;
        acc += prob;
        last_positive = i;
        if (u < acc) return dist.entries[i].token_id;
    }
    return dist.entries[last_positive].token_id;
}

// Burst modification: draw a bin from theta, zero everything outside it and
// renormalize inside. Entry positions are preserved, so position i still
// holds the token at rank i+1 of the input distribution; the output is not
// itself probability-sorted. If the drawn bin has no vocabulary ranks or no
// mass, redraw from theta restricted to usable bins (uniform if those
// weights are all zero) rather than returning an all-zero distribution.
inline NextTokenDistribution burst_modify(const NextTokenDistribution& dist,
                                          const BinDistribution& theta, const BinLayout& layout,
                                          Rng& rng) {
    theta.validate(layout);
    const std::size_t V = dist.size();
    if (V == 0) throw DataError("empty distribution");
    if (V != layout.vocab_size()) throw UsageError("distribution size does not match bin layout");

    const int n_bins = layout.n_bins();
    std::vector<double> bin_mass(n_bins, 0.0);
    std::vector<bool> bin_has_ranks(n_bins, false);
    for (std::size_t i = 0; i < V; ++i) {
        const int b = layout.bin_of_rank(i + 1);
        bin_mass[b] += dist.entries[i].prob;
        bin_has_ranks[b] = true;
    }

    double theta_total = 0.0;
    for (double t : theta.theta) theta_total += t;
    int bin = static_cast<int>(sample_index(theta.theta, theta_total, rng));

    if (!bin_has_ranks[bin] || !(bin_mass[bin] > 0.0)) {
        std::vector<double> usable(n_bins, 0.0);
        double usable_total = 0.0;
        int n_usable = 0;
        for (int b = 0; b < n_bins; ++b) {
            if (bin_has_ranks[b] && bin_mass[b] > 0.0) {
                usable[b] = theta.theta[b];
                usable_total += usable[b];
                ++n_usable;
            }
        }
        if (n_usable == 0) throw DataError("distribution has no probability mass");
        if (!(usable_total > 0.0)) {
            for (int b = 0; b < n_bins; ++b) {
                usable[b] = (bin_has_ranks[b] && bin_mass[b] > 0.0) ? 1.0 : 0.0;
            }
            usable_total = static_cast<double>(n_usable);
        }
        bin = static_cast<int>(sample_index(usable, usable_total, rng));
    }

    const auto [lo, hi] = layout.bin_range(bin);
    const double inside_mass = bin_mass[bin];
    NextTokenDistribution out;
    out.entries.reserve(V);
    for (std::size_t i = 0; i < V; ++i) {
        const std::size_t rank = i + 1;
        const double prob =
            (rank >= lo && rank <= hi) ? dist.entries[i].prob / inside_mass : 0.0;
        out.entries.push_back({dist.entries[i].token_id, prob});
    }
    return out;
}

// theta_i = fraction of realized tokens whose rank falls in bin i, over the
// model's scoring of the given documents.
template <NextTokenProvider M>
BinDistribution learn_bin_distribution(const M& model,
                                       std::span<const std::vector<TokenId>> corpus_subset,
                                       const BinLayout& layout) {
    std::size_t total = 0;
    std::vector<std::uint64_t> counts(layout.n_bins(), 0);
    for (const auto& doc : corpus_subset) {
        if (doc.empty()) continue;
        const DocumentScore score = score_document(model, doc);
        for (const auto& rec : score.records) {
            ++counts[layout.bin_of_rank(rec.rank)];
            ++total;
        }
    }
    if (total == 0) throw DataError("empty corpus subset");
    BinDistribution out;
    out.theta.reserve(counts.size());
    for (const auto c : counts) {
        out.theta.push_back(static_cast<double>(c) / static_cast<double>(total));
    }
    return out;
}

struct SamplerConfig {
    enum class Strategy { greedy, temperature, top_k, top_p, burst };

    Strategy strategy = Strategy::greedy;
    int k = 40;
    double p = 0.95;
    double t = 1.0;
    BinDistribution theta;  // burst only
    std::uint64_t rng_seed = 0;

    // Labels match the report column headers: "k=30", "p=0.9", "t=0.5",
    // "burst", "greedy".
    std::string label() const {
        const auto num = [](double v) {
            char buf[32];
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
            return std::string(buf, ptr);
        };
        switch (strategy) {
            case Strategy::greedy: return "greedy";
            case Strategy::temperature: return "t=" + num(t);
            case Strategy::top_k: return "k=" + std::to_string(k);
            case Strategy::top_p: return "p=" + num(p);
            case Strategy::burst: return "burst";
        }
        return "?";
    }
};

inline std::string NucleusSpec::label() const {
    switch (kind) {
        case Kind::top_k: return "k=" + std::to_string(k);
        case Kind::top_p: {
            char buf[32];
            auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, p);
            return "p=" + std::string(buf, ptr);
        }
        case Kind::full: return "full";
    }
    return "?";
}

// One decoding step: temperature first (when configured), then the strategy's
// nucleus truncation or burst modification, then a categorical draw.
inline TokenId sample_step(const NextTokenDistribution& raw, const SamplerConfig& config,
                           const BinLayout& layout, Rng& rng) {
    const NextTokenDistribution* dist = &raw;
    NextTokenDistribution reshaped;
    if (config.t != 1.0 && config.strategy != SamplerConfig::Strategy::greedy) {
        reshaped = apply_temperature(raw, config.t);
        dist = &reshaped;
    }
    switch (config.strategy) {
        case SamplerConfig::Strategy::greedy:
            return raw.entries.front().token_id;
        case SamplerConfig::Strategy::temperature:
            return sample_token(*dist, NucleusSpec::full(), rng);
        case SamplerConfig::Strategy::top_k:
            return sample_token(*dist, NucleusSpec::top_k(config.k), rng);
        case SamplerConfig::Strategy::top_p:
            return sample_token(*dist, NucleusSpec::top_p(config.p), rng);
        case SamplerConfig::Strategy::burst: {
            const NextTokenDistribution modified = burst_modify(*dist, config.theta, layout, rng);
            return sample_token(modified, NucleusSpec::full(), rng);
        }
    }
    throw UsageError("unknown sampling strategy");
}

// Returns prefix ++ continuation of exactly `length` tokens.
template <NextTokenProvider M>
std::vector<TokenId> generate(const M& model, std::span<const TokenId> prefix,
                              const SamplerConfig& config, std::size_t length, Rng& rng) {
    if (length < 1) throw UsageError("generation length must be at least 1");
    const BinLayout layout = BinLayout::for_vocab(model.vocab_size());
    if (config.strategy == SamplerConfig::Strategy::burst) config.theta.validate(layout);

    std::vector<TokenId> out(prefix.begin(), prefix.end());
    out.reserve(prefix.size() + length);
    NextTokenDistribution dist;
    for (std::size_t step = 0; step < length; ++step) {
        detail::eval_distribution(model, std::span<const TokenId>(out), dist);
        out.push_back(sample_step(dist, config, layout, rng));
    }
    return out;
}

template <NextTokenProvider M>
std::vector<TokenId> generate(const M& model, std::span<const TokenId> prefix,
                              const SamplerConfig& config, std::size_t length) {
    Rng rng(config.rng_seed);
    return generate(model, prefix, config, length, rng);
}

inline void save_bin_distribution(const std::filesystem::path& path, const BinLayout& layout,
                                  const BinDistribution& theta) {
    theta.validate(layout);
    nlohmann::json j;
    j["vocab_size"] = layout.vocab_size();
    j["boundaries"] = layout.boundaries();
    j["theta"] = theta.theta;
    std::ofstream f(path);
    if (!f) throw DataError("cannot write theta file: " + path.string());
    f << j.dump() << '\n';
}

struct LoadedBinDistribution {
    BinLayout layout = BinLayout::for_vocab(1);
    BinDistribution theta;
};

inline LoadedBinDistribution load_bin_distribution(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read theta file: " + path.string());
    nlohmann::json j;
    try {
        f >> j;
    } catch (const nlohmann::json::exception& e) {
        throw DataError("malformed theta file: " + std::string(e.what()));
    }
    LoadedBinDistribution out;
    out.layout = BinLayout::for_vocab(j.at("vocab_size").get<std::size_t>());
    out.theta.theta = j.at("theta").get<std::vector<double>>();
    out.theta.validate(out.layout);
    if (j.contains("boundaries") &&
        j.at("boundaries").get<std::vector<std::size_t>>() != out.layout.boundaries()) {
        throw DataError("theta file boundaries do not match vocab_size");
    }
    return out;
}

}  // namespace burstlab
