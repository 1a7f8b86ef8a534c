#pragma once

// Per-document metrics over scored text: recoverability, likelihood, rank
// statistics, GLTR bin fractions, per-token burstiness, and self-BLEU
// diversity over a collection.

#include <cmath>
#include <cstring>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "burstlab/error.hpp"
#include "burstlab/parallel.hpp"
#include "burstlab/rng.hpp"
#include "burstlab/sampling.hpp"
#include "burstlab/scoring.hpp"

namespace burstlab {

// Fraction of tokens the given nucleus would have allowed. Top-k counts a
// token iff rank <= k; top-p iff (cum_prob - prob) < p, the same inclusive
// boundary nucleus_set applies, so text sampled under a spec scores 1.0
// under that spec.
inline double recoverability(const DocumentScore& doc, const NucleusSpec& spec) {
    if (doc.records.empty()) throw DataError("nothing to score");
    if (spec.kind == NucleusSpec::Kind::full) return 1.0;
    std::size_t hits = 0;
    for (const auto& r : doc.records) {
        if (spec.kind == NucleusSpec::Kind::top_k) {
            if (r.rank <= static_cast<std::uint32_t>(spec.k)) ++hits;
        } else {
            if (r.cum_prob - r.prob < spec.p) ++hits;
        }
    }
    return static_cast<double>(hits) / static_cast<double>(doc.records.size());
}

inline double log_likelihood(const DocumentScore& doc) {
    if (doc.records.empty()) throw DataError("nothing to score");
    double sum = 0.0;
    for (const auto& r : doc.records) {
        if (!(r.prob > 0.0)) throw DataError("zero-probability token");
        sum += r.logprob;
    }
    return sum / static_cast<double>(doc.records.size());
}

inline double perplexity(const DocumentScore& doc) { return std::exp(-log_likelihood(doc)); }

inline double rank_score(const DocumentScore& doc) {
    if (doc.records.empty()) throw DataError("nothing to score");
    double sum = 0.0;
    for (const auto& r : doc.records) sum += static_cast<double>(r.rank);
    return sum / static_cast<double>(doc.records.size());
}

inline double log_rank_score(const DocumentScore& doc) {
    if (doc.records.empty()) throw DataError("nothing to score");
    double sum = 0.0;
    for (const auto& r : doc.records) sum += std::log(static_cast<double>(r.rank));
    return sum / static_cast<double>(doc.records.size());
}

inline std::vector<double> gltr_fractions(const DocumentScore& doc, const BinLayout& layout) {
    if (doc.records.empty()) throw DataError("nothing to score");
    std::vector<double> out(layout.n_bins(), 0.0);
    for (const auto& r : doc.records) out[layout.bin_of_rank(r.rank)] += 1.0;
    for (auto& v : out) v /= static_cast<double>(doc.records.size());
    return out;
}

enum class BurstinessMeasure { rank, prob, cum_prob };  // K, P, Top-P series

// Coefficient of variation (population std / mean) of the per-token series.
inline double burstiness(const DocumentScore& doc, BurstinessMeasure measure) {
    if (doc.records.empty()) throw DataError("nothing to score");
    const auto value = [measure](const TokenRecord& r) {
        switch (measure) {
            case BurstinessMeasure::rank: return static_cast<double>(r.rank);
            case BurstinessMeasure::prob: return r.prob;
            case BurstinessMeasure::cum_prob: return r.cum_prob;
        }
        return 0.0;
    };
    const double n = static_cast<double>(doc.records.size());
    double mean = 0.0;
    for (const auto& r : doc.records) mean += value(r);
    mean /= n;
    if (!(mean > 0.0)) throw DataError("undefined CV");
    double var = 0.0;
    for (const auto& r : doc.records) {
        const double d = value(r) - mean;
        var += d * d;
    }
    return std::sqrt(var / n) / mean;
}

namespace detail {

// n-gram multiset per order; keys are the raw id bytes.
struct NgramProfile {
    std::vector<std::unordered_map<std::string, std::uint32_t>> by_order;
    std::size_t length = 0;

    static NgramProfile build(std::span<const TokenId> doc, int max_n) {
        NgramProfile p;
        p.length = doc.size();
        p.by_order.resize(static_cast<std::size_t>(max_n));
        for (int n = 1; n <= max_n; ++n) {
            auto& map = p.by_order[static_cast<std::size_t>(n - 1)];
            if (doc.size() < static_cast<std::size_t>(n)) break;
            for (std::size_t i = 0; i + n <= doc.size(); ++i) {
                std::string key(reinterpret_cast<const char*>(doc.data() + i),
                                static_cast<std::size_t>(n) * sizeof(TokenId));
                ++map[key];
            }
        }
        return p;
    }
};

// BLEU of `cand` against a single reference: geometric mean of modified
// n-gram precisions (add-one smoothing when a precision would be zero) times
// the brevity penalty.
inline double bleu_pair(const NgramProfile& cand, const NgramProfile& ref, int max_n) {
    double log_sum = 0.0;
    int used = 0;
    for (int n = 1; n <= max_n; ++n) {
        const auto& cmap = cand.by_order[static_cast<std::size_t>(n - 1)];
        if (cand.length < static_cast<std::size_t>(n)) break;
        const double denom = static_cast<double>(cand.length - n + 1);
        const auto& rmap = ref.by_order[static_cast<std::size_t>(n - 1)];
        double matches = 0.0;
        for (const auto& [key, count] : cmap) {
            const auto it = rmap.find(key);
            if (it != rmap.end()) matches += std::min(count, it->second);
        }
        const double precision = matches > 0.0 ? matches / denom : 1.0 / (denom + 1.0);
        log_sum += std::log(precision);
        ++used;
    }
    if (used == 0) return 0.0;
    const double geo = std::exp(log_sum / used);
    const double c = static_cast<double>(cand.length);
    const double r = static_cast<double>(ref.length);
    const double bp = c > r ? 1.0 : std::exp(1.0 - r / c);
    return bp * geo;
}

}  // namespace detail

// Per-document self-BLEU: each document scored against every other document
// as an individual reference, averaged. Collections larger than
// `reference_cap` use a fixed-seed random subsample as the reference pool.
inline std::vector<double> self_bleu(std::span<const std::vector<TokenId>> docs, int max_n = 4,
                                     std::size_t reference_cap = 1000,
                                     std::uint64_t cap_seed = 0) {
    if (docs.size() < 2) throw DataError("self-BLEU needs a collection of at least 2 documents");
    if (max_n < 1) throw UsageError("self-BLEU max_n must be at least 1");

    std::vector<detail::NgramProfile> profiles(docs.size());
    parallel_for(docs.size(), [&](std::size_t i) {
        profiles[i] = detail::NgramProfile::build(docs[i], max_n);
    });

    std::vector<std::size_t> pool(docs.size());
    for (std::size_t i = 0; i < pool.size(); ++i) pool[i] = i;
    if (pool.size() > reference_cap) {
        Rng rng(cap_seed);
        rng.shuffle(pool);
        pool.resize(reference_cap);
    }

    std::vector<double> out(docs.size(), 0.0);
    parallel_for(docs.size(), [&](std::size_t i) {
        double sum = 0.0;
        std::size_t n_refs = 0;
        for (const std::size_t j : pool) {
            if (j == i) continue;
            sum += detail::bleu_pair(profiles[i], profiles[j], max_n);
            ++n_refs;
        }
        out[i] = n_refs == 0 ? 0.0 : sum / static_cast<double>(n_refs);
    });
    return out;
}

struct MetricVector {
    std::string doc_id;
    std::vector<double> values;  // parallel to metric_columns()
};

// Column order for metric tables; gltr bins come last so scalar metrics are
// a simple prefix.
inline std::vector<std::string> metric_columns(const BinLayout& layout,
                                               std::span<const NucleusSpec> recov_specs) {
    std::vector<std::string> cols = {"log_likelihood", "rank",           "log_rank",
                                     "perplexity",     "k_burstiness",   "p_burstiness",
                                     "top_p_burstiness", "self_bleu"};
    for (const auto& spec : recov_specs) cols.push_back("recov@" + spec.label());
    for (int b = 0; b < layout.n_bins(); ++b) cols.push_back("gltr_bin" + std::to_string(b));
    return cols;
}

inline bool is_gltr_column(const std::string& name) { return name.rfind("gltr_bin", 0) == 0; }

inline MetricVector compute_metric_vector(const DocumentScore& doc, const BinLayout& layout,
                                          std::span<const NucleusSpec> recov_specs,
                                          double self_bleu_value) {
    MetricVector v;
    v.doc_id = doc.doc_id;
    v.values.push_back(log_likelihood(doc));
    v.values.push_back(rank_score(doc));
    v.values.push_back(log_rank_score(doc));
    v.values.push_back(perplexity(doc));
    v.values.push_back(burstiness(doc, BurstinessMeasure::rank));
    v.values.push_back(burstiness(doc, BurstinessMeasure::prob));
    v.values.push_back(burstiness(doc, BurstinessMeasure::cum_prob));
    v.values.push_back(self_bleu_value);
    for (const auto& spec : recov_specs) v.values.push_back(recoverability(doc, spec));
    for (const double f : gltr_fractions(doc, layout)) v.values.push_back(f);
    return v;
}

struct MetricTable {
    std::vector<std::string> columns;
    std::vector<std::string> doc_ids;
    std::vector<std::string> sources;
    std::vector<std::vector<double>> rows;

    std::size_t n_rows() const { return rows.size(); }

    std::size_t column_index(const std::string& name) const {
        for (std::size_t i = 0; i < columns.size(); ++i) {
            if (columns[i] == name) return i;
        }
        throw DataError("metric table has no column: " + name);
    }

    std::vector<double> column(const std::string& name) const {
        const std::size_t idx = column_index(name);
        std::vector<double> out;
        out.reserve(rows.size());
        for (const auto& row : rows) out.push_back(row[idx]);
        return out;
    }
};

struct SelfBleuOptions {
    int max_n = 4;
    std::size_t reference_cap = 1000;
    std::uint64_t cap_seed = 0;
};

// Full metric table for one collection of scored documents. `token_docs`
// holds the realized token ids used for self-BLEU and must parallel `scores`.
inline MetricTable compute_metric_table(std::span<const DocumentScore> scores,
                                        std::span<const std::vector<TokenId>> token_docs,
                                        const BinLayout& layout,
                                        std::span<const NucleusSpec> recov_specs,
                                        const std::string& source,
                                        const SelfBleuOptions& sb = {}) {
    if (scores.size() != token_docs.size()) {
        throw UsageError("scores and token documents must be parallel");
    }
    const std::vector<double> sb_values =
        scores.size() >= 2 ? self_bleu(token_docs, sb.max_n, sb.reference_cap, sb.cap_seed)
                           : std::vector<double>(scores.size(), 0.0);

    MetricTable table;
    table.columns = metric_columns(layout, recov_specs);
    table.doc_ids.resize(scores.size());
    table.sources.assign(scores.size(), source);
    table.rows.resize(scores.size());
    parallel_for(scores.size(), [&](std::size_t i) {
        MetricVector v = compute_metric_vector(scores[i], layout, recov_specs, sb_values[i]);
        table.doc_ids[i] = v.doc_id;
        table.rows[i] = std::move(v.values);
    });
    return table;
}

}  // namespace burstlab
