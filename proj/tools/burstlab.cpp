// burstlab command-line tool: train the n-gram backbone, learn burst-sampling
// bin distributions, generate continuations, score text into metric tables,
// and run the separation / detection analyses.

#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "burstlab/burstlab.hpp"

namespace fs = std::filesystem;
using namespace burstlab;

namespace {

struct CommandContext {
    RunManifest manifest;

    explicit CommandContext(std::string command) {
        manifest.command = std::move(command);
        manifest.started = utc_timestamp();
    }

    void finish(const fs::path& out_file) {
        manifest.finished = utc_timestamp();
        const fs::path dir = out_file.has_parent_path() ? out_file.parent_path() : fs::path(".");
        fs::create_directories(dir);
        write_manifest(dir, manifest);
    }
};

std::vector<std::vector<std::string>> tokenize_documents(const std::vector<Document>& docs) {
    std::vector<std::vector<std::string>> out;
    out.reserve(docs.size());
    for (const auto& d : docs) out.push_back(tokenize(d.text));
    return out;
}

std::vector<NucleusSpec> parse_nucleus_specs(const std::string& text) {
    std::vector<NucleusSpec> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        const auto eq = item.find('=');
        if (eq == std::string::npos || eq + 1 >= item.size()) {
            throw UsageError("bad nucleus spec: " + item + " (expected k=N or p=X)");
        }
        const std::string kind = item.substr(0, eq);
        const std::string value = item.substr(eq + 1);
        try {
            if (kind == "k") {
                out.push_back(NucleusSpec::top_k(std::stoi(value)));
            } else if (kind == "p") {
                out.push_back(NucleusSpec::top_p(std::stod(value)));
            } else {
                throw UsageError("bad nucleus spec kind: " + kind);
            }
        } catch (const std::invalid_argument&) {
            throw UsageError("bad nucleus spec value: " + item);
        }
    }
    if (out.empty()) throw UsageError("no nucleus specs given");
    return out;
}

std::string describe_layout(const BinLayout& layout) {
    std::string out;
    for (int b = 0; b < layout.n_bins(); ++b) {
        const auto [lo, hi] = layout.bin_range(b);
        if (b) out += ", ";
        out += std::to_string(lo) + "-" + std::to_string(hi);
    }
    return out;
}

// ---------------------------------------------------------------------------
// train

int cmd_train(const fs::path& corpus_path, int order, double alpha, std::size_t vocab_cap,
              std::uint64_t min_count, std::uint64_t seed, const fs::path& out) {
    CommandContext ctx("train");
    const LoadResult loaded = load_corpus(corpus_path);
    if (loaded.skipped_empty > 0) {
        std::cerr << "warning: skipped " << loaded.skipped_empty << " empty document(s)\n";
    }
    const auto docs = tokenize_documents(loaded.documents);
    const NgramModel model = train_ngram(docs, order, alpha, vocab_cap, min_count);

    fs::create_directories(out.has_parent_path() ? out.parent_path() : fs::path("."));
    model.save(out);

    const BinLayout layout = BinLayout::for_vocab(model.vocab_size());
    std::cout << "trained order-" << order << " model on " << docs.size() << " documents\n"
              << "vocabulary size: " << model.vocab_size() << "\n"
              << "bin layout: " << describe_layout(layout) << " (" << layout.n_bins()
              << " bins)\n";

    ctx.manifest.seed = seed;
    ctx.manifest.config = {{"order", order},
                           {"alpha", alpha},
                           {"vocab_cap", vocab_cap},
                           {"min_count", min_count}};
    ctx.manifest.inputs = {corpus_path.string()};
    ctx.manifest.outputs = {out.string()};
    ctx.finish(out);
    return 0;
}

// ---------------------------------------------------------------------------
// prepare

int cmd_prepare(const fs::path& corpus_path, std::optional<std::size_t> subset,
                std::size_t max_chars, double prefix_fraction, std::optional<int> prefix_words,
                bool paragraph_mode, std::uint64_t seed, const fs::path& out) {
    CommandContext ctx("prepare");
    const LoadResult loaded = load_corpus(corpus_path);
    if (loaded.skipped_empty > 0) {
        std::cerr << "warning: skipped " << loaded.skipped_empty << " empty document(s)\n";
    }

    PrepConfig config;
    config.max_chars = max_chars;
    config.subset_size = subset;
    config.paragraph_mode = paragraph_mode;
    config.seed = seed;
    config.prefix_rule = prefix_words ? PrefixRule::by_words(*prefix_words)
                                      : PrefixRule::by_fraction(prefix_fraction);

    const auto pairs = prepare(loaded.documents, config);
    fs::create_directories(out.has_parent_path() ? out.parent_path() : fs::path("."));
    write_pairs(out, pairs);
    std::cout << "prepared " << pairs.size() << " (prefix, sample) pairs\n";

    ctx.manifest.seed = seed;
    ctx.manifest.config = {{"max_chars", max_chars},
                           {"paragraph_mode", paragraph_mode},
                           {"prefix_rule", prefix_words ? "words=" + std::to_string(*prefix_words)
                                                        : "fraction=" + format_double(prefix_fraction)}};
    if (subset) ctx.manifest.config["subset"] = *subset;
    ctx.manifest.inputs = {corpus_path.string()};
    ctx.manifest.outputs = {out.string()};
    ctx.finish(out);
    return 0;
}

// ---------------------------------------------------------------------------
// learn-bins

int cmd_learn_bins(const fs::path& model_path, const fs::path& corpus_path, std::size_t subset,
                   std::uint64_t seed, const fs::path& out) {
    CommandContext ctx("learn-bins");
    const NgramModel model = NgramModel::load(model_path);

    std::vector<TextSample> samples;
    if (fs::is_directory(corpus_path)) {
        for (const auto& doc : load_corpus(corpus_path).documents) {
            samples.push_back({doc.id, "", doc.text, ""});
        }
    } else {
        samples = read_samples(corpus_path);
    }
    if (samples.empty()) throw DataError("empty corpus subset");

    std::vector<std::size_t> order(samples.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    Rng rng(seed);
    rng.shuffle(order);
    if (order.size() > subset) order.resize(subset);

    std::vector<std::vector<TokenId>> docs;
    docs.reserve(order.size());
    for (const std::size_t i : order) {
        docs.push_back(model.vocab().encode(tokenize(samples[i].full)));
    }

    const BinLayout layout = BinLayout::for_vocab(model.vocab_size());
    const BinDistribution theta = learn_bin_distribution(model, docs, layout);

    fs::create_directories(out.has_parent_path() ? out.parent_path() : fs::path("."));
    save_bin_distribution(out, layout, theta);

    std::cout << "learned bin distribution over " << docs.size() << " documents\n" << "theta:";
    for (const double t : theta.theta) std::cout << ' ' << format_double(t);
    std::cout << '\n';

    ctx.manifest.seed = seed;
    ctx.manifest.config = {{"subset", subset}};
    ctx.manifest.inputs = {model_path.string(), corpus_path.string()};
    ctx.manifest.outputs = {out.string()};
    ctx.finish(out);
    return 0;
}

// ---------------------------------------------------------------------------
// generate

int cmd_generate(const fs::path& model_path, const fs::path& pairs_path,
                 const std::string& strategy, int k, double p, double t,
                 const std::string& theta_path, std::size_t length, std::uint64_t seed,
                 const fs::path& out) {
    CommandContext ctx("generate");
    const NgramModel model = NgramModel::load(model_path);
    const std::vector<TextSample> pairs = read_samples(pairs_path);
    if (pairs.empty()) throw DataError("no pairs to continue");

    SamplerConfig config;
    config.k = k;
    config.p = p;
    config.t = t;
    if (strategy == "greedy") {
        config.strategy = SamplerConfig::Strategy::greedy;
    } else if (strategy == "temp") {
        config.strategy = SamplerConfig::Strategy::temperature;
    } else if (strategy == "topk") {
        config.strategy = SamplerConfig::Strategy::top_k;
    } else if (strategy == "topp") {
        config.strategy = SamplerConfig::Strategy::top_p;
    } else if (strategy == "burst") {
        config.strategy = SamplerConfig::Strategy::burst;
        if (theta_path.empty()) throw UsageError("--theta is required for burst sampling");
        const LoadedBinDistribution loaded = load_bin_distribution(theta_path);
        if (loaded.layout.vocab_size() != model.vocab_size()) {
            throw DataError("theta file vocab_size does not match the model");
        }
        config.theta = loaded.theta;
    } else {
        throw UsageError("unknown strategy: " + strategy);
    }
    const std::string label = config.label();

    std::vector<TextSample> generations(pairs.size());
    parallel_for(pairs.size(), [&](std::size_t i) {
        const std::vector<TokenId> prefix_ids = model.vocab().encode(tokenize(pairs[i].prefix));
        Rng rng(substream_seed(seed, i));
        const std::vector<TokenId> full_ids = generate(model, prefix_ids, config, length, rng);
        const std::span<const TokenId> continuation(full_ids.data() + prefix_ids.size(),
                                                    full_ids.size() - prefix_ids.size());
        const std::string continuation_text = model.vocab().decode(continuation);
        TextSample s;
        s.id = pairs[i].id;
        s.prefix = pairs[i].prefix;
        s.full = pairs[i].prefix.empty() ? continuation_text
                                         : pairs[i].prefix + " " + continuation_text;
        s.label = label;
        generations[i] = std::move(s);
    });

    fs::create_directories(out.has_parent_path() ? out.parent_path() : fs::path("."));
    write_samples(out, generations);
    std::cout << "generated " << generations.size() << " continuations of " << length
              << " tokens each (" << label << ")\n";

    ctx.manifest.seed = seed;
    ctx.manifest.config = {{"strategy", strategy}, {"label", label}, {"length", length},
                           {"k", k},               {"p", p},         {"t", t}};
    if (!theta_path.empty()) ctx.manifest.config["theta"] = theta_path;
    ctx.manifest.inputs = {model_path.string(), pairs_path.string()};
    ctx.manifest.outputs = {out.string()};
    ctx.finish(out);
    return 0;
}

// ---------------------------------------------------------------------------
// score

int cmd_score(const std::string& model_path, const std::string& records_path,
              const fs::path& texts_path, const std::string& nucleus_specs_text,
              bool include_prefix, std::string source, std::size_t selfbleu_cap,
              int selfbleu_max_n, const std::string& dump_records_path, const fs::path& out) {
    CommandContext ctx("score");
    const std::vector<NucleusSpec> specs = parse_nucleus_specs(nucleus_specs_text);

    std::vector<DocumentScore> scores;
    std::vector<std::vector<TokenId>> token_docs;
    std::vector<std::string> row_sources;
    std::size_t vocab_size = 0;

    if (!model_path.empty()) {
        const NgramModel model = NgramModel::load(model_path);
        vocab_size = model.vocab_size();
        const std::vector<TextSample> samples = read_samples(texts_path);
        if (samples.empty()) throw DataError("no documents to score");

        scores.resize(samples.size());
        token_docs.resize(samples.size());
        row_sources.resize(samples.size());
        parallel_for(samples.size(), [&](std::size_t i) {
            const TextSample& s = samples[i];
            std::vector<TokenId> ids = model.vocab().encode(tokenize(s.full));
            std::size_t skip = 0;
            if (!include_prefix && !s.prefix.empty()) {
                skip = tokenize(s.prefix).size();
                if (skip >= ids.size()) {
                    throw DataError("nothing to score after removing the prefix: " + s.id);
                }
            }
            DocumentScore score = score_document(model, ids, s.id);
            if (skip > 0) {
                score.records.erase(score.records.begin(),
                                    score.records.begin() + static_cast<std::ptrdiff_t>(skip));
                ids.erase(ids.begin(), ids.begin() + static_cast<std::ptrdiff_t>(skip));
            }
            scores[i] = std::move(score);
            token_docs[i] = std::move(ids);
            row_sources[i] = !source.empty() ? source : (!s.label.empty() ? s.label : "real");
        });
    } else {
        const RecordsFile records = read_records(records_path);
        if (records.docs.empty()) throw DataError("no documents to score");
        vocab_size = records.vocab_size;
        scores = records.docs;
        token_docs.reserve(scores.size());
        for (const auto& doc : scores) {
            std::vector<TokenId> ids;
            ids.reserve(doc.records.size());
            for (const auto& r : doc.records) ids.push_back(r.token_id);
            token_docs.push_back(std::move(ids));
        }
        row_sources.assign(scores.size(), source.empty() ? "real" : source);
    }

    const BinLayout layout = BinLayout::for_vocab(vocab_size);
    SelfBleuOptions sb;
    sb.max_n = selfbleu_max_n;
    sb.reference_cap = selfbleu_cap;
    MetricTable table = compute_metric_table(scores, token_docs, layout, specs, "real", sb);
    table.sources = row_sources;

    fs::create_directories(out.has_parent_path() ? out.parent_path() : fs::path("."));
    write_metric_table(out, table);
    if (!dump_records_path.empty()) {
        write_records(dump_records_path, scores, vocab_size);
    }
    std::cout << "scored " << table.n_rows() << " documents into " << table.columns.size()
              << " metric columns\n";

    ctx.manifest.config = {{"nucleus_specs", nucleus_specs_text},
                           {"include_prefix", include_prefix},
                           {"selfbleu_cap", selfbleu_cap},
                           {"selfbleu_max_n", selfbleu_max_n}};
    if (!source.empty()) ctx.manifest.config["source"] = source;
    ctx.manifest.inputs = {model_path.empty() ? records_path : model_path};
    if (!texts_path.empty()) ctx.manifest.inputs.push_back(texts_path.string());
    ctx.manifest.outputs = {out.string()};
    if (!dump_records_path.empty()) ctx.manifest.outputs.push_back(dump_records_path);
    ctx.finish(out);
    return 0;
}

// ---------------------------------------------------------------------------
// separate

int cmd_separate(const fs::path& real_path, const std::vector<std::string>& synth_paths,
                 std::size_t hist_bins, const fs::path& out) {
    CommandContext ctx("separate");
    const MetricTable real = read_metric_table(real_path);
    std::vector<MetricTable> synths;
    for (const auto& p : synth_paths) synths.push_back(read_metric_table(p));

    const auto reports = separation_table(real, synths);
    const fs::path dir = out.has_parent_path() ? out.parent_path() : fs::path(".");
    fs::create_directories(dir);
    write_separation_csv(out, reports);
    const auto hist_files = write_histograms(dir, real, synths, hist_bins);

    // Per-sampler average D over scalar metrics, the Table 2 style summary.
    std::vector<std::pair<std::string, std::pair<double, std::size_t>>> by_sampler;
    for (const auto& r : reports) {
        bool found = false;
        for (auto& [name, acc] : by_sampler) {
            if (name == r.sampler) {
                acc.first += r.d;
                acc.second += 1;
                found = true;
            }
        }
        if (!found) by_sampler.push_back({r.sampler, {r.d, 1}});
    }
    std::cout << "separation rows: " << reports.size() << "\n";
    for (const auto& [name, acc] : by_sampler) {
        std::cout << "avg D for " << name << ": "
                  << format_double(acc.first / static_cast<double>(acc.second)) << "\n";
    }

    ctx.manifest.config = {{"hist_bins", hist_bins}};
    ctx.manifest.inputs = {real_path.string()};
    for (const auto& p : synth_paths) ctx.manifest.inputs.push_back(p);
    ctx.manifest.outputs = {out.string()};
    for (const auto& f : hist_files) ctx.manifest.outputs.push_back(f.string());
    ctx.finish(out);
    return 0;
}

// ---------------------------------------------------------------------------
// detect

int cmd_detect(const fs::path& real_path, const fs::path& synth_path, const std::string& features,
               std::uint64_t seed, double split, double lr, double l2, int epochs, double tol,
               const fs::path& out) {
    CommandContext ctx("detect");
    const MetricTable real = read_metric_table(real_path);
    const MetricTable synth = read_metric_table(synth_path);
    if (synth.columns != real.columns) throw DataError("metric tables have mismatched columns");

    std::vector<std::size_t> kept;
    std::vector<std::string> names;
    for (std::size_t i = 0; i < real.columns.size(); ++i) {
        const bool is_gltr = is_gltr_column(real.columns[i]);
        if ((features == "gltr" && is_gltr) || features == "all") {
            kept.push_back(i);
            names.push_back(real.columns[i]);
        }
    }
    if (kept.empty()) throw UsageError("no feature columns selected");

    const auto project = [&](const MetricTable& t) {
        std::vector<std::vector<double>> rows;
        rows.reserve(t.rows.size());
        for (const auto& row : t.rows) {
            std::vector<double> r;
            r.reserve(kept.size());
            for (const std::size_t i : kept) r.push_back(row[i]);
            rows.push_back(std::move(r));
        }
        return rows;
    };

    DetectorConfig config;
    config.seed = seed;
    config.split_fraction = split;
    config.learning_rate = lr;
    config.l2 = l2;
    config.max_epochs = epochs;
    config.tol = tol;

    const TrainResult result = train_detector(project(real), project(synth), names, config);

    fs::create_directories(out.has_parent_path() ? out.parent_path() : fs::path("."));
    save_detector(out, result.model);

    std::cout << "features: " << result.model.feature_names.size() << " used";
    if (!result.model.dropped_features.empty()) {
        std::cout << ", " << result.model.dropped_features.size() << " dropped (zero variance):";
        for (const auto& f : result.model.dropped_features) std::cout << ' ' << f;
    }
    std::cout << "\nheld-out F1 (synthetic class): " << format_double(result.f1) << "\n"
              << "held-out macro F1: " << format_double(result.macro_f1) << "\n";

    ctx.manifest.seed = seed;
    ctx.manifest.config = {{"features", features}, {"split", split}, {"learning_rate", lr},
                           {"l2", l2},             {"epochs", epochs}, {"tol", tol}};
    ctx.manifest.inputs = {real_path.string(), synth_path.string()};
    ctx.manifest.outputs = {out.string()};
    ctx.finish(out);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"burstlab: burst sampling, recoverability, and synthetic-text analysis"};
    app.require_subcommand(1);
    app.set_version_flag("--version", kToolVersion);

    // train
    auto* train = app.add_subcommand("train", "Train the smoothed n-gram backbone model");
    std::string train_corpus;
    int train_order = 2;
    double train_alpha = 0.01;
    std::size_t train_vocab_cap = 5000;
    std::uint64_t train_min_count = 1;
    std::uint64_t train_seed = 0;
    std::string train_out;
    train->add_option("--corpus", train_corpus, "Corpus (JSONL or directory of .txt)")->required();
    train->add_option("--order", train_order, "n-gram order");
    train->add_option("--alpha", train_alpha, "additive smoothing strength");
    train->add_option("--vocab-cap", train_vocab_cap, "maximum vocabulary size");
    train->add_option("--min-count", train_min_count, "minimum token frequency");
    train->add_option("--seed", train_seed, "seed recorded in the manifest");
    train->add_option("--out", train_out, "model file to write")->required();

    // prepare
    auto* prep = app.add_subcommand("prepare", "Subset, truncate, and extract prefixes");
    std::string prep_corpus;
    std::size_t prep_subset = 0;
    std::size_t prep_max_chars = 2000;
    double prep_fraction = 0.10;
    int prep_words = 0;
    bool prep_paragraph = false;
    std::uint64_t prep_seed = 0;
    std::string prep_out;
    prep->add_option("--corpus", prep_corpus, "Corpus (JSONL or directory of .txt)")->required();
    auto* subset_opt = prep->add_option("--subset", prep_subset, "random subset size");
    prep->add_option("--max-chars", prep_max_chars, "truncation length in characters");
    prep->add_option("--prefix-fraction", prep_fraction, "prefix share of the sample");
    auto* words_opt =
        prep->add_option("--prefix-words", prep_words, "prefix as leading word count");
    prep->add_flag("--paragraph-mode", prep_paragraph, "pick one random paragraph per document");
    prep->add_option("--seed", prep_seed, "subset/paragraph seed");
    prep->add_option("--out", prep_out, "pairs file to write")->required();

    // learn-bins
    auto* bins = app.add_subcommand("learn-bins", "Learn the burst-sampling bin distribution");
    std::string bins_model;
    std::string bins_corpus;
    std::size_t bins_subset = 500;
    std::uint64_t bins_seed = 0;
    std::string bins_out;
    bins->add_option("--model", bins_model, "model file")->required();
    bins->add_option("--corpus", bins_corpus, "corpus/pairs file or directory")->required();
    bins->add_option("--subset", bins_subset, "random subset size");
    bins->add_option("--seed", bins_seed, "subset seed");
    bins->add_option("--out", bins_out, "theta file to write")->required();

    // generate
    auto* gen = app.add_subcommand("generate", "Generate continuations for prepared prefixes");
    std::string gen_model;
    std::string gen_pairs;
    std::string gen_strategy;
    int gen_k = 40;
    double gen_p = 0.95;
    double gen_t = 1.0;
    std::string gen_theta;
    std::size_t gen_length = 256;
    std::uint64_t gen_seed = 0;
    std::string gen_out;
    gen->add_option("--model", gen_model, "model file")->required();
    gen->add_option("--pairs", gen_pairs, "prepared pairs file")->required();
    gen->add_option("--strategy", gen_strategy, "greedy|temp|topk|topp|burst")->required();
    gen->add_option("--k", gen_k, "top-k cutoff");
    gen->add_option("--p", gen_p, "top-p mass");
    gen->add_option("--t", gen_t, "temperature");
    gen->add_option("--theta", gen_theta, "bin distribution file (burst)");
    gen->add_option("--length", gen_length, "continuation length in tokens");
    gen->add_option("--seed", gen_seed, "generation seed");
    gen->add_option("--out", gen_out, "generations file to write")->required();

    // score
    auto* score = app.add_subcommand("score", "Score text into a per-document metric table");
    std::string score_model;
    std::string score_records;
    std::string score_texts;
    std::string score_specs = "k=10,k=30,k=40,k=50,p=0.9,p=0.95,p=0.99";
    bool score_include_prefix = true;
    std::string score_source;
    std::size_t score_sb_cap = 1000;
    int score_sb_max_n = 4;
    std::string score_dump_records;
    std::string score_out;
    auto* model_opt = score->add_option("--model", score_model, "model file");
    auto* records_opt =
        score->add_option("--records", score_records, "probability records file");
    model_opt->excludes(records_opt);
    auto* texts_opt = score->add_option(
        "--texts", score_texts, "texts to score (pairs/generations/corpus JSONL)");
    records_opt->excludes(texts_opt);
    score->add_option("--nucleus-specs", score_specs, "recoverability specs, e.g. k=40,p=0.9");
    score->add_flag("--include-prefix,!--no-include-prefix", score_include_prefix,
                    "score the real prefix together with the continuation");
    score->add_option("--source", score_source, "source label override for the CSV");
    score->add_option("--selfbleu-cap", score_sb_cap, "self-BLEU reference pool cap");
    score->add_option("--selfbleu-max-n", score_sb_max_n, "self-BLEU n-gram order");
    score->add_option("--dump-records", score_dump_records,
                      "also write the per-token records to this file");
    score->add_option("--out", score_out, "metric table CSV to write")->required();

    // separate
    auto* sep = app.add_subcommand("separate", "KS separation between real and synthetic metrics");
    std::string sep_real;
    std::vector<std::string> sep_synth;
    std::size_t sep_hist_bins = 30;
    std::string sep_out;
    sep->add_option("--real", sep_real, "metric table for real text")->required();
    sep->add_option("--synth", sep_synth, "metric tables for generated text")
        ->required()
        ->expected(-1);
    sep->add_option("--hist-bins", sep_hist_bins, "histogram bin count");
    sep->add_option("--out", sep_out, "separation CSV to write")->required();

    // detect
    auto* det = app.add_subcommand("detect", "Train a real-vs-synthetic logistic regression");
    std::string det_real;
    std::string det_synth;
    std::string det_features = "all";
    std::uint64_t det_seed = 0;
    double det_split = 0.8;
    double det_lr = 0.1;
    double det_l2 = 1e-3;
    int det_epochs = 10000;
    double det_tol = 1e-6;
    std::string det_out;
    det->add_option("--real", det_real, "metric table for real text")->required();
    det->add_option("--synth", det_synth, "metric table for generated text")->required();
    det->add_option("--features", det_features, "gltr|all")
        ->check(CLI::IsMember({"gltr", "all"}));
    det->add_option("--seed", det_seed, "split seed");
    det->add_option("--split", det_split, "train fraction");
    det->add_option("--lr", det_lr, "learning rate");
    det->add_option("--l2", det_l2, "L2 strength");
    det->add_option("--epochs", det_epochs, "maximum epochs");
    det->add_option("--tol", det_tol, "gradient-norm stopping tolerance");
    det->add_option("--out", det_out, "detector file to write")->required();

    try {
        app.parse(argc, argv);

        if (train->parsed()) {
            return cmd_train(train_corpus, train_order, train_alpha, train_vocab_cap,
                             train_min_count, train_seed, train_out);
        }
        if (prep->parsed()) {
            return cmd_prepare(prep_corpus,
                               subset_opt->count() ? std::optional<std::size_t>(prep_subset)
                                                   : std::nullopt,
                               prep_max_chars, prep_fraction,
                               words_opt->count() ? std::optional<int>(prep_words) : std::nullopt,
                               prep_paragraph, prep_seed, prep_out);
        }
        if (bins->parsed()) {
            return cmd_learn_bins(bins_model, bins_corpus, bins_subset, bins_seed, bins_out);
        }
        if (gen->parsed()) {
            return cmd_generate(gen_model, gen_pairs, gen_strategy, gen_k, gen_p, gen_t, gen_theta,
                                gen_length, gen_seed, gen_out);
        }
        if (score->parsed()) {
            if (score_model.empty() == score_records.empty()) {
                throw UsageError("score needs exactly one of --model or --records");
            }
            if (score_model.empty() && score_texts.empty()) {
                // records mode carries its own documents
            } else if (!score_model.empty() && score_texts.empty()) {
                throw UsageError("score --model needs --texts");
            }
            return cmd_score(score_model, score_records, score_texts, score_specs,
                             score_include_prefix, score_source, score_sb_cap, score_sb_max_n,
                             score_dump_records, score_out);
        }
        if (sep->parsed()) {
            return cmd_separate(sep_real, sep_synth, sep_hist_bins, sep_out);
        }
        if (det->parsed()) {
            return cmd_detect(det_real, det_synth, det_features, det_seed, det_split, det_lr,
                              det_l2, det_epochs, det_tol, det_out);
        }
        return 1;
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : 1;
    } catch (const UsageError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const DataError& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
