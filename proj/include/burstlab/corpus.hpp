#pragma once

// Corpus ingestion and sample preparation: seeded subsetting, paragraph
// selection, character truncation with token-boundary back-off, and prefix
// extraction for continuation generation.

#include <algorithm>
#include <cctype>
#include <filesystem>
#include <fstream>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "burstlab/error.hpp"
#include "burstlab/rng.hpp"

namespace burstlab {

struct Document {
    std::string id;
    std::string text;
    std::string source;
};

struct LoadResult {
    std::vector<Document> documents;
    std::size_t skipped_empty = 0;
};

namespace detail {

inline bool is_blank(const std::string& s) {
    return std::all_of(s.begin(), s.end(),
                       [](unsigned char c) { return std::isspace(c) != 0; });
}

}  // namespace detail

// Line-delimited JSON ({"id":..., "text":...}) or a directory of .txt files
// (one document per file, walked in filename order).
inline LoadResult load_corpus(const std::filesystem::path& path) {
    LoadResult out;
    if (std::filesystem::is_directory(path)) {
        std::vector<std::filesystem::path> files;
        for (const auto& entry : std::filesystem::directory_iterator(path)) {
            if (entry.is_regular_file() && entry.path().extension() == ".txt") {
                files.push_back(entry.path());
            }
        }
        std::sort(files.begin(), files.end());
        for (const auto& file : files) {
            std::ifstream f(file);
            if (!f) throw DataError("cannot read corpus file: " + file.string());
            std::ostringstream body;
            body << f.rdbuf();
            std::string text = body.str();
            if (detail::is_blank(text)) {
                ++out.skipped_empty;
                continue;
            }
            out.documents.push_back({file.stem().string(), std::move(text), ""});
        }
        return out;
    }

    std::ifstream f(path);
    if (!f) throw DataError("cannot read corpus file: " + path.string());
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("corpus line " + std::to_string(line_no) + ": malformed JSON: " +
                            e.what());
        }
        if (!j.is_object() || !j.contains("id") || !j.contains("text")) {
            throw DataError("corpus line " + std::to_string(line_no) +
                            ": expected an object with id and text");
        }
        std::string text = j.at("text").get<std::string>();
        if (detail::is_blank(text)) {
            ++out.skipped_empty;
            continue;
        }
        out.documents.push_back({j.at("id").get<std::string>(), std::move(text),
                                 j.value("source", "")});
    }
    return out;
}

struct PrefixRule {
    enum class Kind { fraction, leading_words };

    Kind kind = Kind::fraction;
    double fraction = 0.10;
    int words = 5;

    static PrefixRule by_fraction(double f) {
        if (!(f > 0.0) || f >= 1.0) throw UsageError("prefix fraction must be in (0, 1)");
        PrefixRule r;
        r.kind = Kind::fraction;
        r.fraction = f;
        return r;
    }
    static PrefixRule by_words(int w) {
        if (w < 1) throw UsageError("prefix word count must be at least 1");
        PrefixRule r;
        r.kind = Kind::leading_words;
        r.words = w;
        return r;
    }
};

struct PrepConfig {
    std::size_t max_chars = 2000;
    std::optional<std::size_t> subset_size;
    PrefixRule prefix_rule;
    bool paragraph_mode = false;
    std::uint64_t seed = 0;
};

struct PreparedPair {
    std::string id;
    std::string prefix;
    std::string full;
};

namespace detail {

// Cut at `limit` characters without splitting a whitespace token: if the cut
// would land mid-token, back off to the previous whitespace, then trim the
// trailing whitespace itself. A single token longer than the limit is cut
// hard.
inline std::string truncate_at_boundary(const std::string& text, std::size_t limit) {
    if (limit == 0) return "";
    if (text.size() <= limit) return text;
    std::size_t cut = limit;
    const auto space_at = [&](std::size_t i) {
        return std::isspace(static_cast<unsigned char>(text[i])) != 0;
    };
    if (!space_at(cut) && !space_at(cut - 1)) {
        std::size_t back = cut;
        while (back > 0 && !space_at(back - 1)) --back;
        if (back > 0) cut = back;
    }
    while (cut > 0 && space_at(cut - 1)) --cut;
    return text.substr(0, cut);
}

inline std::vector<std::string> split_paragraphs(const std::string& text) {
    std::vector<std::string> out;
    std::string current;
    std::istringstream stream(text);
    std::string line;
    const auto flush = [&] {
        if (!is_blank(current)) out.push_back(current);
        current.clear();
    };
    while (std::getline(stream, line)) {
        if (is_blank(line)) {
            flush();
        } else {
            if (!current.empty()) current += '\n';
            current += line;
        }
    }
    flush();
    return out;
}

inline std::string extract_prefix(const std::string& full, const PrefixRule& rule) {
    if (rule.kind == PrefixRule::Kind::fraction) {
        const std::size_t cut =
            static_cast<std::size_t>(rule.fraction * static_cast<double>(full.size()));
        return truncate_at_boundary(full, cut);
    }
    // Leading words: end of the w-th whitespace token, capped at one token
    // fewer than the document holds so the prefix stays proper.
    std::size_t i = 0;
    std::vector<std::size_t> token_ends;
    while (i < full.size()) {
        while (i < full.size() && std::isspace(static_cast<unsigned char>(full[i]))) ++i;
        if (i >= full.size()) break;
        while (i < full.size() && !std::isspace(static_cast<unsigned char>(full[i]))) ++i;
        token_ends.push_back(i);
    }
    if (token_ends.size() <= 1) return "";
    const std::size_t take =
        std::min<std::size_t>(static_cast<std::size_t>(rule.words), token_ends.size() - 1);
    return full.substr(0, token_ends[take - 1]);
}

}  // namespace detail

// Seeded subset -> optional paragraph pick -> truncation -> prefix. All draws
// come from one generator in document order, so output is a pure function of
// (docs, config).
inline std::vector<PreparedPair> prepare(std::span<const Document> docs, const PrepConfig& config) {
    if (config.max_chars < 1) throw UsageError("max_chars must be at least 1");
    Rng rng(config.seed);

    std::vector<std::size_t> order(docs.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    if (config.subset_size) {
        if (*config.subset_size > docs.size()) {
            throw DataError("subset size exceeds corpus size");
        }
        rng.shuffle(order);
        order.resize(*config.subset_size);
    }

    std::vector<PreparedPair> out;
    out.reserve(order.size());
    for (const std::size_t idx : order) {
        const Document& doc = docs[idx];
        std::string sample = doc.text;
        if (config.paragraph_mode) {
            const std::vector<std::string> paragraphs = detail::split_paragraphs(sample);
            if (!paragraphs.empty()) {
                sample = paragraphs[rng.next_below(paragraphs.size())];
            }
        }
        sample = detail::truncate_at_boundary(sample, config.max_chars);
        std::string prefix = detail::extract_prefix(sample, config.prefix_rule);
        out.push_back({doc.id, std::move(prefix), std::move(sample)});
    }
    return out;
}

// Text samples as consumed by scoring and generation: prepared pairs,
// generation outputs (which add a label), or raw corpus lines.
struct TextSample {
    std::string id;
    std::string prefix;
    std::string full;
    std::string label;
};

inline void write_pairs(const std::filesystem::path& path, std::span<const PreparedPair> pairs) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write pairs file: " + path.string());
    for (const auto& p : pairs) {
        nlohmann::json j;
        j["id"] = p.id;
        j["prefix"] = p.prefix;
        j["full"] = p.full;
        f << j.dump() << '\n';
    }
}

inline void write_samples(const std::filesystem::path& path, std::span<const TextSample> samples) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write samples file: " + path.string());
    for (const auto& s : samples) {
        nlohmann::json j;
        j["id"] = s.id;
        j["prefix"] = s.prefix;
        j["full"] = s.full;
        if (!s.label.empty()) j["label"] = s.label;
        f << j.dump() << '\n';
    }
}

// Accepts pairs/generations files ({"id","prefix","full"[,"label"]}) and raw
// corpus files ({"id","text"}).
inline std::vector<TextSample> read_samples(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read samples file: " + path.string());
    std::vector<TextSample> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(f, line)) {
        ++line_no;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("samples line " + std::to_string(line_no) + ": malformed JSON: " +
                            e.what());
        }
        TextSample s;
        if (!j.is_object() || !j.contains("id")) {
            throw DataError("samples line " + std::to_string(line_no) + ": missing id");
        }
        s.id = j.at("id").get<std::string>();
        if (j.contains("full")) {
            s.full = j.at("full").get<std::string>();
            s.prefix = j.value("prefix", "");
        } else if (j.contains("text")) {
            s.full = j.at("text").get<std::string>();
        } else {
            throw DataError("samples line " + std::to_string(line_no) +
                            ": expected full/prefix or text");
        }
        s.label = j.value("label", "");
        out.push_back(std::move(s));
    }
    return out;
}

}  // namespace burstlab
