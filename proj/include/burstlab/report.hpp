#pragma once

// Report emission: per-document metric tables, KS separation tables, and
// histogram data files (bin edges + counts, for plotting elsewhere).

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "burstlab/csv.hpp"
#include "burstlab/error.hpp"
#include "burstlab/metrics.hpp"
#include "burstlab/stats.hpp"

namespace burstlab {

inline void write_metric_table(const std::filesystem::path& path, const MetricTable& table) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write metric table: " + path.string());
    std::vector<std::string> header = {"doc_id", "source"};
    header.insert(header.end(), table.columns.begin(), table.columns.end());
    write_csv_row(f, header);
    std::vector<std::string> row;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
        row.clear();
        row.push_back(table.doc_ids[i]);
        row.push_back(table.sources[i]);
        for (const double v : table.rows[i]) row.push_back(format_double(v));
        write_csv_row(f, row);
    }
}

inline MetricTable read_metric_table(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read metric table: " + path.string());
    std::vector<std::string> fields;
    if (!read_csv_row(f, fields) || fields.size() < 3 || fields[0] != "doc_id" ||
        fields[1] != "source") {
        throw DataError("not a metric table: " + path.string());
    }
    MetricTable table;
    table.columns.assign(fields.begin() + 2, fields.end());
    std::size_t line_no = 1;
    while (read_csv_row(f, fields)) {
        ++line_no;
        if (fields.size() == 1 && fields[0].empty()) continue;  // trailing newline
        if (fields.size() != table.columns.size() + 2) {
            throw DataError("metric table row " + std::to_string(line_no) +
                            ": wrong field count");
        }
        table.doc_ids.push_back(fields[0]);
        table.sources.push_back(fields[1]);
        std::vector<double> row;
        row.reserve(table.columns.size());
        for (std::size_t k = 2; k < fields.size(); ++k) row.push_back(parse_double(fields[k]));
        table.rows.push_back(std::move(row));
    }
    return table;
}

inline void write_separation_csv(const std::filesystem::path& path,
                                 std::span<const SeparationReport> reports) {
    std::ofstream f(path);
    if (!f) throw DataError("cannot write separation table: " + path.string());
    write_csv_row(f, std::vector<std::string>{"sampler", "metric", "d", "n_real", "n_synth"});
    for (const auto& r : reports) {
        write_csv_row(f, std::vector<std::string>{r.sampler, r.metric, format_double(r.d),
                                                  std::to_string(r.n_real),
                                                  std::to_string(r.n_synth)});
    }
}

inline std::vector<SeparationReport> read_separation_csv(const std::filesystem::path& path) {
    std::ifstream f(path);
    if (!f) throw DataError("cannot read separation table: " + path.string());
    std::vector<std::string> fields;
    if (!read_csv_row(f, fields) || fields.size() != 5 || fields[0] != "sampler") {
        throw DataError("not a separation table: " + path.string());
    }
    std::vector<SeparationReport> out;
    while (read_csv_row(f, fields)) {
        if (fields.size() == 1 && fields[0].empty()) continue;
        if (fields.size() != 5) throw DataError("separation table: wrong field count");
        SeparationReport r;
        r.sampler = fields[0];
        r.metric = fields[1];
        r.d = parse_double(fields[2]);
        r.n_real = static_cast<std::size_t>(std::stoull(fields[3]));
        r.n_synth = static_cast<std::size_t>(std::stoull(fields[4]));
        out.push_back(std::move(r));
    }
    return out;
}

struct Histogram {
    std::vector<double> edges;   // n_bins + 1
    std::vector<std::size_t> counts;
};

inline Histogram make_histogram(std::span<const double> values, double lo, double hi,
                                std::size_t n_bins) {
    if (n_bins < 1) throw UsageError("histogram needs at least one bin");
    Histogram h;
    if (!(hi > lo)) {  // degenerate: all mass in one bin
        h.edges = {lo, lo};
        h.counts = {values.size()};
        return h;
    }
    h.edges.resize(n_bins + 1);
    for (std::size_t i = 0; i <= n_bins; ++i) {
        h.edges[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n_bins);
    }
    h.counts.assign(n_bins, 0);
    const double width = (hi - lo) / static_cast<double>(n_bins);
    for (const double v : values) {
        std::size_t bin = v <= lo ? 0 : static_cast<std::size_t>((v - lo) / width);
        if (bin >= n_bins) bin = n_bins - 1;
        ++h.counts[bin];
    }
    return h;
}

inline std::string sanitize_for_filename(const std::string& s) {
    std::string out;
    for (const char c : s) {
        out += (std::isalnum(static_cast<unsigned char>(c)) != 0) ? c : '_';
    }
    return out;
}

// One file per (source, metric): hist_<source>__<metric>.csv with rows
// bin_lo,bin_hi,count. Edges are shared across sources per metric so the
// emitted distributions are directly comparable.
inline std::vector<std::filesystem::path> write_histograms(
    const std::filesystem::path& dir, const MetricTable& real,
    std::span<const MetricTable> synths, std::size_t n_bins = 30) {
    std::vector<std::filesystem::path> written;
    std::vector<std::string> scalar_cols;
    for (const auto& c : real.columns) {
        if (!is_gltr_column(c)) scalar_cols.push_back(c);
    }

    for (const auto& col : scalar_cols) {
        // (source, values) in a deterministic order: real first, then synth
        // sources as encountered.
        std::vector<std::pair<std::string, std::vector<double>>> groups;
        const auto add_group = [&](const std::string& name, std::vector<double> values) {
            for (auto& g : groups) {
                if (g.first == name) {
                    g.second.insert(g.second.end(), values.begin(), values.end());
                    return;
                }
            }
            groups.emplace_back(name, std::move(values));
        };
        {
            const std::size_t idx = real.column_index(col);
            std::map<std::string, std::vector<double>> by_source;
            for (std::size_t i = 0; i < real.rows.size(); ++i) {
                by_source[real.sources[i]].push_back(real.rows[i][idx]);
            }
            for (auto& [src, vals] : by_source) add_group(src, std::move(vals));
        }
        for (const auto& synth : synths) {
            const std::size_t idx = synth.column_index(col);
            for (std::size_t i = 0; i < synth.rows.size(); ++i) {
                add_group(synth.sources[i], {synth.rows[i][idx]});
            }
        }

        double lo = 0.0;
        double hi = 0.0;
        bool first = true;
        for (const auto& [_, vals] : groups) {
            for (const double v : vals) {
                if (first) {
                    lo = hi = v;
                    first = false;
                } else {
                    lo = std::min(lo, v);
                    hi = std::max(hi, v);
                }
            }
        }

        for (const auto& [src, vals] : groups) {
            const Histogram h = make_histogram(vals, lo, hi, n_bins);
            const std::filesystem::path file =
                dir / ("hist_" + sanitize_for_filename(src) + "__" + sanitize_for_filename(col) +
                       ".csv");
            std::ofstream f(file);
            if (!f) throw DataError("cannot write histogram: " + file.string());
            write_csv_row(f, std::vector<std::string>{"bin_lo", "bin_hi", "count"});
            for (std::size_t b = 0; b < h.counts.size(); ++b) {
                const double bin_lo = h.edges[b];
                const double bin_hi = h.edges[std::min(b + 1, h.edges.size() - 1)];
                write_csv_row(f, std::vector<std::string>{format_double(bin_lo),
                                                          format_double(bin_hi),
                                                          std::to_string(h.counts[b])});
            }
            written.push_back(file);
        }
    }
    return written;
}

}  // namespace burstlab
