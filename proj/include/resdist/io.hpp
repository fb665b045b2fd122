#pragma once

// CSV readers and writers for the command-line pipeline. Numbers are written
// with 12 significant digits; fields containing commas, quotes or newlines
// are quoted.

#include <algorithm>
#include <cinttypes>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <istream>
#include <iterator>
#include <map>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "resdist/analysis.hpp"
#include "resdist/distance_matrix.hpp"
#include "resdist/error.hpp"
#include "resdist/graph.hpp"
#include "resdist/sampling.hpp"

namespace resdist::io {

inline std::string format_number(double v) {
    if (std::isnan(v))
        return "nan";
    if (std::isinf(v))
        return v > 0 ? "inf" : "-inf";
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

inline std::string quote(std::string_view field) {
    if (field.find_first_of(",\"\r\n") == std::string_view::npos)
        return std::string(field);
    std::string out = "\"";
    for (char c : field) {
        if (c == '"')
            out += '"';
        out += c;
    }
    out += '"';
    return out;
}

/// Splits one CSV record. Quoted fields may contain commas and doubled quotes
/// but not line breaks.
inline std::vector<std::string> split_csv(std::string_view line, std::size_t line_no) {
    if (!line.empty() && line.back() == '\r')
        line.remove_suffix(1);
    std::vector<std::string> fields;
    std::string cur;
    bool quoted = false;
    bool was_quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"') {
                if (i + 1 < line.size() && line[i + 1] == '"') {
                    cur += '"';
                    ++i;
                } else {
                    quoted = false;
                }
            } else {
                cur += c;
            }
        } else if (c == '"' && cur.empty() && !was_quoted) {
            quoted = was_quoted = true;
        } else if (c == ',') {
            fields.push_back(std::move(cur));
            cur.clear();
            was_quoted = false;
        } else {
            cur += c;
        }
    }
    if (quoted)
        throw ParseError(line_no, "unterminated quoted field");
    fields.push_back(std::move(cur));
    return fields;
}

inline double parse_number(const std::string& s, std::size_t line_no) {
    try {
        std::size_t used = 0;
        const double v = std::stod(s, &used);
        if (used != s.size())
            throw ParseError(line_no, "trailing characters in number '" + s + "'");
        return v;
    } catch (const std::invalid_argument&) {
        throw ParseError(line_no, "not a number: '" + s + "'");
    } catch (const std::out_of_range&) {
        throw ParseError(line_no, "number out of range: '" + s + "'");
    }
}

/// Reads a CSV with a header row; yields (line number, fields) for each
/// non-empty record and checks the column count.
class CsvReader {
public:
    CsvReader(std::istream& in, std::vector<std::string> expected_header) : in_(in) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.empty() || line.front() == '#')
                continue;
            header_ = split_csv(line, line_no_);
            break;
        }
        if (header_.size() < expected_header.size() ||
            !std::equal(expected_header.begin(), expected_header.end(), header_.begin())) {
            std::string want;
            for (const auto& h : expected_header)
                want += (want.empty() ? "" : ",") + h;
            throw ParseError(line_no_, "expected header starting with " + want);
        }
    }

    bool next(std::vector<std::string>& fields) {
        std::string line;
        while (std::getline(in_, line)) {
            ++line_no_;
            if (line.empty() || line == "\r" || line.front() == '#')
                continue;
            fields = split_csv(line, line_no_);
            if (fields.size() != header_.size())
                throw ParseError(line_no_, "expected " + std::to_string(header_.size()) +
                                               " columns, found " + std::to_string(fields.size()));
            return true;
        }
        return false;
    }

    std::size_t line() const noexcept { return line_no_; }
    const std::vector<std::string>& header() const noexcept { return header_; }

private:
    std::istream& in_;
    std::size_t line_no_ = 0;
    std::vector<std::string> header_;
};

// --- distance matrix -------------------------------------------------------

inline void write_distances(std::ostream& out, const DistanceMatrix& m) {
    out << "paper_a,paper_b,resistance,lower,upper,iterations,converged\n";
    for (std::size_t a = 0; a < m.size(); ++a) {
        for (std::size_t b = a + 1; b < m.size(); ++b) {
            const auto& r = m.record(a, b);
            out << quote(m.label(a)) << ',' << quote(m.label(b)) << ','
                << format_number(r.resistance) << ',' << format_number(r.lower) << ','
                << format_number(r.upper) << ',' << r.iterations << ','
                << (r.converged ? "true" : "false") << '\n';
        }
    }
}

/// Reads the long-form distance CSV. Labels are ordered by first appearance,
/// which reproduces the writer's order. Only paper_a, paper_b and resistance
/// are required; solver columns are kept when present.
inline DistanceMatrix read_distances(std::istream& in) {
    CsvReader reader(in, {"paper_a", "paper_b", "resistance"});
    const bool detailed = reader.header().size() >= 7;
    std::map<std::string, std::size_t, std::less<>> index;
    std::vector<std::string> labels;
    struct Row {
        std::size_t a, b;
        PairRecord rec;
        std::size_t line;
    };
    std::vector<Row> rows;
    auto intern = [&](const std::string& s) {
        auto [it, fresh] = index.emplace(s, labels.size());
        if (fresh)
            labels.push_back(s);
        return it->second;
    };
    std::vector<std::string> f;
    while (reader.next(f)) {
        const std::size_t line = reader.line();
        if (f[0] == f[1])
            throw ParseError(line, "diagonal entry for '" + f[0] + "'");
        Row row{intern(f[0]), intern(f[1]), {}, line};
        row.rec.resistance = parse_number(f[2], line);
        if (!(row.rec.resistance >= 0.0))
            throw ParseError(line, "negative or invalid distance");
        if (detailed) {
            row.rec.lower = parse_number(f[3], line);
            row.rec.upper = parse_number(f[4], line);
            row.rec.iterations = static_cast<std::size_t>(parse_number(f[5], line));
            row.rec.converged = f[6] == "true";
        } else {
            row.rec.lower = row.rec.upper = row.rec.resistance;
        }
        rows.push_back(row);
    }
    const std::size_t n = labels.size();
    std::vector<PairRecord> recs(pair_count(n));
    std::vector<bool> seen(recs.size(), false);
    for (const auto& row : rows) {
        const std::size_t k = condensed_index(n, std::min(row.a, row.b), std::max(row.a, row.b));
        if (seen[k])
            throw ParseError(row.line, "duplicate pair");
        seen[k] = true;
        recs[k] = row.rec;
    }
    for (std::size_t k = 0; k < seen.size(); ++k) {
        if (!seen[k]) {
            const auto [a, b] = condensed_pair(n, k);
            throw InputError("distance matrix is missing pair '" + labels[a] + "','" + labels[b] +
                             "'");
        }
    }
    return DistanceMatrix(std::move(labels), std::move(recs));
}

// --- pruning ---------------------------------------------------------------

inline void write_prune_report(std::ostream& out, const PruneReport& report) {
    out << "node_id,reason\n";
    for (const auto& r : report.removed)
        out << quote(r.id) << ',' << to_string(r.reason) << '\n';
}

// --- topics ----------------------------------------------------------------

/// Topic file rows paper_id,topic_label; labels keep first-appearance order.
/// A paper may belong to several topics.
inline std::vector<std::pair<std::string, std::vector<std::string>>> read_topics(std::istream& in) {
    CsvReader reader(in, {"paper_id", "topic_label"});
    std::vector<std::pair<std::string, std::vector<std::string>>> topics;
    std::vector<std::string> f;
    while (reader.next(f)) {
        auto it = std::find_if(topics.begin(), topics.end(),
                               [&](const auto& t) { return t.first == f[1]; });
        if (it == topics.end()) {
            topics.emplace_back(f[1], std::vector<std::string>{});
            it = std::prev(topics.end());
        }
        if (std::find(it->second.begin(), it->second.end(), f[0]) == it->second.end())
            it->second.push_back(f[0]);
    }
    return topics;
}

/// Resolves topic member ids against the matrix labels.
inline TopicSet resolve_topic(const DistanceMatrix& m, const std::string& label,
                              const std::vector<std::string>& ids) {
    std::map<std::string_view, std::size_t> pos;
    for (std::size_t i = 0; i < m.size(); ++i)
        pos.emplace(m.label(i), i);
    TopicSet topic{label, {}};
    for (const auto& id : ids) {
        const auto it = pos.find(id);
        if (it == pos.end())
            throw InputError("topic '" + label + "' member '" + id +
                             "' is not in the distance matrix");
        topic.members.push_back(it->second);
    }
    return topic;
}

// --- analysis outputs ------------------------------------------------------

inline void write_ranking(std::ostream& out, const DistanceMatrix& m, const RankingResult& r) {
    out << "rank,paper_id,score,is_topic_member,cumulative_topic_count\n";
    std::size_t rank = 1;
    for (const auto& p : r.ranks) {
        out << rank++ << ',' << quote(m.label(p.paper)) << ',' << format_number(p.score) << ','
            << (p.member ? "true" : "false") << ',' << p.cumulative_members << '\n';
    }
}

inline void write_histogram(std::ostream& out, const std::vector<HistogramBin>& bins) {
    out << "bin_left,bin_right,count\n";
    for (const auto& b : bins)
        out << format_number(b.left) << ',' << format_number(b.right) << ',' << b.count << '\n';
}

inline void write_dendrogram(std::ostream& out, const Dendrogram& d) {
    out << "step,cluster_a,cluster_b,height,size\n";
    std::size_t step = 0;
    for (const auto& mg : d.merges) {
        out << step++ << ',' << mg.cluster_a << ',' << mg.cluster_b << ','
            << format_number(mg.height) << ',' << mg.size << '\n';
    }
}

inline void write_clusters(std::ostream& out, const DistanceMatrix& m,
                           const std::vector<std::size_t>& labels,
                           const std::vector<std::size_t>& leaf_order) {
    std::vector<std::size_t> position(labels.size());
    for (std::size_t k = 0; k < leaf_order.size(); ++k)
        position[leaf_order[k]] = k;
    out << "paper_id,cluster,leaf_position\n";
    for (std::size_t i = 0; i < labels.size(); ++i)
        out << quote(m.label(i)) << ',' << labels[i] << ',' << position[i] << '\n';
}

// --- sampling --------------------------------------------------------------

inline void write_sample_trace(std::ostream& out, const SampleOutcome& s, std::uint64_t seed) {
    out << "# seed=" << seed << '\n';
    out << "n,N,mean,std_error\n";
    for (const auto& e : s.trace) {
        out << e.n << ',' << e.population << ',' << format_number(e.mean) << ','
            << format_number(e.std_error) << '\n';
    }
}

inline void write_samples(std::ostream& out, const SampleOutcome& s,
                          const std::vector<std::string>& paper_ids, std::uint64_t seed) {
    out << "# seed=" << seed << '\n';
    out << "paper_a,paper_b,resistance\n";
    for (const auto& x : s.samples) {
        out << quote(paper_ids[x.a]) << ',' << quote(paper_ids[x.b]) << ','
            << format_number(x.distance) << '\n';
    }
}

// --- digests ---------------------------------------------------------------

/// 64-bit FNV-1a over a byte stream, as 16 hex digits.
inline std::string fnv1a64_hex(std::istream& in) {
    std::uint64_t h = 0xcbf29ce484222325ULL;
    char buf[1 << 14];
    while (in.read(buf, sizeof buf) || in.gcount() > 0) {
        for (std::streamsize i = 0; i < in.gcount(); ++i) {
            h ^= static_cast<unsigned char>(buf[i]);
            h *= 0x100000001b3ULL;
        }
    }
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016" PRIx64, h);
    return hex;
}

} // namespace resdist::io
