#pragma once

// Citation graph: ingestion of edge lists, the undirected nearly bipartite
// paper/source graph, singleton-source pruning and link weighting.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <deque>
#include <istream>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "resdist/error.hpp"

namespace resdist {

using Index = std::size_t;

enum class NodeKind { Paper, Source };

enum class WeightingScheme {
    Unit,               ///< w_ij = A_ij
    GeometricMeanDegree ///< w_ij = A_ij / sqrt(k_i k_j)
};

inline std::string_view to_string(NodeKind kind) {
    return kind == NodeKind::Paper ? "paper" : "source";
}

inline std::string_view to_string(WeightingScheme scheme) {
    return scheme == WeightingScheme::Unit ? "unit" : "geodeg";
}

/// One record of the edge list: `citing` cites `cited`.
struct Citation {
    std::string citing;
    std::string cited;

    friend bool operator==(const Citation&, const Citation&) = default;
};

struct DelimiterConfig {
    char delimiter = '\t';
    char comment = '#';
};

namespace detail {

inline std::string_view trim(std::string_view s) {
    constexpr std::string_view ws = " \t\r\n\v\f";
    const auto first = s.find_first_not_of(ws);
    if (first == std::string_view::npos)
        return {};
    const auto last = s.find_last_not_of(ws);
    return s.substr(first, last - first + 1);
}

} // namespace detail

/// Reads a two-column delimited edge list. Lines whose first non-blank
/// character is the comment marker, and blank lines, are skipped. Duplicate
/// records are kept; they collapse in build_graph().
inline std::vector<Citation> parse_edge_list(std::istream& in, DelimiterConfig format = {}) {
    std::vector<Citation> out;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        const std::string_view body = detail::trim(line);
        if (body.empty() || body.front() == format.comment)
            continue;

        // Split on the raw line so that a tab delimiter survives trimming.
        std::string_view raw = line;
        if (!raw.empty() && raw.back() == '\r')
            raw.remove_suffix(1);
        std::vector<std::string_view> fields;
        std::size_t start = 0;
        for (;;) {
            const auto pos = raw.find(format.delimiter, start);
            fields.push_back(raw.substr(start, pos == std::string_view::npos ? pos : pos - start));
            if (pos == std::string_view::npos)
                break;
            start = pos + 1;
        }
        if (fields.size() != 2)
            throw ParseError(line_no, "expected 2 columns, found " + std::to_string(fields.size()));
        const auto citing = detail::trim(fields[0]);
        const auto cited = detail::trim(fields[1]);
        if (citing.empty() || cited.empty())
            throw ParseError(line_no, "empty id field");
        out.push_back({std::string(citing), std::string(cited)});
    }
    return out;
}

/// Undirected edge between two node indices with its conductance.
struct WeightedEdge {
    Index u;
    Index v;
    double weight;
};

/// Immutable undirected weighted graph of papers and cited sources, stored
/// as a symmetric CSR structure. Neighbor lists are sorted by index.
class CitationGraph {
public:
    CitationGraph() = default;

    /// Builds the CSR form from an undirected edge list (each edge once, in
    /// either orientation). Throws ContractViolation on self-loops, duplicate
    /// edges, out-of-range endpoints or non-positive weights.
    CitationGraph(std::vector<std::string> ids, std::vector<NodeKind> kinds,
                  std::span<const WeightedEdge> edges, WeightingScheme scheme, bool pruned)
        : ids_(std::move(ids)), kinds_(std::move(kinds)), scheme_(scheme), pruned_(pruned) {
        const Index n = ids_.size();
        if (kinds_.size() != n)
            throw ContractViolation("CitationGraph: ids and kinds differ in length");
        for (Index i = 0; i < n; ++i) {
            if (!index_.emplace(ids_[i], i).second)
                throw ContractViolation("CitationGraph: duplicate node id '" + ids_[i] + "'");
        }

        std::vector<std::vector<std::pair<Index, double>>> rows(n);
        for (const auto& e : edges) {
            if (e.u >= n || e.v >= n)
                throw ContractViolation("CitationGraph: edge endpoint out of range");
            if (e.u == e.v)
                throw ContractViolation("CitationGraph: self-loop on '" + ids_[e.u] + "'");
            if (!(e.weight > 0.0) || !std::isfinite(e.weight))
                throw ContractViolation("CitationGraph: link weights must be positive and finite");
            rows[e.u].emplace_back(e.v, e.weight);
            rows[e.v].emplace_back(e.u, e.weight);
        }

        offsets_.assign(n + 1, 0);
        for (Index i = 0; i < n; ++i) {
            auto& row = rows[i];
            std::sort(row.begin(), row.end(),
                      [](const auto& a, const auto& b) { return a.first < b.first; });
            for (Index k = 1; k < row.size(); ++k) {
                if (row[k].first == row[k - 1].first)
                    throw ContractViolation("CitationGraph: duplicate edge '" + ids_[i] + "'-'" +
                                            ids_[row[k].first] + "'");
            }
            offsets_[i + 1] = offsets_[i] + row.size();
        }
        neighbors_.reserve(offsets_[n]);
        weights_.reserve(offsets_[n]);
        node_weight_.assign(n, 0.0);
        for (Index i = 0; i < n; ++i) {
            for (const auto& [j, w] : rows[i]) {
                neighbors_.push_back(j);
                weights_.push_back(w);
                node_weight_[i] += w;
            }
        }
    }

    Index node_count() const noexcept { return ids_.size(); }
    std::size_t edge_count() const noexcept { return neighbors_.size() / 2; }
    bool empty() const noexcept { return ids_.empty(); }

    const std::string& id(Index i) const { return ids_.at(i); }
    NodeKind kind(Index i) const { return kinds_.at(i); }
    const std::vector<std::string>& ids() const noexcept { return ids_; }
    const std::vector<NodeKind>& kinds() const noexcept { return kinds_; }

    std::optional<Index> find(std::string_view id) const {
        const auto it = index_.find(id);
        if (it == index_.end())
            return std::nullopt;
        return it->second;
    }

    Index index_of(std::string_view id) const {
        if (auto i = find(id))
            return *i;
        throw InputError("unknown node id '" + std::string(id) + "'");
    }

    std::span<const Index> neighbors(Index i) const {
        return {neighbors_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    /// Weights aligned with neighbors(i).
    std::span<const double> link_weights(Index i) const {
        return {weights_.data() + offsets_[i], offsets_[i + 1] - offsets_[i]};
    }

    Index degree(Index i) const { return offsets_[i + 1] - offsets_[i]; }

    /// w_i, the sum of incident link weights.
    double node_weight(Index i) const { return node_weight_[i]; }

    /// w_ij, or 0 when i and j are not adjacent.
    double link_weight(Index i, Index j) const {
        const auto nb = neighbors(i);
        const auto it = std::lower_bound(nb.begin(), nb.end(), j);
        if (it == nb.end() || *it != j)
            return 0.0;
        return link_weights(i)[static_cast<std::size_t>(it - nb.begin())];
    }

    bool adjacent(Index i, Index j) const {
        const auto nb = neighbors(i);
        return std::binary_search(nb.begin(), nb.end(), j);
    }

    WeightingScheme weighting() const noexcept { return scheme_; }
    bool pruned() const noexcept { return pruned_; }

    /// Each undirected edge once, with u < v, in CSR order.
    std::vector<WeightedEdge> edges() const {
        std::vector<WeightedEdge> out;
        out.reserve(edge_count());
        for (Index i = 0; i < node_count(); ++i) {
            const auto nb = neighbors(i);
            const auto wt = link_weights(i);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                if (i < nb[k])
                    out.push_back({i, nb[k], wt[k]});
            }
        }
        return out;
    }

    /// Indices of Paper nodes in index order.
    std::vector<Index> papers() const {
        std::vector<Index> out;
        for (Index i = 0; i < node_count(); ++i) {
            if (kinds_[i] == NodeKind::Paper)
                out.push_back(i);
        }
        return out;
    }

    /// Subgraph on `keep` with link weights held fixed. Relative index order
    /// is preserved. The weighting tag and pruned flag carry over.
    CitationGraph induced_subgraph(std::span<const Index> keep) const {
        std::vector<Index> remap(node_count(), npos);
        std::vector<Index> sorted(keep.begin(), keep.end());
        std::sort(sorted.begin(), sorted.end());
        sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
        std::vector<std::string> ids;
        std::vector<NodeKind> kinds;
        for (Index i : sorted) {
            remap[i] = ids.size();
            ids.push_back(ids_.at(i));
            kinds.push_back(kinds_[i]);
        }
        std::vector<WeightedEdge> kept;
        for (const auto& e : edges()) {
            if (remap[e.u] != npos && remap[e.v] != npos)
                kept.push_back({remap[e.u], remap[e.v], e.weight});
        }
        return CitationGraph(std::move(ids), std::move(kinds), kept, scheme_, pruned_);
    }

    /// Same topology with every link weight multiplied by `factor`.
    CitationGraph scaled(double factor) const {
        if (!(factor > 0.0))
            throw DomainError("scale factor must be positive");
        auto es = edges();
        for (auto& e : es)
            e.weight *= factor;
        return CitationGraph(ids_, kinds_, es, scheme_, pruned_);
    }

    static constexpr Index npos = static_cast<Index>(-1);

private:
    std::vector<std::string> ids_;
    std::vector<NodeKind> kinds_;
    std::map<std::string, Index, std::less<>> index_;
    std::vector<std::size_t> offsets_{0};
    std::vector<Index> neighbors_;
    std::vector<double> weights_;
    std::vector<double> node_weight_;
    WeightingScheme scheme_ = WeightingScheme::Unit;
    bool pruned_ = false;
};

struct BuildReport {
    std::size_t records = 0;
    std::size_t self_citations = 0;   ///< rejected citing == cited records
    std::size_t duplicates = 0;       ///< records collapsed onto an existing edge
};

/// Builds the unit-weighted undirected graph. Nodes are indexed in order of
/// first appearance (citing before cited within a record). A node is a Paper
/// iff it appears in the citing column of an accepted record.
inline CitationGraph build_graph(std::span<const Citation> records, BuildReport* report = nullptr) {
    if (records.empty())
        throw InputError("edge list is empty");

    BuildReport local;
    local.records = records.size();
    std::map<std::string, Index, std::less<>> index;
    std::vector<std::string> ids;
    std::vector<NodeKind> kinds;
    auto intern = [&](const std::string& id) {
        auto [it, inserted] = index.emplace(id, ids.size());
        if (inserted) {
            ids.push_back(id);
            kinds.push_back(NodeKind::Source);
        }
        return it->second;
    };

    std::vector<std::pair<Index, Index>> pairs;
    pairs.reserve(records.size());
    for (const auto& rec : records) {
        if (rec.citing == rec.cited) {
            ++local.self_citations;
            continue;
        }
        const Index u = intern(rec.citing);
        const Index v = intern(rec.cited);
        kinds[u] = NodeKind::Paper;
        pairs.emplace_back(std::min(u, v), std::max(u, v));
    }
    if (ids.empty())
        throw InputError("edge list contains no usable citations");

    std::sort(pairs.begin(), pairs.end());
    const auto last = std::unique(pairs.begin(), pairs.end());
    local.duplicates = static_cast<std::size_t>(pairs.end() - last);
    pairs.erase(last, pairs.end());

    std::vector<WeightedEdge> edges;
    edges.reserve(pairs.size());
    for (const auto& [u, v] : pairs)
        edges.push_back({u, v, 1.0});

    if (report)
        *report = local;
    return CitationGraph(std::move(ids), std::move(kinds), edges, WeightingScheme::Unit, false);
}

enum class PruneReason { SingletonSource, IsolatedPaper };

inline std::string_view to_string(PruneReason reason) {
    return reason == PruneReason::SingletonSource ? "singleton_source" : "isolated_paper";
}

struct PrunedNode {
    std::string id;
    PruneReason reason;
};

struct PruneReport {
    std::vector<PrunedNode> removed;

    std::size_t count(PruneReason reason) const {
        return static_cast<std::size_t>(std::count_if(
            removed.begin(), removed.end(), [&](const auto& r) { return r.reason == reason; }));
    }
};

struct PruneResult {
    CitationGraph graph;
    PruneReport report;
};

/// Removes, in one sweep over the pre-pruning degrees, every Source cited
/// exactly once, then drops Papers left without neighbors. Papers are never
/// removed for having degree 1. The result is unit weighted and flagged as
/// pruned; call weigh() afterwards.
inline PruneResult prune_singleton_sources(const CitationGraph& g) {
    const Index n = g.node_count();
    std::vector<bool> drop(n, false);
    PruneReport report;
    for (Index i = 0; i < n; ++i) {
        if (g.kind(i) == NodeKind::Source && g.degree(i) == 1) {
            drop[i] = true;
            report.removed.push_back({g.id(i), PruneReason::SingletonSource});
        }
    }
    for (Index i = 0; i < n; ++i) {
        if (drop[i] || g.kind(i) != NodeKind::Paper)
            continue;
        const auto nb = g.neighbors(i);
        const bool isolated =
            std::all_of(nb.begin(), nb.end(), [&](Index j) { return drop[j]; });
        if (isolated) {
            drop[i] = true;
            report.removed.push_back({g.id(i), PruneReason::IsolatedPaper});
        }
    }

    std::vector<Index> keep;
    keep.reserve(n);
    for (Index i = 0; i < n; ++i) {
        if (!drop[i])
            keep.push_back(i);
    }
    const CitationGraph sub = g.induced_subgraph(keep);
    auto es = sub.edges();
    for (auto& e : es)
        e.weight = 1.0;
    return {CitationGraph(sub.ids(), sub.kinds(), es, WeightingScheme::Unit, true),
            std::move(report)};
}

/// Assigns link weights from the graph's own (unweighted) degrees.
inline CitationGraph weigh(const CitationGraph& g, WeightingScheme scheme) {
    if (scheme == WeightingScheme::GeometricMeanDegree && !g.pruned())
        throw ContractViolation(
            "geometric-mean-degree weighting requires a graph pruned of singleton sources");
    auto es = g.edges();
    for (auto& e : es) {
        e.weight = scheme == WeightingScheme::Unit
                       ? 1.0
                       : 1.0 / std::sqrt(static_cast<double>(g.degree(e.u)) *
                                         static_cast<double>(g.degree(e.v)));
    }
    return CitationGraph(g.ids(), g.kinds(), es, scheme, g.pruned());
}

/// Nodes reachable from `seed`, sorted by index.
inline std::vector<Index> connected_component_of(const CitationGraph& g, Index seed) {
    if (seed >= g.node_count())
        throw InputError("seed index out of range");
    std::vector<bool> seen(g.node_count(), false);
    std::vector<Index> out{seed};
    std::deque<Index> queue{seed};
    seen[seed] = true;
    while (!queue.empty()) {
        const Index u = queue.front();
        queue.pop_front();
        for (Index v : g.neighbors(u)) {
            if (!seen[v]) {
                seen[v] = true;
                out.push_back(v);
                queue.push_back(v);
            }
        }
    }
    std::sort(out.begin(), out.end());
    return out;
}

inline std::vector<Index> connected_component_of(const CitationGraph& g, std::string_view seed) {
    return connected_component_of(g, g.index_of(seed));
}

/// Component label per node; labels are numbered by smallest member index.
inline std::vector<Index> component_labels(const CitationGraph& g) {
    std::vector<Index> label(g.node_count(), CitationGraph::npos);
    Index next = 0;
    for (Index s = 0; s < g.node_count(); ++s) {
        if (label[s] != CitationGraph::npos)
            continue;
        std::deque<Index> queue{s};
        label[s] = next;
        while (!queue.empty()) {
            const Index u = queue.front();
            queue.pop_front();
            for (Index v : g.neighbors(u)) {
                if (label[v] == CitationGraph::npos) {
                    label[v] = next;
                    queue.push_back(v);
                }
            }
        }
        ++next;
    }
    return label;
}

} // namespace resdist
