#pragma once

// Validation analytics over a distance matrix: median-ratio ranking against
// topic sets, log-distance histograms and agglomerative clustering.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <numeric>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "resdist/distance_matrix.hpp"
#include "resdist/error.hpp"

namespace resdist {

/// Named set of papers, identified by their position in a DistanceMatrix.
struct TopicSet {
    std::string label;
    std::vector<std::size_t> members;
};

/// Median distance from `paper` to `targets`, skipping `paper` itself.
/// An even count averages the two central values.
inline double median_distance(const DistanceMatrix& m, std::size_t paper,
                              std::span<const std::size_t> targets) {
    if (paper >= m.size())
        throw DomainError("paper outside the distance matrix");
    std::vector<double> d;
    d.reserve(targets.size());
    for (std::size_t t : targets) {
        if (t >= m.size())
            throw DomainError("target outside the distance matrix");
        if (t != paper)
            d.push_back(m(paper, t));
    }
    if (d.empty())
        throw DomainError("median over an empty target set");
    const std::size_t mid = d.size() / 2;
    std::nth_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid), d.end());
    if (d.size() % 2 == 1)
        return d[mid];
    const double upper = d[mid];
    const double lower = *std::max_element(d.begin(), d.begin() + static_cast<std::ptrdiff_t>(mid));
    return 0.5 * (lower + upper);
}

struct RankedPaper {
    std::size_t paper;
    double score;
    bool member;
    std::size_t cumulative_members; ///< topic members at this rank or above
};

struct RankingResult {
    std::string label;
    std::vector<RankedPaper> ranks;

    /// Probability that a random member outranks a random non-member.
    double auc() const {
        std::size_t members_seen = 0;
        std::size_t wins = 0;
        std::size_t members = 0;
        std::size_t others = 0;
        for (const auto& r : ranks) {
            if (r.member) {
                ++members;
                ++members_seen;
            } else {
                ++others;
                wins += members_seen;
            }
        }
        if (members == 0 || others == 0)
            return 1.0;
        return static_cast<double>(wins) / (static_cast<double>(members) * static_cast<double>(others));
    }
};

/// Scores each paper by median distance to topic members divided by median
/// distance to all papers, sorts ascending (ties by matrix position) and
/// accumulates the member count down the ranking. A member whose only
/// topic peer would be itself gets score 0.
inline RankingResult rank_by_topic(const DistanceMatrix& m, const TopicSet& topic) {
    if (topic.members.empty())
        throw DomainError("topic '" + topic.label + "' has no members");
    if (m.size() < 2)
        throw DomainError("ranking needs at least two papers");
    std::vector<bool> is_member(m.size(), false);
    for (std::size_t t : topic.members) {
        if (t >= m.size())
            throw DomainError("topic member outside the distance matrix");
        is_member[t] = true;
    }
    std::vector<std::size_t> everyone(m.size());
    std::iota(everyone.begin(), everyone.end(), std::size_t{0});

    RankingResult out{topic.label, {}};
    out.ranks.reserve(m.size());
    for (std::size_t p = 0; p < m.size(); ++p) {
        const bool lone_member = is_member[p] && std::all_of(topic.members.begin(),
                                                             topic.members.end(),
                                                             [&](std::size_t t) { return t == p; });
        const double score =
            lone_member ? 0.0
                        : median_distance(m, p, topic.members) / median_distance(m, p, everyone);
        out.ranks.push_back({p, score, is_member[p], 0});
    }
    std::stable_sort(out.ranks.begin(), out.ranks.end(), [](const auto& a, const auto& b) {
        return a.score < b.score || (a.score == b.score && a.paper < b.paper);
    });
    std::size_t seen = 0;
    for (auto& r : out.ranks) {
        seen += r.member ? 1 : 0;
        r.cumulative_members = seen;
    }
    return out;
}

struct HistogramBin {
    double left;  ///< natural-log distance
    double right;
    std::size_t count;
};

/// Equal-width histogram of ln(distance) over [min, max]. Bins are
/// right-open except the last. A degenerate range yields one bin.
inline std::vector<HistogramBin> log_histogram(std::span<const double> distances,
                                               std::size_t bins) {
    if (bins == 0)
        throw DomainError("histogram needs at least one bin");
    if (distances.empty())
        throw DomainError("histogram of an empty distance set");
    std::vector<double> logs;
    logs.reserve(distances.size());
    for (double d : distances) {
        if (!(d > 0.0) || !std::isfinite(d))
            throw DomainError("log histogram needs positive finite distances");
        logs.push_back(std::log(d));
    }
    const auto [lo_it, hi_it] = std::minmax_element(logs.begin(), logs.end());
    const double lo = *lo_it;
    const double hi = *hi_it;
    if (hi == lo)
        return {{lo, hi, logs.size()}};

    const double width = (hi - lo) / static_cast<double>(bins);
    std::vector<HistogramBin> out(bins);
    for (std::size_t b = 0; b < bins; ++b) {
        out[b].left = lo + width * static_cast<double>(b);
        out[b].right = b + 1 == bins ? hi : lo + width * static_cast<double>(b + 1);
        out[b].count = 0;
    }
    for (double x : logs) {
        auto b = static_cast<std::size_t>((x - lo) / width);
        b = std::min(b, bins - 1);
        // Keep the assignment consistent with the stored edges.
        while (b > 0 && x < out[b].left)
            --b;
        while (b + 1 < bins && x >= out[b + 1].left)
            ++b;
        ++out[b].count;
    }
    return out;
}

inline std::vector<HistogramBin> log_histogram(const DistanceMatrix& m, std::size_t bins) {
    const auto values = m.condensed();
    return log_histogram(values, bins);
}

enum class Linkage { Ward, Average, Single, Complete };

inline std::string_view to_string(Linkage l) {
    switch (l) {
    case Linkage::Ward: return "ward";
    case Linkage::Average: return "average";
    case Linkage::Single: return "single";
    case Linkage::Complete: return "complete";
    }
    return "?";
}

/// Ward on the distances as given, or on their squares (reporting the square
/// root of each merge height).
enum class WardInput { Raw, Squared };

struct Merge {
    std::size_t cluster_a; ///< leaves are 0..n-1, merge t creates n+t
    std::size_t cluster_b;
    double height;
    std::size_t size;
};

struct Dendrogram {
    std::vector<Merge> merges;
    std::vector<std::size_t> leaf_order;
};

struct Clustering {
    Dendrogram dendrogram;
    std::vector<std::size_t> labels; ///< flat cluster per paper, 0..k-1
};

namespace detail {

inline std::vector<std::size_t> cut_tree(const std::vector<Merge>& merges, std::size_t n,
                                         std::size_t k) {
    std::vector<std::size_t> parent(n + merges.size());
    std::iota(parent.begin(), parent.end(), std::size_t{0});
    auto root = [&](std::size_t x) {
        while (parent[x] != x)
            x = parent[x] = parent[parent[x]];
        return x;
    };
    for (std::size_t t = 0; t + k < n; ++t) {
        parent[root(merges[t].cluster_a)] = n + t;
        parent[root(merges[t].cluster_b)] = n + t;
    }
    std::map<std::size_t, std::size_t> names;
    std::vector<std::size_t> labels(n);
    for (std::size_t i = 0; i < n; ++i) {
        const auto [it, fresh] = names.emplace(root(i), names.size());
        labels[i] = it->second;
    }
    return labels;
}

inline std::vector<std::size_t> leaf_order(const std::vector<Merge>& merges, std::size_t n) {
    std::vector<std::size_t> out;
    if (n == 0)
        return out;
    std::vector<std::size_t> stack{merges.empty() ? 0 : n + merges.size() - 1};
    while (!stack.empty()) {
        const std::size_t c = stack.back();
        stack.pop_back();
        if (c < n) {
            out.push_back(c);
        } else {
            stack.push_back(merges[c - n].cluster_b);
            stack.push_back(merges[c - n].cluster_a);
        }
    }
    return out;
}

} // namespace detail

/// Lance-Williams agglomeration, cut into k flat clusters. Among equal
/// candidate distances the lowest (slot, slot) pair merges first.
inline Clustering agglomerate(const DistanceMatrix& m, Linkage linkage, std::size_t k,
                              WardInput ward_input = WardInput::Raw) {
    const std::size_t n = m.size();
    if (k < 1 || k > n)
        throw DomainError("cluster count k=" + std::to_string(k) + " outside [1, " +
                          std::to_string(n) + "]");
    const bool squared = linkage == Linkage::Ward && ward_input == WardInput::Squared;

    std::vector<double> d(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double v = squared ? m(i, j) * m(i, j) : m(i, j);
            d[i * n + j] = d[j * n + i] = v;
        }
    }
    std::vector<std::size_t> id(n);
    std::iota(id.begin(), id.end(), std::size_t{0});
    std::vector<std::size_t> size(n, 1);
    std::vector<std::size_t> active(n);
    std::iota(active.begin(), active.end(), std::size_t{0});

    Dendrogram dendro;
    dendro.merges.reserve(n > 0 ? n - 1 : 0);
    while (active.size() > 1) {
        std::size_t bi = 0;
        std::size_t bj = 1;
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t x = 0; x < active.size(); ++x) {
            for (std::size_t y = x + 1; y < active.size(); ++y) {
                const double v = d[active[x] * n + active[y]];
                if (v < best) {
                    best = v;
                    bi = x;
                    bj = y;
                }
            }
        }
        const std::size_t i = active[bi];
        const std::size_t j = active[bj];
        const double ni = static_cast<double>(size[i]);
        const double nj = static_cast<double>(size[j]);
        for (std::size_t s : active) {
            if (s == i || s == j)
                continue;
            const double dik = d[i * n + s];
            const double djk = d[j * n + s];
            double v = 0.0;
            switch (linkage) {
            case Linkage::Single: v = std::min(dik, djk); break;
            case Linkage::Complete: v = std::max(dik, djk); break;
            case Linkage::Average: v = (ni * dik + nj * djk) / (ni + nj); break;
            case Linkage::Ward: {
                const double nk = static_cast<double>(size[s]);
                v = ((ni + nk) * dik + (nj + nk) * djk - nk * best) / (ni + nj + nk);
                break;
            }
            }
            d[i * n + s] = d[s * n + i] = v;
        }
        dendro.merges.push_back({std::min(id[i], id[j]), std::max(id[i], id[j]),
                                 squared ? std::sqrt(std::max(best, 0.0)) : best,
                                 size[i] + size[j]});
        id[i] = n + dendro.merges.size() - 1;
        size[i] += size[j];
        active.erase(active.begin() + static_cast<std::ptrdiff_t>(bj));
    }
    dendro.leaf_order = detail::leaf_order(dendro.merges, n);
    auto labels = detail::cut_tree(dendro.merges, n, k);
    return {std::move(dendro), std::move(labels)};
}

struct TopicMatch {
    std::string label;
    std::size_t cluster;
    double precision;
    double recall;
};

/// Label for a paper that belongs to the topic universe but was not clustered.
inline constexpr std::size_t unclustered = static_cast<std::size_t>(-1);

/// For each topic, the cluster with the best F1 against it (lowest label on
/// ties) and that cluster's precision and recall. `labels` is indexed by the
/// same paper positions as the topic members. Topics whose members were all
/// left unclustered score (0, 0); if that holds for every topic the two
/// universes are disjoint and the comparison is refused.
inline std::vector<TopicMatch> precision_recall(std::span<const std::size_t> labels,
                                                std::span<const TopicSet> truth) {
    std::size_t clusters = 0;
    for (std::size_t c : labels) {
        if (c != unclustered)
            clusters = std::max(clusters, c + 1);
    }
    std::vector<std::size_t> cluster_size(clusters, 0);
    for (std::size_t c : labels) {
        if (c != unclustered)
            ++cluster_size[c];
    }

    std::vector<TopicMatch> out;
    bool any_overlap = false;
    for (const auto& topic : truth) {
        if (topic.members.empty())
            throw DomainError("topic '" + topic.label + "' has no members");
        std::vector<std::size_t> overlap(clusters, 0);
        for (std::size_t p : topic.members) {
            if (p >= labels.size())
                throw DomainError("topic '" + topic.label +
                                  "' has members outside the labelled papers");
            if (labels[p] != unclustered)
                ++overlap[labels[p]];
        }
        const double topic_size = static_cast<double>(topic.members.size());
        TopicMatch best{topic.label, unclustered, 0.0, 0.0};
        double best_f1 = 0.0;
        for (std::size_t c = 0; c < clusters; ++c) {
            if (overlap[c] == 0)
                continue;
            any_overlap = true;
            const double hit = static_cast<double>(overlap[c]);
            const double precision = hit / static_cast<double>(cluster_size[c]);
            const double recall = hit / topic_size;
            const double f1 = 2.0 * precision * recall / (precision + recall);
            if (f1 > best_f1) {
                best_f1 = f1;
                best = {topic.label, c, precision, recall};
            }
        }
        out.push_back(best);
    }
    if (!truth.empty() && !any_overlap)
        throw DomainError("clustering and topics share no papers");
    return out;
}

} // namespace resdist
