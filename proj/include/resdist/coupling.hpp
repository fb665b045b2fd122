#pragma once

// Closed-form first sweep of the voltage iteration and the bibliographic
// coupling measures it yields.
//
// After one Jacobi sweep from the zero start, a non-pole node i carries
// V_i = w_ip / w_i, so the current reaching the grounded pole is
// I_g(1) = w_pg + sum_i w_gi w_ip / w_i. These measures are analytic
// consequences of the weighting and are offered for comparison and
// pre-filtering; they are not meant to replace the resistance distance.

#include <cmath>
#include <cstddef>
#include <string_view>

#include "resdist/error.hpp"
#include "resdist/graph.hpp"

namespace resdist {

struct CouplingResult {
    double first_iteration_current = 0.0; ///< I_g(1)
    double direct_term = 0.0;             ///< w_pg
    double neighbor_term = 0.0;           ///< sum_i w_gi w_ip / w_i
};

namespace detail {

inline void check_pair(const CitationGraph& g, Index p, Index q) {
    if (p >= g.node_count() || q >= g.node_count())
        throw InputError("node index out of range");
    if (p == q)
        throw DomainError("coupling needs two distinct papers");
}

/// Calls f(i) for every common neighbor i of p and q, in index order.
template <typename F>
void for_common_neighbors(const CitationGraph& g, Index p, Index q, F&& f) {
    const auto a = g.neighbors(p);
    const auto b = g.neighbors(q);
    std::size_t x = 0;
    std::size_t y = 0;
    while (x < a.size() && y < b.size()) {
        if (a[x] < b[y]) {
            ++x;
        } else if (b[y] < a[x]) {
            ++y;
        } else {
            f(a[x]);
            ++x;
            ++y;
        }
    }
}

} // namespace detail

inline CouplingResult first_iteration_current(const CitationGraph& g, Index p, Index q) {
    detail::check_pair(g, p, q);
    CouplingResult r;
    r.direct_term = g.link_weight(p, q);
    detail::for_common_neighbors(g, p, q, [&](Index i) {
        r.neighbor_term += g.link_weight(q, i) * g.link_weight(i, p) / g.node_weight(i);
    });
    r.first_iteration_current = r.direct_term + r.neighbor_term;
    return r;
}

inline CouplingResult first_iteration_current(const CitationGraph& g, std::string_view p,
                                              std::string_view q) {
    return first_iteration_current(g, g.index_of(p), g.index_of(q));
}

/// Sum over shared neighbors of 1 / k_i. Requires a unit-weighted graph.
inline double coupling_unweighted(const CitationGraph& g, Index p, Index q) {
    if (g.weighting() != WeightingScheme::Unit)
        throw ContractViolation("unweighted coupling requires a unit-weighted graph");
    detail::check_pair(g, p, q);
    double sum = 0.0;
    detail::for_common_neighbors(
        g, p, q, [&](Index i) { sum += 1.0 / static_cast<double>(g.degree(i)); });
    return sum;
}

/// (1 / sqrt(k_g k_p)) sum_i A_gi A_pi / (sqrt(k_i) sum_j A_ij / sqrt(k_j)),
/// evaluated from degrees alone. Requires a pruned graph; the link weights
/// it carries are ignored.
inline double coupling_weighted(const CitationGraph& g, Index p, Index q) {
    if (!g.pruned())
        throw ContractViolation("weighted coupling requires a graph pruned of singleton sources");
    detail::check_pair(g, p, q);
    auto root_degree = [&](Index i) { return std::sqrt(static_cast<double>(g.degree(i))); };
    double sum = 0.0;
    detail::for_common_neighbors(g, p, q, [&](Index i) {
        double spread = 0.0;
        for (Index j : g.neighbors(i))
            spread += 1.0 / root_degree(j);
        sum += 1.0 / (root_degree(i) * spread);
    });
    return sum / (root_degree(p) * root_degree(q));
}

/// Cosine bibliographic coupling: shared neighbors / sqrt(k_p k_q).
inline double coupling_cosine(const CitationGraph& g, Index p, Index q) {
    detail::check_pair(g, p, q);
    std::size_t shared = 0;
    detail::for_common_neighbors(g, p, q, [&](Index) { ++shared; });
    return static_cast<double>(shared) /
           std::sqrt(static_cast<double>(g.degree(p)) * static_cast<double>(g.degree(q)));
}

} // namespace resdist
