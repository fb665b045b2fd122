#pragma once

// Exact effective resistance from the grounded graph Laplacian. Used as the
// reference for the iterative solver and as an exact mode for small graphs.

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "resdist/distance_matrix.hpp"
#include "resdist/error.hpp"
#include "resdist/graph.hpp"

namespace resdist {

inline constexpr std::size_t default_exact_cap = 2000;

/// Weighted Laplacian of one connected component: diagonal w_i, off-diagonal
/// -w_ij. Row k corresponds to node `component[k]`.
struct DenseLaplacian {
    Eigen::MatrixXd matrix;
    std::vector<Index> component;

    static DenseLaplacian of_component(const CitationGraph& g, std::vector<Index> component) {
        std::sort(component.begin(), component.end());
        DenseLaplacian lap;
        const auto m = static_cast<Eigen::Index>(component.size());
        lap.matrix = Eigen::MatrixXd::Zero(m, m);
        auto local = [&](Index node) {
            const auto it = std::lower_bound(component.begin(), component.end(), node);
            return static_cast<Eigen::Index>(it - component.begin());
        };
        for (Eigen::Index a = 0; a < m; ++a) {
            const Index u = component[static_cast<std::size_t>(a)];
            const auto nb = g.neighbors(u);
            const auto wt = g.link_weights(u);
            for (std::size_t k = 0; k < nb.size(); ++k) {
                const Eigen::Index b = local(nb[k]);
                lap.matrix(a, b) -= wt[k];
                lap.matrix(a, a) += wt[k];
            }
        }
        lap.component = std::move(component);
        return lap;
    }

    Eigen::Index position(Index node) const {
        const auto it = std::lower_bound(component.begin(), component.end(), node);
        if (it == component.end() || *it != node)
            throw DisconnectedError("node is outside the Laplacian's component");
        return static_cast<Eigen::Index>(it - component.begin());
    }

    /// The Laplacian with row and column `ground` removed.
    Eigen::MatrixXd grounded(Eigen::Index ground) const {
        const Eigen::Index m = matrix.rows();
        Eigen::MatrixXd out(m - 1, m - 1);
        for (Eigen::Index r = 0, rr = 0; r < m; ++r) {
            if (r == ground)
                continue;
            for (Eigen::Index c = 0, cc = 0; c < m; ++c) {
                if (c == ground)
                    continue;
                out(rr, cc++) = matrix(r, c);
            }
            ++rr;
        }
        return out;
    }
};

namespace detail {

inline std::vector<Index> checked_component(const CitationGraph& g, Index p, Index q,
                                            std::size_t cap) {
    if (p >= g.node_count() || q >= g.node_count())
        throw InputError("pole index out of range");
    if (p == q)
        throw DomainError("poles must be distinct nodes");
    auto component = connected_component_of(g, p);
    if (!std::binary_search(component.begin(), component.end(), q))
        throw DisconnectedError("'" + g.id(p) + "' and '" + g.id(q) +
                                "' are not connected; resistance is infinite");
    if (component.size() > cap)
        throw DomainError("component of " + std::to_string(component.size()) +
                          " nodes exceeds the exact-solver cap of " + std::to_string(cap) +
                          "; use the iterative solver");
    return component;
}

inline Eigen::LLT<Eigen::MatrixXd> factor_grounded(const Eigen::MatrixXd& grounded) {
    Eigen::LLT<Eigen::MatrixXd> llt(grounded);
    if (llt.info() != Eigen::Success)
        throw DisconnectedError("grounded Laplacian is singular; graph is disconnected");
    return llt;
}

} // namespace detail

/// Grounds q, injects unit current at p and returns V_p.
inline double exact_resistance(const CitationGraph& g, Index p, Index q,
                               std::size_t cap = default_exact_cap) {
    auto component = detail::checked_component(g, p, q, cap);
    const auto lap = DenseLaplacian::of_component(g, std::move(component));
    const Eigen::Index gq = lap.position(q);
    Eigen::Index pp = lap.position(p);
    if (pp > gq)
        --pp;
    const Eigen::MatrixXd reduced = lap.grounded(gq);
    const auto llt = detail::factor_grounded(reduced);
    Eigen::VectorXd rhs = Eigen::VectorXd::Zero(reduced.rows());
    rhs(pp) = 1.0;
    Eigen::VectorXd v = llt.solve(rhs);
    // One step of iterative refinement keeps the residual near 1e-10 or below
    // on poorly conditioned weightings.
    const Eigen::VectorXd residual = rhs - reduced * v;
    v += llt.solve(residual);
    return v(pp);
}

inline double exact_resistance(const CitationGraph& g, std::string_view p, std::string_view q,
                               std::size_t cap = default_exact_cap) {
    return exact_resistance(g, g.index_of(p), g.index_of(q), cap);
}

/// Exact resistance between every unordered pair of `papers`. Grounds one
/// node, inverts the reduced Laplacian once, and reads each pair off as
/// G_aa + G_bb - 2 G_ab.
inline DistanceMatrix exact_all_pairs(const CitationGraph& g, std::span<const Index> papers,
                                      std::size_t cap = default_exact_cap) {
    std::vector<std::string> labels;
    for (Index i : papers)
        labels.push_back(g.id(i));
    if (papers.size() < 2)
        return DistanceMatrix(std::move(labels));

    auto component = detail::checked_component(g, papers[0], papers[1], cap);
    for (Index i : papers) {
        if (!std::binary_search(component.begin(), component.end(), i))
            throw DisconnectedError("'" + g.id(i) + "' is not connected to '" + g.id(papers[0]) +
                                    "'");
    }
    const auto lap = DenseLaplacian::of_component(g, std::move(component));
    const Eigen::Index ground = 0;
    const Eigen::MatrixXd reduced = lap.grounded(ground);
    const auto llt = detail::factor_grounded(reduced);
    const Eigen::MatrixXd inverse =
        llt.solve(Eigen::MatrixXd::Identity(reduced.rows(), reduced.cols()));

    // Entry of the grounded inverse, extended by zeros on the ground node.
    auto green = [&](Eigen::Index a, Eigen::Index b) {
        if (a == ground || b == ground)
            return 0.0;
        return inverse(a - 1, b - 1);
    };
    const std::size_t n = papers.size();
    std::vector<double> values(pair_count(n));
    for (std::size_t a = 0; a < n; ++a) {
        const Eigen::Index ia = lap.position(papers[a]);
        for (std::size_t b = a + 1; b < n; ++b) {
            const Eigen::Index ib = lap.position(papers[b]);
            if (ia == ib)
                throw DomainError("paper listed twice: '" + g.id(papers[a]) + "'");
            values[condensed_index(n, a, b)] = green(ia, ia) + green(ib, ib) - 2.0 * green(ia, ib);
        }
    }
    return DistanceMatrix::from_condensed(std::move(labels), values);
}

} // namespace resdist
