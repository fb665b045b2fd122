#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "resdist/coupling.hpp"
#include "resdist/exact.hpp"
#include "resdist/resistance.hpp"
#include "support/generators.hpp"

namespace resdist {
namespace {

CitationGraph unit_pruned(const std::vector<Citation>& c) {
    return prune_singleton_sources(build_graph(c)).graph;
}

TEST(FirstIterationCurrent, SharedSourceCitedTwice) {
    const auto g = unit_pruned({{"p", "s"}, {"q", "s"}});
    const auto r = first_iteration_current(g, "p", "q");
    EXPECT_DOUBLE_EQ(r.first_iteration_current, 0.5);
    EXPECT_DOUBLE_EQ(r.direct_term, 0.0);
}

TEST(FirstIterationCurrent, DirectEdgeOnly) {
    const auto g = build_graph(std::vector<Citation>{{"p", "q"}});
    const auto r = first_iteration_current(g, "p", "q");
    EXPECT_DOUBLE_EQ(r.first_iteration_current, 1.0);
    EXPECT_DOUBLE_EQ(r.direct_term, 1.0);
    EXPECT_DOUBLE_EQ(r.neighbor_term, 0.0);
}

TEST(FirstIterationCurrent, InverseCitationCounts) {
    // s1 cited by p,q; s2 cited by p,q,x.
    const auto g = unit_pruned({{"p", "s1"}, {"q", "s1"}, {"p", "s2"}, {"q", "s2"}, {"x", "s2"}});
    const auto r = first_iteration_current(g, "p", "q");
    EXPECT_NEAR(r.first_iteration_current, 5.0 / 6.0, 1e-15);
    EXPECT_NEAR(coupling_unweighted(g, g.index_of("p"), g.index_of("q")), r.neighbor_term, 1e-15);
    EXPECT_THROW(first_iteration_current(g, "p", "nope"), InputError);
    EXPECT_THROW(first_iteration_current(g, "p", "p"), DomainError);
}

TEST(FirstIterationCurrent, MatchesOneJacobiSweep) {
    std::mt19937_64 rng(12);
    const auto g = testing::prepared(testing::random_bipartite(rng, {12, 25, 3, 7}));
    for (Index q = 1; q < g.node_count(); q += 2) {
        const auto s = iterate_voltages(g, VoltageState::zero_start(g, 0, q));
        EXPECT_NEAR(current_bounds(g, s).into_g, first_iteration_current(g, 0, q).first_iteration_current,
                    1e-14);
    }
}

TEST(CouplingUnweighted, Basics) {
    const auto none = unit_pruned({{"p", "s"}, {"x", "s"}, {"q", "t"}, {"y", "t"}});
    EXPECT_DOUBLE_EQ(coupling_unweighted(none, none.index_of("p"), none.index_of("q")), 0.0);

    std::vector<Citation> five{{"p", "s"}, {"q", "s"}, {"a", "s"}, {"b", "s"}, {"c", "s"}};
    const auto g5 = unit_pruned(five);
    EXPECT_DOUBLE_EQ(coupling_unweighted(g5, g5.index_of("p"), g5.index_of("q")), 0.2);

    const auto weighted = weigh(g5, WeightingScheme::GeometricMeanDegree);
    EXPECT_THROW(coupling_unweighted(weighted, 0, 1), ContractViolation);
}

TEST(CouplingUnweighted, HigherCitationCountDowngrades) {
    std::vector<Citation> base{{"p", "s"}, {"q", "s"}, {"p", "t"}, {"q", "t"}};
    const auto g = unit_pruned(base);
    const double before = coupling_unweighted(g, g.index_of("p"), g.index_of("q"));
    base.push_back({"z", "s"});
    const auto g2 = unit_pruned(base);
    EXPECT_LT(coupling_unweighted(g2, g2.index_of("p"), g2.index_of("q")), before);
}

TEST(CouplingWeighted, SymmetricToyDualEvaluation) {
    // p,q each cite exactly s1,s2; s1,s2 cited only by p,q: all degrees 2.
    const auto g = unit_pruned({{"p", "s1"}, {"p", "s2"}, {"q", "s1"}, {"q", "s2"}});
    const Index p = g.index_of("p");
    const Index q = g.index_of("q");
    const double closed = coupling_weighted(g, p, q);
    const auto weighted = weigh(g, WeightingScheme::GeometricMeanDegree);
    const double neighbor = first_iteration_current(weighted, p, q).neighbor_term;
    EXPECT_NEAR(closed, neighbor, 1e-15);
    // Every link weighs 1/2 and every node 1, so each source adds 1/4.
    EXPECT_NEAR(closed, 0.5, 1e-15);
}

TEST(CouplingWeighted, NoCommonNeighborsAndContract) {
    const auto g = unit_pruned({{"p", "s"}, {"x", "s"}, {"q", "t"}, {"y", "t"}});
    EXPECT_DOUBLE_EQ(coupling_weighted(g, g.index_of("p"), g.index_of("q")), 0.0);
    const auto raw = build_graph(std::vector<Citation>{{"p", "s"}, {"q", "s"}});
    EXPECT_THROW(coupling_weighted(raw, 0, 2), ContractViolation);
}

TEST(CouplingWeighted, IdentityAndSymmetryOnRandomGraph) {
    std::mt19937_64 rng(30);
    const auto unit = prune_singleton_sources(build_graph(testing::random_bipartite(rng, {12, 22, 3, 7}))).graph;
    const auto geo = weigh(unit, WeightingScheme::GeometricMeanDegree);
    ASSERT_GE(unit.node_count(), 25u);
    for (Index p = 0; p < unit.node_count(); ++p) {
        for (Index q = p + 1; q < unit.node_count(); ++q) {
            const double closed = coupling_weighted(unit, p, q);
            const double neighbor = first_iteration_current(geo, p, q).neighbor_term;
            EXPECT_NEAR(closed, neighbor, 1e-10 * std::max(1.0, std::abs(neighbor)));
            EXPECT_NEAR(closed, coupling_weighted(unit, q, p), 1e-12);
            EXPECT_NEAR(coupling_unweighted(unit, p, q), coupling_unweighted(unit, q, p), 1e-12);
            const auto fic = first_iteration_current(geo, p, q);
            if (fic.first_iteration_current > 0.0) {
                EXPECT_GE(1.0 / fic.first_iteration_current, exact_resistance(geo, p, q) - 1e-9);
            }
        }
    }
}

TEST(CouplingCosine, SharedOverRootDegrees) {
    const auto g = unit_pruned({{"p", "s1"}, {"p", "s2"}, {"q", "s1"}, {"q", "s3"}, {"q", "s4"},
                                {"x", "s2"}, {"x", "s3"}, {"x", "s4"}});
    EXPECT_NEAR(coupling_cosine(g, g.index_of("p"), g.index_of("q")), 1.0 / std::sqrt(6.0), 1e-15);
}

} // namespace
} // namespace resdist
