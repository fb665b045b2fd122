#include <gtest/gtest.h>

#include <random>

#include "resdist/exact.hpp"
#include "resdist/io.hpp"
#include "support/cli.hpp"
#include "support/generators.hpp"

namespace resdist {
namespace {

using testing::CliResult;
using testing::run_cli;
namespace fs = std::filesystem;

class Cli : public ::testing::Test {
protected:
    void SetUp() override { dir_ = testing::scratch_dir("cli"); }
    void TearDown() override { fs::remove_all(dir_); }

    std::string path(const std::string& name) const { return (dir_ / name).string(); }

    std::string edges(const std::string& name, const std::vector<Citation>& c) const {
        testing::write_edge_list(dir_ / name, c);
        return path(name);
    }

    CliResult run(std::vector<std::string> args) const { return run_cli(args, dir_); }

    DistanceMatrix matrix(const std::string& out) const {
        std::ifstream in(dir_ / out / "distances.csv");
        return io::read_distances(in);
    }

    fs::path dir_;
};

const std::vector<Citation> toy{{"a", "s"}, {"b", "s"}, {"c", "s"},
                                {"a", "t"}, {"b", "t"}, {"c", "u"}};

TEST_F(Cli, DistancesOnToyFileWritesThreeRowsAndManifest) {
    const auto r = run({"distances", "--input", edges("toy.tsv", toy), "--out", path("o")});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto m = matrix("o");
    EXPECT_EQ(m.size(), 3u);
    EXPECT_EQ(m.pairs(), 3u);
    const auto manifest = testing::read_text(dir_ / "o" / "manifest.json");
    EXPECT_NE(manifest.find("\"command\": \"distances\""), std::string::npos);
    EXPECT_NE(manifest.find("fnv1a64"), std::string::npos);
    EXPECT_NE(testing::read_text(dir_ / "o" / "prune_report.csv").find("u,singleton_source"),
              std::string::npos);
    EXPECT_NE(r.err.find("nodes 6 -> 5"), std::string::npos);
    EXPECT_NE(r.err.find("pairs 3"), std::string::npos);
    EXPECT_NE(r.err.find("wall time"), std::string::npos);
}

TEST_F(Cli, DistancesMatchOracleOnSyntheticCorpus) {
    std::mt19937_64 rng(200);
    const auto citations = testing::random_bipartite(rng, {200, 500, 5, 12});
    const auto r = run({"distances", "--input", edges("big.tsv", citations), "--epsilon", "0.1",
                        "--sweep", "gauss-seidel", "--threads", "0", "--out", path("o")});
    ASSERT_EQ(r.status, 0) << r.err;
    const auto got = matrix("o");
    const auto g = testing::prepared(citations);
    const auto papers = g.papers();
    const auto oracle = exact_all_pairs(g, papers);
    ASSERT_EQ(got.size(), oracle.size());
    const auto a = got.condensed();
    const auto b = oracle.condensed();
    for (std::size_t k = 0; k < a.size(); ++k)
        ASSERT_NEAR(a[k], b[k], 0.1) << "pair " << k;
}

TEST_F(Cli, ExactModeAgreesWithIteration) {
    const auto in = edges("toy.tsv", toy);
    ASSERT_EQ(run({"distances", "--input", in, "--epsilon", "1e-8", "--out", path("it")}).status, 0);
    ASSERT_EQ(run({"distances", "--input", in, "--exact", "--out", path("ex")}).status, 0);
    const auto it = matrix("it").condensed();
    const auto ex = matrix("ex").condensed();
    for (std::size_t k = 0; k < it.size(); ++k)
        EXPECT_NEAR(it[k], ex[k], 1e-8);
}

TEST_F(Cli, DisconnectedPapersExitWithComponentReport) {
    const auto in = edges("split.tsv", {{"a", "s"}, {"b", "s"}, {"c", "t"}, {"d", "t"}});
    const auto r = run({"distances", "--input", in, "--out", path("o")});
    EXPECT_EQ(r.status, 4);
    EXPECT_NE(r.err.find("a@0"), std::string::npos) << r.err;
    EXPECT_NE(r.err.find("c@1"), std::string::npos) << r.err;
    EXPECT_EQ(run({"pair", "a", "c", "--input", in, "--out", path("p")}).status, 4);
}

TEST_F(Cli, PairOnUnitEdge) {
    const auto in = edges("edge.tsv", {{"p", "q"}, {"q", "s"}, {"x", "s"}});
    const auto r = run({"pair", "p", "q", "--input", in, "--weighting", "unit", "--out", path("o")});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(r.out, "paper_a,paper_b,resistance,lower,upper,iterations,converged\n"
                     "p,q,1,1,1,1,true\n");
    EXPECT_EQ(testing::read_text(dir_ / "o" / "pair.csv"), r.out);
}

TEST_F(Cli, PairRowKeepsValueBetweenBounds) {
    const auto in = edges("toy.tsv", toy);
    for (const std::string sweep : {"jacobi", "gauss-seidel"}) {
        const auto r = run({"pair", "a", "c", "--input", in, "--sweep", sweep, "--out", path("o")});
        ASSERT_EQ(r.status, 0) << r.err;
        std::istringstream csv(r.out);
        const auto m = io::read_distances(csv);
        const auto& rec = m.record(0, 1);
        EXPECT_LE(rec.lower, rec.resistance);
        EXPECT_LE(rec.resistance, rec.upper);
        EXPECT_TRUE(rec.converged);
    }
}

TEST_F(Cli, IterationCapGivesNumericExitButKeepsOutputs) {
    const auto in = edges("toy.tsv", toy);
    auto r = run({"pair", "a", "b", "--input", in, "--epsilon", "1e-12", "--max-iter", "2",
                  "--out", path("p")});
    EXPECT_EQ(r.status, 3);
    EXPECT_NE(r.out.find(",false"), std::string::npos);
    r = run({"distances", "--input", in, "--epsilon", "1e-12", "--max-iter", "2", "--out",
             path("d")});
    EXPECT_EQ(r.status, 3);
    EXPECT_TRUE(fs::exists(dir_ / "d" / "distances.csv"));
    EXPECT_NE(testing::read_text(dir_ / "d" / "manifest.json").find("\"exit_status\": 3"),
              std::string::npos);
}

TEST_F(Cli, InputErrorsExitTwo) {
    testing::write_text(dir_ / "bad.tsv", "a\ts\nb\ts\tx\n");
    auto r = run({"distances", "--input", path("bad.tsv"), "--out", path("o")});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("line 2"), std::string::npos) << r.err;

    EXPECT_EQ(run({"distances", "--input", path("missing.tsv")}).status, 2);
    EXPECT_EQ(run({"distances", "--input", edges("t.tsv", toy), "--delimiter", "ab"}).status, 2);
    EXPECT_EQ(run({"distances", "--input", path("t.tsv"), "--sweep", "sor"}).status, 2);
    EXPECT_EQ(run({"distances", "--input", path("t.tsv"), "--epsilon", "0"}).status, 2);
    EXPECT_EQ(run({"pair", "a", "zz", "--input", path("t.tsv"), "--out", path("o")}).status, 2);
    EXPECT_EQ(run({"bogus"}).status, 2);
}

TEST_F(Cli, CommaDelimiterAndComments) {
    testing::write_text(dir_ / "e.csv", "# header comment\na,s\nb,s\n\nc,s\n");
    const auto r = run({"distances", "--input", path("e.csv"), "--delimiter", ",", "--out",
                        path("o")});
    ASSERT_EQ(r.status, 0) << r.err;
    EXPECT_EQ(matrix("o").pairs(), 3u);
}

TEST_F(Cli, SampleIsReplayableAndStopsAtExhaustion) {
    const auto in = edges("toy.tsv", toy);
    ASSERT_EQ(run({"sample", "--input", in, "--seed", "7", "--out", path("a")}).status, 0);
    ASSERT_EQ(run({"sample", "--input", in, "--seed", "7", "--out", path("b")}).status, 0);
    EXPECT_EQ(testing::snapshot(dir_ / "a"), testing::snapshot(dir_ / "b"));
    const auto trace = testing::read_text(dir_ / "a" / "sample_estimate.csv");
    EXPECT_EQ(trace.rfind("# seed=7\n", 0), 0u);
    // Three papers give three pairs; the last update has S_R = 0.
    EXPECT_NE(trace.find("\n3,3,"), std::string::npos);
    EXPECT_EQ(trace.substr(trace.size() - 3), ",0\n");
}

TEST_F(Cli, RankUnknownLabelListsAvailable) {
    const auto in = edges("toy.tsv", toy);
    testing::write_text(dir_ / "topics.csv", "paper_id,topic_label\na,x\nb,x\nc,y\n");
    ASSERT_EQ(run({"distances", "--input", in, "--out", path("d")}).status, 0);
    const auto m = path("d") + "/distances.csv";
    auto r = run({"rank", "--matrix", m, "--topics", path("topics.csv"), "--topic", "zz", "--out",
                  path("r")});
    EXPECT_EQ(r.status, 2);
    EXPECT_NE(r.err.find("available: x, y"), std::string::npos) << r.err;
    r = run({"rank", "--matrix", m, "--topics", path("topics.csv"), "--topic", "x", "--out",
             path("r")});
    ASSERT_EQ(r.status, 0) << r.err;
    // a and b are symmetric, and c is equally far from both of them.
    const auto ranking = testing::read_text(dir_ / "r" / "ranking.csv");
    EXPECT_EQ(ranking.rfind("rank,paper_id,score,is_topic_member,cumulative_topic_count\n1,a,", 0),
              0u);
    EXPECT_NE(ranking.find(",true,1\n2,b,"), std::string::npos) << ranking;
    EXPECT_NE(ranking.find(",true,2\n3,c,1,false,2\n"), std::string::npos) << ranking;
}

TEST_F(Cli, RankPlantedTopicFromEdgeList) {
    std::mt19937_64 rng(8);
    const auto corpus = testing::planted_topics(rng, {{15, 25}, {60, 100}, 6, 12, 0.9});
    std::string topics = "paper_id,topic_label\n";
    for (std::size_t i = 0; i < corpus.paper_block.size(); ++i)
        if (corpus.paper_block[i] == 0)
            topics += testing::paper_id(i) + ",planted\n";
    testing::write_text(dir_ / "topics.csv", topics);
    const auto r = run({"rank", "--input", edges("c.tsv", corpus.citations), "--topics",
                        path("topics.csv"), "--topic", "planted", "--epsilon", "1e-3", "--out",
                        path("r")});
    ASSERT_EQ(r.status, 0) << r.err;
    std::istringstream csv(testing::read_text(dir_ / "r" / "ranking.csv"));
    io::CsvReader reader(csv, {"rank", "paper_id", "score", "is_topic_member"});
    std::vector<std::string> f;
    std::size_t members_in_top = 0;
    for (std::size_t row = 0; row < 15 && reader.next(f); ++row)
        members_in_top += f[3] == "true" ? 1 : 0;
    EXPECT_GE(members_in_top, 13u);
}

TEST_F(Cli, CoupleAllPairsAndExplicitList) {
    const auto in = edges("toy.tsv", toy);
    ASSERT_EQ(run({"couple", "--input", in, "--out", path("all")}).status, 0);
    const auto all = testing::read_text(dir_ / "all" / "coupling.csv");
    EXPECT_EQ(std::count(all.begin(), all.end(), '\n'), 4);
    ASSERT_EQ(run({"couple", "--input", in, "--pair", "a", "b", "--pair", "b", "c", "--out",
                   path("two")})
                  .status,
              0);
    const auto two = testing::read_text(dir_ / "two" / "coupling.csv");
    EXPECT_EQ(two.rfind("paper_a,paper_b,coupling_unweighted,coupling_weighted,cosine,", 0), 0u);
    // a and b share s (cited 3 times) and t (cited twice): 1/3 + 1/2.
    EXPECT_NE(two.find("a,b,0.833333333333,"), std::string::npos) << two;
    EXPECT_NE(two.find("\nb,c,"), std::string::npos);
}

TEST_F(Cli, ClusterAndHistogramShapes) {
    std::mt19937_64 rng(4);
    const auto in = edges("g.tsv", testing::random_bipartite(rng, {12, 30, 3, 6}));
    ASSERT_EQ(run({"distances", "--input", in, "--out", path("d")}).status, 0);
    const auto m = path("d") + "/distances.csv";
    for (const std::string l : {"ward", "average", "single", "complete"}) {
        const auto r = run({"cluster", "--matrix", m, "--linkage", l, "--k", "3", "--out",
                            path("c" + l)});
        ASSERT_EQ(r.status, 0) << r.err;
        const auto dendro = testing::read_text(dir_ / ("c" + l) / "dendrogram.csv");
        EXPECT_EQ(std::count(dendro.begin(), dendro.end(), '\n'), 12);
        const auto clusters = testing::read_text(dir_ / ("c" + l) / "clusters.csv");
        EXPECT_EQ(std::count(clusters.begin(), clusters.end(), '\n'), 13);
    }
    EXPECT_EQ(run({"cluster", "--matrix", m, "--k", "13", "--out", path("bad")}).status, 3);

    ASSERT_EQ(run({"histogram", "--matrix", m, "--bins", "5", "--out", path("h")}).status, 0);
    std::istringstream csv(testing::read_text(dir_ / "h" / "histogram.csv"));
    io::CsvReader reader(csv, {"bin_left", "bin_right", "count"});
    std::vector<std::string> f;
    std::size_t total = 0;
    while (reader.next(f))
        total += std::stoul(f[2]);
    EXPECT_EQ(total, 66u);
}

TEST_F(Cli, DistancesIdenticalAcrossThreadCounts) {
    std::mt19937_64 rng(10);
    const auto in = edges("g.tsv", testing::random_bipartite(rng, {40, 90, 4, 9}));
    ASSERT_EQ(run({"distances", "--input", in, "--threads", "1", "--out", path("t1")}).status, 0);
    ASSERT_EQ(run({"distances", "--input", in, "--threads", "5", "--out", path("t5")}).status, 0);
    EXPECT_EQ(testing::snapshot(dir_ / "t1"), testing::snapshot(dir_ / "t5"));
}

} // namespace
} // namespace resdist
