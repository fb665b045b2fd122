// resdist: effective-resistance distances for citation networks.

#include <chrono>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "resdist/resdist.hpp"

#ifndef RESDIST_VERSION
#define RESDIST_VERSION "0.0.0"
#endif

namespace fs = std::filesystem;
using nlohmann::json;
using namespace resdist;

namespace {

enum Exit { ok = 0, internal = 1, input_error = 2, numeric_error = 3, disconnected = 4 };

struct Options {
    std::string input;
    std::string delimiter = "tab";
    std::string weighting = "geodeg";
    double epsilon = 0.1;
    std::size_t max_iter = 100000;
    std::string sweep = "jacobi";
    unsigned threads = 0;
    std::uint64_t seed = 0;
    std::string out = "resdist_out";

    std::string matrix;
    bool exact = false;
    std::size_t exact_cap = default_exact_cap;

    std::vector<std::string> poles;

    double sample_epsilon = 0.1;
    std::size_t streak = 10;

    std::string topics;
    std::string topic;

    std::vector<std::string> pair_list;

    std::string linkage = "ward";
    std::size_t k = 2;
    std::string ward_input = "raw";

    std::size_t bins = 20;
};

char delimiter_char(const std::string& d) {
    if (d == "tab" || d == "\\t" || d == "\t")
        return '\t';
    if (d == "comma")
        return ',';
    if (d == "space")
        return ' ';
    if (d == "semicolon")
        return ';';
    if (d.size() == 1)
        return d[0];
    throw InputError("delimiter must be one character or tab, comma, space, semicolon; got '" + d +
                     "'");
}

WeightingScheme weighting(const Options& o) {
    return o.weighting == "unit" ? WeightingScheme::Unit : WeightingScheme::GeometricMeanDegree;
}

Linkage linkage(const Options& o) {
    static const std::map<std::string, Linkage> names{{"ward", Linkage::Ward},
                                                      {"average", Linkage::Average},
                                                      {"single", Linkage::Single},
                                                      {"complete", Linkage::Complete}};
    return names.at(o.linkage);
}

SolverConfig solver_config(const Options& o) {
    SolverConfig cfg;
    cfg.epsilon = o.epsilon;
    cfg.max_iterations = o.max_iter;
    cfg.sweep = o.sweep == "gauss-seidel" ? Sweep::InPlace : Sweep::Simultaneous;
    return cfg;
}

std::ifstream open_input(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw InputError("cannot open '" + path + "'");
    return in;
}

std::string digest(const std::string& path) {
    auto in = open_input(path);
    return io::fnv1a64_hex(in);
}

/// Collects outputs and writes them, plus the manifest, into the output
/// directory. Thread count and timings are left out so that the directory
/// contents depend only on inputs and configuration.
class Run {
public:
    Run(std::string command, const Options& o) : command_(std::move(command)), out_(o.out) {
        config_["delimiter"] = o.delimiter;
        config_["weighting"] = o.weighting;
        config_["epsilon"] = o.epsilon;
        config_["max_iter"] = o.max_iter;
        config_["sweep"] = o.sweep;
        config_["seed"] = o.seed;
    }

    json& config() { return config_; }

    void input(const std::string& role, const std::string& path) {
        inputs_[role] = {{"path", path}, {"fnv1a64", digest(path)}};
    }

    void write(const std::string& name, const std::function<void(std::ostream&)>& body) {
        std::ostringstream buf;
        body(buf);
        files_[name] = buf.str();
    }

    void status(int code) { status_ = code; }

    void flush() {
        std::error_code ec;
        fs::create_directories(out_, ec);
        if (ec)
            throw InputError("cannot create output directory '" + out_ + "': " + ec.message());
        json outputs = json::array();
        for (const auto& [name, text] : files_) {
            put(name, text);
            outputs.push_back(name);
        }
        json manifest = {{"tool", "resdist"},     {"version", RESDIST_VERSION},
                         {"command", command_},   {"config", config_},
                         {"inputs", inputs_},     {"outputs", outputs},
                         {"exit_status", status_}};
        put("manifest.json", manifest.dump(2) + "\n");
    }

private:
    void put(const std::string& name, const std::string& text) {
        std::ofstream f(fs::path(out_) / name, std::ios::binary);
        f << text;
        if (!f)
            throw InputError("cannot write '" + (fs::path(out_) / name).string() + "'");
    }

    std::string command_;
    std::string out_;
    json config_ = json::object();
    json inputs_ = json::object();
    std::map<std::string, std::string> files_;
    int status_ = ok;
};

struct Prepared {
    CitationGraph unit;     ///< pruned, unit weights
    CitationGraph weighted; ///< pruned, weighted by the chosen scheme
    PruneReport report;
    std::vector<Index> papers;
};

Prepared prepare(const Options& o, Run& run) {
    if (o.input.empty())
        throw InputError("--input is required");
    run.input("edges", o.input);
    auto in = open_input(o.input);
    const auto citations = parse_edge_list(in, DelimiterConfig{delimiter_char(o.delimiter), '#'});
    BuildReport built;
    const auto raw = build_graph(citations, &built);
    auto pruned = prune_singleton_sources(raw);
    Prepared p{pruned.graph, weigh(pruned.graph, weighting(o)), std::move(pruned.report), {}};
    p.papers = p.weighted.papers();
    std::cerr << "records " << built.records << " (self-citations " << built.self_citations
              << ", duplicates " << built.duplicates << ")\n"
              << "nodes " << raw.node_count() << " -> " << p.weighted.node_count()
              << " after pruning (" << p.report.count(PruneReason::SingletonSource)
              << " singleton sources, " << p.report.count(PruneReason::IsolatedPaper)
              << " isolated papers)\n"
              << "edges " << p.weighted.edge_count() << ", papers " << p.papers.size()
              << ", pairs " << pair_count(p.papers.size()) << '\n';
    run.write("prune_report.csv", [&](std::ostream& f) { io::write_prune_report(f, p.report); });
    return p;
}

DistanceMatrix compute_distances(const Options& o, const Prepared& p, Run& run) {
    run.config()["exact"] = o.exact;
    if (o.exact) {
        run.config()["exact_cap"] = o.exact_cap;
        return exact_all_pairs(p.weighted, p.papers, o.exact_cap);
    }
    return all_pairs_resistance(p.weighted, p.papers, solver_config(o), o.threads);
}

std::size_t unconverged(const DistanceMatrix& m) {
    std::size_t n = 0;
    for (const auto& r : m.records())
        n += r.converged ? 0 : 1;
    return n;
}

/// Distances for the analysis commands: a matrix file when given, otherwise
/// computed from the edge list.
DistanceMatrix load_distances(const Options& o, Run& run) {
    if (!o.matrix.empty()) {
        run.input("matrix", o.matrix);
        auto in = open_input(o.matrix);
        return io::read_distances(in);
    }
    if (o.input.empty())
        throw InputError("either --matrix or --input is required");
    const auto p = prepare(o, run);
    return compute_distances(o, p, run);
}

std::vector<std::pair<std::string, std::vector<std::string>>> load_topics(const Options& o,
                                                                         Run& run) {
    run.input("topics", o.topics);
    auto in = open_input(o.topics);
    return io::read_topics(in);
}

int cmd_distances(const Options& o) {
    Run run("distances", o);
    const auto p = prepare(o, run);
    const auto m = compute_distances(o, p, run);
    run.write("distances.csv", [&](std::ostream& f) { io::write_distances(f, m); });
    const std::size_t bad = unconverged(m);
    if (bad > 0)
        std::cerr << bad << " pairs did not converge within " << o.max_iter << " iterations\n";
    run.status(bad > 0 ? numeric_error : ok);
    run.flush();
    return bad > 0 ? numeric_error : ok;
}

int cmd_pair(const Options& o) {
    Run run("pair", o);
    run.config()["poles"] = o.poles;
    const auto p = prepare(o, run);
    const auto r = resistance_between(p.weighted, o.poles[0], o.poles[1], solver_config(o));
    std::ostringstream row;
    row << "paper_a,paper_b,resistance,lower,upper,iterations,converged\n"
        << io::quote(o.poles[0]) << ',' << io::quote(o.poles[1]) << ','
        << io::format_number(r.resistance) << ',' << io::format_number(r.lower_bound) << ','
        << io::format_number(r.upper_bound) << ',' << r.iterations << ','
        << (r.converged ? "true" : "false") << '\n';
    std::cout << row.str();
    run.write("pair.csv", [&](std::ostream& f) { f << row.str(); });
    const int code = r.converged ? ok : numeric_error;
    run.status(code);
    run.flush();
    return code;
}

int cmd_sample(const Options& o) {
    Run run("sample", o);
    run.config()["sample_epsilon"] = o.sample_epsilon;
    run.config()["streak"] = o.streak;
    const auto p = prepare(o, run);
    SamplerConfig cfg;
    cfg.epsilon = o.sample_epsilon;
    cfg.streak = o.streak;
    cfg.seed = o.seed;
    const auto s = estimate_distribution(p.weighted, p.papers, cfg, solver_config(o), o.threads);
    std::vector<std::string> ids;
    for (Index i : p.papers)
        ids.push_back(p.weighted.id(i));
    run.write("sample_estimate.csv", [&](std::ostream& f) { io::write_sample_trace(f, s, o.seed); });
    run.write("sampled_distances.csv",
              [&](std::ostream& f) { io::write_samples(f, s, ids, o.seed); });
    std::cerr << "mean " << io::format_number(s.estimate.mean) << " +- "
              << io::format_number(s.estimate.std_error) << " from " << s.estimate.n << " of "
              << s.estimate.population << " pairs ("
              << (s.stopped_by_rule ? "stopping rule met" : "population exhausted") << ")\n";
    run.flush();
    return ok;
}

int cmd_rank(const Options& o) {
    Run run("rank", o);
    run.config()["topic"] = o.topic;
    const auto m = load_distances(o, run);
    const auto topics = load_topics(o, run);
    const auto it = std::find_if(topics.begin(), topics.end(),
                                 [&](const auto& t) { return t.first == o.topic; });
    if (it == topics.end()) {
        std::string known;
        for (const auto& t : topics)
            known += (known.empty() ? "" : ", ") + t.first;
        throw InputError("unknown topic '" + o.topic + "'; available: " + known);
    }
    const auto ranking = rank_by_topic(m, io::resolve_topic(m, it->first, it->second));
    run.write("ranking.csv", [&](std::ostream& f) { io::write_ranking(f, m, ranking); });
    std::cerr << "topic " << o.topic << ": " << it->second.size() << " members, AUC "
              << io::format_number(ranking.auc()) << '\n';
    run.flush();
    return ok;
}

int cmd_couple(const Options& o) {
    Run run("couple", o);
    run.config()["pairs"] = o.pair_list.empty() ? json("all") : json(o.pair_list);
    const auto p = prepare(o, run);
    std::vector<std::pair<Index, Index>> pairs;
    if (o.pair_list.empty()) {
        for (std::size_t a = 0; a < p.papers.size(); ++a)
            for (std::size_t b = a + 1; b < p.papers.size(); ++b)
                pairs.emplace_back(p.papers[a], p.papers[b]);
    } else {
        for (std::size_t k = 0; k + 1 < o.pair_list.size(); k += 2)
            pairs.emplace_back(p.unit.index_of(o.pair_list[k]), p.unit.index_of(o.pair_list[k + 1]));
    }
    run.write("coupling.csv", [&](std::ostream& f) {
        f << "paper_a,paper_b,coupling_unweighted,coupling_weighted,cosine,first_iteration_current\n";
        for (const auto& [a, b] : pairs) {
            f << io::quote(p.unit.id(a)) << ',' << io::quote(p.unit.id(b)) << ','
              << io::format_number(coupling_unweighted(p.unit, a, b)) << ','
              << io::format_number(coupling_weighted(p.unit, a, b)) << ','
              << io::format_number(coupling_cosine(p.unit, a, b)) << ','
              << io::format_number(first_iteration_current(p.weighted, a, b).first_iteration_current)
              << '\n';
        }
    });
    run.flush();
    return ok;
}

int cmd_cluster(const Options& o) {
    Run run("cluster", o);
    run.config()["linkage"] = o.linkage;
    run.config()["k"] = o.k;
    run.config()["ward_input"] = o.ward_input;
    const auto m = load_distances(o, run);
    const auto c = agglomerate(m, linkage(o), o.k,
                               o.ward_input == "squared" ? WardInput::Squared : WardInput::Raw);
    run.write("dendrogram.csv", [&](std::ostream& f) { io::write_dendrogram(f, c.dendrogram); });
    run.write("clusters.csv", [&](std::ostream& f) {
        io::write_clusters(f, m, c.labels, c.dendrogram.leaf_order);
    });
    if (!o.topics.empty()) {
        std::vector<TopicSet> truth;
        for (const auto& [label, ids] : load_topics(o, run))
            truth.push_back(io::resolve_topic(m, label, ids));
        const auto matches = precision_recall(c.labels, truth);
        run.write("cluster_quality.csv", [&](std::ostream& f) {
            f << "topic_label,cluster,precision,recall\n";
            for (const auto& t : matches) {
                f << io::quote(t.label) << ','
                  << (t.cluster == unclustered ? std::string("none") : std::to_string(t.cluster))
                  << ',' << io::format_number(t.precision) << ',' << io::format_number(t.recall)
                  << '\n';
            }
        });
    }
    run.flush();
    return ok;
}

int cmd_histogram(const Options& o) {
    Run run("histogram", o);
    run.config()["bins"] = o.bins;
    const auto m = load_distances(o, run);
    const auto h = log_histogram(m, o.bins);
    run.write("histogram.csv", [&](std::ostream& f) { io::write_histogram(f, h); });
    run.flush();
    return ok;
}

void add_common(CLI::App* cmd, Options& o, bool needs_graph) {
    auto* in = cmd->add_option("--input", o.input, "Edge list: citing<delim>cited per line");
    if (needs_graph)
        in->required();
    in->check(CLI::ExistingFile);
    cmd->add_option("--delimiter", o.delimiter, "Column delimiter (one character, or tab/comma/space)")
        ->capture_default_str();
    cmd->add_option("--weighting", o.weighting, "Link weights")
        ->check(CLI::IsMember({"unit", "geodeg"}))
        ->capture_default_str();
    cmd->add_option("--epsilon", o.epsilon, "Stop when upper - lower bound < epsilon")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--max-iter", o.max_iter, "Iteration cap per pair")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    cmd->add_option("--sweep", o.sweep, "Voltage update order")
        ->check(CLI::IsMember({"jacobi", "gauss-seidel"}))
        ->capture_default_str();
    cmd->add_option("--threads", o.threads, "Worker threads (0: hardware concurrency)")
        ->capture_default_str();
    cmd->add_option("--seed", o.seed, "Random seed")->capture_default_str();
    cmd->add_option("--out", o.out, "Output directory")->capture_default_str();
}

void add_matrix_source(CLI::App* cmd, Options& o) {
    cmd->add_option("--matrix", o.matrix, "Distance CSV written by 'distances'")
        ->check(CLI::ExistingFile);
    cmd->add_flag("--exact", o.exact, "Use the dense Laplacian solve instead of iteration");
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Effective-resistance distances between papers of a citation network"};
    app.set_version_flag("--version", RESDIST_VERSION);
    app.require_subcommand(1);
    Options o;

    auto* distances = app.add_subcommand("distances", "All pairwise paper distances");
    add_common(distances, o, true);
    distances->add_flag("--exact", o.exact, "Use the dense Laplacian solve instead of iteration");
    distances->add_option("--exact-cap", o.exact_cap, "Largest component for --exact")
        ->capture_default_str();

    auto* pair = app.add_subcommand("pair", "Resistance between two nodes");
    add_common(pair, o, true);
    pair->add_option("poles", o.poles, "Two node ids")->required()->expected(2);

    auto* sample = app.add_subcommand("sample", "Estimate the mean distance from a random sample of pairs");
    add_common(sample, o, true);
    sample->add_option("--sample-epsilon", o.sample_epsilon,
                       "Stop once the standard error stays below this / 10")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();
    sample->add_option("--streak", o.streak, "Consecutive updates below the threshold")
        ->check(CLI::PositiveNumber)
        ->capture_default_str();

    auto* rank = app.add_subcommand("rank", "Rank papers by median-distance ratio to a topic");
    add_common(rank, o, false);
    add_matrix_source(rank, o);
    rank->add_option("--topics", o.topics, "CSV with paper_id,topic_label")
        ->required()
        ->check(CLI::ExistingFile);
    rank->add_option("--topic", o.topic, "Topic label to rank against")->required();

    auto* couple = app.add_subcommand("couple", "Coupling measures for paper pairs");
    add_common(couple, o, true);
    couple->add_option("--pair", o.pair_list, "Two node ids; repeat for more pairs (default: all)")
        ->type_size(2);

    auto* cluster = app.add_subcommand("cluster", "Hierarchical clustering of the distances");
    add_common(cluster, o, false);
    add_matrix_source(cluster, o);
    cluster->add_option("--linkage", o.linkage, "Lance-Williams update")
        ->check(CLI::IsMember({"ward", "average", "single", "complete"}))
        ->capture_default_str();
    cluster->add_option("--k", o.k, "Number of flat clusters")->capture_default_str();
    cluster->add_option("--ward-input", o.ward_input, "Feed Ward raw or squared distances")
        ->check(CLI::IsMember({"raw", "squared"}))
        ->capture_default_str();
    cluster->add_option("--topics", o.topics, "Known topics; adds precision and recall per topic")
        ->check(CLI::ExistingFile);

    auto* histogram = app.add_subcommand("histogram", "Histogram of log distances");
    add_common(histogram, o, false);
    add_matrix_source(histogram, o);
    histogram->add_option("--bins", o.bins, "Number of bins")->capture_default_str();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? ok : input_error;
    }

    const auto start = std::chrono::steady_clock::now();
    int code = ok;
    try {
        if (*distances)
            code = cmd_distances(o);
        else if (*pair)
            code = cmd_pair(o);
        else if (*sample)
            code = cmd_sample(o);
        else if (*rank)
            code = cmd_rank(o);
        else if (*couple)
            code = cmd_couple(o);
        else if (*cluster)
            code = cmd_cluster(o);
        else if (*histogram)
            code = cmd_histogram(o);
    } catch (const DisconnectedError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return disconnected;
    } catch (const InputError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return input_error;
    } catch (const DomainError& e) {
        std::cerr << "error: " << e.what() << '\n';
        return numeric_error;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << '\n';
        return internal;
    }
    const std::chrono::duration<double> wall = std::chrono::steady_clock::now() - start;
    std::cerr << "wall time " << io::format_number(wall.count()) << " s\n";
    return code;
}
