#pragma once

// Random-sample estimate of the mean pairwise distance with the
// finite-population standard error, and the sequential stopping rule.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <random>
#include <span>
#include <unordered_map>
#include <utility>
#include <vector>

#include "resdist/distance_matrix.hpp"
#include "resdist/error.hpp"
#include "resdist/graph.hpp"
#include "resdist/resistance.hpp"

namespace resdist {

/// Neumaier-compensated running sum in extended precision.
class CompensatedSum {
public:
    void add(long double x) noexcept {
        const long double t = sum_ + x;
        if (std::fabs(sum_) >= std::fabs(x))
            carry_ += (sum_ - t) + x;
        else
            carry_ += (x - t) + sum_;
        sum_ = t;
    }
    long double value() const noexcept { return sum_ + carry_; }

private:
    long double sum_ = 0.0L;
    long double carry_ = 0.0L;
};

struct SampleEstimate {
    std::size_t n = 0;          ///< sampled pairs
    std::size_t population = 0; ///< N, all unordered pairs
    CompensatedSum sum_r;
    CompensatedSum sum_r2;
    double mean = 0.0;
    /// S_R; infinite while fewer than two samples are in and n < N.
    double std_error = std::numeric_limits<double>::infinity();
    double min = std::numeric_limits<double>::infinity();
    double max = -std::numeric_limits<double>::infinity();

    explicit SampleEstimate(std::size_t population_pairs = 0) : population(population_pairs) {}
};

/// Adds one sampled distance and recomputes the mean and
/// S_R^2 = (N-n)/((N-1)(n-1)n) * [sum R^2 - (sum R)^2 / n].
inline SampleEstimate update_estimate(SampleEstimate e, double r) {
    if (!std::isfinite(r) || r < 0.0)
        throw DomainError("sampled distance must be finite and non-negative");
    if (e.population != 0 && e.n >= e.population)
        throw DomainError("sample already covers the whole population");
    ++e.n;
    e.sum_r.add(r);
    e.sum_r2.add(static_cast<long double>(r) * r);
    e.min = std::min(e.min, r);
    e.max = std::max(e.max, r);

    const long double n = static_cast<long double>(e.n);
    const long double s = e.sum_r.value();
    e.mean = static_cast<double>(s / n);
    e.mean = std::clamp(e.mean, e.min, e.max);

    if (e.n == e.population) {
        e.std_error = 0.0;
    } else if (e.n < 2) {
        e.std_error = std::numeric_limits<double>::infinity();
    } else {
        const long double big_n = static_cast<long double>(e.population);
        const long double spread = std::max(0.0L, e.sum_r2.value() - s * s / n);
        const long double var = (big_n - n) / ((big_n - 1.0L) * (n - 1.0L) * n) * spread;
        e.std_error = static_cast<double>(std::sqrt(var));
    }
    return e;
}

/// Lazy, seeded uniform permutation of all unordered pairs of m items.
/// Pairs come out as positions (a, b), a < b, into the caller's paper list.
class PairShuffler {
public:
    PairShuffler(std::size_t items, std::uint64_t seed)
        : items_(items), rng_(seed) {
        if (items < 2)
            throw DomainError("need at least two papers to form a pair");
    }

    std::size_t population() const noexcept { return pair_count(items_); }

    /// Next pair, or nullopt once every pair has been produced.
    std::optional<std::pair<std::size_t, std::size_t>> next() {
        if (drawn_ == population())
            return std::nullopt;
        // Fisher-Yates over [drawn_, N) with displaced slots kept sparsely.
        std::uniform_int_distribution<std::size_t> pick(drawn_, population() - 1);
        const std::size_t j = pick(rng_);
        const std::size_t chosen = slot(j);
        moved_[j] = slot(drawn_);
        moved_.erase(drawn_);
        ++drawn_;
        return condensed_pair(items_, chosen);
    }

private:
    std::size_t slot(std::size_t k) const {
        const auto it = moved_.find(k);
        return it == moved_.end() ? k : it->second;
    }

    std::size_t items_;
    std::size_t drawn_ = 0;
    std::mt19937_64 rng_;
    std::unordered_map<std::size_t, std::size_t> moved_;
};

inline PairShuffler shuffle_pairs(std::size_t papers, std::uint64_t seed) {
    return PairShuffler(papers, seed);
}

struct SamplerConfig {
    double epsilon = 0.1;   ///< stop once S_R < epsilon / 10 ...
    std::size_t streak = 10; ///< ... for this many consecutive updates
    std::uint64_t seed = 0;

    void validate() const {
        if (!(epsilon > 0.0))
            throw DomainError("sampler epsilon must be positive");
        if (streak < 1)
            throw DomainError("streak must be at least 1");
    }
};

struct SampledDistance {
    std::size_t a; ///< position in the paper list
    std::size_t b;
    double distance;
};

struct SampleOutcome {
    SampleEstimate estimate;
    std::vector<SampledDistance> samples;
    std::vector<SampleEstimate> trace; ///< estimate after each update
    bool stopped_by_rule = false;       ///< false when the stream ran out
};

/// Consumes the shuffled pair stream, feeding `distance(a, b)` into the
/// running estimate until S_R < epsilon/10 has held `streak` times in a row.
/// Up to `window` distances are computed concurrently ahead of the
/// estimate; updates are always applied in stream order.
template <typename DistanceFn>
SampleOutcome estimate_distribution(std::size_t papers, const SamplerConfig& cfg,
                                    DistanceFn&& distance, unsigned threads = 1,
                                    std::size_t window = 0) {
    cfg.validate();
    PairShuffler stream(papers, cfg.seed);
    SampleOutcome out{SampleEstimate(stream.population()), {}, {}, false};
    const double threshold = cfg.epsilon / 10.0;
    threads = detail::effective_threads(threads, stream.population());
    if (window == 0)
        window = threads == 1 ? 1 : 4 * static_cast<std::size_t>(threads);

    std::size_t held = 0;
    std::vector<std::pair<std::size_t, std::size_t>> batch;
    std::vector<double> values;
    for (;;) {
        batch.clear();
        while (batch.size() < window) {
            auto next = stream.next();
            if (!next)
                break;
            batch.push_back(*next);
        }
        if (batch.empty())
            break;
        values.assign(batch.size(), 0.0);
        detail::parallel_for(batch.size(), threads, [&](std::size_t k) {
            values[k] = distance(batch[k].first, batch[k].second);
        });
        for (std::size_t k = 0; k < batch.size(); ++k) {
            out.estimate = update_estimate(std::move(out.estimate), values[k]);
            out.samples.push_back({batch[k].first, batch[k].second, values[k]});
            out.trace.push_back(out.estimate);
            held = out.estimate.std_error < threshold ? held + 1 : 0;
            if (held >= cfg.streak) {
                out.stopped_by_rule = true;
                return out;
            }
        }
    }
    return out;
}

/// Graph form: distances come from the iterative solver on the papers'
/// shared component.
inline SampleOutcome estimate_distribution(const CitationGraph& g, std::span<const Index> papers,
                                           const SamplerConfig& cfg,
                                           const SolverConfig& solver = {}, unsigned threads = 1) {
    solver.validate();
    const auto component = detail::common_component(g, papers);
    return estimate_distribution(
        papers.size(), cfg,
        [&](std::size_t a, std::size_t b) {
            return resistance_in_component(g, papers[a], papers[b], component, solver).resistance;
        },
        threads);
}

} // namespace resdist
