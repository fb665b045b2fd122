#pragma once

#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "resdist/error.hpp"

namespace resdist {

/// Solver detail kept alongside each pairwise distance.
struct PairRecord {
    double resistance = 0.0;
    double lower = 0.0;
    double upper = 0.0;
    std::size_t iterations = 0;
    bool converged = true;
};

/// Number of unordered pairs among n items.
constexpr std::size_t pair_count(std::size_t n) noexcept { return n < 2 ? 0 : n * (n - 1) / 2; }

/// Position of (i, j), i < j, in the row-major condensed upper triangle.
constexpr std::size_t condensed_index(std::size_t n, std::size_t i, std::size_t j) noexcept {
    return i * n - i * (i + 1) / 2 + (j - i - 1);
}

/// Inverse of condensed_index().
inline std::pair<std::size_t, std::size_t> condensed_pair(std::size_t n, std::size_t k) {
    // Row i starts at i*n - i(i+1)/2; solve approximately, then correct.
    const double nd = static_cast<double>(n);
    auto i = static_cast<std::size_t>(
        std::floor(((2.0 * nd - 1.0) - std::sqrt((2.0 * nd - 1.0) * (2.0 * nd - 1.0) -
                                                 8.0 * static_cast<double>(k))) /
                   2.0));
    auto row_start = [n](std::size_t r) { return r * n - r * (r + 1) / 2; };
    while (i > 0 && row_start(i) > k)
        --i;
    while (i + 1 < n && row_start(i + 1) <= k)
        ++i;
    return {i, i + 1 + (k - row_start(i))};
}

/// Condensed symmetric matrix of paper-paper distances. Labels are the
/// paper ids in matrix order; the diagonal is implicitly zero.
class DistanceMatrix {
public:
    DistanceMatrix() = default;

    explicit DistanceMatrix(std::vector<std::string> labels)
        : labels_(std::move(labels)), records_(pair_count(labels_.size())) {}

    DistanceMatrix(std::vector<std::string> labels, std::vector<PairRecord> records)
        : labels_(std::move(labels)), records_(std::move(records)) {
        if (records_.size() != pair_count(labels_.size()))
            throw ContractViolation("DistanceMatrix: record count does not match label count");
    }

    /// Bare distances, condensed row-major; solver details are filled as exact.
    static DistanceMatrix from_condensed(std::vector<std::string> labels,
                                         const std::vector<double>& values) {
        std::vector<PairRecord> recs;
        recs.reserve(values.size());
        for (double v : values)
            recs.push_back({v, v, v, 0, true});
        return DistanceMatrix(std::move(labels), std::move(recs));
    }

    std::size_t size() const noexcept { return labels_.size(); }
    std::size_t pairs() const noexcept { return records_.size(); }
    const std::vector<std::string>& labels() const noexcept { return labels_; }
    const std::string& label(std::size_t i) const { return labels_.at(i); }

    std::optional<std::size_t> find(const std::string& label) const {
        for (std::size_t i = 0; i < labels_.size(); ++i) {
            if (labels_[i] == label)
                return i;
        }
        return std::nullopt;
    }

    double operator()(std::size_t i, std::size_t j) const {
        if (i == j)
            return 0.0;
        if (i > j)
            std::swap(i, j);
        return records_[condensed_index(size(), i, j)].resistance;
    }

    const PairRecord& record(std::size_t i, std::size_t j) const {
        if (i == j)
            throw DomainError("no record for a diagonal entry");
        if (i > j)
            std::swap(i, j);
        return records_[condensed_index(size(), i, j)];
    }

    PairRecord& record(std::size_t i, std::size_t j) {
        return const_cast<PairRecord&>(std::as_const(*this).record(i, j));
    }

    const std::vector<PairRecord>& records() const noexcept { return records_; }

    std::vector<double> condensed() const {
        std::vector<double> out;
        out.reserve(records_.size());
        for (const auto& r : records_)
            out.push_back(r.resistance);
        return out;
    }

    /// Copy with every distance multiplied by `factor`.
    DistanceMatrix scaled(double factor) const {
        auto recs = records_;
        for (auto& r : recs) {
            r.resistance *= factor;
            r.lower *= factor;
            r.upper *= factor;
        }
        return DistanceMatrix(labels_, std::move(recs));
    }

private:
    std::vector<std::string> labels_;
    std::vector<PairRecord> records_;
};

} // namespace resdist
