// Penalized changepoint detection over 1-D signals with the kernelized
// mean-change (RBF) cost: exact PELT and a sliding-window detector.
//
// The cost of a segment [a, b) is
//     C(a, b) = sum_{t in [a,b)} K(t,t) - (1 / (b-a)) * sum_{s,t in [a,b)} K(s,t)
// with K(s, t) = exp(-gamma * (y_s - y_t)^2). It is zero iff all points in the
// segment are identical, non-negative, and never increases under splitting.
#ifndef SYMSEG_CHANGEPOINT_HPP
#define SYMSEG_CHANGEPOINT_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "symseg/errors.hpp"

namespace symseg {

namespace detail {

// k-th smallest pairwise difference y_t - y_s (s < t) of a sorted vector,
// 1-based k, found exactly by bisecting the value space. Avoids materializing
// all T*(T-1)/2 differences.
inline std::uint64_t count_pairs_within(const std::vector<double>& sorted_y,
                                        double value) {
    std::uint64_t count = 0;
    std::size_t s = 0;
    for (std::size_t t = 1; t < sorted_y.size(); ++t) {
        while (sorted_y[t] - sorted_y[s] > value) ++s;
        count += t - s;
    }
    return count;
}

inline double kth_pairwise_diff(const std::vector<double>& sorted_y,
                                std::uint64_t k) {
    double lo = 0.0;
    double hi = sorted_y.back() - sorted_y.front();
    if (count_pairs_within(sorted_y, lo) >= k) return lo;
    // invariant: count(lo) < k <= count(hi); the answer is a realized
    // difference in (lo, hi], so once lo and hi are adjacent doubles the
    // answer is hi exactly.
    while (std::nextafter(lo, hi) < hi) {
        const double mid = lo / 2 + hi / 2;
        if (count_pairs_within(sorted_y, mid) >= k) hi = mid;
        else lo = mid;
    }
    return hi;
}

} // namespace detail

// gamma = 1 / median of the pairwise squared differences (y_s - y_t)^2 over
// s < t; falls back to 1 when the median is zero.
inline double median_heuristic_gamma(const std::vector<double>& y) {
    if (y.size() < 2)
        throw InvalidParams("median_heuristic_gamma: need at least 2 samples");
    std::vector<double> sorted_y = y;
    std::sort(sorted_y.begin(), sorted_y.end());

    const std::uint64_t n = sorted_y.size();
    const std::uint64_t pairs = n * (n - 1) / 2;
    double median_sq = 0.0;
    if (pairs % 2 == 1) {
        const double d = detail::kth_pairwise_diff(sorted_y, pairs / 2 + 1);
        median_sq = d * d;
    } else {
        const double d1 = detail::kth_pairwise_diff(sorted_y, pairs / 2);
        const double d2 = detail::kth_pairwise_diff(sorted_y, pairs / 2 + 1);
        median_sq = (d1 * d1 + d2 * d2) / 2.0;
    }
    if (median_sq == 0.0) return 1.0;
    return 1.0 / median_sq;
}

// Precomputes 2-D prefix sums of the Gram matrix so any segment cost is O(1).
// Memory is (T+1)^2 doubles, the same envelope as materializing the Gram
// matrix itself; the capacity limit guards the allocation.
class KernelCost {
public:
    KernelCost(std::vector<double> signal, double gamma,
               std::size_t capacity_limit = 50000)
        : y_(std::move(signal)), gamma_(gamma) {
        if (y_.empty()) throw InvalidParams("KernelCost: empty signal");
        if (!(gamma_ > 0.0)) throw InvalidParams("KernelCost: gamma must be positive");
        if (y_.size() > capacity_limit)
            throw CapacityExceeded("KernelCost: signal length " +
                                   std::to_string(y_.size()) +
                                   " exceeds the capacity limit of " +
                                   std::to_string(capacity_limit));
        n_ = y_.size();
        const std::size_t dim = n_ + 1;
        prefix_.assign(dim * dim, 0.0);
        for (std::size_t i = 1; i <= n_; ++i) {
            double row_sum = 0.0;
            for (std::size_t j = 1; j <= n_; ++j) {
                row_sum += kernel(i - 1, j - 1);
                prefix_[i * dim + j] = prefix_[(i - 1) * dim + j] + row_sum;
            }
        }
    }

    static KernelCost with_median_gamma(std::vector<double> signal,
                                        std::size_t capacity_limit = 50000) {
        const double gamma = median_heuristic_gamma(signal);
        return KernelCost(std::move(signal), gamma, capacity_limit);
    }

    std::size_t size() const { return n_; }
    double gamma() const { return gamma_; }
    const std::vector<double>& signal() const { return y_; }

    double kernel(std::size_t s, std::size_t t) const {
        const double d = y_[s] - y_[t];
        return std::exp(-gamma_ * d * d);
    }

    // Kernelized mean-change cost of [a, b). Throws EmptySegment when a >= b.
    double segment_cost(std::size_t a, std::size_t b) const {
        if (a >= b) throw EmptySegment("segment_cost: empty segment");
        if (b > n_) throw IndexOutOfRange("segment_cost: segment end beyond signal");
        const std::size_t dim = n_ + 1;
        const double block = prefix_[b * dim + b] - prefix_[a * dim + b] -
                             prefix_[b * dim + a] + prefix_[a * dim + a];
        const double len = static_cast<double>(b - a);
        const double cost = len - block / len;   // K(t,t) == 1
        return cost < 0.0 ? 0.0 : cost;          // clamp float residue
    }

private:
    std::vector<double> y_;
    double gamma_;
    std::size_t n_ = 0;
    std::vector<double> prefix_;
};

struct PeltParams {
    int min_size = 1;      // smallest admissible segment length (w)
    int jump = 1;          // candidate stride (j)
    double penalty = 0.0;  // per-changepoint penalty (p)
};

// Detection result: strictly increasing segment-end indices, final == T.
struct Changepoints {
    std::vector<int> indices;
};

namespace detail {

inline void validate_changepoints(const Changepoints& result, int total,
                                  int min_size, int jump) {
    const auto& idx = result.indices;
    if (idx.empty() || idx.back() != total)
        throw std::logic_error("changepoints: missing final index");
    int prev = 0;
    for (std::size_t i = 0; i < idx.size(); ++i) {
        const bool final_index = i + 1 == idx.size();
        if (idx[i] <= prev)
            throw std::logic_error("changepoints: indices not increasing");
        if (!final_index && idx[i] % jump != 0)
            throw std::logic_error("changepoints: index off the jump grid");
        if (!final_index && (idx[i] - prev < min_size || total - idx[i] < min_size))
            throw std::logic_error("changepoints: segment below min_size");
        prev = idx[i];
    }
}

} // namespace detail

// Exact minimizer of  sum of segment costs + penalty * (#changepoints)  over
// all segmentations whose interior changepoints are multiples of `jump` and
// whose segments are at least `min_size` long. Pruning only shrinks the
// candidate set where it provably cannot affect the optimum; ties between
// equal-cost segmentations resolve toward the smaller (earlier) changepoint
// index, compared from the final boundary backward.
inline Changepoints pelt(const KernelCost& cost, const PeltParams& params) {
    if (params.min_size < 1 || params.jump < 1)
        throw InvalidParams("pelt: min_size and jump must be >= 1");
    if (params.penalty < 0.0)
        throw InvalidParams("pelt: penalty must be non-negative");

    const int total = static_cast<int>(cost.size());
    const int min_size = params.min_size;
    const int jump = params.jump;
    const double penalty = params.penalty;

    // starts[0] == 0; starts[1..] are the admissible interior changepoints.
    std::vector<int> starts{0};
    for (int c = jump; c + min_size <= total; c += jump)
        if (c >= min_size) starts.push_back(c);

    const std::size_t m = starts.size();
    std::vector<double> best_value(m + 1, 0.0);   // slot m is the endpoint T
    std::vector<std::size_t> parent(m + 1, 0);
    best_value[0] = -penalty;

    std::vector<std::size_t> active{0};           // ascending start slots
    std::vector<std::size_t> kept;
    std::vector<double> tails;                    // F(s) + C(s, t) per active s

    auto relax_endpoint = [&](std::size_t slot, int t) {
        double best = std::numeric_limits<double>::infinity();
        std::size_t best_parent = 0;
        tails.assign(active.size(), std::numeric_limits<double>::infinity());
        for (std::size_t k = 0; k < active.size(); ++k) {
            const std::size_t s_slot = active[k];
            const int s = starts[s_slot];
            if (t - s < min_size) continue;
            const double tail = best_value[s_slot] + cost.segment_cost(s, t);
            tails[k] = tail;
            if (tail + penalty < best) {   // ascending order: first min wins ties
                best = tail + penalty;
                best_parent = s_slot;
            }
        }
        best_value[slot] = best;
        parent[slot] = best_parent;

        // PELT pruning: a start strictly worse than the winner here can never
        // win later (the cost never increases under splitting). The margin
        // keeps near-ties alive against floating-point residue.
        const double margin = 1e-9 * (1.0 + std::fabs(best));
        kept.clear();
        for (std::size_t k = 0; k < active.size(); ++k) {
            if (tails[k] <= best + margin ||
                tails[k] == std::numeric_limits<double>::infinity())
                kept.push_back(active[k]);
        }
        active.swap(kept);
    };

    for (std::size_t slot = 1; slot < m; ++slot) {
        relax_endpoint(slot, starts[slot]);
        active.push_back(slot);
    }
    relax_endpoint(m, total);

    Changepoints result;
    std::size_t slot = m;
    result.indices.push_back(total);
    while (slot != 0) {
        const std::size_t up = parent[slot];
        if (up != 0) result.indices.push_back(starts[up]);
        slot = up;
    }
    std::reverse(result.indices.begin(), result.indices.end());

    detail::validate_changepoints(result, total, min_size, jump);
    return result;
}

// Peak-selection rule for the sliding-window detector. The default keeps the
// discrepancy peaks above `penalty_ratio * max(d)`; the count rule keeps the
// `count` highest peaks.
struct WindowSelection {
    enum class Rule { PenaltyRatio, Count };

    Rule rule = Rule::PenaltyRatio;
    double penalty_ratio = 0.5;
    int count = 0;

    static WindowSelection by_penalty(double ratio) {
        return WindowSelection{Rule::PenaltyRatio, ratio, 0};
    }
    static WindowSelection by_count(int count) {
        return WindowSelection{Rule::Count, 0.0, count};
    }
};

// Sliding-window discrepancy
//     d(i) = C(i - w/2, i + w/2) - C(i - w/2, i) - C(i, i + w/2)
// evaluated for every i with both half-windows in range. Changepoints are the
// strict local maxima of d over a +/- w/2 neighborhood that pass the
// selection rule; the final index T is always appended.
inline Changepoints window_detect(const KernelCost& cost, int window,
                                  const WindowSelection& selection = {}) {
    const int total = static_cast<int>(cost.size());
    if (window < 2) throw InvalidParams("window_detect: window must be >= 2");
    if (window >= total)
        throw WindowTooLarge("window_detect: window " + std::to_string(window) +
                             " >= signal length " + std::to_string(total));
    if (selection.rule == WindowSelection::Rule::PenaltyRatio &&
        selection.penalty_ratio < 0.0)
        throw InvalidParams("window_detect: penalty ratio must be non-negative");
    if (selection.rule == WindowSelection::Rule::Count && selection.count < 0)
        throw InvalidParams("window_detect: count must be non-negative");

    const int half = window / 2;
    const int lo = half;            // first valid center
    const int hi = total - half;    // last valid center
    std::vector<double> discrepancy(hi - lo + 1, 0.0);
    for (int i = lo; i <= hi; ++i) {
        discrepancy[i - lo] = cost.segment_cost(i - half, i + half) -
                              cost.segment_cost(i - half, i) -
                              cost.segment_cost(i, i + half);
    }

    double max_d = 0.0;
    for (double d : discrepancy) max_d = std::max(max_d, d);

    std::vector<int> peaks;
    for (int i = lo; i <= hi; ++i) {
        const double d = discrepancy[i - lo];
        bool is_peak = true;
        for (int j = std::max(lo, i - half); j <= std::min(hi, i + half); ++j) {
            if (j == i) continue;
            if (discrepancy[j - lo] >= d) { is_peak = false; break; }
        }
        if (is_peak) peaks.push_back(i);
    }

    std::vector<int> selected;
    if (selection.rule == WindowSelection::Rule::PenaltyRatio) {
        const double threshold = selection.penalty_ratio * max_d;
        for (int i : peaks)
            if (discrepancy[i - lo] > threshold) selected.push_back(i);
    } else {
        std::sort(peaks.begin(), peaks.end(), [&](int a, int b) {
            if (discrepancy[a - lo] != discrepancy[b - lo])
                return discrepancy[a - lo] > discrepancy[b - lo];
            return a < b;
        });
        if (static_cast<int>(peaks.size()) > selection.count)
            peaks.resize(selection.count);
        selected = peaks;
        std::sort(selected.begin(), selected.end());
    }

    Changepoints result;
    result.indices = std::move(selected);
    result.indices.push_back(total);
    detail::validate_changepoints(result, total, 1, 1);
    return result;
}

} // namespace symseg

#endif // SYMSEG_CHANGEPOINT_HPP
