// Composition of ingestion, graph construction and changepoint detection into
// the three segmentation methods, with one shared window-scaling rule.
#ifndef SYMSEG_PIPELINE_HPP
#define SYMSEG_PIPELINE_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "symseg/changepoint.hpp"
#include "symseg/errors.hpp"
#include "symseg/graph.hpp"
#include "symseg/method_types.hpp"
#include "symseg/norm_method.hpp"
#include "symseg/note.hpp"

namespace symseg {

struct PipelineConfig {
    std::size_t capacity_limit = 50000;   // guards quadratic allocations
};

// All three methods size their windows the same way: proportional to the
// note count, round(alpha * n / 15), at least 1.
inline int scaled_window(double alpha, std::size_t n_notes) {
    return candidate_window(alpha, n_notes);
}

namespace detail {

// Novelty positions measure the change between adjacency rows i and i+1; a
// changepoint at position i therefore lands on note i+1, the first note of
// the new segment.
inline std::vector<std::size_t> changepoints_to_notes(const Changepoints& cps) {
    std::vector<std::size_t> notes;
    for (std::size_t k = 0; k + 1 < cps.indices.size(); ++k)
        notes.push_back(static_cast<std::size_t>(cps.indices[k]) + 1);
    return notes;
}

inline NoveltySignal adjacency_novelty(const Piece& piece,
                                       const PipelineConfig& config) {
    if (piece.notes.size() < 4)
        throw TooFewNotes("segmentation needs at least 4 notes, got " +
                          std::to_string(piece.notes.size()));
    AdjacencyConfig adjacency_config;
    adjacency_config.capacity_limit = config.capacity_limit;
    const NoteGraph graph = build_graph(piece);
    const AdjacencyMatrix matrix = adjacency(graph, adjacency_config);
    return novelty(matrix);
}

inline Segmentation make_segmentation(const Piece& piece,
                                      const MethodParams& params,
                                      const std::vector<std::size_t>& notes) {
    Segmentation seg;
    seg.method_params = params;
    seg.piece_ref = piece.source_path;
    seg.timing = piece.timing;
    seg.includes_final = true;
    seg.boundaries = boundaries_from_notes(piece, notes);
    return seg;
}

} // namespace detail

inline Segmentation g_pelt(const Piece& piece, double alpha, double beta,
                           double penalty, const PipelineConfig& config = {}) {
    MethodParams params;
    params.method = Method::GPelt;
    params.alpha = alpha;
    params.beta = beta;
    params.penalty = penalty;
    validate_params(params);

    const NoveltySignal curve = detail::adjacency_novelty(piece, config);
    const int window = scaled_window(alpha, piece.notes.size());
    const int jump = std::max(1, static_cast<int>(std::lround(beta * window)));

    const KernelCost cost = KernelCost::with_median_gamma(
        curve.values, config.capacity_limit);
    const Changepoints cps =
        pelt(cost, PeltParams{window, jump, penalty});
    return detail::make_segmentation(piece, params,
                                     detail::changepoints_to_notes(cps));
}

inline Segmentation g_window(const Piece& piece, double alpha, double penalty,
                             const PipelineConfig& config = {}) {
    MethodParams params;
    params.method = Method::GWindow;
    params.alpha = alpha;
    params.penalty = penalty;
    validate_params(params);

    const NoveltySignal curve = detail::adjacency_novelty(piece, config);
    const int total = static_cast<int>(curve.values.size());
    int window = std::max(2, scaled_window(alpha, piece.notes.size()));
    window += window % 2;                            // even
    while (window >= total && window > 2) window -= 2;

    const KernelCost cost = KernelCost::with_median_gamma(
        curve.values, config.capacity_limit);
    const Changepoints cps =
        window_detect(cost, window, WindowSelection::by_penalty(penalty));
    return detail::make_segmentation(piece, params,
                                     detail::changepoints_to_notes(cps));
}

inline Segmentation run_method(const Piece& piece, const MethodParams& params,
                               const PipelineConfig& config = {}) {
    validate_params(params);
    switch (params.method) {
    case Method::Norm: {
        Segmentation seg = norm_segment(piece, *params.norm_params);
        seg.method_params.norm_stage = params.norm_stage;
        if (params.norm_stage == NormStage::Candidates)
            seg.boundaries = seg.norm_candidates;
        return seg;
    }
    case Method::GPelt:
        return g_pelt(piece, params.alpha, params.beta, params.penalty, config);
    case Method::GWindow:
        return g_window(piece, params.alpha, params.penalty, config);
    case Method::Baseline:
        throw InvalidParams("run_method: baselines are generated by "
                            "baseline_segmentation, not run_method");
    }
    throw InvalidParams("run_method: unknown method");
}

} // namespace symseg

#endif // SYMSEG_PIPELINE_HPP
