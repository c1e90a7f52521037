// The Norm segmentation pipeline: inter-onset intervals plus pitch contour,
// z-score normalization, a first peak pick for boundary candidates, a
// candidate-segment self-similarity matrix, its novelty curve, and a second
// peak pick that refines the candidates.
#ifndef SYMSEG_NORM_METHOD_HPP
#define SYMSEG_NORM_METHOD_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "symseg/errors.hpp"
#include "symseg/graph.hpp"
#include "symseg/method_types.hpp"
#include "symseg/note.hpp"

namespace symseg {

// Inter-onset intervals in beats, length N-1.
inline std::vector<double> ioi(const Piece& piece) {
    const std::size_t n = piece.notes.size();
    if (n < 2) throw TooFewNotes("ioi: need at least 2 notes");
    std::vector<double> x(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const std::int64_t delta =
            piece.notes[i + 1].onset_ticks - piece.notes[i].onset_ticks;
        x[i] = static_cast<double>(delta) / piece.timing.ticks_per_quarter;
    }
    return x;
}

// Pitch contour: sign of the pitch step to the next note, in {-1, 0, 1}.
inline std::vector<int> local_direction(const Piece& piece) {
    const std::size_t n = piece.notes.size();
    if (n < 2) throw TooFewNotes("local_direction: need at least 2 notes");
    std::vector<int> l(n - 1);
    for (std::size_t i = 0; i + 1 < n; ++i) {
        const int step = piece.notes[i + 1].pitch - piece.notes[i].pitch;
        l[i] = step > 0 ? 1 : step < 0 ? -1 : 0;
    }
    return l;
}

// Z-score with the population standard deviation; an all-equal input maps to
// all zeros.
inline std::vector<double> zscore(const std::vector<double>& values) {
    if (values.empty()) return {};
    double mean = 0.0;
    for (double v : values) mean += v;
    mean /= static_cast<double>(values.size());
    double variance = 0.0;
    for (double v : values) variance += (v - mean) * (v - mean);
    variance /= static_cast<double>(values.size());
    const double sigma = std::sqrt(variance);

    std::vector<double> out(values.size(), 0.0);
    if (sigma == 0.0) return out;
    for (std::size_t i = 0; i < values.size(); ++i)
        out[i] = (values[i] - mean) / sigma;
    return out;
}

// Indices i where signal[i] is the maximum over [i-window, i+window] (clipped
// at the ends), exceeds mean + threshold * std of the whole signal, and is
// the leftmost index of its plateau of equal values.
inline std::vector<int> peak_pick(const std::vector<double>& signal, int window,
                                  double threshold) {
    if (window < 1) throw InvalidParams("peak_pick: window must be >= 1");
    const int n = static_cast<int>(signal.size());
    if (n == 0) return {};

    double mean = 0.0;
    for (double v : signal) mean += v;
    mean /= n;
    double variance = 0.0;
    for (double v : signal) variance += (v - mean) * (v - mean);
    variance /= n;
    const double cutoff = mean + threshold * std::sqrt(variance);

    std::vector<int> peaks;
    for (int i = 0; i < n; ++i) {
        if (!(signal[i] > cutoff)) continue;
        if (i > 0 && signal[i - 1] == signal[i]) continue;   // plateau interior
        bool is_max = true;
        for (int j = std::max(0, i - window);
             j <= std::min(n - 1, i + window); ++j) {
            if (signal[j] > signal[i]) { is_max = false; break; }
        }
        if (is_max) peaks.push_back(i);
    }
    return peaks;
}

// Candidate peak-pick window, proportional to the note count: round(alpha *
// n / 15), at least 1.
inline int candidate_window(double alpha, std::size_t n_notes) {
    if (!(alpha > 0.0)) throw InvalidParams("candidate_window: alpha must be positive");
    if (n_notes < 2) throw InvalidParams("candidate_window: need at least 2 notes");
    const long w = std::lround(alpha * static_cast<double>(n_notes) / 15.0);
    return static_cast<int>(std::max(1l, w));
}

// Boundary candidates as note indices, each within [1, N-1] and strictly
// increasing.
struct Candidates {
    std::vector<std::size_t> indices;
};

struct SegmentSsm {
    DenseMatrix matrix;                               // (C+1) x (C+1)
    std::vector<std::vector<double>> segment_vectors; // zero-padded features
};

// Self-similarity matrix over the note spans delimited by the candidates
// (plus the piece start and end). A span's feature vector is the elementwise
// sum of its IOI and contour subvectors, zero-padded to the longest span;
// entries are Euclidean distances between padded vectors.
inline SegmentSsm segment_ssm(const Piece& piece, const Candidates& candidates,
                              bool concat_span_features = false) {
    const std::size_t n = piece.notes.size();
    if (candidates.indices.empty())
        throw TooFewCandidates("segment_ssm: no candidates");
    std::size_t prev = 0;
    for (std::size_t idx : candidates.indices) {
        if (idx > n - 1 || idx <= prev)
            throw InvalidParams("segment_ssm: candidate indices must be strictly "
                                "increasing within [1, N-1]");
        prev = idx;
    }

    const std::vector<double> x = ioi(piece);
    const std::vector<int> l = local_direction(piece);

    std::vector<std::size_t> cuts{0};
    cuts.insert(cuts.end(), candidates.indices.begin(), candidates.indices.end());
    cuts.push_back(n);

    const std::size_t spans = cuts.size() - 1;
    std::vector<std::vector<double>> vectors(spans);
    std::size_t max_len = 0;
    for (std::size_t k = 0; k < spans; ++k) {
        const std::size_t begin = cuts[k];
        const std::size_t end = cuts[k + 1];
        std::vector<double>& v = vectors[k];
        if (concat_span_features) {
            for (std::size_t i = begin; i + 1 < end; ++i) v.push_back(x[i]);
            for (std::size_t i = begin; i + 1 < end; ++i)
                v.push_back(static_cast<double>(l[i]));
        } else {
            for (std::size_t i = begin; i + 1 < end; ++i)
                v.push_back(x[i] + static_cast<double>(l[i]));
        }
        max_len = std::max(max_len, v.size());
    }
    for (auto& v : vectors) v.resize(max_len, 0.0);

    SegmentSsm ssm;
    ssm.matrix = DenseMatrix(spans, spans, 0.0);
    for (std::size_t i = 0; i < spans; ++i) {
        for (std::size_t j = i + 1; j < spans; ++j) {
            double sum = 0.0;
            for (std::size_t k = 0; k < max_len; ++k) {
                const double d = vectors[i][k] - vectors[j][k];
                sum += d * d;
            }
            const double dist = std::sqrt(sum);
            ssm.matrix(i, j) = dist;
            ssm.matrix(j, i) = dist;
        }
    }
    ssm.segment_vectors = std::move(vectors);
    return ssm;
}

// End-to-end Norm run. The result's boundaries are the refined b'; the
// stage-1 candidates b ride along in norm_candidates. When stage 1 finds
// fewer than 2 candidates there is nothing to refine and b' = b.
inline Segmentation norm_segment(const Piece& piece, const NormParams& params) {
    const std::size_t n = piece.notes.size();
    if (n < 4) throw TooFewNotes("norm_segment: need at least 4 notes");

    const std::vector<double> x = ioi(piece);
    const std::vector<int> l = local_direction(piece);
    std::vector<double> combined(x.size());
    for (std::size_t i = 0; i < x.size(); ++i)
        combined[i] = x[i] + static_cast<double>(l[i]);
    const std::vector<double> normalized = zscore(combined);

    const int w1 = candidate_window(params.alpha1, n);
    const std::vector<int> stage1 = peak_pick(normalized, w1, params.tau1);

    Candidates candidates;
    for (int i : stage1) candidates.indices.push_back(static_cast<std::size_t>(i) + 1);

    std::vector<std::size_t> refined;
    if (candidates.indices.size() < 2) {
        refined = candidates.indices;
    } else {
        const SegmentSsm ssm =
            segment_ssm(piece, candidates, params.concat_span_features);
        const NoveltySignal curve = novelty(ssm.matrix);
        const std::vector<int> stage2 =
            peak_pick(curve.values, params.w2, params.tau2);
        // novelty index q sits between spans q and q+1, i.e. at candidate q
        for (int q : stage2) refined.push_back(candidates.indices[q]);
    }

    Segmentation seg;
    seg.method_params.method = Method::Norm;
    seg.method_params.norm_params = params;
    seg.piece_ref = piece.source_path;
    seg.timing = piece.timing;
    seg.includes_final = true;
    seg.boundaries = boundaries_from_notes(piece, refined);
    seg.norm_candidates = boundaries_from_notes(piece, candidates.indices);
    return seg;
}

} // namespace symseg

#endif // SYMSEG_NORM_METHOD_HPP
