// Undirected note graph over a Piece, its adjacency matrix, and the novelty
// curve computed from consecutive matrix rows.
//
// Two notes i != j are connected when, for either ordering of the pair,
//   onset:       on(i) == on(j)
//   consecutive: off(i) == on(j)
//   overlap:     off(i) >  on(j)  and  on(i) < on(j)
// Nodes are never connected to themselves, and edge comparisons are exact
// integer tick comparisons.
#ifndef SYMSEG_GRAPH_HPP
#define SYMSEG_GRAPH_HPP

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <string>
#include <vector>

#include "symseg/errors.hpp"
#include "symseg/note.hpp"

namespace symseg {

enum class EdgeKind { Onset, Consecutive, Overlap };

struct Edge {
    std::uint32_t a = 0;   // a < b
    std::uint32_t b = 0;
    EdgeKind kind = EdgeKind::Onset;

    friend bool operator==(const Edge&, const Edge&) = default;
    friend auto operator<=>(const Edge&, const Edge&) = default;
};

struct NoteGraph {
    std::size_t node_count = 0;
    std::vector<Edge> edges;   // sorted by (a, b, kind), unique
};

// Dense row-major double matrix, used for self-similarity matrices and the
// weighted adjacency variant.
class DenseMatrix {
public:
    DenseMatrix() = default;
    DenseMatrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double operator()(std::size_t r, std::size_t c) const {
        return values_[r * cols_ + c];
    }
    double& operator()(std::size_t r, std::size_t c) {
        return values_[r * cols_ + c];
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> values_;
};

// Binary symmetric adjacency matrix with zero diagonal, one byte per entry
// since the allocation is quadratic in the note count.
class AdjacencyMatrix {
public:
    AdjacencyMatrix() = default;
    explicit AdjacencyMatrix(std::size_t n) : n_(n), values_(n * n, 0) {}

    std::size_t rows() const { return n_; }
    std::size_t cols() const { return n_; }
    std::size_t size() const { return n_; }

    std::uint8_t operator()(std::size_t r, std::size_t c) const {
        return values_[r * n_ + c];
    }

    void set(std::size_t r, std::size_t c, std::uint8_t v) {
        values_[r * n_ + c] = v;
    }

private:
    std::size_t n_ = 0;
    std::vector<std::uint8_t> values_;
};

// Builds the note graph of an onset-sorted piece. Notes at positions a < b in
// sort order satisfy on(a) <= on(b), so all partners of a lie in the
// contiguous onset range [on(a), off(a)] and the scan is O(N log N + |E|).
inline NoteGraph build_graph(const Piece& piece) {
    const std::vector<Note>& notes = piece.notes;
    const std::size_t n = notes.size();

    NoteGraph graph;
    graph.node_count = n;
    if (n < 2) return graph;

    std::vector<std::int64_t> onsets(n);
    for (std::size_t i = 0; i < n; ++i) onsets[i] = notes[i].onset_ticks;

    for (std::size_t a = 0; a < n; ++a) {
        const std::int64_t on_a = notes[a].onset_ticks;
        const std::int64_t off_a = notes[a].offset_ticks;

        const auto begin = onsets.begin();
        const std::size_t same_end =
            std::upper_bound(begin + a + 1, onsets.end(), on_a) - begin;
        const std::size_t overlap_end =
            std::lower_bound(begin + same_end, onsets.end(), off_a) - begin;
        const std::size_t consecutive_end =
            std::upper_bound(begin + overlap_end, onsets.end(), off_a) - begin;

        const auto idx = [](std::size_t v) { return static_cast<std::uint32_t>(v); };
        for (std::size_t b = a + 1; b < same_end; ++b)
            graph.edges.push_back(Edge{idx(a), idx(b), EdgeKind::Onset});
        for (std::size_t b = same_end; b < overlap_end; ++b)
            graph.edges.push_back(Edge{idx(a), idx(b), EdgeKind::Overlap});
        for (std::size_t b = overlap_end; b < consecutive_end; ++b)
            graph.edges.push_back(Edge{idx(a), idx(b), EdgeKind::Consecutive});
    }

    std::sort(graph.edges.begin(), graph.edges.end());
    return graph;
}

struct AdjacencyConfig {
    std::size_t capacity_limit = 50000;   // guards the N*N allocation

    // Experimental variant: weight entries by edge kind instead of 0/1.
    // Weights are capped at 1 so the binary defaults reproduce adjacency().
    bool kind_weighted = false;
    double onset_weight = 1.0;
    double consecutive_weight = 1.0;
    double overlap_weight = 1.0;
};

inline void check_capacity(std::size_t n, std::size_t limit) {
    if (n > limit)
        throw CapacityExceeded("adjacency: " + std::to_string(n) +
                               " notes exceed the capacity limit of " +
                               std::to_string(limit));
}

inline AdjacencyMatrix adjacency(const NoteGraph& graph,
                                 const AdjacencyConfig& config = {}) {
    check_capacity(graph.node_count, config.capacity_limit);
    AdjacencyMatrix m(graph.node_count);
    for (const Edge& e : graph.edges) {
        m.set(e.a, e.b, 1);
        m.set(e.b, e.a, 1);
    }
    return m;
}

inline DenseMatrix weighted_adjacency(const NoteGraph& graph,
                                      const AdjacencyConfig& config) {
    check_capacity(graph.node_count, config.capacity_limit);
    DenseMatrix m(graph.node_count, graph.node_count, 0.0);
    for (const Edge& e : graph.edges) {
        double w = 1.0;
        switch (e.kind) {
        case EdgeKind::Onset: w = config.onset_weight; break;
        case EdgeKind::Consecutive: w = config.consecutive_weight; break;
        case EdgeKind::Overlap: w = config.overlap_weight; break;
        }
        const double v = std::min(1.0, m(e.a, e.b) + w);
        m(e.a, e.b) = v;
        m(e.b, e.a) = v;
    }
    return m;
}

// 1-D novelty signal: Euclidean distance between consecutive matrix rows.
struct NoveltySignal {
    enum class Source { AdjacencyMatrix, SSM };

    std::vector<double> values;   // length rows - 1, all >= 0
    Source source = Source::AdjacencyMatrix;
};

// Works on any matrix-like type with rows()/cols()/operator()(r, c). Callers
// pass square matrices; only equal-length rows are actually required.
template <typename Matrix>
NoveltySignal novelty(const Matrix& matrix, NoveltySignal::Source source) {
    const std::size_t rows = matrix.rows();
    if (rows < 2)
        throw MatrixTooSmall("novelty: need at least 2 rows, got " +
                             std::to_string(rows));
    const std::size_t cols = matrix.cols();

    NoveltySignal signal;
    signal.source = source;
    signal.values.resize(rows - 1);
    for (std::size_t i = 0; i + 1 < rows; ++i) {
        double sum = 0.0;
        for (std::size_t c = 0; c < cols; ++c) {
            const double d = static_cast<double>(matrix(i + 1, c)) -
                             static_cast<double>(matrix(i, c));
            sum += d * d;
        }
        signal.values[i] = std::sqrt(sum);
    }
    return signal;
}

inline NoveltySignal novelty(const AdjacencyMatrix& matrix) {
    return novelty(matrix, NoveltySignal::Source::AdjacencyMatrix);
}

inline NoveltySignal novelty(const DenseMatrix& matrix) {
    return novelty(matrix, NoveltySignal::Source::SSM);
}

// CSV export (one matrix row per line / one value per line).
template <typename Matrix>
std::string matrix_to_csv(const Matrix& matrix) {
    std::ostringstream out;
    out.precision(17);
    for (std::size_t r = 0; r < matrix.rows(); ++r) {
        for (std::size_t c = 0; c < matrix.cols(); ++c) {
            if (c) out << ',';
            out << static_cast<double>(matrix(r, c));
        }
        out << '\n';
    }
    return out.str();
}

} // namespace symseg

#endif // SYMSEG_GRAPH_HPP
