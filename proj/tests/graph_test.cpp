// Tests for the note graph, adjacency matrix and novelty curve.
#include "symseg/graph.hpp"

#include <cmath>
#include <random>

#include <gtest/gtest.h>

#include "testutil.hpp"

namespace symseg {
namespace {

Piece piece_from(const std::vector<std::pair<std::int64_t, std::int64_t>>& spans,
                 int base_pitch = 60) {
    Piece piece;
    piece.timing.ticks_per_quarter = 480;
    int pitch = base_pitch;
    for (const auto& [on, off] : spans)
        piece.notes.push_back(Note{pitch++, on, off});
    sort_notes(piece.notes);
    return piece;
}

TEST(GraphTest, OnsetEdge) {
    const Piece piece = piece_from({{0, 480}, {0, 240}});
    const NoteGraph graph = build_graph(piece);
    ASSERT_EQ(graph.edges.size(), 1u);
    EXPECT_EQ(graph.edges[0].kind, EdgeKind::Onset);
    EXPECT_EQ(graph.edges[0].a, 0u);
    EXPECT_EQ(graph.edges[0].b, 1u);
}

TEST(GraphTest, ConsecutiveEdge) {
    const Piece piece = piece_from({{0, 480}, {480, 960}});
    const NoteGraph graph = build_graph(piece);
    ASSERT_EQ(graph.edges.size(), 1u);
    EXPECT_EQ(graph.edges[0].kind, EdgeKind::Consecutive);
}

TEST(GraphTest, OverlapEdge) {
    // A spans [0, 960), B starts inside it
    const Piece piece = piece_from({{0, 960}, {480, 720}});
    const NoteGraph graph = build_graph(piece);
    ASSERT_EQ(graph.edges.size(), 1u);
    EXPECT_EQ(graph.edges[0].kind, EdgeKind::Overlap);
}

TEST(GraphTest, DisjointNotesShareNoEdge) {
    const Piece piece = piece_from({{0, 240}, {480, 960}});
    EXPECT_TRUE(build_graph(piece).edges.empty());
}

TEST(GraphTest, NoSelfEdges) {
    std::mt19937 rng(11);
    for (int trial = 0; trial < 20; ++trial) {
        const NoteGraph graph = build_graph(testutil::random_piece(rng, 60));
        for (const Edge& e : graph.edges) EXPECT_NE(e.a, e.b);
    }
}

TEST(AdjacencyTest, SingleOnsetEdge) {
    const Piece piece = piece_from({{0, 480}, {0, 240}});
    const AdjacencyMatrix m = adjacency(build_graph(piece));
    ASSERT_EQ(m.size(), 2u);
    EXPECT_EQ(m(0, 0), 0);
    EXPECT_EQ(m(0, 1), 1);
    EXPECT_EQ(m(1, 0), 1);
    EXPECT_EQ(m(1, 1), 0);
}

TEST(AdjacencyTest, EdgelessGraphGivesZeroMatrix) {
    const Piece piece = piece_from({{0, 100}, {200, 300}, {400, 500}});
    const AdjacencyMatrix m = adjacency(build_graph(piece));
    ASSERT_EQ(m.size(), 3u);
    for (std::size_t r = 0; r < 3; ++r)
        for (std::size_t c = 0; c < 3; ++c) EXPECT_EQ(m(r, c), 0);
}

// Every 3-note fixture over a small tick lattice: the adjacency entry is the
// binary union of whatever edge kinds connect the pair.
TEST(AdjacencyTest, EntriesAreBinaryUnionOfEdgeKinds) {
    const std::vector<std::pair<std::int64_t, std::int64_t>> spans{
        {0, 240}, {0, 480}, {240, 480}, {240, 720}, {480, 720}, {120, 360}};
    for (std::size_t i = 0; i < spans.size(); ++i) {
        for (std::size_t j = 0; j < spans.size(); ++j) {
            for (std::size_t k = 0; k < spans.size(); ++k) {
                const Piece piece = piece_from({spans[i], spans[j], spans[k]});
                const NoteGraph graph = build_graph(piece);
                const AdjacencyMatrix m = adjacency(graph);
                const auto oracle = testutil::brute_force_edges(piece);

                // same pair set as the oracle, entry 1 iff any kind connects
                std::vector<std::vector<int>> expected(3, std::vector<int>(3, 0));
                for (const Edge& e : oracle) {
                    expected[e.a][e.b] = 1;
                    expected[e.b][e.a] = 1;
                }
                for (std::size_t r = 0; r < 3; ++r)
                    for (std::size_t c = 0; c < 3; ++c)
                        ASSERT_EQ(m(r, c), expected[r][c]);
            }
        }
    }
}

TEST(AdjacencyTest, CapacityLimit) {
    std::mt19937 rng(3);
    const Piece piece = testutil::random_piece(rng, 40, 30);
    AdjacencyConfig config;
    config.capacity_limit = 10;
    EXPECT_THROW(adjacency(build_graph(piece), config), CapacityExceeded);
}

TEST(AdjacencyTest, WeightedVariantDefaultsMatchBinary) {
    std::mt19937 rng(5);
    const Piece piece = testutil::random_piece(rng, 50);
    const NoteGraph graph = build_graph(piece);
    const AdjacencyMatrix binary = adjacency(graph);
    AdjacencyConfig config;
    config.kind_weighted = true;
    const DenseMatrix weighted = weighted_adjacency(graph, config);
    for (std::size_t r = 0; r < binary.size(); ++r)
        for (std::size_t c = 0; c < binary.size(); ++c)
            EXPECT_DOUBLE_EQ(weighted(r, c), static_cast<double>(binary(r, c)));
}

TEST(GraphPropertyTest, EdgesMatchBruteForcePredicates) {
    std::mt19937 rng(20240712);
    for (int trial = 0; trial < 60; ++trial) {
        const Piece piece = testutil::random_piece(rng, 120);
        const NoteGraph graph = build_graph(piece);
        const auto oracle = testutil::brute_force_edges(piece);
        ASSERT_EQ(graph.edges.size(), oracle.size());
        for (std::size_t i = 0; i < oracle.size(); ++i)
            ASSERT_TRUE(graph.edges[i] == oracle[i]);
    }
}

TEST(GraphPropertyTest, AdjacencySymmetricZeroDiagonal) {
    std::mt19937 rng(99);
    for (int trial = 0; trial < 20; ++trial) {
        const Piece piece = testutil::random_piece(rng, 100);
        const AdjacencyMatrix m = adjacency(build_graph(piece));
        for (std::size_t r = 0; r < m.size(); ++r) {
            ASSERT_EQ(m(r, r), 0);
            for (std::size_t c = 0; c < r; ++c) ASSERT_EQ(m(r, c), m(c, r));
        }
    }
}

TEST(GraphPropertyTest, TimeShiftInvariance) {
    std::mt19937 rng(17);
    for (int trial = 0; trial < 20; ++trial) {
        Piece piece = testutil::random_piece(rng, 80);
        const NoteGraph before = build_graph(piece);
        for (Note& n : piece.notes) {
            n.onset_ticks += 9600;
            n.offset_ticks += 9600;
        }
        const NoteGraph after = build_graph(piece);
        ASSERT_EQ(before.edges.size(), after.edges.size());
        for (std::size_t i = 0; i < before.edges.size(); ++i)
            ASSERT_TRUE(before.edges[i] == after.edges[i]);
    }
}

TEST(NoveltyTest, IdentityMatrix) {
    DenseMatrix m(3, 3, 0.0);
    for (std::size_t i = 0; i < 3; ++i) m(i, i) = 1.0;
    const NoveltySignal signal = novelty(m);
    ASSERT_EQ(signal.values.size(), 2u);
    EXPECT_DOUBLE_EQ(signal.values[0], std::sqrt(2.0));
    EXPECT_DOUBLE_EQ(signal.values[1], std::sqrt(2.0));
}

TEST(NoveltyTest, ConstantMatrixIsFlat) {
    DenseMatrix m(4, 4, 0.7);
    for (double v : novelty(m).values) EXPECT_DOUBLE_EQ(v, 0.0);
}

TEST(NoveltyTest, TwoByTwoExchange) {
    DenseMatrix m(2, 2, 0.0);
    m(0, 1) = 1.0;
    m(1, 0) = 1.0;
    const NoveltySignal signal = novelty(m);
    ASSERT_EQ(signal.values.size(), 1u);
    EXPECT_DOUBLE_EQ(signal.values[0], std::sqrt(2.0));
}

TEST(NoveltyTest, TooSmall) {
    DenseMatrix m(1, 1, 0.0);
    EXPECT_THROW(novelty(m), MatrixTooSmall);
}

// Appending a copy of the last row appends a zero to the novelty signal.
TEST(NoveltyTest, DuplicatedLastRowAppendsZero) {
    std::mt19937 rng(23);
    std::uniform_real_distribution<double> value(0.0, 1.0);
    DenseMatrix m(5, 5, 0.0);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 5; ++c) m(r, c) = value(rng);

    DenseMatrix extended(6, 5, 0.0);
    for (std::size_t r = 0; r < 5; ++r)
        for (std::size_t c = 0; c < 5; ++c) extended(r, c) = m(r, c);
    for (std::size_t c = 0; c < 5; ++c) extended(5, c) = m(4, c);

    const auto base = novelty(m).values;
    const auto longer = novelty(extended).values;
    ASSERT_EQ(longer.size(), base.size() + 1);
    for (std::size_t i = 0; i < base.size(); ++i)
        EXPECT_DOUBLE_EQ(longer[i], base[i]);
    EXPECT_DOUBLE_EQ(longer.back(), 0.0);
}

TEST(NoveltyTest, AdjacencyNoveltyNonNegative) {
    std::mt19937 rng(31);
    const Piece piece = testutil::random_piece(rng, 100);
    const NoveltySignal signal = novelty(adjacency(build_graph(piece)));
    EXPECT_EQ(signal.values.size(), piece.notes.size() - 1);
    for (double v : signal.values) EXPECT_GE(v, 0.0);
}

} // namespace
} // namespace symseg
