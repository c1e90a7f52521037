// Tolerance-based boundary scoring: maximum one-to-one matching within a beat
// tolerance, precision/recall/F1 per file, macro aggregates, equidistant
// baselines and beat-error histograms.
#ifndef SYMSEG_EVALUATION_HPP
#define SYMSEG_EVALUATION_HPP

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <map>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "symseg/errors.hpp"
#include "symseg/method_types.hpp"
#include "symseg/note.hpp"

namespace symseg {

enum class ToleranceKind { OneBeat, OneBar };

inline std::string tolerance_name(ToleranceKind kind) {
    return kind == ToleranceKind::OneBeat ? "one-beat" : "one-bar";
}

// One beat is always a quarter note; one bar is numerator * 4/denominator
// beats (so a 3/8 bar spans 1.5 beats).
inline double tolerance_in_beats(ToleranceKind kind, const TimingContext& timing) {
    if (kind == ToleranceKind::OneBeat) return 1.0;
    return timing.bar_length_beats();
}

enum class Level { Low, Mid, High };

inline std::string level_name(Level level) {
    switch (level) {
    case Level::Low: return "low";
    case Level::Mid: return "mid";
    case Level::High: return "high";
    }
    return "mid";
}

inline Level level_from_name(const std::string& name) {
    if (name == "low") return Level::Low;
    if (name == "mid") return Level::Mid;
    if (name == "high") return Level::High;
    throw InvalidParams("unknown level '" + name + "'");
}

// Reference boundaries for one file and structure level, in beats. The piece
// start (beat 0) is excluded; the piece end is included.
struct Annotation {
    std::string source;
    Level level = Level::Mid;
    std::vector<double> boundaries_beats;
};

// ---------------------------------------------------------------------------
// Matching
// ---------------------------------------------------------------------------

struct Matching {
    std::vector<std::pair<std::size_t, std::size_t>> pairs;  // (ref, est)
    std::size_t n_reference = 0;
    std::size_t n_estimate = 0;
    bool empty_reference = false;
    bool empty_estimate = false;
};

// Maximum-cardinality one-to-one matching between two sorted boundary lists
// under |r - e| <= tolerance. With sorted points and a uniform tolerance the
// two-pointer greedy scan is optimal.
inline Matching match_boundaries(const std::vector<double>& reference,
                                 const std::vector<double>& estimate,
                                 double tolerance) {
    if (!(tolerance > 0.0))
        throw InvalidParams("match_boundaries: tolerance must be positive");
    if (!std::is_sorted(reference.begin(), reference.end()) ||
        !std::is_sorted(estimate.begin(), estimate.end()))
        throw InvalidParams("match_boundaries: inputs must be sorted");

    Matching m;
    m.n_reference = reference.size();
    m.n_estimate = estimate.size();
    m.empty_reference = reference.empty();
    m.empty_estimate = estimate.empty();

    std::size_t i = 0, j = 0;
    while (i < reference.size() && j < estimate.size()) {
        const double diff = reference[i] - estimate[j];
        if (std::fabs(diff) <= tolerance) {
            m.pairs.emplace_back(i, j);
            ++i;
            ++j;
        } else if (diff > 0.0) {
            ++j;   // estimate too early for every remaining reference
        } else {
            ++i;   // reference too early for every remaining estimate
        }
    }
    return m;
}

struct Scores {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// P = |M| / |estimate|, R = |M| / |reference|; empty sides score 0 (callers
// see the flags on the Matching).
inline Scores scores_from(const Matching& m) {
    Scores s;
    const double hits = static_cast<double>(m.pairs.size());
    s.precision = m.n_estimate == 0 ? 0.0 : hits / static_cast<double>(m.n_estimate);
    s.recall = m.n_reference == 0 ? 0.0 : hits / static_cast<double>(m.n_reference);
    s.f1 = (s.precision + s.recall) > 0.0
               ? 2.0 * s.precision * s.recall / (s.precision + s.recall)
               : 0.0;
    return s;
}

// ---------------------------------------------------------------------------
// Baselines and error histograms
// ---------------------------------------------------------------------------

// k equidistant boundaries at i * duration / k, i = 1..k; the last one is the
// end-of-file boundary.
inline std::vector<double> equidistant_baseline(double piece_duration_beats,
                                                int k) {
    if (k < 1) throw InvalidParams("equidistant_baseline: k must be >= 1");
    if (!(piece_duration_beats > 0.0))
        throw InvalidParams("equidistant_baseline: duration must be positive");
    std::vector<double> out(k);
    for (int i = 1; i <= k; ++i)
        out[i - 1] = static_cast<double>(i) * piece_duration_beats / k;
    return out;
}

inline Segmentation baseline_segmentation(const Piece& piece, int k) {
    const double duration = piece_end_beats(piece);
    const std::vector<double> beats = equidistant_baseline(duration, k);
    Segmentation seg;
    seg.method_params.method = Method::Baseline;
    seg.method_params.baseline_k = k;
    seg.piece_ref = piece.source_path;
    seg.timing = piece.timing;
    seg.includes_final = true;
    for (std::size_t i = 0; i < beats.size(); ++i)
        seg.boundaries.push_back(Boundary{
            i + 1, beats[i], beats_to_seconds(beats[i], piece.timing)});
    return seg;
}

struct BeatErrorHistogram {
    double bin_width = 10.0;
    std::vector<std::size_t> counts;   // counts[b] covers [b*w, (b+1)*w)

    std::size_t total() const {
        std::size_t sum = 0;
        for (std::size_t c : counts) sum += c;
        return sum;
    }
};

// Distance of each estimated boundary to its nearest reference boundary,
// binned by bin_width beats.
inline BeatErrorHistogram beat_error_histogram(
    const std::vector<double>& reference, const std::vector<double>& estimate,
    double bin_width_beats = 10.0) {
    if (!(bin_width_beats > 0.0))
        throw InvalidParams("beat_error_histogram: bin width must be positive");
    if (reference.empty() && !estimate.empty())
        throw EmptyReference("beat_error_histogram: no reference boundaries");

    BeatErrorHistogram histogram;
    histogram.bin_width = bin_width_beats;
    for (double e : estimate) {
        double nearest = std::numeric_limits<double>::infinity();
        for (double r : reference) nearest = std::min(nearest, std::fabs(e - r));
        const std::size_t bin =
            static_cast<std::size_t>(std::floor(nearest / bin_width_beats));
        if (histogram.counts.size() <= bin) histogram.counts.resize(bin + 1, 0);
        ++histogram.counts[bin];
    }
    return histogram;
}

// ---------------------------------------------------------------------------
// Corpus evaluation
// ---------------------------------------------------------------------------

struct FileScore {
    std::string file;
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
    std::size_t n_reference = 0;
    std::size_t n_estimate = 0;
    double tolerance_beats = 1.0;
    bool empty_reference = false;
    bool empty_estimate = false;
};

struct Aggregate {
    double precision_mean = 0.0, precision_std = 0.0;
    double recall_mean = 0.0, recall_std = 0.0;
    double f1_mean = 0.0, f1_std = 0.0;
    std::size_t files = 0;
};

struct EvalReport {
    std::vector<FileScore> per_file;   // sorted by file
    Aggregate aggregate;
    std::string tolerance_kind;
    // Uniform tolerance in beats, or NaN when the bar length varies by file.
    double tolerance_beats = std::numeric_limits<double>::quiet_NaN();
};

// Stem used for pairing: file name without directory or extension.
inline std::string path_stem(const std::string& path) {
    const std::size_t slash = path.find_last_of("/\\");
    const std::size_t begin = slash == std::string::npos ? 0 : slash + 1;
    std::size_t end = path.find_last_of('.');
    if (end == std::string::npos || end <= begin) end = path.size();
    return path.substr(begin, end - begin);
}

namespace detail {

inline double population_std(const std::vector<double>& values, double mean) {
    if (values.empty()) return 0.0;
    double variance = 0.0;
    for (double v : values) variance += (v - mean) * (v - mean);
    return std::sqrt(variance / static_cast<double>(values.size()));
}

// The piece start is not a boundary on either side of the protocol.
inline std::vector<double> sorted_nonzero(std::vector<double> beats) {
    std::sort(beats.begin(), beats.end());
    std::vector<double> out;
    out.reserve(beats.size());
    for (double b : beats)
        if (b > 0.0) out.push_back(b);
    return out;
}

} // namespace detail

// Per-file precision/recall/F1 with macro (per-file mean +/- population std)
// aggregation. Files pair one-to-one by path stem; a file present on only one
// side raises UnpairedFile.
inline EvalReport evaluate_corpus(const std::vector<Annotation>& annotations,
                                  const std::vector<Segmentation>& segmentations,
                                  ToleranceKind kind) {
    std::map<std::string, const Annotation*> reference_by_stem;
    for (const Annotation& a : annotations) {
        if (!reference_by_stem.emplace(path_stem(a.source), &a).second)
            throw UnpairedFile("evaluate_corpus: duplicate annotation for '" +
                               path_stem(a.source) + "'");
    }

    EvalReport report;
    report.tolerance_kind = tolerance_name(kind);

    std::map<std::string, const Segmentation*> estimate_by_stem;
    for (const Segmentation& s : segmentations) {
        if (!estimate_by_stem.emplace(path_stem(s.piece_ref), &s).second)
            throw UnpairedFile("evaluate_corpus: duplicate estimate for '" +
                               path_stem(s.piece_ref) + "'");
    }
    for (const auto& [stem, annotation] : reference_by_stem)
        if (!estimate_by_stem.count(stem))
            throw UnpairedFile("evaluate_corpus: no estimate for '" + stem + "'");
    for (const auto& [stem, segmentation] : estimate_by_stem)
        if (!reference_by_stem.count(stem))
            throw UnpairedFile("evaluate_corpus: no annotation for '" + stem + "'");

    std::vector<double> precisions, recalls, f1s;
    bool uniform_tolerance = true;
    double tolerance_seen = std::numeric_limits<double>::quiet_NaN();

    for (const auto& [stem, segmentation] : estimate_by_stem) {
        const Annotation& annotation = *reference_by_stem.at(stem);
        const double tolerance = tolerance_in_beats(kind, segmentation->timing);
        if (std::isnan(tolerance_seen)) tolerance_seen = tolerance;
        else if (tolerance != tolerance_seen) uniform_tolerance = false;

        const std::vector<double> reference =
            detail::sorted_nonzero(annotation.boundaries_beats);
        const std::vector<double> estimate =
            detail::sorted_nonzero(segmentation->boundary_beats());

        const Matching matching = match_boundaries(reference, estimate, tolerance);
        const Scores scores = scores_from(matching);

        FileScore row;
        row.file = stem;
        row.precision = scores.precision;
        row.recall = scores.recall;
        row.f1 = scores.f1;
        row.n_reference = matching.n_reference;
        row.n_estimate = matching.n_estimate;
        row.tolerance_beats = tolerance;
        row.empty_reference = matching.empty_reference;
        row.empty_estimate = matching.empty_estimate;
        report.per_file.push_back(std::move(row));

        precisions.push_back(scores.precision);
        recalls.push_back(scores.recall);
        f1s.push_back(scores.f1);
    }

    const std::size_t files = report.per_file.size();
    report.aggregate.files = files;
    if (files > 0) {
        auto mean = [&](const std::vector<double>& v) {
            double sum = 0.0;
            for (double x : v) sum += x;
            return sum / static_cast<double>(v.size());
        };
        report.aggregate.precision_mean = mean(precisions);
        report.aggregate.recall_mean = mean(recalls);
        report.aggregate.f1_mean = mean(f1s);
        report.aggregate.precision_std =
            detail::population_std(precisions, report.aggregate.precision_mean);
        report.aggregate.recall_std =
            detail::population_std(recalls, report.aggregate.recall_mean);
        report.aggregate.f1_std =
            detail::population_std(f1s, report.aggregate.f1_mean);
    }
    if (uniform_tolerance) report.tolerance_beats = tolerance_seen;
    return report;
}

// ---------------------------------------------------------------------------
// Annotation ingestion
// ---------------------------------------------------------------------------

// A correction applied to phrases-style annotation cells before conversion,
// so dataset fixes are explicit inputs instead of silent edits.
struct AnnotationPatch {
    std::string file;     // path stem the patch applies to
    std::string column;   // "start" or "end"
    double match = 0.0;
    double replace = 0.0;
};

// Parses one annotation file. Two CSV layouts are recognized by their header:
//   boundary list:  boundary_beat[,level]
//   phrases style:  start,end[,level]   (one row per segment)
// Phrases rows convert to the sorted unique segment starts above beat 0 plus
// the final segment end. Rows without a level column default to mid.
inline std::vector<Annotation> parse_annotations(
    const std::string& text, const std::string& source,
    const std::vector<AnnotationPatch>& patches = {}) {
    std::istringstream in(text);
    std::string line;

    std::vector<std::string> header;
    while (std::getline(in, line)) {
        const std::string trimmed = detail::trim_copy(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        header = detail::split_csv_line(line);
        break;
    }
    if (header.empty())
        throw MissingColumn("annotations: no header row in " + source);

    int col_boundary = -1, col_start = -1, col_end = -1, col_level = -1;
    for (std::size_t i = 0; i < header.size(); ++i) {
        const std::string name = detail::lower(detail::trim_copy(header[i]));
        if (name == "boundary_beat") col_boundary = static_cast<int>(i);
        else if (name == "start") col_start = static_cast<int>(i);
        else if (name == "end") col_end = static_cast<int>(i);
        else if (name == "level") col_level = static_cast<int>(i);
    }
    const bool phrases = col_start >= 0 && col_end >= 0;
    if (!phrases && col_boundary < 0)
        throw MissingColumn("annotations: need either boundary_beat or "
                            "start/end columns in " + source);

    const std::string stem = path_stem(source);
    auto patched = [&](const std::string& column, double value) {
        for (const AnnotationPatch& p : patches)
            if (p.file == stem && p.column == column && p.match == value)
                return p.replace;
        return value;
    };

    std::map<Level, std::vector<double>> starts_by_level;
    std::map<Level, double> end_by_level;
    std::map<Level, std::vector<double>> boundaries_by_level;

    std::size_t row_number = 1;
    while (std::getline(in, line)) {
        ++row_number;
        const std::string trimmed = detail::trim_copy(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const std::vector<std::string> fields = detail::split_csv_line(line);
        auto field = [&](int col) -> std::string {
            if (col < 0 || static_cast<std::size_t>(col) >= fields.size()) return {};
            return detail::trim_copy(fields[static_cast<std::size_t>(col)]);
        };

        Level level = Level::Mid;
        if (col_level >= 0 && !field(col_level).empty())
            level = level_from_name(detail::lower(field(col_level)));

        auto beats_value = [&](int col, const char* what) {
            const auto r = parse_rational(field(col));
            if (!r)
                throw MalformedFile(std::string("annotations: bad ") + what +
                                    " at row " + std::to_string(row_number) +
                                    " of " + source);
            return static_cast<double>(r->num) / static_cast<double>(r->den);
        };

        if (phrases) {
            const double start = patched("start", beats_value(col_start, "start"));
            const double end = patched("end", beats_value(col_end, "end"));
            if (end <= start)
                throw MalformedFile("annotations: segment end <= start at row " +
                                    std::to_string(row_number) + " of " + source);
            starts_by_level[level].push_back(start);
            auto [it, inserted] = end_by_level.emplace(level, end);
            if (!inserted) it->second = std::max(it->second, end);
        } else {
            boundaries_by_level[level].push_back(
                beats_value(col_boundary, "boundary"));
        }
    }

    std::vector<Annotation> annotations;
    if (phrases) {
        for (auto& [level, starts] : starts_by_level) {
            std::vector<double> beats;
            for (double s : starts)
                if (s > 0.0) beats.push_back(s);
            beats.push_back(end_by_level.at(level));
            std::sort(beats.begin(), beats.end());
            beats.erase(std::unique(beats.begin(), beats.end()), beats.end());
            annotations.push_back(Annotation{source, level, std::move(beats)});
        }
    } else {
        for (auto& [level, beats] : boundaries_by_level) {
            std::sort(beats.begin(), beats.end());
            annotations.push_back(Annotation{source, level, std::move(beats)});
        }
    }
    return annotations;
}

} // namespace symseg

#endif // SYMSEG_EVALUATION_HPP
