// Parameter-grid ablation runner: evaluates one method over the Cartesian
// product of parameter values, at one or more tolerances, with
// content-addressed caching of per-file segmentations.
#ifndef SYMSEG_SWEEP_HPP
#define SYMSEG_SWEEP_HPP

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "symseg/evaluation.hpp"
#include "symseg/method_types.hpp"
#include "symseg/pipeline.hpp"

namespace symseg {

namespace detail {

inline std::uint64_t fnv1a64(std::string_view text) {
    std::uint64_t hash = 1469598103934665603ull;
    for (unsigned char c : text) {
        hash ^= c;
        hash *= 1099511628211ull;
    }
    return hash;
}

inline std::string format_double(double v) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", v);
    return buffer;
}

} // namespace detail

struct SweepPlan {
    Method method = Method::GPelt;
    // Parameter name -> values to sweep. Recognized names: alpha, beta,
    // penalty (G-PELT / G-Window) and alpha1, tau1, w2, tau2 (Norm).
    std::map<std::string, std::vector<double>> grid;
    std::vector<ToleranceKind> tolerances{ToleranceKind::OneBeat,
                                          ToleranceKind::OneBar};
    MethodParams fixed;         // base values for parameters not in the grid
    Level level = Level::Mid;   // which annotation level to score against
    std::string cache_dir;      // empty disables the on-disk cache
    PipelineConfig pipeline{};
};

struct SweepRow {
    std::map<std::string, double> params;
    ToleranceKind tolerance = ToleranceKind::OneBeat;
    Aggregate aggregate;
    std::size_t files_evaluated = 0;
};

struct SweepTable {
    std::vector<SweepRow> rows;
    std::vector<std::string> failures;   // "combo | file: error"
};

namespace detail {

inline void apply_param(MethodParams& params, const std::string& name,
                        double value) {
    if (name == "alpha") params.alpha = value;
    else if (name == "beta") params.beta = value;
    else if (name == "penalty") params.penalty = value;
    else if (name == "alpha1" || name == "tau1" || name == "w2" || name == "tau2") {
        if (!params.norm_params) params.norm_params = NormParams{};
        NormParams& np = *params.norm_params;
        if (name == "alpha1") np.alpha1 = value;
        else if (name == "tau1") np.tau1 = value;
        else if (name == "w2") np.w2 = static_cast<int>(std::lround(value));
        else np.tau2 = value;
    } else {
        throw InvalidParams("sweep: unknown parameter '" + name + "'");
    }
}

inline std::string combo_label(const std::map<std::string, double>& combo) {
    std::string label;
    for (const auto& [name, value] : combo) {
        if (!label.empty()) label += ";";
        label += name + "=" + format_double(value);
    }
    return label;
}

inline std::string cache_key(std::uint64_t content_hash, Method method,
                             const MethodParams& params) {
    std::ostringstream key;
    key << std::hex << content_hash << "|" << method_name(method) << "|"
        << params_to_json(params).dump();
    char buffer[17];
    std::snprintf(buffer, sizeof buffer, "%016llx",
                  static_cast<unsigned long long>(fnv1a64(key.str())));
    return buffer;
}

} // namespace detail

// Content hash of a piece for cache addressing; the canonical CSV form makes
// it independent of the source container.
inline std::uint64_t piece_content_hash(const Piece& piece) {
    return detail::fnv1a64(write_note_csv(piece));
}

// Runs the full Cartesian grid. Rows come out sorted lexicographically by
// parameter values (names alphabetical, values ascending), one row per
// (combination, tolerance). A file that fails to segment is recorded in
// `failures` and excluded from that combination's aggregate; the sweep never
// aborts on per-file errors.
inline SweepTable run_sweep(const SweepPlan& plan,
                            const std::vector<Piece>& corpus,
                            const std::vector<Annotation>& annotations) {
    if (plan.grid.empty()) throw InvalidParams("sweep: empty grid");
    if (corpus.empty()) throw InvalidParams("sweep: empty corpus");

    std::vector<std::string> names;
    std::vector<std::vector<double>> values;
    for (const auto& [name, list] : plan.grid) {
        if (list.empty())
            throw InvalidParams("sweep: empty value list for '" + name + "'");
        names.push_back(name);
        values.push_back(list);
        std::sort(values.back().begin(), values.back().end());
    }

    std::vector<std::uint64_t> hashes;
    hashes.reserve(corpus.size());
    for (const Piece& piece : corpus) hashes.push_back(piece_content_hash(piece));

    std::map<std::string, Segmentation> memory_cache;
    const bool disk_cache = !plan.cache_dir.empty();
    if (disk_cache) std::filesystem::create_directories(plan.cache_dir);

    // The cache is addressed by note content, so two identical files share
    // one entry; the returned value is re-labeled with the caller's path.
    auto segment_cached = [&](const Piece& piece, std::uint64_t hash,
                              const MethodParams& params) -> Segmentation {
        const std::string key =
            detail::cache_key(hash, plan.method, params);
        auto relabel = [&](Segmentation seg) {
            seg.piece_ref = piece.source_path;
            return seg;
        };
        if (auto it = memory_cache.find(key); it != memory_cache.end())
            return relabel(it->second);
        if (disk_cache) {
            const std::filesystem::path path =
                std::filesystem::path(plan.cache_dir) / (key + ".json");
            std::ifstream in(path);
            if (in) {
                Json json;
                in >> json;
                Segmentation seg = segmentation_from_json(json);
                memory_cache.emplace(key, seg);
                return relabel(std::move(seg));
            }
        }
        Segmentation seg = run_method(piece, params, plan.pipeline);
        memory_cache.emplace(key, seg);
        if (disk_cache) {
            const std::filesystem::path path =
                std::filesystem::path(plan.cache_dir) / (key + ".json");
            std::ofstream out(path);
            out << to_json(seg).dump(2) << "\n";
        }
        return relabel(std::move(seg));
    };

    SweepTable table;
    std::vector<std::size_t> cursor(names.size(), 0);
    while (true) {
        std::map<std::string, double> combo;
        MethodParams params = plan.fixed;
        params.method = plan.method;
        for (std::size_t k = 0; k < names.size(); ++k) {
            combo[names[k]] = values[k][cursor[k]];
            detail::apply_param(params, names[k], values[k][cursor[k]]);
        }
        validate_params(params);   // reject bad grid values at the plan level

        std::vector<Segmentation> estimates;
        std::vector<Annotation> paired;
        for (std::size_t f = 0; f < corpus.size(); ++f) {
            try {
                estimates.push_back(segment_cached(corpus[f], hashes[f], params));
            } catch (const Error& e) {
                table.failures.push_back(detail::combo_label(combo) + " | " +
                                         corpus[f].source_path + ": " + e.what());
                continue;
            }
            const std::string stem = path_stem(corpus[f].source_path);
            bool found = false;
            for (const Annotation& a : annotations) {
                if (a.level == plan.level && path_stem(a.source) == stem) {
                    paired.push_back(a);
                    found = true;
                    break;
                }
            }
            if (!found) {
                estimates.pop_back();
                table.failures.push_back(detail::combo_label(combo) + " | " +
                                         corpus[f].source_path +
                                         ": no annotation");
            }
        }

        for (ToleranceKind kind : plan.tolerances) {
            SweepRow row;
            row.params = combo;
            row.tolerance = kind;
            if (!estimates.empty()) {
                const EvalReport report = evaluate_corpus(paired, estimates, kind);
                row.aggregate = report.aggregate;
                row.files_evaluated = report.aggregate.files;
            }
            table.rows.push_back(std::move(row));
        }

        std::size_t k = names.size();
        while (k > 0) {
            --k;
            if (++cursor[k] < values[k].size()) break;
            cursor[k] = 0;
            if (k == 0) return table;
        }
    }
}

// Row with the best mean F1 at the given tolerance. Ties resolve toward the
// smaller alpha (alpha1 for Norm), then beta, then penalty, then the
// remaining parameters in name order.
inline const SweepRow& best_params(const SweepTable& table, ToleranceKind kind) {
    const SweepRow* best = nullptr;
    auto tie_key = [](const SweepRow& row) {
        std::vector<double> key;
        for (const char* name : {"alpha", "alpha1", "beta", "penalty"}) {
            const auto it = row.params.find(name);
            if (it != row.params.end()) key.push_back(it->second);
        }
        for (const auto& [name, value] : row.params) {
            if (name != "alpha" && name != "alpha1" && name != "beta" &&
                name != "penalty")
                key.push_back(value);
        }
        return key;
    };
    for (const SweepRow& row : table.rows) {
        if (row.tolerance != kind) continue;
        if (!best || row.aggregate.f1_mean > best->aggregate.f1_mean ||
            (row.aggregate.f1_mean == best->aggregate.f1_mean &&
             tie_key(row) < tie_key(*best)))
            best = &row;
    }
    if (!best) throw EmptyTable("best_params: no rows at this tolerance");
    return *best;
}

// CSV form: one line per row, parameter columns in name order.
inline std::string sweep_table_to_csv(const SweepTable& table) {
    std::ostringstream out;
    if (table.rows.empty()) return "";
    for (const auto& entry : table.rows.front().params) out << entry.first << ",";
    out << "tolerance,P_mean,P_std,R_mean,R_std,F1_mean,F1_std,files\n";
    out.precision(6);
    out.setf(std::ios::fixed);
    for (const SweepRow& row : table.rows) {
        for (const auto& entry : row.params) out << entry.second << ",";
        out << tolerance_name(row.tolerance) << "," << row.aggregate.precision_mean
            << "," << row.aggregate.precision_std << ","
            << row.aggregate.recall_mean << "," << row.aggregate.recall_std << ","
            << row.aggregate.f1_mean << "," << row.aggregate.f1_std << ","
            << row.files_evaluated << "\n";
    }
    return out.str();
}

} // namespace symseg

#endif // SYMSEG_SWEEP_HPP
