// Method parameterization and segmentation results shared by the Norm,
// G-PELT and G-Window pipelines, plus their JSON form.
#ifndef SYMSEG_METHOD_TYPES_HPP
#define SYMSEG_METHOD_TYPES_HPP

#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "symseg/errors.hpp"
#include "symseg/note.hpp"

namespace symseg {

enum class Method { Norm, GPelt, GWindow, Baseline };

inline std::string method_name(Method method) {
    switch (method) {
    case Method::Norm: return "norm";
    case Method::GPelt: return "g-pelt";
    case Method::GWindow: return "g-window";
    case Method::Baseline: return "baseline";
    }
    return "unknown";
}

inline Method method_from_name(const std::string& name) {
    if (name == "norm") return Method::Norm;
    if (name == "g-pelt") return Method::GPelt;
    if (name == "g-window") return Method::GWindow;
    if (name == "baseline") return Method::Baseline;
    throw InvalidParams("unknown method '" + name + "'");
}

// Which Norm stage a consumer reads: the refined boundaries b' (default) or
// the stage-1 candidates b. Results always carry both.
enum class NormStage { Refined, Candidates };

struct NormParams {
    double alpha1 = 0.6;   // candidate window scale
    double tau1 = 1.0;     // candidate threshold, std devs above the mean
    int w2 = 2;            // second-stage peak window
    double tau2 = 0.5;     // second-stage threshold
    bool concat_span_features = false;   // ablation: concatenate instead of sum

    friend bool operator==(const NormParams&, const NormParams&) = default;
};

struct MethodParams {
    Method method = Method::GPelt;
    double alpha = 0.6;
    double beta = 0.15;                      // G-PELT only
    double penalty = 0.7;
    std::optional<NormParams> norm_params;   // Norm only
    NormStage norm_stage = NormStage::Refined;
    int baseline_k = 0;                      // Baseline only

    friend bool operator==(const MethodParams&, const MethodParams&) = default;
};

inline void validate_params(const MethodParams& params) {
    switch (params.method) {
    case Method::Norm: {
        if (!params.norm_params)
            throw InvalidParams("norm requires norm_params");
        const NormParams& np = *params.norm_params;
        if (!(np.alpha1 > 0.0)) throw InvalidParams("norm: alpha1 must be positive");
        if (np.w2 < 1) throw InvalidParams("norm: w2 must be >= 1");
        break;
    }
    case Method::GPelt:
        if (!(params.alpha > 0.0)) throw InvalidParams("g-pelt: alpha must be positive");
        if (!(params.beta > 0.0)) throw InvalidParams("g-pelt: beta must be positive");
        if (params.penalty < 0.0) throw InvalidParams("g-pelt: penalty must be non-negative");
        break;
    case Method::GWindow:
        if (!(params.alpha > 0.0)) throw InvalidParams("g-window: alpha must be positive");
        if (params.penalty < 0.0) throw InvalidParams("g-window: penalty must be non-negative");
        break;
    case Method::Baseline:
        if (params.baseline_k < 1) throw InvalidParams("baseline: k must be >= 1");
        break;
    }
}

struct Boundary {
    std::size_t note_index = 0;
    double beat = 0.0;
    double second = 0.0;

    friend bool operator==(const Boundary&, const Boundary&) = default;
};

struct Segmentation {
    std::vector<Boundary> boundaries;          // strictly increasing note_index
    MethodParams method_params;
    std::string piece_ref;
    bool includes_final = true;
    std::vector<Boundary> norm_candidates;     // Norm only: stage-1 boundaries
    TimingContext timing;                      // for bar-tolerance evaluation

    std::vector<double> boundary_beats() const {
        std::vector<double> beats;
        beats.reserve(boundaries.size());
        for (const Boundary& b : boundaries) beats.push_back(b.beat);
        return beats;
    }
};

inline Boundary boundary_at_note(const Piece& piece, std::size_t note_index) {
    const auto [beat, second] = note_time(piece, note_index);
    return Boundary{note_index, beat, second};
}

// The end-of-file boundary appended to every prediction. Uses the one-past-
// the-end note index so it sorts after any interior boundary.
inline Boundary final_boundary(const Piece& piece) {
    const double beat = piece_end_beats(piece);
    return Boundary{piece.notes.size(), beat, beats_to_seconds(beat, piece.timing)};
}

inline std::vector<Boundary> boundaries_from_notes(
    const Piece& piece, const std::vector<std::size_t>& note_indices,
    bool include_final = true) {
    std::vector<Boundary> out;
    out.reserve(note_indices.size() + 1);
    for (std::size_t idx : note_indices) out.push_back(boundary_at_note(piece, idx));
    if (include_final) out.push_back(final_boundary(piece));
    return out;
}

// ---------------------------------------------------------------------------
// JSON (stable key order, so identical runs serialize byte-identically)
// ---------------------------------------------------------------------------

using Json = nlohmann::ordered_json;

inline Json to_json(const Boundary& boundary) {
    return Json{{"note_index", boundary.note_index},
                {"beat", boundary.beat},
                {"second", boundary.second}};
}

inline Json params_to_json(const MethodParams& params) {
    Json json;
    switch (params.method) {
    case Method::Norm: {
        const NormParams np = params.norm_params.value_or(NormParams{});
        json["alpha1"] = np.alpha1;
        json["tau1"] = np.tau1;
        json["w2"] = np.w2;
        json["tau2"] = np.tau2;
        json["stage"] =
            params.norm_stage == NormStage::Refined ? "refined" : "candidates";
        if (np.concat_span_features) json["concat_span_features"] = true;
        break;
    }
    case Method::GPelt:
        json["alpha"] = params.alpha;
        json["beta"] = params.beta;
        json["penalty"] = params.penalty;
        break;
    case Method::GWindow:
        json["alpha"] = params.alpha;
        json["penalty"] = params.penalty;
        break;
    case Method::Baseline:
        json["k"] = params.baseline_k;
        break;
    }
    return json;
}

inline Json to_json(const Segmentation& seg) {
    Json json;
    json["source"] = seg.piece_ref;
    json["method"] = method_name(seg.method_params.method);
    json["params"] = params_to_json(seg.method_params);
    json["timing"] = Json{
        {"ticks_per_quarter", seg.timing.ticks_per_quarter},
        {"tempo_us_per_quarter", seg.timing.tempo_us_per_quarter},
        {"time_signature", std::to_string(seg.timing.time_signature.numerator) +
                               "/" +
                               std::to_string(seg.timing.time_signature.denominator)}};
    json["includes_final"] = seg.includes_final;
    Json boundaries = Json::array();
    for (const Boundary& b : seg.boundaries) boundaries.push_back(to_json(b));
    json["boundaries"] = std::move(boundaries);
    if (seg.method_params.method == Method::Norm) {
        Json candidates = Json::array();
        for (const Boundary& b : seg.norm_candidates) candidates.push_back(to_json(b));
        json["candidates"] = std::move(candidates);
    }
    return json;
}

inline Boundary boundary_from_json(const Json& json) {
    Boundary b;
    b.note_index = json.at("note_index").get<std::size_t>();
    b.beat = json.at("beat").get<double>();
    b.second = json.at("second").get<double>();
    return b;
}

inline Segmentation segmentation_from_json(const Json& json) {
    Segmentation seg;
    seg.piece_ref = json.at("source").get<std::string>();
    seg.method_params.method = method_from_name(json.at("method").get<std::string>());
    const Json& params = json.at("params");
    switch (seg.method_params.method) {
    case Method::Norm: {
        NormParams np;
        np.alpha1 = params.at("alpha1").get<double>();
        np.tau1 = params.at("tau1").get<double>();
        np.w2 = params.at("w2").get<int>();
        np.tau2 = params.at("tau2").get<double>();
        np.concat_span_features = params.value("concat_span_features", false);
        seg.method_params.norm_params = np;
        seg.method_params.norm_stage =
            params.value("stage", std::string("refined")) == "candidates"
                ? NormStage::Candidates
                : NormStage::Refined;
        break;
    }
    case Method::GPelt:
        seg.method_params.alpha = params.at("alpha").get<double>();
        seg.method_params.beta = params.at("beta").get<double>();
        seg.method_params.penalty = params.at("penalty").get<double>();
        break;
    case Method::GWindow:
        seg.method_params.alpha = params.at("alpha").get<double>();
        seg.method_params.penalty = params.at("penalty").get<double>();
        break;
    case Method::Baseline:
        seg.method_params.baseline_k = params.at("k").get<int>();
        break;
    }
    if (json.contains("timing")) {
        const Json& timing = json.at("timing");
        seg.timing.ticks_per_quarter = timing.value("ticks_per_quarter", 480);
        seg.timing.tempo_us_per_quarter =
            timing.value("tempo_us_per_quarter", std::int64_t{500000});
        detail::parse_time_signature(
            timing.value("time_signature", std::string("4/4")),
            &seg.timing.time_signature);
    }
    seg.includes_final = json.value("includes_final", true);
    for (const Json& b : json.at("boundaries"))
        seg.boundaries.push_back(boundary_from_json(b));
    if (json.contains("candidates"))
        for (const Json& b : json.at("candidates"))
            seg.norm_candidates.push_back(boundary_from_json(b));
    return seg;
}

} // namespace symseg

#endif // SYMSEG_METHOD_TYPES_HPP
