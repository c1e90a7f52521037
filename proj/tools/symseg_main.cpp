// symseg command line: segment symbolic music files, score segmentations
// against annotations, generate equidistant baselines, run parameter sweeps
// and export plot data.
#include <algorithm>
#include <atomic>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "symseg/symseg.hpp"

namespace fs = std::filesystem;
using symseg::Json;

namespace {

struct CommonOptions {
    std::string config_path;
    int ticks_per_quarter = 480;
    std::size_t capacity = 50000;
    int jobs = 1;
};

std::size_t capacity_from_env() {
    if (const char* env = std::getenv("SYMSEG_CAPACITY")) {
        const long long v = std::atoll(env);
        if (v > 0) return static_cast<std::size_t>(v);
    }
    return 50000;
}

// Flat key=value config file; every key must be a known option of the
// subcommand and command-line flags win over config values.
std::map<std::string, std::string> load_config(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw symseg::InvalidParams("cannot open config file " + path);
    std::map<std::string, std::string> config;
    std::string line;
    while (std::getline(in, line)) {
        const std::string trimmed = symseg::detail::trim_copy(line);
        if (trimmed.empty() || trimmed[0] == '#') continue;
        const auto eq = trimmed.find('=');
        if (eq == std::string::npos)
            throw symseg::InvalidParams("config: expected key=value, got '" +
                                        trimmed + "'");
        config[symseg::detail::trim_copy(trimmed.substr(0, eq))] =
            symseg::detail::trim_copy(trimmed.substr(eq + 1));
    }
    return config;
}

void apply_config(CLI::App* cmd, const std::string& path) {
    if (path.empty()) return;
    for (const auto& [key, value] : load_config(path)) {
        CLI::Option* option = cmd->get_option_no_throw("--" + key);
        if (!option)
            throw symseg::InvalidParams("config: unknown key '" + key + "'");
        if (option->count() > 0) continue;   // flag overrides config
        option->add_result(value);
        option->run_callback();
    }
}

std::vector<std::string> collect_inputs(const std::vector<std::string>& paths) {
    std::vector<std::string> files;
    for (const std::string& path : paths) {
        if (fs::is_directory(path)) {
            for (const auto& entry : fs::recursive_directory_iterator(path)) {
                if (!entry.is_regular_file()) continue;
                std::string ext = entry.path().extension().string();
                std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
                if (ext == ".mid" || ext == ".midi" || ext == ".csv")
                    files.push_back(entry.path().string());
            }
        } else {
            files.push_back(path);
        }
    }
    std::sort(files.begin(), files.end());
    return files;
}

symseg::Piece load_piece(const std::string& path, int ticks_per_quarter) {
    std::string ext = fs::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".mid" || ext == ".midi") return symseg::parse_midi_file(path);
    if (ext == ".csv") {
        std::ifstream in(path);
        if (!in) throw symseg::MalformedFile("cannot open " + path);
        std::stringstream buffer;
        buffer << in.rdbuf();
        return symseg::parse_note_csv(buffer.str(),
                                      symseg::CsvOptions{ticks_per_quarter}, path);
    }
    throw symseg::UnsupportedFormat("unrecognized input extension: " + path);
}

void write_text(const std::string& path, const std::string& text) {
    if (const fs::path parent = fs::path(path).parent_path(); !parent.empty())
        fs::create_directories(parent);
    std::ofstream out(path, std::ios::binary);
    if (!out) throw symseg::Error("cannot write " + path);
    out << text;
}

// Reference parameter sets per corpus and structure level.
void apply_preset(const std::string& preset, symseg::MethodParams& params) {
    if (preset.empty()) return;
    if (preset == "swd-mid") {
        params.method = symseg::Method::GPelt;
        params.alpha = 0.6;
        params.beta = 0.15;
        params.penalty = 0.7;
    } else if (preset == "bps-high") {
        params.method = symseg::Method::GPelt;
        params.alpha = 2.3;
        params.beta = 1.5;
        params.penalty = 4.0;
    } else if (preset == "bps-mid") {
        params.method = symseg::Method::GPelt;
        params.alpha = 1.0;
        params.beta = 0.01;
        params.penalty = 0.5;
    } else if (preset == "bps-low") {
        params.method = symseg::Method::GPelt;
        params.alpha = 0.1;
        params.beta = 0.15;
        params.penalty = 0.1;
    } else {
        throw symseg::InvalidParams("unknown preset '" + preset + "'");
    }
}

// Runs `work(i)` over [0, n) with the requested number of worker threads.
// Output slots are preallocated by the caller, so results are deterministic.
void parallel_for(std::size_t n, int jobs, const std::function<void(std::size_t)>& work) {
    if (jobs <= 1) {
        for (std::size_t i = 0; i < n; ++i) work(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> workers;
    const int count = std::min<std::size_t>(jobs, n);
    for (int t = 0; t < count; ++t) {
        workers.emplace_back([&] {
            for (std::size_t i = next.fetch_add(1); i < n; i = next.fetch_add(1))
                work(i);
        });
    }
    for (auto& w : workers) w.join();
}

struct MethodOptions {
    std::string method = "g-pelt";
    std::string preset;
    double alpha = 0.6;
    double beta = 0.15;
    double penalty = 0.7;
    double alpha1 = 0.6;
    double tau1 = 1.0;
    int w2 = 2;
    double tau2 = 0.5;
    std::string norm_stage = "refined";
};

void add_method_flags(CLI::App* cmd, MethodOptions& options) {
    cmd->add_option("--method", options.method,
                    "Segmentation method: norm, g-pelt or g-window")
        ->capture_default_str();
    cmd->add_option("--preset", options.preset,
                    "Parameter preset: swd-mid, bps-high, bps-mid, bps-low");
    cmd->add_option("--alpha", options.alpha, "Window scale (G-PELT/G-Window)")
        ->capture_default_str();
    cmd->add_option("--beta", options.beta, "Jump scale (G-PELT)")
        ->capture_default_str();
    cmd->add_option("--penalty", options.penalty, "Changepoint penalty")
        ->capture_default_str();
    cmd->add_option("--alpha1", options.alpha1, "Norm candidate window scale")
        ->capture_default_str();
    cmd->add_option("--tau1", options.tau1, "Norm candidate threshold")
        ->capture_default_str();
    cmd->add_option("--w2", options.w2, "Norm refinement window")
        ->capture_default_str();
    cmd->add_option("--tau2", options.tau2, "Norm refinement threshold")
        ->capture_default_str();
    cmd->add_option("--norm-stage", options.norm_stage,
                    "Which Norm boundaries to report: refined or candidates")
        ->capture_default_str();
}

symseg::MethodParams build_params(const MethodOptions& options, CLI::App* cmd) {
    symseg::MethodParams params;
    apply_preset(options.preset, params);
    params.method = symseg::method_from_name(options.method);
    if (cmd->count("--alpha")) params.alpha = options.alpha;
    else if (options.preset.empty()) params.alpha = options.alpha;
    if (cmd->count("--beta")) params.beta = options.beta;
    else if (options.preset.empty()) params.beta = options.beta;
    if (cmd->count("--penalty")) params.penalty = options.penalty;
    else if (options.preset.empty()) params.penalty = options.penalty;
    if (params.method == symseg::Method::Norm) {
        symseg::NormParams np;
        np.alpha1 = options.alpha1;
        np.tau1 = options.tau1;
        np.w2 = options.w2;
        np.tau2 = options.tau2;
        params.norm_params = np;
        params.norm_stage = options.norm_stage == "candidates"
                                ? symseg::NormStage::Candidates
                                : symseg::NormStage::Refined;
    }
    return params;
}

std::vector<symseg::Annotation> load_annotations_path(
    const std::string& path, const std::vector<symseg::AnnotationPatch>& patches) {
    std::ifstream in(path);
    if (!in) throw symseg::MalformedFile("cannot open " + path);
    std::stringstream buffer;
    buffer << in.rdbuf();
    std::string ext = fs::path(path).extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".json") {
        const Json json = Json::parse(buffer.str());
        std::vector<symseg::Annotation> annotations;
        auto one = [&](const Json& j) {
            symseg::Annotation a;
            a.source = path;
            a.level = symseg::level_from_name(j.value("level", std::string("mid")));
            a.boundaries_beats = j.at("boundaries_beats").get<std::vector<double>>();
            std::sort(a.boundaries_beats.begin(), a.boundaries_beats.end());
            annotations.push_back(std::move(a));
        };
        if (json.is_array())
            for (const Json& j : json) one(j);
        else
            one(json);
        return annotations;
    }
    return symseg::parse_annotations(buffer.str(), path, patches);
}

std::vector<symseg::AnnotationPatch> load_patches(const std::string& path) {
    if (path.empty()) return {};
    std::ifstream in(path);
    if (!in) throw symseg::MalformedFile("cannot open patch file " + path);
    Json json;
    in >> json;
    std::vector<symseg::AnnotationPatch> patches;
    for (const Json& j : json) {
        symseg::AnnotationPatch p;
        p.file = j.at("file").get<std::string>();
        p.column = j.at("column").get<std::string>();
        p.match = j.at("match").get<double>();
        p.replace = j.at("replace").get<double>();
        patches.push_back(std::move(p));
    }
    return patches;
}

Json report_to_json(const symseg::EvalReport& report) {
    Json json;
    json["tolerance_kind"] = report.tolerance_kind;
    if (std::isnan(report.tolerance_beats))
        json["tolerance_beats"] = nullptr;   // varies per file (bar tolerance)
    else
        json["tolerance_beats"] = report.tolerance_beats;
    Json per_file = Json::array();
    for (const symseg::FileScore& f : report.per_file) {
        Json row;
        row["file"] = f.file;
        row["P"] = f.precision;
        row["R"] = f.recall;
        row["F1"] = f.f1;
        row["n_ref"] = f.n_reference;
        row["n_est"] = f.n_estimate;
        row["tolerance_beats"] = f.tolerance_beats;
        if (f.empty_reference) row["empty_reference"] = true;
        if (f.empty_estimate) row["empty_estimate"] = true;
        per_file.push_back(std::move(row));
    }
    json["per_file"] = std::move(per_file);
    json["aggregate"] = Json{{"P_mean", report.aggregate.precision_mean},
                             {"P_std", report.aggregate.precision_std},
                             {"R_mean", report.aggregate.recall_mean},
                             {"R_std", report.aggregate.recall_std},
                             {"F1_mean", report.aggregate.f1_mean},
                             {"F1_std", report.aggregate.f1_std},
                             {"files", report.aggregate.files}};
    return json;
}

std::string report_to_csv(const symseg::EvalReport& report) {
    std::ostringstream out;
    out << "file,P,R,F1\n";
    out.precision(6);
    out.setf(std::ios::fixed);
    for (const symseg::FileScore& f : report.per_file)
        out << f.file << "," << f.precision << "," << f.recall << "," << f.f1
            << "\n";
    return out.str();
}

// ---------------------------------------------------------------------------
// Subcommands
// ---------------------------------------------------------------------------

int run_segment(const std::vector<std::string>& inputs,
                const symseg::MethodParams& params, const CommonOptions& common,
                const std::string& out_dir) {
    const std::vector<std::string> files = collect_inputs(inputs);
    if (files.empty()) {
        std::cerr << "segment: no input files\n";
        return 1;
    }
    symseg::PipelineConfig config{common.capacity};
    std::vector<std::string> errors(files.size());
    std::vector<int> ok(files.size(), 0);

    parallel_for(files.size(), common.jobs, [&](std::size_t i) {
        try {
            const symseg::Piece piece =
                load_piece(files[i], common.ticks_per_quarter);
            const symseg::Segmentation seg =
                symseg::run_method(piece, params, config);
            const std::string out_path =
                (fs::path(out_dir) / (symseg::path_stem(files[i]) + ".json"))
                    .string();
            write_text(out_path, symseg::to_json(seg).dump(2) + "\n");
            ok[i] = 1;
        } catch (const std::exception& e) {
            errors[i] = e.what();
        }
    });

    int succeeded = 0;
    for (std::size_t i = 0; i < files.size(); ++i) {
        if (ok[i]) ++succeeded;
        else std::cerr << "segment: " << files[i] << ": " << errors[i] << "\n";
    }
    if (succeeded == 0) return 1;
    return succeeded == static_cast<int>(files.size()) ? 0 : 2;
}

int run_evaluate(const std::string& estimates_dir,
                 const std::string& annotations_dir,
                 const std::string& tolerance, const std::string& level_name,
                 const std::string& out_prefix, const std::string& patch_path) {
    const symseg::ToleranceKind kind = tolerance == "one-bar"
                                           ? symseg::ToleranceKind::OneBar
                                           : symseg::ToleranceKind::OneBeat;
    const symseg::Level level = symseg::level_from_name(level_name);
    const auto patches = load_patches(patch_path);

    std::map<std::string, symseg::Segmentation> estimates;
    if (fs::is_directory(estimates_dir)) {
        for (const auto& entry : fs::directory_iterator(estimates_dir)) {
            if (entry.path().extension() != ".json") continue;
            std::ifstream in(entry.path());
            Json json;
            in >> json;
            symseg::Segmentation seg = symseg::segmentation_from_json(json);
            estimates.emplace(symseg::path_stem(seg.piece_ref), std::move(seg));
        }
    }
    if (estimates.empty()) {
        std::cerr << "evaluate: no estimates in " << estimates_dir << "\n";
        return 1;
    }

    std::map<std::string, symseg::Annotation> annotations;
    if (fs::is_directory(annotations_dir)) {
        for (const auto& entry : fs::directory_iterator(annotations_dir)) {
            const std::string ext = entry.path().extension().string();
            if (ext != ".csv" && ext != ".json") continue;
            for (symseg::Annotation& a :
                 load_annotations_path(entry.path().string(), patches)) {
                if (a.level != level) continue;
                annotations.emplace(symseg::path_stem(a.source), std::move(a));
            }
        }
    }
    if (annotations.empty()) {
        std::cerr << "evaluate: no annotations in " << annotations_dir << "\n";
        return 1;
    }

    // pair by stem; report leftovers and score the intersection
    std::vector<symseg::Annotation> paired_annotations;
    std::vector<symseg::Segmentation> paired_estimates;
    int unpaired = 0;
    for (const auto& [stem, seg] : estimates) {
        const auto it = annotations.find(stem);
        if (it == annotations.end()) {
            std::cerr << "evaluate: no annotation for " << stem << "\n";
            ++unpaired;
            continue;
        }
        paired_estimates.push_back(seg);
        paired_annotations.push_back(it->second);
    }
    for (const auto& [stem, annotation] : annotations) {
        if (!estimates.count(stem)) {
            std::cerr << "evaluate: no estimate for " << stem << "\n";
            ++unpaired;
        }
    }
    if (paired_estimates.empty()) {
        std::cerr << "evaluate: nothing to score\n";
        return 1;
    }

    const symseg::EvalReport report =
        symseg::evaluate_corpus(paired_annotations, paired_estimates, kind);

    std::ostringstream summary;
    summary.precision(4);
    summary.setf(std::ios::fixed);
    summary << "P=" << report.aggregate.precision_mean
            << " R=" << report.aggregate.recall_mean
            << " F1=" << report.aggregate.f1_mean;
    std::cout << summary.str() << "\n";

    if (!out_prefix.empty()) {
        write_text(out_prefix + ".json", report_to_json(report).dump(2) + "\n");
        write_text(out_prefix + ".csv", report_to_csv(report));
    }
    return unpaired > 0 ? 2 : 0;
}

int run_baseline(const std::vector<std::string>& inputs, int k,
                 const CommonOptions& common, const std::string& out_dir) {
    const std::vector<std::string> files = collect_inputs(inputs);
    if (files.empty()) {
        std::cerr << "baseline: no input files\n";
        return 1;
    }
    int failed = 0;
    for (const std::string& file : files) {
        try {
            const symseg::Piece piece = load_piece(file, common.ticks_per_quarter);
            const symseg::Segmentation seg = symseg::baseline_segmentation(piece, k);
            const std::string out_path =
                (fs::path(out_dir) / (symseg::path_stem(file) + ".json")).string();
            write_text(out_path, symseg::to_json(seg).dump(2) + "\n");
        } catch (const std::exception& e) {
            std::cerr << "baseline: " << file << ": " << e.what() << "\n";
            ++failed;
        }
    }
    if (failed == static_cast<int>(files.size())) return 1;
    return failed > 0 ? 2 : 0;
}

std::vector<double> parse_value_list(const std::string& text) {
    std::vector<double> values;
    std::istringstream in(text);
    std::string token;
    while (std::getline(in, token, ',')) {
        if (token.empty()) continue;
        values.push_back(std::stod(token));
    }
    return values;
}

int run_sweep_cmd(const std::string& corpus_dir,
                  const std::string& annotations_dir,
                  const MethodOptions& method_options,
                  const std::map<std::string, std::string>& grid_flags,
                  const std::string& level_name, const std::string& cache_dir,
                  const CommonOptions& common, const std::string& out_prefix,
                  const std::string& patch_path, const std::string& best_at) {
    symseg::SweepPlan plan;
    plan.method = symseg::method_from_name(method_options.method);
    plan.level = symseg::level_from_name(level_name);
    plan.cache_dir = cache_dir;
    plan.pipeline.capacity_limit = common.capacity;

    plan.fixed.method = plan.method;
    apply_preset(method_options.preset, plan.fixed);
    if (plan.method == symseg::Method::Norm) {
        symseg::NormParams np;
        np.alpha1 = method_options.alpha1;
        np.tau1 = method_options.tau1;
        np.w2 = method_options.w2;
        np.tau2 = method_options.tau2;
        plan.fixed.norm_params = np;
    } else {
        plan.fixed.alpha = method_options.alpha;
        plan.fixed.beta = method_options.beta;
        plan.fixed.penalty = method_options.penalty;
    }

    for (const auto& [name, list_text] : grid_flags) {
        if (list_text.empty()) continue;
        plan.grid[name] = parse_value_list(list_text);
    }
    if (plan.grid.empty()) {
        std::cerr << "sweep: no parameter grid given\n";
        return 1;
    }

    const auto patches = load_patches(patch_path);
    std::vector<symseg::Piece> corpus;
    for (const std::string& file : collect_inputs({corpus_dir})) {
        try {
            corpus.push_back(load_piece(file, common.ticks_per_quarter));
        } catch (const std::exception& e) {
            std::cerr << "sweep: skipping " << file << ": " << e.what() << "\n";
        }
    }
    std::vector<symseg::Annotation> annotations;
    for (const auto& entry : fs::directory_iterator(annotations_dir)) {
        const std::string ext = entry.path().extension().string();
        if (ext != ".csv" && ext != ".json") continue;
        for (symseg::Annotation& a :
             load_annotations_path(entry.path().string(), patches))
            annotations.push_back(std::move(a));
    }

    const symseg::SweepTable table = symseg::run_sweep(plan, corpus, annotations);
    const std::string csv = symseg::sweep_table_to_csv(table);
    if (!out_prefix.empty()) {
        write_text(out_prefix + ".csv", csv);
        Json rows = Json::array();
        for (const symseg::SweepRow& row : table.rows) {
            Json j;
            j["params"] = row.params;
            j["tolerance"] = symseg::tolerance_name(row.tolerance);
            j["P_mean"] = row.aggregate.precision_mean;
            j["R_mean"] = row.aggregate.recall_mean;
            j["F1_mean"] = row.aggregate.f1_mean;
            j["F1_std"] = row.aggregate.f1_std;
            j["files"] = row.files_evaluated;
            rows.push_back(std::move(j));
        }
        Json json;
        json["rows"] = std::move(rows);
        json["failures"] = table.failures;
        write_text(out_prefix + ".json", json.dump(2) + "\n");
    } else {
        std::cout << csv;
    }
    for (const std::string& failure : table.failures)
        std::cerr << "sweep: " << failure << "\n";

    const symseg::ToleranceKind best_kind = best_at == "one-bar"
                                                ? symseg::ToleranceKind::OneBar
                                                : symseg::ToleranceKind::OneBeat;
    const symseg::SweepRow& best = symseg::best_params(table, best_kind);
    std::ostringstream line;
    line.precision(4);
    line.setf(std::ios::fixed);
    line << "best[" << symseg::tolerance_name(best_kind) << "]:";
    for (const auto& [name, value] : best.params)
        line << " " << name << "=" << value;
    line << " F1=" << best.aggregate.f1_mean;
    std::cout << line.str() << "\n";
    return 0;
}

int run_plotdata(const std::string& input, const std::string& what,
                 const symseg::MethodParams& params, const CommonOptions& common,
                 const std::string& out_path) {
    const symseg::Piece piece = load_piece(input, common.ticks_per_quarter);
    symseg::PipelineConfig config{common.capacity};
    std::ostringstream out;
    out.precision(17);

    if (what == "novelty" || what == "adjacency") {
        symseg::AdjacencyConfig adjacency_config;
        adjacency_config.capacity_limit = common.capacity;
        const symseg::AdjacencyMatrix matrix =
            symseg::adjacency(symseg::build_graph(piece), adjacency_config);
        if (what == "adjacency") {
            out << symseg::matrix_to_csv(matrix);
        } else {
            const symseg::NoveltySignal curve = symseg::novelty(matrix);
            std::vector<char> is_boundary(curve.values.size(), 0);
            symseg::MethodParams run = params;
            if (run.method == symseg::Method::Norm)
                run.method = symseg::Method::GPelt;
            const symseg::Segmentation seg = symseg::run_method(piece, run, config);
            for (const symseg::Boundary& b : seg.boundaries)
                if (b.note_index >= 1 && b.note_index - 1 < curve.values.size())
                    is_boundary[b.note_index - 1] = 1;
            out << "index,novelty,is_boundary\n";
            for (std::size_t i = 0; i < curve.values.size(); ++i)
                out << i << "," << curve.values[i] << ","
                    << static_cast<int>(is_boundary[i]) << "\n";
        }
    } else if (what == "xhat" || what == "ssm" || what == "ssm-novelty") {
        const std::vector<double> x = symseg::ioi(piece);
        const std::vector<int> l = symseg::local_direction(piece);
        std::vector<double> combined(x.size());
        for (std::size_t i = 0; i < x.size(); ++i) combined[i] = x[i] + l[i];
        const std::vector<double> normalized = symseg::zscore(combined);
        const symseg::NormParams np = params.norm_params.value_or(symseg::NormParams{});
        const int w1 = symseg::candidate_window(np.alpha1, piece.notes.size());
        const std::vector<int> peaks = symseg::peak_pick(normalized, w1, np.tau1);
        if (what == "xhat") {
            std::vector<char> is_candidate(normalized.size(), 0);
            for (int p : peaks) is_candidate[p] = 1;
            out << "index,xhat,is_candidate\n";
            for (std::size_t i = 0; i < normalized.size(); ++i)
                out << i << "," << normalized[i] << ","
                    << static_cast<int>(is_candidate[i]) << "\n";
        } else {
            symseg::Candidates candidates;
            for (int p : peaks)
                candidates.indices.push_back(static_cast<std::size_t>(p) + 1);
            if (candidates.indices.empty()) {
                std::cerr << "plotdata: no candidates, SSM is empty\n";
                return 1;
            }
            const symseg::SegmentSsm ssm = symseg::segment_ssm(piece, candidates);
            if (what == "ssm") {
                out << symseg::matrix_to_csv(ssm.matrix);
            } else {
                const symseg::NoveltySignal curve = symseg::novelty(ssm.matrix);
                const std::vector<int> refined =
                    symseg::peak_pick(curve.values, np.w2, np.tau2);
                std::vector<char> is_boundary(curve.values.size(), 0);
                for (int q : refined) is_boundary[q] = 1;
                out << "index,novelty,is_boundary\n";
                for (std::size_t i = 0; i < curve.values.size(); ++i)
                    out << i << "," << curve.values[i] << ","
                        << static_cast<int>(is_boundary[i]) << "\n";
            }
        }
    } else {
        std::cerr << "plotdata: unknown --what '" << what << "'\n";
        return 1;
    }

    if (out_path.empty()) std::cout << out.str();
    else write_text(out_path, out.str());
    return 0;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{"Structural segmentation of symbolic music via note graphs "
                 "and changepoint detection"};
    app.require_subcommand(1);

    CommonOptions common;
    common.capacity = capacity_from_env();

    MethodOptions method_options;
    std::vector<std::string> inputs;
    std::string out_dir = ".";
    std::string out_prefix;
    std::string estimates_dir, annotations_dir;
    std::string tolerance = "one-beat";
    std::string level = "mid";
    std::string patch_path;
    std::string cache_dir;
    std::string what = "novelty";
    std::string best_at = "one-beat";
    std::string corpus_dir;
    int baseline_k = 5;
    std::map<std::string, std::string> grid_flags;

    auto add_common = [&](CLI::App* cmd) {
        cmd->add_option("--config", common.config_path,
                        "Flat key=value config file (flags override)");
        cmd->add_option("--ticks-per-quarter", common.ticks_per_quarter,
                        "Tick resolution for CSV input")
            ->capture_default_str();
        cmd->add_option("--capacity", common.capacity,
                        "Note-count limit guarding quadratic allocations "
                        "(env SYMSEG_CAPACITY)")
            ->capture_default_str();
        cmd->add_option("--jobs", common.jobs, "Worker threads over files")
            ->capture_default_str();
    };

    CLI::App* segment = app.add_subcommand("segment", "Segment files into JSON");
    segment->add_option("inputs", inputs, "Input files or directories")->required();
    add_method_flags(segment, method_options);
    segment->add_option("--out", out_dir, "Output directory")->capture_default_str();
    add_common(segment);

    CLI::App* evaluate = app.add_subcommand("evaluate", "Score estimates");
    evaluate->add_option("--estimates", estimates_dir, "Directory of Segmentation JSON")
        ->required();
    evaluate->add_option("--annotations", annotations_dir, "Directory of annotations")
        ->required();
    evaluate->add_option("--tolerance", tolerance, "one-beat or one-bar")
        ->capture_default_str();
    evaluate->add_option("--level", level, "Annotation level: low, mid or high")
        ->capture_default_str();
    evaluate->add_option("--out", out_prefix, "Report path prefix (.json/.csv)");
    evaluate->add_option("--patch", patch_path, "Annotation patch file (JSON)");
    add_common(evaluate);

    CLI::App* baseline = app.add_subcommand("baseline", "Equidistant baselines");
    baseline->add_option("inputs", inputs, "Input files or directories")->required();
    baseline->add_option("--k", baseline_k, "Boundaries per file")
        ->capture_default_str();
    baseline->add_option("--out", out_dir, "Output directory")->capture_default_str();
    add_common(baseline);

    CLI::App* sweep = app.add_subcommand("sweep", "Parameter grid ablation");
    sweep->add_option("--corpus", corpus_dir, "Directory of pieces")->required();
    sweep->add_option("--annotations", annotations_dir, "Directory of annotations")
        ->required();
    add_method_flags(sweep, method_options);
    sweep->add_option("--grid-alpha", grid_flags["alpha"], "Comma list of alpha values");
    sweep->add_option("--grid-beta", grid_flags["beta"], "Comma list of beta values");
    sweep->add_option("--grid-penalty", grid_flags["penalty"],
                      "Comma list of penalty values");
    sweep->add_option("--grid-alpha1", grid_flags["alpha1"],
                      "Comma list of Norm alpha1 values");
    sweep->add_option("--grid-tau1", grid_flags["tau1"], "Comma list of tau1 values");
    sweep->add_option("--grid-w2", grid_flags["w2"], "Comma list of w2 values");
    sweep->add_option("--grid-tau2", grid_flags["tau2"], "Comma list of tau2 values");
    sweep->add_option("--level", level, "Annotation level")->capture_default_str();
    sweep->add_option("--cache", cache_dir, "Segmentation cache directory");
    sweep->add_option("--out", out_prefix, "Table path prefix (.csv/.json)");
    sweep->add_option("--patch", patch_path, "Annotation patch file (JSON)");
    sweep->add_option("--best-at", best_at, "Tolerance for the best-row report")
        ->capture_default_str();
    add_common(sweep);

    CLI::App* plotdata = app.add_subcommand("plotdata", "Export curves as CSV");
    plotdata->add_option("input", inputs, "Input file")->required()->expected(1);
    plotdata->add_option("--what", what,
                         "novelty, adjacency, xhat, ssm or ssm-novelty")
        ->capture_default_str();
    add_method_flags(plotdata, method_options);
    plotdata->add_option("--out", out_prefix, "Output CSV path (stdout if empty)");
    add_common(plotdata);

    CLI11_PARSE(app, argc, argv);

    try {
        CLI::App* active = app.get_subcommands().front();
        apply_config(active, common.config_path);

        if (active == segment)
            return run_segment(inputs, build_params(method_options, segment),
                               common, out_dir);
        if (active == evaluate)
            return run_evaluate(estimates_dir, annotations_dir, tolerance, level,
                                out_prefix, patch_path);
        if (active == baseline)
            return run_baseline(inputs, baseline_k, common, out_dir);
        if (active == sweep)
            return run_sweep_cmd(corpus_dir, annotations_dir, method_options,
                                 grid_flags, level, cache_dir, common, out_prefix,
                                 patch_path, best_at);
        if (active == plotdata)
            return run_plotdata(inputs.front(), what,
                                build_params(method_options, plotdata), common,
                                out_prefix);
        std::cerr << "unknown subcommand\n";
        return 1;
    } catch (const symseg::Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
