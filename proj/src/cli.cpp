#include "twinbeam/cli.hpp"

#include "twinbeam/fit.hpp"
#include "twinbeam/io.hpp"
#include "twinbeam/moments.hpp"
#include "twinbeam/photostat.hpp"
#include "twinbeam/qdii.hpp"
#include "twinbeam/simgen.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <ostream>
#include <sstream>

namespace twinbeam {

using nlohmann::json;
namespace fs = std::filesystem;

namespace {

struct Options {
    std::string input;
    std::string dark;
    std::string params;
    std::string config;
    std::string output;
    std::string format = "json";
    double eta_s = 0.243;
    double eta_i = 0.235;
    std::int64_t pixels_s = 10000;
    std::int64_t pixels_i = 10000;
    double dark_s = 1e-5;
    double dark_i = 1e-5;
    int scan_points = 200;
    double ordering = 1.0;
    double grid_max = 0.0;
    int grid_cells = 0;
    bool paired_only = false;
    std::int64_t frames = 0;
    std::uint64_t seed = 0;
    bool seed_given = false;
};

// Nested keys become "a.b", array entries "a[k]".
void flatten(const json& j, const std::string& prefix, std::ostream& out) {
    if (j.is_object()) {
        for (const auto& [k, v] : j.items()) flatten(v, prefix.empty() ? k : prefix + "." + k, out);
    } else if (j.is_array()) {
        for (std::size_t k = 0; k < j.size(); ++k)
            flatten(j[k], prefix + "[" + std::to_string(k) + "]", out);
    } else if (j.is_number_float()) {
        out << prefix << ',' << format_number(j.get<double>()) << '\n';
    } else {
        out << prefix << ',' << j.dump() << '\n';
    }
}

std::string render(const json& report, const std::string& format) {
    if (format == "csv") {
        std::ostringstream os;
        os << "key,value\n";
        flatten(report, "", os);
        return os.str();
    }
    return report.dump(2) + "\n";
}

void emit(const json& report, const Options& o, std::ostream& out, const std::string& file_name) {
    const std::string text = render(report, o.format);
    if (o.output.empty()) {
        out << text;
        return;
    }
    fs::create_directories(o.output);
    write_text_file((fs::path(o.output) / (file_name + "." + o.format)).string(), text);
}

json moments_json(const PhotocountMoments& m) {
    return {{"mean_s", m.mean_s},       {"mean_i", m.mean_i}, {"mean_sq_s", m.mean_sq_s},
            {"mean_sq_i", m.mean_sq_i}, {"cross", m.cross}};
}

json detected_json(const DetectedIntensityMoments& d) {
    return {{"mean_s", d.mean_s}, {"mean_i", d.mean_i}, {"var_s", d.var_s},
            {"var_i", d.var_i},   {"cov", d.cov},       {"negative_mean", d.negative_mean}};
}

json field_json(const FieldMoments& f) {
    return {{"mean_p", f.mean_p}, {"mean_s", f.mean_s}, {"mean_i", f.mean_i},
            {"var_p", f.var_p},   {"var_s", f.var_s},   {"var_i", f.var_i}};
}

json params_json(const TwinBeamParams& p) { return json::parse(params_to_json(p)); }

json family_json(const MomentInversionFamily& f) {
    return {{"lower", f.lower()},
            {"upper", f.upper()},
            {"var_p_max", f.var_p_max},
            {"noise_bound", f.var_p_noise_bound},
            {"pair_bound", f.var_p_pair_bound},
            {"poissonian_pair_limit", f.poissonian_pair_limit}};
}

json diagnostics_json(const TwinBeamParams& params) {
    const auto fm = field_moments(params);
    const auto th = ordering_threshold(params);
    const auto nc = nonclassicality(fm);
    const auto photons = joint_photon_distribution(params, default_cutoffs(params));
    json j;
    j["field_moments"] = field_json(fm);
    j["s_th"] = th.s_th ? json(*th.s_th) : json(nullptr);
    j["s_th_beta"] = th.beta;
    j["s_th_gamma"] = th.gamma;
    j["s_th_radicand"] = th.radicand;
    j["nonclassicality"] = {{"margin", nc.margin},
                            {"nonclassical", nc.nonclassical},
                            {"noise_term", nc.noise_term},
                            {"pair_term", nc.pair_term}};
    j["noise_reduction_factor"] = noise_reduction_factor(fm);
    j["p_sum"] = sum_distribution(photons);
    j["p_sum_truncation_mass"] = photons.truncation_mass;
    return j;
}

Histogram2D dark_or_empty(const std::string& path, const Histogram2D& like) {
    if (!path.empty()) return read_histogram_csv(path);
    Histogram2D dark;
    dark.counts = Eigen::MatrixXd::Zero(1, 1);
    dark.counts(0, 0) = like.total_frames;
    dark.total_frames = like.total_frames;
    return dark;
}

int cmd_moments(const Options& o, std::ostream& out) {
    const auto h = read_histogram_csv(o.input);
    const auto dark = dark_or_empty(o.dark, h);
    const auto pm = photocount_moments(h);
    const auto dm = photocount_moments(dark);
    const auto detected = dark_corrected_moments(pm, dm);
    const double margin = feasibility(detected, o.eta_s, o.eta_i);
    json report;
    report["photocount_moments"] = moments_json(pm);
    report["dark_moments"] = moments_json(dm);
    report["detected_moments"] = detected_json(detected);
    report["eta_s"] = o.eta_s;
    report["eta_i"] = o.eta_i;
    report["feasibility_margin"] = margin;
    int code = kExitOk;
    try {
        report["var_p_interval"] = family_json(inversion_family(detected, o.eta_s, o.eta_i));
        report["feasible"] = true;
    } catch (const InfeasibleError&) {
        report["var_p_interval"] = nullptr;
        report["feasible"] = false;
        code = kExitInfeasible;
    }
    emit(report, o, out, "moments");
    return code;
}

int cmd_reconstruct(const Options& o, std::ostream& out) {
    const auto h = read_histogram_csv(o.input);
    const auto dark = dark_or_empty(o.dark, h);
    const DetectorModel ds = validate(DetectorModel{o.eta_s, o.pixels_s, o.dark_s});
    const DetectorModel di = validate(DetectorModel{o.eta_i, o.pixels_i, o.dark_i});
    const auto r = reconstruct(h, dark, ds, di, o.scan_points);

    json scan = json::array();
    for (const auto& p : r.scan) scan.push_back({p.var_p, p.declination});
    json result;
    result["var_p_opt"] = r.var_p_opt;
    result["declination"] = r.declination;
    result["at_boundary"] = r.at_boundary;
    result["params"] = params_json(r.params);
    result["field_moments"] = field_json(r.field_moments);
    result["detected_moments"] = detected_json(r.family.detected);
    result["var_p_interval"] = family_json(r.family);
    result["scan_points"] = r.scan_points;
    result["refinement_points"] = r.refinement_points;
    result["scan"] = scan;
    result["diagnostics"] = diagnostics_json(r.params);

    const fs::path dir = o.output.empty() ? fs::path(".") : fs::path(o.output);
    fs::create_directories(dir);
    write_text_file((dir / "result.json").string(), result.dump(2) + "\n");
    std::ostringstream curve;
    curve << "var_p,declination\n";
    for (const auto& p : r.scan)
        curve << format_number(p.var_p) << ',' << format_number(p.declination) << '\n';
    write_text_file((dir / "scan.csv").string(), curve.str());
    std::ostringstream psum;
    psum << "k,p_sum\n";
    const auto& ps = result["diagnostics"]["p_sum"];
    for (std::size_t k = 0; k < ps.size(); ++k) psum << k << ',' << format_number(ps[k].get<double>()) << '\n';
    write_text_file((dir / "psum.csv").string(), psum.str());

    json summary = {{"var_p_opt", r.var_p_opt},
                    {"declination", r.declination},
                    {"at_boundary", r.at_boundary},
                    {"params", params_json(r.params)}};
    out << render(summary, o.format);
    return kExitOk;
}

int cmd_simulate(const Options& o, std::ostream& out) {
    SimConfig c = parse_sim_config_json(read_text_file(o.config), o.config);
    if (o.frames > 0) c.frames = o.frames;
    if (o.seed_given) c.seed = o.seed;
    validate(c);
    const auto sim = simulate_histogram(c);
    const fs::path dir = o.output.empty() ? fs::path(".") : fs::path(o.output);
    fs::create_directories(dir);
    std::string echo = sim_config_to_json(c);
    json compact = json::parse(echo);
    const std::vector<std::string> comments = {"seed: " + std::to_string(c.seed),
                                               "config: " + compact.dump()};
    for (const auto& [name, hist] : {std::pair{"histogram.csv", &sim.signal_idler},
                                     std::pair{"dark.csv", &sim.dark}}) {
        std::ostringstream os;
        write_histogram_csv(os, *hist, comments);
        write_text_file((dir / name).string(), os.str());
    }
    write_text_file((dir / "config.json").string(), echo);
    out << "wrote " << (dir / "histogram.csv").string() << " and " << (dir / "dark.csv").string()
        << " (" << c.frames << " frames, seed " << c.seed << ")\n";
    return kExitOk;
}

int cmd_qdii(const Options& o, std::ostream& out) {
    const auto params = parse_params_json(read_text_file(o.params), o.params);
    GridSpec grid = default_grid(params, o.ordering);
    if (o.grid_max > 0.0) grid.w_max = o.grid_max;
    if (o.grid_cells > 0) grid.cells = o.grid_cells;
    const fs::path dir = o.output.empty() ? fs::path(".") : fs::path(o.output);
    fs::create_directories(dir);

    json summary;
    auto run = [&](bool paired_only, const char* file) {
        const auto g = joint_qdii_grid(params, o.ordering, grid, {paired_only});
        std::ostringstream os;
        write_grid_csv(os, g);
        write_text_file((dir / file).string(), os.str());
        summary[paired_only ? "paired_only" : "full"] = {{"file", (dir / file).string()},
                                                          {"normalization", g.normalization},
                                                          {"min", g.values.minCoeff()},
                                                          {"max", g.values.maxCoeff()}};
    };
    run(false, "qdii.csv");
    if (o.paired_only) run(true, "qdii_paired.csv");
    summary["ordering"] = o.ordering;
    summary["grid_max"] = grid.w_max;
    summary["grid_cells"] = grid.cells;
    out << render(summary, o.format);
    return kExitOk;
}

int cmd_diagnose(const Options& o, std::ostream& out) {
    const auto params = parse_params_json(read_text_file(o.params), o.params);
    json report = diagnostics_json(params);
    report["params"] = params_json(params);
    emit(report, o, out, "diagnostics");
    return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Twin-beam state reconstruction and quasi-distribution toolkit", "twinbeam"};
    app.require_subcommand(1);
    Options o;

    auto format = [&](CLI::App* c) {
        c->add_option("--format", o.format, "Report format")
            ->check(CLI::IsMember({"json", "csv"}))
            ->capture_default_str();
    };
    auto efficiencies = [&](CLI::App* c) {
        c->add_option("--eta-s", o.eta_s, "Signal detection efficiency")->capture_default_str();
        c->add_option("--eta-i", o.eta_i, "Idler detection efficiency")->capture_default_str();
    };

    auto* moments = app.add_subcommand("moments", "Detected moments, feasibility and var_p interval");
    moments->add_option("--input", o.input, "Signal-idler histogram CSV")->required();
    moments->add_option("--dark", o.dark, "Dark-count histogram CSV");
    efficiencies(moments);
    moments->add_option("--output", o.output, "Output directory (default: stdout)");
    format(moments);

    auto* rec = app.add_subcommand("reconstruct", "Fit the six-parameter state to a histogram");
    rec->add_option("--input", o.input, "Signal-idler histogram CSV")->required();
    rec->add_option("--dark", o.dark, "Dark-count histogram CSV");
    efficiencies(rec);
    rec->add_option("--pixels-s", o.pixels_s, "Signal pixel count")->capture_default_str();
    rec->add_option("--pixels-i", o.pixels_i, "Idler pixel count")->capture_default_str();
    rec->add_option("--dark-s", o.dark_s, "Signal per-pixel dark probability")->capture_default_str();
    rec->add_option("--dark-i", o.dark_i, "Idler per-pixel dark probability")->capture_default_str();
    rec->add_option("--scan-points", o.scan_points, "Uniform scan points")
        ->check(CLI::Range(3, 100000))
        ->capture_default_str();
    rec->add_option("--output", o.output, "Output directory")->capture_default_str();
    format(rec);

    auto* sim = app.add_subcommand("simulate", "Monte Carlo signal-idler and dark histograms");
    sim->add_option("--config", o.config, "Simulation config JSON")->required();
    sim->add_option("--frames", o.frames, "Override the frame count")->check(CLI::PositiveNumber);
    sim->add_option("--seed", o.seed, "Override the seed")->each([&](const std::string&) {
        o.seed_given = true;
    });
    sim->add_option("--output", o.output, "Output directory");

    auto* qd = app.add_subcommand("qdii", "s-ordered quasi-distribution on a grid");
    qd->add_option("--params", o.params, "Parameter JSON")->required();
    qd->add_option("--ordering", o.ordering, "Ordering parameter s in (-1, 1]")->capture_default_str();
    qd->add_option("--grid-max", o.grid_max, "Largest intensity on each axis (0: automatic)");
    qd->add_option("--grid-cells", o.grid_cells, "Cells per axis (0: automatic)");
    qd->add_flag("--paired-only", o.paired_only, "Also write the paired field alone");
    qd->add_option("--output", o.output, "Output directory");
    format(qd);

    auto* diag = app.add_subcommand("diagnose", "Threshold, non-classicality, p_sum, noise reduction");
    diag->add_option("--params", o.params, "Parameter JSON")->required();
    diag->add_option("--output", o.output, "Output directory (default: stdout)");
    format(diag);

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e, out, err);
    } catch (const CLI::ParseError& e) {
        app.exit(e, out, err);
        return kExitInvalid;
    }

    try {
        if (*moments) return cmd_moments(o, out);
        if (*rec) return cmd_reconstruct(o, out);
        if (*sim) return cmd_simulate(o, out);
        if (*qd) return cmd_qdii(o, out);
        if (*diag) return cmd_diagnose(o, out);
    } catch (const InfeasibleError& e) {
        err << "infeasible: " << e.what() << " (margin " << format_number(e.margin()) << ")\n";
        return kExitInfeasible;
    } catch (const ValidationError& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::domain_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const fs::filesystem_error& e) {
        err << "error: " << e.what() << "\n";
        return kExitInvalid;
    } catch (const std::exception& e) {
        err << "numerical failure: " << e.what() << "\n";
        return kExitNumerical;
    }
    return kExitInvalid;
}

}  // namespace twinbeam
