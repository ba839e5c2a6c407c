#include "cli_app.hpp"

#include <CLI11.hpp>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>

#include "spadesim/experiments.hpp"
#include "spadesim/parallel.hpp"

namespace spadesim::cli {

namespace {

std::string default_output_dir() {
    if (const char* env = std::getenv("SPADESIM_OUTPUT_DIR")) return env;
    return ".";
}

struct ExperimentArgs {
    std::string spec_path;
    std::vector<std::string> overrides;
    std::string output_dir = default_output_dir();
    uint64_t seed = 0;
    bool seed_set = false;
};

void add_experiment_options(CLI::App* sub, ExperimentArgs& args) {
    sub->add_option("--spec", args.spec_path, "experiment spec file (JSON)")
        ->check(CLI::ExistingFile);
    sub->add_option("--override", args.overrides, "key=value spec override (repeatable)");
    sub->add_option("--out", args.output_dir, "output directory");
    sub->add_option("--seed", args.seed, "root random seed")
        ->each([&](const std::string&) { args.seed_set = true; });
}

int run_named_experiment(const std::string& name, const ExperimentArgs& args) {
    ExperimentSpec spec;
    if (!args.spec_path.empty()) spec = ExperimentSpec::from_json(io::load_json(args.spec_path));
    spec.experiment = name;
    for (const auto& ov : args.overrides) spec.apply_override(ov);
    if (args.seed_set) spec.seed = args.seed;
    spec.output_dir = args.output_dir;
    run_experiment(spec);
    std::cout << "wrote " << name << " outputs to " << spec.output_dir << "\n";
    return 0;
}

int run_info(const ExperimentSpec& spec, const std::string& export_basis) {
    const Psf psf = spec.build_psf();
    const ModeBasis hg = hermite_gauss_basis(psf, spec.modes - 1);
    if (!export_basis.empty()) write_basis_csv(hg, export_basis);

    SceneFamily family;
    std::vector<double> theta;
    if (spec.scene == "two-point") {
        family = separation_family(spec.centroid);
        theta = {spec.separation};
    } else {
        family = scale_family(spec.build_scene());
        theta = {1.0};
    }
    HelstromOptions hopt;
    hopt.truncation = spec.truncation;

    nlohmann::json out;
    out["psf"] = spec.psf;
    out["sigma"] = spec.sigma;
    out["scene"] = spec.scene;
    out["parameter"] = family.parameter_names.front();
    out["theta"] = theta.front();
    const double fid = fi_direct(family, psf, theta, psf.xgrid()).scalar_fi();
    const double fis = fi_modes(family, hg, psf, theta).scalar_fi();
    const double fiv = fi_modes(family, parity_basis(), psf, theta).scalar_fi();
    const double hi = helstrom_onephoton(family, psf, theta, hopt).scalar_hi();
    out["fi_direct"] = fid;
    out["fi_spade"] = fis;
    out["fi_sliver"] = fiv;
    out["hi"] = hi;
    out["crb_direct"] = fid > 0.0 ? 1.0 / fid : std::numeric_limits<double>::infinity();
    out["crb_spade"] = fis > 0.0 ? 1.0 / fis : std::numeric_limits<double>::infinity();
    out["quantum_bound"] = hi > 0.0 ? 1.0 / hi : std::numeric_limits<double>::infinity();
    std::cout << out.dump(2) << "\n";
    return 0;
}

int run_plot(const std::string& input, const std::string& output, const std::string& xcol,
             std::vector<std::string> ycols, bool logx, bool logy) {
    const io::Table t = io::read_csv(input);
    if (ycols.empty()) {
        for (const auto& c : t.columns())
            if (c != xcol) ycols.push_back(c);
    }
    const int width = 720, height = 480, margin = 60;
    auto tx = [&](double v) { return logx ? std::log10(v) : v; };
    auto ty = [&](double v) { return logy ? std::log10(v) : v; };

    double xmin = 1e308, xmax = -1e308, ymin = 1e308, ymax = -1e308;
    std::vector<double> xs(t.row_count());
    for (size_t r = 0; r < t.row_count(); ++r) {
        xs[r] = tx(t.at(r, xcol));
        xmin = std::min(xmin, xs[r]);
        xmax = std::max(xmax, xs[r]);
    }
    std::vector<std::vector<double>> series(ycols.size());
    for (size_t s = 0; s < ycols.size(); ++s) {
        series[s].resize(t.row_count());
        for (size_t r = 0; r < t.row_count(); ++r) {
            series[s][r] = ty(t.at(r, ycols[s]));
            if (std::isfinite(series[s][r])) {
                ymin = std::min(ymin, series[s][r]);
                ymax = std::max(ymax, series[s][r]);
            }
        }
    }
    if (!(xmax > xmin)) xmax = xmin + 1.0;
    if (!(ymax > ymin)) ymax = ymin + 1.0;
    auto px = [&](double v) {
        return margin + (v - xmin) / (xmax - xmin) * (width - 2 * margin);
    };
    auto py = [&](double v) {
        return height - margin - (v - ymin) / (ymax - ymin) * (height - 2 * margin);
    };

    static const char* colors[] = {"#1f77b4", "#d62728", "#2ca02c", "#9467bd",
                                   "#ff7f0e", "#8c564b"};
    std::string svg = "<svg xmlns='http://www.w3.org/2000/svg' width='" +
                      std::to_string(width) + "' height='" + std::to_string(height) + "'>\n";
    svg += "<rect width='100%' height='100%' fill='white'/>\n";
    svg += "<line x1='" + std::to_string(margin) + "' y1='" + std::to_string(height - margin) +
           "' x2='" + std::to_string(width - margin) + "' y2='" +
           std::to_string(height - margin) + "' stroke='black'/>\n";
    svg += "<line x1='" + std::to_string(margin) + "' y1='" + std::to_string(margin) +
           "' x2='" + std::to_string(margin) + "' y2='" + std::to_string(height - margin) +
           "' stroke='black'/>\n";
    for (size_t s = 0; s < ycols.size(); ++s) {
        std::string pts;
        for (size_t r = 0; r < t.row_count(); ++r) {
            if (!std::isfinite(series[s][r])) continue;
            pts += std::to_string(px(xs[r])) + "," + std::to_string(py(series[s][r])) + " ";
        }
        const char* color = colors[s % 6];
        svg += "<polyline fill='none' stroke='" + std::string(color) + "' points='" + pts +
               "'/>\n";
        svg += "<text x='" + std::to_string(width - margin + 4) + "' y='" +
               std::to_string(margin + 16 * (s + 1)) + "' fill='" + color + "' font-size='12'>" +
               ycols[s] + "</text>\n";
    }
    svg += "<text x='" + std::to_string(width / 2) + "' y='" + std::to_string(height - 16) +
           "' font-size='12' text-anchor='middle'>" + xcol + (logx ? " (log10)" : "") +
           "</text>\n";
    svg += "<text x='16' y='" + std::to_string(height / 2) + "' font-size='12'>" +
           (logy ? std::string("log10") : std::string("value")) + "</text>\n";
    svg += "</svg>\n";
    io::write_text(output, svg);
    std::cout << "wrote " << output << "\n";
    return 0;
}

} // namespace

int run(const std::vector<std::string>& args) {
    CLI::App app{"quantum-limited incoherent-imaging simulator"};
    app.set_version_flag("--version", std::string(kVersion));
    int threads = 0;
    app.add_option("--threads", threads, "cap the worker thread pool (0 = hardware default)");
    app.require_subcommand(0, 1);

    // info
    ExperimentSpec info_spec;
    std::string export_basis;
    auto* info = app.add_subcommand("info", "one-shot FI/HI report at a parameter point");
    info->fallthrough();
    info->add_option("--psf", info_spec.psf, "psf kind: gaussian | signum | csv:<path>");
    info->add_option("--sigma", info_spec.sigma, "psf width (>0)")
        ->check(CLI::PositiveNumber);
    info->add_option("--scene", info_spec.scene, "scene kind: two-point | uniform | points");
    info->add_option("--sep", info_spec.separation, "two-point separation")
        ->check(CLI::PositiveNumber);
    info->add_option("--centroid", info_spec.centroid, "scene centroid offset");
    info->add_option("--modes", info_spec.modes, "number of demultiplexed modes")
        ->check(CLI::PositiveNumber);
    info->add_option("--truncation", info_spec.truncation, "one-photon solver truncation")
        ->check(CLI::Range(1, 24));
    info->add_option("--grid-half-width", info_spec.grid_half_width, "image grid half width")
        ->check(CLI::PositiveNumber);
    info->add_option("--grid-samples", info_spec.grid_samples, "image grid samples")
        ->check(CLI::Range(16, 1 << 20));
    info->add_option("--export-basis", export_basis, "write the mode basis to a CSV file");

    // experiments
    ExperimentArgs fisher_args, mse_args, moments_args, thermal_args, reconstruct_args;
    auto* fisher = app.add_subcommand("fisher-sweep", "FI/HI versus separation table");
    fisher->fallthrough();
    add_experiment_options(fisher, fisher_args);
    auto* mse = app.add_subcommand("mse", "Monte Carlo ML error versus bounds");
    mse->fallthrough();
    add_experiment_options(mse, mse_args);
    auto* moments = app.add_subcommand("moments", "moment-estimation error scaling");
    moments->fallthrough();
    add_experiment_options(moments, moments_args);
    auto* thermal = app.add_subcommand("thermal", "thermal-state information versus epsilon");
    thermal->fallthrough();
    add_experiment_options(thermal, thermal_args);
    auto* reconstruct = app.add_subcommand("reconstruct", "moment-based object reconstruction");
    reconstruct->fallthrough();
    add_experiment_options(reconstruct, reconstruct_args);

    // rerun
    std::string manifest_path, rerun_out;
    auto* rerun = app.add_subcommand("rerun", "re-run an experiment from its manifest");
    rerun->fallthrough();
    rerun->add_option("--manifest", manifest_path, "manifest JSON path")
        ->required()
        ->check(CLI::ExistingFile);
    rerun->add_option("--out", rerun_out, "output directory override");

    // plot
    std::string plot_in, plot_out, plot_x = "theta";
    std::vector<std::string> plot_y;
    bool logx = false, logy = false;
    auto* plot = app.add_subcommand("plot", "render a CSV table as an SVG line chart");
    plot->fallthrough();
    plot->add_option("--input", plot_in, "CSV input")->required()->check(CLI::ExistingFile);
    plot->add_option("--output", plot_out, "SVG output")->required();
    plot->add_option("--x", plot_x, "x column name");
    plot->add_option("--y", plot_y, "y column names (default: all other columns)");
    plot->add_flag("--logx", logx, "log10 x axis");
    plot->add_flag("--logy", logy, "log10 y axis");

    std::vector<std::string> reversed(args.rbegin(), args.rend());
    try {
        app.parse(reversed);
    } catch (const CLI::ParseError& e) {
        return app.exit(e) == 0 ? 0 : 1;
    }

    set_max_threads(threads);
    try {
        if (info->parsed()) return run_info(info_spec, export_basis);
        if (fisher->parsed()) return run_named_experiment("fisher-sweep", fisher_args);
        if (mse->parsed()) return run_named_experiment("mse", mse_args);
        if (moments->parsed()) return run_named_experiment("moments", moments_args);
        if (thermal->parsed()) return run_named_experiment("thermal", thermal_args);
        if (reconstruct->parsed()) return run_named_experiment("reconstruct", reconstruct_args);
        if (rerun->parsed()) {
            std::optional<std::string> out;
            if (!rerun_out.empty()) out = rerun_out;
            rerun_from_manifest(manifest_path, out);
            std::cout << "re-ran manifest " << manifest_path << "\n";
            return 0;
        }
        if (plot->parsed()) return run_plot(plot_in, plot_out, plot_x, plot_y, logx, logy);
        std::cout << app.help();
        return 1;
    } catch (const StabilityError& e) {
        std::cerr << "numerical-stability error: " << e.what() << "\n";
        return 2;
    } catch (const InputError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return 1;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}

int run(int argc, char** argv) {
    std::vector<std::string> args;
    for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
    return run(args);
}

} // namespace spadesim::cli
