#include "spadesim/experiments.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numbers>

#include "spadesim/parallel.hpp"
#include "spadesim/stats.hpp"

namespace spadesim {

namespace {

std::vector<double> geometric_grid(double lo, double hi, int n) {
    std::vector<double> g(n);
    const double la = std::log(lo), lb = std::log(hi);
    for (int i = 0; i < n; ++i) g[i] = std::exp(la + (lb - la) * i / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<double> json_number_list(const nlohmann::json& v, const std::string& key) {
    std::vector<double> out;
    if (!v.is_array()) throw InputError("spec key '" + key + "' must be an array of numbers");
    for (const auto& e : v) {
        if (!e.is_number()) throw InputError("spec key '" + key + "' must contain numbers");
        out.push_back(e.get<double>());
    }
    return out;
}

} // namespace

ExperimentSpec ExperimentSpec::from_json(const nlohmann::json& j) {
    ExperimentSpec s;
    for (const auto& [key, value] : j.items()) {
        if (key == "schema_version") s.schema_version = value.get<int>();
        else if (key == "experiment") s.experiment = value.get<std::string>();
        else if (key == "psf") s.psf = value.get<std::string>();
        else if (key == "sigma") s.sigma = value.get<double>();
        else if (key == "grid_half_width") s.grid_half_width = value.get<double>();
        else if (key == "grid_samples") s.grid_samples = value.get<int>();
        else if (key == "scene") s.scene = value.get<std::string>();
        else if (key == "separation") s.separation = value.get<double>();
        else if (key == "centroid") s.centroid = value.get<double>();
        else if (key == "scene_positions") s.scene_positions = json_number_list(value, key);
        else if (key == "scene_weights") s.scene_weights = json_number_list(value, key);
        else if (key == "theta_grid") s.theta_grid = json_number_list(value, key);
        else if (key == "delta_grid") s.delta_grid = json_number_list(value, key);
        else if (key == "epsilon_grid") s.epsilon_grid = json_number_list(value, key);
        else if (key == "photon_grid") s.photon_grid = json_number_list(value, key);
        else if (key == "modes") s.modes = value.get<int>();
        else if (key == "truncation") s.truncation = value.get<int>();
        else if (key == "trials") s.trials = value.get<int>();
        else if (key == "max_order") s.max_order = value.get<int>();
        else if (key == "reference_sigma") s.reference_sigma = value.get<double>();
        else if (key == "photons") s.photons = value.get<double>();
        else if (key == "seed") s.seed = value.get<uint64_t>();
        else if (key == "output_dir") s.output_dir = value.get<std::string>();
        else throw InputError("unknown spec key '" + key + "'");
    }
    if (s.schema_version != 1)
        throw InputError("unsupported spec schema_version " + std::to_string(s.schema_version));
    if (s.trials < 1) throw InputError("spec key 'trials' must be >= 1");
    if (!(s.sigma > 0.0)) throw InputError("spec key 'sigma' must be positive");
    if (!(s.photons >= 0.0)) throw InputError("spec key 'photons' must be nonnegative");
    return s;
}

nlohmann::json ExperimentSpec::to_json() const {
    nlohmann::json j;
    j["schema_version"] = schema_version;
    j["experiment"] = experiment;
    j["psf"] = psf;
    j["sigma"] = sigma;
    j["grid_half_width"] = grid_half_width;
    j["grid_samples"] = grid_samples;
    j["scene"] = scene;
    j["separation"] = separation;
    j["centroid"] = centroid;
    j["scene_positions"] = scene_positions;
    j["scene_weights"] = scene_weights;
    j["theta_grid"] = theta_grid;
    j["delta_grid"] = delta_grid;
    j["epsilon_grid"] = epsilon_grid;
    j["photon_grid"] = photon_grid;
    j["modes"] = modes;
    j["truncation"] = truncation;
    j["trials"] = trials;
    j["max_order"] = max_order;
    j["reference_sigma"] = reference_sigma;
    j["photons"] = photons;
    j["seed"] = seed;
    j["output_dir"] = output_dir;
    return j;
}

void ExperimentSpec::apply_override(const std::string& assignment) {
    const auto eq = assignment.find('=');
    if (eq == std::string::npos)
        throw InputError("override '" + assignment + "' is not of the form key=value");
    const std::string key = assignment.substr(0, eq);
    const std::string value = assignment.substr(eq + 1);

    nlohmann::json j = to_json();
    if (!j.contains(key)) throw InputError("override references unknown key '" + key + "'");
    const auto& current = j[key];
    if (current.is_string()) {
        j[key] = value;
    } else if (current.is_array()) {
        nlohmann::json arr = nlohmann::json::array();
        std::string item;
        for (size_t i = 0; i <= value.size(); ++i) {
            if (i == value.size() || value[i] == ',') {
                if (!item.empty()) arr.push_back(std::stod(item));
                item.clear();
            } else {
                item += value[i];
            }
        }
        j[key] = arr;
    } else if (current.is_number_integer() || current.is_number_unsigned()) {
        j[key] = static_cast<int64_t>(std::stoll(value));
    } else {
        try {
            j[key] = std::stod(value);
        } catch (const std::exception&) {
            throw InputError("override value for '" + key + "' is not a number: " + value);
        }
    }
    *this = from_json(j);
}

Psf ExperimentSpec::build_psf() const {
    Grid x(-grid_half_width, grid_half_width, grid_samples);
    if (psf == "gaussian") return Psf::gaussian(sigma, x);
    if (psf == "signum") return Psf::signum_masked(sigma, x);
    if (psf.rfind("csv:", 0) == 0) return Psf::from_csv(psf.substr(4), sigma);
    throw InputError("unknown psf kind '" + psf + "'");
}

SourceScene ExperimentSpec::build_scene() const {
    if (scene == "two-point") return SourceScene::two_point(separation, centroid);
    if (scene == "uniform") {
        const double delta = delta_grid.empty() ? separation : delta_grid.front();
        return SourceScene::uniform(delta, centroid);
    }
    if (scene == "points") {
        if (scene_positions.size() != scene_weights.size() || scene_positions.empty())
            throw InputError("points scene needs matching scene_positions/scene_weights");
        std::vector<PointSource> srcs;
        for (size_t i = 0; i < scene_positions.size(); ++i)
            srcs.push_back({scene_positions[i] + centroid, scene_weights[i]});
        return SourceScene::points(std::move(srcs));
    }
    if (scene.rfind("csv:", 0) == 0) return SourceScene::from_csv(scene.substr(4));
    throw InputError("unknown scene kind '" + scene + "'");
}

// ---- fisher sweep ----------------------------------------------------------

ExperimentResult run_fisher_sweep(const ExperimentSpec& spec) {
    const Psf psf = spec.build_psf();
    const auto thetas =
        spec.theta_grid.empty() ? geometric_grid(0.01, 5.0, 25) : spec.theta_grid;
    const ModeBasis hg = hermite_gauss_basis(psf, spec.modes - 1);
    const ModeBasis parity = parity_basis();
    const SceneFamily family = separation_family(spec.centroid);

    struct Row {
        double fi_direct, fi_spade, fi_sliver, hi;
    };
    std::vector<Row> rows(thetas.size());
    HelstromOptions hopt;
    hopt.truncation = spec.truncation;
    parallel_for(static_cast<int>(thetas.size()), [&](int i) {
        const std::vector<double> th{thetas[i]};
        rows[i].fi_direct = fi_direct(family, psf, th, psf.xgrid()).scalar_fi();
        rows[i].fi_spade = fi_modes(family, hg, psf, th).scalar_fi();
        rows[i].fi_sliver = fi_modes(family, parity, psf, th).scalar_fi();
        rows[i].hi = helstrom_onephoton(family, psf, th, hopt).scalar_hi();
    });

    io::Table table({"theta", "fi_direct", "fi_spade", "fi_sliver", "hi"});
    for (size_t i = 0; i < thetas.size(); ++i)
        table.add_row({thetas[i], rows[i].fi_direct, rows[i].fi_spade, rows[i].fi_sliver,
                       rows[i].hi});
    return {std::move(table), {}, {}};
}

// ---- Monte Carlo MSE -------------------------------------------------------

ExperimentResult run_mse_montecarlo(const ExperimentSpec& spec) {
    const Psf psf = spec.build_psf();
    const auto thetas = spec.theta_grid.empty() ? std::vector<double>{spec.separation}
                                                : spec.theta_grid;
    const auto photons = spec.photon_grid.empty() ? std::vector<double>{spec.photons}
                                                  : spec.photon_grid;
    const ModeBasis hg = hermite_gauss_basis(psf, spec.modes - 1);
    const ModeCountModel spade_model(hg, psf, spec.centroid);
    const DirectImagingModel direct_model(psf, psf.xgrid(), spec.centroid);
    const SceneFamily family = separation_family(spec.centroid);
    HelstromOptions hopt;
    hopt.truncation = spec.truncation;

    io::Table table({"theta", "photons", "scheme", "mse", "crb", "inv_hi"});
    uint64_t row_id = 0;
    for (double theta : thetas) {
        const double hi = helstrom_onephoton(family, psf, {theta}, hopt).scalar_hi();
        const double upper = std::max(1.0, 3.0 * theta);
        for (double n : photons) {
            const double inv_hi = 1.0 / (n * hi);
            struct SchemeRun {
                const char* name;
                const SeparationModel* model;
                double fi;
            };
            const SchemeRun runs[2] = {
                {"direct", &direct_model,
                 fi_direct(family, psf, {theta}, psf.xgrid()).scalar_fi()},
                {"spade", &spade_model, fi_modes(family, hg, psf, {theta}).scalar_fi()},
            };
            for (const auto& run : runs) {
                const uint64_t run_seed = derive_stream_seed(spec.seed, row_id++);
                const EstimatorResult res =
                    run_ml_trials(*run.model, theta, n, spec.trials, run_seed, 0.0, upper);
                table.add_row({io::format_double(theta), io::format_double(n), run.name,
                               io::format_double(res.mse),
                               io::format_double(1.0 / (n * run.fi)),
                               io::format_double(inv_hi)});
            }
        }
    }
    return {std::move(table), {}, {}};
}

// ---- moment scaling ----------------------------------------------------------

namespace {

EstimatorResult moment_trials(const OutcomeDistribution& dist, const ModeBasis& basis,
                              double photons, int trials, uint64_t seed, int q, bool odd,
                              double truth) {
    std::vector<double> estimates(trials);
    parallel_for(trials, [&](int t) {
        const PhotonData data =
            sample_mode_counts(dist, photons, seed, static_cast<uint64_t>(t));
        estimates[t] = odd ? odd_moment_estimate(data, basis, photons, q)
                           : even_moment_estimate(data, basis, photons, q);
    });
    return EstimatorResult::from_estimates(std::move(estimates), truth);
}

} // namespace

ExperimentResult run_moment_scaling(const ExperimentSpec& spec) {
    const Psf psf = spec.build_psf();
    const auto deltas = spec.delta_grid.empty()
                            ? std::vector<double>{0.02, 0.05, 0.1, 0.2}
                            : spec.delta_grid;
    // Per-order photon budgets (photon_grid = {mu=2, mu=3, mu=4}).  The
    // plain count estimators are variance-dominated only while
    // N c_q^2 theta_2q (bias/variance ratio) stays small, so scaling
    // studies budget photons per moment order.
    auto photons_for_mu = [&](int mu) {
        if (spec.photon_grid.size() >= 3) return spec.photon_grid[mu - 2];
        return spec.photons;
    };
    const int pad_order = std::max(5, std::min(spec.modes - 1, 12));
    const ModeBasis pad = pad_basis(psf, pad_order);
    const ModeBasis ipad = ipad_pairs(pad, 1); // pairs (1,2),(3,4): third moment access

    io::Table table({"delta", "mu", "scheme", "mse", "predicted_mse", "snr"});
    std::vector<double> spade_snr_mu2, spade_snr_mu4, direct_snr_mu2, direct_snr_mu4;

    uint64_t row_id = 0;
    for (double delta : deltas) {
        const SourceScene even_scene = SourceScene::uniform(delta, spec.centroid);
        const MomentVector even_moments = even_scene.moments(2 * 2 + 2);
        const OutcomeDistribution even_dist = mode_probabilities(pad, even_scene, psf);
        for (int q : {1, 2}) {
            const int mu = 2 * q;
            const double n = photons_for_mu(mu);
            const double truth = even_moments[mu];
            const uint64_t s = derive_stream_seed(spec.seed, row_id++);
            const EstimatorResult res =
                moment_trials(even_dist, pad, n, spec.trials, s, q, false, truth);
            const double predicted = predicted_even_moment_mse(even_moments, pad, n, q);
            table.add_row({io::format_double(delta), std::to_string(mu), "spade",
                           io::format_double(res.mse), io::format_double(predicted),
                           io::format_double(res.snr)});
            (mu == 2 ? spade_snr_mu2 : spade_snr_mu4).push_back(res.snr);
        }

        // mildly asymmetric point scene of the same width for the odd moment
        const SourceScene odd_scene = SourceScene::points(
            {{-0.5 * delta + spec.centroid, 0.4}, {delta + spec.centroid, 0.6}});
        const MomentVector odd_moments = odd_scene.moments(2 * 1 + 2);
        const OutcomeDistribution odd_dist = mode_probabilities(ipad, odd_scene, psf);
        {
            const int q = 1, mu = 3;
            const double n = photons_for_mu(mu);
            const double truth = odd_moments[mu];
            const uint64_t s = derive_stream_seed(spec.seed, row_id++);
            const EstimatorResult res =
                moment_trials(odd_dist, ipad, n, spec.trials, s, q, true, truth);
            const double predicted = predicted_odd_moment_mse(odd_moments, ipad, n, q);
            table.add_row({io::format_double(delta), std::to_string(mu), "spade-ipad",
                           io::format_double(res.mse), io::format_double(predicted),
                           io::format_double(res.snr)});
        }

        // direct-imaging bound with all moments up to order 4 unknown
        const Eigen::MatrixXd fi = fi_direct_moments(psf, psf.xgrid(), 4, even_moments);
        const Eigen::MatrixXd bound = crb(fi).matrix;
        for (int mu : {2, 4}) {
            const double crb_mu = bound(mu - 1, mu - 1) / photons_for_mu(mu);
            const double truth = even_moments[mu];
            const double snr = truth * truth / crb_mu;
            table.add_row({io::format_double(delta), std::to_string(mu), "direct-crb",
                           io::format_double(crb_mu), io::format_double(crb_mu),
                           io::format_double(snr)});
            (mu == 2 ? direct_snr_mu2 : direct_snr_mu4).push_back(snr);
        }
    }

    nlohmann::json summary;
    summary["slopes"] = {
        {"spade_mu2", fit_loglog(deltas, spade_snr_mu2).slope},
        {"spade_mu4", fit_loglog(deltas, spade_snr_mu4).slope},
        {"direct_mu2", fit_loglog(deltas, direct_snr_mu2).slope},
        {"direct_mu4", fit_loglog(deltas, direct_snr_mu4).slope},
    };
    return {std::move(table), std::move(summary), {}};
}

// ---- thermal ultraviolet limit -------------------------------------------------

ExperimentResult run_thermal_limit(const ExperimentSpec& spec) {
    const Psf psf = spec.build_psf();
    const auto epsilons = spec.epsilon_grid.empty()
                              ? std::vector<double>{1e-4, 1e-2, 0.1, 1.0}
                              : spec.epsilon_grid;
    for (double e : epsilons)
        if (!(e > 0.0 && e <= 1.0))
            throw InputError("thermal experiment: epsilon grid must lie in (0, 1]");

    const SceneFamily family = separation_family(spec.centroid);
    const double theta = spec.separation;
    const double step = 1e-4;

    HelstromOptions hopt;
    hopt.truncation = spec.truncation;
    const double one_photon = helstrom_onephoton(family, psf, {theta}, hopt).scalar_hi();

    const OnePhotonModel model = OnePhotonModel::build(
        psf,
        {family.map({theta}), family.map({theta + step}), family.map({theta - step})},
        spec.truncation);

    io::Table table({"epsilon", "hi_per_photon", "one_photon_hi"});
    for (double eps : epsilons) {
        MatrixFamily gamma = [&](const std::vector<double>& t) {
            return Eigen::MatrixXcd(eps * model.density_matrix(family.map(t)));
        };
        const double hi_sigma = helstrom_thermal(gamma, {theta}, step).scalar_hi();
        table.add_row({eps, hi_sigma / eps, one_photon});
    }
    return {std::move(table), {}, {}};
}

// ---- reconstruction -------------------------------------------------------------

ExperimentResult run_reconstruct(const ExperimentSpec& spec) {
    const Psf psf = spec.build_psf();
    const SourceScene scene = spec.build_scene();
    const int order = spec.max_order;

    std::vector<double> theta(order + 1, 0.0);
    theta[0] = 1.0;
    if (spec.photons <= 0.0) {
        const MomentVector m = scene.moments(order);
        theta = m.values();
    } else {
        // estimate moments from SPADE counts: even from pad counts, odd from
        // the two interleaved ipad pairings; the photon budget is split
        // evenly across the measurements
        const int pad_order = std::min(12, order + 2);
        const ModeBasis pad = pad_basis(psf, pad_order);
        const ModeBasis ipad0 = ipad_pairs(pad, 0);
        const ModeBasis ipad1 = ipad_pairs(pad, 1);
        const double n = spec.photons / 3.0;
        const PhotonData even_data =
            sample_mode_counts(mode_probabilities(pad, scene, psf), n, spec.seed, 1);
        const PhotonData odd0_data =
            sample_mode_counts(mode_probabilities(ipad0, scene, psf), n, spec.seed, 2);
        const PhotonData odd1_data =
            sample_mode_counts(mode_probabilities(ipad1, scene, psf), n, spec.seed, 3);
        for (int mu = 1; mu <= order; ++mu) {
            if (mu % 2 == 0) {
                theta[mu] = even_moment_estimate(even_data, pad, n, mu / 2);
            } else {
                const int q = (mu - 1) / 2;
                const auto& basis = (q % 2 == 0) ? ipad0 : ipad1;
                const auto& data = (q % 2 == 0) ? odd0_data : odd1_data;
                theta[mu] = odd_moment_estimate(data, basis, n, q);
            }
        }
        // clamp to a valid moment sequence start
        theta[0] = 1.0;
        if (order >= 2) theta[2] = std::max(theta[2], theta[1] * theta[1]);
    }

    const double gs = spec.reference_sigma;
    Grid ref_grid(-8.0 * gs, 8.0 * gs, 801);
    std::vector<double> reference(ref_grid.samples());
    for (int i = 0; i < ref_grid.samples(); ++i) {
        const double x = ref_grid.point(i);
        reference[i] = std::exp(-x * x / (2.0 * gs * gs)) /
                       std::sqrt(2.0 * std::numbers::pi * gs * gs);
    }
    const FourierModel model =
        fourier_coefficients(MomentVector(theta), ref_grid, reference, order);
    const std::vector<double> f = reconstruct_object(model, ref_grid, true);

    io::Table table({"x", "reconstructed", "reference"});
    for (int i = 0; i < ref_grid.samples(); ++i)
        table.add_row({ref_grid.point(i), f[i], model.reference[i]});

    nlohmann::json summary;
    summary["moments"] = theta;
    summary["fourier_coefficients"] = model.coefficients;
    return {std::move(table), std::move(summary), {}};
}

// ---- dispatch, manifests ----------------------------------------------------------

namespace {

std::string base_name(const std::string& experiment) {
    std::string b = experiment;
    std::replace(b.begin(), b.end(), '-', '_');
    return b;
}

} // namespace

ExperimentResult run_experiment(const ExperimentSpec& spec) {
    ExperimentResult result = [&] {
        if (spec.experiment == "fisher-sweep") return run_fisher_sweep(spec);
        if (spec.experiment == "mse") return run_mse_montecarlo(spec);
        if (spec.experiment == "moments") return run_moment_scaling(spec);
        if (spec.experiment == "thermal") return run_thermal_limit(spec);
        if (spec.experiment == "reconstruct") return run_reconstruct(spec);
        throw InputError("unknown experiment '" + spec.experiment + "'");
    }();

    namespace fs = std::filesystem;
    fs::create_directories(spec.output_dir);
    const std::string base = base_name(spec.experiment);
    const std::string csv_name = base + ".csv";
    result.table.write_csv((fs::path(spec.output_dir) / csv_name).string());
    result.output_files.push_back(csv_name);
    if (!result.summary.empty()) {
        const std::string summary_name = base + "_summary.json";
        io::save_json((fs::path(spec.output_dir) / summary_name).string(), result.summary);
        result.output_files.push_back(summary_name);
    }

    nlohmann::json manifest;
    manifest["schema_version"] = 1;
    manifest["tool"] = {{"name", "spadesim"}, {"version", kVersion}, {"git_hash", ""}};
    manifest["spec"] = spec.to_json();
    manifest["outputs"] = result.output_files;
    io::save_json((fs::path(spec.output_dir) / (base + "_manifest.json")).string(), manifest);
    return result;
}

ExperimentResult rerun_from_manifest(const std::string& manifest_path,
                                     const std::optional<std::string>& output_dir) {
    const nlohmann::json manifest = io::load_json(manifest_path);
    if (!manifest.contains("spec")) throw InputError("manifest has no 'spec' section");
    ExperimentSpec spec = ExperimentSpec::from_json(manifest["spec"]);
    if (output_dir) spec.output_dir = *output_dir;
    return run_experiment(spec);
}

} // namespace spadesim
