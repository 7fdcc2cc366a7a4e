// Command-line front door: sample graphs, dump spectra and transforms, and
// dispatch Monte Carlo experiments. Every run writes a manifest echoing the
// fully resolved specification; re-running a manifest reproduces the CSVs
// byte for byte.

#include <chrono>
#include <cmath>
#include <complex>
#include <cstdlib>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <thread>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "birg/experiments.hpp"
#include "birg/graph.hpp"
#include "birg/io.hpp"
#include "birg/mp_law.hpp"
#include "birg/rng.hpp"
#include "birg/spectral.hpp"
#include "birg/switching.hpp"
#include "birg/version.hpp"

namespace {

using birg::Complex;
using nlohmann::json;

constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;
constexpr int kExitGuard = 4;

struct Common {
    std::string out = "out";
    std::string config_path;
    std::optional<std::uint64_t> seed_flag;
    int workers = 0;  // 0: hardware concurrency
    std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();

    // Precedence: config < SEED env < --seed flag. `source` arrives labeled
    // by the caller ("default" or "config") and is upgraded here.
    std::uint64_t resolve_seed(std::uint64_t from_config, std::string& source) const {
        std::uint64_t seed = from_config;
        if (const char* env = std::getenv("SEED")) {
            seed = std::strtoull(env, nullptr, 10);
            source = "env";
        }
        if (seed_flag) {
            seed = *seed_flag;
            source = "flag";
        }
        return seed;
    }

    int effective_workers() const {
        if (workers > 0) return workers;
        const unsigned hw = std::thread::hardware_concurrency();
        return hw == 0 ? 1 : static_cast<int>(hw);
    }

    double wall_time() const {
        return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    }
};

void add_common(CLI::App* cmd, Common& common) {
    cmd->add_option("--out", common.out, "output directory");
    cmd->add_option("--config", common.config_path, "JSON spec (or manifest) to load");
    cmd->add_option("--seed", common.seed_flag, "master seed (overrides config and SEED env)");
    cmd->add_option("--workers", common.workers, "worker threads (0 = hardware)");
}

struct ConfigOpts {
    std::optional<long long> M, N, d_b, d_w;
    std::optional<double> gamma;
};

void add_config_opts(CLI::App* cmd, ConfigOpts& opts) {
    cmd->add_option("--M", opts.M, "black vertex count");
    cmd->add_option("--N", opts.N, "white vertex count");
    cmd->add_option("--d_b", opts.d_b, "black degree");
    cmd->add_option("--d_w", opts.d_w, "white degree");
    cmd->add_option("--gamma", opts.gamma, "aspect ratio N/M (with --N and --d_b)");
}

// Builds a configuration from explicit sides or from (gamma, N, d_b).
birg::GraphConfig resolve_config(const ConfigOpts& opts,
                                 const std::optional<birg::GraphConfig>& base) {
    long long M = base ? base->M : 0, N = base ? base->N : 0;
    long long d_b = base ? base->d_b : 0, d_w = base ? base->d_w : 0;
    if (opts.N) N = *opts.N;
    if (opts.M) M = *opts.M;
    if (opts.d_b) d_b = *opts.d_b;
    if (opts.d_w) d_w = *opts.d_w;
    if (opts.gamma) {
        if (N == 0 || d_b == 0)
            throw birg::ConfigError("--gamma requires --N and --d_b");
        const double m_real = static_cast<double>(N) / *opts.gamma;
        M = std::llround(m_real);
        if (std::abs(m_real - static_cast<double>(M)) > 1e-9)
            throw birg::ConfigError("N/gamma is not an integer");
        d_w = 0;
    }
    if (M > 0 && N > 0 && d_b > 0 && d_w == 0) {
        if ((M * d_b) % N != 0) throw birg::ConfigError("M*d_b/N is not an integer");
        d_w = M * d_b / N;
    }
    return birg::validate_config(M, N, d_b, d_w);
}

std::filesystem::path prepare_out(const Common& common) {
    std::filesystem::path dir(common.out);
    std::filesystem::create_directories(dir);
    return dir;
}

json load_config_json(const std::string& path) {
    json j = json::parse(birg::read_text_file(path));
    // A manifest is accepted in place of a spec: rerun what it resolved.
    if (j.contains("resolved_spec")) return j.at("resolved_spec");
    return j;
}

std::vector<Complex> product_grid(const std::vector<double>& energies,
                                  const std::vector<double>& etas) {
    std::vector<Complex> grid;
    for (double e : energies)
        for (double eta : etas) grid.emplace_back(e, eta);
    return grid;
}

std::vector<double> linspace(double lo, double hi, int count) {
    std::vector<double> out;
    if (count == 1) return {lo};
    for (int i = 0; i < count; ++i) out.push_back(lo + (hi - lo) * i / (count - 1));
    return out;
}

std::vector<double> logspace(double lo, double hi, int count) {
    std::vector<double> out;
    if (count == 1) return {lo};
    const double llo = std::log(lo), lhi = std::log(hi);
    for (int i = 0; i < count; ++i) out.push_back(std::exp(llo + (lhi - llo) * i / (count - 1)));
    return out;
}

// ---------------------------------------------------------------------------

int cmd_sample(const Common& common, const birg::GraphConfig& config, long long steps,
               std::uint64_t seed, const std::string& seed_source) {
    const auto dir = prepare_out(common);
    birg::Rng rng(seed);
    const auto graph =
        birg::run_chain(config, steps >= 0 ? steps : 20ll * config.M * config.d_b, rng);
    const auto graph_path = (dir / "graph.json").string();
    birg::write_text_file(graph_path, graph.to_json() + "\n");

    birg::Manifest manifest;
    manifest.subcommand = "sample";
    manifest.resolved_spec = {{"M", config.M},
                              {"N", config.N},
                              {"d_b", config.d_b},
                              {"d_w", config.d_w},
                              {"steps", steps >= 0 ? steps : 20ll * config.M * config.d_b}};
    manifest.outputs = {"graph.json"};
    manifest.seed = seed;
    manifest.seed_source = seed_source;
    manifest.wall_time_s = common.wall_time();
    birg::write_manifest((dir / "manifest.json").string(), manifest);
    std::cout << "wrote " << graph_path << "\n";
    return 0;
}

int cmd_spectrum(const Common& common, const birg::GraphConfig& config, long long steps,
                 std::uint64_t seed, const std::string& seed_source,
                 const std::vector<double>& energies, const std::vector<double>& etas) {
    const auto dir = prepare_out(common);
    birg::Rng rng(seed);
    const auto graph =
        birg::run_chain(config, steps >= 0 ? steps : 20ll * config.M * config.d_b, rng);
    const auto ensemble = birg::normalize(birg::adjacency(graph), config);
    const auto spec_X = birg::eigendecompose(ensemble.X);
    const auto spec_small = birg::eigendecompose(ensemble.X_small);
    const auto spec_large = birg::eigendecompose(ensemble.X_large);

    birg::CsvBuilder spectrum({"index", "eigenvalue"});
    for (int i = 0; i < spec_small.source_dim; ++i) {
        spectrum.field(static_cast<long long>(i)).field(spec_small.eigenvalues[i]);
        spectrum.endrow();
    }
    birg::write_text_file((dir / "spectrum.csv").string(), spectrum.str());

    birg::CsvBuilder green({"re_z", "im_z", "re_s_star", "im_s_star", "re_s_b", "im_s_b", "re_s_w",
                            "im_s_w", "gamma_max"});
    for (const Complex& z : product_grid(energies, etas)) {
        const auto ev = birg::stieltjes_all(spec_X, spec_small, spec_large, config, z);
        const auto gm = birg::gamma_max(spec_X, z, {});
        green.field(z.real())
            .field(z.imag())
            .field(ev.s_star.real())
            .field(ev.s_star.imag())
            .field(ev.s_b.real())
            .field(ev.s_b.imag())
            .field(ev.s_w.real())
            .field(ev.s_w.imag())
            .field(gm.gamma);
        green.endrow();
    }
    birg::write_text_file((dir / "green.csv").string(), green.str());

    birg::Manifest manifest;
    manifest.subcommand = "spectrum";
    manifest.resolved_spec = {{"M", config.M}, {"N", config.N},     {"d_b", config.d_b},
                              {"d_w", config.d_w}, {"steps", steps}, {"E", energies},
                              {"eta", etas}};
    manifest.outputs = {"spectrum.csv", "green.csv"};
    manifest.seed = seed;
    manifest.seed_source = seed_source;
    manifest.wall_time_s = common.wall_time();
    birg::write_manifest((dir / "manifest.json").string(), manifest);
    return 0;
}

int cmd_mp_eval(const Common& common, double gamma, const std::string& grid_name,
                int locations) {
    const auto dir = prepare_out(common);
    const auto p = birg::MPParams::from_gamma(gamma);

    const bool dense = grid_name == "dense";
    const auto energies = linspace(-1.0, 5.0, dense ? 61 : 25);
    const auto etas = logspace(0.01, 10.0, dense ? 25 : 12);
    birg::CsvBuilder tf({"re_z", "im_z", "re_m_inf", "im_m_inf", "re_m_inf_plus", "im_m_inf_plus",
                         "re_m_lin", "im_m_lin", "re_m_lin_plus", "im_m_lin_plus"});
    for (const Complex& z : product_grid(energies, etas)) {
        const auto v = birg::m_variants(z, p);
        tf.field(z.real())
            .field(z.imag())
            .field(v.m_inf.real())
            .field(v.m_inf.imag())
            .field(v.m_inf_plus.real())
            .field(v.m_inf_plus.imag())
            .field(v.m_lin.real())
            .field(v.m_lin.imag())
            .field(v.m_lin_plus.real())
            .field(v.m_lin_plus.imag());
        tf.endrow();
    }
    birg::write_text_file((dir / "mp_transforms.csv").string(), tf.str());

    birg::CsvBuilder density({"x", "rho_mp", "E", "rho_linear"});
    const double margin = 0.25;
    const auto xs = linspace(std::max(0.0, p.lambda_minus - margin), p.lambda_plus + margin, 401);
    const auto es = linspace(-std::sqrt(p.lambda_plus) - margin, std::sqrt(p.lambda_plus) + margin, 401);
    for (int i = 0; i < 401; ++i) {
        density.field(xs[i])
            .field(birg::rho_mp(xs[i], p))
            .field(es[i])
            .field(birg::rho_linear(es[i], p));
        density.endrow();
    }
    birg::write_text_file((dir / "mp_density.csv").string(), density.str());

    std::vector<std::string> outputs = {"mp_transforms.csv", "mp_density.csv"};
    if (locations > 0) {
        birg::CsvBuilder loc({"i", "gamma_i"});
        const auto values = birg::classical_locations(locations, p);
        for (int i = 1; i <= locations; ++i) {
            loc.field(static_cast<long long>(i)).field(values[i - 1]);
            loc.endrow();
        }
        birg::write_text_file((dir / "classical_locations.csv").string(), loc.str());
        outputs.push_back("classical_locations.csv");
    }

    birg::Manifest manifest;
    manifest.subcommand = "mp-eval";
    manifest.resolved_spec = {{"gamma", gamma}, {"grid", grid_name}, {"locations", locations}};
    manifest.outputs = outputs;
    manifest.seed = 0;
    manifest.seed_source = "default";
    manifest.wall_time_s = common.wall_time();
    birg::write_manifest((dir / "manifest.json").string(), manifest);
    return 0;
}

int cmd_uniformity(const Common& common, const birg::GraphConfig& config, long long steps,
                   long long samples, std::uint64_t seed, const std::string& seed_source) {
    const auto dir = prepare_out(common);
    const auto report =
        birg::uniformity_report(config, steps, samples, seed, common.effective_workers());

    birg::CsvBuilder csv({"M", "N", "d_b", "d_w", "steps", "samples", "tv_distance", "oracle_size",
                          "tv_p_edges", "tv_q_edges"});
    csv.field(static_cast<long long>(config.M))
        .field(static_cast<long long>(config.N))
        .field(static_cast<long long>(config.d_b))
        .field(static_cast<long long>(config.d_w))
        .field(report.chain_steps)
        .field(report.samples)
        .field(report.tv_distance)
        .field(static_cast<long long>(report.oracle_size))
        .field(report.tv_p_edges)
        .field(report.tv_q_edges);
    csv.endrow();
    birg::write_text_file((dir / "uniformity.csv").string(), csv.str());

    birg::Manifest manifest;
    manifest.subcommand = "uniformity";
    manifest.resolved_spec = {{"M", config.M}, {"N", config.N},       {"d_b", config.d_b},
                              {"d_w", config.d_w}, {"steps", steps}, {"samples", samples}};
    manifest.outputs = {"uniformity.csv"};
    manifest.seed = seed;
    manifest.seed_source = seed_source;
    manifest.wall_time_s = common.wall_time();
    birg::write_manifest((dir / "manifest.json").string(), manifest);
    std::cout << "tv_distance = " << birg::format_double(report.tv_distance) << " over "
              << report.oracle_size << " states\n";
    return 0;
}

int cmd_identities(const Common& common, const birg::GraphConfig& config, std::uint64_t seed,
                   const std::string& seed_source) {
    const auto dir = prepare_out(common);
    birg::ExperimentSpec spec;
    spec.experiment = "identities";
    spec.config = config;
    spec.seed = seed;
    const auto bundle = birg::make_sample(spec, 0);

    const auto corr = birg::correspondence_check(bundle.ensemble, bundle.spec_X, bundle.spec_small,
                                                 bundle.spec_large);
    const auto trivial = birg::trivial_eigenpair_check(birg::adjacency(bundle.graph), config);
    const Complex z{1.0, 1.0};
    const auto ward = birg::ward_check(bundle.spec_X, 0, z);
    const double relations =
        birg::green_relations_check(bundle.spec_X, bundle.spec_small, bundle.spec_large, config, z);

    struct Line {
        const char* name;
        double residual;
        double tol;
    };
    const Line lines[] = {
        {"spectrum_correspondence_X", corr.dev_spectrum_X, 1e-8},
        {"spectrum_correspondence_large", corr.dev_spectrum_large, 1e-8},
        {"pair_norm_split", corr.dev_pair_norm_split, 1e-8},
        {"pair_eigvec", corr.dev_pair_eigvec, 1e-8},
        {"kernel_black", corr.dev_kernel_black, 1e-8},
        {"kernel_white", corr.dev_kernel_white, 1e-8},
        {"kernel_embed", corr.dev_kernel_embed, 1e-8},
        {"ward_residual", ward.residual, 1e-9},
        {"green_relations", relations, 1e-8},
        {"trivial_eigenpair_adjacency", trivial.adjacency_residual, 1e-10},
        {"trivial_eigenpair_centered", trivial.centered_residual, 1e-10},
    };

    birg::CsvBuilder csv({"check", "residual", "tolerance", "pass"});
    bool all_pass = corr.kernel_dims_match;
    std::cout << (corr.kernel_dims_match ? "PASS " : "FAIL ") << "kernel_dims" << "\n";
    for (const auto& line : lines) {
        const bool pass = line.residual <= line.tol;
        all_pass = all_pass && pass;
        csv.field(std::string(line.name))
            .field(line.residual)
            .field(line.tol)
            .field(std::string(pass ? "1" : "0"));
        csv.endrow();
        std::cout << (pass ? "PASS " : "FAIL ") << line.name << " residual "
                  << birg::format_double(line.residual) << "\n";
    }
    birg::write_text_file((dir / "identities.csv").string(), csv.str());

    birg::Manifest manifest;
    manifest.subcommand = "identities";
    manifest.resolved_spec = {{"M", config.M}, {"N", config.N}, {"d_b", config.d_b},
                              {"d_w", config.d_w}};
    manifest.outputs = {"identities.csv"};
    manifest.seed = seed;
    manifest.seed_source = seed_source;
    manifest.wall_time_s = common.wall_time();
    birg::write_manifest((dir / "manifest.json").string(), manifest);

    if (!all_pass) {
        std::cerr << "identity checks failed\n";
        return kExitNumeric;
    }
    return 0;
}

int cmd_experiment(const Common& common, birg::ExperimentSpec spec,
                   const std::string& seed_source) {
    const auto dir = prepare_out(common);
    spec.workers = common.effective_workers();
    // Resolve defaults now so the manifest pins them.
    spec.chain_steps = spec.effective_chain_steps();
    spec.xi = spec.effective_xi();
    spec.validate();

    const auto records = birg::run_experiment(spec);
    const std::string csv_name = spec.experiment + ".csv";
    birg::write_text_file((dir / csv_name).string(), birg::records_to_csv(records));
    birg::write_text_file((dir / "summary.json").string(),
                          birg::records_summary(records).dump(2) + "\n");

    birg::Manifest manifest;
    manifest.subcommand = spec.experiment;
    manifest.resolved_spec = spec.to_json();
    manifest.outputs = {csv_name, "summary.json"};
    manifest.seed = spec.seed;
    manifest.seed_source = seed_source;
    manifest.wall_time_s = common.wall_time();
    birg::write_manifest((dir / "manifest.json").string(), manifest);
    std::cout << "wrote " << records.size() << " records to " << (dir / csv_name).string() << "\n";
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Biregular bipartite graph spectra laboratory"};
    app.set_version_flag("--version", birg::kVersion);
    app.require_subcommand(1);

    Common common;

    // sample ----------------------------------------------------------------
    auto* sample = app.add_subcommand("sample", "sample one graph via the switching chain");
    ConfigOpts sample_cfg;
    long long sample_steps = -1;
    add_common(sample, common);
    add_config_opts(sample, sample_cfg);
    sample->add_option("--steps", sample_steps, "chain moves (default 20*M*d_b)");

    // spectrum ---------------------------------------------------------------
    auto* spectrum = app.add_subcommand("spectrum", "eigenvalues and Green evaluations of a sample");
    ConfigOpts spectrum_cfg;
    long long spectrum_steps = -1;
    std::vector<double> spec_E = {0.5, 1.0, 1.5, 2.0, 2.5};
    std::vector<double> spec_eta = {0.05, 0.2, 1.0};
    add_common(spectrum, common);
    add_config_opts(spectrum, spectrum_cfg);
    spectrum->add_option("--steps", spectrum_steps, "chain moves (default 20*M*d_b)");
    spectrum->add_option("--E", spec_E, "grid energies");
    spectrum->add_option("--eta", spec_eta, "grid scales");

    // mp-eval ----------------------------------------------------------------
    auto* mp_eval = app.add_subcommand("mp-eval", "closed-form MP transforms and densities");
    double gamma = 1.0;
    int locations = 0;
    std::string mp_grid = "default";
    add_common(mp_eval, common);
    mp_eval->add_option("--gamma", gamma, "aspect ratio in (0,1]")->required();
    mp_eval->add_option("--grid", mp_grid, "transform grid name")
        ->check(CLI::IsMember({"default", "dense"}));
    mp_eval->add_option("--locations", locations, "also write N classical locations");

    // uniformity ---------------------------------------------------------------
    auto* uniformity = app.add_subcommand("uniformity", "chain law vs enumeration oracle");
    ConfigOpts uni_cfg;
    long long uni_steps = 1000, uni_samples = 10000;
    add_common(uniformity, common);
    add_config_opts(uniformity, uni_cfg);
    uniformity->add_option("--steps", uni_steps, "chain moves per sample");
    uniformity->add_option("--samples", uni_samples, "independent chains");

    // identities ---------------------------------------------------------------
    auto* identities = app.add_subcommand("identities", "exact spectral identity suite on a sample");
    ConfigOpts id_cfg;
    add_common(identities, common);
    add_config_opts(identities, id_cfg);

    // experiments ---------------------------------------------------------------
    struct ExpCli {
        CLI::App* cmd;
        ConfigOpts cfg;
        std::optional<long long> samples, steps;
        std::vector<double> E, eta;
    };
    std::vector<std::string> experiment_names = {"local-law", "delocalization", "rigidity", "esd",
                                                 "sce"};
    std::vector<ExpCli> experiments(experiment_names.size());
    for (std::size_t i = 0; i < experiment_names.size(); ++i) {
        auto& exp = experiments[i];
        exp.cmd = app.add_subcommand(experiment_names[i], experiment_names[i] + " experiment");
        add_common(exp.cmd, common);
        add_config_opts(exp.cmd, exp.cfg);
        exp.cmd->add_option("--samples", exp.samples, "Monte Carlo samples");
        exp.cmd->add_option("--steps", exp.steps, "chain moves per sample");
        exp.cmd->add_option("--E", exp.E, "grid energies");
        exp.cmd->add_option("--eta", exp.eta, "grid scales");
    }

    CLI11_PARSE(app, argc, argv);

    try {
        if (*sample || *spectrum || *uniformity || *identities) {
            std::optional<birg::GraphConfig> base;
            std::uint64_t config_seed = 1;
            if (!common.config_path.empty()) {
                const json j = load_config_json(common.config_path);
                if (j.contains("config")) {
                    const auto& c = j.at("config");
                    base = birg::validate_config(c.at("M").get<long long>(),
                                                 c.at("N").get<long long>(),
                                                 c.at("d_b").get<long long>(),
                                                 c.at("d_w").get<long long>());
                }
                config_seed = j.value("seed", 1ull);
            }
            std::string seed_source = common.config_path.empty() ? "default" : "config";
            std::uint64_t seed = common.resolve_seed(config_seed, seed_source);

            if (*sample)
                return cmd_sample(common, resolve_config(sample_cfg, base), sample_steps, seed,
                                  seed_source);
            if (*spectrum)
                return cmd_spectrum(common, resolve_config(spectrum_cfg, base), spectrum_steps,
                                    seed, seed_source, spec_E, spec_eta);
            if (*uniformity)
                return cmd_uniformity(common, resolve_config(uni_cfg, base), uni_steps,
                                      uni_samples, seed, seed_source);
            return cmd_identities(common, resolve_config(id_cfg, base), seed, seed_source);
        }

        if (*mp_eval) return cmd_mp_eval(common, gamma, mp_grid, locations);

        for (std::size_t i = 0; i < experiments.size(); ++i) {
            auto& exp = experiments[i];
            if (!*exp.cmd) continue;
            birg::ExperimentSpec spec;
            if (!common.config_path.empty())
                spec = birg::ExperimentSpec::from_json(load_config_json(common.config_path));
            spec.experiment = experiment_names[i];
            std::optional<birg::GraphConfig> base;
            if (spec.config.M > 0) base = spec.config;
            if (exp.cfg.M || exp.cfg.N || exp.cfg.d_b || exp.cfg.d_w || exp.cfg.gamma || !base)
                spec.config = resolve_config(exp.cfg, base);
            if (exp.samples) spec.samples = *exp.samples;
            if (exp.steps) spec.chain_steps = *exp.steps;
            if (!exp.E.empty() || !exp.eta.empty()) {
                const auto energies = exp.E.empty() ? linspace(0.5, 2.5, 6) : exp.E;
                const auto etas = exp.eta.empty()
                                      ? std::vector<double>{std::pow(spec.config.N, -0.25),
                                                            std::pow(spec.config.N, -0.5)}
                                      : exp.eta;
                spec.z_grid = product_grid(energies, etas);
                spec.eta_floor_override = true;
            }
            if (spec.z_grid.empty() &&
                (spec.experiment == "local-law" || spec.experiment == "sce")) {
                spec.z_grid = product_grid(linspace(0.5, 2.5, 6),
                                           {std::pow(spec.config.N, -0.25),
                                            std::pow(spec.config.N, -0.5)});
                spec.eta_floor_override = true;
            }
            std::string seed_source = common.config_path.empty() ? "default" : "config";
            spec.seed = common.resolve_seed(spec.seed, seed_source);
            return cmd_experiment(common, std::move(spec), seed_source);
        }
        std::cerr << "no subcommand\n";
        return 1;
    } catch (const birg::TooLarge& e) {
        std::cerr << "guard exceeded: " << e.what() << "\n";
        return kExitGuard;
    } catch (const birg::ConfigError& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "invalid configuration: " << e.what() << "\n";
        return kExitConfig;
    } catch (const birg::NumericError& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const birg::DegenerateGraph& e) {
        std::cerr << "numeric failure: " << e.what() << "\n";
        return kExitNumeric;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
}
