#include "birg/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <functional>
#include <map>
#include <limits>
#include <numbers>
#include <thread>

#include "birg/io.hpp"
#include "birg/rng.hpp"
#include "birg/switching.hpp"

namespace birg {

namespace {

using nlohmann::json;

// Spectral parameters for the per-sample identity gate.
constexpr Complex kGateZ{0.9, 0.8};
constexpr Complex kWardZ{0.7, 0.31};
constexpr Complex kResolventZ2{-0.4, 0.55};

double resolvent_z_residual(const SpectralData& spec, int i, int j, Complex z1, Complex z2) {
    // G(z1) - G(z2) = (z1 - z2) G(z1) G(z2), entrywise via the eigendata.
    Complex g1 = 0.0, g2 = 0.0, prod = 0.0;
    for (int a = 0; a < spec.source_dim; ++a) {
        const double uu = spec.eigenvectors(i, a) * spec.eigenvectors(j, a);
        const Complex w1 = 1.0 / (spec.eigenvalues[a] - z1);
        const Complex w2 = 1.0 / (spec.eigenvalues[a] - z2);
        g1 += uu * w1;
        g2 += uu * w2;
        prod += uu * w1 * w2;
    }
    return std::abs(g1 - g2 - (z1 - z2) * prod);
}

void parallel_samples(long long samples, int workers,
                      const std::function<void(long long)>& body) {
    workers = std::max(1, workers);
    if (workers == 1 || samples <= 1) {
        for (long long s = 0; s < samples; ++s) body(s);
        return;
    }
    std::atomic<long long> next{0};
    std::vector<std::exception_ptr> errors(samples);
    std::vector<std::thread> pool;
    for (int t = 0; t < std::min<long long>(workers, samples); ++t) {
        pool.emplace_back([&] {
            for (;;) {
                const long long s = next.fetch_add(1);
                if (s >= samples) return;
                try {
                    body(s);
                } catch (...) {
                    errors[s] = std::current_exception();
                }
            }
        });
    }
    for (auto& th : pool) th.join();
    for (long long s = 0; s < samples; ++s)
        if (errors[s]) std::rethrow_exception(errors[s]);
}

struct RecordSink {
    const ExperimentSpec& spec;
    std::uint64_t sample_seed;
    long long sample;
    std::vector<RunRecord>* out;

    void push(const std::string& quantity, double value, const std::string& bound_name,
              double bound_value, Complex z, bool has_z = true, long long index = -1) {
        RunRecord r;
        r.experiment = spec.experiment;
        r.config = spec.config;
        r.seed = sample_seed;
        r.sample = sample;
        r.index = index;
        r.has_z = has_z;
        r.z = z;
        r.quantity = quantity;
        r.value = value;
        r.bound_name = bound_name;
        r.bound_value = bound_value;
        out->push_back(std::move(r));
    }
};

std::vector<RunRecord> gather(const ExperimentSpec& spec,
                              const std::function<void(long long, RecordSink&)>& per_sample) {
    std::vector<std::vector<RunRecord>> slots(spec.samples);
    parallel_samples(spec.samples, spec.workers, [&](long long s) {
        RecordSink sink{spec, derive_seed(spec.seed, static_cast<std::uint64_t>(s)), s, &slots[s]};
        per_sample(s, sink);
    });
    std::vector<RunRecord> records;
    for (auto& slot : slots)
        for (auto& r : slot) records.push_back(std::move(r));
    return records;
}

}  // namespace

long long ExperimentSpec::effective_chain_steps() const {
    return chain_steps > 0 ? chain_steps : 20ll * config.M * config.d_b;
}

double ExperimentSpec::effective_xi() const {
    if (xi > 0.0) return xi;
    const double log_n = std::log(static_cast<double>(config.N));
    return std::max(std::numbers::e, log_n * log_n);
}

void ExperimentSpec::validate() const {
    validate_config(config.M, config.N, config.d_b, config.d_w);
    if (samples < 1) throw ConfigError("samples must be >= 1");
    if (workers < 1) throw ConfigError("workers must be >= 1");
    if (chain_steps < 0) throw ConfigError("chain_steps must be >= 0");
    if (!(epsilon >= 0.0)) throw ConfigError("epsilon must be >= 0");
    if (!(kappa > 0.0 && kappa < 0.5)) throw ConfigError("kappa must lie in (0, 1/2)");
    if (effective_xi() < std::numbers::e) throw ConfigError("xi must be at least e");

    const bool needs_grid = experiment == "local-law" || experiment == "sce";
    if (needs_grid && z_grid.empty()) throw ConfigError(experiment + " requires a z grid");

    const double n = static_cast<double>(config.N);
    const double floor = effective_xi() * effective_xi() / n;
    const double energy_cap = std::pow(n, delta);
    for (const Complex& z : z_grid) {
        if (!(z.imag() > 0.0)) throw ConfigError("grid points must have Im z > 0");
        if (z.imag() > n) throw ConfigError("grid eta exceeds N");
        if (std::abs(z.real()) > energy_cap) throw ConfigError("grid energy exceeds N^delta");
        if (!eta_floor_override && z.imag() < floor)
            throw ConfigError("grid eta below the xi^2/N floor; set eta_floor_override");
        if (needs_grid && std::abs(z.real()) <= epsilon)
            throw ConfigError("grid energy inside the excluded window |E| <= epsilon");
    }
    for (const auto& [a, b] : intervals)
        if (!(a < b)) throw ConfigError("intervals must be ordered pairs");
}

json ExperimentSpec::to_json() const {
    json j;
    j["experiment"] = experiment;
    j["config"] = {{"M", config.M}, {"N", config.N}, {"d_b", config.d_b}, {"d_w", config.d_w}};
    j["samples"] = samples;
    j["chain_steps"] = chain_steps;
    j["seed"] = seed;
    json grid = json::array();
    for (const Complex& z : z_grid) grid.push_back({{"re", z.real()}, {"im", z.imag()}});
    j["z_grid"] = grid;
    j["epsilon"] = epsilon;
    j["delta"] = delta;
    j["xi"] = xi;
    j["eta_floor_override"] = eta_floor_override;
    j["kappa"] = kappa;
    json iv = json::array();
    for (const auto& [a, b] : intervals) iv.push_back({a, b});
    j["intervals"] = iv;
    j["workers"] = workers;
    return j;
}

ExperimentSpec ExperimentSpec::from_json(const json& j) {
    ExperimentSpec spec;
    spec.experiment = j.value("experiment", std::string{});
    const auto& c = j.at("config");
    spec.config = validate_config(c.at("M").get<long long>(), c.at("N").get<long long>(),
                                  c.at("d_b").get<long long>(), c.at("d_w").get<long long>());
    spec.samples = j.value("samples", 1ll);
    spec.chain_steps = j.value("chain_steps", 0ll);
    spec.seed = j.value("seed", 1ull);
    if (j.contains("z_grid")) {
        const auto& grid = j.at("z_grid");
        if (grid.is_object()) {
            // Product form {"E": [...], "eta": [...]}.
            for (double e : grid.at("E").get<std::vector<double>>())
                for (double eta : grid.at("eta").get<std::vector<double>>())
                    spec.z_grid.emplace_back(e, eta);
        } else {
            for (const auto& zj : grid)
                spec.z_grid.emplace_back(zj.at("re").get<double>(), zj.at("im").get<double>());
        }
    }
    spec.epsilon = j.value("epsilon", 0.05);
    spec.delta = j.value("delta", 1.0);
    spec.xi = j.value("xi", 0.0);
    spec.eta_floor_override = j.value("eta_floor_override", false);
    spec.kappa = j.value("kappa", 0.1);
    if (j.contains("intervals"))
        for (const auto& iv : j.at("intervals"))
            spec.intervals.emplace_back(iv.at(0).get<double>(), iv.at(1).get<double>());
    spec.workers = j.value("workers", 1);
    return spec;
}

double RunRecord::ratio() const {
    if (!std::isfinite(bound_value) || bound_value == 0.0)
        return std::numeric_limits<double>::quiet_NaN();
    return value / bound_value;
}

SampleBundle make_sample(const ExperimentSpec& spec, long long sample_index) {
    Rng rng(derive_seed(spec.seed, static_cast<std::uint64_t>(sample_index)));
    SampleBundle bundle{run_chain(spec.config, spec.effective_chain_steps(), rng), {}, {}, {}, {}};
    bundle.ensemble = normalize(adjacency(bundle.graph), spec.config);
    bundle.spec_X = eigendecompose(bundle.ensemble.X);
    bundle.spec_small = eigendecompose(bundle.ensemble.X_small);
    bundle.spec_large = eigendecompose(bundle.ensemble.X_large);
    return bundle;
}

void exact_identity_gate(const SampleBundle& bundle, double tol) {
    std::vector<std::string> failures;
    const auto& cfg = bundle.ensemble.config;
    const int n = cfg.M + cfg.N;

    const double res_X = bundle.spec_X.sampled_residual(bundle.ensemble.X);
    const double res_small = bundle.spec_small.sampled_residual(bundle.ensemble.X_small);
    const double res_large = bundle.spec_large.sampled_residual(bundle.ensemble.X_large);
    if (res_X > tol * n || res_small > tol * n || res_large > tol * n)
        failures.push_back("eigendecomposition residual");

    const auto corr = correspondence_check(bundle.ensemble, bundle.spec_X, bundle.spec_small,
                                           bundle.spec_large);
    for (const auto& f : corr.failures(tol)) failures.push_back("correspondence " + f);

    if (green_relations_check(bundle.spec_X, bundle.spec_small, bundle.spec_large, cfg, kGateZ) >
        tol)
        failures.push_back("green relations");

    Rng rng(0x6A7Eull, static_cast<std::uint64_t>(n));
    for (int t = 0; t < 8; ++t) {
        const int i = rng.below_int(n);
        const auto ward = ward_check(bundle.spec_X, i, kWardZ);
        if (ward.residual > 1e-9) failures.push_back("ward residual");
        if (ward.max_row_entry > 1.0 / kWardZ.imag() + 1e-9) failures.push_back("ward bound");
        const int j = rng.below_int(n);
        if (resolvent_z_residual(bundle.spec_X, i, j, kGateZ, kResolventZ2) > 1e-9)
            failures.push_back("resolvent identity");
    }

    const auto trivial = trivial_eigenpair_check(adjacency(bundle.graph), cfg);
    if (trivial.adjacency_residual > 1e-10 || trivial.centered_residual > 1e-10)
        failures.push_back("trivial eigenpair");

    if (!failures.empty()) {
        std::string msg = "exact-identity gate failed:";
        std::sort(failures.begin(), failures.end());
        failures.erase(std::unique(failures.begin(), failures.end()), failures.end());
        for (const auto& f : failures) msg += " [" + f + "]";
        throw NumericError(msg);
    }
}

std::vector<RunRecord> local_law_run(const ExperimentSpec& spec) {
    spec.validate();
    const MPParams mp = spec.mp_params();
    const ControlParams cp = ControlParams::make(spec.config.N, spec.config.d_b, spec.effective_xi());

    return gather(spec, [&](long long s, RecordSink& sink) {
        const SampleBundle bundle = make_sample(spec, s);
        exact_identity_gate(bundle);
        for (const Complex& z : spec.z_grid) {
            const StieltjesValue mv = m_variants(z, mp);
            const double xi_phi = cp.xi * cp.phi(z);
            const double f_diag = F_z(z, xi_phi, mp);
            const Complex z2 = z * z;
            const double phi_z2 = cp.phi(z2);
            const double off_printed = cp.xi * phi_z2 / std::abs(z);
            const double st_linear = std::abs(z) * F_z(z2, cp.xi * phi_z2, mp);

            const Eigen::MatrixXcd g_small = green_matrix(bundle.spec_small, z);
            double diag_dev = 0.0, off_dev = 0.0;
            for (int i = 0; i < spec.config.N; ++i) {
                diag_dev = std::max(diag_dev, std::abs(g_small(i, i) - mv.m_inf));
                for (int j = 0; j < spec.config.N; ++j)
                    if (j != i) off_dev = std::max(off_dev, std::abs(g_small(i, j)));
            }
            sink.push("max_diag_dev_Gstar", diag_dev, "F_z(xi*Phi)", f_diag, z);
            sink.push("max_offdiag_Gstar", off_dev, "xi*Phi(z^2)/|z|", off_printed, z);
            sink.push("max_offdiag_Gstar", off_dev, "xi*Phi", xi_phi, z);

            const Eigen::MatrixXcd g_large = green_matrix(bundle.spec_large, z);
            double diag_dev_plus = 0.0, off_dev_plus = 0.0;
            for (int i = 0; i < spec.config.M; ++i) {
                diag_dev_plus = std::max(diag_dev_plus, std::abs(g_large(i, i) - mv.m_inf_plus));
                for (int j = 0; j < spec.config.M; ++j)
                    if (j != i) off_dev_plus = std::max(off_dev_plus, std::abs(g_large(i, j)));
            }
            sink.push("max_diag_dev_Gstarplus", diag_dev_plus, "F_z(xi*Phi)", f_diag, z);
            sink.push("max_offdiag_Gstarplus", off_dev_plus, "xi*Phi(z^2)/|z|", off_printed, z);
            sink.push("max_offdiag_Gstarplus", off_dev_plus, "xi*Phi", xi_phi, z);

            const GreenEvaluation ev = stieltjes_all(bundle.spec_X, bundle.spec_small,
                                                     bundle.spec_large, spec.config, z);
            sink.push("abs_sstar_minus_minf", std::abs(ev.s_star - mv.m_inf), "F_z(xi*Phi)",
                      f_diag, z);
            sink.push("abs_sstarplus_minus_minfplus", std::abs(ev.s_star_plus - mv.m_inf_plus),
                      "F_z(xi*Phi)", f_diag, z);
            sink.push("abs_sb_minus_mplus", std::abs(ev.s_b - mv.m_lin_plus),
                      "|z|*F_{z^2}(xi*Phi(z^2))", st_linear, z);
            sink.push("abs_sw_minus_m", std::abs(ev.s_w - mv.m_lin),
                      "|z|*F_{z^2}(xi*Phi(z^2))", st_linear, z);
        }
    });
}

std::vector<RunRecord> delocalization_run(const ExperimentSpec& spec) {
    spec.validate();
    const double xi = spec.effective_xi();
    const double sqrt_n = std::sqrt(static_cast<double>(spec.config.N));

    return gather(spec, [&](long long s, RecordSink& sink) {
        const SampleBundle bundle = make_sample(spec, s);
        exact_identity_gate(bundle);
        double worst = 0.0;
        for (int a = 0; a < spec.config.N; ++a) {
            const auto u = bundle.spec_small.eigenvectors.col(a);
            const double stat = sqrt_n * u.cwiseAbs().maxCoeff() / (xi * u.norm());
            worst = std::max(worst, stat);
            sink.push("deloc_stat", stat, "O(1)", 1.0, Complex{}, false, a);
        }
        sink.push("deloc_stat_max", worst, "O(1)", 1.0, Complex{}, false);
    });
}

std::vector<RunRecord> rigidity_run(const ExperimentSpec& spec) {
    spec.validate();
    const MPParams mp = spec.mp_params();
    const ControlParams cp = ControlParams::make(spec.config.N, spec.config.d_b, spec.effective_xi());
    const std::vector<double> classical = classical_locations(spec.config.N, mp);
    const double bound = cp.xi * cp.xi / std::pow(cp.D(), 0.25);
    const int N = spec.config.N;
    const int lo = std::max(1, static_cast<int>(std::ceil(spec.kappa * N)));
    const int hi = std::min(N, static_cast<int>(std::floor((1.0 - spec.kappa) * N)));

    return gather(spec, [&](long long s, RecordSink& sink) {
        const SampleBundle bundle = make_sample(spec, s);
        exact_identity_gate(bundle);
        double dev = 0.0;
        for (int i = lo; i <= hi; ++i)
            dev = std::max(dev, std::abs(bundle.spec_small.eigenvalues[i - 1] - classical[i - 1]));
        sink.push("max_bulk_eig_dev", dev, "xi^2/D^{1/4}", bound, Complex{}, false);
    });
}

std::vector<RunRecord> esd_compare_run(const ExperimentSpec& spec) {
    spec.validate();
    const MPParams mp = spec.mp_params();
    const MpCdf cdf(mp);
    std::vector<std::pair<double, double>> intervals = spec.intervals;
    if (intervals.empty()) {
        const double w = (mp.lambda_plus - mp.lambda_minus) / 4.0;
        for (int k = 0; k < 4; ++k)
            intervals.emplace_back(mp.lambda_minus + k * w, mp.lambda_minus + (k + 1) * w);
    }

    return gather(spec, [&](long long s, RecordSink& sink) {
        const SampleBundle bundle = make_sample(spec, s);
        exact_identity_gate(bundle);
        std::vector<double> eigs(bundle.spec_small.eigenvalues.data(),
                                 bundle.spec_small.eigenvalues.data() + spec.config.N);
        sink.push("ks_distance", ks_distance(eigs, cdf), "none",
                  std::numeric_limits<double>::quiet_NaN(), Complex{}, false);
        for (std::size_t k = 0; k < intervals.size(); ++k) {
            const auto [a, b] = intervals[k];
            const auto lo = std::lower_bound(eigs.begin(), eigs.end(), a);
            const auto hi = std::lower_bound(eigs.begin(), eigs.end(), b);
            const double frac = static_cast<double>(hi - lo) / spec.config.N;
            const double mass = cdf.cdf(b) - cdf.cdf(a);
            sink.push("interval_count_frac", frac, "int_rho_inf", mass, Complex{}, false,
                      static_cast<long long>(k));
        }
    });
}

std::vector<RunRecord> sce_stability_run(const ExperimentSpec& spec) {
    spec.validate();
    const MPParams mp = spec.mp_params();
    const ControlParams cp = ControlParams::make(spec.config.N, spec.config.d_b, spec.effective_xi());
    const double gamma = mp.gamma;

    return gather(spec, [&](long long s, RecordSink& sink) {
        const SampleBundle bundle = make_sample(spec, s);
        exact_identity_gate(bundle);
        for (const Complex& z : spec.z_grid) {
            const GreenEvaluation ev = stieltjes_all(bundle.spec_X, bundle.spec_small,
                                                     bundle.spec_large, spec.config, z);
            const double bound = (1.0 + std::abs(z)) * cp.xi * cp.phi(z);
            const auto push_residual = [&](const char* name, Complex value) {
                sink.push(name, std::abs(value), "(1+|z|)*xi*Phi", bound, z);
            };
            push_residual("sce_residual_sb",
                          1.0 + (z + ev.s_b + (1.0 - gamma) / z) * ev.s_b);
            push_residual("sce_residual_sw",
                          1.0 + (z + gamma * ev.s_w + (gamma - 1.0) / z) * ev.s_w);
            push_residual("sce_residual_sstarplus",
                          1.0 + (z + 1.0 - gamma + z * ev.s_star_plus) * ev.s_star_plus);
            push_residual("sce_residual_sstar",
                          1.0 + (z + gamma - 1.0 + gamma * z * ev.s_star) * ev.s_star);
            const StabilityGap gap = stability_gap(ev.s_star, z, mp);
            sink.push("stability_gap", gap.gap, "F_z(|R|/(1+|z|))", gap.bound, z);
        }
    });
}

std::vector<RunRecord> run_experiment(const ExperimentSpec& spec) {
    if (spec.experiment == "local-law") return local_law_run(spec);
    if (spec.experiment == "delocalization") return delocalization_run(spec);
    if (spec.experiment == "rigidity") return rigidity_run(spec);
    if (spec.experiment == "esd") return esd_compare_run(spec);
    if (spec.experiment == "sce") return sce_stability_run(spec);
    throw ConfigError("unknown experiment: " + spec.experiment);
}

double ks_distance(const std::vector<double>& ascending, const MpCdf& cdf) {
    const auto n = static_cast<double>(ascending.size());
    double ks = 0.0;
    for (std::size_t i = 0; i < ascending.size(); ++i) {
        const double f = cdf.cdf(ascending[i]);
        ks = std::max(ks, std::abs((i + 1) / n - f));
        ks = std::max(ks, std::abs(i / n - f));
    }
    return ks;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
    CsvBuilder csv({"experiment", "M", "N", "d_b", "d_w", "seed", "sample", "idx", "re_z", "im_z",
                    "quantity", "value", "bound_name", "bound_value", "ratio"});
    const double nan = std::numeric_limits<double>::quiet_NaN();
    for (const auto& r : records) {
        csv.field(r.experiment)
            .field(static_cast<long long>(r.config.M))
            .field(static_cast<long long>(r.config.N))
            .field(static_cast<long long>(r.config.d_b))
            .field(static_cast<long long>(r.config.d_w))
            .field(r.seed)
            .field(r.sample)
            .field(r.index)
            .field(r.has_z ? r.z.real() : nan)
            .field(r.has_z ? r.z.imag() : nan)
            .field(r.quantity)
            .field(r.value)
            .field(r.bound_name)
            .field(r.bound_value)
            .field(r.ratio());
        csv.endrow();
    }
    return csv.str();
}

nlohmann::json records_summary(const std::vector<RunRecord>& records) {
    struct Cell {
        std::vector<double> values, ratios;
        json meta;
    };
    std::map<std::string, Cell> cells;
    for (const auto& r : records) {
        const std::string key = r.quantity + "|" + r.bound_name + "|" +
                                (r.has_z ? format_double(r.z.real()) + "," + format_double(r.z.imag())
                                         : std::string("-"));
        auto& cell = cells[key];
        if (cell.meta.empty()) {
            cell.meta["quantity"] = r.quantity;
            cell.meta["bound"] = r.bound_name;
            if (r.has_z) {
                cell.meta["re_z"] = r.z.real();
                cell.meta["im_z"] = r.z.imag();
            }
        }
        cell.values.push_back(r.value);
        const double ratio = r.ratio();
        if (std::isfinite(ratio)) cell.ratios.push_back(ratio);
    }

    auto median = [](std::vector<double> v) {
        if (v.empty()) return std::numeric_limits<double>::quiet_NaN();
        std::sort(v.begin(), v.end());
        const std::size_t n = v.size();
        return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
    };

    json out = json::array();
    for (auto& [key, cell] : cells) {
        json item = cell.meta;
        item["count"] = cell.values.size();
        item["median_value"] = median(cell.values);
        item["max_value"] = *std::max_element(cell.values.begin(), cell.values.end());
        item["median_ratio"] = median(cell.ratios);
        item["max_ratio"] = cell.ratios.empty()
                                ? std::numeric_limits<double>::quiet_NaN()
                                : *std::max_element(cell.ratios.begin(), cell.ratios.end());
        out.push_back(std::move(item));
    }
    return out;
}

}  // namespace birg
