#include <doctest.h>

#include <cmath>
#include <complex>
#include <vector>

#include "birg/experiments.hpp"
#include "birg/graph.hpp"
#include "birg/io.hpp"
#include "birg/mp_law.hpp"

using namespace birg;

namespace {

ExperimentSpec base_spec() {
    ExperimentSpec spec;
    spec.experiment = "local-law";
    spec.config = validate_config(40, 20, 3, 6);
    spec.samples = 2;
    spec.seed = 7;
    spec.z_grid = {Complex{1.0, 0.3}, Complex{1.5, 0.5}};
    spec.eta_floor_override = true;  // xi^2/N ~ 4 at N = 20
    return spec;
}

const RunRecord& find_record(const std::vector<RunRecord>& records, const std::string& quantity,
                             long long sample, Complex z) {
    for (const auto& r : records)
        if (r.quantity == quantity && r.sample == sample && r.has_z && std::abs(r.z - z) < 1e-12)
            return r;
    REQUIRE(false);
    return records.front();
}

}  // namespace

TEST_CASE("ExperimentSpec JSON round-trip and grid product form") {
    auto spec = base_spec();
    spec.intervals = {{0.1, 0.5}, {0.5, 1.2}};
    const auto j = spec.to_json();
    const auto back = ExperimentSpec::from_json(j);
    CHECK(back.config == spec.config);
    CHECK(back.samples == spec.samples);
    CHECK(back.z_grid.size() == spec.z_grid.size());
    CHECK(back.intervals == spec.intervals);
    CHECK(back.eta_floor_override == spec.eta_floor_override);

    const auto product = ExperimentSpec::from_json(nlohmann::json::parse(R"({
        "experiment": "sce",
        "config": {"M": 40, "N": 20, "d_b": 3, "d_w": 6},
        "z_grid": {"E": [0.5, 1.0], "eta": [0.1, 0.2, 0.4]},
        "eta_floor_override": true
    })"));
    CHECK(product.z_grid.size() == 6);
    CHECK(product.z_grid.front() == Complex{0.5, 0.1});
}

TEST_CASE("ExperimentSpec validation rejects bad grids") {
    auto spec = base_spec();
    spec.eta_floor_override = false;
    CHECK_THROWS_AS(spec.validate(), ConfigError);  // below the xi^2/N floor

    spec = base_spec();
    spec.z_grid.push_back(Complex{0.01, 0.3});  // inside |E| <= epsilon
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = base_spec();
    spec.z_grid.push_back(Complex{1.0, -0.1});
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = base_spec();
    spec.kappa = 0.7;
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    spec = base_spec();
    spec.experiment = "sce";
    spec.z_grid.clear();
    CHECK_THROWS_AS(spec.validate(), ConfigError);

    // Defaults: burn-in and xi.
    spec = base_spec();
    CHECK(spec.effective_chain_steps() == 20ll * 40 * 3);
    CHECK(spec.effective_xi() == doctest::Approx(std::log(20.0) * std::log(20.0)));
}

TEST_CASE("make_sample passes the exact-identity gate") {
    const auto spec = base_spec();
    for (long long s = 0; s < 2; ++s) {
        const auto bundle = make_sample(spec, s);
        CHECK_NOTHROW(exact_identity_gate(bundle));
    }
}

TEST_CASE("local_law_run emits the documented record set deterministically") {
    const auto spec = base_spec();
    const auto records = local_law_run(spec);

    // 10 records per (sample, z): diag plus doubly-normalized offdiag for
    // both covariances, then four averaged statistics.
    CHECK(records.size() == 2 * 2 * 10);
    for (const auto& r : records) {
        CHECK(!r.bound_name.empty());
        CHECK(std::isfinite(r.value));
    }

    const auto csv = records_to_csv(records);
    const auto again = records_to_csv(local_law_run(spec));
    CHECK(csv == again);

    auto parallel = spec;
    parallel.workers = 3;
    CHECK(records_to_csv(local_law_run(parallel)) == csv);

    // Different seed, different sampled graphs, different numbers.
    auto other = spec;
    other.seed = 8;
    CHECK(records_to_csv(local_law_run(other)) != csv);
}

TEST_CASE("local_law_run on the degenerate complete bipartite sanity path") {
    // K_{2,2} linearizes to H = 0: G_* = -1/z and the diagonal deviation is
    // |m_inf(z) + 1/z| exactly, for every sample.
    ExperimentSpec spec;
    spec.experiment = "local-law";
    spec.config = validate_config(2, 2, 2, 2);
    spec.samples = 1;
    spec.seed = 3;
    spec.z_grid = {Complex{1.0, 0.8}};
    spec.eta_floor_override = true;
    const auto records = local_law_run(spec);
    const auto& diag = find_record(records, "max_diag_dev_Gstar", 0, spec.z_grid[0]);
    const auto p = MPParams::from_gamma(1.0);
    const Complex expected = m_inf(spec.z_grid[0], p) + 1.0 / spec.z_grid[0];
    CHECK(diag.value == doctest::Approx(std::abs(expected)).epsilon(1e-12));

    const auto& off = find_record(records, "max_offdiag_Gstar", 0, spec.z_grid[0]);
    CHECK(off.value == doctest::Approx(0.0));
}

TEST_CASE("delocalization_run: single-coordinate edge case and bounds") {
    ExperimentSpec spec;
    spec.experiment = "delocalization";
    spec.config = validate_config(4, 1, 1, 4);
    spec.samples = 1;
    spec.seed = 5;
    const auto records = delocalization_run(spec);
    REQUIRE(records.size() == 2);  // one eigenvector + the per-sample max
    const double xi = spec.effective_xi();
    CHECK(records[0].value == doctest::Approx(1.0 / xi));
    CHECK(records[1].quantity == "deloc_stat_max");
    CHECK(records[1].value == doctest::Approx(1.0 / xi));

    spec.config = validate_config(40, 20, 3, 6);
    const auto wide = delocalization_run(spec);
    CHECK(wide.size() == 20 + 1);
    for (const auto& r : wide) CHECK(std::isfinite(r.value));
}

TEST_CASE("rigidity_run emits per-sample bulk deviations with the printed bound") {
    ExperimentSpec spec;
    spec.experiment = "rigidity";
    spec.config = validate_config(2, 2, 1, 1);
    spec.samples = 2;
    spec.seed = 5;
    spec.kappa = 0.25;
    const auto toy = rigidity_run(spec);
    CHECK(toy.size() == 2);
    for (const auto& r : toy) {
        CHECK(r.quantity == "max_bulk_eig_dev");
        CHECK(r.bound_name == "xi^2/D^{1/4}");
        CHECK(std::isfinite(r.value));
        const ControlParams cp = ControlParams::make(2, 1, spec.effective_xi());
        CHECK(r.bound_value == doctest::Approx(cp.xi * cp.xi / std::pow(cp.D(), 0.25)));
    }

    spec.config = validate_config(40, 20, 3, 6);
    spec.kappa = 0.1;
    const auto wide = rigidity_run(spec);
    CHECK(wide.size() == 2);
    for (const auto& r : wide) CHECK(r.value < 2.0);
}

TEST_CASE("esd_compare_run: point-mass degenerate case and interval bookkeeping") {
    ExperimentSpec spec;
    spec.experiment = "esd";
    spec.config = validate_config(2, 2, 2, 2);
    spec.samples = 1;
    spec.seed = 2;
    const auto records = esd_compare_run(spec);
    // H = 0: the spectrum is a point mass at zero, so KS = 1 - F(0) = 1.
    REQUIRE(records.size() >= 1);
    CHECK(records[0].quantity == "ks_distance");
    CHECK(records[0].value == doctest::Approx(1.0));

    // Interval fractions against the MP mass, 4 quarters by default.
    CHECK(records.size() == 1 + 4);
    double total_mass = 0.0;
    for (std::size_t k = 1; k < records.size(); ++k) {
        CHECK(records[k].quantity == "interval_count_frac");
        CHECK(records[k].bound_name == "int_rho_inf");
        total_mass += records[k].bound_value;
    }
    CHECK(total_mass == doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("ks_distance is 1/N when the sample sits at the classical locations") {
    const auto p = MPParams::from_gamma(0.5);
    const MpCdf cdf(p);
    const int n = 50;
    const auto locations = classical_locations(n, p);
    CHECK(ks_distance(locations, cdf) == doctest::Approx(1.0 / n).epsilon(1e-7));
}

TEST_CASE("sce_stability_run emits the four residuals and the stability gap") {
    ExperimentSpec spec;
    spec.experiment = "sce";
    spec.config = validate_config(40, 20, 3, 6);
    spec.samples = 1;
    spec.seed = 11;
    spec.z_grid = {Complex{1.0, 0.5}};
    spec.eta_floor_override = true;
    const auto records = sce_stability_run(spec);
    CHECK(records.size() == 5);
    std::vector<std::string> expected{"sce_residual_sb", "sce_residual_sw",
                                      "sce_residual_sstarplus", "sce_residual_sstar",
                                      "stability_gap"};
    for (std::size_t i = 0; i < expected.size(); ++i) {
        CHECK(records[i].quantity == expected[i]);
        CHECK(std::isfinite(records[i].value));
        CHECK(std::isfinite(records[i].bound_value));
    }
}

TEST_CASE("run_experiment dispatches and rejects unknown names") {
    auto spec = base_spec();
    spec.experiment = "nope";
    CHECK_THROWS_AS(run_experiment(spec), ConfigError);
    spec.experiment = "local-law";
    CHECK(!run_experiment(spec).empty());
}

TEST_CASE("records CSV layout and summary shape") {
    const auto records = local_law_run(base_spec());
    const auto csv = records_to_csv(records);
    CHECK(csv.rfind("experiment,M,N,d_b,d_w,seed,sample,idx,re_z,im_z,quantity,value,bound_name,"
                    "bound_value,ratio\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == static_cast<long>(records.size()) + 1);
    CHECK(csv.find("F_z(xi*Phi)") != std::string::npos);
    CHECK(csv.find("|z|*F_{z^2}(xi*Phi(z^2))") != std::string::npos);

    const auto summary = records_summary(records);
    CHECK(summary.is_array());
    CHECK(!summary.empty());
    for (const auto& cell : summary) {
        CHECK(cell.contains("median_value"));
        CHECK(cell.contains("max_ratio"));
        CHECK(cell.contains("count"));
    }
}
