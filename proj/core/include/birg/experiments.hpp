#pragma once

#include <complex>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "birg/graph.hpp"
#include "birg/mp_law.hpp"
#include "birg/spectral.hpp"

namespace birg {

// One Monte Carlo experiment: a graph configuration, a sampling budget and
// the spectral-parameter grid. Grids must stay inside the admissible domain
// |E| <= N^delta, eta <= N, and above the floor eta >= xi^2/N unless
// eta_floor_override is set (desk-scale grids routinely are below the
// asymptotic floor).
struct ExperimentSpec {
    std::string experiment;
    GraphConfig config;
    long long samples = 1;
    long long chain_steps = 0;  // 0: 20 * M * d_b burn-in per sample
    std::uint64_t seed = 1;
    std::vector<Complex> z_grid;
    double epsilon = 0.05;
    double delta = 1.0;
    double xi = 0.0;  // 0: log^2 N
    bool eta_floor_override = false;
    double kappa = 0.1;                                // rigidity bulk cut
    std::vector<std::pair<double, double>> intervals;  // esd; empty: support quarters
    int workers = 1;

    long long effective_chain_steps() const;
    double effective_xi() const;
    MPParams mp_params() const { return MPParams::from_gamma(config.gamma()); }

    void validate() const;

    nlohmann::json to_json() const;
    static ExperimentSpec from_json(const nlohmann::json& j);
};

// One observation row. Every record names the bound formula it is compared
// against; `ratio` is value / bound.
struct RunRecord {
    std::string experiment;
    GraphConfig config;
    std::uint64_t seed = 0;
    long long sample = -1;
    long long index = -1;  // eigenvector/interval index where applicable
    bool has_z = false;
    Complex z;
    std::string quantity;
    double value = 0.0;
    std::string bound_name;
    double bound_value = 0.0;

    double ratio() const;
};

// A sampled graph together with its three eigendecompositions.
struct SampleBundle {
    BiregularGraph graph;
    NormalizedEnsemble ensemble;
    SpectralData spec_X;
    SpectralData spec_small;
    SpectralData spec_large;
};

SampleBundle make_sample(const ExperimentSpec& spec, long long sample_index);

// Deterministic identity checks (spectral correspondence, Ward, resolvent,
// Green's-function block relations, degree eigenpair) that every sampled
// graph must pass before any statistical record is emitted. Throws
// NumericError listing the failures.
void exact_identity_gate(const SampleBundle& bundle, double tol = 1e-8);

std::vector<RunRecord> local_law_run(const ExperimentSpec& spec);
std::vector<RunRecord> delocalization_run(const ExperimentSpec& spec);
std::vector<RunRecord> rigidity_run(const ExperimentSpec& spec);
std::vector<RunRecord> esd_compare_run(const ExperimentSpec& spec);
std::vector<RunRecord> sce_stability_run(const ExperimentSpec& spec);

// Dispatch on spec.experiment.
std::vector<RunRecord> run_experiment(const ExperimentSpec& spec);

// Kolmogorov-Smirnov distance of an ascending sample against the MP CDF.
double ks_distance(const std::vector<double>& ascending, const MpCdf& cdf);

std::string records_to_csv(const std::vector<RunRecord>& records);

// Median/max of value and ratio per (quantity, bound, z).
nlohmann::json records_summary(const std::vector<RunRecord>& records);

}  // namespace birg
