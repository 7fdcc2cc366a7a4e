#pragma once

#include <complex>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "birg/graph.hpp"

namespace birg {

using Complex = std::complex<double>;

// Centered and scaled matrices built from one adjacency block:
//   H       = (A - (d_b/N) * ones) / sqrt(d_w)      (M x N)
//   X       = [[0, H], [H^T, 0]]                    (M+N symmetric)
//   X_small = H^T H                                  (N x N)
//   X_large = H H^T                                  (M x M)
// The rank-one shift d_b/N annihilates the constant directions: H e_w = 0
// and e_b^T H = 0, so the Perron pair of the raw adjacency moves to the
// kernel of X.
struct NormalizedEnsemble {
    GraphConfig config;
    Eigen::MatrixXd H;
    Eigen::MatrixXd X;
    Eigen::MatrixXd X_small;
    Eigen::MatrixXd X_large;
};

NormalizedEnsemble normalize(const Eigen::MatrixXd& A, const GraphConfig& config);

// Eigendecomposition of a real symmetric matrix, eigenvalues ascending,
// eigenvectors orthonormal in columns.
struct SpectralData {
    Eigen::VectorXd eigenvalues;
    Eigen::MatrixXd eigenvectors;
    int source_dim = 0;

    // Max-norm residuals for the decomposition invariants; O(n^3), meant for
    // tests and small inputs.
    double reconstruction_residual(const Eigen::MatrixXd& S) const;
    double gram_residual() const;
    // Cheap spot check: eigen-equation residual on `count` sampled columns.
    double sampled_residual(const Eigen::MatrixXd& S, int count = 8) const;
};

SpectralData eigendecompose(const Eigen::MatrixXd& S);

Complex green_entry(const SpectralData& spec, int i, int j, Complex z);
Eigen::VectorXcd green_diagonal(const SpectralData& spec, Complex z);
Eigen::MatrixXcd green_matrix(const SpectralData& spec, Complex z);

// Trace and partial-trace Stieltjes statistics of one sampled ensemble at z.
// s_star / s_star_plus come from covariance eigenvalues alone; s_b and s_w
// average the black (resp. white) diagonal of the linearization's Green's
// function.
struct GreenEvaluation {
    Complex z;
    Complex s_star;
    Complex s_star_plus;
    Complex s_b;
    Complex s_w;
};

GreenEvaluation stieltjes_all(const SpectralData& spec_X, const SpectralData& spec_small,
                              const SpectralData& spec_large, const GraphConfig& config, Complex z);

struct WardCheck {
    double residual = 0.0;       // | sum_k |G_ik|^2 - Im G_ii / eta |
    double max_row_entry = 0.0;  // max_k |G_ik|, to compare with 1/eta
};

WardCheck ward_check(const SpectralData& spec, int i, Complex z);

// Max-norm of G - G~ - G (S~ - S) G~ with dense complex inverses.
double resolvent_identity_check(const Eigen::MatrixXd& S, const Eigen::MatrixXd& S_tilde,
                                Complex z);

// Gamma(z) = max(1, max_ij |G_ij(z)|) and its running sup over the eta grid
// (taken at eta' >= Im z).
struct GammaMax {
    double gamma = 1.0;
    double gamma_star = 1.0;
};

GammaMax gamma_max(const SpectralData& spec, Complex z, std::span<const double> eta_grid);

// Numerical verification of the spectral correspondence between X and the
// two covariance matrices: eigenvalue multisets, paired-eigenvector
// structure at nonzero eigenvalues, and the kernel split. All deviations in
// max norm; `pass(tol)` checks every field against tol.
struct CorrespondenceReport {
    double dev_spectrum_X = 0.0;        // sigma(X) vs signed square roots + zeros
    double dev_spectrum_large = 0.0;    // sigma(HH^T) vs sigma(H^T H) + zeros
    double dev_pair_norm_split = 0.0;   // |top|^2, |bottom|^2 vs 1/2
    double dev_pair_eigvec = 0.0;       // covariance eigen-equation residual of blocks
    double dev_kernel_black = 0.0;      // H^T . (top blocks of ker X)
    double dev_kernel_white = 0.0;      // H   . (bottom blocks of ker X)
    double dev_kernel_embed = 0.0;      // X . (v, 0) for v in ker HH^T
    bool kernel_dims_match = true;

    bool pass(double tol) const;
    std::vector<std::string> failures(double tol) const;
};

CorrespondenceReport correspondence_check(const NormalizedEnsemble& ensemble,
                                          const SpectralData& spec_X,
                                          const SpectralData& spec_small,
                                          const SpectralData& spec_large);

// Max deviation of the block-diagonal relations G(z) = z G_cov(z^2) on the
// two diagonal blocks, plus a sampled selection of off-diagonal entries.
double green_relations_check(const SpectralData& spec_X, const SpectralData& spec_small,
                             const SpectralData& spec_large, const GraphConfig& config, Complex z);

// Residuals of the degree-regular eigenpair: ||X_A u - sqrt(d_b d_w) u|| for
// u = (e_b, e_w)/sqrt(2) on the raw adjacency linearization, and ||X u|| on
// the centered one.
struct TrivialEigenpair {
    double adjacency_residual = 0.0;
    double centered_residual = 0.0;
};

TrivialEigenpair trivial_eigenpair_check(const Eigen::MatrixXd& A, const GraphConfig& config);

}  // namespace birg
