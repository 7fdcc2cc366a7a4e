#include "birg/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <cblas.h>
#include <lapacke.h>

#include "birg/errors.hpp"
#include "birg/rng.hpp"

namespace birg {

namespace {

constexpr double kPoleGuard = 1e-12;

void require_off_spectrum(const SpectralData& spec, Complex z) {
    if (std::abs(z.imag()) > kPoleGuard) return;
    double dist = std::numeric_limits<double>::infinity();
    for (int a = 0; a < spec.source_dim; ++a)
        dist = std::min(dist, std::abs(spec.eigenvalues[a] - z));
    if (dist < kPoleGuard) throw PoleProximity("spectral parameter within 1e-12 of an eigenvalue");
}

// C = U diag(d) U^T for one real weight vector, via two BLAS calls.
Eigen::MatrixXd weighted_gram(const Eigen::MatrixXd& U, const Eigen::VectorXd& d) {
    const int n = static_cast<int>(U.rows());
    const int k = static_cast<int>(U.cols());
    Eigen::MatrixXd scaled = U;
    for (int a = 0; a < k; ++a) scaled.col(a) *= d[a];
    Eigen::MatrixXd out(n, n);
    cblas_dgemm(CblasColMajor, CblasNoTrans, CblasTrans, n, n, k, 1.0, scaled.data(), n, U.data(),
                n, 0.0, out.data(), n);
    return out;
}

}  // namespace

NormalizedEnsemble normalize(const Eigen::MatrixXd& A, const GraphConfig& config) {
    if (A.rows() != config.M || A.cols() != config.N)
        throw ConfigError("adjacency shape does not match configuration");
    NormalizedEnsemble e;
    e.config = config;
    const double shift = static_cast<double>(config.d_b) / config.N;
    const double scale = 1.0 / std::sqrt(static_cast<double>(config.d_w));
    e.H = scale * (A.array() - shift).matrix();
    const int n = config.M + config.N;
    e.X = Eigen::MatrixXd::Zero(n, n);
    e.X.topRightCorner(config.M, config.N) = e.H;
    e.X.bottomLeftCorner(config.N, config.M) = e.H.transpose();
    e.X_small = e.H.transpose() * e.H;
    e.X_large = e.H * e.H.transpose();
    return e;
}

SpectralData eigendecompose(const Eigen::MatrixXd& S) {
    if (S.rows() != S.cols()) throw std::invalid_argument("eigendecompose requires a square matrix");
    const int n = static_cast<int>(S.rows());
    SpectralData out;
    out.source_dim = n;
    out.eigenvectors = S;
    out.eigenvalues.resize(n);
    const int info = LAPACKE_dsyevd(LAPACK_COL_MAJOR, 'V', 'L', n, out.eigenvectors.data(), n,
                                    out.eigenvalues.data());
    if (info != 0)
        throw ConvergenceFailure("dsyevd failed with info = " + std::to_string(info));
    return out;
}

double SpectralData::reconstruction_residual(const Eigen::MatrixXd& S) const {
    return (weighted_gram(eigenvectors, eigenvalues) - S).cwiseAbs().maxCoeff();
}

double SpectralData::gram_residual() const {
    Eigen::MatrixXd g = eigenvectors.transpose() * eigenvectors;
    g.diagonal().array() -= 1.0;
    return g.cwiseAbs().maxCoeff();
}

double SpectralData::sampled_residual(const Eigen::MatrixXd& S, int count) const {
    Rng rng(0xC0FFEEull, static_cast<std::uint64_t>(source_dim));
    double worst = 0.0;
    for (int t = 0; t < count; ++t) {
        const int a = rng.below_int(source_dim);
        const double r =
            (S * eigenvectors.col(a) - eigenvalues[a] * eigenvectors.col(a)).cwiseAbs().maxCoeff();
        worst = std::max(worst, r);
    }
    return worst;
}

Complex green_entry(const SpectralData& spec, int i, int j, Complex z) {
    require_off_spectrum(spec, z);
    Complex acc = 0.0;
    for (int a = 0; a < spec.source_dim; ++a)
        acc += spec.eigenvectors(i, a) * spec.eigenvectors(j, a) / (spec.eigenvalues[a] - z);
    return acc;
}

Eigen::VectorXcd green_diagonal(const SpectralData& spec, Complex z) {
    require_off_spectrum(spec, z);
    const int n = spec.source_dim;
    Eigen::VectorXcd diag = Eigen::VectorXcd::Zero(n);
    for (int a = 0; a < n; ++a) {
        const Complex w = 1.0 / (spec.eigenvalues[a] - z);
        for (int i = 0; i < n; ++i) {
            const double u = spec.eigenvectors(i, a);
            diag[i] += u * u * w;
        }
    }
    return diag;
}

Eigen::MatrixXcd green_matrix(const SpectralData& spec, Complex z) {
    require_off_spectrum(spec, z);
    const int n = spec.source_dim;
    Eigen::VectorXd wr(n), wi(n);
    for (int a = 0; a < n; ++a) {
        const Complex w = 1.0 / (spec.eigenvalues[a] - z);
        wr[a] = w.real();
        wi[a] = w.imag();
    }
    const Eigen::MatrixXd re = weighted_gram(spec.eigenvectors, wr);
    const Eigen::MatrixXd im = weighted_gram(spec.eigenvectors, wi);
    Eigen::MatrixXcd g(n, n);
    g.real() = re;
    g.imag() = im;
    return g;
}

GreenEvaluation stieltjes_all(const SpectralData& spec_X, const SpectralData& spec_small,
                              const SpectralData& spec_large, const GraphConfig& config,
                              Complex z) {
    GreenEvaluation out;
    out.z = z;
    auto trace_mean = [&](const SpectralData& spec) {
        Complex acc = 0.0;
        for (int a = 0; a < spec.source_dim; ++a) acc += 1.0 / (spec.eigenvalues[a] - z);
        return acc / static_cast<double>(spec.source_dim);
    };
    require_off_spectrum(spec_small, z);
    require_off_spectrum(spec_large, z);
    out.s_star = trace_mean(spec_small);
    out.s_star_plus = trace_mean(spec_large);

    const Eigen::VectorXcd diag = green_diagonal(spec_X, z);
    Complex sb = 0.0, sw = 0.0;
    for (int i = 0; i < config.M; ++i) sb += diag[i];
    for (int k = config.M; k < config.M + config.N; ++k) sw += diag[k];
    out.s_b = sb / static_cast<double>(config.M);
    out.s_w = sw / static_cast<double>(config.N);
    return out;
}

WardCheck ward_check(const SpectralData& spec, int i, Complex z) {
    require_off_spectrum(spec, z);
    const double eta = z.imag();
    const int n = spec.source_dim;
    // sum_k |G_ik|^2 = sum_a |u_a(i)|^2 / |lambda_a - z|^2 by orthonormality.
    double lhs = 0.0;
    Complex gii = 0.0;
    for (int a = 0; a < n; ++a) {
        const double u = spec.eigenvectors(i, a);
        const Complex w = 1.0 / (spec.eigenvalues[a] - z);
        lhs += u * u * std::norm(w);
        gii += u * u * w;
    }
    WardCheck out;
    out.residual = std::abs(lhs - gii.imag() / eta);

    double max_entry = 0.0;
    for (int k = 0; k < n; ++k) {
        Complex gik = 0.0;
        for (int a = 0; a < n; ++a)
            gik += spec.eigenvectors(i, a) * spec.eigenvectors(k, a) /
                   (spec.eigenvalues[a] - z);
        max_entry = std::max(max_entry, std::abs(gik));
    }
    out.max_row_entry = max_entry;
    return out;
}

double resolvent_identity_check(const Eigen::MatrixXd& S, const Eigen::MatrixXd& S_tilde,
                                Complex z) {
    const int n = static_cast<int>(S.rows());
    Eigen::MatrixXcd A = S.cast<Complex>();
    Eigen::MatrixXcd B = S_tilde.cast<Complex>();
    A.diagonal().array() -= z;
    B.diagonal().array() -= z;
    const Eigen::MatrixXcd G = A.partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
    const Eigen::MatrixXcd Gt = B.partialPivLu().solve(Eigen::MatrixXcd::Identity(n, n));
    const Eigen::MatrixXcd lhs = G - Gt;
    const Eigen::MatrixXcd rhs = G * (S_tilde - S).cast<Complex>() * Gt;
    return (lhs - rhs).cwiseAbs().maxCoeff();
}

GammaMax gamma_max(const SpectralData& spec, Complex z, std::span<const double> eta_grid) {
    auto gamma_at = [&](Complex point) {
        const Eigen::MatrixXcd g = green_matrix(spec, point);
        return std::max(1.0, g.cwiseAbs().maxCoeff());
    };
    GammaMax out;
    out.gamma = gamma_at(z);
    out.gamma_star = out.gamma;
    for (double eta : eta_grid)
        if (eta >= z.imag()) out.gamma_star = std::max(out.gamma_star, gamma_at(Complex(z.real(), eta)));
    return out;
}

bool CorrespondenceReport::pass(double tol) const { return failures(tol).empty(); }

std::vector<std::string> CorrespondenceReport::failures(double tol) const {
    std::vector<std::string> out;
    auto check = [&](double value, const char* name) {
        if (!(value <= tol)) out.push_back(std::string(name) + " = " + std::to_string(value));
    };
    check(dev_spectrum_X, "spectrum_X");
    check(dev_spectrum_large, "spectrum_large");
    check(dev_pair_norm_split, "pair_norm_split");
    check(dev_pair_eigvec, "pair_eigvec");
    check(dev_kernel_black, "kernel_black");
    check(dev_kernel_white, "kernel_white");
    check(dev_kernel_embed, "kernel_embed");
    if (!kernel_dims_match) out.push_back("kernel_dims");
    return out;
}

CorrespondenceReport correspondence_check(const NormalizedEnsemble& ensemble,
                                          const SpectralData& spec_X,
                                          const SpectralData& spec_small,
                                          const SpectralData& spec_large) {
    const int M = ensemble.config.M;
    const int N = ensemble.config.N;
    const int n = M + N;
    CorrespondenceReport report;

    // Eigenvalue multisets. Covariance eigenvalues below the eigensolver's
    // absolute resolution are clamped to zero before taking square roots;
    // the root would otherwise amplify O(eps) noise to O(sqrt(eps)).
    const double clamp =
        1e-13 * std::max(1.0, spec_small.eigenvalues.cwiseAbs().maxCoeff());
    {
        std::vector<double> expected;
        expected.reserve(n);
        for (int a = 0; a < N; ++a) {
            const double value = spec_small.eigenvalues[a];
            const double lam = value <= clamp ? 0.0 : std::sqrt(value);
            expected.push_back(lam);
            expected.push_back(-lam);
        }
        expected.resize(n, 0.0);
        std::sort(expected.begin(), expected.end());
        double dev = 0.0;
        for (int a = 0; a < n; ++a) dev = std::max(dev, std::abs(expected[a] - spec_X.eigenvalues[a]));
        report.dev_spectrum_X = dev;
    }
    {
        std::vector<double> expected(spec_small.eigenvalues.data(),
                                     spec_small.eigenvalues.data() + N);
        expected.resize(M, 0.0);
        std::sort(expected.begin(), expected.end());
        double dev = 0.0;
        for (int a = 0; a < M; ++a) dev = std::max(dev, std::abs(expected[a] - spec_large.eigenvalues[a]));
        report.dev_spectrum_large = dev;
    }

    // Paired eigenvectors at nonzero eigenvalues: u = (t, b) with
    // ||t||^2 = ||b||^2 = 1/2 and sqrt(2) t, sqrt(2) b eigenvectors of the
    // covariances at lambda^2. Batched over eigenvectors.
    constexpr double kZeroBand = 1e-8;
    int zero_count_X = 0;
    {
        std::vector<int> nonzero;
        nonzero.reserve(n);
        for (int a = 0; a < n; ++a) {
            if (std::abs(spec_X.eigenvalues[a]) <= kZeroBand)
                ++zero_count_X;
            else
                nonzero.push_back(a);
        }
        const int k = static_cast<int>(nonzero.size());
        if (k > 0) {
            Eigen::MatrixXd top(M, k), bottom(N, k);
            Eigen::VectorXd lam2(k);
            for (int c = 0; c < k; ++c) {
                top.col(c) = spec_X.eigenvectors.col(nonzero[c]).head(M);
                bottom.col(c) = spec_X.eigenvectors.col(nonzero[c]).tail(N);
                lam2[c] = spec_X.eigenvalues[nonzero[c]] * spec_X.eigenvalues[nonzero[c]];
            }
            const Eigen::VectorXd top_norms = top.colwise().squaredNorm();
            const Eigen::VectorXd bottom_norms = bottom.colwise().squaredNorm();
            report.dev_pair_norm_split =
                std::max((top_norms.array() - 0.5).abs().maxCoeff(),
                         (bottom_norms.array() - 0.5).abs().maxCoeff());
            const double r_top = (ensemble.X_large * top - top * lam2.asDiagonal())
                                     .cwiseAbs()
                                     .maxCoeff() * std::sqrt(2.0);
            const double r_bottom = (ensemble.X_small * bottom - bottom * lam2.asDiagonal())
                                        .cwiseAbs()
                                        .maxCoeff() * std::sqrt(2.0);
            report.dev_pair_eigvec = std::max(r_top, r_bottom);
        }
    }

    // Kernel split: ker X = ker H^T (black side) + ker H (white side).
    int zero_small = 0, zero_large = 0;
    for (int a = 0; a < N; ++a)
        if (std::abs(spec_small.eigenvalues[a]) <= kZeroBand) ++zero_small;
    for (int a = 0; a < M; ++a)
        if (std::abs(spec_large.eigenvalues[a]) <= kZeroBand) ++zero_large;
    report.kernel_dims_match = (zero_count_X == zero_small + zero_large);

    if (zero_count_X > 0) {
        Eigen::MatrixXd top(M, zero_count_X), bottom(N, zero_count_X);
        int col = 0;
        for (int a = 0; a < n; ++a) {
            if (std::abs(spec_X.eigenvalues[a]) > kZeroBand) continue;
            top.col(col) = spec_X.eigenvectors.col(a).head(M);
            bottom.col(col) = spec_X.eigenvectors.col(a).tail(N);
            ++col;
        }
        report.dev_kernel_black = (ensemble.H.transpose() * top).cwiseAbs().maxCoeff();
        report.dev_kernel_white = (ensemble.H * bottom).cwiseAbs().maxCoeff();
    }
    if (zero_large > 0) {
        // Black-supported embeddings (v, 0) of ker HH^T lie in ker X.
        double dev = 0.0;
        for (int a = 0; a < M; ++a) {
            if (std::abs(spec_large.eigenvalues[a]) > kZeroBand) continue;
            dev = std::max(dev,
                           (ensemble.H.transpose() * spec_large.eigenvectors.col(a)).cwiseAbs().maxCoeff());
        }
        report.dev_kernel_embed = dev;
    }
    return report;
}

double green_relations_check(const SpectralData& spec_X, const SpectralData& spec_small,
                             const SpectralData& spec_large, const GraphConfig& config,
                             Complex z) {
    const Complex z2 = z * z;
    const int M = config.M;
    const int N = config.N;
    double dev = 0.0;
    const Eigen::VectorXcd diag_X = green_diagonal(spec_X, z);
    const Eigen::VectorXcd diag_small = green_diagonal(spec_small, z2);
    const Eigen::VectorXcd diag_large = green_diagonal(spec_large, z2);
    for (int i = 0; i < M; ++i) dev = std::max(dev, std::abs(diag_X[i] - z * diag_large[i]));
    for (int k = 0; k < N; ++k) dev = std::max(dev, std::abs(diag_X[M + k] - z * diag_small[k]));

    // A few off-diagonal entries of each block.
    Rng rng(0xB10C0FFull, static_cast<std::uint64_t>(M + N));
    for (int t = 0; t < 32; ++t) {
        const int i = rng.below_int(M);
        const int j = rng.below_int(M);
        if (i == j) continue;
        dev = std::max(dev, std::abs(green_entry(spec_X, i, j, z) -
                                     z * green_entry(spec_large, i, j, z2)));
    }
    for (int t = 0; t < 32; ++t) {
        const int k = rng.below_int(N);
        const int l = rng.below_int(N);
        if (k == l) continue;
        dev = std::max(dev, std::abs(green_entry(spec_X, M + k, M + l, z) -
                                     z * green_entry(spec_small, k, l, z2)));
    }
    return dev;
}

TrivialEigenpair trivial_eigenpair_check(const Eigen::MatrixXd& A, const GraphConfig& config) {
    const int M = config.M;
    const int N = config.N;
    Eigen::VectorXd u(M + N);
    u.head(M).setConstant(1.0 / std::sqrt(2.0 * M));
    u.tail(N).setConstant(1.0 / std::sqrt(2.0 * N));

    const double lambda_max = std::sqrt(static_cast<double>(config.d_b) * config.d_w);
    Eigen::VectorXd image(M + N);
    image.head(M) = A * u.tail(N);
    image.tail(N) = A.transpose() * u.head(M);

    TrivialEigenpair out;
    out.adjacency_residual = (image - lambda_max * u).norm();

    const NormalizedEnsemble e = normalize(A, config);
    Eigen::VectorXd centered(M + N);
    centered.head(M) = e.H * u.tail(N);
    centered.tail(N) = e.H.transpose() * u.head(M);
    out.centered_residual = centered.norm();
    return out;
}

}  // namespace birg
