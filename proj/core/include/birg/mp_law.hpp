#pragma once

#include <complex>
#include <vector>

#include "birg/errors.hpp"

namespace birg {

using Complex = std::complex<double>;

// Marchenko-Pastur parameters for aspect ratio gamma = N/M in (0, 1];
// support edges lambda_pm = (1 +- sqrt(gamma))^2.
struct MPParams {
    double gamma = 1.0;
    double lambda_minus = 0.0;
    double lambda_plus = 4.0;

    static MPParams from_gamma(double gamma);
};

// Density of the Marchenko-Pastur law on [lambda_-, lambda_+], zero outside.
double rho_mp(double x, const MPParams& p);

// Symmetrized square-root push-forward of the MP law: the continuous part
// of the limiting spectral density of the block linearization. Carries mass
// 2*gamma/(1+gamma); the remaining (1-gamma)/(1+gamma) sits in an atom at 0.
double rho_linear(double E, const MPParams& p);

// Stieltjes transform of the MP law: the root of
//   gamma*z*m^2 + (gamma + z - 1)*m + 1 = 0
// mapping the upper half plane to itself; values on the real axis off the
// support are the continuous boundary limits. Conjugate-symmetric in z.
Complex m_inf(Complex z, const MPParams& p);

struct StieltjesValue {
    Complex z;
    Complex m_inf;       // MP transform at z
    Complex m_inf_plus;  // gamma*m_inf + (gamma-1)/z
    Complex m_lin;       // z * m_inf(z^2)
    Complex m_lin_plus;  // gamma*m_lin + (gamma-1)/z
};

StieltjesValue m_variants(Complex z, const MPParams& p);

// Closed-form semicircle transform (-z + sqrt(z^2 - 4))/2 with the branch
// sqrt(z^2-4) ~ z at infinity; equals m_lin at gamma = 1.
Complex m_semicircle(Complex z);

// Cached CDF of the MP law, built by per-panel Gauss-Legendre quadrature in
// the edge-desingularizing variable x = lambda_- + (lambda_+ - lambda_-)
// sin^2(theta).
class MpCdf {
  public:
    explicit MpCdf(const MPParams& p, int panels = 2048);

    double cdf(double x) const;
    double quantile(double prob) const;
    double total_mass() const { return mass_; }
    const MPParams& params() const { return params_; }

  private:
    double partial(int panel, double theta) const;

    MPParams params_;
    int panels_;
    double width_;                // lambda_+ - lambda_-
    std::vector<double> cum_;     // cumulative mass at panel ends
    double mass_ = 0.0;
};

// Classical locations gamma_1..gamma_N: the i/N quantiles of the MP law.
std::vector<double> classical_locations(int N, const MPParams& p);

// Sparsity/scale control parameters of a run: D = min(d_b, N^2/d_b^3),
// Phi(z) = 1/sqrt(N Im z) + 1/sqrt(D).
struct ControlParams {
    int N = 0;
    int d_b = 0;
    double xi = 0.0;  // defaults to log^2 N when zero

    static ControlParams make(int N, int d_b, double xi = 0.0);

    double D() const;
    double phi(Complex z) const;  // NaN when Im z <= 0
};

// F_z(r) = min((1 + |(lambda_+ - z)(z - lambda_-)|^{-1/2}) r, sqrt(r)).
double F_z(Complex z, double r, const MPParams& p);

// gamma*z*s^2 + (gamma + z - 1)*s + 1, evaluated verbatim.
Complex sce_residual(Complex s, Complex z, const MPParams& p);

// (|m_inf(z) - s|, F_z(|residual| / (1 + |z|))).
struct StabilityGap {
    double gap = 0.0;
    double bound = 0.0;
};

StabilityGap stability_gap(Complex s, Complex z, const MPParams& p);

// Grid scan of |m_lin| over the upper half plane, split into the bulk
// window, the far-field |E| > Lambda, and (for gamma < 1) the near-origin
// window |E| < sqrt(lambda_-)/100; a final eta-descent refinement estimates
// the boundary supremum.
struct BoundednessScan {
    double max_abs = 0.0;
    Complex argmax;
    double regime_bulk = 0.0;
    double regime_far = 0.0;
    double regime_origin = 0.0;  // NaN when gamma = 1
};

BoundednessScan boundedness_scan(const MPParams& p, double eta_min = 1e-4, double eta_max = 100.0);

}  // namespace birg
