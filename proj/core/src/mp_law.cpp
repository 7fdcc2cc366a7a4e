#include "birg/mp_law.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <limits>
#include <numbers>

namespace birg {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kPoleGuard = 1e-12;
constexpr int kGaussOrder = 16;

struct GaussRule {
    std::array<double, kGaussOrder> node;
    std::array<double, kGaussOrder> weight;
};

// Gauss-Legendre nodes on [-1, 1] by Newton iteration on P_n.
const GaussRule& gauss_rule() {
    static const GaussRule rule = [] {
        GaussRule r{};
        const int n = kGaussOrder;
        for (int i = 0; i < n; ++i) {
            double x = std::cos(kPi * (i + 0.75) / (n + 0.5));
            double pp = 0.0;
            for (int iter = 0; iter < 100; ++iter) {
                double p0 = 1.0, p1 = x;
                for (int k = 2; k <= n; ++k) {
                    const double p2 = ((2.0 * k - 1.0) * x * p1 - (k - 1.0) * p0) / k;
                    p0 = p1;
                    p1 = p2;
                }
                pp = n * (x * p1 - p0) / (x * x - 1.0);
                const double dx = p1 / pp;
                x -= dx;
                if (std::abs(dx) < 1e-15) break;
            }
            r.node[i] = x;
            r.weight[i] = 2.0 / ((1.0 - x * x) * pp * pp);
        }
        return r;
    }();
    return rule;
}

// Density mass element in theta coordinates: rho(x) dx = g(theta) dtheta
// with x = lambda_- + W sin^2(theta). The sin^2 factor cancels the root
// singularity at both edges (including lambda_- = 0 at gamma = 1).
double theta_density(double theta, const MPParams& p, double width) {
    const double t = std::sin(theta) * std::sin(theta);
    const double one_minus = 1.0 - t;
    if (p.lambda_minus == 0.0) return width * one_minus / (kPi * p.gamma);
    const double x = p.lambda_minus + width * t;
    return width * width * t * one_minus / (kPi * p.gamma * x);
}

// Quadratic-root pair of gamma*z*m^2 + (gamma+z-1)*m + 1 = 0, computed in
// the cancellation-stable order.
std::pair<Complex, Complex> sce_roots(Complex z, const MPParams& p) {
    const Complex a = p.gamma * z;
    const Complex b = p.gamma + z - 1.0;
    const Complex disc = b * b - 4.0 * a;
    Complex s = std::sqrt(disc);
    if (std::real(std::conj(b) * s) < 0.0) s = -s;
    const Complex q = -0.5 * (b + s);
    return {q / a, Complex(1.0) / q};
}

Complex herglotz_root(Complex z, const MPParams& p) {
    const auto [r1, r2] = sce_roots(z, p);
    const Complex upper = r1.imag() >= r2.imag() ? r1 : r2;
    const Complex lower = r1.imag() >= r2.imag() ? r2 : r1;
    if (z.imag() > 1e-8 && upper.imag() <= 1e-14 && lower.imag() <= 1e-14)
        throw BranchAmbiguity("no root with positive imaginary part");
    return upper;
}

}  // namespace

MPParams MPParams::from_gamma(double gamma) {
    if (!(gamma > 0.0) || gamma > 1.0) throw ConfigError("gamma must lie in (0, 1]");
    MPParams p;
    p.gamma = gamma;
    const double root = std::sqrt(gamma);
    p.lambda_minus = (1.0 - root) * (1.0 - root);
    p.lambda_plus = (1.0 + root) * (1.0 + root);
    return p;
}

double rho_mp(double x, const MPParams& p) {
    if (x <= p.lambda_minus || x >= p.lambda_plus) return 0.0;
    return std::sqrt((p.lambda_plus - x) * (x - p.lambda_minus)) / (2.0 * kPi * p.gamma * x);
}

double rho_linear(double E, const MPParams& p) {
    const double x = E * E;
    if (x <= p.lambda_minus || x >= p.lambda_plus) return 0.0;
    return std::sqrt((p.lambda_plus - x) * (x - p.lambda_minus)) /
           ((1.0 + p.gamma) * kPi * std::abs(E));
}

Complex m_inf(Complex z, const MPParams& p) {
    if (z.imag() > 0.0) return herglotz_root(z, p);
    if (z.imag() < 0.0) return std::conj(herglotz_root(std::conj(z), p));
    const double x = z.real();
    if (x == 0.0) throw std::invalid_argument("m_inf requires |z| > 0 on the real axis");
    if (x >= p.lambda_minus - kPoleGuard && x <= p.lambda_plus + kPoleGuard)
        throw PoleProximity("real spectral parameter inside the support");
    // Continuous limit from the upper half plane: both roots are real here;
    // keep the one an infinitesimal upward shift selects.
    const Complex reference = herglotz_root(Complex(x, 1e-8 * (1.0 + std::abs(x))), p);
    const auto [r1, r2] = sce_roots(z, p);
    return std::abs(r1 - reference) <= std::abs(r2 - reference) ? r1 : r2;
}

StieltjesValue m_variants(Complex z, const MPParams& p) {
    if (!(z.imag() > 0.0)) throw std::invalid_argument("m_variants requires Im z > 0");
    StieltjesValue v;
    v.z = z;
    v.m_inf = m_inf(z, p);
    v.m_inf_plus = p.gamma * v.m_inf + (p.gamma - 1.0) / z;
    v.m_lin = z * m_inf(z * z, p);
    v.m_lin_plus = p.gamma * v.m_lin + (p.gamma - 1.0) / z;
    return v;
}

Complex m_semicircle(Complex z) {
    // sqrt(z-2)*sqrt(z+2) has the cut on [-2,2] and grows like z.
    return 0.5 * (-z + std::sqrt(z - 2.0) * std::sqrt(z + 2.0));
}

MpCdf::MpCdf(const MPParams& p, int panels) : params_(p), panels_(panels) {
    width_ = p.lambda_plus - p.lambda_minus;
    cum_.assign(panels_ + 1, 0.0);
    const auto& rule = gauss_rule();
    const double h = (kPi / 2.0) / panels_;
    for (int k = 0; k < panels_; ++k) {
        const double lo = k * h;
        double acc = 0.0;
        for (int i = 0; i < kGaussOrder; ++i) {
            const double theta = lo + 0.5 * h * (rule.node[i] + 1.0);
            acc += rule.weight[i] * theta_density(theta, params_, width_);
        }
        cum_[k + 1] = cum_[k] + acc * 0.5 * h;
    }
    mass_ = cum_[panels_];
    if (std::abs(mass_ - 1.0) > 1e-8)
        throw QuadratureFailure("MP mass deviates from 1 by " + std::to_string(mass_ - 1.0));
}

double MpCdf::partial(int panel, double theta) const {
    const auto& rule = gauss_rule();
    const double h = (kPi / 2.0) / panels_;
    const double lo = panel * h;
    const double len = theta - lo;
    if (len <= 0.0) return cum_[panel];
    double acc = 0.0;
    for (int i = 0; i < kGaussOrder; ++i) {
        const double t = lo + 0.5 * len * (rule.node[i] + 1.0);
        acc += rule.weight[i] * theta_density(t, params_, width_);
    }
    return cum_[panel] + acc * 0.5 * len;
}

double MpCdf::cdf(double x) const {
    if (x <= params_.lambda_minus) return 0.0;
    if (x >= params_.lambda_plus) return mass_;
    const double theta = std::asin(std::sqrt((x - params_.lambda_minus) / width_));
    const double h = (kPi / 2.0) / panels_;
    int panel = std::min(panels_ - 1, static_cast<int>(theta / h));
    return partial(panel, theta);
}

double MpCdf::quantile(double prob) const {
    if (prob <= 0.0) return params_.lambda_minus;
    if (prob >= mass_) return params_.lambda_plus;
    const auto it = std::upper_bound(cum_.begin(), cum_.end(), prob);
    int panel = std::max(0, static_cast<int>(it - cum_.begin()) - 1);
    panel = std::min(panel, panels_ - 1);
    const double h = (kPi / 2.0) / panels_;
    double lo = panel * h, hi = (panel + 1) * h;
    for (int iter = 0; iter < 80; ++iter) {
        const double mid = 0.5 * (lo + hi);
        if (partial(panel, mid) < prob)
            lo = mid;
        else
            hi = mid;
    }
    const double theta = 0.5 * (lo + hi);
    const double s = std::sin(theta);
    return params_.lambda_minus + width_ * s * s;
}

std::vector<double> classical_locations(int N, const MPParams& p) {
    if (N < 1) throw std::invalid_argument("classical_locations requires N >= 1");
    const MpCdf cdf(p);
    std::vector<double> out(N);
    for (int i = 1; i <= N; ++i) out[i - 1] = cdf.quantile(static_cast<double>(i) / N);
    return out;
}

ControlParams ControlParams::make(int N, int d_b, double xi) {
    if (N < 1 || d_b < 1) throw ConfigError("control parameters need N >= 1, d_b >= 1");
    ControlParams c;
    c.N = N;
    c.d_b = d_b;
    const double log_n = std::log(static_cast<double>(N));
    c.xi = xi > 0.0 ? xi : std::max(std::numbers::e, log_n * log_n);
    if (c.xi < std::numbers::e) throw ConfigError("xi must be at least e");
    return c;
}

double ControlParams::D() const {
    const double n = static_cast<double>(N);
    const double d = static_cast<double>(d_b);
    return std::min(d, n * n / (d * d * d));
}

double ControlParams::phi(Complex z) const {
    if (!(z.imag() > 0.0)) return std::numeric_limits<double>::quiet_NaN();
    return 1.0 / std::sqrt(N * z.imag()) + 1.0 / std::sqrt(D());
}

double F_z(Complex z, double r, const MPParams& p) {
    if (!(r >= 0.0)) return std::numeric_limits<double>::quiet_NaN();
    const double edge = std::abs((p.lambda_plus - z) * (z - p.lambda_minus));
    const double linear = (1.0 + 1.0 / std::sqrt(edge)) * r;
    return std::min(linear, std::sqrt(r));
}

Complex sce_residual(Complex s, Complex z, const MPParams& p) {
    return p.gamma * z * s * s + (p.gamma + z - 1.0) * s + 1.0;
}

StabilityGap stability_gap(Complex s, Complex z, const MPParams& p) {
    StabilityGap out;
    out.gap = std::abs(m_inf(z, p) - s);
    const double r = std::abs(sce_residual(s, z, p)) / (1.0 + std::abs(z));
    out.bound = F_z(z, r, p);
    return out;
}

BoundednessScan boundedness_scan(const MPParams& p, double eta_min, double eta_max) {
    const double lambda = 10.0;
    auto abs_m_lin = [&](double E, double eta) -> double {
        const Complex z(E, eta);
        try {
            return std::abs(z * m_inf(z * z, p));
        } catch (const NumericError&) {
            return -1.0;
        }
    };

    std::vector<double> etas;
    for (double eta = eta_min; eta <= eta_max * (1.0 + 1e-12); eta *= 1.5) etas.push_back(eta);

    double best = 0.0, best_E = 0.0, best_eta = eta_min;
    auto scan = [&](const std::vector<double>& energies) {
        double regime_max = 0.0;
        for (double E : energies)
            for (double eta : etas) {
                const double v = abs_m_lin(E, eta);
                if (v > regime_max) regime_max = v;
                if (v > best) {
                    best = v;
                    best_E = E;
                    best_eta = eta;
                }
            }
        return regime_max;
    };

    BoundednessScan out;
    // Bulk window |E| <= Lambda (offset from zero; the origin regime covers
    // small energies when gamma < 1).
    std::vector<double> bulk;
    for (int k = 0; k < 400; ++k) {
        const double E = (k + 0.5) * lambda / 400.0;
        bulk.push_back(E);
        bulk.push_back(-E);
    }
    out.regime_bulk = scan(bulk);

    std::vector<double> far;
    for (double E = lambda; E <= 1000.0; E *= 1.3) {
        far.push_back(E);
        far.push_back(-E);
    }
    out.regime_far = scan(far);

    if (p.gamma < 1.0) {
        const double eps = std::sqrt(p.lambda_minus) / 100.0;
        std::vector<double> origin;
        for (double E = eps; E >= 1e-8; E /= 2.0) {
            origin.push_back(E);
            origin.push_back(-E);
        }
        out.regime_origin = scan(origin);
    } else {
        out.regime_origin = std::numeric_limits<double>::quiet_NaN();
    }

    // The supremum lives on the boundary: descend eta toward zero around the
    // grid argmax, tracking a local maximum over nearby energies.
    double dE = lambda / 400.0;
    for (double eta = best_eta; eta >= 1e-9; eta /= 4.0) {
        double local_best = best, local_E = best_E;
        for (int k = -8; k <= 8; ++k) {
            const double E = best_E + k * dE / 8.0;
            const double v = abs_m_lin(E, eta);
            if (v > local_best) {
                local_best = v;
                local_E = E;
            }
        }
        best = local_best;
        best_E = local_E;
        best_eta = eta;
        dE /= 4.0;
    }
    out.max_abs = best;
    out.argmax = Complex(best_E, best_eta);
    return out;
}

}  // namespace birg
