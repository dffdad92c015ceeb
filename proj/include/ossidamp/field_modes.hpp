// field_modes.hpp: Normal-mode coefficients of the oscillator + 1D scalar field and their consistency checks

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <functional>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "ossidamp/quadrature.hpp"
#include "ossidamp/thermo.hpp"

namespace ossidamp::field {

using complex = std::complex<double>;

/// Oscillator (omega0) coupled through -alpha qdot phi(0) to a field of speed c;
/// the induced Ohmic rate is gamma = c alpha^2 / 2.
class ScalarFieldModel {
public:
    static ScalarFieldModel from_gamma(double omega0, double gamma, double c) {
        return ScalarFieldModel(omega0, gamma, c, std::sqrt(2.0 * gamma / c));
    }
    static ScalarFieldModel from_alpha(double omega0, double alpha, double c) {
        return ScalarFieldModel(omega0, 0.5 * c * alpha * alpha, c, alpha);
    }

    double omega0() const noexcept { return omega0_; }
    double gamma() const noexcept { return gamma_; }
    double c() const noexcept { return c_; }
    double alpha() const noexcept { return alpha_; }

private:
    ScalarFieldModel(double omega0, double gamma, double c, double alpha)
        : omega0_(omega0), gamma_(gamma), c_(c), alpha_(alpha) {
        if (!(omega0 > 0.0) || !(c > 0.0) || !(gamma >= 0.0) || !(alpha >= 0.0) || !std::isfinite(gamma))
            throw std::invalid_argument("ScalarFieldModel: need omega0 > 0, c > 0, gamma >= 0");
    }

    double omega0_;
    double gamma_;
    double c_;
    double alpha_;
};

struct ModeCoefficients {
    double k{0.0};
    double omega{0.0};
    double x{0.0};
    complex f_q;
    complex f_Pi_q;
    complex f_phi;
    complex f_Pi_phi;
};

/// Plane-wave amplitude sqrt(c^2 hbar / 4 pi w) of the free field.
inline double h_phi(const ScalarFieldModel& m, double k, double hbar = 1.0) {
    const double w = m.c() * std::abs(k);
    return std::sqrt(m.c() * m.c() * hbar / (4.0 * std::numbers::pi * w));
}

/// f_q(k) = sqrt(hbar w / 4 pi) i c alpha / (w^2 - w0^2 + i gamma w).
inline complex f_q(const ScalarFieldModel& m, double k, double hbar = 1.0) {
    if (k == 0.0) throw std::domain_error("f_q: k = 0 is not a mode");
    const double w = m.c() * std::abs(k);
    const complex den{w * w - m.omega0() * m.omega0(), m.gamma() * w};
    return std::sqrt(hbar * w / (4.0 * std::numbers::pi)) * complex{0.0, m.c() * m.alpha()} / den;
}

/// Field coefficient f_phi(x, k) = -(c alpha / 2) e^{i w |x| / c} f_q + h_phi e^{i k x}.
inline complex f_phi(const ScalarFieldModel& m, double x, double k, complex fq, double hbar = 1.0) {
    const double w = m.c() * std::abs(k);
    return -0.5 * m.c() * m.alpha() * std::polar(1.0, w * std::abs(x) / m.c()) * fq +
           h_phi(m, k, hbar) * std::polar(1.0, k * x);
}

inline ModeCoefficients eval_coefficients(const ScalarFieldModel& m, double k, double x, double hbar = 1.0) {
    if (k == 0.0) throw std::domain_error("eval_coefficients: k = 0 is not a mode");
    if (!std::isfinite(k) || !std::isfinite(x)) throw std::invalid_argument("eval_coefficients: non-finite argument");
    ModeCoefficients s;
    s.k = k;
    s.x = x;
    s.omega = m.c() * std::abs(k);
    s.f_q = f_q(m, k, hbar);
    s.f_Pi_q = complex{0.0, -m.omega0() * m.omega0() / s.omega} * s.f_q;
    s.f_phi = f_phi(m, x, k, s.f_q, hbar);
    s.f_Pi_phi = complex{0.0, -s.omega / (m.c() * m.c())} * s.f_phi;
    return s;
}

/// One-sided x-derivatives of f_phi at x = 0.
inline complex dphi_dx_right(const ScalarFieldModel& m, double k, complex fq, double hbar = 1.0) {
    const double w = m.c() * std::abs(k);
    return -0.5 * m.c() * m.alpha() * complex{0.0, w / m.c()} * fq + h_phi(m, k, hbar) * complex{0.0, k};
}

inline complex dphi_dx_left(const ScalarFieldModel& m, double k, complex fq, double hbar = 1.0) {
    const double w = m.c() * std::abs(k);
    return -0.5 * m.c() * m.alpha() * complex{0.0, -w / m.c()} * fq + h_phi(m, k, hbar) * complex{0.0, k};
}

// ---------------------------------- checks ------------------------------------

struct CommutatorCheck {
    complex value;       // computed commutator (or smeared commutator)
    complex expected;    // i hbar (or i hbar int g h)
    double residual{0};  // |value - expected| / scale
    quad::Classification classification{quad::Classification::converged};
};

namespace detail {

/// k-space breakpoints for integrands built from 1/D, D = (w^2 - w0^2)^2 + gamma^2 w^2.
inline std::vector<double> resonance_points_k(const ScalarFieldModel& m) {
    const double w0 = m.omega0(), g = m.gamma(), c = m.c();
    std::vector<double> w{w0};
    if (g > 0.0) {
        w.push_back(g);
        w.push_back(w0 * w0 / g);
        for (double s : {0.5, 1.5, 5.0, 15.0, 50.0, 150.0}) {
            w.push_back(w0 + s * g);
            if (w0 > s * g) w.push_back(w0 - s * g);
        }
    }
    std::vector<double> k;
    for (double x : w)
        if (x > 0.0 && std::isfinite(x)) k.push_back(x / c);
    return k;
}

inline double max_scale_k(const ScalarFieldModel& m) { return std::max(m.omega0(), m.gamma()) / m.c(); }

}  // namespace detail

/// [q, Pi_q] = int dk (f_q f_Pi_q^* - f_q^* f_Pi_q) = int dk 2i (w0^2 / w) |f_q|^2, expected i hbar.
inline CommutatorCheck verify_q_commutator(const ScalarFieldModel& m, double hbar = 1.0,
                                           const quad::QuadratureSpec& base = {}) {
    quad::QuadratureSpec spec = base;
    spec.breakpoints = detail::resonance_points_k(m);
    spec.split_point = 10.0 * detail::max_scale_k(m);
    // Even in k: twice the half line.
    auto f = [&](double k) {
        const auto s = eval_coefficients(m, k, 0.0, hbar);
        return 2.0 * (2.0 * m.omega0() * m.omega0() / s.omega) * std::norm(s.f_q);
    };
    CommutatorCheck out;
    out.expected = complex{0.0, hbar};
    if (m.alpha() == 0.0) {
        // Decoupled oscillator: no field mode carries q; the commutator is not represented.
        out.value = complex{};
        out.residual = 1.0;
        return out;
    }
    const auto r = quad::integrate_semi_infinite(f, spec);
    out.classification = r.classification;
    out.value = complex{0.0, r.value};
    out.residual = std::abs(out.value - out.expected) / hbar;
    return out;
}

struct TestFunction {
    double center{0.0};
    double width{1.0};
    double amplitude{1.0};

    double operator()(double x) const {
        const double u = (x - center) / width;
        return amplitude * std::exp(-0.5 * u * u);
    }
    double lo() const { return center - 12.0 * width; }
    double hi() const { return center + 12.0 * width; }
};

/// Smeared [phi(g), Pi_phi(h)] = int dk (2i w / c^2) Re[G(k) H(k)^*], G = int g f_phi dx,
/// compared against i hbar int g h dx. The residual is relative to hbar ||g|| ||h||.
inline CommutatorCheck verify_field_commutator(const ScalarFieldModel& m, const TestFunction& g, const TestFunction& h,
                                               double hbar = 1.0, const quad::QuadratureSpec& base = {}) {
    quad::QuadratureSpec inner;
    inner.rel_tol = 1e-11;
    inner.abs_tol = 1e-15;
    inner.max_subdivisions = 2000;

    auto smear = [&](const TestFunction& t, double k) {
        const complex fq = f_q(m, k, hbar);
        auto integrand = [&](double x) { return t(x) * f_phi(m, x, k, fq, hbar); };
        std::vector<double> pts{t.center};
        if (t.lo() < 0.0 && t.hi() > 0.0) pts.push_back(0.0);
        quad::QuadratureSpec s = inner;
        s.breakpoints = pts;
        return quad::integrate_interval_complex(integrand, t.lo(), t.hi(), s).value;
    };
    auto integrand = [&](double k) {
        const double w = m.c() * std::abs(k);
        const complex G = smear(g, k);
        const complex H = smear(h, k);
        return 2.0 * w / (m.c() * m.c()) * (G * std::conj(H)).real();
    };

    const double min_width = std::min(g.width, h.width);
    const double K = 40.0 / min_width + 300.0 * detail::max_scale_k(m);
    quad::QuadratureSpec outer = base;
    outer.rel_tol = std::max(base.rel_tol, 1e-9);
    outer.abs_tol = std::max(base.abs_tol, 1e-13);
    outer.breakpoints = detail::resonance_points_k(m);
    for (double j = 1.0; j <= 40.0; j *= 2.0) outer.breakpoints.push_back(j / min_width);
    std::vector<double> neg;
    for (double b : outer.breakpoints) neg.push_back(-b);
    const auto pos_part = quad::integrate_interval(integrand, 0.0, K, outer);
    quad::QuadratureSpec outer_neg = outer;
    outer_neg.breakpoints = neg;
    const auto neg_part = quad::integrate_interval(integrand, -K, 0.0, outer_neg);

    quad::QuadratureSpec ov = inner;
    ov.breakpoints = {g.center, h.center};
    const double lo = std::min(g.lo(), h.lo()), hi = std::max(g.hi(), h.hi());
    const double overlap = quad::integrate_interval([&](double x) { return g(x) * h(x); }, lo, hi, ov).value;
    const double gg = quad::integrate_interval([&](double x) { return g(x) * g(x); }, g.lo(), g.hi(), ov).value;
    const double hh = quad::integrate_interval([&](double x) { return h(x) * h(x); }, h.lo(), h.hi(), ov).value;

    CommutatorCheck out;
    out.value = complex{0.0, pos_part.value + neg_part.value};
    out.expected = complex{0.0, hbar * overlap};
    out.residual = std::abs(out.value - out.expected) / (hbar * std::sqrt(gg * hh));
    out.classification = (pos_part.converged() && neg_part.converged()) ? quad::Classification::converged
                                                          : quad::Classification::inconclusive;
    return out;
}

struct ModeEquationCheck {
    double q_equation{0.0};      // w0^2 f_q = w^2 f_q - i alpha w f_phi(0,k)
    double jump_condition{0.0};  // [d_x f_phi]_0 = -i alpha w f_q
    double jump_delta_form{0.0}; // [d_x f_phi]_0 = alpha f_Pi_q + alpha^2 f_phi(0,k)
    double momentum_relation{0.0};  // f_Pi_q + alpha f_phi(0,k) = -i w f_q
    double field_equation{0.0};  // (w^2/c^2) f_phi + d_x^2 f_phi = 0 off the origin

    double max() const { return std::max({q_equation, jump_condition, jump_delta_form, momentum_relation, field_equation}); }
};

namespace detail {

inline double rel(complex lhs, complex rhs) {
    const double scale = std::max(std::abs(lhs), std::abs(rhs));
    return scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale;
}

}  // namespace detail

/// Pointwise residuals of the coefficient equations; each is normalized by its largest term.
inline ModeEquationCheck verify_mode_equations(const ScalarFieldModel& m, const std::vector<double>& ks,
                                               double hbar = 1.0) {
    ModeEquationCheck out;
    const double a = m.alpha();
    for (double k : ks) {
        const auto s = eval_coefficients(m, k, 0.0, hbar);
        const double w = s.omega;
        const double w02 = m.omega0() * m.omega0();
        // q equation: (w^2 - w0^2) f_q = i alpha w f_phi(0)
        {
            const complex lhs = (w * w - w02) * s.f_q;
            const complex rhs = complex{0.0, a * w} * s.f_phi;
            const double scale = std::max({w * w * std::abs(s.f_q), w02 * std::abs(s.f_q), std::abs(rhs)});
            out.q_equation = std::max(out.q_equation, scale == 0.0 ? 0.0 : std::abs(lhs - rhs) / scale);
        }
        const complex jump = dphi_dx_right(m, k, s.f_q, hbar) - dphi_dx_left(m, k, s.f_q, hbar);
        out.jump_condition = std::max(out.jump_condition, detail::rel(jump, complex{0.0, -a * w} * s.f_q));
        {
            const complex t1 = a * s.f_Pi_q, t2 = a * a * s.f_phi;
            const double scale = std::max({std::abs(jump), std::abs(t1), std::abs(t2)});
            out.jump_delta_form =
                std::max(out.jump_delta_form, scale == 0.0 ? 0.0 : std::abs(jump - (t1 + t2)) / scale);
        }
        {
            const complex t1 = s.f_Pi_q, t2 = a * s.f_phi, rhs = complex{0.0, -w} * s.f_q;
            const double scale = std::max({std::abs(t1), std::abs(t2), std::abs(rhs)});
            out.momentum_relation =
                std::max(out.momentum_relation, scale == 0.0 ? 0.0 : std::abs(t1 + t2 - rhs) / scale);
        }
        // Off the origin each piece is a plane wave e^{i kappa x} with kappa^2 = w^2/c^2,
        // so d_x^2 f = -(w/c)^2 f analytically; check at x = +-1/|k| via the closed-form pieces.
        for (double x : {1.0 / std::abs(k), -1.0 / std::abs(k)}) {
            const double kap = w / m.c();
            const complex scattered = -0.5 * m.c() * a * std::polar(1.0, kap * std::abs(x)) * s.f_q;
            const complex free = h_phi(m, k, hbar) * std::polar(1.0, k * x);
            const complex d2 = -kap * kap * scattered - k * k * free;
            const complex f = f_phi(m, x, k, s.f_q, hbar);
            const complex lhs = kap * kap * f;
            const double scale = std::max(std::abs(lhs), std::abs(d2));
            out.field_equation = std::max(out.field_equation, scale == 0.0 ? 0.0 : std::abs(lhs + d2) / scale);
        }
    }
    return out;
}

/// Symmetrized <q(t) q(t')> rebuilt from the q mode amplitudes:
/// int dk |f_q|^2 cos(w dt) coth(hbar w / 2kT), coth -> 2kT/(hbar w) classically.
inline quad::QuadratureResult autocorrelation_from_modes(const ScalarFieldModel& m, const thermo::Ensemble& ens,
                                                         double dt, const quad::QuadratureSpec& base = {}) {
    ens.validate();
    if (!(std::abs(dt) <= 50.0 / m.omega0()))
        throw std::invalid_argument("autocorrelation_from_modes: |dt| must not exceed 50 / w0");
    quad::QuadratureSpec spec = base;
    const double variance_scale = std::max(ens.kT() / (m.omega0() * m.omega0()),
                                           ens.regime == thermo::Regime::quantum ? ens.hbar / (2.0 * m.omega0()) : 0.0);
    spec.abs_tol = std::max(spec.abs_tol, spec.rel_tol * variance_scale);
    spec.breakpoints = detail::resonance_points_k(m);
    const double thermal_k = ens.kT() / (ens.hbar * m.c());
    spec.split_point = 10.0 * std::max(detail::max_scale_k(m),
                                       ens.regime == thermo::Regime::quantum ? thermal_k : 0.0);
    if (ens.regime == thermo::Regime::quantum) spec.breakpoints.push_back(thermal_k);
    spec.tail_frequency = std::abs(dt) * m.c();
    if (dt != 0.0) {
        const double period_k = std::numbers::pi / (std::abs(dt) * m.c());
        for (int j = 1; j * period_k < spec.split_point && j < 400; ++j) spec.breakpoints.push_back(j * period_k);
    }
    const double beta_half = ens.hbar / (2.0 * ens.kT());
    auto f = [&](double k) {
        const auto s = eval_coefficients(m, k, 0.0, ens.hbar);
        const double thermal = ens.regime == thermo::Regime::classical ? 2.0 * ens.kT() / (ens.hbar * s.omega)
                                                                        : thermo::kernel::coth(beta_half * s.omega);
        return 2.0 * std::norm(s.f_q) * std::cos(s.omega * dt) * thermal;  // k and -k
    };
    return quad::integrate_semi_infinite(f, spec);
}

}  // namespace ossidamp::field
