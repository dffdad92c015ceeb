// thermo.hpp: Equilibrium energies U*, U, F*, S* and position autocorrelation of a damped oscillator

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <numbers>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "ossidamp/quadrature.hpp"
#include "ossidamp/susceptibility.hpp"

namespace ossidamp::thermo {

enum class Regime { quantum, classical };

inline std::string_view to_string(Regime r) noexcept { return r == Regime::quantum ? "quantum" : "classical"; }

struct Ensemble {
    double T{1.0};
    double hbar{1.0};
    double kB{1.0};
    Regime regime{Regime::quantum};

    double kT() const noexcept { return kB * T; }

    void validate(bool allow_zero_temperature = false) const {
        if (!(hbar > 0.0) || !(kB > 0.0)) throw std::invalid_argument("Ensemble: hbar and kB must be > 0");
        if (!std::isfinite(T) || T < 0.0 || (T == 0.0 && !allow_zero_temperature))
            throw std::invalid_argument("Ensemble: temperature must be > 0");
    }
};

/// Ohmic oscillator of the scalar-field model; the coupling obeys gamma = c alpha^2 / 2.
struct OscillatorParams {
    double omega0{1.0};
    double gamma{0.1};
    double c{1.0};

    double alpha() const { return std::sqrt(2.0 * gamma / c); }

    static OscillatorParams from_alpha(double omega0, double alpha, double c) {
        return OscillatorParams{omega0, 0.5 * c * alpha * alpha, c};
    }
};

enum class Method { closed_form, quadrature, derived };

inline std::string_view to_string(Method m) noexcept {
    switch (m) {
        case Method::closed_form: return "closed_form";
        case Method::quadrature: return "quadrature";
        case Method::derived: return "derived";
    }
    return "derived";
}

struct Quantity {
    double value{0.0};
    double error{0.0};
    bool diverged{false};
    Method method{Method::quadrature};
    quad::Classification classification{quad::Classification::converged};
    double tail_coefficient{0.0};
};

struct EnergyReport {
    Quantity U_star;
    Quantity U;
    Quantity F_star;
    Quantity S_star;
    double T{1.0};
    Regime regime{Regime::quantum};

    bool any_diverged() const noexcept { return U_star.diverged || U.diverged || F_star.diverged || S_star.diverged; }

    /// |F* - (U* - T S*)| relative to the largest of the three terms (NaN when any diverged).
    double consistency_residual() const {
        if (any_diverged()) return std::numeric_limits<double>::quiet_NaN();
        const double ts = T * S_star.value;
        const double scale = std::max({std::abs(F_star.value), std::abs(U_star.value), std::abs(ts)});
        return scale == 0.0 ? 0.0 : std::abs(F_star.value - (U_star.value - ts)) / scale;
    }
};

/// Raised when a classical closed form disagrees with its quadrature cross-check.
class ConsistencyError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Raised for a model outside the domain of a closed form (e.g. chi(0) = 1).
class SingularModelError : public std::domain_error {
public:
    using std::domain_error::domain_error;
};

// --------------------------- thermal kernels ---------------------------------

namespace kernel {

/// coth(x) for x > 0 without cancellation at small or large x.
inline double coth(double x) { return 1.0 + 2.0 / std::expm1(2.0 * x); }

/// ln sinh(x) for x > 0.
inline double log_sinh(double x) { return x - std::numbers::ln2 + std::log(-std::expm1(-2.0 * x)); }

/// coth(x) - ln(sinh x) / x, the temperature factor of the entropy integrand times T.
inline double entropy_factor(double x) {
    return 2.0 / std::expm1(2.0 * x) + (std::numbers::ln2 - std::log(-std::expm1(-2.0 * x))) / x;
}

struct Response {
    double num_re, num_im, den_re, den_im;
};

// Numerator and denominator of the mean-force response
// [w0^2 (w chi' - chi + 1) + w^2] / [w0^2 (1 - chi) - w^2], assembled from the real and
// imaginary parts separately so that Im of the ratio keeps full relative accuracy.
inline Response response(const chi::SusceptibilityModel& model, double omega0, double w) {
    const auto x = chi::eval_chi(model, w);
    const auto dx = chi::eval_dchi(model, w);
    const double w02 = omega0 * omega0;
    return Response{w02 * (1.0 + w * dx.real() - x.real()) + w * w, w02 * (w * dx.imag() - x.imag()),
                    w02 * (1.0 - x.real()) - w * w, -w02 * x.imag()};
}

}  // namespace kernel

/// Im{[w0^2 (w chi' - chi + 1) + w^2] / [w0^2 (1 - chi) - w^2]}, the spectral weight of U*.
inline double mean_force_kernel(const chi::SusceptibilityModel& model, double omega0, double w) {
    const auto r = kernel::response(model, omega0, w);
    return (r.num_im * r.den_re - r.num_re * r.den_im) / (r.den_re * r.den_re + r.den_im * r.den_im);
}

/// Im{(w0^2 + w^2) / [w0^2 (1 - chi) - w^2]}, the spectral weight of U.
inline double internal_energy_kernel(const chi::SusceptibilityModel& model, double omega0, double w) {
    const auto x = chi::eval_chi(model, w);
    const double w02 = omega0 * omega0;
    const double den_re = w02 * (1.0 - x.real()) - w * w;
    const double den_im = -w02 * x.imag();
    return -(w02 + w * w) * den_im / (den_re * den_re + den_im * den_im);
}

/// Frequencies where Re of w0^2 (1 - chi) - w^2 vanishes, i.e. the damped resonances.
inline std::vector<double> resonance_frequencies(const chi::SusceptibilityModel& model, double omega0, double top) {
    auto re_den = [&](double w) { return omega0 * omega0 * (1.0 - chi::eval_chi(model, w).real()) - w * w; };
    std::vector<double> roots;
    const double lo = 1e-6 * std::min(omega0, top);
    constexpr int samples = 4000;
    double w_prev = lo, f_prev = re_den(lo);
    for (int i = 1; i <= samples; ++i) {
        const double w = lo * std::pow(top / lo, static_cast<double>(i) / samples);
        const double fw = re_den(w);
        if ((f_prev < 0.0) != (fw < 0.0)) {
            double a = w_prev, b = w, fa = f_prev;
            for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
                const double m = 0.5 * (a + b);
                const double fm = re_den(m);
                if ((fa < 0.0) == (fm < 0.0)) { a = m; fa = fm; } else { b = m; }
            }
            roots.push_back(0.5 * (a + b));
        }
        w_prev = w;
        f_prev = fw;
    }
    return roots;
}

/// Quadrature spec for integrands built from chi, w0 and the thermal scale: the tail split
/// sits at 10x the largest characteristic frequency and the initial partition brackets every
/// damped resonance at several multiples of its width.
inline quad::QuadratureSpec integration_spec(const chi::SusceptibilityModel& model, double omega0, const Ensemble& ens,
                                             const quad::QuadratureSpec& base) {
    quad::QuadratureSpec spec = base;
    std::vector<double> features = chi::feature_frequencies(model);
    features.push_back(omega0);
    if (ens.T > 0.0) features.push_back(ens.kT() / ens.hbar);
    double scale = 0.0;
    for (double f : features) scale = std::max(scale, f);
    spec.split_point = 10.0 * scale;
    spec.breakpoints.insert(spec.breakpoints.end(), features.begin(), features.end());
    for (double wr : resonance_frequencies(model, omega0, spec.split_point)) {
        const auto x = chi::eval_chi(model, wr);
        const auto dx = chi::eval_dchi(model, wr);
        const double slope = std::abs(omega0 * omega0 * dx.real() + 2.0 * wr);
        double width = omega0 * omega0 * std::abs(x.imag()) / std::max(slope, 1e-300);
        width = std::clamp(width, 1e-12 * wr, wr);
        spec.breakpoints.push_back(wr);
        for (double m : {1.0, 3.0, 10.0, 30.0, 100.0, 300.0}) {
            spec.breakpoints.push_back(wr + m * width);
            if (wr - m * width > 0.0) spec.breakpoints.push_back(wr - m * width);
        }
    }
    return spec;
}

namespace detail {

inline void require_lossy(const chi::SusceptibilityModel& model) {
    if (chi::is_lossless(model))
        throw std::domain_error("lossless susceptibility (Im chi = 0, chi != 0) has a purely discrete spectrum; unsupported");
}

inline void require_regime(const Ensemble& ens, Regime r, const char* what) {
    if (ens.regime != r) throw std::invalid_argument(std::string(what) + ": wrong regime in ensemble");
}

inline quad::QuadratureResult closed(double v) {
    quad::QuadratureResult r;
    r.value = v;
    return r;
}

inline double undamped_energy_quantum(double omega0, const Ensemble& ens) {
    return 0.5 * ens.hbar * omega0 * kernel::coth(ens.hbar * omega0 / (2.0 * ens.kT()));
}

inline double undamped_free_energy_quantum(double omega0, const Ensemble& ens) {
    const double x = ens.hbar * omega0 / (2.0 * ens.kT());
    return ens.kT() * (x + std::log(-std::expm1(-2.0 * x)));  // kT ln(2 sinh x)
}

}  // namespace detail

/// Closed-form quantities of the undamped oscillator.
inline double undamped_energy(double omega0, const Ensemble& ens) {
    return ens.regime == Regime::quantum ? detail::undamped_energy_quantum(omega0, ens) : ens.kT();
}

inline double undamped_free_energy(double omega0, const Ensemble& ens) {
    return ens.regime == Regime::quantum ? detail::undamped_free_energy_quantum(omega0, ens)
                                         : ens.kT() * std::log(ens.hbar * omega0 / ens.kT());
}

inline double undamped_entropy(double omega0, const Ensemble& ens) {
    if (ens.regime == Regime::classical) return ens.kB * (1.0 - std::log(ens.hbar * omega0 / ens.kT()));
    if (ens.T == 0.0) return 0.0;
    const double x = ens.hbar * omega0 / (2.0 * ens.kT());
    return ens.kB * (x * kernel::coth(x) - (x + std::log(-std::expm1(-2.0 * x))));
}

// ------------------------------ quantum --------------------------------------

/// U* = (hbar/2pi) int_0^inf coth(hbar w / 2kT) Im{...} dw. Divergent tails (strict Ohmic
/// damping) come back classified with the fitted coefficient, never as a number.
inline quad::QuadratureResult mean_force_energy_quantum(const chi::SusceptibilityModel& model, double omega0,
                                                        const Ensemble& ens, const quad::QuadratureSpec& base = {}) {
    detail::require_regime(ens, Regime::quantum, "mean_force_energy_quantum");
    ens.validate();
    if (chi::is_identically_zero(model)) return detail::closed(detail::undamped_energy_quantum(omega0, ens));
    detail::require_lossy(model);
    const auto spec = integration_spec(model, omega0, ens, base);
    const double beta_half = ens.hbar / (2.0 * ens.kT());
    auto f = [&](double w) {
        return ens.hbar / (2.0 * std::numbers::pi) * kernel::coth(beta_half * w) * mean_force_kernel(model, omega0, w);
    };
    return quad::integrate_semi_infinite(f, spec);
}

/// U = (hbar/2pi) int_0^inf coth(hbar w / 2kT) Im{(w0^2 + w^2) / [w0^2 (1 - chi) - w^2]} dw.
inline quad::QuadratureResult internal_energy_quantum(const chi::SusceptibilityModel& model, double omega0,
                                                      const Ensemble& ens, const quad::QuadratureSpec& base = {}) {
    detail::require_regime(ens, Regime::quantum, "internal_energy_quantum");
    ens.validate();
    if (chi::is_identically_zero(model)) return detail::closed(detail::undamped_energy_quantum(omega0, ens));
    detail::require_lossy(model);
    const auto spec = integration_spec(model, omega0, ens, base);
    const double beta_half = ens.hbar / (2.0 * ens.kT());
    auto f = [&](double w) {
        return ens.hbar / (2.0 * std::numbers::pi) * kernel::coth(beta_half * w) * internal_energy_kernel(model, omega0, w);
    };
    return quad::integrate_semi_infinite(f, spec);
}

/// F* = (kT/pi) int_0^inf ln sinh(hbar w / 2kT) Im{...}/w dw + kT ln 2.
inline quad::QuadratureResult free_energy_quantum(const chi::SusceptibilityModel& model, double omega0,
                                                  const Ensemble& ens, const quad::QuadratureSpec& base = {}) {
    detail::require_regime(ens, Regime::quantum, "free_energy_quantum");
    ens.validate();
    if (chi::is_identically_zero(model)) return detail::closed(detail::undamped_free_energy_quantum(omega0, ens));
    detail::require_lossy(model);
    const auto spec = integration_spec(model, omega0, ens, base);
    const double kT = ens.kT();
    const double beta_half = ens.hbar / (2.0 * kT);
    auto f = [&](double w) {
        return kT / std::numbers::pi * kernel::log_sinh(beta_half * w) * mean_force_kernel(model, omega0, w) / w;
    };
    auto r = quad::integrate_semi_infinite(f, spec);
    if (r.converged()) r.value += kT * std::numbers::ln2;
    return r;
}

/// S* = (hbar/2pi) int_0^inf {coth(x)/T - (2kB/hbar w) ln sinh(x)} Im{...} dw - kB ln 2,
/// x = hbar w / 2kT. At T = 0 the braces reduce to 2 kB ln2 / (hbar w).
inline quad::QuadratureResult entropy_quantum(const chi::SusceptibilityModel& model, double omega0, const Ensemble& ens,
                                              const quad::QuadratureSpec& base = {}) {
    detail::require_regime(ens, Regime::quantum, "entropy_quantum");
    ens.validate(true);
    if (chi::is_identically_zero(model)) return detail::closed(undamped_entropy(omega0, ens));
    detail::require_lossy(model);
    const auto spec = integration_spec(model, omega0, ens, base);
    const double pref = ens.hbar / (2.0 * std::numbers::pi);
    quad::QuadratureResult r;
    if (ens.T == 0.0) {
        auto f = [&](double w) {
            return pref * 2.0 * ens.kB * std::numbers::ln2 / (ens.hbar * w) * mean_force_kernel(model, omega0, w);
        };
        r = quad::integrate_semi_infinite(f, spec);
    } else {
        const double beta_half = ens.hbar / (2.0 * ens.kT());
        auto f = [&](double w) {
            return pref / ens.T * kernel::entropy_factor(beta_half * w) * mean_force_kernel(model, omega0, w);
        };
        r = quad::integrate_semi_infinite(f, spec);
    }
    if (r.converged()) r.value -= ens.kB * std::numbers::ln2;
    return r;
}

/// -dF*/dT by the five-point central stencil with step rel_step * T; an independent check on
/// entropy_quantum. Needs rel_step < 1/2 so every stencil temperature stays positive.
inline double entropy_from_free_energy(const chi::SusceptibilityModel& model, double omega0, const Ensemble& ens,
                                       const quad::QuadratureSpec& base = {}, double rel_step = 1e-2) {
    detail::require_regime(ens, Regime::quantum, "entropy_from_free_energy");
    ens.validate();
    if (!(rel_step > 0.0 && rel_step < 0.5)) throw std::invalid_argument("entropy_from_free_energy: rel_step in (0, 1/2)");
    const double h = rel_step * ens.T;
    auto F = [&](double T) {
        Ensemble e = ens;
        e.T = T;
        const auto r = free_energy_quantum(model, omega0, e, base);
        if (!r.converged()) throw std::domain_error("entropy_from_free_energy: free energy did not converge");
        return r.value;
    };
    const double dF = (-F(ens.T + 2 * h) + 8 * F(ens.T + h) - 8 * F(ens.T - h) + F(ens.T - 2 * h)) / (12 * h);
    return -dF;
}

// ------------------------------ classical ------------------------------------

enum class ClassicalMode { closed_form, validate };

struct ClassicalValue {
    double value{0.0};                       // closed form
    std::optional<quad::QuadratureResult> numeric;  // quadrature cross-check (validate mode)
    double relative_deviation{0.0};
};

namespace detail {

inline ClassicalValue check(double closed_value, const quad::QuadratureResult& numeric, double tolerance,
                            const char* what) {
    ClassicalValue out{closed_value, numeric, 0.0};
    if (!numeric.converged())
        throw ConsistencyError(std::string(what) + ": quadrature cross-check did not converge (" +
                               std::string(quad::to_string(numeric.classification)) + ")");
    out.relative_deviation = std::abs(numeric.value - closed_value) / std::max(std::abs(closed_value), 1e-300);
    if (out.relative_deviation > tolerance)
        throw ConsistencyError(std::string(what) + ": quadrature disagrees with closed form, relative deviation " +
                               std::to_string(out.relative_deviation));
    return out;
}

}  // namespace detail

/// (kT/pi) int_0^inf Im{...}/w dw, the even-part form of the classical U* integral.
inline quad::QuadratureResult mean_force_energy_classical_integral(const chi::SusceptibilityModel& model, double omega0,
                                                                   const Ensemble& ens,
                                                                   const quad::QuadratureSpec& base = {}) {
    const auto spec = integration_spec(model, omega0, ens, base);
    const double kT = ens.kT();
    auto f = [&](double w) { return kT / std::numbers::pi * mean_force_kernel(model, omega0, w) / w; };
    return quad::integrate_semi_infinite(f, spec);
}

/// (kT/pi) int_0^inf Im{(w0^2 + w^2) / [w0^2 (1 - chi) - w^2]}/w dw.
inline quad::QuadratureResult internal_energy_classical_integral(const chi::SusceptibilityModel& model, double omega0,
                                                                 const Ensemble& ens,
                                                                 const quad::QuadratureSpec& base = {}) {
    const auto spec = integration_spec(model, omega0, ens, base);
    const double kT = ens.kT();
    auto f = [&](double w) { return kT / std::numbers::pi * internal_energy_kernel(model, omega0, w) / w; };
    return quad::integrate_semi_infinite(f, spec);
}

/// Classical U* = kT for any causal chi; validate mode checks this by quadrature.
inline ClassicalValue mean_force_energy_classical(const chi::SusceptibilityModel& model, double omega0,
                                                  const Ensemble& ens, const quad::QuadratureSpec& base = {},
                                                  ClassicalMode mode = ClassicalMode::closed_form,
                                                  double tolerance = 1e-6) {
    detail::require_regime(ens, Regime::classical, "mean_force_energy_classical");
    ens.validate();
    const double kT = ens.kT();
    if (mode == ClassicalMode::closed_form || chi::is_identically_zero(model)) return ClassicalValue{kT, std::nullopt, 0.0};
    detail::require_lossy(model);
    return detail::check(kT, mean_force_energy_classical_integral(model, omega0, ens, base), tolerance,
                         "mean_force_energy_classical");
}

/// Classical U = kT [1 + chi(0) / (2 (1 - chi(0)))], requires chi(0) != 1.
inline ClassicalValue internal_energy_classical(const chi::SusceptibilityModel& model, double omega0,
                                                const Ensemble& ens, const quad::QuadratureSpec& base = {},
                                                ClassicalMode mode = ClassicalMode::closed_form,
                                                double tolerance = 1e-6) {
    detail::require_regime(ens, Regime::classical, "internal_energy_classical");
    ens.validate();
    const auto c0 = chi::static_value(model);
    if (!std::isfinite(c0.real()) || c0.imag() != 0.0)
        throw SingularModelError("internal_energy_classical: chi(0) must be finite and real");
    if (c0.real() == 1.0) throw SingularModelError("internal_energy_classical: chi(0) = 1");
    const double kT = ens.kT();
    const double closed_value = kT * (1.0 + c0.real() / (2.0 * (1.0 - c0.real())));
    if (mode == ClassicalMode::closed_form || chi::is_identically_zero(model)) return ClassicalValue{closed_value, std::nullopt, 0.0};
    detail::require_lossy(model);
    return detail::check(closed_value, internal_energy_classical_integral(model, omega0, ens, base), tolerance,
                         "internal_energy_classical");
}

/// Classical F* = (kT/pi) int_0^inf ln(hbar w / 2kT) Im{...}/w dw + kT ln 2, with hbar kept
/// as the phase-space unit. For strict Ohmic damping (and no damping) this is kT ln(hbar w0 / kT).
inline quad::QuadratureResult free_energy_classical_integral(const chi::SusceptibilityModel& model, double omega0,
                                                             const Ensemble& ens,
                                                             const quad::QuadratureSpec& base = {}) {
    const auto spec = integration_spec(model, omega0, ens, base);
    const double kT = ens.kT();
    const double scale = ens.hbar / (2.0 * kT);
    auto f = [&](double w) { return kT / std::numbers::pi * std::log(scale * w) * mean_force_kernel(model, omega0, w) / w; };
    auto r = quad::integrate_semi_infinite(f, spec);
    if (r.converged()) r.value += kT * std::numbers::ln2;
    return r;
}

inline quad::QuadratureResult free_energy_classical(const chi::SusceptibilityModel& model, double omega0,
                                                    const Ensemble& ens, const quad::QuadratureSpec& base = {}) {
    detail::require_regime(ens, Regime::classical, "free_energy_classical");
    ens.validate();
    if (chi::is_identically_zero(model) || std::holds_alternative<chi::PseudoOhmic>(model))
        return detail::closed(ens.kT() * std::log(ens.hbar * omega0 / ens.kT()));
    detail::require_lossy(model);
    return free_energy_classical_integral(model, omega0, ens, base);
}

// ---------------------------- autocorrelation --------------------------------

/// Symmetrized position autocorrelation of the Ohmic oscillator,
/// (hbar/pi) int_0^inf gamma w / D cos(w dt) coth(hbar w / 2kT) dw, D = (w^2 - w0^2)^2 + gamma^2 w^2.
/// The classical regime replaces coth by 2kT / (hbar w).
inline quad::QuadratureResult position_autocorrelation(double gamma, double omega0, const Ensemble& ens, double dt,
                                                       const quad::QuadratureSpec& base = {}) {
    ens.validate();
    if (!(std::abs(dt) <= 50.0 / omega0))
        throw std::invalid_argument("position_autocorrelation: |dt| must not exceed 50 / w0");
    if (!(gamma > 0.0)) throw std::invalid_argument("position_autocorrelation: gamma must be > 0");
    quad::QuadratureSpec spec = base;
    const double thermal = ens.kT() / ens.hbar;
    // |C(dt)| <= C(0), so accuracy is judged against the variance scale rather than |C(dt)|
    const double variance_scale = std::max(ens.kT() / (omega0 * omega0),
                                           ens.regime == Regime::quantum ? ens.hbar / (2.0 * omega0) : 0.0);
    spec.abs_tol = std::max(spec.abs_tol, spec.rel_tol * variance_scale);
    spec.split_point = 10.0 * std::max({omega0, gamma, ens.regime == Regime::quantum ? thermal : 0.0});
    spec.breakpoints.insert(spec.breakpoints.end(), {omega0, gamma, 0.5 * gamma});
    if (gamma < 2.0 * omega0) {
        const double w1 = std::sqrt(omega0 * omega0 - 0.25 * gamma * gamma);
        for (double m : {0.0, 1.0, 3.0, 10.0, 30.0}) {
            spec.breakpoints.push_back(w1 + m * 0.5 * gamma);
            if (w1 > m * 0.5 * gamma) spec.breakpoints.push_back(w1 - m * 0.5 * gamma);
        }
    } else {
        spec.breakpoints.push_back(omega0 * omega0 / gamma);
    }
    if (ens.regime == Regime::quantum) spec.breakpoints.push_back(thermal);
    spec.tail_frequency = std::abs(dt);
    if (dt != 0.0)
        for (int k = 1; k * std::numbers::pi / std::abs(dt) < spec.split_point && k < 400; ++k)
            spec.breakpoints.push_back(k * std::numbers::pi / std::abs(dt));

    const double w02 = omega0 * omega0;
    auto spectral = [=](double w) {
        const double a = w * w - w02;
        return gamma / (a * a + gamma * gamma * w * w);  // gamma / D
    };
    if (ens.regime == Regime::classical) {
        const double pref = 2.0 * ens.kT() / std::numbers::pi;
        auto f = [&](double w) { return pref * spectral(w) * std::cos(w * dt); };
        return quad::integrate_semi_infinite(f, spec);
    }
    const double beta_half = ens.hbar / (2.0 * ens.kT());
    const double pref = ens.hbar / std::numbers::pi;
    auto f = [&](double w) { return pref * w * spectral(w) * std::cos(w * dt) * kernel::coth(beta_half * w); };
    return quad::integrate_semi_infinite(f, spec);
}

/// Classical closed form (kT/w0^2) e^{-gamma dt/2} [cos w1 dt + (gamma/2w1) sin w1 dt], gamma < 2 w0.
inline double classical_autocorrelation_underdamped(double gamma, double omega0, double kT, double dt) {
    const double w1 = std::sqrt(omega0 * omega0 - 0.25 * gamma * gamma);
    const double t = std::abs(dt);
    return kT / (omega0 * omega0) * std::exp(-0.5 * gamma * t) *
           (std::cos(w1 * t) + 0.5 * gamma / w1 * std::sin(w1 * t));
}

// ----------------------------- full report -----------------------------------

inline Quantity to_quantity(const quad::QuadratureResult& r, Method method) {
    Quantity q;
    q.value = r.value;
    q.error = r.error_estimate;
    q.classification = r.classification;
    q.diverged = r.divergent();
    q.tail_coefficient = r.tail_coefficient;
    q.method = method;
    return q;
}

/// U*, U, F*, S* at one temperature in the ensemble's regime.
inline EnergyReport energy_report(const chi::SusceptibilityModel& model, double omega0, const Ensemble& ens,
                                  const quad::QuadratureSpec& base = {}) {
    EnergyReport rep;
    rep.T = ens.T;
    rep.regime = ens.regime;
    const bool zero = chi::is_identically_zero(model);
    const Method integral = zero ? Method::closed_form : Method::quadrature;
    if (ens.regime == Regime::quantum) {
        rep.U_star = to_quantity(mean_force_energy_quantum(model, omega0, ens, base), integral);
        rep.U = to_quantity(internal_energy_quantum(model, omega0, ens, base), integral);
        rep.F_star = to_quantity(free_energy_quantum(model, omega0, ens, base), integral);
        rep.S_star = to_quantity(entropy_quantum(model, omega0, ens, base), integral);
        return rep;
    }
    rep.U_star.value = mean_force_energy_classical(model, omega0, ens, base).value;
    rep.U_star.method = Method::closed_form;
    rep.U.value = internal_energy_classical(model, omega0, ens, base).value;
    rep.U.method = Method::closed_form;
    const bool ohmic = std::holds_alternative<chi::PseudoOhmic>(model);
    rep.F_star = to_quantity(free_energy_classical(model, omega0, ens, base),
                             (zero || ohmic) ? Method::closed_form : Method::quadrature);
    rep.S_star.method = Method::derived;
    if (rep.F_star.diverged || !std::isfinite(rep.F_star.value)) {
        rep.S_star.diverged = rep.F_star.diverged;
        rep.S_star.classification = rep.F_star.classification;
        rep.S_star.value = std::numeric_limits<double>::quiet_NaN();
    } else {
        rep.S_star.value = (rep.U_star.value - rep.F_star.value) / ens.T;
        rep.S_star.error = rep.F_star.error / ens.T;
    }
    return rep;
}

// ------------------------------ Table 1 --------------------------------------

enum class Relation { equal, unequal, divergent };

inline std::string_view to_string(Relation r) noexcept {
    switch (r) {
        case Relation::equal: return "equal";
        case Relation::unequal: return "unequal";
        case Relation::divergent: return "divergent";
    }
    return "divergent";
}

struct TableCell {
    std::string damping;  // "none", "ohmic", "general"
    Regime regime{Regime::quantum};
    Quantity U;
    Quantity U_star;
    Relation relation{Relation::equal};
    double gap{0.0};        // |U - U*|
    double gap_error{0.0};  // combined error bars of U and U*
};

struct TableOne {
    double T{1.0};
    double omega0{1.0};
    double gamma{0.1};
    std::vector<TableCell> cells;  // row-major: none, ohmic, general x classical, quantum

    const TableCell& cell(std::string_view damping, Regime regime) const {
        for (const auto& c : cells)
            if (c.damping == damping && c.regime == regime) return c;
        throw std::out_of_range("TableOne: no such cell");
    }
};

namespace detail {

inline TableCell make_cell(std::string damping, Regime regime, Quantity U, Quantity U_star) {
    TableCell c{std::move(damping), regime, U, U_star};
    if (U.diverged || U_star.diverged || !std::isfinite(U.value) || !std::isfinite(U_star.value)) {
        c.relation = Relation::divergent;
        c.gap = std::numeric_limits<double>::quiet_NaN();
        return c;
    }
    c.gap = std::abs(U.value - U_star.value);
    const double scale = std::max(std::abs(U.value), std::abs(U_star.value));
    c.gap_error = U.error + U_star.error + 64.0 * std::numeric_limits<double>::epsilon() * scale;
    c.relation = c.gap > c.gap_error ? Relation::unequal : Relation::equal;
    return c;
}

inline Quantity closed_quantity(double v) {
    Quantity q;
    q.value = v;
    q.method = Method::closed_form;
    return q;
}

}  // namespace detail

/// The six-cell comparison of U and U* for no damping, strict Ohmic damping (rate
/// params.gamma) and the general model `general`, classical and quantum, at temperature T.
inline TableOne table_one_report(const OscillatorParams& params, double T, double hbar, double kB,
                                 const chi::SusceptibilityModel& general, const quad::QuadratureSpec& base = {}) {
    TableOne table;
    table.T = T;
    table.omega0 = params.omega0;
    table.gamma = params.gamma;
    const Ensemble classical{T, hbar, kB, Regime::classical};
    const Ensemble quantum{T, hbar, kB, Regime::quantum};
    const chi::SusceptibilityModel none = chi::LorentzBath{0.0, 1.0, 1.0};
    const chi::SusceptibilityModel ohmic = chi::PseudoOhmic{params.gamma, params.omega0};
    const double w0 = params.omega0;

    auto classical_cell = [&](std::string name, const chi::SusceptibilityModel& m) {
        const auto u_star = mean_force_energy_classical(m, w0, classical, base, ClassicalMode::validate);
        const auto u = internal_energy_classical(m, w0, classical, base, ClassicalMode::validate);
        Quantity U = detail::closed_quantity(u.value);
        Quantity Us = detail::closed_quantity(u_star.value);
        return detail::make_cell(std::move(name), Regime::classical, U, Us);
    };
    auto quantum_cell = [&](std::string name, const chi::SusceptibilityModel& m) {
        const Method method = chi::is_identically_zero(m) ? Method::closed_form : Method::quadrature;
        Quantity U = to_quantity(internal_energy_quantum(m, w0, quantum, base), method);
        Quantity Us = to_quantity(mean_force_energy_quantum(m, w0, quantum, base), method);
        return detail::make_cell(std::move(name), Regime::quantum, U, Us);
    };

    table.cells.push_back(classical_cell("none", none));
    table.cells.push_back(quantum_cell("none", none));
    table.cells.push_back(classical_cell("ohmic", ohmic));
    table.cells.push_back(quantum_cell("ohmic", ohmic));
    table.cells.push_back(classical_cell("general", general));
    table.cells.push_back(quantum_cell("general", general));
    return table;
}

}  // namespace ossidamp::thermo
