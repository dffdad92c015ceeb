// susceptibility.hpp: Reservoir susceptibility models chi(w), derivatives and physicality checks

#pragma once

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstddef>
#include <fstream>
#include <memory>
#include <limits>
#include <numbers>
#include <random>
#include <sstream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <variant>
#include <vector>

#include <math.h>  // boost 1.74 pchip calls isnan unqualified
#include <boost/math/interpolators/pchip.hpp>

#include "ossidamp/quadrature.hpp"

namespace ossidamp::chi {

using complex = std::complex<double>;

// chi(w) = chi0 wL^2 / (wL^2 - w^2 - i GammaL w)
struct LorentzBath {
    double chi0{0.3};     // static susceptibility
    double omega_L{5.0};  // resonance frequency
    double Gamma_L{1.0};  // bath linewidth
};

// chi(w) = i gamma w / (w0^2 (1 - i w / Lambda)), Ohmic below the cutoff Lambda
struct DrudeOhmic {
    double gamma{0.1};
    double Lambda{100.0};
    double omega0{1.0};
};

// chi(w) = i gamma w / w0^2. Strict Ohmic damping; not causal and not diagonalizable.
struct PseudoOhmic {
    double gamma{0.1};
    double omega0{1.0};
};

enum class Extrapolation { none, zero };

/// Susceptibility sampled at w >= 0 (first node at w = 0), interpolated by monotone
/// cubic Hermite splines on Re and Im separately; w < 0 follows from chi(-w) = conj(chi(w)).
class Tabulated {
public:
    Tabulated(std::vector<double> omegas, std::vector<complex> values, Extrapolation extrapolation = Extrapolation::none)
        : omegas_(std::move(omegas)), values_(std::move(values)), extrapolation_(extrapolation) {
        if (omegas_.size() != values_.size()) throw std::invalid_argument("Tabulated: grid and value counts differ");
        if (omegas_.size() < 4) throw std::invalid_argument("Tabulated: need at least four samples");
        if (omegas_.front() != 0.0) throw std::invalid_argument("Tabulated: the grid must start with an explicit w = 0 entry");
        for (std::size_t i = 1; i < omegas_.size(); ++i)
            if (!(omegas_[i] > omegas_[i - 1])) throw std::invalid_argument("Tabulated: grid must be strictly increasing");
        for (const auto& v : values_)
            if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw std::invalid_argument("Tabulated: non-finite value");
        if (values_.front().imag() != 0.0)
            throw std::invalid_argument("Tabulated: Im chi(0) must vanish (chi(-w) = conj(chi(w)))");
        std::vector<double> x1 = omegas_, x2 = omegas_, re, im;
        for (const auto& v : values_) {
            re.push_back(v.real());
            im.push_back(v.imag());
        }
        // Re chi is even in w, so its slope at w = 0 is zero.
        re_ = std::make_shared<Spline>(std::move(x1), std::move(re), 0.0);
        im_ = std::make_shared<Spline>(std::move(x2), std::move(im));
    }

    /// Reads whitespace-separated `omega re_chi im_chi` rows; '#' starts a comment.
    static Tabulated from_file(const std::string& path, Extrapolation extrapolation = Extrapolation::none) {
        std::ifstream in(path);
        if (!in) throw std::runtime_error("Tabulated: cannot open " + path);
        std::vector<double> w;
        std::vector<complex> v;
        std::string line;
        std::size_t line_no = 0;
        while (std::getline(in, line)) {
            ++line_no;
            if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
            std::istringstream row(line);
            double omega, re, im;
            if (!(row >> omega)) continue;
            if (!(row >> re >> im))
                throw std::runtime_error("Tabulated: " + path + ":" + std::to_string(line_no) + ": expected 3 columns");
            if (omega < 0.0) throw std::runtime_error("Tabulated: " + path + ": negative frequency");
            w.push_back(omega);
            v.emplace_back(re, im);
        }
        return Tabulated(std::move(w), std::move(v), extrapolation);
    }

    complex operator()(double omega) const {
        if (omega < 0.0) return std::conj((*this)(-omega));
        if (omega > omegas_.back()) {
            if (extrapolation_ == Extrapolation::zero) return {0.0, 0.0};
            throw std::out_of_range("Tabulated: w = " + std::to_string(omega) + " outside the table");
        }
        return {(*re_)(omega), (*im_)(omega)};
    }

    double max_omega() const noexcept { return omegas_.back(); }
    const std::vector<double>& omegas() const noexcept { return omegas_; }
    const std::vector<complex>& values() const noexcept { return values_; }
    Extrapolation extrapolation() const noexcept { return extrapolation_; }

    /// Local node spacing around w (used as the finite-difference scale).
    double spacing_at(double omega) const {
        omega = std::abs(omega);
        auto it = std::upper_bound(omegas_.begin(), omegas_.end(), omega);
        if (it == omegas_.begin()) ++it;
        if (it == omegas_.end()) --it;
        return *it - *(it - 1);
    }

private:
    using Spline = boost::math::interpolators::pchip<std::vector<double>>;
    std::vector<double> omegas_;
    std::vector<complex> values_;
    Extrapolation extrapolation_;
    std::shared_ptr<Spline> re_;
    std::shared_ptr<Spline> im_;
};

using SusceptibilityModel = std::variant<LorentzBath, DrudeOhmic, PseudoOhmic, Tabulated>;

template <class... Ts>
struct overloaded : Ts... { using Ts::operator()...; };
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

inline std::string_view model_name(const SusceptibilityModel& model) {
    return std::visit(overloaded{
                          [](const LorentzBath&) { return std::string_view{"lorentz"}; },
                          [](const DrudeOhmic&) { return std::string_view{"drude"}; },
                          [](const PseudoOhmic&) { return std::string_view{"pseudo_ohmic"}; },
                          [](const Tabulated&) { return std::string_view{"tabulated"}; },
                      },
                      model);
}

namespace detail {

inline complex lorentz(const LorentzBath& m, double w) {
    const double wl2 = m.omega_L * m.omega_L;
    const double dre = wl2 - w * w;
    const double dim = -m.Gamma_L * w;
    const double norm = dre * dre + dim * dim;
    const double a = m.chi0 * wl2;
    return {a * dre / norm, -a * dim / norm};
}

inline complex lorentz_prime(const LorentzBath& m, double w) {
    // d/dw [A / D] = chi (2w + i Gamma) / D with D = wL^2 - w^2 - i Gamma w
    const double wl2 = m.omega_L * m.omega_L;
    return lorentz(m, w) * complex{2.0 * w, m.Gamma_L} / complex{wl2 - w * w, -m.Gamma_L * w};
}

inline complex drude(const DrudeOhmic& m, double w) {
    const double u = w / m.Lambda;
    const double scale = m.gamma / (m.omega0 * m.omega0 * (1.0 + u * u));
    return {-scale * w * u, scale * w};
}

inline complex drude_prime(const DrudeOhmic& m, double w) {
    const double u = w / m.Lambda;
    const double s = 1.0 + u * u;
    const double scale = m.gamma / (m.omega0 * m.omega0 * s * s);
    return {-2.0 * scale * u, scale * (1.0 - u * u)};
}

inline complex tabulated_prime(const Tabulated& t, double w, double* error, bool* one_sided) {
    const double h = 0.25 * t.spacing_at(w);
    const bool upper_limited = t.extrapolation() == Extrapolation::none && w + h > t.max_omega();
    if (upper_limited) {
        auto backward = [&](double step) { return (t(w) - t(w - step)) / step; };
        const complex d1 = backward(h), d2 = backward(0.5 * h);
        if (error) *error = 4.0 * std::abs(d1 - d2);
        if (one_sided) *one_sided = true;
        return d2;
    }
    auto central = [&](double step) { return (t(w + step) - t(w - step)) / (2.0 * step); };
    const complex d1 = central(h), d2 = central(0.5 * h);
    if (error) *error = std::abs(d1 - d2);
    if (one_sided) *one_sided = false;
    return d2;
}

}  // namespace detail

/// chi(w) for any real w; chi(-w) = conj(chi(w)) holds exactly.
inline complex eval_chi(const SusceptibilityModel& model, double omega) {
    if (!std::isfinite(omega)) throw std::invalid_argument("eval_chi: non-finite frequency");
    if (omega < 0.0) return std::conj(eval_chi(model, -omega));
    return std::visit(overloaded{
                          [&](const LorentzBath& m) { return detail::lorentz(m, omega); },
                          [&](const DrudeOhmic& m) { return detail::drude(m, omega); },
                          [&](const PseudoOhmic& m) { return complex{0.0, m.gamma * omega / (m.omega0 * m.omega0)}; },
                          [&](const Tabulated& m) { return m(omega); },
                      },
                      model);
}

struct DerivativeSample {
    complex value;
    double error_estimate{0.0};
    bool one_sided{false};
};

/// dchi/dw with an error estimate; exact for analytic models, finite differences of the
/// interpolant for tabulated ones (one-sided and flagged at the top of the table).
inline DerivativeSample eval_dchi_detailed(const SusceptibilityModel& model, double omega) {
    if (!std::isfinite(omega)) throw std::invalid_argument("eval_dchi: non-finite frequency");
    if (omega < 0.0) {
        auto s = eval_dchi_detailed(model, -omega);
        s.value = -std::conj(s.value);
        return s;
    }
    return std::visit(overloaded{
                          [&](const LorentzBath& m) { return DerivativeSample{detail::lorentz_prime(m, omega)}; },
                          [&](const DrudeOhmic& m) { return DerivativeSample{detail::drude_prime(m, omega)}; },
                          [&](const PseudoOhmic& m) {
                              return DerivativeSample{complex{0.0, m.gamma / (m.omega0 * m.omega0)}};
                          },
                          [&](const Tabulated& m) {
                              DerivativeSample s;
                              s.value = detail::tabulated_prime(m, omega, &s.error_estimate, &s.one_sided);
                              return s;
                          },
                      },
                      model);
}

inline complex eval_dchi(const SusceptibilityModel& model, double omega) {
    return eval_dchi_detailed(model, omega).value;
}

/// The static value chi(0+).
inline complex static_value(const SusceptibilityModel& model) { return eval_chi(model, 0.0); }

/// True when chi vanishes for every frequency (uncoupled reservoir).
inline bool is_identically_zero(const SusceptibilityModel& model) {
    return std::visit(overloaded{
                          [](const LorentzBath& m) { return m.chi0 == 0.0; },
                          [](const DrudeOhmic& m) { return m.gamma == 0.0; },
                          [](const PseudoOhmic& m) { return m.gamma == 0.0; },
                          [](const Tabulated& m) {
                              return std::all_of(m.values().begin(), m.values().end(),
                                                 [](const complex& v) { return v == complex{}; });
                          },
                      },
                      model);
}

/// True when Im chi vanishes identically on w > 0 while chi itself does not.
inline bool is_lossless(const SusceptibilityModel& model) {
    if (is_identically_zero(model)) return false;
    return std::visit(overloaded{
                          [](const LorentzBath& m) { return m.Gamma_L == 0.0; },
                          [](const DrudeOhmic&) { return false; },
                          [](const PseudoOhmic&) { return false; },
                          [](const Tabulated& m) {
                              return std::all_of(m.values().begin(), m.values().end(),
                                                 [](const complex& v) { return v.imag() == 0.0; });
                          },
                      },
                      model);
}

/// Frequencies where chi has structure (resonances, widths, cutoffs).
inline std::vector<double> feature_frequencies(const SusceptibilityModel& model) {
    std::vector<double> out = std::visit(
        overloaded{
            [](const LorentzBath& m) {
                return std::vector<double>{m.omega_L, m.Gamma_L, std::abs(m.omega_L - m.Gamma_L), m.omega_L + m.Gamma_L};
            },
            [](const DrudeOhmic& m) { return std::vector<double>{m.gamma, m.Lambda, m.omega0}; },
            [](const PseudoOhmic& m) { return std::vector<double>{m.gamma, m.omega0}; },
            [](const Tabulated& m) {
                std::vector<double> pts;
                const auto& w = m.omegas();
                const std::size_t stride = std::max<std::size_t>(1, w.size() / 200);
                for (std::size_t i = 1; i < w.size(); i += stride) pts.push_back(w[i]);
                pts.push_back(w.back());
                return pts;
            },
        },
        model);
    std::erase_if(out, [](double w) { return !(w > 0.0) || !std::isfinite(w); });
    return out;
}

/// Largest feature frequency of the model (1 for a featureless model).
inline double characteristic_scale(const SusceptibilityModel& model) {
    auto f = feature_frequencies(model);
    double s = 0.0;
    for (double w : f) s = std::max(s, w);
    return s > 0.0 ? s : 1.0;
}

/// Coupling density alpha(w) of the harmonic-oscillator continuum that reproduces the
/// damping kernel w0^2 chi: alpha^2(w) = (2/pi) w w0^2 Im chi(w).
inline double coupling_density(const SusceptibilityModel& model, double omega0, double omega) {
    if (!(omega > 0.0)) throw std::domain_error("coupling_density: requires w > 0");
    const double im = eval_chi(model, omega).imag();
    if (im < 0.0) throw std::domain_error("coupling_density: Im chi < 0 at w = " + std::to_string(omega) + " (active medium)");
    return std::sqrt(2.0 / std::numbers::pi * omega * omega0 * omega0 * im);
}

enum class Diagonalizability { satisfied, violated, divergent };

inline std::string_view to_string(Diagonalizability d) noexcept {
    switch (d) {
        case Diagonalizability::satisfied: return "satisfied";
        case Diagonalizability::violated: return "violated";
        case Diagonalizability::divergent: return "divergent";
    }
    return "divergent";
}

inline quad::QuadratureSpec model_spec(const SusceptibilityModel& model, quad::QuadratureSpec spec = {}) {
    spec.split_point = 10.0 * characteristic_scale(model);
    auto f = feature_frequencies(model);
    spec.breakpoints.insert(spec.breakpoints.end(), f.begin(), f.end());
    return spec;
}

/// Integral of Im chi over (0, inf), with divergent tails classified.
inline quad::QuadratureResult im_chi_integral(const SusceptibilityModel& model, const quad::QuadratureSpec& base = {}) {
    auto spec = model_spec(model, base);
    auto f = [&model](double w) { return eval_chi(model, w).imag(); };
    if (const auto* t = std::get_if<Tabulated>(&model); t && t->extrapolation() == Extrapolation::none)
        return quad::integrate_interval(f, 0.0, t->max_omega(), spec);
    return quad::integrate_semi_infinite(f, spec);
}

/// Integral of Im chi(w) / w over (0, inf); equals (pi/2) chi(0) for a causal chi with chi(inf) = 0.
inline quad::QuadratureResult diagonalizability_integral(const SusceptibilityModel& model,
                                                         const quad::QuadratureSpec& base = {}) {
    auto spec = model_spec(model, base);
    auto f = [&model](double w) { return eval_chi(model, w).imag() / w; };
    if (const auto* t = std::get_if<Tabulated>(&model); t && t->extrapolation() == Extrapolation::none)
        return quad::integrate_interval(f, 0.0, t->max_omega(), spec);
    return quad::integrate_semi_infinite(f, spec);
}

/// Sufficient condition for the total Hamiltonian to be diagonalizable:
/// int_0^inf Im chi(w) / w dw < pi/2 (the dimensionless form, i.e. chi(0) < 1).
inline Diagonalizability check_diagonalizability(const SusceptibilityModel& model, const quad::QuadratureSpec& base = {}) {
    auto r = diagonalizability_integral(model, base);
    if (!r.converged()) return Diagonalizability::divergent;
    return r.value < std::numbers::pi / 2.0 ? Diagonalizability::satisfied : Diagonalizability::violated;
}

/// High-frequency limit chi(inf), subtracted before the dispersion integral.
inline double high_frequency_limit(const SusceptibilityModel& model) {
    return std::visit(overloaded{
                          [](const LorentzBath&) { return 0.0; },
                          [](const DrudeOhmic& m) { return -m.gamma * m.Lambda / (m.omega0 * m.omega0); },
                          [](const PseudoOhmic&) { return 0.0; },
                          [](const Tabulated&) { return 0.0; },
                      },
                      model);
}

/// Re chi(w) rebuilt from Im chi by the dispersion relation
/// Re chi(w) - chi(inf) = (2/pi) P int_0^inf w' Im chi(w') / (w'^2 - w^2) dw'.
inline quad::QuadratureResult kk_real_part(const SusceptibilityModel& model, double omega, const quad::QuadratureSpec& base = {}) {
    auto spec = model_spec(model, base);
    omega = std::abs(omega);
    quad::QuadratureResult r;
    const auto* tab = std::get_if<Tabulated>(&model);
    const bool finite_support = tab && tab->extrapolation() == Extrapolation::none;
    const double top = finite_support ? tab->max_omega() : std::numeric_limits<double>::infinity();
    if (omega == 0.0) {
        auto f = [&model](double w) { return eval_chi(model, w).imag() / w; };
        r = finite_support ? quad::integrate_interval(f, 0.0, top, spec) : quad::integrate_semi_infinite(f, spec);
    } else {
        auto f = [&model, omega](double w) { return w * eval_chi(model, w).imag() / ((w - omega) * (w + omega)); };
        if (finite_support && omega >= top) {
            r = quad::integrate_interval(f, 0.0, top, spec);
        } else {
            r = quad::integrate_principal_value(f, omega, 0.0, top, spec);
        }
    }
    r.value = 2.0 / std::numbers::pi * r.value + high_frequency_limit(model);
    r.error_estimate *= 2.0 / std::numbers::pi;
    r.tail_coefficient *= 2.0 / std::numbers::pi;
    return r;
}

struct KramersKronigGrid {
    double omega_max{100.0};
    std::size_t points{201};
    double tolerance{1e-3};
};

enum class KramersKronigStatus { passed, failed, inapplicable_divergent };

inline std::string_view to_string(KramersKronigStatus s) noexcept {
    switch (s) {
        case KramersKronigStatus::passed: return "passed";
        case KramersKronigStatus::failed: return "failed";
        case KramersKronigStatus::inapplicable_divergent: return "inapplicable_divergent";
    }
    return "failed";
}

struct KramersKronigReport {
    KramersKronigStatus status{KramersKronigStatus::passed};
    double max_residual{0.0};  // relative to max |chi| on the grid
    double worst_omega{0.0};
};

/// Compares Re chi with its dispersion-relation reconstruction on a uniform grid over [0, omega_max].
/// Models whose Im chi has a divergent integral are reported as inapplicable.
inline KramersKronigReport check_kramers_kronig(const SusceptibilityModel& model, const KramersKronigGrid& grid,
                                                const quad::QuadratureSpec& base = {}) {
    if (grid.points < 2 || !(grid.omega_max > 0.0)) throw std::invalid_argument("check_kramers_kronig: bad grid");
    KramersKronigReport report;
    const bool divergent_loss = !im_chi_integral(model, base).converged();

    double scale = 0.0;
    std::vector<double> ws;
    for (std::size_t i = 0; i < grid.points; ++i) {
        const double w = grid.omega_max * static_cast<double>(i) / static_cast<double>(grid.points - 1);
        ws.push_back(w);
        scale = std::max(scale, std::abs(eval_chi(model, w)));
    }
    if (scale == 0.0) return report;
    for (double w : ws) {
        auto r = kk_real_part(model, w, base);
        const double residual = r.divergent() ? std::numeric_limits<double>::infinity()
                                              : std::abs(r.value - eval_chi(model, w).real()) / scale;
        if (!(residual <= report.max_residual)) {
            report.max_residual = residual;
            report.worst_omega = w;
        }
        if (std::isinf(residual)) break;
    }
    if (divergent_loss) report.status = KramersKronigStatus::inapplicable_divergent;
    else report.status = report.max_residual < grid.tolerance ? KramersKronigStatus::passed : KramersKronigStatus::failed;
    return report;
}

/// Checks chi(-w) == conj(chi(w)) bit-for-bit on a seeded log-uniform sample.
inline bool check_reality_symmetry(const SusceptibilityModel& model, std::size_t samples = 256, unsigned seed = 12345) {
    std::mt19937_64 rng(seed);
    const double scale = characteristic_scale(model);
    double hi = 1e3 * scale;
    if (const auto* t = std::get_if<Tabulated>(&model); t && t->extrapolation() == Extrapolation::none) hi = t->max_omega();
    std::uniform_real_distribution<double> u(std::log(1e-3 * scale), std::log(hi));
    for (std::size_t i = 0; i < samples; ++i) {
        const double w = std::min(hi, std::exp(u(rng)));
        const complex plus = eval_chi(model, w);
        const complex minus = eval_chi(model, -w);
        if (minus.real() != plus.real() || minus.imag() != -plus.imag()) return false;
    }
    return true;
}

struct ValidityReport {
    bool reality_symmetry_ok{true};
    KramersKronigReport kramers_kronig;
    Diagonalizability diagonalizability{Diagonalizability::satisfied};
    quad::QuadratureResult im_chi_integral;  // int Im chi / w, compared against pi/2
    complex chi0;
};

inline ValidityReport validate_model(const SusceptibilityModel& model, const KramersKronigGrid& grid,
                                     const quad::QuadratureSpec& base = {}) {
    ValidityReport r;
    r.reality_symmetry_ok = check_reality_symmetry(model);
    r.kramers_kronig = check_kramers_kronig(model, grid, base);
    r.im_chi_integral = diagonalizability_integral(model, base);
    r.diagonalizability = !r.im_chi_integral.converged()              ? Diagonalizability::divergent
                          : r.im_chi_integral.value < std::numbers::pi / 2 ? Diagonalizability::satisfied
                                                                            : Diagonalizability::violated;
    r.chi0 = static_value(model);
    return r;
}

}  // namespace ossidamp::chi
