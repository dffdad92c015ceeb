// acceptance.cpp: One pass/fail line per acceptance criterion; exit status 1 if any fails

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>

#include "oracles.hpp"
#include "ossidamp/bath_oracle.hpp"
#include "ossidamp/cli/commands.hpp"
#include "ossidamp/field_modes.hpp"
#include "ossidamp/quadrature.hpp"
#include "ossidamp/susceptibility.hpp"
#include "ossidamp/thermo.hpp"

namespace {

using namespace ossidamp;

struct Outcome {
    bool pass{false};
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& title, const std::function<Outcome()>& body) {
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
        o = body();
    } catch (const std::exception& e) {
        o = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (!o.pass) ++failures;
    std::printf("[%s] AC%-2d %s: %s (%.1f s)\n", o.pass ? "PASS" : "FAIL", id, title.c_str(), o.detail.c_str(), secs);
    std::fflush(stdout);
}

const thermo::Ensemble kClassical{1.0, 1.0, 1.0, thermo::Regime::classical};
const thermo::Ensemble kQuantum{1.0, 1.0, 1.0, thermo::Regime::quantum};

std::string sci(double v) { return fmt::format("{:.3e}", v); }

// 1. U* = kT for randomized causal baths, by quadrature of the even-part form.
Outcome classical_universality() {
    oracle::LogUniform wl(0.2, 20.0, 11), gl(0.05, 5.0, 12);
    std::mt19937_64 rng(13);
    std::uniform_real_distribution<double> c0(0.0, 0.9);
    double worst = 0.0;
    const int n = 24;
    for (int i = 0; i < n; ++i) {
        double chi0 = c0(rng);
        if (chi0 == 0.0) chi0 = 0.5;
        const chi::SusceptibilityModel m = chi::LorentzBath{chi0, wl(), gl()};
        const auto r = thermo::mean_force_energy_classical_integral(m, 1.0, kClassical);
        if (!r.converged()) return {false, fmt::format("model {} quadrature {}", i, quad::to_string(r.classification))};
        worst = std::max(worst, std::abs(r.value - kClassical.kT()) / kClassical.kT());
    }
    return {worst < 1e-5, fmt::format("{} models, max relative deviation from kT {} (tol 1e-5)", n, sci(worst))};
}

// 2. int gamma (w^2 + w0^2) / D dw = pi.
Outcome classical_ohmic_integral() {
    double worst = 0.0;
    for (double g : {0.01, 0.3, 3.0, 30.0}) {
        const chi::SusceptibilityModel m = chi::PseudoOhmic{g, 1.0};
        const auto r = thermo::mean_force_energy_classical_integral(m, 1.0, kClassical);
        const double integral = std::numbers::pi * r.value / kClassical.kT();
        worst = std::max(worst, std::abs(integral - std::numbers::pi) / std::numbers::pi);
    }
    return {worst < 1e-8, fmt::format("gamma/w0 in {{0.01, 0.3, 3, 30}}, max relative deviation from pi {} (tol 1e-8)", sci(worst))};
}

// 3. U = kT [1 + chi0 / (2 (1 - chi0))].
Outcome classical_internal_energy() {
    double worst = 0.0;
    for (double chi0 : {0.1, 0.5, 0.8}) {
        const chi::SusceptibilityModel m = chi::LorentzBath{chi0, 2.0, 1.0};
        const double closed = 1.0 + chi0 / (2.0 * (1.0 - chi0));
        const auto r = thermo::internal_energy_classical_integral(m, 1.0, kClassical);
        worst = std::max(worst, std::abs(r.value - closed) / closed);
    }
    const double half = thermo::internal_energy_classical(chi::LorentzBath{0.5, 2.0, 1.0}, 1.0, kClassical).value;
    return {worst < 1e-5 && half == 1.5,
            fmt::format("max quadrature/closed-form deviation {} (tol 1e-5); chi0 = 0.5 gives {} kT", sci(worst), half)};
}

// 4. Log divergence of the quantum Ohmic U* and the pointwise U/U* integrand identity.
Outcome quantum_ohmic_divergence() {
    const double g = 0.1;
    const chi::SusceptibilityModel m = chi::PseudoOhmic{g, 1.0};
    std::vector<double> x, y;
    for (double lam = 1e3; lam <= 1.0001e6; lam *= std::sqrt(10.0)) {
        quad::QuadratureSpec spec;
        spec.cutoff = lam;
        const auto r = thermo::mean_force_energy_quantum(m, 1.0, kQuantum, spec);
        x.push_back(std::log(lam));
        y.push_back(r.value);
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { mx += x[i]; my += y[i]; }
    mx /= x.size();
    my /= y.size();
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < x.size(); ++i) { sxy += (x[i] - mx) * (y[i] - my); sxx += (x[i] - mx) * (x[i] - mx); }
    const double slope = sxy / sxx;
    const double expected = g / (2.0 * std::numbers::pi);
    const double slope_err = std::abs(slope - expected) / expected;

    const auto unbounded = thermo::mean_force_energy_quantum(m, 1.0, kQuantum);
    std::mt19937_64 rng(7);
    std::uniform_real_distribution<double> u(std::log(1e-3), std::log(1e4));
    double worst = 0.0;
    for (int i = 0; i < 1000; ++i) {
        const double w = std::exp(u(rng));
        const double a = thermo::mean_force_kernel(m, 1.0, w), b = thermo::internal_energy_kernel(m, 1.0, w);
        worst = std::max(worst, std::abs(a - b) / std::abs(b));
    }
    const bool ok = slope_err < 0.05 && worst < 1e-12 && unbounded.classification == quad::Classification::log_divergent;
    return {ok, fmt::format("slope {} vs hbar gamma/2pi {} (rel err {}, tol 5%); unbounded: {}; integrand identity {} (tol 1e-12)",
                            sci(slope), sci(expected), sci(slope_err), quad::to_string(unbounded.classification), sci(worst))};
}

// 5. Discrete-bath oracle against the continuum integrals.
Outcome oracle_agreement() {
    const chi::SusceptibilityModel m = chi::LorentzBath{0.3, 5.0, 1.0};
    const auto bath = bath::discretize(m, 1.0, 2000, 100.0);
    const auto modes = bath::diagonalize(bath);
    const auto q = bath::thermal_energies_discrete(modes, bath, kQuantum);
    const auto us = thermo::mean_force_energy_quantum(m, 1.0, kQuantum);
    const auto u = thermo::internal_energy_quantum(m, 1.0, kQuantum);
    const double e1 = std::abs(q.U_star - us.value) / std::abs(us.value);
    const double e2 = std::abs(q.U - u.value) / std::abs(u.value);
    double classical_worst = 0.0;
    for (std::size_t n : {250u, 500u, 1000u, 2000u}) {
        const auto b = bath::discretize(m, 1.0, n, 100.0);
        const auto e = bath::thermal_energies_discrete(n == 2000 ? modes : bath::diagonalize(b), b, kClassical);
        classical_worst = std::max(classical_worst, std::abs(e.U_star - kClassical.kT()));
    }
    const bool ok = e1 < 0.01 && e2 < 0.01 && classical_worst < 1e-12;
    return {ok, fmt::format("U* discrete {} vs {} (rel {}), U discrete {} vs {} (rel {}), tol 1%; classical |U* - kT| max {} (tol 1e-12)",
                            sci(q.U_star), sci(us.value), sci(e1), sci(q.U), sci(u.value), sci(e2), sci(classical_worst))};
}

// 6. F* = U* - T S* and S* = -dF*/dT over three decades of T.
Outcome thermodynamic_identities() {
    const chi::SusceptibilityModel m = chi::LorentzBath{0.3, 5.0, 1.0};
    double worst_f = 0.0, worst_s = 0.0;
    for (double T : {0.03, 0.1, 0.3, 1.0, 3.0, 10.0, 30.0}) {
        const thermo::Ensemble e{T, 1.0, 1.0, thermo::Regime::quantum};
        const auto rep = thermo::energy_report(m, 1.0, e);
        worst_f = std::max(worst_f, rep.consistency_residual());
        const double ds = std::abs(thermo::entropy_from_free_energy(m, 1.0, e) - rep.S_star.value) / std::abs(rep.S_star.value);
        worst_s = std::max(worst_s, ds);
    }
    return {worst_f < 1e-4 && worst_s < 1e-4,
            fmt::format("T in [0.03, 30]: max |F* - (U* - T S*)| rel {}, max |S* + dF*/dT| / |S*| {} (five-point, step T/100; tol 1e-4)", sci(worst_f), sci(worst_s))};
}

// 7. S* -> 0 as T -> 0.
Outcome third_law() {
    const chi::SusceptibilityModel m = chi::LorentzBath{0.3, 5.0, 1.0};
    const auto s = thermo::entropy_quantum(m, 1.0, {1e-3, 1.0, 1.0, thermo::Regime::quantum});
    const auto s0 = thermo::entropy_quantum(m, 1.0, {0.0, 1.0, 1.0, thermo::Regime::quantum});
    return {std::abs(s.value) < 1e-3 && std::abs(s0.value) < 1e-3,
            fmt::format("S*(hbar w0/kT = 1e3) = {} kB, S*(T = 0 branch) = {} kB (tol 1e-3)", sci(s.value), sci(s0.value))};
}

// 8. Classical Ohmic F* = kT ln(hbar w0 / kT), independent of gamma.
Outcome classical_ohmic_free_energy() {
    const thermo::Ensemble e{0.5, 1.0, 1.0, thermo::Regime::classical};
    const double closed = 0.5 * std::log(2.0);
    double worst = 0.0;
    for (double g : {0.03, 0.3, 3.0}) {
        const chi::SusceptibilityModel m = chi::PseudoOhmic{g, 1.0};
        const double value = thermo::free_energy_classical(m, 1.0, e).value;
        const auto numeric = thermo::free_energy_classical_integral(m, 1.0, e);
        worst = std::max({worst, std::abs(value - closed), std::abs(numeric.value - closed)});
    }
    return {worst < 1e-6, fmt::format("gamma in {{0.03, 0.3, 3}}, T = 0.5: max |F* - kT ln(hbar w0/kT)| {} over closed form and quadrature (tol 1e-6)", sci(worst))};
}

// 9. Mode-coefficient normalization, coefficient equations and smeared field commutator.
Outcome appendix_normalization() {
    double worst_q = 0.0;
    for (int i = 0; i <= 12; ++i) {
        const double g = std::pow(10.0, -3.0 + 0.5 * i);
        const auto m = field::ScalarFieldModel::from_gamma(1.0, g, 1.0);
        worst_q = std::max(worst_q, field::verify_q_commutator(m).residual);
    }
    const auto m = field::ScalarFieldModel::from_gamma(1.0, 0.3, 1.0);
    oracle::LogUniform ku(0.01, 100.0, 5);
    std::vector<double> ks;
    for (int i = 0; i < 100; ++i) ks.push_back(ku());
    const double eq = field::verify_mode_equations(m, ks).max();
    const field::TestFunction g{0.0, 1.0, 1.0};
    const double fc = field::verify_field_commutator(m, g, g).residual;
    const bool ok = worst_q < 1e-6 && eq < 1e-12 && fc < 1e-4;
    return {ok, fmt::format("q commutator max residual {} over gamma/w0 in [1e-3, 1e3] (tol 1e-6); mode equations {} (tol 1e-12); smeared field commutator {} (tol 1e-4)",
                            sci(worst_q), sci(eq), sci(fc))};
}

// 10. Classical autocorrelation: equipartition, residue closed form, and the two code paths.
Outcome autocorrelation() {
    const double g = 0.3, w0 = 1.0;
    const auto fm = field::ScalarFieldModel::from_gamma(w0, g, 1.0);
    const double c0 = thermo::position_autocorrelation(g, w0, kClassical, 0.0).value;
    const double scale = kClassical.kT() / (w0 * w0);
    const double equip = std::abs(c0 - scale) / scale;
    double worst_closed = 0.0, worst_paths = 0.0;
    for (int i = 0; i <= 200; ++i) {
        const double dt = 20.0 * i / 200.0;
        const double a = thermo::position_autocorrelation(g, w0, kClassical, dt).value;
        const double b = field::autocorrelation_from_modes(fm, kClassical, dt).value;
        worst_closed = std::max(worst_closed, std::abs(a - oracle::classical_autocorrelation(g, w0, 1.0, dt)) / scale);
        worst_paths = std::max(worst_paths, std::abs(a - b) / scale);
    }
    const bool ok = equip < 1e-5 && worst_closed < 1e-5 && worst_paths < 1e-6;
    return {ok, fmt::format("C(0) vs kT/w0^2 rel {} (tol 1e-5); closed form max dev {} (tol 1e-5); thermo vs mode path {} (tol 1e-6); deviations relative to kT/w0^2",
                            sci(equip), sci(worst_closed), sci(worst_paths))};
}

// 11. Six-cell table: relations, divergence markers, byte-determinism.
Outcome table_one() {
    cli::RunConfig cfg;
    cfg.model.chi0 = 0.5;
    cfg.model.omega_L = 2.0;
    cfg.model.Gamma_L = 1.0;
    const auto a = cli::cmd_table1(cfg);
    const auto b = cli::cmd_table1(cfg);
    const bool deterministic = a.files == b.files;
    const auto table = thermo::table_one_report({1.0, 0.1, 1.0}, 1.0, 1.0, 1.0, chi::LorentzBath{0.5, 2.0, 1.0});
    using R = thermo::Relation;
    using G = thermo::Regime;
    const auto& nc = table.cell("none", G::classical);
    const auto& nq = table.cell("none", G::quantum);
    const auto& oc = table.cell("ohmic", G::classical);
    const auto& oq = table.cell("ohmic", G::quantum);
    const auto& gc = table.cell("general", G::classical);
    const auto& gq = table.cell("general", G::quantum);
    const double undamped = oracle::undamped_energy(1.0, 1.0);
    std::vector<std::string> bad;
    if (!(nc.relation == R::equal && nc.U.value == 1.0)) bad.push_back("none/classical");
    if (!(nq.relation == R::equal && std::abs(nq.U.value - undamped) < 1e-14 * undamped)) bad.push_back("none/quantum");
    if (!(oc.relation == R::equal && oc.U.value == 1.0 && oc.U_star.value == 1.0)) bad.push_back("ohmic/classical");
    if (!(oq.relation == R::divergent && oq.U.diverged && oq.U_star.diverged)) bad.push_back("ohmic/quantum");
    if (!(gc.relation == R::unequal && gc.U.value == 1.5 && gc.U_star.value == 1.0)) bad.push_back("general/classical");
    if (!(gq.relation == R::unequal && gq.gap > gq.gap_error)) bad.push_back("general/quantum");
    std::string wrong;
    for (const auto& s : bad) wrong += (wrong.empty() ? "" : ", ") + s;
    return {bad.empty() && deterministic,
            fmt::format("cells {}; general quantum gap {} vs error bar {}; repeated output {}", bad.empty() ? "all match" : "mismatch: " + wrong,
                        sci(gq.gap), sci(gq.gap_error), deterministic ? "byte-identical" : "differs")};
}

}  // namespace

int main() {
    report(1, "classical mean-force universality", classical_universality);
    report(2, "classical Ohmic integral", classical_ohmic_integral);
    report(3, "classical internal energy", classical_internal_energy);
    report(4, "quantum Ohmic divergence", quantum_ohmic_divergence);
    report(5, "discrete-bath oracle agreement", oracle_agreement);
    report(6, "thermodynamic identities", thermodynamic_identities);
    report(7, "third law", third_law);
    report(8, "classical Ohmic free energy", classical_ohmic_free_energy);
    report(9, "mode normalization and commutators", appendix_normalization);
    report(10, "position autocorrelation", autocorrelation);
    report(11, "comparison table", table_one);
    std::printf("%d of 11 criteria failed\n", failures);
    return failures == 0 ? 0 : 1;
}
