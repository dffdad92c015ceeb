// bath_oracle.hpp: Finite harmonic-bath discretization and exact normal-mode thermal sums

#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "ossidamp/susceptibility.hpp"
#include "ossidamp/thermo.hpp"

namespace ossidamp::bath {

/// Oscillator q (unit mass, frequency omega0) coupled by -alpha_i q X_i to N bath
/// oscillators X_i of frequency omega_i.
struct DiscreteBath {
    double omega0{1.0};
    std::vector<double> omegas;  // strictly increasing, > 0
    std::vector<double> alphas;  // >= 0

    std::size_t n_modes() const noexcept { return omegas.size(); }

    void validate() const {
        if (omegas.size() != alphas.size()) throw std::invalid_argument("DiscreteBath: omegas/alphas size mismatch");
        if (!(omega0 > 0.0)) throw std::invalid_argument("DiscreteBath: omega0 must be > 0");
        for (std::size_t i = 0; i < omegas.size(); ++i) {
            if (!(omegas[i] > 0.0) || (i > 0 && !(omegas[i] > omegas[i - 1])))
                throw std::invalid_argument("DiscreteBath: omegas must be positive and strictly increasing");
            if (!(alphas[i] >= 0.0)) throw std::invalid_argument("DiscreteBath: alphas must be >= 0");
        }
    }

    /// (N+1)x(N+1) potential matrix; index 0 is the oscillator.
    Eigen::MatrixXd potential_matrix() const {
        const auto n = static_cast<Eigen::Index>(omegas.size());
        Eigen::MatrixXd v = Eigen::MatrixXd::Zero(n + 1, n + 1);
        v(0, 0) = omega0 * omega0;
        for (Eigen::Index i = 0; i < n; ++i) {
            const auto k = static_cast<std::size_t>(i);
            v(i + 1, i + 1) = omegas[k] * omegas[k];
            v(0, i + 1) = v(i + 1, 0) = -alphas[k];
        }
        return v;
    }
};

/// Midpoint grid w_i = (i - 1/2) dw, dw = omega_max / N, with alpha_i = alpha(w_i) sqrt(dw).
inline DiscreteBath discretize(const chi::SusceptibilityModel& model, double omega0, std::size_t n_modes,
                               double omega_max) {
    if (n_modes < 1) throw std::invalid_argument("discretize: n_modes must be >= 1");
    if (!(omega_max > 0.0) || !std::isfinite(omega_max)) throw std::invalid_argument("discretize: omega_max must be > 0");
    DiscreteBath bath;
    bath.omega0 = omega0;
    bath.omegas.resize(n_modes);
    bath.alphas.resize(n_modes);
    const double dw = omega_max / static_cast<double>(n_modes);
    const double root_dw = std::sqrt(dw);
    for (std::size_t i = 0; i < n_modes; ++i) {
        const double w = (static_cast<double>(i) + 0.5) * dw;
        bath.omegas[i] = w;
        bath.alphas[i] = chi::coupling_density(model, omega0, w) * root_dw;
    }
    return bath;
}

class NotDiagonalizableError : public std::runtime_error {
public:
    NotDiagonalizableError(double most_negative, std::size_t index)
        : std::runtime_error("potential matrix not positive definite: eigenvalue " + std::to_string(most_negative) +
                             " at index " + std::to_string(index)),
          most_negative_eigenvalue(most_negative),
          index(index) {}

    double most_negative_eigenvalue;
    std::size_t index;
};

struct NormalModes {
    Eigen::VectorXd frequencies;  // Omega_i, ascending
    Eigen::MatrixXd mode_matrix;  // columns are normal modes in (q, X_1..X_N) coordinates

    /// q-components of the normal modes.
    Eigen::VectorXd q_components() const { return mode_matrix.row(0).transpose(); }

    /// max |M^T M - I|.
    double orthogonality_residual() const {
        const Eigen::MatrixXd g = mode_matrix.transpose() * mode_matrix;
        return (g - Eigen::MatrixXd::Identity(g.rows(), g.cols())).cwiseAbs().maxCoeff();
    }
};

inline NormalModes diagonalize(const DiscreteBath& bath) {
    bath.validate();
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(bath.potential_matrix());
    if (solver.info() != Eigen::Success) throw std::runtime_error("diagonalize: eigensolver failed");
    const Eigen::VectorXd& ev = solver.eigenvalues();
    if (!(ev(0) > 0.0)) throw NotDiagonalizableError(ev(0), 0);
    return NormalModes{ev.cwiseSqrt(), solver.eigenvectors()};
}

struct DiscreteEnergies {
    double U_star{0.0};
    double U{0.0};
    double q2{0.0};     // <q^2>
    double qdot2{0.0};  // <qdot^2>
};

namespace detail {

/// Thermal energy of one mode; classical equipartition gives kT.
inline double mode_energy(double w, const thermo::Ensemble& ens) {
    if (ens.regime == thermo::Regime::classical) return ens.kT();
    return 0.5 * ens.hbar * w * thermo::kernel::coth(ens.hbar * w / (2.0 * ens.kT()));
}

}  // namespace detail

/// U* = sum E(Omega_i) - sum E(w_i), U = (<qdot^2> + w0^2 <q^2>) / 2. The U* sum pairs each
/// bath frequency with its interlacing normal-mode neighbour so no large totals cancel.
inline DiscreteEnergies thermal_energies_discrete(const NormalModes& modes, const DiscreteBath& bath,
                                                  const thermo::Ensemble& ens) {
    ens.validate();
    const auto n = static_cast<std::size_t>(modes.frequencies.size());
    if (n != bath.n_modes() + 1) throw std::invalid_argument("thermal_energies_discrete: modes/bath size mismatch");
    DiscreteEnergies out;
    double acc = detail::mode_energy(modes.frequencies(0), ens);
    for (std::size_t i = 1; i < n; ++i)
        acc += detail::mode_energy(modes.frequencies(static_cast<Eigen::Index>(i)), ens) -
               detail::mode_energy(bath.omegas[i - 1], ens);
    out.U_star = acc;

    const Eigen::VectorXd v = modes.q_components();
    for (std::size_t i = 0; i < n; ++i) {
        const auto k = static_cast<Eigen::Index>(i);
        const double w = modes.frequencies(k);
        const double weight = v(k) * v(k);
        const double e = detail::mode_energy(w, ens);  // = <P^2> of the mode = Omega^2 <Q^2>
        out.qdot2 += weight * e;
        out.q2 += weight * e / (w * w);
    }
    out.U = 0.5 * (out.qdot2 + bath.omega0 * bath.omega0 * out.q2);
    return out;
}

// ------------------------------ convergence study -----------------------------

struct ConvergenceRow {
    std::size_t n_modes{0};
    double omega_max{0.0};
    bool ok{true};
    std::string diagnostic;
    double U_star_discrete{std::numeric_limits<double>::quiet_NaN()};
    double U_discrete{std::numeric_limits<double>::quiet_NaN()};
    double U_star_integral{std::numeric_limits<double>::quiet_NaN()};
    double U_integral{std::numeric_limits<double>::quiet_NaN()};
    double U_star_rel_error{std::numeric_limits<double>::quiet_NaN()};
    double U_rel_error{std::numeric_limits<double>::quiet_NaN()};
    // observed order log(previous error / this error) / log(N / previous N), same omega_max
    double U_star_rate{std::numeric_limits<double>::quiet_NaN()};
    double U_rate{std::numeric_limits<double>::quiet_NaN()};
};

struct ConvergenceTable {
    std::vector<ConvergenceRow> rows;
    double U_star_reference{std::numeric_limits<double>::quiet_NaN()};
    double U_reference{std::numeric_limits<double>::quiet_NaN()};
};

/// Reference energies from the continuum formulas in the ensemble's regime (NaN when divergent).
inline std::pair<double, double> continuum_energies(const chi::SusceptibilityModel& model, double omega0,
                                                    const thermo::Ensemble& ens, const quad::QuadratureSpec& spec) {
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();
    if (ens.regime == thermo::Regime::classical) {
        const double us = thermo::mean_force_energy_classical(model, omega0, ens, spec).value;
        double u = nan;
        try {
            u = thermo::internal_energy_classical(model, omega0, ens, spec).value;
        } catch (const thermo::SingularModelError&) {
        }
        return {us, u};
    }
    const auto us = thermo::mean_force_energy_quantum(model, omega0, ens, spec);
    const auto u = thermo::internal_energy_quantum(model, omega0, ens, spec);
    return {us.converged() ? us.value : nan, u.converged() ? u.value : nan};
}

/// Oracle over every (N, omega_max) pair, omega_max outer, N inner in the given order.
inline ConvergenceTable convergence_study(const chi::SusceptibilityModel& model, double omega0,
                                          const thermo::Ensemble& ens, const std::vector<std::size_t>& n_list,
                                          const std::vector<double>& omega_max_list,
                                          const quad::QuadratureSpec& spec = {}) {
    ConvergenceTable table;
    std::tie(table.U_star_reference, table.U_reference) = continuum_energies(model, omega0, ens, spec);
    auto rel = [](double a, double ref) { return std::abs(a - ref) / std::abs(ref); };
    for (double wmax : omega_max_list) {
        std::optional<std::size_t> prev;
        for (std::size_t n : n_list) {
            ConvergenceRow row;
            row.n_modes = n;
            row.omega_max = wmax;
            row.U_star_integral = table.U_star_reference;
            row.U_integral = table.U_reference;
            try {
                const auto bath = discretize(model, omega0, n, wmax);
                const auto modes = diagonalize(bath);
                const auto e = thermal_energies_discrete(modes, bath, ens);
                row.U_star_discrete = e.U_star;
                row.U_discrete = e.U;
                row.U_star_rel_error = rel(e.U_star, table.U_star_reference);
                row.U_rel_error = rel(e.U, table.U_reference);
            } catch (const NotDiagonalizableError& err) {
                row.ok = false;
                row.diagnostic = err.what();
            } catch (const std::domain_error& err) {
                row.ok = false;
                row.diagnostic = err.what();
            }
            if (row.ok && prev) {
                const auto& p = table.rows[*prev];
                const double ratio = static_cast<double>(n) / static_cast<double>(p.n_modes);
                if (p.ok && ratio > 1.0) {
                    row.U_star_rate = std::log(p.U_star_rel_error / row.U_star_rel_error) / std::log(ratio);
                    row.U_rate = std::log(p.U_rel_error / row.U_rel_error) / std::log(ratio);
                }
            }
            table.rows.push_back(row);
            prev = table.rows.size() - 1;
        }
    }
    return table;
}

}  // namespace ossidamp::bath
