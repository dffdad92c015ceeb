#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "oracles.hpp"
#include "ossidamp/thermo.hpp"

using namespace ossidamp;
using thermo::Ensemble;
using thermo::Regime;

namespace {

const Ensemble kQuantum{1.0, 1.0, 1.0, Regime::quantum};
const Ensemble kClassical{1.0, 1.0, 1.0, Regime::classical};
const chi::SusceptibilityModel kLorentz = chi::LorentzBath{0.3, 5.0, 1.0};

Ensemble quantum_at(double T) { return {T, 1.0, 1.0, Regime::quantum}; }

}  // namespace

TEST(Kernels, CothAndLogSinhAgreeWithDirectForms) {
    for (double x : {1e-3, 0.1, 0.5, 1.0, 3.0, 10.0}) {
        EXPECT_NEAR(thermo::kernel::coth(x), std::cosh(x) / std::sinh(x), 1e-13 * std::cosh(x) / std::sinh(x));
        EXPECT_NEAR(thermo::kernel::log_sinh(x), std::log(std::sinh(x)), 1e-12 * std::max(1.0, std::abs(std::log(std::sinh(x)))));
    }
    // stays finite far beyond the overflow of sinh
    EXPECT_DOUBLE_EQ(thermo::kernel::log_sinh(1e4), 1e4 - std::numbers::ln2);
    EXPECT_EQ(thermo::kernel::coth(1e4), 1.0);
}

TEST(Kernels, EntropyFactorMatchesUndampedEntropy) {
    // the undamped entropy per kB is x coth x - ln(2 sinh x), written as x * entropy_factor(x) / 2... compare via the closed form
    for (double x : {0.05, 0.5, 2.0, 8.0}) {
        const Ensemble e{1.0, 2.0 * x, 1.0, Regime::quantum};  // hbar w0 / 2kT = x with w0 = 1
        const double s = x / std::tanh(x) - std::log(2.0 * std::sinh(x));
        EXPECT_NEAR(thermo::undamped_entropy(1.0, e), s, 1e-12);
    }
}

TEST(MeanForceEnergy, UndampedClosedForm) {
    const chi::SusceptibilityModel zero = chi::LorentzBath{0.0, 5.0, 1.0};
    for (double T : {0.1, 1.0, 10.0}) {
        const auto r = thermo::mean_force_energy_quantum(zero, 1.0, quantum_at(T));
        EXPECT_NEAR(r.value, oracle::undamped_energy(1.0, T), 1e-14);
        const auto u = thermo::internal_energy_quantum(zero, 1.0, quantum_at(T));
        EXPECT_EQ(u.value, r.value);
    }
}

TEST(MeanForceEnergy, QuantumOhmicDivergesLogarithmically) {
    const double g = 0.1;
    const auto r = thermo::mean_force_energy_quantum(chi::PseudoOhmic{g, 1.0}, 1.0, kQuantum);
    EXPECT_EQ(r.classification, quad::Classification::log_divergent);
    EXPECT_NEAR(r.tail_coefficient, g / (2 * std::numbers::pi), 0.05 * g / (2 * std::numbers::pi));
    const auto u = thermo::internal_energy_quantum(chi::PseudoOhmic{g, 1.0}, 1.0, kQuantum);
    EXPECT_EQ(u.classification, quad::Classification::log_divergent);
}

TEST(MeanForceEnergy, LorentzIsFinite) {
    const auto r = thermo::mean_force_energy_quantum(kLorentz, 1.0, kQuantum);
    ASSERT_TRUE(r.converged());
    EXPECT_GT(r.value, 0.0);
    EXPECT_LT(r.error_estimate, 1e-8 * r.value);
}

TEST(MeanForceEnergy, LosslessModelRejected) {
    EXPECT_THROW(thermo::mean_force_energy_quantum(chi::LorentzBath{0.3, 5.0, 0.0}, 1.0, kQuantum), std::domain_error);
}

TEST(MeanForceEnergy, RegimeMismatchRejected) {
    EXPECT_THROW(thermo::mean_force_energy_quantum(kLorentz, 1.0, kClassical), std::invalid_argument);
    EXPECT_THROW(thermo::mean_force_energy_classical(kLorentz, 1.0, kQuantum), std::invalid_argument);
}

TEST(MeanForceEnergy, NonPositiveTemperatureRejected) {
    EXPECT_THROW(thermo::mean_force_energy_quantum(kLorentz, 1.0, quantum_at(0.0)), std::invalid_argument);
    EXPECT_THROW(thermo::mean_force_energy_quantum(kLorentz, 1.0, quantum_at(-1.0)), std::invalid_argument);
}

TEST(InternalEnergy, DiffersFromMeanForceEnergyForGeneralDamping) {
    const auto us = thermo::mean_force_energy_quantum(kLorentz, 1.0, kQuantum);
    const auto u = thermo::internal_energy_quantum(kLorentz, 1.0, kQuantum);
    ASSERT_TRUE(us.converged() && u.converged());
    EXPECT_GT(std::abs(u.value - us.value), us.error_estimate + u.error_estimate);
}

TEST(InternalEnergy, OhmicIntegrandsCoincide) {
    const chi::SusceptibilityModel m = chi::PseudoOhmic{0.4, 1.3};
    oracle::LogUniform w(1e-3, 1e4, 401);
    for (int i = 0; i < 500; ++i) {
        const double x = w();
        EXPECT_NEAR(thermo::mean_force_kernel(m, 1.3, x), thermo::internal_energy_kernel(m, 1.3, x),
                    1e-12 * std::abs(thermo::internal_energy_kernel(m, 1.3, x)));
    }
}

TEST(ClassicalEnergy, MeanForceIsKTForAnyValidModel) {
    const std::vector<chi::SusceptibilityModel> models{kLorentz, chi::DrudeOhmic{0.2, 30.0, 1.0}, chi::PseudoOhmic{0.3, 1.0}};
    for (const auto& m : models) {
        const auto v = thermo::mean_force_energy_classical(m, 1.0, {2.5, 1.0, 1.0, Regime::classical}, {},
                                                           thermo::ClassicalMode::validate);
        EXPECT_EQ(v.value, 2.5);
        ASSERT_TRUE(v.numeric.has_value());
        EXPECT_LT(v.relative_deviation, 1e-6) << chi::model_name(m);
    }
}

TEST(ClassicalEnergy, InternalEnergyClosedForm) {
    EXPECT_EQ(thermo::internal_energy_classical(chi::PseudoOhmic{0.3, 1.0}, 1.0, kClassical).value, 1.0);
    EXPECT_EQ(thermo::internal_energy_classical(chi::DrudeOhmic{0.3, 10.0, 1.0}, 1.0, kClassical).value, 1.0);
    const auto v = thermo::internal_energy_classical(chi::LorentzBath{0.5, 2.0, 1.0}, 1.0, kClassical, {},
                                                     thermo::ClassicalMode::validate, 1e-5);
    EXPECT_EQ(v.value, 1.5);
    EXPECT_LT(v.relative_deviation, 1e-5);
}

TEST(ClassicalEnergy, UnitStaticValueIsSingular) {
    EXPECT_THROW(thermo::internal_energy_classical(chi::LorentzBath{1.0, 2.0, 1.0}, 1.0, kClassical),
                 thermo::SingularModelError);
}

// Property: classical U = kT [1 + chi0 / (2(1 - chi0))] for random Lorentz baths.
TEST(ClassicalEnergyProperty, InternalEnergyQuadratureMatchesClosedForm) {
    std::mt19937_64 rng(402);
    std::uniform_real_distribution<double> c0(0.01, 0.95);
    oracle::LogUniform s(0.1, 10.0, 403);
    for (int i = 0; i < 25; ++i) {
        const chi::LorentzBath m{c0(rng), s(), s()};
        const double closed = 1.0 + m.chi0 / (2.0 * (1.0 - m.chi0));
        const auto r = thermo::internal_energy_classical_integral(m, s(), kClassical);
        ASSERT_TRUE(r.converged());
        EXPECT_NEAR(r.value / closed, 1.0, 1e-6);
    }
}

TEST(FreeEnergy, UndampedClosedForm) {
    const chi::SusceptibilityModel zero = chi::LorentzBath{0.0, 5.0, 1.0};
    for (double T : {0.2, 1.0, 5.0}) {
        EXPECT_NEAR(thermo::free_energy_quantum(zero, 1.0, quantum_at(T)).value, oracle::undamped_free_energy(1.0, T), 1e-13);
    }
}

TEST(FreeEnergy, IdentityWithEnergyAndEntropy) {
    for (double T : {0.1, 1.0, 10.0}) {
        const auto rep = thermo::energy_report(kLorentz, 1.0, quantum_at(T));
        ASSERT_FALSE(rep.any_diverged());
        EXPECT_LT(rep.consistency_residual(), 1e-8) << T;
    }
}

TEST(FreeEnergy, ClassicalOhmicIsDampingIndependent) {
    const Ensemble e1{1.0, 1.0, 1.0, Regime::classical};
    EXPECT_EQ(thermo::free_energy_classical(chi::PseudoOhmic{0.3, 1.0}, 1.0, e1).value, 0.0);
    const Ensemble e2{0.5, 1.0, 1.0, Regime::classical};
    for (double g : {0.01, 0.3, 3.0}) {
        const chi::SusceptibilityModel m = chi::PseudoOhmic{g, 1.0};
        EXPECT_NEAR(thermo::free_energy_classical(m, 1.0, e2).value, 0.5 * std::log(2.0), 1e-15);
        const auto q = thermo::free_energy_classical_integral(m, 1.0, e2);
        ASSERT_TRUE(q.converged());
        EXPECT_NEAR(q.value, 0.5 * std::log(2.0), 1e-9);
    }
}

TEST(FreeEnergy, ClassicalGeneralDampingDependsOnTheBath) {
    const Ensemble e{1.0, 1.0, 1.0, Regime::classical};
    const auto r = thermo::free_energy_classical(chi::LorentzBath{0.5, 2.0, 1.0}, 1.0, e);
    ASSERT_TRUE(r.converged());
    EXPECT_GT(std::abs(r.value - thermo::undamped_free_energy(1.0, e)), 1e-3);
}

TEST(Entropy, MatchesNegativeTemperatureDerivative) {
    const auto s = thermo::entropy_quantum(kLorentz, 1.0, kQuantum);
    ASSERT_TRUE(s.converged());
    EXPECT_NEAR(thermo::entropy_from_free_energy(kLorentz, 1.0, kQuantum) / s.value, 1.0, 1e-4);
}

TEST(Entropy, UndampedClosedForm) {
    const chi::SusceptibilityModel zero = chi::LorentzBath{0.0, 5.0, 1.0};
    for (double T : {0.2, 1.0, 5.0}) {
        const double S = thermo::entropy_quantum(zero, 1.0, quantum_at(T)).value;
        const double fd = -oracle::central_difference([](double t) { return oracle::undamped_free_energy(1.0, t); }, T, 1e-4 * T);
        EXPECT_NEAR(S, fd, 1e-7);
    }
}

TEST(Entropy, VanishesAtLowTemperature) {
    EXPECT_LT(std::abs(thermo::entropy_quantum(kLorentz, 1.0, quantum_at(1e-3)).value), 1e-3);
    EXPECT_LT(std::abs(thermo::entropy_quantum(kLorentz, 1.0, quantum_at(0.0)).value), 1e-3);
}

TEST(Entropy, OhmicEntropyConverges) {
    const auto s = thermo::entropy_quantum(chi::PseudoOhmic{0.1, 1.0}, 1.0, kQuantum);
    EXPECT_TRUE(s.converged());
}

// Property: high temperature recovers equipartition for the quantum mean-force energy.
TEST(MeanForceEnergyProperty, HighTemperatureLimit) {
    const double T = 100.0 * 5.0;
    const auto r = thermo::mean_force_energy_quantum(kLorentz, 1.0, quantum_at(T));
    ASSERT_TRUE(r.converged());
    EXPECT_NEAR(r.value / T, 1.0, 0.01);
}

// Property: U* increases with temperature (positive heat capacity) for random baths.
TEST(MeanForceEnergyProperty, MonotoneInTemperature) {
    std::mt19937_64 rng(404);
    std::uniform_real_distribution<double> c0(0.05, 0.9);
    oracle::LogUniform s(0.3, 5.0, 405);
    for (int i = 0; i < 8; ++i) {
        const chi::SusceptibilityModel m = chi::LorentzBath{c0(rng), s(), s()};
        double prev = -1e300;
        for (double T : {0.1, 0.3, 1.0, 3.0}) {
            const double u = thermo::mean_force_energy_quantum(m, 1.0, quantum_at(T)).value;
            EXPECT_GT(u, prev);
            prev = u;
        }
    }
}

TEST(Autocorrelation, ClassicalEquipartition) {
    const auto r = thermo::position_autocorrelation(0.3, 1.0, kClassical, 0.0);
    ASSERT_TRUE(r.converged());
    EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(Autocorrelation, ClassicalClosedForm) {
    for (double dt : {0.5, 2.0, 7.3, 19.9}) {
        const auto r = thermo::position_autocorrelation(0.3, 1.0, kClassical, dt);
        ASSERT_TRUE(r.converged());
        EXPECT_NEAR(r.value, oracle::classical_autocorrelation(0.3, 1.0, 1.0, dt), 1e-7);
        EXPECT_NEAR(thermo::classical_autocorrelation_underdamped(0.3, 1.0, 1.0, dt),
                    oracle::classical_autocorrelation(0.3, 1.0, 1.0, dt), 1e-14);
    }
}

TEST(Autocorrelation, ClassicalDecaysAtLongTimes) {
    const double g = 0.5;
    const auto r = thermo::position_autocorrelation(g, 1.0, kClassical, 50.0);
    EXPECT_LT(std::abs(r.value), 1e-8 + std::abs(oracle::classical_autocorrelation(g, 1.0, 1.0, 50.0)));
    EXPECT_LT(std::abs(thermo::classical_autocorrelation_underdamped(g, 1.0, 1.0, 100.0 / g)), 1e-8);
}

TEST(Autocorrelation, QuantumVarianceIsFiniteAndExceedsClassical) {
    const auto q = thermo::position_autocorrelation(0.3, 1.0, kQuantum, 0.0);
    ASSERT_TRUE(q.converged());
    EXPECT_GT(q.value, 1.0);
}

TEST(Autocorrelation, TimeWindowEnforced) {
    EXPECT_THROW(thermo::position_autocorrelation(0.3, 1.0, kClassical, 60.0), std::invalid_argument);
}

TEST(TableOne, CellRelations) {
    const auto t = thermo::table_one_report({1.0, 0.1, 1.0}, 1.0, 1.0, 1.0, chi::LorentzBath{0.5, 2.0, 1.0});
    ASSERT_EQ(t.cells.size(), 6u);
    EXPECT_EQ(t.cell("none", Regime::classical).relation, thermo::Relation::equal);
    EXPECT_EQ(t.cell("none", Regime::quantum).relation, thermo::Relation::equal);
    EXPECT_EQ(t.cell("ohmic", Regime::classical).relation, thermo::Relation::equal);
    EXPECT_EQ(t.cell("ohmic", Regime::quantum).relation, thermo::Relation::divergent);
    EXPECT_EQ(t.cell("general", Regime::classical).U.value, 1.5);
    EXPECT_EQ(t.cell("general", Regime::classical).relation, thermo::Relation::unequal);
    EXPECT_EQ(t.cell("general", Regime::quantum).relation, thermo::Relation::unequal);
    EXPECT_THROW(t.cell("drude", Regime::quantum), std::out_of_range);
}

TEST(OscillatorParams, CouplingRelation) {
    const auto p = thermo::OscillatorParams::from_alpha(1.0, 0.5, 2.0);
    EXPECT_DOUBLE_EQ(p.gamma, 0.25);
    EXPECT_DOUBLE_EQ(p.alpha(), 0.5);
}
