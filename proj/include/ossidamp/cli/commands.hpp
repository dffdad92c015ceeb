// commands.hpp: Subcommand implementations producing in-memory reports

#pragma once

#include <cmath>
#include <limits>
#include <map>
#include <random>
#include <string>
#include <vector>

#include <fmt/format.h>
#include <json.hpp>

#include "ossidamp/bath_oracle.hpp"
#include "ossidamp/cli/config.hpp"
#include "ossidamp/cli/output.hpp"
#include "ossidamp/field_modes.hpp"
#include "ossidamp/susceptibility.hpp"
#include "ossidamp/thermo.hpp"

#ifndef OSSIDAMP_VERSION
#define OSSIDAMP_VERSION "0.0.0"
#endif

namespace ossidamp::cli {

/// Files keyed by name (written under the output directory) plus the console summary.
struct CommandResult {
    int exit_code{kExitClean};
    std::map<std::string, std::string> files;
    std::string summary;
};

namespace detail {

inline json provenance(const RunConfig& cfg, const std::string& command) {
    return json{{"command", command},
                {"config", cfg.to_json()},
                {"config_hash", cfg.hash()},
                {"schema_version", kSchemaVersion},
                {"version", OSSIDAMP_VERSION}};
}

inline json quantity_json(const thermo::Quantity& q) {
    return json{{"value", json_number(q.value)},
                {"error", json_number(q.error)},
                {"method", std::string(thermo::to_string(q.method))},
                {"diverged", q.diverged},
                {"classification", std::string(quad::to_string(q.classification))},
                {"tail_coefficient", json_number(q.tail_coefficient)}};
}

inline std::vector<std::string> quantity_cells(const thermo::Quantity& q) {
    return {format_number(q.value),
            format_number(q.error),
            std::string(thermo::to_string(q.method)),
            q.diverged ? "true" : "false",
            std::string(quad::to_string(q.classification)),
            format_number(q.tail_coefficient)};
}

inline std::string csv_safe(std::string s) {
    for (char& c : s)
        if (c == ',' || c == '\n' || c == '\r') c = ';';
    return s;
}

inline const std::vector<std::pair<const char*, thermo::Quantity thermo::EnergyReport::*>>& quantity_fields() {
    static const std::vector<std::pair<const char*, thermo::Quantity thermo::EnergyReport::*>> f{
        {"U_star", &thermo::EnergyReport::U_star},
        {"U", &thermo::EnergyReport::U},
        {"F_star", &thermo::EnergyReport::F_star},
        {"S_star", &thermo::EnergyReport::S_star}};
    return f;
}

}  // namespace detail

// ------------------------------------ energy ----------------------------------

inline std::vector<thermo::EnergyReport> energy_reports(const RunConfig& cfg) {
    const auto model = cfg.susceptibility();
    const auto spec = cfg.quadrature_spec();
    const double w0 = cfg.oscillator.omega0;
    return parallel_map<thermo::EnergyReport>(cfg.ensemble.T.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
        return thermo::energy_report(model, w0, cfg.ensemble_at(cfg.ensemble.T[i]), spec);
    });
}

inline CommandResult cmd_energy(const RunConfig& cfg) {
    const auto reports = energy_reports(cfg);
    CsvTable csv({"T(energy/kB)", "quantity", "value(energy; S_star in kB)", "error(same units as value)", "method",
                  "diverged", "classification", "tail_coefficient(energy)"});
    json rows = json::array();
    bool diverged = false;
    for (const auto& rep : reports) {
        json row{{"T", rep.T}, {"regime", std::string(thermo::to_string(rep.regime))}};
        for (const auto& [name, field] : detail::quantity_fields()) {
            const auto& q = rep.*field;
            std::vector<std::string> cells{format_number(rep.T), name};
            for (auto& c : detail::quantity_cells(q)) cells.push_back(std::move(c));
            csv.add_row(std::move(cells));
            row[name] = detail::quantity_json(q);
            diverged = diverged || q.diverged;
        }
        row["consistency_residual"] = json_number(rep.consistency_residual());
        rows.push_back(std::move(row));
    }
    json doc = detail::provenance(cfg, "energy");
    doc["model"] = std::string(chi::model_name(cfg.susceptibility()));
    doc["results"] = std::move(rows);
    doc["any_diverged"] = diverged;

    CommandResult out;
    out.exit_code = diverged ? kExitDivergent : kExitClean;
    out.files["energy.csv"] = csv.str();
    out.files["energy.json"] = canonical_json(doc);
    out.summary = fmt::format("energy: {} temperatures, {}\n", reports.size(),
                              diverged ? "divergent quantities present" : "all quantities finite");
    return out;
}

// ------------------------------------ table1 ----------------------------------

inline std::string render_table_one(const thermo::TableOne& t) {
    std::string s = fmt::format("U versus U* at T = {}, omega0 = {}, gamma = {}\n", format_number(t.T),
                                format_number(t.omega0), format_number(t.gamma));
    s += fmt::format("{:<9} {:<10} {:<25} {:<25} {:<10} {}\n", "damping", "regime", "U", "U*", "relation", "gap");
    for (const auto& c : t.cells) {
        auto cell = [](const thermo::Quantity& q) { return q.diverged ? std::string("divergent") : format_number(q.value); };
        s += fmt::format("{:<9} {:<10} {:<25} {:<25} {:<10} {}\n", c.damping, thermo::to_string(c.regime), cell(c.U),
                         cell(c.U_star), thermo::to_string(c.relation),
                         c.relation == thermo::Relation::divergent ? std::string("-") : format_number(c.gap));
    }
    return s;
}

inline json table_one_json(const thermo::TableOne& t) {
    json cells = json::array();
    for (const auto& c : t.cells) {
        cells.push_back(json{{"damping", c.damping},
                             {"regime", std::string(thermo::to_string(c.regime))},
                             {"U", detail::quantity_json(c.U)},
                             {"U_star", detail::quantity_json(c.U_star)},
                             {"relation", std::string(thermo::to_string(c.relation))},
                             {"gap", json_number(c.gap)},
                             {"gap_error", json_number(c.gap_error)}});
    }
    return json{{"T", t.T}, {"omega0", t.omega0}, {"gamma", t.gamma}, {"cells", cells}};
}

inline CommandResult cmd_table1(const RunConfig& cfg) {
    const thermo::OscillatorParams params{cfg.oscillator.omega0, cfg.oscillator.gamma, cfg.oscillator.c};
    const auto table = thermo::table_one_report(params, cfg.ensemble.T.front(), cfg.ensemble.hbar, cfg.ensemble.kB,
                                                cfg.susceptibility(), cfg.quadrature_spec());
    json doc = detail::provenance(cfg, "table1");
    doc["model"] = std::string(chi::model_name(cfg.susceptibility()));
    doc["table"] = table_one_json(table);
    CommandResult out;
    const std::string text = render_table_one(table);
    out.files["table1.txt"] = text;
    out.files["table1.json"] = canonical_json(doc);
    out.summary = text;
    return out;
}

// ----------------------------------- validate ---------------------------------

struct CheckLine {
    std::string name;
    std::string status;  // pass | fail
    double residual{0.0};
    double tolerance{0.0};
    std::string detail;
};

inline std::vector<CheckLine> run_validation(const RunConfig& cfg) {
    std::vector<CheckLine> checks;
    const auto model = cfg.susceptibility();
    const auto spec = cfg.quadrature_spec();
    const double w0 = cfg.oscillator.omega0;
    const bool expect_invalid = cfg.validate.expect_invalid;
    auto verdict = [](bool ok) { return std::string(ok ? "pass" : "fail"); };
    constexpr double nan = std::numeric_limits<double>::quiet_NaN();

    // susceptibility validity
    const bool symmetric = chi::check_reality_symmetry(model);
    checks.push_back({"reality_symmetry", verdict(symmetric), symmetric ? 0.0 : 1.0, 0.0, "chi(-w) = conj chi(w)"});
    const chi::KramersKronigGrid grid{cfg.validate.kk_omega_max, cfg.validate.kk_points, cfg.validate.kk_tolerance};
    const auto kk = chi::check_kramers_kronig(model, grid, spec);
    const bool kk_valid = kk.status == chi::KramersKronigStatus::passed;
    checks.push_back({"kramers_kronig", verdict(kk_valid != expect_invalid), kk.max_residual, grid.tolerance,
                      std::string(chi::to_string(kk.status))});
    const auto diag = chi::check_diagonalizability(model, spec);
    const bool diag_valid = diag == chi::Diagonalizability::satisfied;
    const auto integral = chi::diagonalizability_integral(model, spec);
    checks.push_back({"diagonalizability", verdict(diag_valid != expect_invalid),
                      integral.converged() ? integral.value : std::numeric_limits<double>::infinity(),
                      std::numbers::pi / 2.0, std::string(chi::to_string(diag))});

    // field-mode identities
    const auto fm = field::ScalarFieldModel::from_gamma(w0, cfg.oscillator.gamma, cfg.oscillator.c);
    const auto qc = field::verify_q_commutator(fm, cfg.ensemble.hbar, spec);
    checks.push_back({"q_commutator", verdict(qc.residual < 1e-6), qc.residual, 1e-6, "int dk [f_q f_Piq* - cc] = i hbar"});
    std::mt19937_64 rng(2024);
    std::uniform_real_distribution<double> u(std::log(0.01), std::log(100.0));
    std::vector<double> ks;
    for (int i = 0; i < 100; ++i) ks.push_back((i % 2 ? -1.0 : 1.0) * std::exp(u(rng)) * w0 / cfg.oscillator.c);
    const auto me = field::verify_mode_equations(fm, ks, cfg.ensemble.hbar);
    checks.push_back({"mode_equations", verdict(me.max() < 1e-12), me.max(), 1e-12, "coefficient equations and jump condition"});
    const double width = cfg.validate.field_width * cfg.oscillator.c / w0;
    const field::TestFunction g{0.0, width, 1.0};
    const auto fc = field::verify_field_commutator(fm, g, g, cfg.ensemble.hbar, spec);
    checks.push_back({"field_commutator", verdict(fc.residual < 1e-4), fc.residual, 1e-4, "smeared [phi, Pi_phi] = i hbar delta"});

    // thermodynamic identities
    const thermo::Ensemble classical = cfg.ensemble_at(cfg.ensemble.T.front(), thermo::Regime::classical);
    const bool zero = chi::is_identically_zero(model);
    if (!zero && !chi::is_lossless(model)) {
        try {
            const auto us = thermo::mean_force_energy_classical(model, w0, classical, spec, thermo::ClassicalMode::validate, 1e-5);
            checks.push_back({"classical_mean_force", "pass", us.relative_deviation, 1e-5, "U* = kT by quadrature"});
        } catch (const thermo::ConsistencyError& e) {
            checks.push_back({"classical_mean_force", "fail", nan, 1e-5, e.what()});
        }
        try {
            const auto u = thermo::internal_energy_classical(model, w0, classical, spec, thermo::ClassicalMode::validate, 1e-5);
            checks.push_back({"classical_internal_energy", "pass", u.relative_deviation, 1e-5, "U = kT[1 + chi0/2(1-chi0)]"});
        } catch (const std::exception& e) {
            checks.push_back({"classical_internal_energy", "fail", nan, 1e-5, e.what()});
        }
    }

    const double T = cfg.ensemble.T.front();
    const auto quantum = cfg.ensemble_at(T, thermo::Regime::quantum);
    const auto rep = thermo::energy_report(model, w0, quantum, spec);
    if (rep.any_diverged()) {
        const std::string note = "divergent quantum energies; identity not applicable";
        const bool ok = expect_invalid;
        checks.push_back({"free_energy_identity", verdict(ok), nan, 1e-4, note});
        checks.push_back({"entropy_derivative", verdict(ok), nan, 1e-4, note});
    } else {
        const double r1 = rep.consistency_residual();
        checks.push_back({"free_energy_identity", verdict(r1 < 1e-4), r1, 1e-4, "F* = U* - T S*"});
        const double S_fd = thermo::entropy_from_free_energy(model, w0, cfg.ensemble_at(T, thermo::Regime::quantum), spec);
        const double r2 = std::abs(S_fd - rep.S_star.value) / std::max(std::abs(rep.S_star.value), 1e-300);
        checks.push_back({"entropy_derivative", verdict(r2 < 1e-4), r2, 1e-4, "S* = -dF*/dT, five-point stencil, step T/100"});
    }
    return checks;
}

inline CommandResult cmd_validate(const RunConfig& cfg) {
    const auto checks = run_validation(cfg);
    CsvTable csv({"check", "status", "residual(dimensionless)", "tolerance(dimensionless)", "detail"});
    json arr = json::array();
    bool failed = false;
    std::string summary;
    for (const auto& c : checks) {
        csv.add_row({c.name, c.status, format_number(c.residual), format_number(c.tolerance), detail::csv_safe(c.detail)});
        arr.push_back(json{{"check", c.name},
                           {"status", c.status},
                           {"residual", json_number(c.residual)},
                           {"tolerance", json_number(c.tolerance)},
                           {"detail", c.detail}});
        failed = failed || c.status == "fail";
        summary += fmt::format("{:<28} {:<5} residual {:<24} tolerance {}  ({})\n", c.name, c.status,
                               format_number(c.residual), format_number(c.tolerance), c.detail);
    }
    json doc = detail::provenance(cfg, "validate");
    doc["checks"] = std::move(arr);
    doc["passed"] = !failed;
    CommandResult out;
    out.exit_code = failed ? kExitValidation : kExitClean;
    out.files["validate.csv"] = csv.str();
    out.files["validate.json"] = canonical_json(doc);
    out.summary = summary;
    return out;
}

// -------------------------------- bath-converge -------------------------------

inline CommandResult cmd_bath_converge(const RunConfig& cfg) {
    const auto table = bath::convergence_study(cfg.susceptibility(), cfg.oscillator.omega0,
                                               cfg.ensemble_at(cfg.ensemble.T.front()), cfg.oracle.n_modes,
                                               cfg.oracle.omega_max, cfg.quadrature_spec());
    CsvTable csv({"n_modes", "omega_max(rad/s)", "status", "U_star_discrete(energy)", "U_discrete(energy)",
                  "U_star_integral(energy)", "U_integral(energy)", "U_star_rel_error", "U_rel_error", "U_star_rate",
                  "U_rate", "diagnostic"});
    json rows = json::array();
    bool failed = false;
    for (const auto& r : table.rows) {
        csv.add_row({std::to_string(r.n_modes), format_number(r.omega_max), r.ok ? "ok" : "failed",
                     format_number(r.U_star_discrete), format_number(r.U_discrete), format_number(r.U_star_integral),
                     format_number(r.U_integral), format_number(r.U_star_rel_error), format_number(r.U_rel_error),
                     format_number(r.U_star_rate), format_number(r.U_rate), detail::csv_safe(r.diagnostic)});
        rows.push_back(json{{"n_modes", r.n_modes},
                            {"omega_max", r.omega_max},
                            {"ok", r.ok},
                            {"U_star_discrete", json_number(r.U_star_discrete)},
                            {"U_discrete", json_number(r.U_discrete)},
                            {"U_star_rel_error", json_number(r.U_star_rel_error)},
                            {"U_rel_error", json_number(r.U_rel_error)},
                            {"U_star_rate", json_number(r.U_star_rate)},
                            {"U_rate", json_number(r.U_rate)},
                            {"diagnostic", r.diagnostic}});
        failed = failed || !r.ok;
    }
    json doc = detail::provenance(cfg, "bath-converge");
    doc["rows"] = std::move(rows);
    doc["U_star_integral"] = json_number(table.U_star_reference);
    doc["U_integral"] = json_number(table.U_reference);
    CommandResult out;
    out.exit_code = failed ? kExitValidation : kExitClean;
    out.files["bath_converge.csv"] = csv.str();
    out.files["bath_converge.json"] = canonical_json(doc);
    out.summary = fmt::format("bath-converge: {} rows{}\n", table.rows.size(),
                              failed ? ", some baths not positive definite" : "");
    return out;
}

// ----------------------------------- autocorr ---------------------------------

struct AutocorrRow {
    double dt{0.0};
    quad::QuadratureResult thermo_path;
    quad::QuadratureResult mode_path;
    double closed_form{std::numeric_limits<double>::quiet_NaN()};
};

/// Decay rate of the extrema envelope of c(t), from a least-squares line through ln|c| at
/// the parabola-refined local extrema (t = 0 included). NaN with fewer than two extrema.
inline double envelope_decay_rate(const std::vector<double>& t, const std::vector<double>& c) {
    std::vector<double> xs, ys;
    const std::size_t n = c.size();
    if (n >= 1 && c[0] != 0.0) {
        xs.push_back(t[0]);
        ys.push_back(std::log(std::abs(c[0])));
    }
    for (std::size_t i = 1; i + 1 < n; ++i) {
        const double a = std::abs(c[i - 1]), b = std::abs(c[i]), d = std::abs(c[i + 1]);
        if (b >= a && b > d && b > 0.0) {
            const double h = t[i + 1] - t[i];
            const double denom = c[i - 1] - 2.0 * c[i] + c[i + 1];
            double peak = c[i], at = t[i];
            if (denom != 0.0) {
                const double s = 0.5 * (c[i - 1] - c[i + 1]) / denom;
                if (std::abs(s) <= 1.0) {
                    peak = c[i] - 0.25 * (c[i - 1] - c[i + 1]) * s;
                    at = t[i] + s * h;
                }
            }
            xs.push_back(at);
            ys.push_back(std::log(std::abs(peak)));
        }
    }
    if (xs.size() < 2) return std::numeric_limits<double>::quiet_NaN();
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        mx += xs[i];
        my += ys[i];
    }
    mx /= static_cast<double>(xs.size());
    my /= static_cast<double>(xs.size());
    double sxy = 0, sxx = 0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
        sxy += (xs[i] - mx) * (ys[i] - my);
        sxx += (xs[i] - mx) * (xs[i] - mx);
    }
    return -sxy / sxx;
}

inline std::vector<AutocorrRow> autocorr_rows(const RunConfig& cfg) {
    const auto ens = cfg.ensemble_at(cfg.ensemble.T.front());
    const auto spec = cfg.quadrature_spec();
    const double g = cfg.oscillator.gamma, w0 = cfg.oscillator.omega0;
    const auto fm = field::ScalarFieldModel::from_gamma(w0, g, cfg.oscillator.c);
    const std::size_t n = cfg.autocorr.n_points;
    return parallel_map<AutocorrRow>(n, resolve_threads(cfg.threads), [&](std::size_t i) {
        AutocorrRow row;
        row.dt = cfg.autocorr.dt_max * static_cast<double>(i) / static_cast<double>(n - 1);
        row.thermo_path = thermo::position_autocorrelation(g, w0, ens, row.dt, spec);
        row.mode_path = field::autocorrelation_from_modes(fm, ens, row.dt, spec);
        if (ens.regime == thermo::Regime::classical && g < 2.0 * w0)
            row.closed_form = thermo::classical_autocorrelation_underdamped(g, w0, ens.kT(), row.dt);
        return row;
    });
}

inline CommandResult cmd_autocorr(const RunConfig& cfg) {
    const auto rows = autocorr_rows(cfg);
    const double scale = std::abs(rows.front().thermo_path.value);
    CsvTable csv({"dt(time)", "thermo(length^2)", "modes(length^2)", "path_difference(relative to dt=0)",
                  "closed_form(length^2)", "classification", "flagged"});
    json arr = json::array();
    std::vector<double> ts, cs;
    double max_diff = 0.0;
    bool flagged_any = false;
    for (const auto& r : rows) {
        const double diff = std::abs(r.thermo_path.value - r.mode_path.value) / scale;
        const bool flagged = !r.thermo_path.converged() || !r.mode_path.converged();
        flagged_any = flagged_any || flagged;
        if (std::isfinite(diff)) max_diff = std::max(max_diff, diff);
        ts.push_back(r.dt);
        cs.push_back(r.thermo_path.value);
        csv.add_row({format_number(r.dt), format_number(r.thermo_path.value), format_number(r.mode_path.value),
                     format_number(diff), format_number(r.closed_form),
                     std::string(quad::to_string(r.thermo_path.classification)), flagged ? "true" : "false"});
        arr.push_back(json{{"dt", r.dt},
                           {"thermo", json_number(r.thermo_path.value)},
                           {"modes", json_number(r.mode_path.value)},
                           {"path_difference", json_number(diff)},
                           {"closed_form", json_number(r.closed_form)},
                           {"flagged", flagged}});
    }
    const double rate = envelope_decay_rate(ts, cs);
    const double expected = 0.5 * cfg.oscillator.gamma;
    json doc = detail::provenance(cfg, "autocorr");
    doc["rows"] = std::move(arr);
    doc["max_path_difference"] = max_diff;
    doc["envelope"] = json{{"decay_rate", json_number(rate)},
                           {"expected_decay_rate", expected},
                           {"relative_error", json_number(std::abs(rate - expected) / expected)}};
    CommandResult out;
    out.exit_code = flagged_any ? kExitDivergent : kExitClean;
    out.files["autocorr.csv"] = csv.str();
    out.files["autocorr.json"] = canonical_json(doc);
    out.summary = fmt::format("autocorr: {} points, max path difference {}, envelope decay rate {} (gamma/2 = {})\n",
                              rows.size(), format_number(max_diff), format_number(rate), format_number(expected));
    return out;
}

// ------------------------------------ sweep -----------------------------------

inline CommandResult cmd_sweep(const RunConfig& cfg) {
    const json base = cfg.to_json();
    const auto& values = cfg.sweep.values;
    std::vector<RunConfig> points;
    for (double v : values) {
        json doc = base;
        apply_override(doc, "--" + cfg.sweep.parameter + "=" + format_number(v));
        points.push_back(RunConfig::from_json(doc));
    }
    struct Job {
        std::size_t point, t;
    };
    std::vector<Job> jobs;
    for (std::size_t p = 0; p < points.size(); ++p)
        for (std::size_t t = 0; t < points[p].ensemble.T.size(); ++t) jobs.push_back({p, t});
    const auto reports = parallel_map<thermo::EnergyReport>(jobs.size(), resolve_threads(cfg.threads), [&](std::size_t i) {
        const auto& pc = points[jobs[i].point];
        return thermo::energy_report(pc.susceptibility(), pc.oscillator.omega0, pc.ensemble_at(pc.ensemble.T[jobs[i].t]),
                                     pc.quadrature_spec());
    });

    CsvTable csv({"index", cfg.sweep.parameter, "T(energy/kB)", "quantity", "value(energy; S_star in kB)",
                  "error(same units as value)", "method", "diverged", "classification", "tail_coefficient(energy)"});
    json arr = json::array();
    bool diverged = false;
    for (std::size_t i = 0; i < jobs.size(); ++i) {
        const auto& rep = reports[i];
        const double v = values[jobs[i].point];
        json row{{"index", jobs[i].point}, {"value", v}, {"T", rep.T}};
        for (const auto& [name, field] : detail::quantity_fields()) {
            const auto& q = rep.*field;
            std::vector<std::string> cells{std::to_string(jobs[i].point), format_number(v), format_number(rep.T), name};
            for (auto& c : detail::quantity_cells(q)) cells.push_back(std::move(c));
            csv.add_row(std::move(cells));
            row[name] = detail::quantity_json(q);
            diverged = diverged || q.diverged;
        }
        arr.push_back(std::move(row));
    }
    json doc = detail::provenance(cfg, "sweep");
    doc["results"] = std::move(arr);
    CommandResult out;
    out.exit_code = diverged ? kExitDivergent : kExitClean;
    out.files["sweep.csv"] = csv.str();
    out.files["sweep.json"] = canonical_json(doc);
    out.summary = fmt::format("sweep: {} points x temperatures = {} reports\n", points.size(), jobs.size());
    return out;
}

}  // namespace ossidamp::cli
