// quadrature.hpp: Adaptive Gauss-Kronrod integration on finite, semi-infinite and principal-value domains

#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <limits>
#include <optional>
#include <numbers>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>
#include <tuple>
#include <utility>
#include <vector>

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/quadrature/gauss_kronrod.hpp>

namespace ossidamp::quad {

enum class Classification { converged, log_divergent, power_divergent, inconclusive };

inline std::string_view to_string(Classification c) noexcept {
    switch (c) {
        case Classification::converged: return "converged";
        case Classification::log_divergent: return "log_divergent";
        case Classification::power_divergent: return "power_divergent";
        case Classification::inconclusive: return "inconclusive";
    }
    return "inconclusive";
}

struct QuadratureSpec {
    double rel_tol{1e-10};
    double abs_tol{1e-14};
    std::size_t max_subdivisions{4000};
    int tail_probe_decades{3};
    std::optional<double> cutoff;     // hard upper limit of a semi-infinite integral
    double split_point{10.0};         // start of the transformed tail segment
    std::vector<double> breakpoints;  // abscissae the initial partition must contain
    double tail_frequency{0.0};       // > 0: tail oscillates like cos(tail_frequency w); summed by half periods

    void validate() const {
        if (!(rel_tol > 0.0)) throw std::invalid_argument("QuadratureSpec: rel_tol must be > 0");
        if (!(abs_tol >= 0.0)) throw std::invalid_argument("QuadratureSpec: abs_tol must be >= 0");
        if (max_subdivisions < 1) throw std::invalid_argument("QuadratureSpec: max_subdivisions must be >= 1");
        if (tail_probe_decades < 1) throw std::invalid_argument("QuadratureSpec: tail_probe_decades must be >= 1");
        if (!(split_point > 0.0) || !std::isfinite(split_point))
            throw std::invalid_argument("QuadratureSpec: split_point must be finite and > 0");
        if (cutoff && !(*cutoff > 0.0)) throw std::invalid_argument("QuadratureSpec: cutoff must be > 0");
        if (!(tail_frequency >= 0.0) || !std::isfinite(tail_frequency))
            throw std::invalid_argument("QuadratureSpec: tail_frequency must be finite and >= 0");
    }
};

struct QuadratureResult {
    double value{0.0};
    double error_estimate{0.0};
    Classification classification{Classification::converged};
    double tail_coefficient{0.0};  // c in c/w or c*w^(p-1) for divergent tails
    double tail_exponent{0.0};     // p of the divergent growth c*w^p/p (0 for logarithmic)
    std::size_t evaluations{0};

    bool converged() const noexcept { return classification == Classification::converged; }
    bool divergent() const noexcept {
        return classification == Classification::log_divergent ||
               classification == Classification::power_divergent;
    }
};

/// Thrown when the integrand returns a non-finite sample.
class EvaluationError : public std::runtime_error {
public:
    explicit EvaluationError(double abscissa)
        : std::runtime_error("non-finite integrand sample at w = " + std::to_string(abscissa)),
          abscissa_(abscissa) {}
    double abscissa() const noexcept { return abscissa_; }

private:
    double abscissa_;
};

template <class V>
struct IntervalResult {
    V value{};
    double error_estimate{0.0};
    bool ok{false};
    std::size_t evaluations{0};
    double magnitude{0.0};  // integral of |f|, the scale of the round-off floor
};

namespace detail {

inline bool finite_sample(double v) noexcept { return std::isfinite(v); }
inline bool finite_sample(const std::complex<double>& v) noexcept {
    return std::isfinite(v.real()) && std::isfinite(v.imag());
}

template <class V>
struct Panel {
    double a;
    double b;
    V value;
    double error;
    double magnitude;
};

// One 21-point Gauss-Kronrod panel with the QUADPACK error heuristic.
template <class V, class F>
Panel<V> gk21_panel(F& f, double a, double b) {
    using kronrod = boost::math::quadrature::gauss_kronrod<double, 21>;
    using gauss = boost::math::quadrature::gauss<double, 10>;
    const auto& xk = kronrod::abscissa();
    const auto& wk = kronrod::weights();
    const auto& wg = gauss::weights();

    const double centre = 0.5 * (a + b);
    const double half = 0.5 * (b - a);

    auto sample = [&](double x) -> V {
        V v = f(x);
        if (!finite_sample(v)) throw EvaluationError(x);
        return v;
    };

    const V fc = sample(centre);
    V kronrod_sum = fc * wk[0];
    V gauss_sum{};
    double resabs = std::abs(fc) * wk[0];
    std::array<V, 11> fplus{}, fminus{};
    fplus[0] = fminus[0] = fc;
    for (std::size_t i = 1; i < xk.size(); ++i) {
        const double dx = half * xk[i];
        const V fp = sample(centre + dx);
        const V fm = sample(centre - dx);
        fplus[i] = fp;
        fminus[i] = fm;
        kronrod_sum += (fp + fm) * wk[i];
        resabs += (std::abs(fp) + std::abs(fm)) * wk[i];
        if (i % 2 == 1) gauss_sum += (fp + fm) * wg[i / 2];
    }
    const V mean = kronrod_sum * 0.5;
    double resasc = wk[0] * std::abs(fc - mean);
    for (std::size_t i = 1; i < xk.size(); ++i)
        resasc += wk[i] * (std::abs(fplus[i] - mean) + std::abs(fminus[i] - mean));

    const double scale = std::abs(half);
    double err = std::abs((kronrod_sum - gauss_sum) * half);
    resabs *= scale;
    resasc *= scale;
    if (resasc != 0.0 && err != 0.0) err = resasc * std::min(1.0, std::pow(200.0 * err / resasc, 1.5));
    const double eps = std::numeric_limits<double>::epsilon();
    if (resabs > std::numeric_limits<double>::min() / (50.0 * eps)) err = std::max(err, 50.0 * eps * resabs);
    return Panel<V>{a, b, kronrod_sum * half, err, resabs};
}

inline std::vector<double> make_partition(double a, double b, const std::vector<double>& extra) {
    std::vector<double> pts{a, b};
    for (double x : extra)
        if (x > a && x < b && std::isfinite(x)) pts.push_back(x);
    std::sort(pts.begin(), pts.end());
    std::vector<double> out;
    for (double x : pts) {
        if (out.empty() || x - out.back() > 1e-13 * std::max(std::abs(x), std::abs(out.back())) + 0.0)
            out.push_back(x);
    }
    if (out.back() != b) out.back() = b;
    return out;
}

inline double roundoff_floor(double magnitude) noexcept {
    return 100.0 * std::numeric_limits<double>::epsilon() * magnitude;
}

// Globally adaptive bisection: always split the panel with the largest error.
template <class V, class F>
IntervalResult<V> adaptive(F& f, const std::vector<double>& partition, double rel_tol, double abs_tol,
                           std::size_t max_panels) {
    std::vector<Panel<V>> heap;
    std::vector<Panel<V>> frozen;
    auto by_error = [](const Panel<V>& l, const Panel<V>& r) { return l.error < r.error; };
    std::size_t evaluations = 0;
    for (std::size_t i = 0; i + 1 < partition.size(); ++i) {
        heap.push_back(gk21_panel<V>(f, partition[i], partition[i + 1]));
        evaluations += 21;
    }
    std::make_heap(heap.begin(), heap.end(), by_error);

    V sum{};
    double err = 0.0, mag = 0.0;
    auto totals = [&]() {
        sum = V{};
        err = mag = 0.0;
        for (const auto* group : {&heap, &frozen})
            for (const auto& p : *group) { sum += p.value; err += p.error; mag += p.magnitude; }
    };
    // Cancelling integrands cannot be resolved relative to |sum|; the round-off floor of the
    // panel sum bounds what is achievable.
    auto target = [&] { return std::max({abs_tol, rel_tol * std::abs(sum), roundoff_floor(mag)}); };

    totals();
    std::size_t since_resum = 0;
    while (err > target() && !heap.empty() &&
           heap.size() + frozen.size() < max_panels) {
        std::pop_heap(heap.begin(), heap.end(), by_error);
        Panel<V> worst = heap.back();
        heap.pop_back();
        const double mid = 0.5 * (worst.a + worst.b);
        const double width = worst.b - worst.a;
        if (!(mid > worst.a && mid < worst.b) ||
            width <= 64.0 * std::numeric_limits<double>::epsilon() * std::max(std::abs(worst.a), std::abs(worst.b))) {
            frozen.push_back(worst);
            continue;
        }
        auto left = gk21_panel<V>(f, worst.a, mid);
        auto right = gk21_panel<V>(f, mid, worst.b);
        evaluations += 42;
        sum += left.value + right.value - worst.value;
        err += left.error + right.error - worst.error;
        mag += left.magnitude + right.magnitude - worst.magnitude;
        heap.push_back(left);
        std::push_heap(heap.begin(), heap.end(), by_error);
        heap.push_back(right);
        std::push_heap(heap.begin(), heap.end(), by_error);
        if (++since_resum == 64) {
            totals();
            since_resum = 0;
        }
    }
    totals();
    IntervalResult<V> out;
    out.value = sum;
    out.error_estimate = err;
    out.magnitude = mag;
    out.ok = err <= target();
    out.evaluations = evaluations;
    return out;
}

// Log-spaced points below `top` that resolve integrable endpoint singularities at 0.
inline std::vector<double> zero_anchored_points(double top, const std::vector<double>& breakpoints) {
    std::vector<double> pts = breakpoints;
    for (int k = 1; k <= 8; ++k) pts.push_back(top * std::pow(10.0, -k));
    for (int j = 1; j < 10; ++j) pts.push_back(top * j / 10.0);
    return pts;
}

struct TailProbe {
    Classification classification{Classification::converged};
    double coefficient{0.0};
    double exponent{0.0};
    std::size_t evaluations{0};
};

// Samples the integrand envelope over successive decades above `start` and fits its decay law.
template <class F>
TailProbe probe_tail(F& f, double start, int decades) {
    constexpr int per_window = 24;
    std::vector<double> envelope(static_cast<std::size_t>(decades) + 1, 0.0);
    double log_coefficient = 0.0;
    double last_w = 0.0, last_f = 0.0;
    TailProbe probe;
    for (int j = 0; j <= decades; ++j) {
        const double lo = start * std::pow(10.0, j);
        double acc = 0.0;
        for (int s = 0; s < per_window; ++s) {
            // irrational offset avoids locking onto the zeros of periodic kernels
            const double frac = (s + 0.5 + 0.1180339887 * std::sin(1.0 + s)) / per_window;
            const double w = lo * std::pow(10.0, frac);
            const double v = f(w);
            if (!std::isfinite(v)) throw EvaluationError(w);
            ++probe.evaluations;
            envelope[static_cast<std::size_t>(j)] = std::max(envelope[static_cast<std::size_t>(j)], std::abs(v));
            if (j == decades) {
                acc += w * v;
                last_w = w;
                last_f = v;
            }
        }
        if (j == decades) log_coefficient = acc / per_window;
    }
    const double prev = envelope[envelope.size() - 2];
    const double last = envelope.back();
    if (last == 0.0) return probe;
    if (prev == 0.0) {
        probe.classification = Classification::inconclusive;
        return probe;
    }
    const double slope = std::log10(last / prev);
    if (slope < -1.2) return probe;
    if (slope <= -0.8) {
        probe.classification = Classification::log_divergent;
        probe.coefficient = log_coefficient;
        return probe;
    }
    probe.classification = Classification::power_divergent;
    probe.exponent = slope + 1.0;
    probe.coefficient = last_f / std::pow(last_w, slope);
    return probe;
}

// Wynn's epsilon algorithm over partial sums; the last even-column entry is the limit estimate.
inline double wynn_epsilon(const std::vector<double>& sums) {
    std::vector<double> prev(sums.size() + 1, 0.0), cur(sums.begin(), sums.end());
    double best = sums.back();
    for (std::size_t k = 1; cur.size() > 1; ++k) {
        std::vector<double> next(cur.size() - 1);
        for (std::size_t n = 0; n + 1 < cur.size(); ++n) {
            const double diff = cur[n + 1] - cur[n];
            if (diff == 0.0) return cur[n + 1];  // converged column
            next[n] = prev[n + 1] + 1.0 / diff;
        }
        prev = std::move(cur);
        cur = std::move(next);
        if (k % 2 == 0) best = cur.back();
    }
    return best;
}

// Tail of an oscillatory integrand over [start, inf): adaptive integrals over successive half
// periods pi / frequency, with the partial sums extrapolated by the epsilon algorithm.
template <class F>
IntervalResult<double> oscillatory_tail(F& f, double start, double frequency, double rel_tol, double abs_tol,
                                        std::size_t max_panels) {
    constexpr std::size_t max_pieces = 400;
    const double half = std::numbers::pi / frequency;
    IntervalResult<double> out;
    std::vector<double> sums;
    double running = 0.0, piece_error = 0.0, previous = std::numeric_limits<double>::quiet_NaN();
    int settled = 0;
    for (std::size_t n = 0; n < max_pieces; ++n) {
        const double a = start + static_cast<double>(n) * half;
        auto r = adaptive<double>(f, {a, a + half}, rel_tol, abs_tol / max_pieces, max_panels);
        out.evaluations += r.evaluations;
        out.magnitude += r.magnitude;
        piece_error += r.error_estimate;
        running += r.value;
        sums.push_back(running);
        if (sums.size() < 6) continue;
        const double estimate = wynn_epsilon(sums);
        const double change = std::abs(estimate - previous);
        previous = estimate;
        settled = change <= std::max(abs_tol, rel_tol * std::abs(estimate)) ? settled + 1 : 0;
        out.value = estimate;
        out.error_estimate = change + piece_error;
        if (settled >= 2) {
            out.ok = out.error_estimate <= std::max({abs_tol, rel_tol * std::abs(estimate), roundoff_floor(out.magnitude)});
            return out;
        }
    }
    out.ok = false;
    return out;
}

}  // namespace detail

/// Adaptive integration of a real integrand over a finite interval [a, b].
template <class F>
QuadratureResult integrate_interval(F&& f, double a, double b, const QuadratureSpec& spec) {
    spec.validate();
    if (!(a <= b) || !std::isfinite(a) || !std::isfinite(b))
        throw std::invalid_argument("integrate_interval: need finite a <= b");
    QuadratureResult out;
    if (a == b) return out;
    auto partition = detail::make_partition(a, b, spec.breakpoints);
    auto r = detail::adaptive<double>(f, partition, spec.rel_tol, spec.abs_tol, spec.max_subdivisions);
    out.value = r.value;
    out.error_estimate = r.error_estimate;
    out.evaluations = r.evaluations;
    out.classification = r.ok ? Classification::converged : Classification::inconclusive;
    return out;
}

/// Complex-valued variant of integrate_interval.
template <class F>
IntervalResult<std::complex<double>> integrate_interval_complex(F&& f, double a, double b, const QuadratureSpec& spec) {
    spec.validate();
    if (a == b) return {std::complex<double>{}, 0.0, true, 0};
    auto partition = detail::make_partition(a, b, spec.breakpoints);
    return detail::adaptive<std::complex<double>>(f, partition, spec.rel_tol, spec.abs_tol, spec.max_subdivisions);
}

/// Integral of f over (0, inf).
///
/// The range is split at spec.split_point: [0, split] is integrated adaptively on a
/// log-anchored partition (tolerates an integrable singularity at 0), the tail is probed
/// over spec.tail_probe_decades decades and, when it decays faster than 1/w, integrated
/// after the substitution w = split / t. Tails that decay like 1/w or slower are reported
/// as divergent with their fitted coefficient and an infinite value. With spec.cutoff set
/// the integral is taken over [0, cutoff] instead and no tail analysis is done.
template <class F>
QuadratureResult integrate_semi_infinite(F&& f, const QuadratureSpec& spec) {
    spec.validate();
    QuadratureResult out;
    const double eps_share = 0.5 * spec.abs_tol;

    if (spec.cutoff) {
        const double top = *spec.cutoff;
        auto pts = detail::zero_anchored_points(std::min(top, spec.split_point), spec.breakpoints);
        for (double w = spec.split_point; w < top; w *= std::sqrt(10.0)) pts.push_back(w);
        auto partition = detail::make_partition(0.0, top, pts);
        auto r = detail::adaptive<double>(f, partition, spec.rel_tol, spec.abs_tol, spec.max_subdivisions);
        out.value = r.value;
        out.error_estimate = r.error_estimate;
        out.evaluations = r.evaluations;
        out.classification = r.ok ? Classification::converged : Classification::inconclusive;
        return out;
    }

    const double split = spec.split_point;
    auto probe = detail::probe_tail(f, split, spec.tail_probe_decades);
    out.evaluations += probe.evaluations;
    if (probe.classification == Classification::log_divergent ||
        probe.classification == Classification::power_divergent) {
        out.classification = probe.classification;
        out.tail_coefficient = probe.coefficient;
        out.tail_exponent = probe.exponent;
        out.value = std::copysign(std::numeric_limits<double>::infinity(), probe.coefficient);
        out.error_estimate = std::numeric_limits<double>::infinity();
        return out;
    }

    auto head_partition = detail::make_partition(0.0, split, detail::zero_anchored_points(split, spec.breakpoints));
    auto head = detail::adaptive<double>(f, head_partition, spec.rel_tol, eps_share, spec.max_subdivisions);

    IntervalResult<double> tail;
    if (spec.tail_frequency > 0.0) {
        tail = detail::oscillatory_tail(f, split, spec.tail_frequency, spec.rel_tol, eps_share, spec.max_subdivisions);
    } else {
        auto transformed = [&f, split](double t) -> double {
            const double w = split / t;
            if (!(w < 1e60)) return 0.0;  // beyond the range any convergent tail still contributes
            return f(w) * split / (t * t);
        };
        std::vector<double> tail_pts;
        for (double b : spec.breakpoints)
            if (b > split) tail_pts.push_back(split / b);
        for (int k = 1; k <= 6; ++k) tail_pts.push_back(std::pow(10.0, -k));
        auto tail_partition = detail::make_partition(0.0, 1.0, tail_pts);
        tail = detail::adaptive<double>(transformed, tail_partition, spec.rel_tol, eps_share, spec.max_subdivisions);
    }

    out.value = head.value + tail.value;
    out.error_estimate = head.error_estimate + tail.error_estimate;
    out.evaluations += head.evaluations + tail.evaluations;
    // head and tail may cancel, so meeting the tolerance piecewise also counts; the summed
    // error is reported either way
    const bool ok = out.error_estimate <= std::max({spec.abs_tol, spec.rel_tol * std::abs(out.value),
                                                    detail::roundoff_floor(head.magnitude + tail.magnitude)}) ||
                    (head.ok && tail.ok);
    out.classification = (ok && probe.classification == Classification::converged) ? Classification::converged
                                                                                    : Classification::inconclusive;
    return out;
}

/// Cauchy principal value of the integral of f over [a, b] (either end may be infinite)
/// for f with a simple pole at `pole`, a < pole < b.
///
/// Outside the window [pole - L, pole + L] the integral is ordinary. Inside, the integrand is
/// folded, g(t) = f(pole + t) + f(pole - t), which cancels the pole; the folded integral over
/// [eps, L] is Richardson-extrapolated to eps -> 0 over a halving sequence of exclusion
/// windows. A pole of higher order makes the sequence diverge and the result is classified
/// inconclusive.
template <class F>
QuadratureResult integrate_principal_value(F&& f, double pole, double a, double b, const QuadratureSpec& spec) {
    spec.validate();
    if (!(a < pole && pole < b) || !std::isfinite(pole))
        throw std::invalid_argument("integrate_principal_value: pole must lie strictly inside (a, b)");

    double half_window;
    if (std::isfinite(a) && std::isfinite(b)) half_window = 0.5 * std::min(pole - a, b - pole);
    else if (std::isfinite(a)) half_window = 0.5 * (pole - a);
    else if (std::isfinite(b)) half_window = 0.5 * (b - pole);
    else half_window = 0.5 * std::max(1.0, std::abs(pole));

    QuadratureResult out;
    bool ok = true;
    auto accumulate = [&](const QuadratureResult& r) {
        out.value += r.value;
        out.error_estimate += r.error_estimate;
        out.evaluations += r.evaluations;
        if (!r.converged()) ok = false;
    };

    QuadratureSpec outer = spec;
    outer.cutoff.reset();
    outer.abs_tol = spec.abs_tol / 4.0;

    // right of the window
    const double right_start = pole + half_window;
    if (std::isfinite(b)) {
        accumulate(integrate_interval(f, right_start, b, outer));
    } else {
        QuadratureSpec s = outer;
        s.breakpoints.clear();
        for (double x : spec.breakpoints)
            if (x > right_start) s.breakpoints.push_back(x - right_start);
        auto shifted = [&f, right_start](double u) { return f(right_start + u); };
        auto r = integrate_semi_infinite(shifted, s);
        if (r.divergent()) {
            out.classification = r.classification;
            out.tail_coefficient = r.tail_coefficient;
            out.tail_exponent = r.tail_exponent;
            out.value = r.value;
            out.error_estimate = r.error_estimate;
            return out;
        }
        accumulate(r);
    }
    // left of the window
    const double left_end = pole - half_window;
    if (std::isfinite(a)) {
        accumulate(integrate_interval(f, a, left_end, outer));
    } else {
        QuadratureSpec s = outer;
        s.breakpoints.clear();
        for (double x : spec.breakpoints)
            if (x < left_end) s.breakpoints.push_back(left_end - x);
        auto shifted = [&f, left_end](double u) { return f(left_end - u); };
        auto r = integrate_semi_infinite(shifted, s);
        if (r.divergent()) {
            out.classification = r.classification;
            out.tail_coefficient = -r.tail_coefficient;
            out.tail_exponent = r.tail_exponent;
            out.value = -r.value;
            out.error_estimate = r.error_estimate;
            return out;
        }
        accumulate(r);
    }

    // folded window with Richardson extrapolation in the exclusion half-width
    auto folded = [&f, pole](double t) { return f(pole + t) + f(pole - t); };
    QuadratureSpec inner = outer;
    inner.breakpoints.clear();
    constexpr int first_level = 3;
    constexpr int levels = 9;
    std::vector<double> sequence;
    double eps = half_window * std::ldexp(1.0, -first_level);
    auto base = integrate_interval(folded, eps, half_window, inner);
    out.evaluations += base.evaluations;
    if (!base.converged()) ok = false;
    double running = base.value;
    double running_err = base.error_estimate;
    sequence.push_back(running);
    for (int k = 1; k < levels; ++k) {
        const double next = 0.5 * eps;
        auto piece = integrate_interval(folded, next, eps, inner);
        out.evaluations += piece.evaluations;
        if (!piece.converged()) ok = false;
        running += piece.value;
        running_err += piece.error_estimate;
        sequence.push_back(running);
        eps = next;
    }
    // Neville-style table for I(eps) = I0 + c1 eps + c2 eps^2 + ...
    std::vector<double> row = sequence;
    double extrapolated = row.back();
    double previous = row[row.size() - 2];
    for (std::size_t order = 1; order < 5; ++order) {
        const double factor = std::ldexp(1.0, static_cast<int>(order));
        std::vector<double> next_row;
        for (std::size_t i = 1; i < row.size(); ++i) next_row.push_back((factor * row[i] - row[i - 1]) / (factor - 1.0));
        if (next_row.size() < 2) break;
        previous = extrapolated;
        extrapolated = next_row.back();
        row = std::move(next_row);
    }
    const double richardson_err = std::abs(extrapolated - previous);
    out.value += extrapolated;
    out.error_estimate += running_err + richardson_err;
    const double scale = std::max(std::abs(out.value), std::abs(sequence.front()));
    const bool settled = richardson_err <= std::max(spec.abs_tol, 1e3 * spec.rel_tol * scale);
    out.classification = (ok && settled) ? Classification::converged : Classification::inconclusive;
    return out;
}

}  // namespace ossidamp::quad
