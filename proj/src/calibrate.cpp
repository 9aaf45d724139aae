#include "phicredit/calibrate.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <optional>
#include <sstream>

#include "phicredit/engine.hpp"
#include "phicredit/errors.hpp"

namespace phicredit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kShiftTolerance = 1e-10;

struct SimplexResult {
    std::vector<double> x;
    double value;
    int iterations;
    bool converged;
};

// Nelder-Mead with standard coefficients. Stops when every vertex lies within
// `tolerance` (max-norm) of the best one, or once the best value reaches `target`.
SimplexResult nelder_mead(const std::function<double(const std::vector<double>&)>& f, std::vector<double> start,
                          double tolerance, int max_iterations, double target = -kInf) {
    const std::size_t n = start.size();
    std::vector<std::vector<double>> simplex(n + 1, start);
    for (std::size_t i = 0; i < n; ++i) {
        const double step = start[i] != 0.0 ? 0.1 * std::abs(start[i]) : 0.05;
        simplex[i + 1][i] += step;
    }
    std::vector<double> values(n + 1);
    for (std::size_t i = 0; i <= n; ++i) values[i] = f(simplex[i]);
    if (!std::isfinite(values[0]) && std::none_of(values.begin(), values.end(), [](double v) { return std::isfinite(v); })) {
        throw NumericError("calibration: objective is not finite at the initial point");
    }

    std::vector<std::size_t> order(n + 1);
    auto sort_vertices = [&] {
        std::iota(order.begin(), order.end(), 0);
        std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });
    };
    auto diameter = [&] {
        double d = 0.0;
        const auto& best = simplex[order[0]];
        for (std::size_t k = 1; k <= n; ++k) {
            for (std::size_t i = 0; i < n; ++i) d = std::max(d, std::abs(simplex[order[k]][i] - best[i]));
        }
        return d;
    };

    int it = 0;
    bool converged = false;
    std::vector<double> centroid(n), trial(n), trial2(n);
    for (; it < max_iterations; ++it) {
        sort_vertices();
        if (values[order[0]] <= target || diameter() < tolerance) {
            converged = true;
            break;
        }
        const std::size_t worst = order[n];
        std::fill(centroid.begin(), centroid.end(), 0.0);
        for (std::size_t k = 0; k < n; ++k) {
            for (std::size_t i = 0; i < n; ++i) centroid[i] += simplex[order[k]][i] / static_cast<double>(n);
        }
        auto along = [&](double coef, std::vector<double>& out) {
            for (std::size_t i = 0; i < n; ++i) out[i] = centroid[i] + coef * (simplex[worst][i] - centroid[i]);
            return f(out);
        };
        const double fr = along(-1.0, trial);
        if (fr < values[order[0]]) {
            const double fe = along(-2.0, trial2);
            if (fe < fr) {
                simplex[worst] = trial2;
                values[worst] = fe;
            } else {
                simplex[worst] = trial;
                values[worst] = fr;
            }
        } else if (fr < values[order[n - 1]]) {
            simplex[worst] = trial;
            values[worst] = fr;
        } else {
            const bool outside = fr < values[worst];
            const double fc = along(outside ? -0.5 : 0.5, trial2);
            if (fc < (outside ? fr : values[worst])) {
                simplex[worst] = trial2;
                values[worst] = fc;
            } else {
                const auto& best = simplex[order[0]];
                for (std::size_t k = 1; k <= n; ++k) {
                    auto& v = simplex[order[k]];
                    for (std::size_t i = 0; i < n; ++i) v[i] = best[i] + 0.5 * (v[i] - best[i]);
                    values[order[k]] = f(v);
                }
            }
        }
    }
    sort_vertices();
    return {simplex[order[0]], values[order[0]], it, converged};
}

struct Decoded {
    CirParams params;
    JumpParams jumps;
};

Decoded decode(AffineKind kind, const std::vector<double>& u) {
    Decoded d;
    d.params = {u[0] * u[0], u[1] * u[1], u[2] * u[2], u[3] * u[3]};
    if (kind == AffineKind::PsJcir) d.jumps = {u[4] * u[4], u[5] * u[5] + 1e-12};
    return d;
}

std::vector<double> encode(AffineKind kind, const CirParams& p, const JumpParams& j) {
    std::vector<double> u{std::sqrt(p.kappa), std::sqrt(p.beta), std::sqrt(p.delta), std::sqrt(p.x0)};
    if (kind == AffineKind::PsJcir) {
        u.push_back(std::sqrt(j.omega));
        u.push_back(std::sqrt(j.alpha));
    }
    return u;
}

}  // namespace

ShiftFunction::ShiftFunction(AffineBond bond, SurvivalCurve curve) : bond_(std::move(bond)), curve_(std::move(curve)) {}

double ShiftFunction::operator()(double t) const { return with_hazard(t, curve_.hazard(t)); }

double ShiftFunction::integral(double t) const {
    return curve_.integrated_hazard(t) + std::log(bond_(t));
}

double ShiftFunction::min_on_grid(double step, double end) const {
    double lowest = kInf;
    const auto n = static_cast<long>(std::llround(end / step));
    for (long k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * step;
        lowest = std::min(lowest, (*this)(t));
        if (t > 0.0) lowest = std::min(lowest, with_hazard(t, curve_.hazard(std::nextafter(t, 0.0))));
    }
    return lowest;
}

double ShiftFunction::violation(double step, double end) const {
    double total = 0.0;
    const auto n = static_cast<long>(std::llround(end / step));
    for (long k = 0; k <= n; ++k) {
        const double t = static_cast<double>(k) * step;
        const double right = (*this)(t);
        const double left = t > 0.0 ? with_hazard(t, curve_.hazard(std::nextafter(t, 0.0))) : right;
        for (double v : {right, left}) {
            if (v < -kShiftTolerance) total += v * v;
        }
    }
    return total;
}

ClockFunction::ClockFunction(AffineBond bond, SurvivalCurve curve, std::vector<double> grid)
    : bond_(std::move(bond)), curve_(std::move(curve)), grid_(std::move(grid)) {
    values_.reserve(grid_.size());
    for (double t : grid_) values_.push_back((*this)(t));
}

double ClockFunction::operator()(double t) const {
    if (t <= 0.0) return 0.0;
    try {
        return inverse_bond(bond_, curve_.survival(t));
    } catch (const DomainError& e) {
        std::ostringstream msg;
        msg << "clock: G(" << t << ") is out of reach of the factor bond (" << e.what() << ')';
        throw DomainError(msg.str());
    }
}

double ClockFunction::rate_with_hazard(double t, double hazard) const {
    if (hazard == 0.0) return 0.0;
    const double f = bond_.forward_intensity((*this)(t));
    if (!(f > 0.0)) throw DomainError("clock: factor forward intensity vanishes");
    return hazard / f;
}

ShiftFunction shift_from_curve(const CirParams& params, const JumpParams& jumps, const SurvivalCurve& curve) {
    return ShiftFunction(AffineBond(params, jumps), curve);
}

ClockFunction clock_from_curve(const CirParams& params, const JumpParams& jumps, const SurvivalCurve& curve,
                               std::vector<double> grid) {
    return ClockFunction(AffineBond(params, jumps), curve, std::move(grid));
}

AffineKind parse_affine_kind(const std::string& name) {
    if (name == "ps-jcir") return AffineKind::PsJcir;
    if (name == "tc-cir") return AffineKind::TcCir;
    throw ValidationError("unknown affine model '" + name + "' (expected ps-jcir or tc-cir)");
}

std::string to_string(AffineKind kind) { return kind == AffineKind::PsJcir ? "ps-jcir" : "tc-cir"; }

double fit_error(const AffineBond& bond, const SurvivalCurve& curve, std::span<const double> times) {
    double total = 0.0;
    for (double t : times) {
        const double d = bond(t) - curve.survival(t);
        total += d * d;
    }
    return total;
}

CalibrationResult fit_parameters(AffineKind kind, const SurvivalCurve& curve, const CirParams& init_params,
                                 const JumpParams& init_jumps, const CalibrationOptions& options) {
    validate(init_params);
    validate(init_jumps);
    std::vector<double> times = options.fit_times;
    if (times.empty()) times.assign(curve.knots().begin(), curve.knots().end());
    const bool constrained = kind == AffineKind::PsJcir && options.penalty_weight > 0.0;
    const bool hard = constrained && std::isinf(options.penalty_weight);

    auto violation_of = [&](const Decoded& d) {
        return ShiftFunction(AffineBond(d.params, d.jumps), curve).violation(options.constraint_step, options.constraint_end);
    };
    auto objective = [&](const std::vector<double>& u) {
        try {
            const Decoded d = decode(kind, u);
            const double fit = fit_error(AffineBond(d.params, d.jumps), curve, times);
            if (!constrained) return fit;
            const double v = violation_of(d);
            if (hard) return v > 0.0 ? kInf : fit;
            return fit + options.penalty_weight * v;
        } catch (const DomainError&) {
            return kInf;
        }
    };
    auto phase_one = [&](const std::vector<double>& u) {
        try {
            return violation_of(decode(kind, u));
        } catch (const DomainError&) {
            return kInf;
        }
    };

    const std::vector<double> u0 = encode(kind, init_params, init_jumps);
    std::vector<std::vector<double>> starts{u0};
    for (int r = 0; r < options.restarts; ++r) {
        const PathStream stream(options.seed, static_cast<std::uint64_t>(r));
        std::vector<double> u = u0;
        for (std::size_t i = 0; i < u.size(); ++i) {
            const double w = stream.uniforms(static_cast<std::uint32_t>(i), channel::kAux)[0];
            u[i] *= 1.0 + 0.2 * (2.0 * w - 1.0);
        }
        starts.push_back(std::move(u));
    }

    std::optional<SimplexResult> best;
    for (auto start : starts) {
        int used = 0;
        if (hard && !std::isfinite(objective(start))) {
            const auto feasible = nelder_mead(phase_one, start, options.tolerance, options.max_iterations, 0.0);
            used = feasible.iterations;
            if (feasible.value > 0.0) continue;
            start = feasible.x;
        }
        auto run = nelder_mead(objective, start, options.tolerance, options.max_iterations - used);
        run.iterations += used;
        if (!best || run.value < best->value) best = std::move(run);
    }
    if (!best) throw NumericError("calibration: no feasible starting point for the positive-shift constraint");

    const Decoded d = decode(kind, best->x);
    const AffineBond bond(d.params, d.jumps);
    CalibrationResult result{kind, d.params, d.jumps, fit_error(bond, curve, times), 0.0,
                             std::numeric_limits<double>::quiet_NaN(), best->iterations, best->converged};
    if (kind == AffineKind::PsJcir) {
        const ShiftFunction shift(bond, curve);
        result.constraint_violation = shift.violation(options.constraint_step, options.constraint_end);
        result.min_shift = shift.min_on_grid(options.constraint_step, options.constraint_end);
    }
    return result;
}

}  // namespace phicredit
