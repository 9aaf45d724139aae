#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "phicredit/affine.hpp"
#include "phicredit/curves.hpp"

namespace phicredit {

/// Deterministic shift phi(t) = h(t) - f^x(t) making e^{-int phi} P^x(t) = G(t).
class ShiftFunction {
public:
    ShiftFunction(AffineBond bond, SurvivalCurve curve);

    double operator()(double t) const;
    /// phi with a caller-supplied market hazard in place of h(t).
    double with_hazard(double t, double hazard) const { return hazard - bond_.forward_intensity(t); }
    /// int_0^t phi = -ln G(t) + ln P^x(t).
    double integral(double t) const;
    /// Minimum of phi over the grid 0, step, ..., end (both one-sided values at curve knots).
    double min_on_grid(double step, double end) const;
    /// Sum of max(0, -phi)^2 over the same grid.
    double violation(double step, double end) const;

    const AffineBond& bond() const { return bond_; }
    const SurvivalCurve& curve() const { return curve_; }

private:
    AffineBond bond_;
    SurvivalCurve curve_;
};

/// Clock Theta(t) = Q^x(G(t)) with rate theta(t) = h(t) / f^x(Theta(t)).
class ClockFunction {
public:
    /// Tabulates Theta on `grid`; throws DomainError if G leaves the range of P^x there.
    ClockFunction(AffineBond bond, SurvivalCurve curve, std::vector<double> grid);

    double operator()(double t) const;
    /// theta(t); with a caller-supplied market hazard when given.
    double rate(double t) const { return rate_with_hazard(t, curve_.hazard(t)); }
    double rate_with_hazard(double t, double hazard) const;

    std::span<const double> grid() const { return grid_; }
    std::span<const double> values() const { return values_; }
    const AffineBond& bond() const { return bond_; }
    const SurvivalCurve& curve() const { return curve_; }

private:
    AffineBond bond_;
    SurvivalCurve curve_;
    std::vector<double> grid_;
    std::vector<double> values_;
};

ShiftFunction shift_from_curve(const CirParams& params, const JumpParams& jumps, const SurvivalCurve& curve);
ClockFunction clock_from_curve(const CirParams& params, const JumpParams& jumps, const SurvivalCurve& curve,
                               std::vector<double> grid);

enum class AffineKind { PsJcir, TcCir };

AffineKind parse_affine_kind(const std::string& name);
std::string to_string(AffineKind kind);

struct CalibrationOptions {
    /// Objective times; empty means the curve knots.
    std::vector<double> fit_times;
    /// Weight of the positive-shift penalty (PS-JCIR only); infinity makes it a hard constraint.
    double penalty_weight = std::numeric_limits<double>::infinity();
    double constraint_step = 0.01;
    double constraint_end = 10.0;
    double tolerance = 1e-8;
    int max_iterations = 5000;
    int restarts = 3;
    std::uint64_t seed = 7;
};

struct CalibrationResult {
    AffineKind kind;
    CirParams params;
    JumpParams jumps;
    double objective;              // squared fit error, without the penalty
    double constraint_violation;   // sum of max(0, -phi)^2 on the constraint grid
    double min_shift;              // PS-JCIR only; NaN otherwise
    int iterations;
    bool converged;
};

/// Sum of squared differences between P^x and G at `times`.
double fit_error(const AffineBond& bond, const SurvivalCurve& curve, std::span<const double> times);

/// Nelder-Mead on squared parameters, restarted around `init`; the best run is returned.
CalibrationResult fit_parameters(AffineKind kind, const SurvivalCurve& curve, const CirParams& init_params,
                                 const JumpParams& init_jumps, const CalibrationOptions& options = {});

}  // namespace phicredit
