#pragma once

#include <memory>
#include <span>
#include <string>
#include <vector>

#include "phicredit/affine.hpp"
#include "phicredit/calibrate.hpp"
#include "phicredit/conic.hpp"
#include "phicredit/engine.hpp"

namespace phicredit {

/// Per-path credit state. For the Phi-martingale `factor` is m_t; for the
/// affine models it is the factor x and `integrated` the integrated intensity.
struct CreditState {
    double factor = 0.0;
    double integrated = 0.0;
};

/// A credit model bound to a simulation grid, with grid tables precomputed.
class CreditPlan {
public:
    virtual ~CreditPlan() = default;

    virtual CreditState initial() const = 0;
    /// Moves the state from node i to node i + 1 given the credit driver's
    /// standard normal increment z.
    virtual void advance(std::size_t i, CreditState& state, double z, const PathStream& stream) const = 0;
    /// lambda S at `node` (an end point of `interval`), with the market hazard
    /// of that interval.
    virtual double lambda_s(std::size_t node, std::size_t interval, const CreditState& state) const = 0;
    virtual double survival(std::size_t node, const CreditState& state) const = 0;
};

/// Conditional survival Qbar_t(u) on a fixed set of maturities u >= t.
class CurvePlan {
public:
    virtual ~CurvePlan() = default;
    virtual void qbar(const CreditState& state, std::span<double> out) const = 0;
};

class CreditModel {
public:
    virtual ~CreditModel() = default;

    virtual std::string name() const = 0;
    /// Parameter listing used in output metadata.
    virtual std::string describe() const = 0;
    virtual const SurvivalCurve& curve() const = 0;
    /// True when the path law does not depend on the grid (exact scheme).
    virtual bool exact() const { return false; }
    /// False when the intensity can turn negative, so that conditional
    /// survival curves may increase.
    virtual bool nonnegative_intensity() const { return true; }

    virtual std::unique_ptr<CreditPlan> plan(const TimeGrid& grid) const = 0;
    virtual std::unique_ptr<CurvePlan> curve_plan(double t, std::span<const double> maturities) const = 0;
};

class PhiCreditModel final : public CreditModel {
public:
    explicit PhiCreditModel(PhiModel model) : model_(std::move(model)) {}

    std::string name() const override { return "phi"; }
    std::string describe() const override;
    const SurvivalCurve& curve() const override { return model_.curve(); }
    bool exact() const override { return true; }
    std::unique_ptr<CreditPlan> plan(const TimeGrid& grid) const override;
    std::unique_ptr<CurvePlan> curve_plan(double t, std::span<const double> maturities) const override;

    const PhiModel& model() const { return model_; }

private:
    PhiModel model_;
};

/// JCIR factor plus deterministic shift: lambda = x + phi(t).
class ShiftedJcirModel final : public CreditModel {
public:
    ShiftedJcirModel(CirParams params, JumpParams jumps, SurvivalCurve curve);

    std::string name() const override { return "ps-jcir"; }
    bool nonnegative_intensity() const override { return nonnegative_; }
    std::string describe() const override;
    const SurvivalCurve& curve() const override { return shift_.curve(); }
    std::unique_ptr<CreditPlan> plan(const TimeGrid& grid) const override;
    std::unique_ptr<CurvePlan> curve_plan(double t, std::span<const double> maturities) const override;

    const ShiftFunction& shift() const { return shift_; }

private:
    ShiftFunction shift_;
    bool nonnegative_;
};

/// (J)CIR factor run on the clock Theta(t) = Q^x(G(t)): lambda = theta(t) x_{Theta(t)}.
/// The factor is stepped in clock time with sub-steps no longer than `max_clock_step`.
class TimeChangedCirModel final : public CreditModel {
public:
    TimeChangedCirModel(CirParams params, JumpParams jumps, SurvivalCurve curve, double max_clock_step = 0.01);

    std::string name() const override { return "tc-cir"; }
    std::string describe() const override;
    const SurvivalCurve& curve() const override { return clock_.curve(); }
    std::unique_ptr<CreditPlan> plan(const TimeGrid& grid) const override;
    std::unique_ptr<CurvePlan> curve_plan(double t, std::span<const double> maturities) const override;

    const ClockFunction& clock() const { return clock_; }

private:
    ClockFunction clock_;
    double max_clock_step_;
};

}  // namespace phicredit
