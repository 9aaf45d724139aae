#include "phicredit/credit.hpp"

#include <cmath>
#include <sstream>

#include "phicredit/errors.hpp"
#include "phicredit/math.hpp"

namespace phicredit {

namespace {

// Uniform draws for jump counts and sizes within one grid interval.
class JumpUniforms {
public:
    JumpUniforms(const PathStream& stream, std::size_t interval)
        : stream_(stream), step_(static_cast<std::uint32_t>(interval)) {}

    double operator()() {
        if (index_ % 2 == 0) pair_ = stream_.uniforms(step_, channel::kJumps, index_ / 2);
        return pair_[index_++ % 2];
    }

private:
    const PathStream& stream_;
    std::uint32_t step_;
    std::uint32_t index_ = 0;
    std::array<double, 2> pair_{};
};

std::vector<double> interval_hazards(const SurvivalCurve& curve, const TimeGrid& grid) {
    std::vector<double> h;
    h.reserve(grid.size());
    for (std::size_t i = 0; i + 1 < grid.size(); ++i) h.push_back(curve.hazard(0.5 * (grid[i] + grid[i + 1])));
    return h;
}

class PhiPlan final : public CreditPlan {
public:
    PhiPlan(const PhiModel& model, const TimeGrid& grid) : hazard_(interval_hazards(model.curve(), grid)) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            nodes_.push_back(model.node(grid[i]));
            if (i + 1 < grid.size()) sd_.push_back(model.state_increment_sd(grid[i], grid[i + 1] - grid[i]));
        }
    }

    CreditState initial() const override { return {}; }
    // A positive credit shock lowers m, so it raises default risk as in the affine models.
    void advance(std::size_t i, CreditState& s, double z, const PathStream&) const override { s.factor -= sd_[i] * z; }
    double lambda_s(std::size_t node, std::size_t interval, const CreditState& s) const override {
        const PhiNode& n = nodes_[node];
        return n.lambda_s(n.z(s.factor), hazard_[interval]);
    }
    double survival(std::size_t node, const CreditState& s) const override {
        return norm_cdf(nodes_[node].z(s.factor));
    }

private:
    std::vector<PhiNode> nodes_;
    std::vector<double> sd_;
    std::vector<double> hazard_;
};

class PhiCurvePlan final : public CurvePlan {
public:
    PhiCurvePlan(const PhiModel& model, double t, std::span<const double> maturities)
        : quantile_t_(model.g_quantile(t)), varsigma_(model.varsigma(t)) {
        for (double u : maturities) {
            if (u < t) throw DomainError("conditional curve: maturity before valuation time");
            quantile_u_.push_back(model.g_quantile(u));
        }
    }

    void qbar(const CreditState& s, std::span<double> out) const override {
        const double survival = norm_cdf((quantile_t_ + s.factor) / varsigma_);
        for (std::size_t k = 0; k < quantile_u_.size(); ++k) {
            out[k] = norm_cdf((quantile_u_[k] + s.factor) / varsigma_) / survival;
        }
    }

private:
    double quantile_t_;
    double varsigma_;
    std::vector<double> quantile_u_;
};

// Exponential-affine curve exp(c_k - b_k x).
class AffineCurvePlan final : public CurvePlan {
public:
    AffineCurvePlan(std::vector<double> c, std::vector<double> b) : c_(std::move(c)), b_(std::move(b)) {}

    void qbar(const CreditState& s, std::span<double> out) const override {
        const double x = observed(s.factor);
        for (std::size_t k = 0; k < c_.size(); ++k) out[k] = std::exp(c_[k] - b_[k] * x);
    }

private:
    std::vector<double> c_;
    std::vector<double> b_;
};

class ShiftedPlan final : public CreditPlan {
public:
    ShiftedPlan(const ShiftFunction& shift, const TimeGrid& grid)
        : params_(shift.bond().params()), jumps_(shift.bond().jumps()), hazard_(interval_hazards(shift.curve(), grid)) {
        for (std::size_t i = 0; i < grid.size(); ++i) {
            forward_.push_back(shift.bond().forward_intensity(grid[i]));
            if (i + 1 < grid.size()) {
                dt_.push_back(grid[i + 1] - grid[i]);
                shift_integral_.push_back(shift.integral(grid[i + 1]) - shift.integral(grid[i]));
            }
        }
    }

    CreditState initial() const override { return {params_.x0, 0.0}; }
    void advance(std::size_t i, CreditState& s, double z, const PathStream& stream) const override {
        JumpUniforms uniforms(stream, i);
        const double next = step_jcir(params_, jumps_, s.factor, dt_[i], z, uniforms);
        s.integrated += 0.5 * (observed(s.factor) + observed(next)) * dt_[i] + shift_integral_[i];
        s.factor = next;
    }
    double lambda_s(std::size_t node, std::size_t interval, const CreditState& s) const override {
        return (observed(s.factor) + hazard_[interval] - forward_[node]) * std::exp(-s.integrated);
    }
    double survival(std::size_t, const CreditState& s) const override { return std::exp(-s.integrated); }

private:
    CirParams params_;
    JumpParams jumps_;
    std::vector<double> hazard_;
    std::vector<double> forward_;
    std::vector<double> dt_;
    std::vector<double> shift_integral_;
};

class ClockPlan final : public CreditPlan {
public:
    ClockPlan(const ClockFunction& clock, const TimeGrid& grid, double max_clock_step)
        : params_(clock.bond().params()), jumps_(clock.bond().jumps()), hazard_(interval_hazards(clock.curve(), grid)) {
        double prev = 0.0;
        for (std::size_t i = 0; i < grid.size(); ++i) {
            const double theta = clock(grid[i]);
            forward_.push_back(clock.bond().forward_intensity(theta));
            if (i > 0) {
                const double span = theta - prev;
                const int pieces = std::max(1, static_cast<int>(std::ceil(span / max_clock_step - 1e-9)));
                substeps_.push_back(pieces);
                clock_step_.push_back(span / pieces);
            }
            prev = theta;
        }
    }

    CreditState initial() const override { return {params_.x0, 0.0}; }
    void advance(std::size_t i, CreditState& s, double z, const PathStream& stream) const override {
        JumpUniforms uniforms(stream, i);
        const int n = substeps_[i];
        const double h = clock_step_[i];
        if (n == 1) {
            const double next = step_jcir(params_, jumps_, s.factor, h, z, uniforms);
            s.integrated += 0.5 * (observed(s.factor) + observed(next)) * h;
            s.factor = next;
            return;
        }
        // Brownian bridge split of the interval's increment into n pieces.
        thread_local std::vector<double> w;
        w.resize(static_cast<std::size_t>(n));
        double mean = 0.0;
        for (int k = 0; k < n; k += 2) {
            const auto pair = stream.normals(static_cast<std::uint32_t>(i), channel::kAux, static_cast<std::uint32_t>(k / 2));
            w[static_cast<std::size_t>(k)] = pair[0];
            if (k + 1 < n) w[static_cast<std::size_t>(k + 1)] = pair[1];
        }
        for (double v : w) mean += v;
        mean /= n;
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (int k = 0; k < n; ++k) {
            const double zk = scale * z + (w[static_cast<std::size_t>(k)] - mean);
            const double next = step_jcir(params_, jumps_, s.factor, h, zk, uniforms);
            s.integrated += 0.5 * (observed(s.factor) + observed(next)) * h;
            s.factor = next;
        }
    }
    double lambda_s(std::size_t node, std::size_t interval, const CreditState& s) const override {
        const double f = forward_[node];
        const double lambda = f > 0.0 ? hazard_[interval] / f * observed(s.factor) : hazard_[interval];
        return lambda * std::exp(-s.integrated);
    }
    double survival(std::size_t, const CreditState& s) const override { return std::exp(-s.integrated); }

private:
    CirParams params_;
    JumpParams jumps_;
    std::vector<double> hazard_;
    std::vector<double> forward_;
    std::vector<int> substeps_;
    std::vector<double> clock_step_;
};

std::string describe_affine(const char* name, const CirParams& p, const JumpParams& j) {
    std::ostringstream out;
    out.precision(17);
    out << name << " kappa=" << p.kappa << " beta=" << p.beta << " delta=" << p.delta << " x0=" << p.x0
        << " omega=" << j.omega << " alpha=" << j.alpha;
    return out.str();
}

}  // namespace

std::string PhiCreditModel::describe() const {
    std::ostringstream out;
    out.precision(17);
    out << "phi eta=";
    const auto starts = model_.eta().starts();
    const auto values = model_.eta().values();
    for (std::size_t i = 0; i < starts.size(); ++i) out << (i ? ";" : "") << starts[i] << ':' << values[i];
    return out.str();
}

std::unique_ptr<CreditPlan> PhiCreditModel::plan(const TimeGrid& grid) const {
    return std::make_unique<PhiPlan>(model_, grid);
}

std::unique_ptr<CurvePlan> PhiCreditModel::curve_plan(double t, std::span<const double> maturities) const {
    return std::make_unique<PhiCurvePlan>(model_, t, maturities);
}

ShiftedJcirModel::ShiftedJcirModel(CirParams params, JumpParams jumps, SurvivalCurve curve)
    : shift_(AffineBond(params, jumps), std::move(curve)) {
    const double horizon = std::max(10.0, shift_.curve().last_knot());
    nonnegative_ = shift_.min_on_grid(0.01, horizon) >= -1e-10;
}

std::string ShiftedJcirModel::describe() const {
    return describe_affine("ps-jcir", shift_.bond().params(), shift_.bond().jumps());
}

std::unique_ptr<CreditPlan> ShiftedJcirModel::plan(const TimeGrid& grid) const {
    return std::make_unique<ShiftedPlan>(shift_, grid);
}

std::unique_ptr<CurvePlan> ShiftedJcirModel::curve_plan(double t, std::span<const double> maturities) const {
    const AffineBond& bond = shift_.bond();
    const SurvivalCurve& g = shift_.curve();
    std::vector<double> c, b;
    for (double u : maturities) {
        if (u < t) throw DomainError("conditional curve: maturity before valuation time");
        // G(u)/G(t) * P^x(t)/P^x(u) * P^x_t(u, x)
        c.push_back(-g.integrated_hazard(u) + g.integrated_hazard(t) + std::log(bond(t)) - std::log(bond(u)) +
                    bond.log_a(u - t));
        b.push_back(bond.b(u - t));
    }
    return std::make_unique<AffineCurvePlan>(std::move(c), std::move(b));
}

TimeChangedCirModel::TimeChangedCirModel(CirParams params, JumpParams jumps, SurvivalCurve curve,
                                         double max_clock_step)
    : clock_(AffineBond(params, jumps), std::move(curve), {}), max_clock_step_(max_clock_step) {
    if (!(max_clock_step > 0.0)) throw ValidationError("tc-cir: clock step must be positive");
}

std::string TimeChangedCirModel::describe() const {
    return describe_affine("tc-cir", clock_.bond().params(), clock_.bond().jumps());
}

std::unique_ptr<CreditPlan> TimeChangedCirModel::plan(const TimeGrid& grid) const {
    return std::make_unique<ClockPlan>(clock_, grid, max_clock_step_);
}

std::unique_ptr<CurvePlan> TimeChangedCirModel::curve_plan(double t, std::span<const double> maturities) const {
    const AffineBond& bond = clock_.bond();
    const double theta_t = clock_(t);
    std::vector<double> c, b;
    for (double u : maturities) {
        if (u < t) throw DomainError("conditional curve: maturity before valuation time");
        const double span = clock_(u) - theta_t;
        c.push_back(bond.log_a(span));
        b.push_back(bond.b(span));
    }
    return std::make_unique<AffineCurvePlan>(std::move(c), std::move(b));
}

}  // namespace phicredit
