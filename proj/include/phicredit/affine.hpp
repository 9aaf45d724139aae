#pragma once

#include <cmath>

namespace phicredit {

/// CIR factor dx = kappa (beta - x) dt + delta sqrt(x) dB.
struct CirParams {
    double kappa = 0.0;
    double beta = 0.0;
    double delta = 0.0;
    double x0 = 0.0;

    /// 2 kappa beta >= delta^2; reported, never enforced.
    bool feller_satisfied() const { return 2.0 * kappa * beta >= delta * delta; }
};

/// Compound Poisson jumps with intensity omega and Exp(alpha) sizes (mean 1/alpha).
struct JumpParams {
    double omega = 0.0;
    double alpha = 1.0;
};

void validate(const CirParams& params);
void validate(const JumpParams& jumps);

/// Exponential-affine survival bond of the (jump-)CIR factor,
/// P_t(T, z) = A(T - t) exp(-B(T - t) z). Time-homogeneous, so everything is
/// expressed through tau = T - t.
class AffineBond {
public:
    explicit AffineBond(CirParams params, JumpParams jumps = {});

    const CirParams& params() const { return params_; }
    const JumpParams& jumps() const { return jumps_; }

    double b(double tau) const;
    /// ln A(tau), including the jump adjustment.
    double log_a(double tau) const;
    double price(double tau, double z) const { return std::exp(log_a(tau) - b(tau) * z); }

    /// P^x(T) = P_0(T, x0).
    double operator()(double T) const { return price(T, params_.x0); }
    /// -d/dT ln P^x(T): the forward intensity implied by the factor alone.
    double forward_intensity(double T) const;

private:
    double cir_log_a(double tau) const;
    double jump_log_adjustment(double tau) const;

    CirParams params_;
    JumpParams jumps_;
    double h_;
};

double cir_bond(const CirParams& params, double t, double T, double z);
double jcir_bond(const CirParams& params, const JumpParams& jumps, double t, double T, double z);

/// Q^x(p): the T with P^x(T) = p. Grows the bracket from [0, 1] by doubling up
/// to t_max; throws DomainError when p is outside (0, 1] or unreachable.
double inverse_bond(const AffineBond& bond, double p, double t_max = 200.0);
double inverse_bond(const CirParams& params, const JumpParams& jumps, double p,
                    double t_max = 200.0);

/// One full-truncation Euler step of the jump-CIR factor. The returned value is
/// the auxiliary Euler state, which may dip below zero; the factor itself is
/// its positive part (see `observed`). The jump count is Poisson(omega dt)
/// drawn by inversion from `next_uniform()`, sizes are Exp(alpha). Uniforms
/// are consumed only when omega > 0.
template <class UniformSource>
double step_jcir(const CirParams& p, const JumpParams& j, double x, double dt, double z,
                 UniformSource&& next_uniform) {
    const double xp = x > 0.0 ? x : 0.0;
    double next = x + p.kappa * (p.beta - xp) * dt + p.delta * std::sqrt(xp * dt) * z;
    if (j.omega > 0.0) {
        const double mean = j.omega * dt;
        double u = next_uniform();
        double prob = std::exp(-mean);
        double cumulative = prob;
        int count = 0;
        while (u > cumulative && count < 64) {
            ++count;
            prob *= mean / count;
            cumulative += prob;
        }
        for (int k = 0; k < count; ++k) next += -std::log(next_uniform()) / j.alpha;
    }
    return next;
}

/// The factor value x+ carried by a full-truncation state.
inline double observed(double state) { return state > 0.0 ? state : 0.0; }

}  // namespace phicredit
