#include "phicredit/affine.hpp"

#include <sstream>

#include "phicredit/errors.hpp"
#include "phicredit/math.hpp"

namespace phicredit {

void validate(const CirParams& p) {
    if (!(p.kappa >= 0.0 && p.beta >= 0.0 && p.delta >= 0.0 && p.x0 >= 0.0)) {
        throw ValidationError("CIR parameters must be non-negative");
    }
}

void validate(const JumpParams& j) {
    if (!(j.omega >= 0.0)) throw ValidationError("jump intensity must be non-negative");
    if (!(j.alpha > 0.0)) throw ValidationError("jump size parameter alpha must be positive");
}

AffineBond::AffineBond(CirParams params, JumpParams jumps) : params_(params), jumps_(jumps) {
    validate(params_);
    validate(jumps_);
    h_ = std::sqrt(params_.kappa * params_.kappa + 2.0 * params_.delta * params_.delta);
    if (jumps_.omega > 0.0 && h_ > 0.0) {
        const double mu = 1.0 / jumps_.alpha;
        const double d = h_ - params_.kappa - 2.0 * mu;
        if (std::abs(d) <= 1e-12 * (h_ + params_.kappa + 2.0 * mu)) {
            throw DomainError("jump-CIR bond: parameters hit the pole delta^2 = 2 kappa mu + 2 mu^2");
        }
    }
}

double AffineBond::b(double tau) const {
    if (h_ == 0.0) return tau;
    const double e = std::expm1(h_ * tau);
    return 2.0 * e / (2.0 * h_ + (params_.kappa + h_) * e);
}

double AffineBond::cir_log_a(double tau) const {
    const double k = params_.kappa;
    const double kb = k * params_.beta;
    if (kb == 0.0 || tau == 0.0) return 0.0;
    const double d2 = params_.delta * params_.delta;
    if (d2 > 1e-4 * k * k) {
        const double e = std::expm1(h_ * tau);
        return 2.0 * kb / d2 * (0.5 * (k + h_) * tau - std::log1p((k + h_) * e / (2.0 * h_)));
    }
    // Near-deterministic factor: integrate the Riccati equation (ln A)' = -kappa beta B.
    return -kb * integrate([this](double s) { return b(s); }, 0.0, tau, 8);
}

double AffineBond::jump_log_adjustment(double tau) const {
    if (jumps_.omega == 0.0 || tau == 0.0) return 0.0;
    const double mu = 1.0 / jumps_.alpha;
    if (h_ == 0.0) return -jumps_.omega * (tau - std::log1p(mu * tau) / mu);
    const double c = params_.kappa + h_ + 2.0 * mu;
    const double d = h_ - params_.kappa - 2.0 * mu;
    const double e = std::expm1(h_ * tau);
    return -2.0 * jumps_.omega * mu / d * (2.0 / c * std::log1p(c * e / (2.0 * h_)) - tau);
}

double AffineBond::log_a(double tau) const { return cir_log_a(tau) + jump_log_adjustment(tau); }

double AffineBond::forward_intensity(double T) const {
    const double bb = b(T);
    const double db = 1.0 - params_.kappa * bb - 0.5 * params_.delta * params_.delta * bb * bb;
    double f = params_.kappa * params_.beta * bb + params_.x0 * db;
    if (jumps_.omega > 0.0) {
        const double mu_b = bb / jumps_.alpha;
        f += jumps_.omega * mu_b / (1.0 + mu_b);
    }
    return f;
}

double cir_bond(const CirParams& params, double t, double T, double z) {
    return jcir_bond(params, {}, t, T, z);
}

double jcir_bond(const CirParams& params, const JumpParams& jumps, double t, double T, double z) {
    if (t > T) throw DomainError("affine bond: valuation time after maturity");
    if (!(z >= 0.0)) throw DomainError("affine bond: state must be non-negative");
    if (t == T) return 1.0;
    return AffineBond(params, jumps).price(T - t, z);
}

double inverse_bond(const AffineBond& bond, double p, double t_max) {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("inverse_bond: p must lie in (0, 1]");
    if (p == 1.0) return 0.0;
    double lo = 0.0;
    double hi = 1.0;
    while (bond(hi) > p) {
        lo = hi;
        if (hi >= t_max) {
            std::ostringstream msg;
            msg << "inverse_bond: p=" << p << " is below P^x(" << t_max << ")=" << bond(t_max);
            throw DomainError(msg.str());
        }
        hi = std::min(2.0 * hi, t_max);
    }
    return bisect([&](double t) { return bond(t) - p; }, lo, hi, 1e-13);
}

double inverse_bond(const CirParams& params, const JumpParams& jumps, double p, double t_max) {
    return inverse_bond(AffineBond(params, jumps), p, t_max);
}

}  // namespace phicredit
