#include "phicredit/rates.hpp"

#include <cmath>

#include "phicredit/errors.hpp"

namespace phicredit {

namespace {

void check(const VasicekParams& p) {
    if (!(p.gamma > 0.0)) throw ValidationError("Vasicek: gamma must be positive");
    if (!(p.sigma >= 0.0)) throw ValidationError("Vasicek: sigma must be non-negative");
}

}  // namespace

double step_rate(const VasicekParams& p, double r, double dt, double z) {
    const double decay = std::exp(-p.gamma * dt);
    const double variance = p.sigma * p.sigma * -std::expm1(-2.0 * p.gamma * dt) / (2.0 * p.gamma);
    return r * decay + p.theta * (1.0 - decay) + std::sqrt(variance) * z;
}

double forward_rate(double p_prev, double p_next, double delta) {
    if (!(p_next > 0.0) || !(delta > 0.0)) throw DomainError("forward_rate: need P_next > 0, delta > 0");
    return (p_prev - p_next) / (p_next * delta);
}

VasicekModel::VasicekModel(VasicekParams params) : params_(params) { check(params_); }

VasicekModel::VasicekModel(VasicekParams params, DiscountCurve market)
    : params_(params), market_(std::move(market)) {
    check(params_);
}

double VasicekModel::b_factor(double tau) const {
    return -std::expm1(-params_.gamma * tau) / params_.gamma;
}

double VasicekModel::log_a_factor(double tau) const {
    const double g = params_.gamma;
    const double s2 = params_.sigma * params_.sigma;
    const double b = b_factor(tau);
    return (params_.theta - s2 / (2.0 * g * g)) * (b - tau) - s2 * b * b / (4.0 * g);
}

double VasicekModel::log_plain_zcb0(double T) const {
    return log_a_factor(T) - b_factor(T) * params_.r0;
}

double VasicekModel::shift(double t) const {
    if (!market_) return 0.0;
    const double g = params_.gamma;
    const double e = std::exp(-g * t);
    const double s2 = params_.sigma * params_.sigma;
    const double model_forward = params_.theta + (params_.r0 - params_.theta) * e -
                                 s2 / (2.0 * g * g) * (1.0 - e) * (1.0 - e);
    return market_->forward(t) - model_forward;
}

AffineZcb VasicekModel::zcb_coefficients(double t, double T) const {
    if (t > T) throw DomainError("zcb: valuation time after maturity");
    const double tau = T - t;
    const double b = b_factor(tau);
    double log_a = log_a_factor(tau);
    if (market_) {
        // P_t(T) = [P^M(T) P^y(0,t)] / [P^M(t) P^y(0,T)] * A(tau) exp(-B(tau) (r_t - psi(t)))
        log_a += std::log(market_->discount(T) / market_->discount(t)) + log_plain_zcb0(t) -
                 log_plain_zcb0(T) + b * shift(t);
    }
    return {log_a, b};
}

double VasicekModel::zcb(double t, double r_t, double T) const {
    if (t == T) return 1.0;
    return zcb_coefficients(t, T).price(r_t);
}

double VasicekModel::step(double t, double r_t, double dt, double z) const {
    const double y = r_t - shift(t);
    return step_rate(params_, y, dt, z) + shift(t + dt);
}

}  // namespace phicredit
