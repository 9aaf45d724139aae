#pragma once

#include <cmath>
#include <optional>

#include "phicredit/curves.hpp"

namespace phicredit {

/// Vasicek dynamics dr = gamma (theta - r) dt + sigma dW.
struct VasicekParams {
    double gamma = 0.4;
    double theta = 0.026;
    double sigma = 0.14;
    double r0 = 0.0165;
};

/// Exact Ornstein-Uhlenbeck transition over dt for a standard normal draw z.
double step_rate(const VasicekParams& params, double r, double dt, double z);

/// Simple forward rate (P_prev - P_next) / (P_next delta).
double forward_rate(double p_prev, double p_next, double delta);

/// Zero-coupon bond in log-affine form: P_t(T) = exp(log_a - b r_t).
struct AffineZcb {
    double log_a;
    double b;
    double price(double r) const { return std::exp(log_a - b * r); }
};

/// Vasicek short rate, optionally with a deterministic shift r = y + psi(t)
/// chosen so that time-0 bond prices reproduce a market discount curve.
class VasicekModel {
public:
    explicit VasicekModel(VasicekParams params);
    VasicekModel(VasicekParams params, DiscountCurve market);

    const VasicekParams& params() const { return params_; }
    bool shifted() const { return market_.has_value(); }

    /// Deterministic shift psi(t); zero for the plain model.
    double shift(double t) const;

    double zcb(double t, double r_t, double T) const;
    AffineZcb zcb_coefficients(double t, double T) const;

    /// Exact step of the short rate from t to t + dt.
    double step(double t, double r_t, double dt, double z) const;

private:
    double b_factor(double tau) const;
    double log_a_factor(double tau) const;
    double log_plain_zcb0(double T) const;

    VasicekParams params_;
    std::optional<DiscountCurve> market_;
};

}  // namespace phicredit
