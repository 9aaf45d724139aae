#pragma once

#include <cmath>
#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <vector>

#include "phicredit/curves.hpp"

namespace phicredit {

/// Piecewise-constant volatility eta(t): value i applies from starts[i]
/// (starts[0] == 0) up to starts[i+1]; the last value runs forever.
class Volatility {
public:
    Volatility(double eta = 0.0);  // NOLINT: a scalar is the common case
    Volatility(std::vector<double> starts, std::vector<double> values);

    double operator()(double t) const;
    /// I(t) = int_0^t eta^2.
    double integrated_variance(double t) const;
    double terminal() const { return values_.back(); }
    bool strictly_positive() const;

    std::span<const double> starts() const { return starts_; }
    std::span<const double> values() const { return values_; }

private:
    std::vector<double> starts_;
    std::vector<double> values_;
    std::vector<double> cumulative_;  // I(starts_[i])
};

struct ConditionalSurvival {
    double survival;  // S_t(T)
    double qbar;      // S_t(T) / S_t
};

/// Deterministic quantities of a PhiModel at a fixed time, for tight loops.
struct PhiNode {
    double t;
    double g;         // G(t)
    double quantile;  // Phi^{-1}(G(t)), +inf while G(t) == 1
    double varsigma;  // e^{-I(t)/2}
    double hazard;    // h(t)

    double z(double m) const { return (quantile + m) / varsigma; }
    /// lambda_t S_t at Z_t = z, with `hazard` in place of h(t).
    double lambda_s(double z, double hazard_value) const {
        if (hazard_value == 0.0) return 0.0;
        if (!std::isfinite(quantile)) return hazard_value * g / varsigma;  // t = 0 limit
        return std::exp(-0.5 * (z - quantile) * (z + quantile)) * hazard_value * g / varsigma;
    }
};

struct IntensityProduct {
    double lambda_s;  // lambda_t S_t
    double sigma;     // diffusion coefficient of S_t
};

/// Phi-martingale survival model: S_t(T) = Phi(Z_{t,T}) with
/// dZ_{t,T} = eta^2 Z/2 dt + eta dB and Z_{0,T} = Phi^{-1}(G(T)).
///
/// Path state is m_t = int_0^t eta e^{-I/2} dB, which is finite from t = 0 on;
/// Z_{t,T} = (Phi^{-1}(G(T)) + m_t) / vs(t) with vs(t) = e^{-I(t)/2}.
class PhiModel {
public:
    /// Requires eta > 0 on every segment, so that int eta^2 diverges.
    PhiModel(SurvivalCurve curve, Volatility eta);
    /// eta == 0: S_t = G(t) deterministically.
    static PhiModel degenerate(SurvivalCurve curve);

    const SurvivalCurve& curve() const { return curve_; }
    const Volatility& eta() const { return eta_; }

    /// Phi^{-1}(G(t)); +inf while G(t) == 1.
    double g_quantile(double t) const;
    /// Z_{0,T}; throws DomainError when G(T) is 0 or 1.
    double z_initial(double T) const;
    double varsigma(double t) const;

    /// Z_t = Z_{t,t} from the path state.
    double z_from_state(double m, double t) const;
    double state_from_z(double z, double t) const;

    PhiNode node(double t) const;

    /// Standard deviation of the increment of m over [t, t + dt].
    double state_increment_sd(double t, double dt) const;
    /// Exact transition of m over [t, t + dt] for a standard normal y.
    double advance_state(double m, double t, double dt, double y) const {
        return m + state_increment_sd(t, dt) * y;
    }
    /// Exact transition of Z_t. Uses the recursion on Z when Z_t and
    /// Phi^{-1}(G(t)) are finite, the state form otherwise.
    double exact_step_z(double z, double t, double dt, double y) const;
    /// Exact transition of S_t, S_t in (0, 1).
    double exact_step(double s, double t, double dt, double y) const;

    /// S_t(T) and Qbar_t(T) from S_t.
    ConditionalSurvival conditional_curve(double s, double t, double T) const;
    /// S_t(T) from the path state m_t.
    double survival_from_state(double m, double t, double T) const;

    /// lambda_t S_t and sigma_t for a given S_t. S is clamped to
    /// [1e-15, 1 - 1e-15] before inversion.
    IntensityProduct intensity_product(double s, double t) const;
    /// lambda_t S_t from Z_t with an explicit hazard value.
    double lambda_s_from_z(double z, double t, double hazard) const;

private:
    PhiModel(SurvivalCurve curve, Volatility eta, bool);

    SurvivalCurve curve_;
    Volatility eta_;
};

/// Dynamized Gaussian copula default time tau = l^{-1}(int_0^inf f dB) with
/// l(u) = -Phi^{-1}(G(u)) and f(s) = eta(s) e^{-I(s)/2}.
class DgcSpec {
public:
    /// Throws ValidationError unless int f^2 = 1 to 1e-10.
    /// The model is referenced, not copied, and must outlive the spec.
    explicit DgcSpec(const PhiModel& model);
    explicit DgcSpec(PhiModel&&) = delete;

    double ell(double u) const;
    double f(double s) const;
    double norm_squared() const { return norm_squared_; }

    const PhiModel& model() const { return *model_; }

private:
    const PhiModel* model_;
    double norm_squared_;
};

/// G^{-1}(Phi(-x)); +inf when the curve never reaches Phi(-x).
double dgc_default_time(const DgcSpec& spec, double x);

/// int_0^inf eta^2 e^{-I} by quadrature, truncated where I exceeds 60.
double dgc_norm_squared(const Volatility& eta);

/// Increasing map F onto (0, 1) with score psi = -F''/F'.
struct ConicMapping {
    std::string name;
    std::function<double(double)> cdf;
    std::function<double(double)> inverse;
    std::function<double(double)> psi;

    static ConicMapping gaussian();
    static ConicMapping logistic();
};

/// Conic martingale S_t(T) = F(Z_{t,T}) with drift a(t, z) = eta^2 psi(z) / 2.
class GenericConicModel {
public:
    /// Checks F increasing into (0, 1) and psi Lipschitz on [-8, 8].
    GenericConicModel(ConicMapping mapping, Volatility eta, SurvivalCurve curve);

    const ConicMapping& mapping() const { return mapping_; }
    const Volatility& eta() const { return eta_; }
    const SurvivalCurve& curve() const { return curve_; }

    double z_initial(double T) const;
    double drift(double t, double z) const;

private:
    ConicMapping mapping_;
    Volatility eta_;
    SurvivalCurve curve_;
};

/// Euler step Z + a(t, Z) dt + eta(t) sqrt(dt) y. Throws NumericError on a
/// non-finite drift or result.
double generic_conic_step(const GenericConicModel& model, double z, double t, double dt, double y);

struct LemmaConfig {
    std::uint64_t paths = 200000;
    double dt = 0.01;
    double horizon = 5.0;
    std::vector<double> eval_times{1.0, 2.0, 3.0, 4.0, 5.0};
    std::uint64_t seed = 1;
    std::size_t workers = 1;
};

struct LemmaRow {
    double t;
    double g;
    double survival_tau;        // P(tau > t), DGC construction
    double survival_cox;        // P(tilde tau > t), Cox threshold on lambda = lambda S / S
    double noise_band;          // binomial standard error at G(t)
};

struct LemmaReport {
    std::vector<LemmaRow> rows;
    double sup_tau_vs_g = 0.0;
    double sup_cox_vs_g = 0.0;
    double sup_tau_vs_cox = 0.0;
    /// max over rows of |survival_cox - g| / noise_band.
    double max_cox_excess = 0.0;
    /// max over rows of |survival_tau - g| / noise_band.
    double max_tau_excess = 0.0;
};

/// Simulates tau (DGC) and the naive Cox time built from the pathwise
/// intensity of the same Phi-martingale and compares both with G.
LemmaReport lemma_diagnostic(const PhiModel& model, const LemmaConfig& config);

}  // namespace phicredit
