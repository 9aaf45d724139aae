#include "phicredit/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "phicredit/engine.hpp"
#include "phicredit/errors.hpp"
#include "phicredit/math.hpp"

namespace phicredit {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kClamp = 1e-15;

double default_time_from_curve(const SurvivalCurve& curve, double x) {
    const double p = norm_cdf(-x);
    if (p >= 1.0) return 0.0;
    if (p <= 0.0) return kInf;
    return curve.inverse(p);
}

}  // namespace

Volatility::Volatility(double eta) : Volatility(std::vector<double>{0.0}, std::vector<double>{eta}) {}

Volatility::Volatility(std::vector<double> starts, std::vector<double> values)
    : starts_(std::move(starts)), values_(std::move(values)) {
    if (starts_.empty() || starts_.size() != values_.size()) {
        throw ValidationError("volatility: need one value per segment start");
    }
    if (starts_.front() != 0.0) throw ValidationError("volatility: first segment must start at 0");
    for (std::size_t i = 0; i < values_.size(); ++i) {
        if (!(values_[i] >= 0.0) || !std::isfinite(values_[i])) {
            throw ValidationError("volatility: values must be finite and non-negative");
        }
        if (i > 0 && !(starts_[i] > starts_[i - 1])) {
            throw ValidationError("volatility: segment starts must increase");
        }
    }
    cumulative_.resize(starts_.size(), 0.0);
    for (std::size_t i = 1; i < starts_.size(); ++i) {
        cumulative_[i] = cumulative_[i - 1] + values_[i - 1] * values_[i - 1] * (starts_[i] - starts_[i - 1]);
    }
}

double Volatility::operator()(double t) const {
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const auto i = static_cast<std::size_t>(std::max<std::ptrdiff_t>(0, it - starts_.begin() - 1));
    return values_[i];
}

double Volatility::integrated_variance(double t) const {
    if (t <= 0.0) return 0.0;
    const auto it = std::upper_bound(starts_.begin(), starts_.end(), t);
    const auto i = static_cast<std::size_t>(it - starts_.begin() - 1);
    return cumulative_[i] + values_[i] * values_[i] * (t - starts_[i]);
}

bool Volatility::strictly_positive() const {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v > 0.0; });
}

PhiModel::PhiModel(SurvivalCurve curve, Volatility eta, bool) : curve_(std::move(curve)), eta_(std::move(eta)) {}

PhiModel::PhiModel(SurvivalCurve curve, Volatility eta) : PhiModel(std::move(curve), std::move(eta), true) {
    if (!eta_.strictly_positive()) {
        throw ValidationError("phi model: eta must be positive on every segment");
    }
}

PhiModel PhiModel::degenerate(SurvivalCurve curve) { return PhiModel(std::move(curve), Volatility(0.0), true); }

double PhiModel::g_quantile(double t) const { return norm_inv(curve_.survival(t)); }

double PhiModel::z_initial(double T) const {
    const double g = curve_.survival(T);
    if (g <= 0.0 || g >= 1.0) {
        std::ostringstream msg;
        msg << "z_initial: G(" << T << ") = " << g << " has an infinite quantile";
        throw DomainError(msg.str());
    }
    return norm_inv(g);
}

double PhiModel::varsigma(double t) const { return std::exp(-0.5 * eta_.integrated_variance(t)); }

double PhiModel::z_from_state(double m, double t) const { return (g_quantile(t) + m) / varsigma(t); }

double PhiModel::state_from_z(double z, double t) const { return varsigma(t) * z - g_quantile(t); }

PhiNode PhiModel::node(double t) const {
    const double g = curve_.survival(t);
    return {t, g, norm_inv(g), varsigma(t), curve_.hazard(t)};
}

double PhiModel::state_increment_sd(double t, double dt) const {
    const double i0 = eta_.integrated_variance(t);
    const double di = eta_.integrated_variance(t + dt) - i0;
    return std::exp(-0.5 * i0) * std::sqrt(-std::expm1(-di));
}

double PhiModel::exact_step_z(double z, double t, double dt, double y) const {
    const double g0 = g_quantile(t);
    if (!std::isfinite(z) || !std::isfinite(g0)) {
        // G(t) == 1: the only reachable state is m = 0
        return z_from_state(advance_state(0.0, t, dt, y), t + dt);
    }
    const double i1 = eta_.integrated_variance(t + dt);
    const double di = i1 - eta_.integrated_variance(t);
    return z * std::exp(0.5 * di) + (g_quantile(t + dt) - g0) * std::exp(0.5 * i1) +
           std::sqrt(std::expm1(di)) * y;
}

double PhiModel::exact_step(double s, double t, double dt, double y) const {
    return norm_cdf(exact_step_z(norm_inv(s), t, dt, y));
}

ConditionalSurvival PhiModel::conditional_curve(double s, double t, double T) const {
    if (t > T) throw DomainError("conditional_curve: t > T");
    if (T == t) return {s, 1.0};
    const double gt = g_quantile(t);
    const double gT = g_quantile(T);
    double survival;
    if (std::isfinite(gt)) {
        survival = norm_cdf(norm_inv(s) + (gT - gt) * std::exp(0.5 * eta_.integrated_variance(t)));
    } else {
        survival = survival_from_state(0.0, t, T);
    }
    return {survival, survival / s};
}

double PhiModel::survival_from_state(double m, double t, double T) const {
    return norm_cdf((g_quantile(T) + m) / varsigma(t));
}

double PhiModel::lambda_s_from_z(double z, double t, double hazard) const {
    return node(t).lambda_s(z, hazard);
}

IntensityProduct PhiModel::intensity_product(double s, double t) const {
    const double z = norm_inv(std::clamp(s, kClamp, 1.0 - kClamp));
    return {lambda_s_from_z(z, t, curve_.hazard(t)), eta_(t) * norm_pdf(z)};
}

double dgc_norm_squared(const Volatility& eta) {
    constexpr double kCut = 60.0;
    const auto starts = eta.starts();
    const auto values = eta.values();
    double total = 0.0;
    auto f2 = [&](double s) {
        const double v = eta(s);
        return v * v * std::exp(-eta.integrated_variance(s));
    };
    for (std::size_t i = 0; i < starts.size(); ++i) {
        const double a = starts[i];
        const double ia = eta.integrated_variance(a);
        if (ia >= kCut) break;
        const double v2 = values[i] * values[i];
        double b;
        if (i + 1 < starts.size()) {
            b = starts[i + 1];
        } else if (v2 > 0.0) {
            b = a + (kCut - ia) / v2;
        } else {
            break;
        }
        if (v2 == 0.0) continue;
        const double span = v2 * (b - a);
        const int panels = std::max(4, static_cast<int>(std::ceil(span / 0.25)));
        total += integrate(f2, a, b, panels);
    }
    return total;
}

DgcSpec::DgcSpec(const PhiModel& model) : model_(&model), norm_squared_(dgc_norm_squared(model.eta())) {
    if (std::abs(norm_squared_ - 1.0) > 1e-10) {
        std::ostringstream msg;
        msg << "dgc: int f^2 = " << norm_squared_ << ", expected 1";
        throw ValidationError(msg.str());
    }
}

double DgcSpec::ell(double u) const { return -model_->g_quantile(u); }

double DgcSpec::f(double s) const { return model_->eta()(s) * model_->varsigma(s); }

double dgc_default_time(const DgcSpec& spec, double x) {
    return default_time_from_curve(spec.model().curve(), x);
}

ConicMapping ConicMapping::gaussian() {
    return {"gaussian", [](double z) { return norm_cdf(z); }, [](double p) { return norm_inv(p); },
            [](double z) { return z; }};
}

ConicMapping ConicMapping::logistic() {
    return {"logistic", [](double z) { return 1.0 / (1.0 + std::exp(-z)); },
            [](double p) { return std::log(p / (1.0 - p)); }, [](double z) { return std::tanh(0.5 * z); }};
}

GenericConicModel::GenericConicModel(ConicMapping mapping, Volatility eta, SurvivalCurve curve)
    : mapping_(std::move(mapping)), eta_(std::move(eta)), curve_(std::move(curve)) {
    constexpr double kStep = 0.01;
    double prev_f = mapping_.cdf(-8.0);
    double prev_psi = mapping_.psi(-8.0);
    double max_slope = 0.0;
    for (int k = 1; k <= 1600; ++k) {
        const double z = -8.0 + k * kStep;
        const double f = mapping_.cdf(z);
        const double psi = mapping_.psi(z);
        // double precision saturates in the far tails; only there may F be flat
        const bool tail = f < 1e-12 || f > 1.0 - 1e-12;
        if (!(f >= prev_f) || (!tail && !(f > prev_f)) || !(f > 0.0) || !(f < 1.0)) {
            throw ValidationError("conic mapping '" + mapping_.name + "' is not increasing into (0, 1)");
        }
        if (!std::isfinite(psi)) throw ValidationError("conic mapping '" + mapping_.name + "': non-finite score");
        max_slope = std::max(max_slope, std::abs(psi - prev_psi) / kStep);
        prev_f = f;
        prev_psi = psi;
    }
    if (max_slope > 1e4) {
        throw ValidationError("conic mapping '" + mapping_.name + "': score is not Lipschitz on [-8, 8]");
    }
}

double GenericConicModel::z_initial(double T) const {
    const double g = curve_.survival(T);
    if (g <= 0.0 || g >= 1.0) throw DomainError("z_initial: G(T) must lie in (0, 1)");
    return mapping_.inverse(g);
}

double GenericConicModel::drift(double t, double z) const {
    const double v = eta_(t);
    return 0.5 * v * v * mapping_.psi(z);
}

double generic_conic_step(const GenericConicModel& model, double z, double t, double dt, double y) {
    const double a = model.drift(t, z);
    const double next = z + a * dt + model.eta()(t) * std::sqrt(dt) * y;
    if (!std::isfinite(a) || !std::isfinite(next)) {
        std::ostringstream msg;
        msg << "generic_conic_step: non-finite state (mapping=" << model.mapping().name << ", Z=" << z
            << ", t=" << t << ", dt=" << dt << ", y=" << y << ", drift=" << a << ')';
        throw NumericError(msg.str());
    }
    return next;
}

LemmaReport lemma_diagnostic(const PhiModel& model, const LemmaConfig& config) {
    if (config.paths == 0 || !(config.dt > 0.0) || !(config.horizon > 0.0)) {
        throw ValidationError("lemma_diagnostic: need paths > 0, dt > 0, horizon > 0");
    }
    for (double t : config.eval_times) {
        if (!(t > 0.0) || t > config.horizon) {
            throw ValidationError("lemma_diagnostic: evaluation times must lie in (0, horizon]");
        }
    }
    const TimeGrid grid(0.0, config.horizon, config.dt, config.eval_times);
    const std::size_t n_eval = config.eval_times.size();
    std::vector<std::pair<std::size_t, std::size_t>> eval_order;  // (grid index, eval slot)
    for (std::size_t k = 0; k < n_eval; ++k) eval_order.emplace_back(grid.index_of(config.eval_times[k]), k);
    std::sort(eval_order.begin(), eval_order.end());

    const SurvivalCurve& curve = model.curve();
    std::vector<PhiNode> nodes;
    std::vector<double> sd;
    for (std::size_t i = 0; i < grid.size(); ++i) {
        nodes.push_back(model.node(grid[i]));
        if (i + 1 < grid.size()) sd.push_back(model.state_increment_sd(grid[i], grid[i + 1] - grid[i]));
    }
    const double z_lo = norm_inv(kClamp);
    const double z_hi = norm_inv(1.0 - kClamp);
    auto lambda_at = [&](const PhiNode& node, double z) {
        const double zc = std::clamp(z, z_lo, z_hi);
        return node.lambda_s(zc, node.hazard) / norm_cdf(zc);
    };

    auto kernel = [&](const PathStream& stream, std::span<double> out) {
        const double threshold = -std::log(stream.uniforms(0, channel::kThreshold, 0)[0]);
        const double xi = stream.normals(0, channel::kThreshold, 1)[0];
        const CorrelationSpec independent(0.0);
        double m = 0.0;
        double cumulative = 0.0;
        double lambda_prev = lambda_at(nodes[0], kInf);
        std::size_t next_eval = 0;
        std::vector<double> cox_alive(n_eval, 1.0);
        for (std::size_t i = 0; i + 1 < grid.size(); ++i) {
            const double y = draw_pair(stream, static_cast<std::uint32_t>(i), independent).second;
            m += sd[i] * y;
            const double lambda = lambda_at(nodes[i + 1], nodes[i + 1].z(m));
            cumulative += 0.5 * (lambda_prev + lambda) * (grid[i + 1] - grid[i]);
            lambda_prev = lambda;
            while (next_eval < n_eval && eval_order[next_eval].first == i + 1) {
                cox_alive[eval_order[next_eval].second] = cumulative < threshold ? 1.0 : 0.0;
                ++next_eval;
            }
        }
        const double x = m + model.varsigma(config.horizon) * xi;
        const double tau = default_time_from_curve(curve, x);
        for (std::size_t k = 0; k < n_eval; ++k) {
            out[2 * k] = tau > config.eval_times[k] ? 1.0 : 0.0;
            out[2 * k + 1] = cox_alive[k];
        }
    };

    RunOptions options;
    options.workers = config.workers;
    const auto est = run_paths(config.paths, 2 * n_eval, config.seed, kernel, options);

    LemmaReport report;
    const double n = static_cast<double>(config.paths);
    for (std::size_t k = 0; k < n_eval; ++k) {
        const double t = config.eval_times[k];
        const double g = curve.survival(t);
        LemmaRow row{t, g, est[2 * k].mean(), est[2 * k + 1].mean(), std::sqrt(g * (1.0 - g) / n)};
        report.sup_tau_vs_g = std::max(report.sup_tau_vs_g, std::abs(row.survival_tau - g));
        report.sup_cox_vs_g = std::max(report.sup_cox_vs_g, std::abs(row.survival_cox - g));
        report.sup_tau_vs_cox = std::max(report.sup_tau_vs_cox, std::abs(row.survival_tau - row.survival_cox));
        if (row.noise_band > 0.0) {
            report.max_cox_excess = std::max(report.max_cox_excess, std::abs(row.survival_cox - g) / row.noise_band);
            report.max_tau_excess = std::max(report.max_tau_excess, std::abs(row.survival_tau - g) / row.noise_band);
        }
        report.rows.push_back(row);
    }
    return report;
}

}  // namespace phicredit
