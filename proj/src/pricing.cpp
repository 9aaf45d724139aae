#include "phicredit/pricing.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <sstream>

#include "phicredit/errors.hpp"
#include "phicredit/math.hpp"

namespace phicredit {

PricingResult make_result(std::string label, const Estimator& estimator, std::uint64_t paths, std::uint64_t seed,
                          double scale) {
    return {std::move(label), scale * estimator.mean(), std::abs(scale) * estimator.standard_error(), paths, seed};
}

// ---------------------------------------------------------------------------
// Interest rate swap

std::vector<double> IrsSpec::payment_dates() const {
    if (!(end > start) || !(delta > 0.0)) throw ValidationError("swap: need end > start and delta > 0");
    const double periods = (end - start) / delta;
    const auto n = static_cast<long>(std::llround(periods));
    if (n < 1 || std::abs(periods - static_cast<double>(n)) > 1e-9) {
        throw ValidationError("swap: tenor must be a whole number of payment periods");
    }
    std::vector<double> dates;
    for (long k = 1; k < n; ++k) dates.push_back(start + static_cast<double>(k) * delta);
    dates.push_back(end);
    return dates;
}

IrsValue irs_value(const IrsSpec& spec, const VasicekModel& rates, double t, double r_t, double fixing) {
    const auto dates = spec.payment_dates();
    if (t > spec.end + 1e-12) return {0.0, true};
    auto p = [&](double T) { return rates.zcb(t, r_t, T); };
    double value;
    if (t <= spec.start) {
        value = p(spec.start) - p(spec.end);
        double prev = spec.start;
        for (double d : dates) {
            value -= spec.fixed_rate * (d - prev) * p(d);
            prev = d;
        }
    } else {
        if (std::isnan(fixing)) throw DomainError("irs_value: a fixing is required after the swap start");
        const auto it = std::lower_bound(dates.begin(), dates.end(), t - 1e-12);
        const double tj = *it;
        const double prev_date = it == dates.begin() ? spec.start : *(it - 1);
        value = (fixing - spec.fixed_rate) * (tj - prev_date) * p(tj) + p(tj) - p(spec.end);
        for (auto jt = it + 1; jt != dates.end(); ++jt) value -= spec.fixed_rate * (*jt - *(jt - 1)) * p(*jt);
    }
    return {spec.notional * value, false};
}

double par_swap_rate(const IrsSpec& spec, const VasicekModel& rates) {
    const double r0 = rates.params().r0 + rates.shift(0.0);
    double annuity = 0.0;
    double prev = spec.start;
    for (double d : spec.payment_dates()) {
        annuity += (d - prev) * rates.zcb(0.0, r0, d);
        prev = d;
    }
    return (rates.zcb(0.0, r0, spec.start) - rates.zcb(0.0, r0, spec.end)) / annuity;
}

namespace {

// Swap value along a grid as sum_k w_k exp(log_a_k - b_k r) plus the running
// period's floating term, with all bond coefficients precomputed.
class IrsExposure {
public:
    IrsExposure(const IrsSpec& spec, const VasicekModel& rates, const TimeGrid& grid) : notional_(spec.notional) {
        const auto dates = spec.payment_dates();
        nodes_.resize(grid.size());
        for (std::size_t n = 0; n < grid.size(); ++n) {
            const double t = grid[n];
            Node& node = nodes_[n];
            if (t > spec.end + 1e-12) {
                node.expired = true;
                continue;
            }
            std::map<double, double> weights;
            if (t <= spec.start) {
                weights[spec.start] += 1.0;
                weights[spec.end] -= 1.0;
                double prev = spec.start;
                for (double d : dates) {
                    weights[d] -= spec.fixed_rate * (d - prev);
                    prev = d;
                }
            } else {
                const auto it = std::lower_bound(dates.begin(), dates.end(), t - 1e-12);
                const double tj = *it;
                const double prev_date = it == dates.begin() ? spec.start : *(it - 1);
                node.floating = rates.zcb_coefficients(t, tj);
                node.accrual = tj - prev_date;
                node.has_floating = true;
                // P(t, T_j) (1 - K delta_j) - P(t, T_b) - K sum_{i>j} delta_i P(t, T_i); fixing term added per path
                weights[tj] += 1.0 - spec.fixed_rate * node.accrual;
                weights[spec.end] -= 1.0;
                for (auto jt = it + 1; jt != dates.end(); ++jt) weights[*jt] -= spec.fixed_rate * (*jt - *(jt - 1));
            }
            for (const auto& [maturity, w] : weights) {
                if (w == 0.0) continue;
                node.terms.push_back({rates.zcb_coefficients(t, maturity), w});
            }
        }
        // fixing dates: the swap start and every payment date but the last
        std::vector<double> resets{spec.start};
        resets.insert(resets.end(), dates.begin(), dates.end() - 1);
        for (std::size_t r = 0; r < resets.size(); ++r) {
            const std::size_t n = grid.index_of(resets[r]);
            nodes_[n].resets = true;
            nodes_[n].reset_bond = rates.zcb_coefficients(resets[r], dates[r]);
            nodes_[n].reset_accrual = dates[r] - resets[r];
        }
    }

    double value(std::size_t n, double r, double fixing) const {
        const Node& node = nodes_[n];
        if (node.expired) return 0.0;
        double v = 0.0;
        for (const auto& term : node.terms) v += term.weight * term.bond.price(r);
        if (node.has_floating) v += fixing * node.accrual * node.floating.price(r);
        return notional_ * v;
    }

    /// Updates the running fixing when node n is a reset date.
    void reset(std::size_t n, double r, double& fixing) const {
        const Node& node = nodes_[n];
        if (node.resets) fixing = (1.0 / node.reset_bond.price(r) - 1.0) / node.reset_accrual;
    }

private:
    struct Term {
        AffineZcb bond;
        double weight;
    };
    struct Node {
        std::vector<Term> terms;
        AffineZcb floating{0.0, 0.0};
        double accrual = 0.0;
        bool has_floating = false;
        bool expired = false;
        bool resets = false;
        AffineZcb reset_bond{0.0, 0.0};
        double reset_accrual = 0.0;
    };
    std::vector<Node> nodes_;
    double notional_;
};

// Exact short-rate transitions on the grid, r = y + psi(t).
class RatePlan {
public:
    RatePlan(const VasicekModel& rates, const TimeGrid& grid) {
        const auto& p = rates.params();
        for (std::size_t i = 0; i < grid.size(); ++i) {
            shift_.push_back(rates.shift(grid[i]));
            if (i + 1 < grid.size()) {
                const double dt = grid[i + 1] - grid[i];
                const double decay = std::exp(-p.gamma * dt);
                decay_.push_back(decay);
                mean_.push_back(p.theta * (1.0 - decay));
                sd_.push_back(p.sigma * std::sqrt(-std::expm1(-2.0 * p.gamma * dt) / (2.0 * p.gamma)));
            }
        }
    }

    double step(std::size_t i, double r, double z) const {
        const double y = r - shift_[i];
        return y * decay_[i] + mean_[i] + sd_[i] * z + shift_[i + 1];
    }

private:
    std::vector<double> shift_, decay_, mean_, sd_;
};

}  // namespace

double cva_independent(std::span<const double> times, std::span<const double> epe, const SurvivalCurve& curve,
                       double recovery) {
    if (times.size() != epe.size()) throw DomainError("cva_independent: profile size mismatch");
    double total = 0.0;
    for (std::size_t i = 1; i < times.size(); ++i) {
        total += 0.5 * (epe[i - 1] + epe[i]) * (curve.survival(times[i - 1]) - curve.survival(times[i]));
    }
    return (1.0 - recovery) * total;
}

CvaRun run_cva(const IrsSpec& spec, const VasicekModel& rates, const SurvivalCurve& market, double recovery,
               std::span<const CvaScenario> scenarios, const McSettings& mc) {
    if (!(recovery >= 0.0 && recovery < 1.0)) throw ValidationError("recovery must lie in [0, 1)");
    std::vector<double> events{spec.start};
    for (double d : spec.payment_dates()) events.push_back(d);
    const TimeGrid grid(0.0, spec.end, mc.dt, events);
    const std::size_t n_nodes = grid.size();
    const IrsExposure exposure(spec, rates, grid);
    const RatePlan rate_plan(rates, grid);

    std::vector<const CreditModel*> models;
    std::vector<std::unique_ptr<CreditPlan>> plans;
    std::vector<std::size_t> plan_of;
    for (const auto& s : scenarios) {
        const CorrelationSpec check(s.rho);
        (void)check;
        auto it = std::find(models.begin(), models.end(), s.model);
        if (it == models.end()) {
            models.push_back(s.model);
            plans.push_back(s.model->plan(grid));
            it = models.end() - 1;
        }
        plan_of.push_back(static_cast<std::size_t>(it - models.begin()));
    }
    std::vector<double> g(n_nodes);
    for (std::size_t i = 0; i < n_nodes; ++i) g[i] = market.survival(grid[i]);

    const std::size_t n_scen = scenarios.size();
    const std::size_t base = n_nodes + 1;
    const double lgd = 1.0 - recovery;

    auto kernel = [&](const PathStream& stream, std::span<double> out) {
        thread_local std::vector<CreditState> states;
        thread_local std::vector<double> left;
        states.resize(n_scen);
        left.resize(n_scen);
        for (std::size_t k = 0; k < n_scen; ++k) states[k] = plans[plan_of[k]]->initial();

        double r = rates.params().r0 + rates.shift(0.0);
        double integral_r = 0.0;
        double fixing = std::numeric_limits<double>::quiet_NaN();
        double e_prev = std::max(exposure.value(0, r, fixing), 0.0);
        exposure.reset(0, r, fixing);
        out[0] = e_prev;
        double independent = 0.0;
        std::vector<double>::size_type dummy = 0;
        (void)dummy;
        for (std::size_t i = 0; i + 1 < n_nodes; ++i) {
            const double dt = grid[i + 1] - grid[i];
            const auto z = stream.normals(static_cast<std::uint32_t>(i), channel::kDrivers);
            for (std::size_t k = 0; k < n_scen; ++k) left[k] = plans[plan_of[k]]->lambda_s(i, i, states[k]);
            const double r_next = rate_plan.step(i, r, z[0]);
            integral_r += 0.5 * (r + r_next) * dt;
            r = r_next;
            const double e = std::max(exposure.value(i + 1, r, fixing), 0.0) * std::exp(-integral_r);
            exposure.reset(i + 1, r, fixing);
            out[i + 1] = e;
            independent += 0.5 * (e_prev + e) * (g[i] - g[i + 1]);
            for (std::size_t k = 0; k < n_scen; ++k) {
                const double rho = scenarios[k].rho;
                const double zc = rho * z[0] + std::sqrt(1.0 - rho * rho) * z[1];
                const CreditPlan& plan = *plans[plan_of[k]];
                plan.advance(i, states[k], zc, stream);
                const double right = plan.lambda_s(i + 1, i, states[k]);
                out[base + 2 * k] += 0.5 * (e_prev * left[k] + e * right) * dt;
                if (left[k] < 0.0 || right < 0.0) out[base + 2 * k + 1] = 1.0;
            }
            e_prev = e;
        }
        out[n_nodes] = lgd * independent;
        for (std::size_t k = 0; k < n_scen; ++k) out[base + 2 * k] *= lgd;
    };

    RunOptions options{mc.workers, 4096, mc.antithetic};
    const auto est = run_paths(mc.paths, base + 2 * n_scen, mc.seed, kernel, options);

    CvaRun run;
    run.times.assign(grid.nodes().begin(), grid.nodes().end());
    for (std::size_t i = 0; i < n_nodes; ++i) run.epe.push_back(make_result("epe", est[i], mc.paths, mc.seed));
    run.cva_independent = make_result("cva-independent", est[n_nodes], mc.paths, mc.seed);
    for (std::size_t k = 0; k < n_scen; ++k) {
        std::ostringstream label;
        label << scenarios[k].model->name() << " rho=" << scenarios[k].rho;
        run.cva.push_back(make_result(label.str(), est[base + 2 * k], mc.paths, mc.seed));
        run.negative_intensity_fraction.push_back(est[base + 2 * k + 1].mean());
    }
    return run;
}

CvaRun epe_profile(const IrsSpec& spec, const VasicekModel& rates, const SurvivalCurve& market, const McSettings& mc) {
    return run_cva(spec, rates, market, 0.0, {}, mc);
}

// ---------------------------------------------------------------------------
// CDS and CDS options

namespace {

void check_option_spec(const CdsOptionSpec& spec) {
    if (!(spec.expiry >= 0.0) || !(spec.maturity > spec.expiry)) {
        throw ValidationError("cds option: need 0 <= expiry < maturity");
    }
    if (!(spec.recovery >= 0.0 && spec.recovery <= 1.0)) throw ValidationError("cds option: recovery outside [0, 1]");
    if (!(spec.premium_freq > 0.0)) throw ValidationError("cds option: premium frequency must be positive");
}

}  // namespace

CdsLegs cds_value(const CreditModel& model, const CreditState& state, double t, const CdsOptionSpec& spec,
                  const DiscountCurve& discount) {
    if (t > spec.expiry) throw DomainError("cds_value: valuation after the protection start");
    check_option_spec(spec);
    const CdsSchedule schedule(spec.expiry, spec.maturity, spec.premium_freq, discount, t);
    std::vector<double> maturities{t};
    maturities.insert(maturities.end(), schedule.nodes().begin(), schedule.nodes().end());
    const auto plan = model.curve_plan(t, maturities);
    std::vector<double> q(maturities.size());
    plan->qbar(state, q);
    // Legs run from T_a; Qbar_t(u) already carries the survival from t to T_a.
    return schedule.legs(std::span<const double>(q).subspan(1), spec.recovery, model.nonnegative_intensity());
}

double par_spread(const CreditModel& model, const CreditState& state, double t, const CdsOptionSpec& spec,
                  const DiscountCurve& discount) {
    return cds_value(model, state, t, spec, discount).par_spread();
}

CdsLegs forward_cds(const SurvivalCurve& curve, const CdsOptionSpec& spec, const DiscountCurve& discount) {
    check_option_spec(spec);
    const CdsSchedule schedule(spec.expiry, spec.maturity, spec.premium_freq, discount, 0.0);
    std::vector<double> q;
    for (double u : schedule.nodes()) q.push_back(curve.survival(u));
    return schedule.legs(q, spec.recovery);
}

CdsOptionRun cds_option_prices(const CreditModel& model, const CdsOptionSpec& spec, std::span<const double> strikes,
                               const McSettings& mc, const DiscountCurve& discount) {
    check_option_spec(spec);
    if (!(spec.expiry > 0.0)) throw ValidationError("cds option: expiry must be positive");
    for (double k : strikes) {
        if (!(k > 0.0)) throw ValidationError("cds option: strikes must be positive");
    }
    const TimeGrid grid = model.exact() ? TimeGrid(0.0, spec.expiry, spec.expiry) : TimeGrid(0.0, spec.expiry, mc.dt);
    const auto plan = model.plan(grid);
    const CdsSchedule schedule(spec.expiry, spec.maturity, spec.premium_freq, discount, spec.expiry);
    const auto curve = model.curve_plan(spec.expiry, schedule.nodes());
    const double df = discount.discount(spec.expiry);
    const bool strict = model.nonnegative_intensity();
    const std::size_t n_k = strikes.size();
    const std::size_t last = grid.size() - 1;

    auto kernel = [&](const PathStream& stream, std::span<double> out) {
        thread_local std::vector<double> q;
        q.resize(schedule.nodes().size());
        CreditState state = plan->initial();
        for (std::size_t i = 0; i < last; ++i) {
            plan->advance(i, state, stream.normals(static_cast<std::uint32_t>(i), channel::kDrivers)[1], stream);
        }
        const double survival = plan->survival(last, state);
        curve->qbar(state, q);
        const CdsLegs legs = schedule.legs(q, spec.recovery, strict);
        for (std::size_t k = 0; k < n_k; ++k) {
            const double v = legs.value(strikes[k]);
            out[2 * k] = df * survival * std::max(v, 0.0);
            out[2 * k + 1] = df * survival * std::max(-v, 0.0);
        }
        out[2 * n_k] = survival;
    };
    RunOptions options{mc.workers, 4096, mc.antithetic};
    const auto est = run_paths(mc.paths, 2 * n_k + 1, mc.seed, kernel, options);

    CdsOptionRun run;
    run.forward = forward_cds(model.curve(), spec, discount);
    run.strikes.assign(strikes.begin(), strikes.end());
    for (std::size_t k = 0; k < n_k; ++k) {
        std::ostringstream label;
        label << model.name() << " k=" << strikes[k];
        run.payer.push_back(make_result("payer " + label.str(), est[2 * k], mc.paths, mc.seed));
        run.receiver.push_back(make_result("receiver " + label.str(), est[2 * k + 1], mc.paths, mc.seed));
    }
    run.survival = make_result("survival", est[2 * n_k], mc.paths, mc.seed);
    return run;
}

PricingResult pso_price(const CreditModel& model, const CdsOptionSpec& spec, const McSettings& mc,
                        const DiscountCurve& discount) {
    const double k = spec.strike;
    return cds_option_prices(model, spec, std::span<const double>(&k, 1), mc, discount).payer.front();
}

double black_pso(double s0, double k, double c0, double sigma, double expiry) {
    const double vol = sigma * std::sqrt(expiry);
    if (vol <= 0.0) return c0 * std::max(s0 - k, 0.0);
    const double d1 = (std::log(s0 / k) + 0.5 * vol * vol) / vol;
    return c0 * (s0 * norm_cdf(d1) - k * norm_cdf(d1 - vol));
}

double implied_vol(double price, double s0, double k, double c0, double expiry) {
    constexpr double kLo = 1e-6;
    constexpr double kHi = 10.0;
    const double low = black_pso(s0, k, c0, kLo, expiry);
    const double high = black_pso(s0, k, c0, kHi, expiry);
    if (!(price > low && price < high)) {
        std::ostringstream msg;
        msg.precision(10);
        msg << "implied_vol: price " << price << " outside the attainable range (" << low << ", " << high << ")";
        throw DomainError(msg.str());
    }
    return bisect([&](double v) { return black_pso(s0, k, c0, v, expiry) - price; }, kLo, kHi, 1e-10);
}

}  // namespace phicredit
