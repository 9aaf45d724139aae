#pragma once

#include <cstdint>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "phicredit/credit.hpp"
#include "phicredit/curves.hpp"
#include "phicredit/engine.hpp"
#include "phicredit/rates.hpp"

namespace phicredit {

/// Monte Carlo estimate with its provenance.
struct PricingResult {
    std::string label;
    double value = 0.0;
    double standard_error = 0.0;
    std::uint64_t paths = 0;
    std::uint64_t seed = 0;
};

PricingResult make_result(std::string label, const Estimator& estimator, std::uint64_t paths, std::uint64_t seed,
                          double scale = 1.0);

/// Payer interest rate swap (pay fixed, receive floating) starting at `start`
/// with payments every `delta` up to `end`.
struct IrsSpec {
    double start = 1.0;
    double end = 5.0;
    double delta = 0.25;
    double fixed_rate = 0.0;
    double notional = 1.0;

    std::vector<double> payment_dates() const;
};

struct IrsValue {
    double value;
    bool expired;
};

/// Swap value at t given r_t. `fixing` is the floating rate set at the start
/// of the running period; it is required once t > start.
IrsValue irs_value(const IrsSpec& spec, const VasicekModel& rates, double t, double r_t,
                   double fixing = std::numeric_limits<double>::quiet_NaN());

/// Fixed rate giving the swap zero value at time 0.
double par_swap_rate(const IrsSpec& spec, const VasicekModel& rates);

struct McSettings {
    std::uint64_t paths = 100000;
    double dt = 0.01;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
    bool antithetic = false;
};

/// One wrong-way-risk CVA configuration sharing the exposure paths.
struct CvaScenario {
    const CreditModel* model;
    double rho;
};

struct CvaRun {
    std::vector<double> times;
    std::vector<PricingResult> epe;        // E[V+_t / beta_t] per grid node
    PricingResult cva_independent;         // trapezoid Stieltjes sum against G
    std::vector<PricingResult> cva;        // one per scenario
    std::vector<double> negative_intensity_fraction;  // share of paths with lambda S < 0 somewhere
};

/// Simulates the short rate and, for every scenario, the correlated credit
/// driver on one grid. Paths, exposure and discounting are shared by all
/// scenarios; the credit draws are common random numbers across scenarios.
CvaRun run_cva(const IrsSpec& spec, const VasicekModel& rates, const SurvivalCurve& market, double recovery,
               std::span<const CvaScenario> scenarios, const McSettings& mc);

/// Discounted expected positive exposure profile.
CvaRun epe_profile(const IrsSpec& spec, const VasicekModel& rates, const SurvivalCurve& market, const McSettings& mc);

/// -(1 - R) sum 1/2 (EPE_{i-1} + EPE_i) (G(u_i) - G(u_{i-1})).
double cva_independent(std::span<const double> times, std::span<const double> epe, const SurvivalCurve& curve,
                       double recovery);

/// Payer (or receiver) option at `expiry` on the CDS running to `maturity`.
struct CdsOptionSpec {
    double expiry = 1.0;
    double maturity = 5.0;
    double strike = 0.02;
    double recovery = 0.40;
    double premium_freq = 4.0;
};

/// Legs of the forward CDS seen from time t given the model state at t.
CdsLegs cds_value(const CreditModel& model, const CreditState& state, double t, const CdsOptionSpec& spec,
                  const DiscountCurve& discount = DiscountCurve{});
double par_spread(const CreditModel& model, const CreditState& state, double t, const CdsOptionSpec& spec,
                  const DiscountCurve& discount = DiscountCurve{});

/// Time-0 forward CDS legs priced off the market curve: s_0(a, b) and C_0(a, b).
CdsLegs forward_cds(const SurvivalCurve& curve, const CdsOptionSpec& spec,
                    const DiscountCurve& discount = DiscountCurve{});

struct CdsOptionRun {
    CdsLegs forward;                     // s_0 and C_0 from the market curve
    std::vector<double> strikes;
    std::vector<PricingResult> payer;
    std::vector<PricingResult> receiver;
    PricingResult survival;              // E[S_{T_a}]
};

/// Payer and receiver prices for every strike from one set of paths:
/// P(T_a) E[S_{T_a} (protection - k C_{T_a})^{+/-}] with deterministic discounting.
CdsOptionRun cds_option_prices(const CreditModel& model, const CdsOptionSpec& spec, std::span<const double> strikes,
                               const McSettings& mc, const DiscountCurve& discount = DiscountCurve{});
PricingResult pso_price(const CreditModel& model, const CdsOptionSpec& spec, const McSettings& mc,
                        const DiscountCurve& discount = DiscountCurve{});

/// Black payer value C_0 [s_0 N(d1) - k N(d2)].
double black_pso(double s0, double k, double c0, double sigma, double expiry);

/// Black volatility reproducing `price`; bisection on [1e-6, 10].
/// Throws DomainError naming the attainable bounds when there is no solution.
double implied_vol(double price, double s0, double k, double c0, double expiry);

}  // namespace phicredit
