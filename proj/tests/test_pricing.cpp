#include <doctest.h>

#include <cmath>
#include <cstring>

#include "phicredit/errors.hpp"
#include "phicredit/math.hpp"
#include "phicredit/pricing.hpp"
#include "support.hpp"

using namespace phicredit;

namespace {

const VasicekParams kRates{0.4, 0.026, 0.14, 0.0165};

IrsSpec par_swap(const VasicekModel& rates) {
    IrsSpec spec;
    spec.fixed_rate = par_swap_rate(spec, rates);
    return spec;
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("pricing") {
    TEST_CASE("swap valuation") {
        const VasicekModel rates(kRates, DiscountCurve(0.03));
        const IrsSpec spec = par_swap(rates);
        const double r0 = kRates.r0 + rates.shift(0.0);
        CHECK(std::abs(irs_value(spec, rates, 0.0, r0).value) < 1e-12);
        // flat 3% continuously compounded: quarterly simple rate 4 (e^{0.0075} - 1)
        CHECK(spec.fixed_rate == doctest::Approx(4.0 * std::expm1(0.0075)).epsilon(1e-10));
        CHECK(irs_value(spec, rates, 5.5, 0.03).expired);
        CHECK(irs_value(spec, rates, 5.5, 0.03).value == 0.0);
        CHECK_THROWS_AS(irs_value(spec, rates, 2.1, 0.03), DomainError);

        // mid-period value from a direct cash-flow sum
        const double t = 2.1, r = 0.035, fixing = 0.04;
        double expected = rates.zcb(t, r, 2.25) * (fixing - spec.fixed_rate) * 0.25;
        for (double d = 2.5; d <= 5.0 + 1e-12; d += 0.25) {
            const double p_prev = rates.zcb(t, r, d - 0.25), p = rates.zcb(t, r, d);
            expected += (p_prev / p - 1.0) * p - spec.fixed_rate * 0.25 * p;
        }
        CHECK(irs_value(spec, rates, t, r, fixing).value == doctest::Approx(expected).epsilon(1e-12));

        IrsSpec broken = spec;
        broken.end = 4.9;
        CHECK_THROWS_AS(broken.payment_dates(), ValidationError);
    }

    TEST_CASE("exposure profile") {
        const VasicekModel rates(kRates, DiscountCurve(0.03));
        const auto curve = test_support::ford_curve();
        McSettings mc;
        mc.paths = 20000;
        const IrsSpec spec = par_swap(rates);
        const CvaRun run = epe_profile(spec, rates, curve, mc);
        CHECK(run.epe.front().value == doctest::Approx(0.0).epsilon(1e-15));
        CHECK(run.times.back() == 5.0);
        CHECK(run.epe.back().value < run.epe[run.times.size() / 3].value);
        for (const auto& e : run.epe) CHECK(e.value >= 0.0);

        std::vector<double> zero(run.times.size(), 0.0), epe;
        for (const auto& e : run.epe) epe.push_back(e.value);
        CHECK(cva_independent(run.times, zero, curve, 0.4) == 0.0);
        CHECK(cva_independent(run.times, epe, curve, 1.0) == 0.0);
        // the profile run carries no recovery
        CHECK(cva_independent(run.times, epe, curve, 0.0) == doctest::Approx(run.cva_independent.value).epsilon(1e-9));
    }

    TEST_CASE("wrong-way risk runs") {
        const VasicekModel rates(kRates, DiscountCurve(0.03));
        const auto curve = test_support::ford_curve();
        const PhiCreditModel phi(PhiModel(curve, 0.75));
        const TimeChangedCirModel tc(CirParams{0.0624, 0.2975, 0.3343, 0.0}, {}, curve);
        const ShiftedJcirModel ps(CirParams{0.4382, 0.0086, 0.0396, 0.1051}, {9.5619e-10, 3.1508e-10}, curve);
        McSettings mc;
        mc.paths = 20000;
        const std::vector<CvaScenario> scenarios{{&phi, 0.0}, {&tc, 0.0}, {&ps, 0.0}, {&phi, 0.9}, {&tc, 0.9}};
        const CvaRun run = run_cva(par_swap(rates), rates, curve, 0.4, scenarios, mc);
        for (int k = 0; k < 3; ++k) {
            const double se = std::hypot(run.cva[k].standard_error, run.cva_independent.standard_error);
            CHECK(std::abs(run.cva[k].value - run.cva_independent.value) < 3.0 * se);
        }
        CHECK(run.negative_intensity_fraction[2] > 0.0);
        CHECK(run.negative_intensity_fraction[0] == 0.0);
        // strong wrong-way risk at eta = 75% lands close to the time-changed model
        CHECK(run.cva[3].value == doctest::Approx(run.cva[4].value).epsilon(0.15));
        CHECK(run.cva[3].value > 1.5 * run.cva[0].value);

        const std::vector<CvaScenario> bad{{&phi, 1.5}};
        CHECK_THROWS_AS(run_cva(par_swap(rates), rates, curve, 0.4, bad, mc), ValidationError);
    }

    TEST_CASE("forward CDS and par spread") {
        const auto curve = test_support::ford_curve();
        const CdsOptionSpec spec;
        const CdsLegs forward = forward_cds(curve, spec);
        CHECK(1e4 * forward.par_spread() == doctest::Approx(238.0).epsilon(3.0 / 238.0));

        const CdsLegs flat = forward_cds(SurvivalCurve::flat(0.02, 10.0), spec);
        CHECK(flat.par_spread() == doctest::Approx(0.6 * 0.02).epsilon(0.01));
        CHECK(forward_cds(SurvivalCurve::flat(0.0, 10.0), spec).par_spread() == 0.0);
        CHECK_THROWS_AS((CdsLegs{0.0, 0.0}.par_spread()), DomainError);
    }

    TEST_CASE("model CDS value at expiry") {
        const auto curve = test_support::ford_curve();
        const PhiCreditModel phi(PhiModel(curve, 0.3));
        const CreditState state{0.2, 0.0};
        const CdsOptionSpec spec;
        const CdsLegs legs = cds_value(phi, state, 1.0, spec);
        const double s = par_spread(phi, state, 1.0, spec);
        CHECK(std::abs(legs.value(s)) < 1e-14);
        CdsOptionSpec full = spec;
        full.recovery = 1.0;
        const CdsLegs none = cds_value(phi, state, 1.0, full);
        CHECK(none.value(0.01) == doctest::Approx(-0.01 * none.risky_duration).epsilon(1e-14));
        CHECK_THROWS_AS(cds_value(phi, state, 1.5, spec), DomainError);
    }

    TEST_CASE("cds options") {
        const auto curve = test_support::ford_curve();
        const PhiCreditModel phi(PhiModel(curve, 0.15));
        const CdsOptionSpec spec;
        McSettings mc;
        mc.paths = 50000;
        const std::vector<double> strikes{1e-9, 0.01, 0.02, 0.024, 0.03, 1.0};
        const auto run = cds_option_prices(phi, spec, strikes, mc);
        CHECK(std::abs(run.survival.value - curve.survival(1.0)) < 3.0 * run.survival.standard_error);
        // deep in the money: protection leg in expectation
        CHECK(std::abs(run.payer[0].value - run.forward.protection) < 3.0 * run.payer[0].standard_error);
        CHECK(run.payer.back().value == 0.0);
        for (std::size_t k = 1; k < strikes.size(); ++k) CHECK(run.payer[k].value < run.payer[k - 1].value + 1e-15);
        for (std::size_t k = 0; k < strikes.size(); ++k) {
            const double parity = run.payer[k].value - run.receiver[k].value;
            const double se = run.payer[k].standard_error + run.receiver[k].standard_error;
            CHECK(std::abs(parity - run.forward.value(strikes[k])) < 3.0 * se + 1e-12);
        }
        CdsOptionSpec at_200 = spec;
        at_200.strike = 0.02;
        CHECK(pso_price(phi, at_200, mc).value == run.payer[2].value);

        McSettings eight = mc;
        eight.workers = 8;
        const auto again = cds_option_prices(phi, spec, strikes, eight);
        for (std::size_t k = 0; k < strikes.size(); ++k) CHECK(same_bits(again.payer[k].value, run.payer[k].value));
        CHECK_THROWS_AS(cds_option_prices(phi, spec, std::vector<double>{-0.01}, mc), ValidationError);
    }

    TEST_CASE("Black formula and implied volatility") {
        const double c0 = 3.7, t = 1.0;
        CHECK(black_pso(0.03, 0.02, c0, 1e-12, t) == doctest::Approx(c0 * 0.01));
        CHECK(black_pso(0.03, 0.02, c0, 0.0, t) == doctest::Approx(c0 * 0.01));
        const double s0 = 0.0238, vol = 0.34;
        const double half = 0.5 * vol * std::sqrt(t);
        CHECK(black_pso(s0, s0, c0, vol, t) ==
              doctest::Approx(c0 * s0 * (norm_cdf(half) - norm_cdf(-half))).epsilon(1e-14));
        const double price = black_pso(s0, 0.02, c0, 0.25, t);
        CHECK(implied_vol(price, s0, 0.02, c0, t) == doctest::Approx(0.25).epsilon(1e-8));
        const double intrinsic = c0 * (s0 - 0.02);
        CHECK_THROWS_AS(implied_vol(intrinsic, s0, 0.02, c0, t), DomainError);
        try {
            implied_vol(intrinsic, s0, 0.02, c0, t);
        } catch (const DomainError& e) {
            CHECK(std::string(e.what()).find("attainable") != std::string::npos);
        }
    }
}
