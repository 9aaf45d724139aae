#include <doctest.h>

#include <cmath>
#include <sstream>

#include "phicredit/curves.hpp"
#include "phicredit/errors.hpp"
#include "support.hpp"

using namespace phicredit;

namespace {

std::vector<CdsQuote> parse(const std::string& text) {
    std::istringstream in(text);
    return parse_quotes(in);
}

// Direct quadrature of the spot CDS legs on a fine grid, zero rates.
double par_spread_by_quadrature(const SurvivalCurve& curve, double maturity, double recovery) {
    const int n = 20000;
    double protection = 0.0;
    for (int i = 0; i < n; ++i) {
        const double a = maturity * i / n, b = maturity * (i + 1) / n;
        protection += curve.survival(a) - curve.survival(b);
    }
    double duration = 0.0;
    for (int q = 1; q <= static_cast<int>(std::lround(4 * maturity)); ++q) {
        const double a = 0.25 * (q - 1), b = 0.25 * q;
        duration += 0.25 * 0.5 * (curve.survival(a) + curve.survival(b));
    }
    return (1.0 - recovery) * protection / duration;
}

}  // namespace

TEST_SUITE("curves") {
    TEST_CASE("quote parsing") {
        const auto q = parse("1,18.3\n3,136.6");
        REQUIRE(q.size() == 2);
        CHECK(q[0].maturity == 1.0);
        CHECK(q[0].spread == doctest::Approx(0.00183).epsilon(1e-12));
        CHECK(q[1].maturity == 3.0);
        CHECK(q[1].spread == doctest::Approx(0.01366).epsilon(1e-12));

        CHECK(parse("").empty());
        CHECK(parse("maturity_years,spread_bps\n5,191.9\n").size() == 1);
        CHECK_THROWS_AS(parse("5,x"), ParseError);
        CHECK_THROWS_AS(parse("1,10\n1,20"), ValidationError);

        const auto unsorted = parse("5,100\n1,50");
        CHECK(unsorted.front().maturity == 1.0);

        const auto json = parse(R"({"quotes": [{"maturity_years": 1, "spread_bps": 18.3}]})");
        REQUIRE(json.size() == 1);
        CHECK(json[0].spread == doctest::Approx(0.00183));
        CHECK(parse(R"([{"maturity_years": 3, "spread_bps": 136.6}])").size() == 1);
    }

    TEST_CASE("parse errors name the line") {
        try {
            parse("1,10\n2,abc\n");
            FAIL("expected a parse error");
        } catch (const ParseError& e) {
            CHECK(std::string(e.what()).find("2") != std::string::npos);
        }
    }

    TEST_CASE("survival of simple curves") {
        const auto flat = SurvivalCurve::flat(0.02, 1.0);
        CHECK(flat.survival(5.0) == doctest::Approx(std::exp(-0.1)).epsilon(1e-14));
        CHECK(flat.survival(0.0) == 1.0);
        const SurvivalCurve two({1.0, 2.0}, {0.01, 0.03});
        CHECK(two.survival(2.0) == doctest::Approx(std::exp(-0.04)).epsilon(1e-14));
        CHECK(two.hazard(0.5) == 0.01);
        CHECK(two.hazard(1.5) == 0.03);
        CHECK(two.at(3.0).extrapolated);
        CHECK(two.at(3.0).hazard == 0.03);
        CHECK_FALSE(two.at(1.5).extrapolated);
        CHECK(two.inverse(two.survival(1.7)) == doctest::Approx(1.7).epsilon(1e-12));
        CHECK(std::isinf(SurvivalCurve({1.0}, {0.0}).inverse(0.5)));
    }

    TEST_CASE("bootstrap of the reference quotes") {
        const auto curve = test_support::ford_curve();
        // credit triangle h = s / (1 - R)
        CHECK(curve.hazards()[0] == doctest::Approx(0.00183 / 0.6).epsilon(0.02));

        std::ifstream in(test_support::ford_path());
        const auto quotes = parse_quotes(in);
        const BootstrapOptions options;
        for (const auto& q : quotes) {
            CHECK(std::abs(spot_cds_legs(curve, q.maturity, options).value(q.spread)) < 1e-5);
            CHECK(par_spread_by_quadrature(curve, q.maturity, 0.4) == doctest::Approx(q.spread).epsilon(1e-3));
        }
        double previous = 1.0;
        for (int k = 0; k <= 2000; ++k) {
            const double t = 0.005 * k;
            const double g = curve.survival(t);
            CHECK(g <= previous);
            CHECK(g * std::exp(curve.integrated_hazard(t)) == doctest::Approx(1.0).epsilon(1e-14));
            previous = g;
        }
    }

    TEST_CASE("bootstrap edge cases") {
        const std::vector<CdsQuote> zero{{1.0, 0.0}};
        const auto flat0 = bootstrap(zero);
        CHECK(flat0.hazards()[0] == doctest::Approx(0.0).epsilon(1e-12));
        CHECK(flat0.survival(1.0) == doctest::Approx(1.0));

        const std::vector<CdsQuote> equal{{2.0, 0.01}, {5.0, 0.01}};
        const auto flat = bootstrap(equal);
        CHECK(std::abs(flat.hazards()[0] - flat.hazards()[1]) < 1e-8);

        // a collapsing spread term structure needs a negative forward hazard
        const std::vector<CdsQuote> inverted{{1.0, 0.05}, {2.0, 0.001}};
        CHECK_THROWS_AS(bootstrap(inverted), BootstrapError);
        try {
            bootstrap(inverted);
        } catch (const BootstrapError& e) {
            CHECK(e.maturity() == 2.0);
        }

        BootstrapOptions bad;
        bad.recovery = 1.0;
        CHECK_THROWS_AS(bootstrap(equal, bad), ValidationError);
    }

    TEST_CASE("credit triangle on a flat curve") {
        const auto curve = SurvivalCurve::flat(0.02, 10.0);
        const BootstrapOptions options;
        CHECK(spot_cds_legs(curve, 5.0, options).par_spread() == doctest::Approx(0.6 * 0.02).epsilon(0.01));
    }

    TEST_CASE("cds schedule") {
        const DiscountCurve zero;
        const CdsSchedule schedule(1.0, 5.0, 4.0, zero, 0.0);
        CHECK(schedule.nodes().front() == 1.0);
        CHECK(schedule.nodes().back() == 5.0);
        CHECK(schedule.premium_dates().size() == 16);

        std::vector<double> q(schedule.nodes().size(), 1.0);
        const auto riskless = schedule.legs(q, 0.4);
        CHECK(riskless.protection == 0.0);
        CHECK(riskless.risky_duration == doctest::Approx(4.0).epsilon(1e-12));

        q.back() = 1.0 + 1e-6;
        CHECK_THROWS_AS(schedule.legs(q, 0.4), NumericError);
        CHECK_NOTHROW(schedule.legs(q, 0.4, false));
    }

    TEST_CASE("discount curve") {
        const DiscountCurve flat(0.03);
        CHECK(flat.discount(5.0) == doctest::Approx(std::exp(-0.15)));
        CHECK(flat.forward(2.0) == doctest::Approx(0.03));
        CHECK(DiscountCurve().is_unit());
        const DiscountCurve table({1.0, 5.0}, {0.01, 0.03});
        CHECK(table.zero_rate(3.0) == doctest::Approx(0.02));
        CHECK(table.zero_rate(10.0) == doctest::Approx(0.03));
    }
}
