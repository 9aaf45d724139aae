#include <doctest.h>

#include <cmath>

#include "phicredit/engine.hpp"
#include "phicredit/errors.hpp"
#include "phicredit/rates.hpp"

using namespace phicredit;

namespace {

const VasicekParams kPublished{0.4, 0.026, 0.14, 0.0165};

}  // namespace

TEST_SUITE("rates") {
    TEST_CASE("zero coupon bond") {
        const VasicekModel shifted(kPublished, DiscountCurve(0.03));
        const double r0 = kPublished.r0 + shifted.shift(0.0);
        CHECK(shifted.zcb(2.0, 0.05, 2.0) == doctest::Approx(1.0));
        CHECK(shifted.zcb(0.0, r0, 5.0) == doctest::Approx(0.860708).epsilon(1e-6));
        CHECK_THROWS_AS(shifted.zcb(3.0, 0.02, 2.0), DomainError);

        const VasicekModel deterministic(VasicekParams{0.7, 0.03, 0.0, 0.03});
        CHECK(deterministic.zcb(0.0, 0.03, 1.0) == doctest::Approx(std::exp(-0.03)).epsilon(1e-14));

        double worst = 0.0;
        for (int k = 0; k <= 1000; ++k) {
            const double T = 0.01 * k;
            worst = std::max(worst, std::abs(shifted.zcb(0.0, r0, T) - std::exp(-0.03 * T)));
        }
        CHECK(worst < 1e-12);
    }

    TEST_CASE("zcb coefficients agree with zcb") {
        const VasicekModel model(kPublished, DiscountCurve(0.03));
        for (double r : {-0.01, 0.02, 0.08}) {
            CHECK(model.zcb_coefficients(1.5, 4.0).price(r) == doctest::Approx(model.zcb(1.5, r, 4.0)).epsilon(1e-14));
        }
    }

    TEST_CASE("simple forward rate") {
        CHECK(forward_rate(0.95, 0.95, 0.25) == 0.0);
        CHECK(forward_rate(1.0, 0.99, 0.25) == doctest::Approx(0.040404).epsilon(1e-5));
        CHECK(forward_rate(0.98, 0.97, 0.25) == doctest::Approx(0.041237).epsilon(1e-5));
    }

    TEST_CASE("exact short rate step") {
        VasicekParams frozen = kPublished;
        frozen.sigma = 0.0;
        CHECK(step_rate(frozen, frozen.theta, 0.3, 1.7) == doctest::Approx(frozen.theta).epsilon(1e-15));
        CHECK(step_rate(kPublished, 0.0165, 0.01, 0.0) ==
              doctest::Approx(0.0165 + 0.4 * (0.026 - 0.0165) * 0.01).epsilon(1e-6));
        const double sd = step_rate(kPublished, 0.0165, 1.0, 1.0) - step_rate(kPublished, 0.0165, 1.0, 0.0);
        CHECK(sd * sd == doctest::Approx(0.14 * 0.14 * (1.0 - std::exp(-0.8)) / 0.8).epsilon(1e-12));
    }

    TEST_CASE("Monte Carlo bond prices and martingale property") {
        const VasicekModel model(kPublished, DiscountCurve(0.03));
        const double dt = 0.01;
        const std::vector<double> maturities{1.0, 5.0, 10.0};
        // outputs: exp(-int r) to 1, 5, 10; discounted P(1, r_1, 5)
        const auto est = run_paths(100000, 4, 11, [&](const PathStream& stream, std::span<double> out) {
            double r = kPublished.r0 + model.shift(0.0);
            double integral = 0.0;
            for (int i = 0; i < 1000; ++i) {
                const double next = model.step(i * dt, r, dt, stream.normals(i, channel::kDrivers)[0]);
                integral += 0.5 * (r + next) * dt;
                r = next;
                if (i == 99) {
                    out[0] = std::exp(-integral);
                    out[3] = std::exp(-integral) * model.zcb(1.0, r, 5.0);
                }
                if (i == 499) out[1] = std::exp(-integral);
            }
            out[2] = std::exp(-integral);
        });
        for (std::size_t k = 0; k < maturities.size(); ++k) {
            const double exact = std::exp(-0.03 * maturities[k]);
            CHECK(std::abs(est[k].mean() - exact) < 3.0 * est[k].standard_error());
        }
        CHECK(std::abs(est[3].mean() - std::exp(-0.15)) < 3.0 * est[3].standard_error());
    }
}
