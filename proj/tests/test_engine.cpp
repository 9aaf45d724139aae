#include <doctest.h>

#include <cmath>
#include <cstring>
#include <limits>

#include "phicredit/engine.hpp"
#include "phicredit/errors.hpp"

using namespace phicredit;

namespace {

double correlation(double rho, std::uint64_t n) {
    const CorrelationSpec corr(rho);
    const auto est = run_paths(n, 5, 9, [&](const PathStream& stream, std::span<double> out) {
        const auto [a, b] = draw_pair(stream, 0, corr);
        out[0] = a;
        out[1] = b;
        out[2] = a * a;
        out[3] = b * b;
        out[4] = a * b;
    });
    const double ma = est[0].mean(), mb = est[1].mean();
    return (est[4].mean() - ma * mb) / std::sqrt((est[2].mean() - ma * ma) * (est[3].mean() - mb * mb));
}

bool same_bits(double a, double b) { return std::memcmp(&a, &b, sizeof a) == 0; }

}  // namespace

TEST_SUITE("engine") {
    TEST_CASE("philox known answers") {
        using Block = std::array<std::uint32_t, 4>;
        CHECK(philox4x32({0, 0, 0, 0}, {0, 0}) == Block{0x6627e8d5, 0xe169c58d, 0xbc57ac4c, 0x9b00dbd8});
        CHECK(philox4x32({0xffffffff, 0xffffffff, 0xffffffff, 0xffffffff}, {0xffffffff, 0xffffffff}) ==
              Block{0x408f276d, 0x41c83b0e, 0xa20bc7c6, 0x6d5451fd});
        CHECK(philox4x32({0x243f6a88, 0x85a308d3, 0x13198a2e, 0x03707344}, {0xa4093822, 0x299f31d0}) ==
              Block{0xd16cfe09, 0x94fdcceb, 0x5001e420, 0x24126ea1});
    }

    TEST_CASE("streams are pure functions of their coordinates") {
        const PathStream a(42, 17), b(42, 17), other(42, 18);
        CHECK(a.normals(3, channel::kDrivers) == b.normals(3, channel::kDrivers));
        CHECK(a.normals(3, channel::kDrivers) != other.normals(3, channel::kDrivers));
        CHECK(a.normals(3, channel::kDrivers) != a.normals(3, channel::kJumps));
        CHECK(a.normals(3, channel::kDrivers, 0) != a.normals(3, channel::kDrivers, 1));
        const PathStream mirror(42, 17, true);
        CHECK(mirror.normals(5, 0)[0] == -a.normals(5, 0)[0]);
        CHECK(mirror.uniforms(5, 0)[1] == doctest::Approx(1.0 - a.uniforms(5, 0)[1]));
        for (std::uint32_t i = 0; i < 1000; ++i) {
            const auto u = a.uniforms(i, channel::kAux);
            CHECK(u[0] > 0.0);
            CHECK(u[0] < 1.0);
        }
    }

    TEST_CASE("correlated pairs") {
        CHECK_THROWS_AS(CorrelationSpec(1.2), ValidationError);
        const PathStream s(1, 1);
        const auto [a, b] = draw_pair(s, 4, CorrelationSpec(1.0));
        CHECK(a == b);
        CHECK(std::abs(correlation(0.0, 1000000)) < 0.004);
        CHECK(std::abs(correlation(0.5, 1000000) - 0.5) < 0.004);
    }

    TEST_CASE("estimators") {
        const auto ones = run_paths(1000, 1, 1, [](const PathStream&, std::span<double> out) { out[0] = 1.0; });
        CHECK(ones[0].mean() == 1.0);
        CHECK(ones[0].standard_error() == 0.0);

        const auto z = run_paths(1000000, 1, 2, [](const PathStream& s, std::span<double> out) {
            out[0] = s.normals(0, channel::kDrivers)[0];
        });
        CHECK(std::abs(z[0].mean()) < 3.0 * z[0].standard_error());
        CHECK(z[0].standard_error() == doctest::Approx(0.001).epsilon(0.01));

        Estimator a, b, c;
        a.add(1.0);
        b.add(2.0);
        c.add(4.0);
        Estimator left = a, right = b;
        left.merge(b);
        left.merge(c);
        right.merge(c);
        right.merge(a);
        CHECK(left.sum() == right.sum());
        CHECK(left.count() == 3);
    }

    TEST_CASE("bit-identical across worker counts") {
        const PathKernel kernel = [](const PathStream& s, std::span<double> out) {
            const auto z = s.normals(0, channel::kDrivers);
            out[0] = std::exp(0.3 * z[0]) + z[1] * 1e-3;
            out[1] = s.uniforms(1, channel::kAux)[0];
        };
        const auto one = run_paths(100003, 2, 77, kernel, {1});
        const auto eight = run_paths(100003, 2, 77, kernel, {8});
        const auto odd_blocks = run_paths(100003, 2, 77, kernel, {3});
        for (int k = 0; k < 2; ++k) {
            CHECK(same_bits(one[k].mean(), eight[k].mean()));
            CHECK(same_bits(one[k].standard_error(), eight[k].standard_error()));
            CHECK(same_bits(one[k].mean(), odd_blocks[k].mean()));
        }
        CHECK(one[0].count() == 100003);
    }

    TEST_CASE("antithetic pairs") {
        const auto est = run_paths(10000, 1, 5, [](const PathStream& s, std::span<double> out) {
            out[0] = s.normals(0, channel::kDrivers)[0];
        }, {1, 4096, true});
        CHECK(std::abs(est[0].mean()) < 1e-15);
    }

    TEST_CASE("non-finite payoff") {
        const PathKernel bad = [](const PathStream& s, std::span<double> out) {
            out[0] = s.path() == 1234 ? std::numeric_limits<double>::infinity() : 0.0;
        };
        try {
            run_paths(5000, 1, 1, bad, {4});
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(std::string(e.what()).find("1234") != std::string::npos);
        }
    }

    TEST_CASE("time grid") {
        const TimeGrid grid(0.0, 5.0, 0.3, {1.0, 2.5});
        CHECK(grid[0] == 0.0);
        CHECK(grid.end() == 5.0);
        CHECK(grid[grid.index_of(1.0)] == 1.0);
        CHECK(grid[grid.index_of(2.5)] == 2.5);
        for (std::size_t i = 1; i < grid.size(); ++i) CHECK(grid[i] > grid[i - 1]);
        CHECK_THROWS_AS(grid.index_of(1.1), DomainError);
        const TimeGrid fine(0.0, 5.0, 0.01, {1.0});
        CHECK(fine.size() == 501);
        CHECK(fine[fine.index_of(1.0)] == 1.0);
    }
}
