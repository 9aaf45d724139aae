#include "phicredit/engine.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <mutex>
#include <numbers>
#include <sstream>
#include <thread>

#include "phicredit/errors.hpp"

namespace phicredit {

std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> ctr,
                                        std::array<std::uint32_t, 2> key) {
    constexpr std::uint32_t kM0 = 0xD2511F53u;
    constexpr std::uint32_t kM1 = 0xCD9E8D57u;
    constexpr std::uint32_t kW0 = 0x9E3779B9u;
    constexpr std::uint32_t kW1 = 0xBB67AE85u;
    for (int round = 0; round < 10; ++round) {
        const std::uint64_t p0 = static_cast<std::uint64_t>(kM0) * ctr[0];
        const std::uint64_t p1 = static_cast<std::uint64_t>(kM1) * ctr[2];
        const auto hi0 = static_cast<std::uint32_t>(p0 >> 32);
        const auto lo0 = static_cast<std::uint32_t>(p0);
        const auto hi1 = static_cast<std::uint32_t>(p1 >> 32);
        const auto lo1 = static_cast<std::uint32_t>(p1);
        ctr = {hi1 ^ ctr[1] ^ key[0], lo1, hi0 ^ ctr[3] ^ key[1], lo0};
        key[0] += kW0;
        key[1] += kW1;
    }
    return ctr;
}

namespace {

double to_open_unit(std::uint32_t hi, std::uint32_t lo) {
    const std::uint64_t bits = (static_cast<std::uint64_t>(hi) << 32 | lo) >> 11;
    return (static_cast<double>(bits) + 0.5) * 0x1.0p-53;
}

}  // namespace

std::array<std::uint32_t, 4> PathStream::block(std::uint32_t step, std::uint32_t ch,
                                               std::uint32_t sub) const {
    return philox4x32({static_cast<std::uint32_t>(path_), static_cast<std::uint32_t>(path_ >> 32),
                       step, (ch << 16) | (sub & 0xFFFFu)},
                      {static_cast<std::uint32_t>(seed_), static_cast<std::uint32_t>(seed_ >> 32)});
}

std::array<double, 2> PathStream::uniforms(std::uint32_t step, std::uint32_t ch,
                                           std::uint32_t sub) const {
    const auto b = block(step, ch, sub);
    std::array<double, 2> u{to_open_unit(b[0], b[1]), to_open_unit(b[2], b[3])};
    if (antithetic_) u = {1.0 - u[0], 1.0 - u[1]};
    return u;
}

std::array<double, 2> PathStream::normals(std::uint32_t step, std::uint32_t ch,
                                          std::uint32_t sub) const {
    const auto b = block(step, ch, sub);
    const double radius = std::sqrt(-2.0 * std::log(to_open_unit(b[0], b[1])));
    const double angle = 2.0 * std::numbers::pi * to_open_unit(b[2], b[3]);
    const double sign = antithetic_ ? -1.0 : 1.0;
    return {sign * radius * std::cos(angle), sign * radius * std::sin(angle)};
}

CorrelationSpec::CorrelationSpec(double r) : rho(r) {
    if (!(std::abs(r) <= 1.0)) throw ValidationError("correlation must lie in [-1, 1]");
}

std::pair<double, double> draw_pair(const PathStream& stream, std::uint32_t step,
                                    const CorrelationSpec& corr) {
    const auto z = stream.normals(step, channel::kDrivers);
    return {z[0], corr.rho * z[0] + std::sqrt(1.0 - corr.rho * corr.rho) * z[1]};
}

TimeGrid::TimeGrid(double start, double end, double dt, std::vector<double> events) : dt_(dt) {
    if (!(end > start) || !(dt > 0.0)) throw DomainError("TimeGrid: need end > start and dt > 0");
    const auto n = static_cast<long>(std::ceil((end - start) / dt - 1e-9));
    nodes_.reserve(static_cast<std::size_t>(n) + events.size() + 1);
    for (long i = 0; i < n; ++i) nodes_.push_back(start + static_cast<double>(i) * dt);
    nodes_.push_back(end);
    std::sort(events.begin(), events.end());
    for (double e : events) {
        if (e < start || e > end) throw DomainError("TimeGrid: event date outside the grid");
        const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), e);
        if (it != nodes_.end() && std::abs(*it - e) < 1e-9) {
            *it = e;
        } else if (it != nodes_.begin() && std::abs(*(it - 1) - e) < 1e-9) {
            *(it - 1) = e;
        } else {
            nodes_.insert(it, e);
        }
    }
}

std::size_t TimeGrid::index_of(double t) const {
    const auto it = std::lower_bound(nodes_.begin(), nodes_.end(), t - 1e-12);
    if (it == nodes_.end() || std::abs(*it - t) > 1e-12) {
        std::ostringstream msg;
        msg << "TimeGrid: " << t << " is not a grid node";
        throw DomainError(msg.str());
    }
    return static_cast<std::size_t>(it - nodes_.begin());
}

double Estimator::variance() const {
    if (count_ < 2) return 0.0;
    const double n = static_cast<double>(count_);
    const double v = (sum_sq_ - sum_ * sum_ / n) / (n - 1.0);
    return v > 0.0 ? v : 0.0;
}

double Estimator::standard_error() const {
    return count_ ? std::sqrt(variance() / static_cast<double>(count_)) : 0.0;
}

std::vector<Estimator> run_paths(std::uint64_t n_paths, std::size_t n_outputs, std::uint64_t seed,
                                 const PathKernel& kernel, const RunOptions& options) {
    if (options.antithetic && n_paths % 2 != 0) {
        throw ValidationError("run_paths: antithetic sampling needs an even path count");
    }
    const std::uint64_t samples = options.antithetic ? n_paths / 2 : n_paths;
    const std::uint64_t block = std::max<std::uint64_t>(1, options.block_size);
    const std::uint64_t n_blocks = (samples + block - 1) / block;
    std::vector<std::vector<Estimator>> partial(n_blocks, std::vector<Estimator>(n_outputs));

    std::atomic<std::uint64_t> next{0};
    std::mutex error_mutex;
    std::uint64_t error_block = n_blocks;
    std::exception_ptr error;

    auto work = [&] {
        std::vector<double> out(n_outputs);
        std::vector<double> mirror(n_outputs);
        for (;;) {
            const std::uint64_t b = next.fetch_add(1);
            if (b >= n_blocks) return;
            try {
                auto& acc = partial[b];
                const std::uint64_t end = std::min(samples, (b + 1) * block);
                for (std::uint64_t s = b * block; s < end; ++s) {
                    std::fill(out.begin(), out.end(), 0.0);
                    kernel(PathStream(seed, s), out);
                    if (options.antithetic) {
                        std::fill(mirror.begin(), mirror.end(), 0.0);
                        kernel(PathStream(seed, s, true), mirror);
                        for (std::size_t k = 0; k < n_outputs; ++k) out[k] = 0.5 * (out[k] + mirror[k]);
                    }
                    for (std::size_t k = 0; k < n_outputs; ++k) {
                        if (!std::isfinite(out[k])) {
                            std::ostringstream msg;
                            msg << "non-finite payoff on path " << s << " (output " << k
                                << " = " << out[k] << "; outputs:";
                            for (double v : out) msg << ' ' << v;
                            msg << ')';
                            throw NumericError(msg.str());
                        }
                        acc[k].add(out[k]);
                    }
                }
            } catch (...) {
                std::lock_guard lock(error_mutex);
                if (b < error_block) {
                    error_block = b;
                    error = std::current_exception();
                }
            }
        }
    };

    const std::size_t workers = std::max<std::size_t>(1, options.workers);
    if (workers == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }
    if (error) std::rethrow_exception(error);
    if (n_blocks == 0) return std::vector<Estimator>(n_outputs);

    // fixed pairwise tree over block indices
    for (std::uint64_t width = 1; width < n_blocks; width *= 2) {
        for (std::uint64_t i = 0; i + width < n_blocks; i += 2 * width) {
            for (std::size_t k = 0; k < n_outputs; ++k) partial[i][k].merge(partial[i + width][k]);
        }
    }
    return std::move(partial.front());
}

}  // namespace phicredit
