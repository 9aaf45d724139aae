#pragma once

#include <array>
#include <cstdint>
#include <functional>
#include <span>
#include <utility>
#include <vector>

namespace phicredit {

/// Philox4x32-10 counter-based generator (Salmon et al., SC'11).
std::array<std::uint32_t, 4> philox4x32(std::array<std::uint32_t, 4> counter,
                                        std::array<std::uint32_t, 2> key);

/// Random stream of a single Monte Carlo path. Every draw is a pure function
/// of (seed, path, step, channel, sub), so any path can be regenerated in
/// isolation and worker scheduling never changes the numbers.
class PathStream {
public:
    PathStream(std::uint64_t seed, std::uint64_t path, bool antithetic = false)
        : seed_(seed), path_(path), antithetic_(antithetic) {}

    /// Two independent standard normals (Box-Muller on a single Philox block).
    std::array<double, 2> normals(std::uint32_t step, std::uint32_t channel,
                                  std::uint32_t sub = 0) const;
    /// Two independent uniforms on the open interval (0, 1).
    std::array<double, 2> uniforms(std::uint32_t step, std::uint32_t channel,
                                   std::uint32_t sub = 0) const;

    std::uint64_t path() const { return path_; }
    bool antithetic() const { return antithetic_; }

private:
    std::array<std::uint32_t, 4> block(std::uint32_t step, std::uint32_t channel,
                                       std::uint32_t sub) const;

    std::uint64_t seed_;
    std::uint64_t path_;
    bool antithetic_;
};

/// Stream channels used by the simulators.
namespace channel {
inline constexpr std::uint32_t kDrivers = 0;    // (rate, credit) Brownian pair
inline constexpr std::uint32_t kJumps = 1;      // jump counts and sizes
inline constexpr std::uint32_t kThreshold = 2;  // default thresholds
inline constexpr std::uint32_t kAux = 3;        // oracle / diagnostic draws
}  // namespace channel

/// Correlation between the rate driver W and the credit driver B.
struct CorrelationSpec {
    double rho = 0.0;
    explicit CorrelationSpec(double r = 0.0);
};

/// Jointly standard normal (z_rate, z_credit) with correlation rho:
/// z_credit = rho z_rate + sqrt(1 - rho^2) z_indep.
std::pair<double, double> draw_pair(const PathStream& stream, std::uint32_t step,
                                    const CorrelationSpec& corr);

/// Simulation time grid: a uniform grid of step dt over [start, end] with
/// every event date inserted as an exact node.
class TimeGrid {
public:
    TimeGrid(double start, double end, double dt, std::vector<double> events = {});

    std::span<const double> nodes() const { return nodes_; }
    std::size_t size() const { return nodes_.size(); }
    double operator[](std::size_t i) const { return nodes_[i]; }
    double start() const { return nodes_.front(); }
    double end() const { return nodes_.back(); }
    double dt() const { return dt_; }

    /// Index of the node equal to t (within 1e-12); throws DomainError otherwise.
    std::size_t index_of(double t) const;

private:
    std::vector<double> nodes_;
    double dt_;
};

/// Running sum / sum of squares / count.
class Estimator {
public:
    void add(double x) {
        sum_ += x;
        sum_sq_ += x * x;
        ++count_;
    }
    void merge(const Estimator& other) {
        sum_ += other.sum_;
        sum_sq_ += other.sum_sq_;
        count_ += other.count_;
    }

    std::uint64_t count() const { return count_; }
    double sum() const { return sum_; }
    double mean() const { return count_ ? sum_ / static_cast<double>(count_) : 0.0; }
    double variance() const;
    double standard_error() const;

private:
    double sum_ = 0.0;
    double sum_sq_ = 0.0;
    std::uint64_t count_ = 0;
};

struct RunOptions {
    std::size_t workers = 1;
    std::size_t block_size = 4096;
    /// Pairs each path with its mirrored twin and records their average as one sample.
    bool antithetic = false;
};

/// Fills `out` (one slot per estimator) for the path driven by `stream`.
using PathKernel = std::function<void(const PathStream& stream, std::span<double> out)>;

/// Runs n_paths paths (n_paths / 2 antithetic pairs when enabled). Paths are
/// summed sequentially inside fixed-size blocks and blocks are merged by a
/// fixed pairwise tree, so the result is bit-identical for any worker count.
/// A non-finite output raises NumericError naming the path.
std::vector<Estimator> run_paths(std::uint64_t n_paths, std::size_t n_outputs, std::uint64_t seed,
                                 const PathKernel& kernel, const RunOptions& options = {});

}  // namespace phicredit
