#pragma once

#include <cmath>
#include <iosfwd>
#include <span>
#include <vector>

namespace phicredit {

/// A par CDS quote. Spread is a decimal rate (191.9 bps -> 0.01919).
struct CdsQuote {
    double maturity;
    double spread;
};

/// Risk-free discount curve: either a flat continuously-compounded yield or a
/// table of zero rates interpolated linearly (flat beyond the table ends).
class DiscountCurve {
public:
    explicit DiscountCurve(double flat_yield = 0.0);
    DiscountCurve(std::vector<double> times, std::vector<double> zero_rates);

    double discount(double t) const;
    double zero_rate(double t) const;
    /// Instantaneous forward f(0, t) = d/dt (t z(t)).
    double forward(double t) const;
    /// True when P(t) == 1 for every t.
    bool is_unit() const;

private:
    std::vector<double> times_;
    std::vector<double> rates_;
};

/// Survival curve G(t) = exp(-int_0^t h) with piecewise-constant hazards.
/// Hazard i applies on [t_{i-1}, t_i) with t_0 = 0; the last hazard is
/// extended beyond the last knot.
class SurvivalCurve {
public:
    struct Point {
        double survival;
        double hazard;
        bool extrapolated;
    };

    SurvivalCurve(std::vector<double> knots, std::vector<double> hazards);
    static SurvivalCurve flat(double hazard, double last_knot = 1.0);

    double survival(double t) const { return std::exp(-integrated_hazard(t)); }
    double hazard(double t) const;
    double integrated_hazard(double t) const;
    Point at(double t) const;

    /// Smallest t with G(t) = p. Returns +inf when p is below the curve's
    /// infimum (zero terminal hazard).
    double inverse(double p) const;

    std::span<const double> knots() const { return knots_; }
    std::span<const double> hazards() const { return hazards_; }
    double last_knot() const { return knots_.back(); }

private:
    std::size_t segment(double t) const;

    std::vector<double> knots_;       // t_1 < ... < t_n
    std::vector<double> hazards_;     // h_1 ... h_n
    std::vector<double> cumulative_;  // int_0^{t_i} h
};

/// Protection and premium legs of a CDS per unit notional, expressed through
/// the conditional survival curve Qbar_t(u) seen from valuation time t.
struct CdsLegs {
    double protection;
    double risky_duration;

    double value(double spread) const { return protection - spread * risky_duration; }
    double par_spread() const;
};

/// Premium schedule of a CDS running over [start, end], plus the sub-grid on
/// which the protection leg is integrated. Discount factors are the forward
/// factors P(u)/P(valuation_time) of a deterministic curve.
class CdsSchedule {
public:
    CdsSchedule(double start, double end, double premium_freq, const DiscountCurve& discount,
                double valuation_time, double max_substep = 0.01);

    /// Times at which Qbar must be supplied, ascending; nodes().front() == start.
    std::span<const double> nodes() const { return nodes_; }
    std::span<const double> premium_dates() const { return premium_dates_; }

    /// Legs given Qbar evaluated at nodes(). When `strict`, throws NumericError
    /// if Qbar increases between consecutive nodes by more than 1e-8.
    CdsLegs legs(std::span<const double> qbar, double recovery, bool strict = true) const;

private:
    std::vector<double> nodes_;
    std::vector<double> node_discount_;
    std::vector<double> premium_dates_;
    std::vector<std::size_t> premium_index_;  // index into nodes_ of each premium date
    std::vector<double> accrual_;
    std::vector<double> mid_discount_;
};

/// Reads quotes from CSV (`maturity_years,spread_bps`, header optional) or
/// JSON (array of {maturity_years, spread_bps}, optionally under "quotes").
/// Spreads are converted from bps to decimals and sorted by maturity.
std::vector<CdsQuote> parse_quotes(std::istream& in);

struct BootstrapOptions {
    double recovery = 0.40;
    double premium_freq = 4.0;
    DiscountCurve discount{};
};

/// Piecewise-constant hazard bootstrap, shortest maturity first.
SurvivalCurve bootstrap(std::span<const CdsQuote> quotes, const BootstrapOptions& options = {});

/// Legs of the spot-starting CDS [0, maturity] priced off G.
CdsLegs spot_cds_legs(const SurvivalCurve& curve, double maturity,
                      const BootstrapOptions& options);

/// CSV `t,G,h` on the grid 0, step, 2 step, ... , end.
void write_curve_csv(std::ostream& out, const SurvivalCurve& curve, double step, double end);

}  // namespace phicredit
