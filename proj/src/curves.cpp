#include "phicredit/curves.hpp"

#include <algorithm>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "phicredit/errors.hpp"
#include "phicredit/math.hpp"

namespace phicredit {

// ---------------------------------------------------------------------------
// DiscountCurve

DiscountCurve::DiscountCurve(double flat_yield) : times_{0.0}, rates_{flat_yield} {}

DiscountCurve::DiscountCurve(std::vector<double> times, std::vector<double> zero_rates)
    : times_(std::move(times)), rates_(std::move(zero_rates)) {
    if (times_.empty() || times_.size() != rates_.size()) {
        throw ValidationError("DiscountCurve: times and zero rates must be non-empty and aligned");
    }
    for (std::size_t i = 1; i < times_.size(); ++i) {
        if (!(times_[i] > times_[i - 1])) {
            throw ValidationError("DiscountCurve: times must be strictly increasing");
        }
    }
}

double DiscountCurve::zero_rate(double t) const {
    if (times_.size() == 1 || t <= times_.front()) return rates_.front();
    if (t >= times_.back()) return rates_.back();
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    const double w = (t - times_[i - 1]) / (times_[i] - times_[i - 1]);
    return rates_[i - 1] + w * (rates_[i] - rates_[i - 1]);
}

double DiscountCurve::discount(double t) const { return std::exp(-zero_rate(t) * t); }

double DiscountCurve::forward(double t) const {
    if (times_.size() == 1 || t < times_.front() || t >= times_.back()) return zero_rate(t);
    const auto it = std::upper_bound(times_.begin(), times_.end(), t);
    const std::size_t i = static_cast<std::size_t>(it - times_.begin());
    const double slope = (rates_[i] - rates_[i - 1]) / (times_[i] - times_[i - 1]);
    return zero_rate(t) + slope * t;
}

bool DiscountCurve::is_unit() const {
    return std::all_of(rates_.begin(), rates_.end(), [](double r) { return r == 0.0; });
}

// ---------------------------------------------------------------------------
// SurvivalCurve

SurvivalCurve::SurvivalCurve(std::vector<double> knots, std::vector<double> hazards)
    : knots_(std::move(knots)), hazards_(std::move(hazards)) {
    if (knots_.empty() || knots_.size() != hazards_.size()) {
        throw ValidationError("SurvivalCurve: knots and hazards must be non-empty and aligned");
    }
    cumulative_.resize(knots_.size());
    double prev = 0.0;
    double acc = 0.0;
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        if (!(knots_[i] > prev)) {
            throw ValidationError("SurvivalCurve: knots must be positive and strictly increasing");
        }
        if (!(hazards_[i] >= 0.0) || !std::isfinite(hazards_[i])) {
            throw ValidationError("SurvivalCurve: hazards must be finite and non-negative");
        }
        acc += hazards_[i] * (knots_[i] - prev);
        cumulative_[i] = acc;
        prev = knots_[i];
    }
}

SurvivalCurve SurvivalCurve::flat(double hazard, double last_knot) {
    return SurvivalCurve({last_knot}, {hazard});
}

std::size_t SurvivalCurve::segment(double t) const {
    const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
    return std::min(static_cast<std::size_t>(it - knots_.begin()), knots_.size() - 1);
}

double SurvivalCurve::hazard(double t) const { return hazards_[segment(t)]; }

double SurvivalCurve::integrated_hazard(double t) const {
    if (t <= 0.0) return 0.0;
    const std::size_t i = segment(t);
    const double start = i == 0 ? 0.0 : knots_[i - 1];
    const double base = i == 0 ? 0.0 : cumulative_[i - 1];
    return base + hazards_[i] * (t - start);
}

SurvivalCurve::Point SurvivalCurve::at(double t) const {
    return {survival(t), hazard(t), t > knots_.back()};
}

double SurvivalCurve::inverse(double p) const {
    if (!(p > 0.0 && p <= 1.0)) throw DomainError("SurvivalCurve::inverse: p must lie in (0, 1]");
    const double target = -std::log(p);
    if (target == 0.0) return 0.0;
    double start = 0.0;
    double base = 0.0;
    for (std::size_t i = 0; i < knots_.size(); ++i) {
        const bool last = i + 1 == knots_.size();
        if (target <= cumulative_[i] || last) {
            if (hazards_[i] == 0.0) {
                if (target <= base) return start;
                if (last) return std::numeric_limits<double>::infinity();
            } else {
                return start + (target - base) / hazards_[i];
            }
        }
        start = knots_[i];
        base = cumulative_[i];
    }
    return std::numeric_limits<double>::infinity();
}

// ---------------------------------------------------------------------------
// CDS legs

double CdsLegs::par_spread() const {
    if (!(risky_duration > 0.0)) throw DomainError("par spread: risky duration must be positive");
    return protection / risky_duration;
}

CdsSchedule::CdsSchedule(double start, double end, double premium_freq,
                         const DiscountCurve& discount, double valuation_time, double max_substep) {
    if (!(end > start) || !(premium_freq > 0.0)) {
        throw DomainError("CdsSchedule: need end > start and positive premium frequency");
    }
    // Roll back from maturity; a short first period absorbs any remainder.
    const double period = 1.0 / premium_freq;
    std::vector<double> dates{end};
    for (int k = 1;; ++k) {
        const double d = end - k * period;
        if (d <= start + 1e-9) break;
        dates.push_back(d);
    }
    std::reverse(dates.begin(), dates.end());
    premium_dates_ = dates;

    const double p_value = discount.discount(valuation_time);
    const bool unit = discount.is_unit();
    auto forward_df = [&](double u) { return discount.discount(u) / p_value; };

    nodes_.push_back(start);
    double prev = start;
    for (double date : premium_dates_) {
        const double len = date - prev;
        const int pieces = unit ? 1 : std::max(1, static_cast<int>(std::ceil(len / max_substep - 1e-9)));
        for (int j = 1; j < pieces; ++j) nodes_.push_back(prev + len * j / pieces);
        nodes_.push_back(date);
        premium_index_.push_back(nodes_.size() - 1);
        accrual_.push_back(len);
        mid_discount_.push_back(forward_df(prev + 0.5 * len));
        prev = date;
    }
    node_discount_.reserve(nodes_.size());
    for (double u : nodes_) node_discount_.push_back(forward_df(u));
}

CdsLegs CdsSchedule::legs(std::span<const double> qbar, double recovery, bool strict) const {
    if (qbar.size() != nodes_.size()) throw DomainError("CdsSchedule::legs: size mismatch");
    double protection = 0.0;
    for (std::size_t j = 1; j < nodes_.size(); ++j) {
        const double drop = qbar[j - 1] - qbar[j];
        if (strict && drop < -1e-8) {
            std::ostringstream msg;
            msg << "CDS legs: conditional survival increases at u=" << nodes_[j] << " by "
                << -drop;
            throw NumericError(msg.str());
        }
        protection += 0.5 * (node_discount_[j - 1] + node_discount_[j]) * drop;
    }
    protection *= 1.0 - recovery;

    double duration = 0.0;
    std::size_t prev = 0;
    for (std::size_t i = 0; i < premium_index_.size(); ++i) {
        const std::size_t k = premium_index_[i];
        duration += accrual_[i] * node_discount_[k] * qbar[k];
        // accrual on default, paid at mid-period
        duration += 0.5 * accrual_[i] * mid_discount_[i] * (qbar[prev] - qbar[k]);
        prev = k;
    }
    return {protection, duration};
}

// ---------------------------------------------------------------------------
// Quote parsing

namespace {

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(" \t\r\n");
    if (b == std::string::npos) return {};
    const auto e = s.find_last_not_of(" \t\r\n");
    return s.substr(b, e - b + 1);
}

bool parse_double(const std::string& text, double& out) {
    const std::string t = trim(text);
    if (t.empty()) return false;
    std::istringstream is(t);
    is.imbue(std::locale::classic());
    is >> out;
    return !is.fail() && is.eof() && std::isfinite(out);
}

std::vector<CdsQuote> finish_quotes(std::vector<CdsQuote> quotes) {
    std::sort(quotes.begin(), quotes.end(),
              [](const CdsQuote& a, const CdsQuote& b) { return a.maturity < b.maturity; });
    for (std::size_t i = 1; i < quotes.size(); ++i) {
        if (quotes[i].maturity == quotes[i - 1].maturity) {
            std::ostringstream msg;
            msg << "duplicate CDS maturity " << quotes[i].maturity;
            throw ValidationError(msg.str());
        }
    }
    return quotes;
}

CdsQuote make_quote(double maturity, double spread_bps, const std::string& where) {
    if (!(maturity > 0.0)) throw ValidationError(where + ": maturity must be positive");
    if (!(spread_bps > 0.0)) throw ValidationError(where + ": spread must be positive");
    return {maturity, spread_bps * 1e-4};
}

std::vector<CdsQuote> parse_json_quotes(const std::string& text) {
    nlohmann::json doc;
    try {
        doc = nlohmann::json::parse(text);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("quotes JSON: ") + e.what());
    }
    const nlohmann::json& rows = doc.is_object() && doc.contains("quotes") ? doc["quotes"] : doc;
    if (!rows.is_array()) throw ParseError("quotes JSON: expected an array of quotes");
    std::vector<CdsQuote> quotes;
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& row = rows[i];
        const std::string where = "quote " + std::to_string(i + 1);
        if (!row.is_object() || !row.contains("maturity_years") || !row.contains("spread_bps") ||
            !row["maturity_years"].is_number() || !row["spread_bps"].is_number()) {
            throw ParseError(where + ": expected numeric maturity_years and spread_bps");
        }
        quotes.push_back(make_quote(row["maturity_years"].get<double>(),
                                    row["spread_bps"].get<double>(), where));
    }
    return quotes;
}

}  // namespace

std::vector<CdsQuote> parse_quotes(std::istream& in) {
    const std::string text{std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
    const auto first = text.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    if (text[first] == '[' || text[first] == '{') return finish_quotes(parse_json_quotes(text));

    std::vector<CdsQuote> quotes;
    std::istringstream lines(text);
    std::string line;
    int line_no = 0;
    while (std::getline(lines, line)) {
        ++line_no;
        const std::string row = trim(line);
        if (row.empty() || row.front() == '#') continue;
        const auto comma = row.find(',');
        const std::string where = "line " + std::to_string(line_no);
        if (comma == std::string::npos || row.find(',', comma + 1) != std::string::npos) {
            throw ParseError(where + ": expected two comma-separated fields");
        }
        const std::string a = trim(row.substr(0, comma));
        const std::string b = trim(row.substr(comma + 1));
        if (quotes.empty() && a == "maturity_years" && b == "spread_bps") continue;
        double maturity = 0.0;
        double spread = 0.0;
        if (!parse_double(a, maturity)) throw ParseError(where + ": non-numeric maturity '" + a + "'");
        if (!parse_double(b, spread)) throw ParseError(where + ": non-numeric spread '" + b + "'");
        quotes.push_back(make_quote(maturity, spread, where));
    }
    return finish_quotes(std::move(quotes));
}

// ---------------------------------------------------------------------------
// Bootstrap

namespace {

CdsLegs legs_on_curve(const SurvivalCurve& curve, double maturity, const BootstrapOptions& o) {
    const CdsSchedule schedule(0.0, maturity, o.premium_freq, o.discount, 0.0);
    std::vector<double> q;
    q.reserve(schedule.nodes().size());
    for (double u : schedule.nodes()) q.push_back(curve.survival(u));
    return schedule.legs(q, o.recovery);
}

}  // namespace

CdsLegs spot_cds_legs(const SurvivalCurve& curve, double maturity, const BootstrapOptions& o) {
    return legs_on_curve(curve, maturity, o);
}

SurvivalCurve bootstrap(std::span<const CdsQuote> quotes, const BootstrapOptions& options) {
    if (quotes.empty()) throw ValidationError("bootstrap: at least one quote is required");
    if (!(options.recovery >= 0.0 && options.recovery < 1.0)) {
        throw ValidationError("bootstrap: recovery must lie in [0, 1)");
    }
    constexpr double kMaxHazard = 10.0;
    std::vector<double> knots;
    std::vector<double> hazards;
    double prev = 0.0;
    for (const CdsQuote& q : quotes) {
        if (!(q.maturity > prev)) throw ValidationError("bootstrap: maturities must increase");
        if (!(q.spread >= 0.0)) throw ValidationError("bootstrap: spreads must be non-negative");
        knots.push_back(q.maturity);
        hazards.push_back(0.0);
        auto residual = [&](double h) {
            hazards.back() = h;
            const SurvivalCurve trial(knots, hazards);
            return legs_on_curve(trial, q.maturity, options).value(q.spread);
        };
        const double at_zero = residual(0.0);
        if (at_zero > 0.0) {
            std::ostringstream msg;
            msg << "bootstrap: quote at maturity " << q.maturity
                << " implies a negative hazard (inconsistent with shorter quotes)";
            throw BootstrapError(msg.str(), q.maturity);
        }
        if (at_zero == 0.0) {
            hazards.back() = 0.0;
        } else {
            if (residual(kMaxHazard) < 0.0) {
                std::ostringstream msg;
                msg << "bootstrap: no hazard in [0, " << kMaxHazard << "] reprices maturity "
                    << q.maturity;
                throw BootstrapError(msg.str(), q.maturity);
            }
            hazards.back() = bisect(residual, 0.0, kMaxHazard, 1e-14);
        }
        prev = q.maturity;
    }
    return SurvivalCurve(std::move(knots), std::move(hazards));
}

void write_curve_csv(std::ostream& out, const SurvivalCurve& curve, double step, double end) {
    out << "t,G,h\n" << std::setprecision(17);
    const auto n = static_cast<long>(std::floor(end / step + 1e-9));
    for (long i = 0; i <= n; ++i) {
        const double t = i * step;
        out << t << ',' << curve.survival(t) << ',' << curve.hazard(t) << '\n';
    }
}

}  // namespace phicredit
