#include "setup.hpp"

#include <cstdio>
#include <fstream>

#include "phicredit/errors.hpp"

namespace phicredit::cli {

std::string default_quotes_path() { return std::string(PHICREDIT_DATA_DIR) + "/ford_2018-11-12.csv"; }

BootstrapOptions bootstrap_options(const RunConfig& config) {
    BootstrapOptions options;
    options.recovery = config.get_double("market.recovery", 0.40);
    options.premium_freq = config.get_double("market.premium_freq", 4.0);
    options.discount = cds_discount(config);
    return options;
}

SurvivalCurve load_curve(const RunConfig& config) {
    const std::string path = config.get_string("market.quotes", default_quotes_path());
    std::ifstream in(path);
    if (!in) throw UsageError("market.quotes: cannot read '" + path + "'");
    const auto quotes = parse_quotes(in);
    return bootstrap(quotes, bootstrap_options(config));
}

DiscountCurve cds_discount(const RunConfig& config) { return DiscountCurve(config.get_double("market.yield", 0.0)); }

VasicekModel load_rates(const RunConfig& config) {
    VasicekParams p;
    p.gamma = config.get_double("rates.gamma", p.gamma);
    p.theta = config.get_double("rates.theta", p.theta);
    p.sigma = config.get_double("rates.sigma", p.sigma);
    p.r0 = config.get_double("rates.r0", p.r0);
    if (config.get_string("rates.flat_yield", "0.03") == "none") return VasicekModel(p);
    return VasicekModel(p, DiscountCurve(config.get_double("rates.flat_yield", 0.03)));
}

McSettings mc_settings(const Context& context) {
    McSettings mc;
    mc.paths = context.config.get_count("mc.paths", mc.paths);
    mc.dt = context.config.get_double("mc.dt", mc.dt);
    mc.antithetic = context.config.get_bool("mc.antithetic", false);
    mc.seed = context.seed;
    mc.workers = context.workers;
    if (mc.paths == 0) throw UsageError("mc.paths must be positive");
    if (!(mc.dt > 0.0)) throw UsageError("mc.dt must be positive");
    return mc;
}

IrsSpec swap_spec(const RunConfig& config) {
    IrsSpec spec;
    spec.start = config.get_double("swap.start", spec.start);
    spec.end = config.get_double("swap.end", spec.end);
    spec.delta = config.get_double("swap.delta", spec.delta);
    spec.notional = config.get_double("swap.notional", spec.notional);
    if (config.has("swap.fixed_rate")) {
        spec.fixed_rate = config.get_double("swap.fixed_rate", 0.0);
    } else {
        spec.fixed_rate = par_swap_rate(spec, load_rates(config));
    }
    return spec;
}

Volatility load_eta(const RunConfig& config, const std::string& key, double fallback) {
    const auto values = config.get_list(key, {fallback});
    if (values.size() == 1) return Volatility(values[0]);
    if (values.size() % 2 != 0) throw UsageError("'" + key + "' must be a scalar or a list of (t, eta) pairs");
    std::vector<double> starts, etas;
    for (std::size_t i = 0; i < values.size(); i += 2) {
        starts.push_back(values[i]);
        etas.push_back(values[i + 1]);
    }
    return Volatility(std::move(starts), std::move(etas));
}

namespace {

double affine_value(const RunConfig& config, const std::string& model, const std::string& field, double fallback) {
    // <model>.<field> wins over the shared cir.<field>.
    if (auto v = config.find_double(model + "." + field)) return *v;
    return config.get_double("cir." + field, fallback);
}

}  // namespace

CirParams load_cir(const RunConfig& config, const std::string& model) {
    CirParams published = model == "tc-cir" ? CirParams{0.0624, 0.2975, 0.3343, 0.0}
                                            : CirParams{0.4382, 0.0086, 0.0396, 0.1051};
    CirParams p;
    p.kappa = affine_value(config, model, "kappa", published.kappa);
    p.beta = affine_value(config, model, "beta", published.beta);
    p.delta = affine_value(config, model, "delta", published.delta);
    p.x0 = affine_value(config, model, "x0", published.x0);
    return p;
}

JumpParams load_jumps(const RunConfig& config, const std::string& model) {
    const JumpParams published = model == "tc-cir" ? JumpParams{0.0, 1.0} : JumpParams{9.5619e-10, 3.1508e-10};
    return {affine_value(config, model, "jump_omega", published.omega),
            affine_value(config, model, "jump_alpha", published.alpha)};
}

std::unique_ptr<CreditModel> make_model(const std::string& name, const RunConfig& config, const SurvivalCurve& curve,
                                        const Volatility* eta) {
    if (name == "phi") {
        return std::make_unique<PhiCreditModel>(PhiModel(curve, eta ? *eta : load_eta(config)));
    }
    if (name == "ps-jcir") {
        return std::make_unique<ShiftedJcirModel>(load_cir(config, name), load_jumps(config, name), curve);
    }
    if (name == "tc-cir") {
        return std::make_unique<TimeChangedCirModel>(load_cir(config, name), load_jumps(config, name), curve,
                                                     config.get_double("tc-cir.max_clock_step", 0.01));
    }
    throw UsageError("unknown model '" + name + "' (expected phi, ps-jcir or tc-cir)");
}

std::string num(double x) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%.17g", x);
    return buffer;
}

std::string short_num(double x) {
    char buffer[32];
    std::snprintf(buffer, sizeof buffer, "%g", x);
    return buffer;
}

}  // namespace phicredit::cli
