#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "config.hpp"
#include "phicredit/calibrate.hpp"
#include "phicredit/errors.hpp"
#include "setup.hpp"
#include "validate.hpp"

using namespace phicredit;
using namespace phicredit::cli;

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kValidation = 2, kNumeric = 3 };

struct CommonOptions {
    std::string config_path;
    std::string quotes;
    std::string out;
    std::vector<std::string> set;
    std::uint64_t seed = 0;
    bool seed_given = false;
    std::uint64_t paths = 0;
    double dt = 0.0;
    std::size_t workers = 1;
    bool antithetic = false;
};

void add_common(CLI::App* cmd, CommonOptions& o, bool monte_carlo) {
    cmd->add_option("--config", o.config_path, "Run config (key = value lines)");
    cmd->add_option("--quotes", o.quotes, "CDS quotes, CSV or JSON");
    cmd->add_option("--out", o.out, "Output file (default stdout)");
    cmd->add_option("--set", o.set, "Config override key=value (repeatable)");
    if (monte_carlo) {
        cmd->add_option("--seed", o.seed, "Seed (default: mc.seed, then PHICREDIT_SEED, then 1)");
        cmd->add_option("--paths", o.paths, "Monte Carlo paths");
        cmd->add_option("--dt", o.dt, "Time step");
        cmd->add_option("--workers", o.workers, "Worker threads")->check(CLI::PositiveNumber);
        cmd->add_flag("--antithetic", o.antithetic, "Antithetic variates");
    }
}

bool given(CLI::App* cmd, const std::string& name) {
    const CLI::Option* option = cmd->get_option_no_throw(name);
    return option != nullptr && option->count() > 0;
}

Context make_context(const CommonOptions& o, CLI::App* cmd) {
    Context context;
    if (!o.config_path.empty()) context.config = RunConfig::from_file(o.config_path);
    for (const auto& item : o.set) {
        const auto eq = item.find('=');
        if (eq == std::string::npos) throw UsageError("--set expects key=value, got '" + item + "'");
        context.config.set(item.substr(0, eq), item.substr(eq + 1));
    }
    if (!o.quotes.empty()) context.config.set("market.quotes", o.quotes);
    if (given(cmd, "--paths")) context.config.set("mc.paths", std::to_string(o.paths));
    if (given(cmd, "--dt")) context.config.set("mc.dt", num(o.dt));
    if (given(cmd, "--antithetic")) context.config.set("mc.antithetic", "true");
    if (given(cmd, "--seed")) {
        context.config.set("mc.seed", std::to_string(o.seed));
    } else if (!context.config.has("mc.seed")) {
        if (const char* env = std::getenv("PHICREDIT_SEED")) context.config.set("mc.seed", env);
    }
    context.seed = context.config.get_count("mc.seed", 1);
    context.workers = o.workers;
    return context;
}

class Output {
public:
    explicit Output(const std::string& path) {
        if (!path.empty()) {
            file_.open(path);
            if (!file_) throw UsageError("cannot write '" + path + "'");
        }
    }
    std::ostream& stream() { return file_.is_open() ? static_cast<std::ostream&>(file_) : std::cout; }

private:
    std::ofstream file_;
};

int cmd_bootstrap(const CommonOptions& o, CLI::App* cmd, double step, double end) {
    const Context context = make_context(o, cmd);
    const SurvivalCurve curve = load_curve(context.config);
    Output out(o.out);
    out.stream() << "# config_hash=" << context.config.hash() << "\n";
    write_curve_csv(out.stream(), curve, step, end);
    return kOk;
}

int cmd_calibrate(const CommonOptions& o, CLI::App* cmd, const std::string& model, const std::string& init) {
    Context context = make_context(o, cmd);
    if (!init.empty()) {
        const RunConfig extra = RunConfig::from_file(init);
        std::istringstream lines(extra.canonical());
        std::string line;
        while (std::getline(lines, line)) {
            const auto eq = line.find('=');
            if (!context.config.has(line.substr(0, eq))) context.config.set(line.substr(0, eq), line.substr(eq + 1));
        }
    }
    const AffineKind kind = parse_affine_kind(model);
    const SurvivalCurve curve = load_curve(context.config);
    CalibrationOptions options;
    options.fit_times = context.config.get_list("calibrate.fit_times", {});
    options.max_iterations = context.config.get_count("calibrate.max_iterations", options.max_iterations);
    options.restarts = static_cast<int>(context.config.get_count("calibrate.restarts", options.restarts));
    options.tolerance = context.config.get_double("calibrate.tolerance", options.tolerance);
    if (context.config.has("calibrate.penalty_weight")) {
        options.penalty_weight = context.config.get_double("calibrate.penalty_weight", options.penalty_weight);
    }
    options.seed = context.seed;
    const CalibrationResult result =
        fit_parameters(kind, curve, load_cir(context.config, model), load_jumps(context.config, model), options);

    nlohmann::ordered_json doc;
    doc["model"] = to_string(result.kind);
    doc["params"] = {{"kappa", result.params.kappa},
                     {"beta", result.params.beta},
                     {"delta", result.params.delta},
                     {"x0", result.params.x0},
                     {"jump_omega", result.jumps.omega},
                     {"jump_alpha", result.jumps.alpha}};
    doc["feller_satisfied"] = result.params.feller_satisfied();
    doc["objective"] = result.objective;
    doc["constraint"] = {{"violation", result.constraint_violation},
                         {"min_shift", std::isnan(result.min_shift) ? nlohmann::ordered_json() : nlohmann::ordered_json(result.min_shift)}};
    doc["iterations"] = result.iterations;
    doc["converged"] = result.converged;
    doc["config_hash"] = context.config.hash();
    doc["seed"] = context.seed;
    Output out(o.out);
    out.stream() << doc.dump(2) << "\n";
    return kOk;
}

int cmd_epe(const CommonOptions& o, CLI::App* cmd) {
    const Context context = make_context(o, cmd);
    const SurvivalCurve curve = load_curve(context.config);
    const VasicekModel rates = load_rates(context.config);
    const IrsSpec spec = swap_spec(context.config);
    const CvaRun run = epe_profile(spec, rates, curve, mc_settings(context));
    const double recovery = context.config.get_double("market.recovery", 0.40);
    Output out(o.out);
    auto& s = out.stream();
    const std::string tail = "," + std::to_string(context.seed) + "," + context.config.hash() + "\n";
    s << "quantity,t,fixed_rate,value,se,n,seed,config_hash\n";
    for (std::size_t i = 0; i < run.times.size(); ++i) {
        s << "epe," << num(run.times[i]) << "," << num(spec.fixed_rate) << "," << num(run.epe[i].value) << ","
          << num(run.epe[i].standard_error) << "," << run.epe[i].paths << tail;
    }
    std::vector<double> epe;
    for (const auto& r : run.epe) epe.push_back(r.value);
    s << "cva_independent,," << num(spec.fixed_rate) << ","
      << num(cva_independent(run.times, epe, curve, recovery)) << ",," << run.cva_independent.paths << tail;
    return kOk;
}

int cmd_cva(const CommonOptions& o, CLI::App* cmd, const std::vector<double>& rhos,
            const std::vector<std::string>& models) {
    const Context context = make_context(o, cmd);
    const SurvivalCurve curve = load_curve(context.config);
    const VasicekModel rates = load_rates(context.config);
    const IrsSpec spec = swap_spec(context.config);
    std::vector<std::unique_ptr<CreditModel>> owned;
    std::vector<CvaScenario> scenarios;
    for (const auto& name : models) {
        owned.push_back(make_model(name, context.config, curve));
        for (double rho : rhos) scenarios.push_back({owned.back().get(), rho});
    }
    const double recovery = context.config.get_double("market.recovery", 0.40);
    const CvaRun run = run_cva(spec, rates, curve, recovery, scenarios, mc_settings(context));
    Output out(o.out);
    auto& s = out.stream();
    const std::string tail = "," + std::to_string(context.seed) + "," + context.config.hash() + "\n";
    s << "model,params,rho,cva,se,negative_intensity_fraction,n,seed,config_hash\n";
    s << "independent,,," << num(run.cva_independent.value) << "," << num(run.cva_independent.standard_error)
      << ",0," << run.cva_independent.paths << tail;
    for (std::size_t k = 0; k < scenarios.size(); ++k) {
        s << scenarios[k].model->name() << ",\"" << scenarios[k].model->describe() << "\"," << num(scenarios[k].rho)
          << "," << num(run.cva[k].value) << "," << num(run.cva[k].standard_error) << ","
          << num(run.negative_intensity_fraction[k]) << "," << run.cva[k].paths << tail;
    }
    return kOk;
}

int cmd_cdso(const CommonOptions& o, CLI::App* cmd, double ta, double tb, const std::vector<double>& strikes_bps,
             const std::string& model, const std::string& eta_text) {
    Context context = make_context(o, cmd);
    if (!eta_text.empty()) context.config.set("phi.eta", eta_text);
    const SurvivalCurve curve = load_curve(context.config);
    const DiscountCurve discount = cds_discount(context.config);
    const auto credit = make_model(model, context.config, curve);
    CdsOptionSpec spec;
    spec.expiry = ta;
    spec.maturity = tb;
    spec.recovery = context.config.get_double("market.recovery", spec.recovery);
    spec.premium_freq = context.config.get_double("market.premium_freq", spec.premium_freq);
    const CdsLegs forward = forward_cds(curve, spec, discount);
    const double s0 = forward.par_spread();
    std::vector<double> strikes;
    for (double k : strikes_bps) strikes.push_back(k < 0.0 ? s0 : 1e-4 * k);
    const CdsOptionRun run = cds_option_prices(*credit, spec, strikes, mc_settings(context), discount);

    Output out(o.out);
    auto& s = out.stream();
    const std::string tail = "," + std::to_string(context.seed) + "," + context.config.hash() + "\n";
    s << "model,params,ta,tb,strike_bps,forward_bps,annuity,payer_bps,payer_se_bps,receiver_bps,receiver_se_bps,"
         "implied_vol,n,seed,config_hash\n";
    for (std::size_t k = 0; k < strikes.size(); ++k) {
        std::string vol;
        try {
            vol = num(implied_vol(run.payer[k].value, s0, strikes[k], forward.risky_duration, ta));
        } catch (const DomainError&) {
            vol = "nan";
        }
        s << credit->name() << ",\"" << credit->describe() << "\"," << num(ta) << "," << num(tb) << ","
          << num(1e4 * strikes[k]) << "," << num(1e4 * s0) << "," << num(forward.risky_duration) << ","
          << num(1e4 * run.payer[k].value) << "," << num(1e4 * run.payer[k].standard_error) << ","
          << num(1e4 * run.receiver[k].value) << "," << num(1e4 * run.receiver[k].standard_error) << "," << vol
          << "," << run.payer[k].paths << tail;
    }
    return kOk;
}

int cmd_validate(const CommonOptions& o, CLI::App* cmd, const std::string& suite) {
    const Context context = make_context(o, cmd);
    const auto rows = run_validation(context, suite);
    Output out(o.out);
    auto& s = out.stream();
    s << "suite,check,value,threshold,pass,seed,config_hash\n";
    bool ok = true;
    for (const auto& r : rows) {
        s << r.suite << ",\"" << r.check << "\"," << num(r.value) << "," << num(r.threshold) << ","
          << (r.pass ? "pass" : r.advisory ? "warn" : "FAIL") << "," << context.seed << ","
          << context.config.hash() << "\n";
        ok = ok && (r.pass || r.advisory);
    }
    return ok ? kOk : kValidation;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Credit model calibration and pricing (Phi-martingale, PS-JCIR, TC-CIR)"};
    app.require_subcommand(1);

    CommonOptions o;
    auto* boot = app.add_subcommand("bootstrap", "Bootstrap a survival curve from CDS quotes");
    add_common(boot, o, false);
    double step = 0.25, end = 10.0;
    boot->add_option("--step", step, "Output grid step")->check(CLI::PositiveNumber);
    boot->add_option("--end", end, "Output grid end")->check(CLI::PositiveNumber);

    auto* cal = app.add_subcommand("calibrate", "Fit PS-JCIR or TC-CIR parameters to the bootstrapped curve");
    add_common(cal, o, true);
    std::string cal_model = "ps-jcir", init;
    cal->add_option("--model", cal_model, "ps-jcir or tc-cir");
    cal->add_option("--init", init, "Config file with the initial parameters");

    auto* epe = app.add_subcommand("epe", "Discounted expected positive exposure of the payer swap");
    add_common(epe, o, true);

    auto* cva = app.add_subcommand("cva", "CVA with wrong-way risk");
    add_common(cva, o, true);
    std::vector<double> rhos{0.0};
    std::vector<std::string> cva_models{"phi"};
    cva->add_option("--rho", rhos, "Correlations")->delimiter(',');
    cva->add_option("--model", cva_models, "Credit models")->delimiter(',');

    auto* cdso = app.add_subcommand("cdso", "Payer and receiver CDS option prices");
    add_common(cdso, o, true);
    double ta = 1.0, tb = 5.0;
    std::vector<double> strikes{-1.0};
    std::string cdso_model = "phi", eta;
    cdso->add_option("--ta", ta, "Option expiry and protection start");
    cdso->add_option("--tb", tb, "Protection end");
    cdso->add_option("--strikes", strikes, "Strikes in bps; negative means at the money")->delimiter(',');
    cdso->add_option("--model", cdso_model, "phi, ps-jcir or tc-cir");
    cdso->add_option("--eta", eta, "Phi volatility (overrides phi.eta)");

    auto* val = app.add_subcommand("validate", "Run the invariant and diagnostic suites");
    add_common(val, o, true);
    std::string suite = "all";
    val->add_option("--suite", suite, "all, bootstrap, calibration, martingale, dgc, lemma or convergence");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*boot) return cmd_bootstrap(o, boot, step, end);
        if (*cal) return cmd_calibrate(o, cal, cal_model, init);
        if (*epe) return cmd_epe(o, epe);
        if (*cva) return cmd_cva(o, cva, rhos, cva_models);
        if (*cdso) return cmd_cdso(o, cdso, ta, tb, strikes, cdso_model, eta);
        if (*val) return cmd_validate(o, val, suite);
    } catch (const UsageError& e) {
        std::cerr << "usage error: " << e.what() << "\n";
        return kUsage;
    } catch (const ParseError& e) {
        std::cerr << "input error: " << e.what() << "\n";
        return kUsage;
    } catch (const ValidationError& e) {
        std::cerr << "validation error: " << e.what() << "\n";
        return kValidation;
    } catch (const BootstrapError& e) {
        std::cerr << "bootstrap error at T=" << e.maturity() << ": " << e.what() << "\n";
        return kValidation;
    } catch (const std::exception& e) {
        std::cerr << "numeric error: " << e.what() << "\n";
        return kNumeric;
    }
    return kUsage;
}
