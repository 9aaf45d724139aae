#pragma once

#include <memory>
#include <string>
#include <vector>

#include "config.hpp"
#include "phicredit/credit.hpp"
#include "phicredit/curves.hpp"
#include "phicredit/pricing.hpp"
#include "phicredit/rates.hpp"

namespace phicredit::cli {

/// Effective settings shared by every subcommand.
struct Context {
    RunConfig config;
    std::uint64_t seed = 1;
    std::size_t workers = 1;
};

std::string default_quotes_path();

BootstrapOptions bootstrap_options(const RunConfig& config);
SurvivalCurve load_curve(const RunConfig& config);
VasicekModel load_rates(const RunConfig& config);
DiscountCurve cds_discount(const RunConfig& config);
McSettings mc_settings(const Context& context);
IrsSpec swap_spec(const RunConfig& config);

Volatility load_eta(const RunConfig& config, const std::string& key = "phi.eta", double fallback = 0.5);
CirParams load_cir(const RunConfig& config, const std::string& model);
JumpParams load_jumps(const RunConfig& config, const std::string& model);

/// "phi", "ps-jcir" or "tc-cir"; Phi uses `eta` when given, else phi.eta.
std::unique_ptr<CreditModel> make_model(const std::string& name, const RunConfig& config, const SurvivalCurve& curve,
                                        const Volatility* eta = nullptr);

/// Numbers formatted with 17 significant digits.
std::string num(double x);
/// Numbers formatted with %g, for labels.
std::string short_num(double x);

}  // namespace phicredit::cli
