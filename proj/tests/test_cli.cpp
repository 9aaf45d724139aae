#include <doctest.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "config.hpp"

using phicredit::cli::RunConfig;
using phicredit::cli::UsageError;

namespace {

struct Outcome {
    int code;
    std::string out;
};

Outcome run_cli(const std::string& args) {
    const std::string command = std::string(PHICREDIT_CLI) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(command.c_str(), "r");
    REQUIRE(pipe != nullptr);
    std::string out;
    char buffer[4096];
    while (std::fgets(buffer, sizeof buffer, pipe)) out += buffer;
    const int status = pclose(pipe);
    return {WIFEXITED(status) ? WEXITSTATUS(status) : -1, out};
}

}  // namespace

TEST_SUITE("cli") {
    TEST_CASE("config parsing") {
        const auto config = RunConfig::from_string("# run\nmc.paths = 2000\nphi.eta = 0, 0.2, 1, 0.3  # pairs\n\nrates.sigma=0.1\n");
        CHECK(config.get_count("mc.paths", 1) == 2000);
        CHECK(config.get_double("rates.sigma", 0.0) == 0.1);
        CHECK(config.get_double("rates.gamma", 0.4) == 0.4);
        CHECK(config.get_list("phi.eta", {}) == std::vector<double>{0.0, 0.2, 1.0, 0.3});
        CHECK_THROWS_AS(RunConfig::from_string("no equals sign"), UsageError);
        CHECK_THROWS_AS(RunConfig::from_string("mc.paths = lots").get_count("mc.paths", 1), UsageError);
        CHECK_THROWS_AS(RunConfig::from_string("mc.paths = 2.5").get_count("mc.paths", 1), UsageError);
        try {
            RunConfig::from_string("rates.sigma = abc").get_double("rates.sigma", 0.0);
        } catch (const UsageError& e) {
            CHECK(std::string(e.what()).find("rates.sigma") != std::string::npos);
        }
    }

    TEST_CASE("config hash") {
        const auto a = RunConfig::from_string("b = 2\na = 1\n");
        const auto b = RunConfig::from_string("a=1\n\n# comment\nb=2");
        CHECK(a.hash() == b.hash());
        CHECK(a.hash().size() == 16);
        CHECK(RunConfig().hash() == "cbf29ce484222325");
        CHECK(a.hash() != RunConfig::from_string("a = 1\nb = 3").hash());
    }

    TEST_CASE("exit codes") {
        CHECK(run_cli("").code == 1);
        CHECK(run_cli("frobnicate").code == 1);
        CHECK(run_cli("cdso --paths 100 --quotes /nonexistent.csv").code == 1);
        CHECK(run_cli("cdso --paths 100 --model hull-white").code == 1);
        CHECK(run_cli("cdso --paths 100 --set mc.dt=abc --model ps-jcir").code == 1);
        CHECK(run_cli("cva --paths 100 --rho 2").code == 2);
        CHECK(run_cli("cdso --paths 100 --ta 5 --tb 1").code == 2);
        CHECK(run_cli("validate --suite bootstrap").code == 0);
    }

    TEST_CASE("outputs carry seed and config hash") {
        const auto a = run_cli("cdso --paths 2000 --strikes 200,240 --seed 9");
        REQUIRE(a.code == 0);
        std::istringstream lines(a.out);
        std::string header, row;
        std::getline(lines, header);
        std::getline(lines, row);
        CHECK(header.find("seed,config_hash") != std::string::npos);
        CHECK(row.find(",9,") != std::string::npos);
        CHECK(run_cli("cdso --paths 2000 --strikes 200,240 --seed 9 --workers 4").out == a.out);
        CHECK(run_cli("cdso --paths 2000 --strikes 200,240 --seed 10").out != a.out);
        const auto curve = run_cli("bootstrap --step 1 --end 2");
        CHECK(curve.out.find("t,G,h\n0,1,") != std::string::npos);
        const auto fit = run_cli("calibrate --model tc-cir --set calibrate.max_iterations=50");
        CHECK(fit.code == 0);
        CHECK(fit.out.find("\"objective\"") != std::string::npos);
    }
}
