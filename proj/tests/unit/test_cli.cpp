#include <gtest/gtest.h>

#include <cstdlib>
#include <sstream>

#include "torsion_moments/cli.hpp"

using namespace torsion_moments;

namespace {

struct Outcome {
    int code;
    std::string out;
    std::string err;
};

Outcome run(std::vector<std::string> args) {
    args.insert(args.begin(), "tmoments");
    std::vector<char*> argv;
    for (auto& a : args) argv.push_back(a.data());
    std::ostringstream out, err;
    const int code = cli::run(static_cast<int>(argv.size()), argv.data(), out, err);
    return {code, out.str(), err.str()};
}

class EnvGuard {
public:
    explicit EnvGuard(const char* value) {
        if (const char* old = std::getenv(cli::kFormatEnv)) saved_ = old;
        if (value) ::setenv(cli::kFormatEnv, value, 1);
        else ::unsetenv(cli::kFormatEnv);
    }
    ~EnvGuard() {
        if (saved_) ::setenv(cli::kFormatEnv, saved_->c_str(), 1);
        else ::unsetenv(cli::kFormatEnv);
    }

private:
    std::optional<std::string> saved_;
};

} // namespace

TEST(Cli, MkAndDk) {
    EnvGuard env(nullptr);
    EXPECT_EQ(run({"mk", "--n", "4", "--k", "2"}).out, "10\n");
    EXPECT_EQ(run({"mk", "--n", "1", "--k", "0"}).out, "1\n");
    EXPECT_EQ(run({"dk", "--n", "5", "--d", "-1"}).out, "4\n");
    EXPECT_EQ(run({"dk", "--n", "7", "--d", "-1"}).out, "2\n");
}

TEST(Cli, Orbits) {
    EnvGuard env(nullptr);
    EXPECT_EQ(run({"orbits", "--action", "gl2:3", "--k", "1"}).out, "2\n");
    EXPECT_EQ(run({"orbits", "--action", "units:4", "--k", "2"}).out, "10\n");
    EXPECT_EQ(run({"orbits", "--action", "semidirect:2", "--k", "2"}).out, "8\n");
    const auto j = Json::parse(run({"--format", "json", "orbits", "--action", "units:12", "--k", "2"}).out);
    EXPECT_EQ(j["burnside"], j["oracle"]);
    EXPECT_EQ(j["group_order"], "4");
}

TEST(Cli, ExitCodes) {
    EnvGuard env(nullptr);
    EXPECT_EQ(run({}).code, 2);                                      // no subcommand
    EXPECT_EQ(run({"--help"}).code, 0);
    EXPECT_EQ(run({"mk", "--n", "4"}).code, 2);                      // missing --k
    EXPECT_EQ(run({"mk", "--n", "0", "--k", "1"}).code, 2);
    EXPECT_EQ(run({"dk", "--n", "5", "--d", "-5"}).code, 2);
    EXPECT_EQ(run({"orbits", "--action", "gl2:4", "--k", "1"}).code, 2);
    EXPECT_EQ(run({"orbits", "--action", "glm:1009,4", "--k", "1"}).code, 2);   // capacity
    EXPECT_EQ(run({"moment", "--scenario", "power:2,4", "--k", "1", "--x", "1000"}).code, 2);
    EXPECT_EQ(run({"moment", "--scenario", "power:4,1", "--k", "1", "--x", "1"}).code, 2);
    EXPECT_EQ(run({"moment", "--scenario", "power:4,1", "--k", "1", "--x", "1e3", "--filter", "split"}).code, 2);
    EXPECT_EQ(run({"--format", "yaml", "mk", "--n", "4", "--k", "2"}).code, 2);
    EXPECT_EQ(run({"verify", "--suite", "no-such-suite"}).code, 2);
    EXPECT_EQ(run({"verify", "--suite", "formula-identities"}).code, 0);
}

TEST(Cli, ParseBounds) {
    EXPECT_EQ(cli::parse_bound("100000"), 100000U);
    EXPECT_EQ(cli::parse_bound("1e5"), 100000U);
    EXPECT_EQ(cli::parse_bound("2.5e4"), 25000U);
    EXPECT_THROW(cli::parse_bound("1.25e1"), UsageError);
    EXPECT_THROW(cli::parse_bound("-3"), UsageError);
    EXPECT_THROW(cli::parse_bound("ten"), UsageError);
    EXPECT_EQ(cli::parse_bound_list("1e4,1e5"), (std::vector<std::uint64_t>{10000, 100000}));
}

TEST(Cli, ScenarioSyntax) {
    EXPECT_EQ(cli::parse_scenario("cyclotomic:5").label(), "power:5,1");
    EXPECT_EQ(cli::parse_scenario("kummer:3,2").label(), "power:3,2");
    EXPECT_EQ(cli::parse_scenario("product:6,2,1,1").label(), "product:6,2,1,1");
    EXPECT_EQ(cli::parse_scenario("torsion:cm:-1:5").label(), "torsion:cm:-1:5");
    EXPECT_EQ(cli::parse_scenario("torsion:2,3:7").curve().b, 3);
    EXPECT_THROW(cli::parse_scenario("kummer:3,1"), UsageError);
    EXPECT_THROW(cli::parse_scenario("power:3"), UsageError);
    EXPECT_THROW(cli::parse_scenario("torsion:17a3"), UsageError);
    EXPECT_THROW(cli::parse_scenario("lattice:3"), UsageError);
}

TEST(Cli, MomentJsonRoundTrip) {
    EnvGuard env(nullptr);
    const auto res = run({"--format", "json", "moment", "--scenario", "power:4,1", "--k", "2", "--x", "2e4"});
    ASSERT_EQ(res.code, 0) << res.err;
    const auto j = Json::parse(res.out);
    const auto direct = empirical_moment(CounterSpec::power(4, 1), 2, 20000);
    EXPECT_EQ(get_rational(j, "empirical"), direct.empirical);
    EXPECT_EQ(get_rational(j, "predicted"), 10);
    EXPECT_EQ(j["pi_x"], direct.pi_x);
    EXPECT_EQ(j["scenario"], "power:4,1");
    std::uint64_t total = 0;
    for (const auto& [v, c] : j["histogram"].items()) total += c.get<std::uint64_t>();
    EXPECT_EQ(total, direct.pi_x);
    for (auto key : {"k", "x", "empirical_num", "empirical_den", "predicted_num", "predicted_den", "rel_err"})
        EXPECT_TRUE(j.contains(key)) << key;
}

TEST(Cli, ConditionedMomentUsesCurveField) {
    EnvGuard env(nullptr);
    const auto res = run({"--format", "json", "moment", "--scenario", "torsion:cm:-1:5", "--k", "1", "--x", "2e4",
                          "--filter", "inert+ramified"});
    ASSERT_EQ(res.code, 0) << res.err;
    const auto j = Json::parse(res.out);
    EXPECT_EQ(get_rational(j, "predicted"), 1);
    EXPECT_GT(j["filtered_out"].get<std::uint64_t>(), 0U);
}

TEST(Cli, DeterministicAcrossThreadCounts) {
    EnvGuard env(nullptr);
    const auto a = run({"moment", "--scenario", "torsion:17a3:3", "--k", "2", "--x", "3e4"});
    const auto b = run({"moment", "--scenario", "torsion:17a3:3", "--k", "2", "--x", "3e4"});
    const auto c = run({"--threads", "4", "moment", "--scenario", "torsion:17a3:3", "--k", "2", "--x", "3e4"});
    EXPECT_EQ(a.code, 0);
    EXPECT_EQ(a.out, b.out);
    EXPECT_EQ(a.out, c.out);
}

TEST(Cli, FormatFromEnvironment) {
    {
        EnvGuard env("json");
        const auto j = Json::parse(run({"mk", "--n", "4", "--k", "2"}).out);
        EXPECT_EQ(get_rational(j, "value"), 10);
        // the flag still wins
        EXPECT_EQ(run({"--format", "text", "mk", "--n", "4", "--k", "2"}).out, "10\n");
    }
    {
        EnvGuard env("csv");
        const auto out = run({"trace", "--scenario", "power:6,1", "--k", "2", "--checkpoints", "1e3,1e4"}).out;
        std::istringstream lines(out);
        std::string header, row1, row2;
        std::getline(lines, header);
        std::getline(lines, row1);
        std::getline(lines, row2);
        EXPECT_EQ(header, "x,pi_x,empirical,predicted,rel_err");
        EXPECT_EQ(row1.substr(0, 9), "1000,168,");
        EXPECT_EQ(row2.substr(0, 11), "10000,1229,");
    }
}

TEST(Cli, DistributionOutput) {
    EnvGuard env(nullptr);
    const auto res = run({"--format", "json", "dist", "--scenario", "power:4,1", "--x", "1e4", "--action", "units:4",
                          "--t", "0,0.5", "--order", "12"});
    ASSERT_EQ(res.code, 0) << res.err;
    const auto j = Json::parse(res.out);
    EXPECT_EQ(get_rational(j["cdf"].back(), "H"), 1);
    EXPECT_TRUE(j.contains("predicted"));
    EXPECT_EQ(run({"dist", "--scenario", "power:4,1", "--x", "1e4", "--t", "1.5"}).code, 2);
}

TEST(Cli, BinaryIsBuilt) {
    // The shipped executable answers the same way as the in-process runner.
    const std::string cmd = std::string("env -u TMOMENTS_FORMAT ") + TMOMENTS_BINARY + " mk --n 6 --k 2 > /dev/null";
    EXPECT_EQ(std::system(cmd.c_str()), 0);
}
