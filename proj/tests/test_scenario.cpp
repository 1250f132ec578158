#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <sstream>

#include "predictorlab/errors.hpp"
#include "predictorlab/scenario.hpp"
#include "support.hpp"

using namespace predictorlab;
using namespace testsupport;

namespace {

const std::string kConfigDir = PREDICTORLAB_CONFIG_DIR;

const char* kMinimal = R"(
plant = "example4"
[gains]
k = [-15.0, -8.0]
p = [-3.0, -3.0]
[initial]
x0 = [1.0, 1.0]
u0 = -2.0
)";

}  // namespace

TEST_SUITE("scenario") {

TEST_CASE("shortest round-trip numbers") {
    CHECK(format_number(0.1) == "0.1");
    CHECK(format_number(1.0) == "1");
    CHECK(format_number(-2.5e-7) == "-2.5e-07");
    CHECK(std::stod(format_number(1.8438710667803558)) == 1.8438710667803558);
    std::mt19937_64 rng(3);
    std::uniform_real_distribution<double> U(-1e6, 1e6);
    for (int k = 0; k < 1000; ++k) {
        const double v = U(rng) * std::pow(10.0, (k % 40) - 20);
        CHECK(std::stod(format_number(v)) == v);
    }
    CHECK(format_number(kNaN) == "nan");
}

TEST_CASE("minimal config gets the defaults") {
    const Scenario s = parse_scenario(kMinimal);
    CHECK(s.sim.plant == "example4");
    CHECK(s.sim.T1 == 0.03);
    CHECK(s.sim.T2 == 0.01);
    CHECK(s.sim.predictor == PredictorConfig{1, 2, 256});
    REQUIRE(s.sim.u0.size() == 1);
    CHECK(s.sim.u0[0].start == -0.5);
    CHECK(s.sim.u0[0].value == -2.0);
    CHECK(s.sim.z0 == Vector::Zero(2));
    CHECK_FALSE(s.k_hat);
    CHECK_FALSE(s.sweep);
}

TEST_CASE("shipped worked-example config") {
    const Scenario s = load_scenario(kConfigDir + "/example4.toml");
    SimConfig expect = nominal();
    expect.d = {ExogenousSignal{}, ExogenousSignal{}};
    CHECK(s.sim == expect);
    REQUIRE(s.k_hat);
    CHECK(*s.k_hat == 0.0734);
}

TEST_CASE("config errors") {
    const std::string base = kMinimal;
    CHECK_THROWS_AS(parse_scenario(base + "bogus = 1\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(base + "[timing]\nT1 = \"fast\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(base + "[timing]\nT1 = -0.1\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(base + "[timing]\nh = 0.5\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(base + "[timing]\nspeed = 2\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("plant = \"nosuch\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario("plant = [\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(base + "[signals]\nb = { kind = \"sinusoid\", amplitude = 1.0 }\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(base + "[sweep]\ncriterion = \"auto\"\n"), ConfigError);
    CHECK_THROWS_AS(parse_scenario(base + "[predictor]\nm = 1\n"), ContractionViolated);
    CHECK_THROWS_AS(load_scenario(kConfigDir + "/does-not-exist.toml"), ConfigError);
}

TEST_CASE("config-dump round trip on every shipped config") {
    int seen = 0;
    for (const auto& entry : std::filesystem::directory_iterator(kConfigDir)) {
        if (entry.path().extension() != ".toml") continue;
        ++seen;
        CAPTURE(entry.path().string());
        const Scenario s = load_scenario(entry.path().string());
        const std::string dumped = dump_scenario(s);
        const Scenario back = parse_scenario(dumped);
        CHECK(back == s);
        CHECK(dump_scenario(back) == dumped);
    }
    CHECK(seen >= 5);
}

TEST_CASE("round trip with every signal kind") {
    const std::string text = "seed = 4\n" + std::string(kMinimal) + R"(
[signals]
d = [{ kind = "piecewise", table = [[0.0, 1.0], [2.5, -0.5]] }, { kind = "noise", amplitude = 0.1, seed = 3 }]
xi = { kind = "constant", value = 0.01 }
b = { kind = "noise", amplitude = 0.5, offset = 0.5, seed = 8 }
[predict]
state = [0.5, 0.25]
[output]
trace = "out.csv"
)";
    const Scenario s = parse_scenario(text);
    CHECK(s.sim.seed == 4);
    CHECK(s.predict_state);
    CHECK(*s.trace_path == "out.csv");
    CHECK(parse_scenario(dump_scenario(s)) == s);
}

TEST_CASE("trace CSV layout") {
    SimConfig c = nominal();
    c.t_end = 0.05;
    const SimTrace tr = run_closed_loop(c);
    std::ostringstream os;
    write_trace_csv(tr, os);
    const std::string csv = os.str();
    const std::string header = "t,x1,x2,z1,z2,w,u,y,d,xi,m24,m214,m223,m224\r\n";
    CHECK(csv.rfind(header, 0) == 0);
    std::size_t lines = 0;
    for (std::size_t pos = 0; (pos = csv.find("\r\n", pos)) != std::string::npos; pos += 2) ++lines;
    CHECK(lines == tr.rows.size() + 1);
    // The first row precedes any sample.
    const std::string first = csv.substr(header.size(), csv.find("\r\n", header.size()) - header.size());
    CHECK(first.rfind("0,1,1,0,0,0,9.875,nan,0,nan,", 0) == 0);
}

TEST_CASE("sweep CSV layout") {
    SweepResult r;
    r.axes = {SweepAxis::T2};
    SweepPoint p;
    p.values = {0.01};
    p.success = true;
    p.decay_rate = 1.5;
    p.r_squared = 0.99;
    p.sup_x = 1e-9;
    p.conditions.entries.push_back({"holding-period", 1.0, 2.0, 1.0, true, ""});
    r.points.push_back(p);
    std::ostringstream os;
    write_sweep_csv(r, os);
    CHECK(os.str() == "T2,success,diverged,decay_rate,r_squared,sup_x,margin_holding-period\r\n"
                      "0.01,1,0,1.5,0.99,1e-09,1\r\n");
}

}
