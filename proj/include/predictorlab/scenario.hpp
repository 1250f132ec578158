#pragma once

#include <iosfwd>
#include <optional>
#include <string>

#include "predictorlab/analysis.hpp"
#include "predictorlab/simulator.hpp"

namespace predictorlab {

// A parsed scenario file: the simulation config plus the optional tables
// used by the other subcommands.
struct Scenario {
    SimConfig sim;
    // [predictor] k_hat; when absent the condition check estimates it.
    std::optional<double> k_hat;
    // [conditions]
    double q_scale = 1.0;
    double p_scale = 1.0;
    // [predict] state; defaults to x0.
    std::optional<Vector> predict_state;
    // [output] trace
    std::optional<std::string> trace_path;
    // [sweep]; present only in sweep specs.
    std::optional<SweepSpec> sweep;

    bool operator==(const Scenario& o) const;
};

// Throws ConfigError on syntax errors, unknown keys, wrong types or values
// that fail validation.
Scenario parse_scenario(const std::string& text, const std::string& source = "<string>");
Scenario load_scenario(const std::string& path);

// Canonical TOML form; parse_scenario(dump_scenario(s)) == s.
std::string dump_scenario(const Scenario& s);

// Shortest decimal string that parses back to the same double.
std::string format_number(double v);

// RFC 4180 CSV, header t,x1..xn,z1..zn,w,u,y,d,xi,m24,m214,m223,m224.
void write_trace_csv(const SimTrace& trace, std::ostream& os);
void write_sweep_csv(const SweepResult& result, std::ostream& os);

}  // namespace predictorlab
