#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"
#include "knotloop/errors.hpp"
#include "knotloop/knot_diagram.hpp"
#include "knotloop/numerics.hpp"

namespace knotloop {

struct RunConfig {
    std::optional<TwistVector> twists;
    std::optional<std::pair<long long, long long>> fraction;
    std::optional<std::string> gluing;
    double tolerance = 1e-9;
    std::uint64_t seed = 0;
    bool json = false;
    bool verify = false;
    bool timings = false;
    bool dump_diagram = false;
    int max_crossings = 8;
    int threads = 0;  // sweep workers, 0 for hardware concurrency
};

// Throws InvalidTwist unless exactly one of twists / fraction / gluing is set.
void validate(const RunConfig& c);

struct Counts {
    int crossings = 0, variables = 0, tetrahedra = 0, edges = 0;
    bool operator==(const Counts&) const = default;
};

struct Report {
    std::string knot;
    std::vector<int> twists;
    cplx tau;
    std::optional<cplx> omega;
    int sign = 1;
    double discrepancy = 0.0;
    double relative = 0.0;
    bool pass = false;
    double volume = 0.0;
    Counts counts;
    std::map<std::string, double> residuals;
    std::map<std::string, double> timings;  // seconds, only when requested
    std::string error;                      // failed sweep rows
    int exit_code = 0;
    bool operator==(const Report&) const = default;
};

nlohmann::json report_to_json(const Report& r);
Report report_from_json(const nlohmann::json& j);  // SchemaError on bad input
std::string format_text(const Report& r);

// 0 success, 1 comparison failure, 2 non-hyperbolic or invalid input,
// 3 solver failure, 4 I/O or schema error.
int exit_code_for(const Error& e);

Report cmd_compute(const RunConfig& c);
Report cmd_from_gluing(const RunConfig& c);

struct SweepResult {
    std::vector<Report> rows;
    int skipped_links = 0, skipped_torus = 0;
    double max_relative = 0.0;
    bool all_pass = true;
};

// Twist vectors with entries >= 1, length >= 2 and total <= max_crossings,
// one per reversal pair (the lexicographically larger), ordered by crossing
// count and then lexicographically.
std::vector<TwistVector> sweep_vectors(int max_crossings);
SweepResult cmd_sweep(const RunConfig& c);
nlohmann::json sweep_to_json(const SweepResult& s);

}  // namespace knotloop
