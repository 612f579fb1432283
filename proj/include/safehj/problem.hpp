#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "safehj/certificate.hpp"
#include "safehj/system.hpp"
#include "safehj/value_grid.hpp"

namespace safehj {

// Tuning knobs from the [solver] section; all have defaults except seed.
struct SolverSettings {
    std::vector<int> grid_counts;  // empty = dimension default (101 / 51)
    int time_steps = 0;            // 0 = CFL-derived
    double dt = 0.0;               // 0 = T/1000
    double tol = 1e-6;
    long max_boxes = 1'000'000;
    uint64_t seed = 0;
    bool seed_set = false;  // seeds are mandatory in problem files
    int samples = 10'000;
    int degree_x = 2;
    int degree_t = 1;
    double margin = 1e-4;  // relative to max |h| on the safe bounds
    double lambda = 0.0;

    double sim_dt(double T) const { return dt > 0.0 ? dt : T / 1000.0; }
    std::vector<int> counts_for(int n) const;
};

struct Problem {
    SystemSpec spec;
    SolverSettings solver;
    std::optional<Certificate> certificate;
};

// Parses the sectioned key = value document; throws std::invalid_argument
// with a line reference on syntax errors and a named invariant on semantic
// ones (set validation included).
Problem parse_problem(const std::string& text);

std::string serialize_problem(const Problem& p);

// FNV-1a over the document text; names the run directory.
uint64_t input_hash(const std::string& text);

Grid make_grid(const SystemSpec& spec, const SolverSettings& s);

}  // namespace safehj
