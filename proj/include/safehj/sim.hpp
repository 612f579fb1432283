#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <vector>

#include "safehj/system.hpp"
#include "safehj/value_grid.hpp"

namespace safehj {

// Piecewise-constant disturbance input on [0,T]. switch_times[0] == 0 and the
// value values[i] applies on [switch_times[i], switch_times[i+1]).
struct DisturbanceSignal {
    enum class Kind { Constant, PiecewiseConstant, BangBang };
    Kind kind = Kind::Constant;
    std::vector<double> switch_times;
    std::vector<std::vector<double>> values;

    static DisturbanceSignal constant(std::vector<double> d);
    const std::vector<double>& value_at(double t) const;
    void validate(const DisturbanceSet& D, double T) const;
};

struct Trajectory {
    std::vector<double> times;
    std::vector<std::vector<double>> states;
    DisturbanceSignal signal;
    std::optional<double> exit_time;  // first sample time with h(state) >= 0

    const std::vector<double>& final_state() const { return states.back(); }
    void write_csv(std::ostream& os, const SystemSpec& spec) const;
};

// Fixed-step RK4 under the extension field, sub-stepping at signal switches.
// Records exit_time at sample resolution; throws on non-finite states.
Trajectory integrate(const SystemSpec& spec, std::span<const double> x0,
                     const DisturbanceSignal& signal, double dt);

// Deterministic (seeded) sampling of X0 and random bang-bang / piecewise
// signals; returns the first trajectory that leaves S by time T, if any.
std::optional<Trajectory> monte_carlo_falsify(const SystemSpec& spec, int samples, double dt,
                                              uint64_t seed, int switches_per_signal = 10);

// Forward integration choosing the Hamiltonian-maximizing disturbance from
// the solved value function's interpolated gradient at each step.
Trajectory worst_case_replay(const SystemSpec& spec, std::span<const double> x0,
                             const ValueGrid& vg, double dt);

// Deterministic sub-stream RNG helpers (splitmix64 over (seed, index)).
uint64_t substream_seed(uint64_t seed, uint64_t index);

// Deterministic point sample of X0 (rejection sampling for sublevel sets).
std::vector<double> sample_initial_point(const SystemSpec& spec, uint64_t seed);

// Random signal in D with `switches` bang-bang or piecewise-constant pieces.
DisturbanceSignal sample_signal(const SystemSpec& spec, uint64_t seed, int switches);

}  // namespace safehj
