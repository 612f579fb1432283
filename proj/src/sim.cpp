#include "safehj/sim.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <ostream>
#include <random>
#include <stdexcept>

namespace safehj {

DisturbanceSignal DisturbanceSignal::constant(std::vector<double> d) {
    DisturbanceSignal s;
    s.kind = Kind::Constant;
    s.switch_times = {0.0};
    s.values = {std::move(d)};
    return s;
}

const std::vector<double>& DisturbanceSignal::value_at(double t) const {
    size_t i = switch_times.size();
    while (i > 1 && switch_times[i - 1] > t) --i;
    return values[i - 1];
}

void DisturbanceSignal::validate(const DisturbanceSet& D, double T) const {
    if (switch_times.empty() || switch_times.size() != values.size())
        throw std::invalid_argument("signal: switch/value length mismatch");
    if (switch_times[0] != 0.0) throw std::invalid_argument("signal: first switch time must be 0");
    for (size_t i = 1; i < switch_times.size(); ++i)
        if (!(switch_times[i] > switch_times[i - 1]) || switch_times[i] > T)
            throw std::invalid_argument("signal: switch times must be strictly increasing in [0,T]");
    for (const auto& v : values)
        if (!D.contains(v)) throw std::invalid_argument("signal: value outside D");
}

namespace {

// One RK4 step of the extended field with constant disturbance.
void rk4_step(const SystemSpec& spec, std::vector<double>& x, const std::vector<double>& d,
              double h, std::vector<double>& k1, std::vector<double>& k2,
              std::vector<double>& k3, std::vector<double>& k4, std::vector<double>& tmp) {
    const int n = spec.n;
    k1 = extend_field(spec, x, d);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k1[i];
    k2 = extend_field(spec, tmp, d);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + 0.5 * h * k2[i];
    k3 = extend_field(spec, tmp, d);
    for (int i = 0; i < n; ++i) tmp[i] = x[i] + h * k3[i];
    k4 = extend_field(spec, tmp, d);
    for (int i = 0; i < n; ++i)
        x[i] += h / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]);
}

}  // namespace

Trajectory integrate(const SystemSpec& spec, std::span<const double> x0,
                     const DisturbanceSignal& signal, double dt) {
    if (!(dt > 0.0)) throw std::invalid_argument("integrate: dt must be > 0");
    if (static_cast<int>(x0.size()) != spec.n)
        throw std::invalid_argument("integrate: x0 dimension mismatch");
    for (double v : x0)
        if (!std::isfinite(v)) throw std::invalid_argument("integrate: x0 not finite");
    signal.validate(spec.D, spec.T);

    Trajectory traj;
    traj.signal = signal;
    std::vector<double> x(x0.begin(), x0.end());
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    if (spec.safe.h.eval(x) >= 0.0) traj.exit_time = 0.0;

    std::vector<double> k1(spec.n), k2(spec.n), k3(spec.n), k4(spec.n), tmp(spec.n);
    const int nsteps = int(std::ceil(spec.T / dt - 1e-12));
    size_t seg = 0;
    double t = 0.0;
    for (int step = 0; step < nsteps; ++step) {
        double t_next = std::min((step + 1) * dt, spec.T);
        // Sub-step so no RK4 step straddles a disturbance switch.
        while (t < t_next - 1e-15) {
            double t_stop = t_next;
            while (seg + 1 < signal.switch_times.size() &&
                   signal.switch_times[seg + 1] <= t + 1e-15)
                ++seg;
            if (seg + 1 < signal.switch_times.size())
                t_stop = std::min(t_stop, signal.switch_times[seg + 1]);
            rk4_step(spec, x, signal.values[seg], t_stop - t, k1, k2, k3, k4, tmp);
            t = t_stop;
        }
        t = t_next;
        for (double v : x)
            if (!std::isfinite(v))
                throw std::runtime_error("integrate: non-finite state at t = " +
                                         std::to_string(t));
        traj.times.push_back(t);
        traj.states.push_back(x);
        if (!traj.exit_time && spec.safe.h.eval(x) >= 0.0) traj.exit_time = t;
    }
    return traj;
}

uint64_t substream_seed(uint64_t seed, uint64_t index) {
    // splitmix64 finalizer over the pair
    uint64_t z = seed + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

std::vector<double> sample_initial_point(const SystemSpec& spec, uint64_t seed) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int attempt = 0; attempt < 10000; ++attempt) {
        std::vector<double> x(spec.n);
        for (int i = 0; i < spec.n; ++i)
            x[i] = spec.init.box.lo[i] + u(rng) * spec.init.box.width(i);
        if (spec.init.kind == InitialSet::Kind::Box || spec.init.g->eval(x) <= 0.0) return x;
    }
    throw std::runtime_error("initial-set rejection sampling failed (empty sublevel set?)");
}

DisturbanceSignal sample_signal(const SystemSpec& spec, uint64_t seed, int switches) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    DisturbanceSignal sig;
    const bool bang = (rng() & 1) != 0;
    sig.kind = bang ? DisturbanceSignal::Kind::BangBang
                    : DisturbanceSignal::Kind::PiecewiseConstant;
    std::vector<double> times = {0.0};
    for (int i = 1; i < switches; ++i) times.push_back(u(rng) * spec.T);
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    for (double t : times) {
        std::vector<double> d = spec.D.center;
        if (spec.D.kind == DisturbanceSet::Kind::Box) {
            for (int j = 0; j < spec.m; ++j) {
                double s = bang ? (rng() & 1 ? 1.0 : -1.0) : 2.0 * u(rng) - 1.0;
                d[j] += s * spec.D.radius[j];
            }
        } else {
            // direction on the sphere, bang = boundary, else random radius
            std::normal_distribution<double> gauss(0.0, 1.0);
            std::vector<double> dir(spec.m);
            double norm = 0.0;
            for (int j = 0; j < spec.m; ++j) {
                dir[j] = gauss(rng);
                norm += dir[j] * dir[j];
            }
            norm = std::sqrt(norm);
            double r = bang ? spec.D.radius[0] : spec.D.radius[0] * std::cbrt(u(rng));
            if (norm > 0.0)
                for (int j = 0; j < spec.m; ++j) d[j] += r * dir[j] / norm;
        }
        sig.switch_times.push_back(t);
        sig.values.push_back(std::move(d));
    }
    return sig;
}

std::optional<Trajectory> monte_carlo_falsify(const SystemSpec& spec, int samples, double dt,
                                              uint64_t seed, int switches_per_signal) {
    if (samples <= 0) throw std::invalid_argument("falsify: samples must be > 0");
    for (int s = 0; s < samples; ++s) {
        const uint64_t sub = substream_seed(seed, uint64_t(s));
        auto x0 = sample_initial_point(spec, substream_seed(sub, 0));
        auto sig = sample_signal(spec, substream_seed(sub, 1), switches_per_signal);
        Trajectory traj = integrate(spec, x0, sig, dt);
        if (traj.exit_time && *traj.exit_time <= spec.T) return traj;
    }
    return std::nullopt;
}

Trajectory worst_case_replay(const SystemSpec& spec, std::span<const double> x0,
                             const ValueGrid& vg, double dt) {
    if (static_cast<int>(x0.size()) != spec.n)
        throw std::invalid_argument("replay: x0 dimension mismatch");
    std::vector<double> xv(x0.begin(), x0.end());
    if (!vg.grid().bounds.contains(xv))
        throw std::domain_error("replay: x0 outside value grid");

    Trajectory traj;
    traj.signal.kind = DisturbanceSignal::Kind::PiecewiseConstant;
    std::vector<double> x = xv;
    traj.times.push_back(0.0);
    traj.states.push_back(x);
    if (spec.safe.h.eval(x) >= 0.0) traj.exit_time = 0.0;

    std::vector<double> k1(spec.n), k2(spec.n), k3(spec.n), k4(spec.n), tmp(spec.n);
    const int nsteps = int(std::ceil(spec.T / dt - 1e-12));
    double t = 0.0;
    for (int step = 0; step < nsteps; ++step) {
        const double t_next = std::min((step + 1) * dt, spec.T);
        std::vector<double> xq = clamp_to_box(x, vg.grid().bounds);
        auto grad = vg.gradient(xq, std::min(t, spec.T));
        auto d = hamiltonian_argmax(spec, x, grad);
        traj.signal.switch_times.push_back(t);
        traj.signal.values.push_back(d);
        rk4_step(spec, x, d, t_next - t, k1, k2, k3, k4, tmp);
        t = t_next;
        for (double v : x)
            if (!std::isfinite(v))
                throw std::runtime_error("replay: non-finite state at t = " + std::to_string(t));
        traj.times.push_back(t);
        traj.states.push_back(x);
        if (!traj.exit_time && spec.safe.h.eval(x) >= 0.0) traj.exit_time = t;
    }
    return traj;
}

void Trajectory::write_csv(std::ostream& os, const SystemSpec& spec) const {
    os << "t";
    for (int i = 0; i < spec.n; ++i) os << ",x" << i + 1;
    for (int j = 0; j < spec.m; ++j) os << ",d" << j + 1;
    os << ",h\n";
    char buf[64];
    for (size_t k = 0; k < times.size(); ++k) {
        int len = std::snprintf(buf, sizeof buf, "%.17g", times[k]);
        os.write(buf, len);
        for (double v : states[k]) {
            len = std::snprintf(buf, sizeof buf, ",%.17g", v);
            os.write(buf, len);
        }
        const auto& d = signal.value_at(times[k]);
        for (double v : d) {
            len = std::snprintf(buf, sizeof buf, ",%.17g", v);
            os.write(buf, len);
        }
        len = std::snprintf(buf, sizeof buf, ",%.17g\n", spec.safe.h.eval(states[k]));
        os.write(buf, len);
    }
}

}  // namespace safehj
