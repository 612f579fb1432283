// safehj: finite-horizon safety verification for polynomial ODE systems
// under bounded disturbances. Subcommands: verify-hj, check-cert,
// synthesize, falsify, export.
//
// Exit codes: 0 favorable (safe / valid / no counterexample / artifact
// written), 1 adverse with evidence (unsafe / invalid / witness found),
// 2 inconclusive, 10 usage or input errors, 11 internal failures.

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "safehj/problem.hpp"
#include "safehj/synthesis.hpp"
#include "safehj/verdict.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace safehj;

namespace {

constexpr const char* kVersion = "0.1.0";

struct Common {
    std::string problem_path;
    std::string out_dir = "runs";
    std::vector<int> grid;
    int time_steps = -1;
    double dt = -1.0;
    double tol = -1.0;
    long max_boxes = -1;
    int degree_x = -1;
    int degree_t = -1;
    double lambda = 0.0;
    bool lambda_set = false;
    std::string mode;
    uint64_t seed = 0;
    bool seed_set = false;
    int samples = -1;
    double margin = -1.0;
};

void add_common(CLI::App* cmd, Common& c) {
    cmd->add_option("problem", c.problem_path, "problem file")->required();
    cmd->add_option("--out", c.out_dir, "output root directory");
    cmd->add_option("--grid", c.grid, "grid node counts (1 or n values)");
    cmd->add_option("--time-steps", c.time_steps, "time step count (0 = from CFL)");
    cmd->add_option("--dt", c.dt, "simulation time step");
    cmd->add_option("--tol", c.tol, "certificate check tolerance");
    cmd->add_option("--max-boxes", c.max_boxes, "branch-and-bound box budget");
    cmd->add_option("--degree-x", c.degree_x, "template degree in x");
    cmd->add_option("--degree-t", c.degree_t, "template degree in t");
    cmd->add_option("--lambda", c.lambda, "relaxation rate")->each([&c](const std::string&) {
        c.lambda_set = true;
    });
    cmd->add_option("--mode", c.mode, "certificate mode: eq3 | eq5 | eq7 | eq8");
    cmd->add_option("--seed", c.seed, "RNG seed override")->each([&c](const std::string&) {
        c.seed_set = true;
    });
    cmd->add_option("--samples", c.samples, "falsification / synthesis sample count");
    cmd->add_option("--margin", c.margin, "synthesis strictness margin");
}

struct Loaded {
    Problem problem;
    std::string text;
    uint64_t hash = 0;
    fs::path run_dir;
};

Loaded load(const Common& c) {
    std::ifstream in(c.problem_path);
    if (!in) throw std::invalid_argument("cannot open problem file: " + c.problem_path);
    std::stringstream ss;
    ss << in.rdbuf();
    Loaded l;
    l.text = ss.str();
    l.problem = parse_problem(l.text);
    l.hash = input_hash(l.text);

    SolverSettings& s = l.problem.solver;
    if (!c.grid.empty()) s.grid_counts = c.grid;
    if (c.time_steps >= 0) s.time_steps = c.time_steps;
    if (c.dt > 0) s.dt = c.dt;
    if (c.tol > 0) s.tol = c.tol;
    if (c.max_boxes > 0) s.max_boxes = c.max_boxes;
    if (c.degree_x >= 0) s.degree_x = c.degree_x;
    if (c.degree_t >= 0) s.degree_t = c.degree_t;
    if (c.lambda_set) s.lambda = c.lambda;
    if (c.seed_set) s.seed = c.seed;
    if (c.samples > 0) s.samples = c.samples;
    if (c.margin > 0) s.margin = c.margin;
    if (c.lambda_set && l.problem.certificate) l.problem.certificate->lambda = c.lambda;
    if (!c.mode.empty() && l.problem.certificate)
        l.problem.certificate->mode = cert_mode_from_string(c.mode);

    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)l.hash);
    l.run_dir = fs::path(c.out_dir) / hex;
    fs::create_directories(l.run_dir);
    return l;
}

json result_skeleton(const std::string& command, const Loaded& l) {
    json doc;
    doc["tool"] = "safehj";
    doc["version"] = kVersion;
    doc["command"] = command;
    char hex[17];
    std::snprintf(hex, sizeof hex, "%016llx", (unsigned long long)l.hash);
    doc["input_hash"] = hex;
    doc["seed"] = l.problem.solver.seed;
    return doc;
}

// Wall-clock numbers live in their own key so results can be compared
// byte-for-byte across runs after dropping "timing".
void finish(json& doc, const Loaded& l, double seconds) {
    doc["timing"] = {{"seconds", seconds}};
    std::ofstream out(l.run_dir / "result.json");
    out << doc.dump(2) << "\n";
    std::cout << doc.dump(2) << "\n";
}

json trajectory_json(const Trajectory& traj) {
    json j;
    j["exit_time"] = traj.exit_time ? json(*traj.exit_time) : json(nullptr);
    j["samples"] = traj.times.size();
    j["x0"] = traj.states.front();
    j["final_state"] = traj.states.back();
    return j;
}

void write_trajectory(const fs::path& p, const Trajectory& traj, const SystemSpec& spec) {
    std::ofstream os(p);
    traj.write_csv(os, spec);
}

void write_slice_t0(const fs::path& p, const ValueGrid& vg) {
    std::ofstream os(p);
    int n = vg.grid().dim();
    for (int i = 0; i < n; ++i) os << "x" << i + 1 << ",";
    os << "v\n";
    for (size_t s = 0; s < vg.node_count(); ++s) {
        auto x = vg.grid().node(s);
        for (double xi : x) os << xi << ",";
        os << vg.at(0, s) << "\n";
    }
}

int cmd_verify_hj(const Common& c) {
    auto t0 = std::chrono::steady_clock::now();
    auto l = load(c);
    auto grid = make_grid(l.problem.spec, l.problem.solver);
    SolveStats stats;
    auto vg = solve_value_function(l.problem.spec, grid, &stats);
    auto verdict = safety_verdict(l.problem.spec, vg, l.problem.solver.sim_dt(l.problem.spec.T));

    {
        std::ofstream bin(l.run_dir / "value.bin", std::ios::binary);
        vg.write_binary(bin);
    }
    write_slice_t0(l.run_dir / "value_t0.csv", vg);

    auto doc = result_skeleton("verify-hj", l);
    json r;
    r["status"] = to_string(verdict.status);
    r["margin"] = verdict.margin;
    r["delta_num"] = verdict.diagnostics.delta_num;
    r["lipschitz_est"] = verdict.diagnostics.lipschitz_est;
    r["dissipation_est"] = verdict.diagnostics.dissipation_est;
    r["grid_counts"] = verdict.diagnostics.grid_counts;
    r["max_spacing"] = verdict.diagnostics.max_spacing;
    r["time_steps"] = stats.steps;
    r["solver_dt"] = stats.dt;
    if (verdict.witness) {
        r["witness"] = trajectory_json(*verdict.witness);
        write_trajectory(l.run_dir / "witness.csv", *verdict.witness, l.problem.spec);
    }
    doc["result"] = r;
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish(doc, l, secs);
    switch (verdict.status) {
        case SafetyStatus::Safe: return 0;
        case SafetyStatus::Unsafe: return 1;
        default: return 2;
    }
}

int cmd_check_cert(const Common& c) {
    auto t0 = std::chrono::steady_clock::now();
    auto l = load(c);
    if (!l.problem.certificate)
        throw std::invalid_argument("check-cert needs a [certificate] section");
    auto rep = check_certificate(l.problem.spec, *l.problem.certificate,
                                 l.problem.solver.tol, l.problem.solver.max_boxes);
    auto doc = result_skeleton("check-cert", l);
    json r;
    r["status"] = to_string(rep.status);
    r["mode"] = to_string(l.problem.certificate->mode);
    r["lambda"] = l.problem.certificate->lambda;
    r["boxes_processed"] = rep.boxes_processed;
    json conds = json::array();
    for (const auto& cr : rep.conditions)
        conds.push_back({{"condition", to_string(cr.condition)},
                         {"status", to_string(cr.status)},
                         {"boxes", cr.boxes_processed}});
    r["conditions"] = conds;
    if (rep.counterexample) {
        const auto& ce = *rep.counterexample;
        r["counterexample"] = {{"x", ce.x},
                               {"t", ce.t},
                               {"d", ce.d},
                               {"condition", to_string(ce.condition)},
                               {"violation", ce.violation}};
    }
    doc["result"] = r;
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish(doc, l, secs);
    switch (rep.status) {
        case CheckStatus::Valid: return 0;
        case CheckStatus::Invalid: return 1;
        default: return 2;
    }
}

int cmd_synthesize(const Common& c, const std::string& route) {
    auto t0 = std::chrono::steady_clock::now();
    auto l = load(c);
    const auto& s = l.problem.solver;
    CertMode mode = c.mode.empty() ? CertMode::Eq5 : cert_mode_from_string(c.mode);

    std::optional<Certificate> cert;
    SynthesisInfo info;
    if (route == "cegis" || route == "auto") {
        auto tmpl = Template::make(l.problem.spec.n, s.degree_x, s.degree_t);
        cert = cegis_synthesize(l.problem.spec, tmpl, mode, s.lambda, s.margin, 40, s.seed,
                                s.tol, s.max_boxes, &info);
    }
    if (!cert && (route == "fit" || route == "auto")) {
        auto grid = make_grid(l.problem.spec, s);
        auto vg = solve_value_function(l.problem.spec, grid);
        cert = fit_from_value_function(l.problem.spec, vg, std::max(s.degree_x, 2), s.degree_t,
                                       s.tol, s.max_boxes, &info);
    }

    auto doc = result_skeleton("synthesize", l);
    json r;
    r["found"] = cert.has_value();
    r["route"] = info.route;
    r["iterations"] = info.iterations;
    r["samples"] = info.samples;
    if (!info.failure.empty()) r["failure"] = info.failure;
    if (cert) {
        r["mode"] = to_string(cert->mode);
        r["lambda"] = cert->lambda;
        r["v"] = cert->v.str();
        std::ofstream cf(l.run_dir / "certificate.txt");
        cf << cert->serialize();
        // independent confirmation before reporting success
        auto rep = check_certificate(l.problem.spec, *cert, s.tol, s.max_boxes);
        r["recheck"] = to_string(rep.status);
        if (rep.status != CheckStatus::Valid) cert.reset();
    }
    doc["result"] = r;
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish(doc, l, secs);
    return cert ? 0 : 2;
}

int cmd_falsify(const Common& c) {
    auto t0 = std::chrono::steady_clock::now();
    auto l = load(c);
    const auto& s = l.problem.solver;
    auto witness = monte_carlo_falsify(l.problem.spec, s.samples,
                                       s.sim_dt(l.problem.spec.T), s.seed);
    auto doc = result_skeleton("falsify", l);
    json r;
    r["samples"] = s.samples;
    r["found"] = witness.has_value();
    if (witness) {
        r["witness"] = trajectory_json(*witness);
        write_trajectory(l.run_dir / "witness.csv", *witness, l.problem.spec);
    }
    doc["result"] = r;
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish(doc, l, secs);
    return witness ? 1 : 0;
}

int cmd_export(const Common& c) {
    auto t0 = std::chrono::steady_clock::now();
    auto l = load(c);
    {
        std::ofstream canon(l.run_dir / "problem.canonical");
        canon << serialize_problem(l.problem);
    }
    auto grid = make_grid(l.problem.spec, l.problem.solver);
    auto vg = solve_value_function(l.problem.spec, grid);
    {
        std::ofstream csv(l.run_dir / "value.csv");
        vg.write_csv(csv);
        std::ofstream bin(l.run_dir / "value.bin", std::ios::binary);
        vg.write_binary(bin);
    }
    write_slice_t0(l.run_dir / "value_t0.csv", vg);

    auto doc = result_skeleton("export", l);
    json r;
    r["files"] = {"problem.canonical", "value.csv", "value.bin", "value_t0.csv"};
    if (l.problem.certificate) {
        // sign samples of v(.,0) along each axis through the domain center
        std::ofstream zc(l.run_dir / "certificate_t0.csv");
        const auto& spec = l.problem.spec;
        zc << "axis,x,v\n";
        for (int i = 0; i < spec.n; ++i) {
            for (int s2 = 0; s2 <= 200; ++s2) {
                auto x = spec.clamp_box.center();
                x[i] = spec.clamp_box.lo[i] + s2 * spec.clamp_box.width(i) / 200.0;
                zc << i + 1 << "," << x[i] << ","
                   << l.problem.certificate->v.eval(x, 0.0) << "\n";
            }
        }
        r["files"].push_back("certificate_t0.csv");
    }
    doc["result"] = r;
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    finish(doc, l, secs);
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"finite-horizon safety verification under bounded disturbances"};
    app.set_version_flag("--version", kVersion);
    app.require_subcommand(1);

    Common c_verify, c_check, c_synth, c_falsify, c_export;
    std::string route = "auto";

    auto* verify = app.add_subcommand("verify-hj", "solve the value function and decide safety");
    add_common(verify, c_verify);
    auto* check = app.add_subcommand("check-cert", "verify a candidate barrier certificate");
    add_common(check, c_check);
    auto* synth = app.add_subcommand("synthesize", "search for a barrier certificate");
    add_common(synth, c_synth);
    synth->add_option("--route", route, "cegis | fit | auto");
    auto* fals = app.add_subcommand("falsify", "Monte-Carlo search for escaping trajectories");
    add_common(fals, c_falsify);
    auto* expo = app.add_subcommand("export", "write canonical inputs and value dumps");
    add_common(expo, c_export);

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? 0 : 10;
    }

    try {
        if (verify->parsed()) return cmd_verify_hj(c_verify);
        if (check->parsed()) return cmd_check_cert(c_check);
        if (synth->parsed()) {
            if (route != "cegis" && route != "fit" && route != "auto")
                throw std::invalid_argument("unknown route: " + route);
            return cmd_synthesize(c_synth, route);
        }
        if (fals->parsed()) return cmd_falsify(c_falsify);
        if (expo->parsed()) return cmd_export(c_export);
    } catch (const std::invalid_argument& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 10;
    } catch (const std::exception& e) {
        std::cerr << "internal error: " << e.what() << "\n";
        return 11;
    }
    return 10;
}
