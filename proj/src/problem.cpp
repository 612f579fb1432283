#include "safehj/problem.hpp"

#include <cstdio>
#include <map>
#include <set>
#include <sstream>
#include <stdexcept>

namespace safehj {

std::vector<int> SolverSettings::counts_for(int n) const {
    if (!grid_counts.empty()) {
        if (static_cast<int>(grid_counts.size()) == 1)
            return std::vector<int>(n, grid_counts[0]);
        if (static_cast<int>(grid_counts.size()) != n)
            throw std::invalid_argument("solver.grid: need 1 or n counts");
        return grid_counts;
    }
    return std::vector<int>(n, n <= 2 ? 101 : 51);
}

Grid make_grid(const SystemSpec& spec, const SolverSettings& s) {
    Grid g;
    g.bounds = spec.clamp_box;
    g.counts = s.counts_for(spec.n);
    g.steps = s.time_steps;
    g.T = spec.T;
    return g;
}

namespace {

struct Entry {
    std::string value;
    int line = 0;
    bool used = false;
};

using Section = std::map<std::string, Entry>;

std::vector<double> parse_reals(const std::string& s, const std::string& what) {
    std::vector<double> out;
    std::istringstream is(s);
    std::string tok;
    while (is >> tok) {
        if (!tok.empty() && tok.back() == ',') tok.pop_back();
        if (tok.empty()) continue;
        try {
            size_t used = 0;
            out.push_back(std::stod(tok, &used));
            if (used != tok.size()) throw std::invalid_argument("");
        } catch (...) {
            throw std::invalid_argument("expected real numbers for " + what + ", got '" + tok +
                                        "'");
        }
    }
    return out;
}

class Doc {
public:
    explicit Doc(const std::string& text) {
        std::istringstream is(text);
        std::string line;
        int lineno = 0;
        std::string cur;
        while (std::getline(is, line)) {
            ++lineno;
            // strip comments and whitespace
            if (auto pos = line.find('#'); pos != std::string::npos) line.erase(pos);
            auto l = line.find_first_not_of(" \t\r");
            if (l == std::string::npos) continue;
            auto r = line.find_last_not_of(" \t\r");
            line = line.substr(l, r - l + 1);
            if (line.front() == '[') {
                if (line.back() != ']')
                    fail(lineno, "malformed section header '" + line + "'");
                cur = line.substr(1, line.size() - 2);
                sections_[cur];
                continue;
            }
            auto eq = line.find('=');
            if (eq == std::string::npos) fail(lineno, "expected 'key = value'");
            if (cur.empty()) fail(lineno, "key outside any section");
            std::string key = line.substr(0, eq);
            std::string val = line.substr(eq + 1);
            auto trim = [](std::string& s) {
                auto a = s.find_first_not_of(" \t");
                auto b = s.find_last_not_of(" \t");
                s = a == std::string::npos ? "" : s.substr(a, b - a + 1);
            };
            trim(key);
            trim(val);
            if (key.empty()) fail(lineno, "empty key");
            if (sections_[cur].count(key)) fail(lineno, "duplicate key '" + key + "'");
            sections_[cur][key] = {val, lineno, false};
        }
    }

    [[noreturn]] static void fail(int line, const std::string& msg) {
        throw std::invalid_argument("problem file, line " + std::to_string(line) + ": " + msg);
    }

    bool has_section(const std::string& s) const { return sections_.count(s) != 0; }

    std::string require(const std::string& sec, const std::string& key) {
        auto v = optional(sec, key);
        if (!v)
            throw std::invalid_argument("problem file: missing required key [" + sec + "] " +
                                        key);
        return *v;
    }

    std::optional<std::string> optional(const std::string& sec, const std::string& key) {
        auto si = sections_.find(sec);
        if (si == sections_.end()) return std::nullopt;
        auto ki = si->second.find(key);
        if (ki == si->second.end()) return std::nullopt;
        ki->second.used = true;
        return ki->second.value;
    }

    void reject_unknown(const std::set<std::string>& known_sections) const {
        for (const auto& [sec, entries] : sections_) {
            if (!known_sections.count(sec))
                throw std::invalid_argument("problem file: unknown section [" + sec + "]");
            for (const auto& [key, e] : entries)
                if (!e.used)
                    fail(e.line, "unknown key '" + key + "' in section [" + sec + "]");
        }
    }

private:
    std::map<std::string, Section> sections_;
};

}  // namespace

Problem parse_problem(const std::string& text) {
    Doc doc(text);
    Problem p;
    SystemSpec& spec = p.spec;

    spec.n = std::stoi(doc.require("system", "n"));
    spec.m = std::stoi(doc.require("system", "m"));
    if (spec.n < 1 || spec.n > 3)
        throw std::invalid_argument("state dimension must be 1..3 (curse of dimensionality)");
    for (int i = 0; i < spec.n; ++i)
        spec.f1.push_back(PolyExpr::parse(doc.require("system", "f1_" + std::to_string(i + 1)),
                                          spec.n));
    for (int i = 0; i < spec.n; ++i) {
        std::vector<PolyExpr> row;
        for (int j = 0; j < spec.m; ++j)
            row.push_back(PolyExpr::parse(
                doc.require("system",
                            "f2_" + std::to_string(i + 1) + "_" + std::to_string(j + 1)),
                spec.n));
        spec.f2.push_back(std::move(row));
    }

    if (spec.m > 0) {
        std::string kind = doc.require("disturbance", "kind");
        if (kind == "box")
            spec.D.kind = DisturbanceSet::Kind::Box;
        else if (kind == "ball")
            spec.D.kind = DisturbanceSet::Kind::Ball;
        else
            throw std::invalid_argument("disturbance kind must be box or ball");
        spec.D.center = parse_reals(doc.require("disturbance", "center"), "disturbance.center");
        spec.D.radius = parse_reals(doc.require("disturbance", "radius"), "disturbance.radius");
        if (static_cast<int>(spec.D.center.size()) != spec.m)
            throw std::invalid_argument("disturbance.center needs m entries");
    }

    spec.safe.h = PolyExpr::parse(doc.require("safe", "h"), spec.n);
    auto sb = parse_reals(doc.require("safe", "bounds"), "safe.bounds");
    if (static_cast<int>(sb.size()) != 2 * spec.n)
        throw std::invalid_argument("safe.bounds needs n (lo hi) pairs");
    for (int i = 0; i < spec.n; ++i) {
        spec.safe.bounds.lo.push_back(sb[2 * i]);
        spec.safe.bounds.hi.push_back(sb[2 * i + 1]);
    }

    std::string ikind = doc.require("init", "kind");
    auto ib = parse_reals(doc.require("init", "bounds"), "init.bounds");
    if (static_cast<int>(ib.size()) != 2 * spec.n)
        throw std::invalid_argument("init.bounds needs n (lo hi) pairs");
    for (int i = 0; i < spec.n; ++i) {
        spec.init.box.lo.push_back(ib[2 * i]);
        spec.init.box.hi.push_back(ib[2 * i + 1]);
    }
    if (ikind == "box") {
        spec.init.kind = InitialSet::Kind::Box;
    } else if (ikind == "sublevel") {
        spec.init.kind = InitialSet::Kind::Sublevel;
        spec.init.g = PolyExpr::parse(doc.require("init", "g"), spec.n);
    } else {
        throw std::invalid_argument("init kind must be box or sublevel");
    }

    spec.T = std::stod(doc.require("horizon", "T"));
    if (auto cb = doc.optional("safe", "clamp_box")) {
        auto v = parse_reals(*cb, "safe.clamp_box");
        if (static_cast<int>(v.size()) != 2 * spec.n)
            throw std::invalid_argument("safe.clamp_box needs n (lo hi) pairs");
        for (int i = 0; i < spec.n; ++i) {
            spec.clamp_box.lo.push_back(v[2 * i]);
            spec.clamp_box.hi.push_back(v[2 * i + 1]);
        }
    } else {
        spec.clamp_box = default_clamp_box(spec.safe);
    }

    SolverSettings& s = p.solver;
    {
        std::string seed_str = doc.require("solver", "seed");
        s.seed = std::stoull(seed_str);
        s.seed_set = true;
    }
    if (auto v = doc.optional("solver", "grid")) {
        for (double c : parse_reals(*v, "solver.grid")) s.grid_counts.push_back(int(c));
    }
    if (auto v = doc.optional("solver", "time_steps")) s.time_steps = std::stoi(*v);
    if (auto v = doc.optional("solver", "dt")) s.dt = std::stod(*v);
    if (auto v = doc.optional("solver", "tol")) s.tol = std::stod(*v);
    if (auto v = doc.optional("solver", "max_boxes")) s.max_boxes = std::stol(*v);
    if (auto v = doc.optional("solver", "samples")) s.samples = std::stoi(*v);
    if (auto v = doc.optional("solver", "degree_x")) s.degree_x = std::stoi(*v);
    if (auto v = doc.optional("solver", "degree_t")) s.degree_t = std::stoi(*v);
    if (auto v = doc.optional("solver", "margin")) s.margin = std::stod(*v);

    if (doc.has_section("certificate")) {
        Certificate cert;
        cert.v = PolyExpr::parse(doc.require("certificate", "v"), spec.n);
        if (auto v = doc.optional("certificate", "lambda")) cert.lambda = std::stod(*v);
        if (auto v = doc.optional("certificate", "mode"))
            cert.mode = cert_mode_from_string(*v);
        s.lambda = cert.lambda;
        cert.validate();
        p.certificate = cert;
    }

    doc.reject_unknown({"system", "disturbance", "safe", "init", "horizon", "solver",
                        "certificate"});

    spec.validate_shapes();
    spec.validate_sets();
    return p;
}

std::string serialize_problem(const Problem& p) {
    std::ostringstream os;
    char buf[40];
    auto num = [&](double v) {
        std::snprintf(buf, sizeof buf, "%.17g", v);
        return std::string(buf);
    };
    const SystemSpec& spec = p.spec;
    os << "[system]\n";
    os << "n = " << spec.n << "\nm = " << spec.m << "\n";
    for (int i = 0; i < spec.n; ++i) os << "f1_" << i + 1 << " = " << spec.f1[i].str() << "\n";
    for (int i = 0; i < spec.n; ++i)
        for (int j = 0; j < spec.m; ++j)
            os << "f2_" << i + 1 << "_" << j + 1 << " = " << spec.f2[i][j].str() << "\n";
    if (spec.m > 0) {
        os << "[disturbance]\n";
        os << "kind = " << (spec.D.kind == DisturbanceSet::Kind::Box ? "box" : "ball") << "\n";
        os << "center =";
        for (double c : spec.D.center) os << " " << num(c);
        os << "\nradius =";
        for (double r : spec.D.radius) os << " " << num(r);
        os << "\n";
    }
    os << "[safe]\n";
    os << "h = " << spec.safe.h.str() << "\n";
    os << "bounds =";
    for (int i = 0; i < spec.n; ++i)
        os << " " << num(spec.safe.bounds.lo[i]) << " " << num(spec.safe.bounds.hi[i]);
    os << "\nclamp_box =";
    for (int i = 0; i < spec.n; ++i)
        os << " " << num(spec.clamp_box.lo[i]) << " " << num(spec.clamp_box.hi[i]);
    os << "\n[init]\n";
    os << "kind = " << (spec.init.kind == InitialSet::Kind::Box ? "box" : "sublevel") << "\n";
    if (spec.init.g) os << "g = " << spec.init.g->str() << "\n";
    os << "bounds =";
    for (int i = 0; i < spec.n; ++i)
        os << " " << num(spec.init.box.lo[i]) << " " << num(spec.init.box.hi[i]);
    os << "\n[horizon]\nT = " << num(spec.T) << "\n";
    const SolverSettings& s = p.solver;
    os << "[solver]\nseed = " << s.seed << "\n";
    if (!s.grid_counts.empty()) {
        os << "grid =";
        for (int c : s.grid_counts) os << " " << c;
        os << "\n";
    }
    if (s.time_steps) os << "time_steps = " << s.time_steps << "\n";
    if (s.dt > 0) os << "dt = " << num(s.dt) << "\n";
    os << "tol = " << num(s.tol) << "\nmax_boxes = " << s.max_boxes
       << "\nsamples = " << s.samples << "\ndegree_x = " << s.degree_x
       << "\ndegree_t = " << s.degree_t << "\nmargin = " << num(s.margin) << "\n";
    if (p.certificate) {
        os << "[certificate]\n";
        os << "v = " << p.certificate->v.str() << "\n";
        os << "lambda = " << num(p.certificate->lambda) << "\n";
        os << "mode = " << to_string(p.certificate->mode) << "\n";
    }
    return os.str();
}

uint64_t input_hash(const std::string& text) {
    uint64_t h = 0xcbf29ce484222325ULL;
    for (unsigned char c : text) {
        h ^= c;
        h *= 0x100000001b3ULL;
    }
    return h;
}

}  // namespace safehj
