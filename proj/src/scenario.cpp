#include "pevcc/scenario.hpp"

#include "pevcc/errors.hpp"

#include <json.hpp>

#include <fstream>
#include <sstream>

namespace pevcc {

using json = nlohmann::json;

namespace {

// Field access with the JSON path in every error message.
class Reader {
public:
    Reader(const json& node, std::string path) : node_(node), path_(std::move(path)) {}

    bool has(const char* key) const { return node_.is_object() && node_.contains(key); }

    Reader child(const char* key) const
    {
        if (!has(key))
            throw ParseError(where(key) + ": missing field");
        return Reader(node_.at(key), where(key));
    }

    Reader at(std::size_t i) const { return Reader(node_.at(i), path_ + "[" + std::to_string(i) + "]"); }

    std::size_t size() const
    {
        if (!node_.is_array())
            throw ParseError(path_ + ": expected an array");
        return node_.size();
    }

    double number(const char* key) const { return child(key).as_number(); }
    double number(const char* key, double fallback) const { return has(key) ? number(key) : fallback; }

    double as_number() const
    {
        if (!node_.is_number())
            throw ParseError(path_ + ": expected a number");
        return node_.get<double>();
    }

    long integer(const char* key) const { return child(key).as_integer(); }
    long integer(const char* key, long fallback) const { return has(key) ? integer(key) : fallback; }

    long as_integer() const
    {
        if (!node_.is_number_integer())
            throw ParseError(path_ + ": expected an integer");
        return node_.get<long>();
    }

    std::string string(const char* key, const std::string& fallback) const
    {
        if (!has(key))
            return fallback;
        const auto& v = node_.at(key);
        if (!v.is_string())
            throw ParseError(where(key) + ": expected a string");
        return v.get<std::string>();
    }

    bool boolean(const char* key, bool fallback) const
    {
        if (!has(key))
            return fallback;
        const auto& v = node_.at(key);
        if (!v.is_boolean())
            throw ParseError(where(key) + ": expected true/false");
        return v.get<bool>();
    }

    Vec vector(const char* key) const
    {
        const auto r = child(key);
        Vec out(static_cast<long>(r.size()));
        for (std::size_t i = 0; i < r.size(); ++i)
            out[static_cast<long>(i)] = r.at(i).as_number();
        return out;
    }

    const std::string& path() const { return path_; }

private:
    std::string where(const char* key) const { return path_ + "." + key; }

    const json& node_;
    std::string path_;
};

json to_json_vec(const Vec& v) { return json(std::vector<double>(v.data(), v.data() + v.size())); }

json schedule_json(const TuningSchedule& s)
{
    return {{"alpha0", s.alpha0}, {"beta0", s.beta0},  {"tau_alpha", s.tau_alpha},
            {"tau_beta", s.tau_beta}, {"gamma", s.gamma}, {"delta", s.delta},
            {"tau_gamma", s.tau_gamma}};
}

const char* mode_name(UpdateMode m) { return m == UpdateMode::parallel ? "parallel" : "serial"; }

const char* kind_name(TopologyKind k)
{
    switch (k) {
    case TopologyKind::path:
        return "path";
    case TopologyKind::ring:
        return "ring";
    case TopologyKind::custom:
        return "custom";
    }
    return "path";
}

bool same(const Vec& a, const Vec& b) { return a.size() == b.size() && (a.array() == b.array()).all(); }

}  // namespace

void Scenario::validate() const
{
    grid.validate();
    if (fleet.empty())
        throw InvalidInput("scenario fleet is empty");
    for (const auto& p : fleet)
        p.validate(grid);
    require_size(cost.inelastic_load_kw.size(), grid.steps, "cost.inelastic_load_kw");
    if (!(cost.b_tilde > 0.0))
        throw InvalidInput("cost.b_tilde must be > 0");
    if (cost.scaling == ScalingMode::pev_share && !(cost.pev_share > 0.0 && cost.pev_share < 1.0))
        throw InvalidInput("cost.scaling.share must lie in (0, 1)");
    if (solver.max_iterations < 1)
        throw InvalidInput("solver.max_iterations must be >= 1");
    if (!(solver.tol.consensus > 0.0 && solver.tol.kkt > 0.0))
        throw InvalidInput("solver tolerances must be > 0");
    if (solver.threads < 1)
        throw InvalidInput("solver.threads must be >= 1");
    if (solver.schedule)
        solver.schedule->validate();
}

bool operator==(const Scenario& a, const Scenario& b)
{
    if (a.name != b.name || a.seed != b.seed || a.grid.steps != b.grid.steps || a.grid.delta_t != b.grid.delta_t)
        return false;
    if (a.fleet.size() != b.fleet.size())
        return false;
    for (std::size_t i = 0; i < a.fleet.size(); ++i) {
        const auto& p = a.fleet[i];
        const auto& q = b.fleet[i];
        if (p.id != q.id || p.capacity_kwh != q.capacity_kwh || p.soc_min != q.soc_min ||
            p.efficiency != q.efficiency || p.max_power_kw != q.max_power_kw ||
            p.initial_energy_kwh != q.initial_energy_kwh || p.connection != q.connection ||
            p.consumption_kwh != q.consumption_kwh)
            return false;
    }
    const auto& c = a.cost;
    const auto& d = b.cost;
    if (c.a_tilde != d.a_tilde || c.b_tilde != d.b_tilde || !same(c.inelastic_load_kw, d.inelastic_load_kw) ||
        c.scaling != d.scaling || c.pev_share != d.pev_share)
        return false;
    if (a.topology.kind != b.topology.kind || a.topology.edges != b.topology.edges)
        return false;
    const auto& s = a.solver;
    const auto& t = b.solver;
    if (s.max_iterations != t.max_iterations || s.tol.consensus != t.tol.consensus || s.tol.kkt != t.tol.kkt ||
        s.stop_on_tolerance != t.stop_on_tolerance || s.mode != t.mode || s.threads != t.threads ||
        s.schedule.has_value() != t.schedule.has_value())
        return false;
    if (s.schedule) {
        const auto& x = *s.schedule;
        const auto& y = *t.schedule;
        if (x.alpha0 != y.alpha0 || x.beta0 != y.beta0 || x.tau_alpha != y.tau_alpha || x.tau_beta != y.tau_beta ||
            x.gamma != y.gamma || x.delta != y.delta || x.tau_gamma != y.tau_gamma)
            return false;
    }
    return true;
}

std::string scenario_to_json(const Scenario& s)
{
    json j;
    j["name"] = s.name;
    j["seed"] = s.seed;
    j["grid"] = {{"steps", s.grid.steps}, {"delta_t", s.grid.delta_t}};

    json cost = {{"a_tilde", s.cost.a_tilde},
                 {"b_tilde", s.cost.b_tilde},
                 {"inelastic_load_kw", to_json_vec(s.cost.inelastic_load_kw)}};
    if (s.cost.scaling == ScalingMode::pev_share)
        cost["scaling"] = {{"mode", "pev_share"}, {"share", s.cost.pev_share}};
    else
        cost["scaling"] = {{"mode", "none"}};
    j["cost"] = cost;

    json topo = {{"kind", kind_name(s.topology.kind)}};
    if (s.topology.kind == TopologyKind::custom) {
        json edges = json::array();
        for (auto [u, v] : s.topology.edges)
            edges.push_back({u, v});
        topo["edges"] = edges;
    }
    j["topology"] = topo;

    json solver = {{"max_iterations", s.solver.max_iterations},
                   {"tol_consensus", s.solver.tol.consensus},
                   {"tol_kkt", s.solver.tol.kkt},
                   {"stop_on_tolerance", s.solver.stop_on_tolerance},
                   {"mode", mode_name(s.solver.mode)},
                   {"threads", s.solver.threads}};
    if (s.solver.schedule)
        solver["schedule"] = schedule_json(*s.solver.schedule);
    j["solver"] = solver;

    json fleet = json::array();
    for (const auto& p : s.fleet)
        fleet.push_back({{"id", p.id},
                         {"capacity_kwh", p.capacity_kwh},
                         {"soc_min", p.soc_min},
                         {"efficiency", p.efficiency},
                         {"max_power_kw", p.max_power_kw},
                         {"initial_energy_kwh", p.initial_energy_kwh},
                         {"connection", p.connection},
                         {"consumption_kwh", p.consumption_kwh}});
    j["fleet"] = fleet;
    return j.dump(1) + "\n";
}

Scenario scenario_from_json(const std::string& text, const std::string& origin)
{
    json j;
    try {
        j = json::parse(text);
    } catch (const json::parse_error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    const Reader root(j, origin);
    Scenario s;
    s.name = root.string("name", "");
    s.seed = static_cast<std::uint64_t>(root.integer("seed", 0));

    const auto grid = root.child("grid");
    s.grid.steps = static_cast<int>(grid.integer("steps"));
    s.grid.delta_t = grid.number("delta_t");

    const auto cost = root.child("cost");
    s.cost.a_tilde = cost.number("a_tilde", 0.0);
    s.cost.b_tilde = cost.number("b_tilde");
    s.cost.inelastic_load_kw = cost.vector("inelastic_load_kw");
    if (cost.has("scaling")) {
        const auto sc = cost.child("scaling");
        const auto mode = sc.string("mode", "none");
        if (mode == "pev_share") {
            s.cost.scaling = ScalingMode::pev_share;
            s.cost.pev_share = sc.number("share", 0.1);
        } else if (mode != "none") {
            throw ParseError(sc.path() + ".mode: expected \"none\" or \"pev_share\"");
        }
    }

    if (root.has("topology")) {
        const auto topo = root.child("topology");
        const auto kind = topo.string("kind", "path");
        if (kind == "path") {
            s.topology.kind = TopologyKind::path;
        } else if (kind == "ring") {
            s.topology.kind = TopologyKind::ring;
        } else if (kind == "custom") {
            s.topology.kind = TopologyKind::custom;
            const auto edges = topo.child("edges");
            for (std::size_t i = 0; i < edges.size(); ++i) {
                const auto e = edges.at(i);
                if (e.size() != 2)
                    throw ParseError(e.path() + ": expected [u, v]");
                s.topology.edges.emplace_back(static_cast<int>(e.at(0).as_integer()),
                                              static_cast<int>(e.at(1).as_integer()));
            }
        } else {
            throw ParseError(topo.path() + ".kind: expected path, ring or custom");
        }
    }

    if (root.has("solver")) {
        const auto sv = root.child("solver");
        s.solver.max_iterations = sv.integer("max_iterations", s.solver.max_iterations);
        s.solver.tol.consensus = sv.number("tol_consensus", s.solver.tol.consensus);
        s.solver.tol.kkt = sv.number("tol_kkt", s.solver.tol.kkt);
        s.solver.stop_on_tolerance = sv.boolean("stop_on_tolerance", true);
        s.solver.threads = static_cast<int>(sv.integer("threads", 1));
        const auto mode = sv.string("mode", "parallel");
        if (mode == "parallel")
            s.solver.mode = UpdateMode::parallel;
        else if (mode == "serial")
            s.solver.mode = UpdateMode::serial;
        else
            throw ParseError(sv.path() + ".mode: expected parallel or serial");
        if (sv.has("schedule")) {
            const auto sc = sv.child("schedule");
            TuningSchedule t;
            t.alpha0 = sc.number("alpha0");
            t.beta0 = sc.number("beta0");
            t.tau_alpha = sc.number("tau_alpha");
            t.tau_beta = sc.number("tau_beta");
            t.gamma = sc.number("gamma");
            t.delta = sc.number("delta");
            t.tau_gamma = sc.number("tau_gamma", 0.0);
            s.solver.schedule = t;
        }
    }

    const auto fleet = root.child("fleet");
    for (std::size_t i = 0; i < fleet.size(); ++i) {
        const auto r = fleet.at(i);
        PevSpec p;
        p.id = static_cast<int>(r.integer("id", static_cast<long>(i)));
        p.capacity_kwh = r.number("capacity_kwh");
        p.soc_min = r.number("soc_min");
        p.efficiency = r.number("efficiency");
        p.max_power_kw = r.number("max_power_kw");
        p.initial_energy_kwh = r.number("initial_energy_kwh");
        const auto conn = r.child("connection");
        for (std::size_t t = 0; t < conn.size(); ++t)
            p.connection.push_back(static_cast<int>(conn.at(t).as_integer()));
        const Vec cons = r.vector("consumption_kwh");
        p.consumption_kwh.assign(cons.data(), cons.data() + cons.size());
        s.fleet.push_back(std::move(p));
    }

    try {
        s.validate();
    } catch (const Error& e) {
        throw ParseError(origin + ": " + e.what());
    }
    return s;
}

Scenario load_scenario(const std::filesystem::path& file)
{
    std::ifstream in(file);
    if (!in)
        throw ParseError("cannot open scenario " + file.string());
    std::stringstream buf;
    buf << in.rdbuf();
    return scenario_from_json(buf.str(), file.string());
}

void save_scenario(const Scenario& s, const std::filesystem::path& file)
{
    s.validate();
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw Error("cannot write scenario " + file.string());
    out << scenario_to_json(s);
}

CostModel resolve_cost(const Scenario& s)
{
    Vec load = s.cost.inelastic_load_kw;
    if (s.cost.scaling == ScalingMode::pev_share)
        load *= pev_share_scale(load, s.grid, s.fleet, s.cost.pev_share);
    return derive_cost_coefficients(s.cost.a_tilde, s.cost.b_tilde, load);
}

Problem build_problem(const Scenario& s)
{
    s.validate();
    return make_problem(s.grid, s.fleet, resolve_cost(s));
}

Topology scenario_topology(const Scenario& s)
{
    return build_topology(s.topology.kind, static_cast<int>(s.fleet.size()), s.topology.edges);
}

SolverConfig solver_config(const Scenario& s, const Problem& problem, const Topology& topology)
{
    SolverConfig c;
    c.max_iterations = s.solver.max_iterations;
    c.tol = s.solver.tol;
    c.stop_on_tolerance = s.solver.stop_on_tolerance;
    c.mode = s.solver.mode;
    c.threads = s.solver.threads;
    c.schedule = s.solver.schedule ? *s.solver.schedule : suggest_schedule(problem, topology);
    return c;
}

Scenario generate_scenario(const FleetGenParams& params, std::uint64_t seed, const GenerateOptions& options)
{
    Scenario s;
    s.name = options.name;
    s.seed = seed;
    s.grid = params.grid;
    s.fleet = generate_synthetic_fleet(params, seed);
    s.cost.a_tilde = options.a_tilde;
    s.cost.b_tilde = options.b_tilde;
    s.cost.inelastic_load_kw = synthetic_inelastic_profile(params.grid);
    s.cost.scaling = ScalingMode::pev_share;
    s.cost.pev_share = options.pev_share;
    s.solver.max_iterations = options.max_iterations;
    const Problem problem = build_problem(s);
    s.solver.schedule = suggest_schedule(problem, scenario_topology(s), options.tau_alpha, options.tau_beta,
                                         options.tau_gamma);
    return s;
}

}  // namespace pevcc
