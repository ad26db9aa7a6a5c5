#include "pevcc/artifacts.hpp"

#include "pevcc/errors.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <map>
#include <sstream>

namespace pevcc {

namespace fs = std::filesystem;

std::string format_number(double v)
{
    if (std::isnan(v))
        return "nan";
    char buf[64];
    const auto res = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, res.ptr);
}

namespace {

std::ofstream open_out(const fs::path& file)
{
    if (file.has_parent_path())
        fs::create_directories(file.parent_path());
    std::ofstream out(file, std::ios::binary);
    if (!out)
        throw Error("cannot write " + file.string());
    return out;
}

double parse_number(const std::string& cell, const fs::path& file, int line)
{
    if (cell == "nan")
        return std::nan("");
    double v = 0.0;
    const auto res = std::from_chars(cell.data(), cell.data() + cell.size(), v);
    if (res.ec != std::errc() || res.ptr != cell.data() + cell.size())
        throw ParseError(file.string() + ":" + std::to_string(line) + ": bad number '" + cell + "'");
    return v;
}

// Reads a CSV with the exact expected header; returns numeric rows.
std::vector<std::vector<double>> read_csv(const fs::path& file, const std::string& header)
{
    std::ifstream in(file);
    if (!in)
        throw ParseError("cannot open " + file.string());
    std::string line;
    if (!std::getline(in, line) || line != header)
        throw ParseError(file.string() + ":1: expected header '" + header + "'");
    const auto columns = static_cast<std::size_t>(std::count(header.begin(), header.end(), ',') + 1);
    std::vector<std::vector<double>> rows;
    int lineno = 1;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty())
            continue;
        std::vector<double> row;
        std::stringstream ss(line);
        std::string cell;
        while (std::getline(ss, cell, ','))
            row.push_back(parse_number(cell, file, lineno));
        if (row.size() != columns)
            throw ParseError(file.string() + ":" + std::to_string(lineno) + ": expected " + std::to_string(columns) +
                             " columns");
        rows.push_back(std::move(row));
    }
    return rows;
}

}  // namespace

TraceWriter::TraceWriter(const fs::path& out_dir)
    : trace_(open_out(out_dir / "trace.csv")), progress_(open_out(out_dir / "progress.csv"))
{
    trace_ << "iteration,rel_obj,rel_load,consensus_disagreement,max_kkt_residual\n";
    progress_ << "iteration,objective,total_energy,consensus_disagreement,max_kkt_residual,max_local_residual\n";
}

void TraceWriter::operator()(const IterationRecord& r, const std::vector<AgentState>&)
{
    trace_ << r.iteration << ',' << format_number(r.rel_obj) << ',' << format_number(r.rel_load) << ','
           << format_number(r.consensus_disagreement) << ',' << format_number(r.max_kkt_residual) << '\n';
    progress_ << r.iteration << ',' << format_number(r.objective) << ',' << format_number(r.total_energy) << ','
              << format_number(r.consensus_disagreement) << ',' << format_number(r.max_kkt_residual) << ','
              << format_number(r.max_local_residual) << '\n';
}

TraceSink TraceWriter::sink()
{
    return [this](const IterationRecord& r, const std::vector<AgentState>& a) { (*this)(r, a); };
}

std::vector<ProgressRow> read_progress_csv(const fs::path& file)
{
    std::vector<ProgressRow> out;
    for (const auto& r : read_csv(
             file, "iteration,objective,total_energy,consensus_disagreement,max_kkt_residual,max_local_residual"))
        out.push_back({static_cast<long>(r[0]), r[1], r[2], r[3], r[4], r[5]});
    return out;
}

std::vector<ConvergenceSample> read_trace_csv(const fs::path& file)
{
    std::vector<ConvergenceSample> out;
    for (const auto& r : read_csv(file, "iteration,rel_obj,rel_load,consensus_disagreement,max_kkt_residual"))
        out.push_back({static_cast<long>(r[0]), r[1], r[2], r[3], r[4]});
    return out;
}

void write_convergence_csv(const fs::path& file, const std::vector<ConvergenceSample>& samples)
{
    auto out = open_out(file);
    out << "iteration,rel_obj,rel_load,consensus_disagreement,max_kkt_residual\n";
    for (const auto& s : samples)
        out << s.iteration << ',' << format_number(s.rel_obj) << ',' << format_number(s.rel_load) << ','
            << format_number(s.consensus_disagreement) << ',' << format_number(s.max_kkt_residual) << '\n';
}

void write_schedules_csv(const fs::path& file, const std::vector<Vec>& schedules)
{
    auto out = open_out(file);
    out << "pev_id,t,x_kw\n";
    for (std::size_t v = 0; v < schedules.size(); ++v)
        for (long t = 0; t < schedules[v].size(); ++t)
            out << v << ',' << t << ',' << format_number(schedules[v][t]) << '\n';
}

std::vector<Vec> read_schedules_csv(const fs::path& file)
{
    std::map<long, std::map<long, double>> cells;
    for (const auto& r : read_csv(file, "pev_id,t,x_kw"))
        cells[static_cast<long>(r[0])][static_cast<long>(r[1])] = r[2];
    std::vector<Vec> out;
    long expected_id = 0;
    for (const auto& [id, row] : cells) {
        if (id != expected_id++)
            throw ParseError(file.string() + ": pev ids must be 0..V-1 without gaps");
        Vec x(static_cast<long>(row.size()));
        long expected_t = 0;
        for (const auto& [t, val] : row) {
            if (t != expected_t++)
                throw ParseError(file.string() + ": pev " + std::to_string(id) + " has a gap in t");
            x[t] = val;
        }
        if (!out.empty() && x.size() != out.front().size())
            throw ParseError(file.string() + ": pev " + std::to_string(id) + " has a different horizon");
        out.push_back(std::move(x));
    }
    return out;
}

void write_load_csv(const fs::path& file, const Vec& load)
{
    auto out = open_out(file);
    out << "time_index,load_kw\n";
    for (long t = 0; t < load.size(); ++t)
        out << t << ',' << format_number(load[t]) << '\n';
}

Vec read_load_csv(const fs::path& file)
{
    const auto rows = read_csv(file, "time_index,load_kw");
    Vec out(static_cast<long>(rows.size()));
    for (std::size_t i = 0; i < rows.size(); ++i) {
        if (static_cast<std::size_t>(rows[i][0]) != i)
            throw ParseError(file.string() + ": time_index must run 0..T-1");
        out[static_cast<long>(i)] = rows[i][1];
    }
    return out;
}

void write_solution(const fs::path& out_dir, const Problem& problem, const CentralSolution& sol,
                    const ResidualReport& r)
{
    write_schedules_csv(out_dir / "solution.csv", sol.x_star);
    write_load_csv(out_dir / "inelastic.csv", problem.cost.inelastic_load_kw);
    {
        auto out = open_out(out_dir / "load.csv");
        out << "time_index,load_kw,price\n";
        for (long t = 0; t < sol.load_star.size(); ++t)
            out << t << ',' << format_number(sol.load_star[t]) << ',' << format_number(sol.lambda_star[t]) << '\n';
    }
    auto out = open_out(out_dir / "solution_summary.txt");
    out << "method: " << sol.method << '\n'
        << "iterations: " << sol.iterations << '\n'
        << "objective_star: " << format_number(sol.objective_star) << '\n'
        << "total_energy_kw_steps: " << format_number(sol.load_star.sum()) << '\n'
        << "residual_stationarity_load: " << format_number(r.stationarity_load) << '\n'
        << "residual_stationarity_schedule: " << format_number(r.stationarity_schedule) << '\n'
        << "residual_load_balance: " << format_number(r.load_balance) << '\n'
        << "residual_primal_energy: " << format_number(r.primal_energy) << '\n'
        << "residual_primal_bounds: " << format_number(r.primal_bounds) << '\n'
        << "residual_dual_negativity: " << format_number(r.dual_negativity) << '\n'
        << "residual_complementarity: " << format_number(r.complementarity) << '\n'
        << "residual_max: " << format_number(r.max()) << '\n';
}

StoredSolution read_solution(const fs::path& dir)
{
    StoredSolution s;
    const fs::path summary = dir / "solution_summary.txt";
    std::ifstream in(summary);
    if (!in)
        throw ParseError("cannot open " + summary.string());
    std::string line;
    bool found = false;
    int lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        const std::string key = "objective_star: ";
        if (line.rfind(key, 0) == 0) {
            s.objective = parse_number(line.substr(key.size()), summary, lineno);
            found = true;
        }
    }
    if (!found)
        throw ParseError(summary.string() + ": missing objective_star");
    s.schedules = read_schedules_csv(dir / "solution.csv");
    s.load = total_load(s.schedules);
    return s;
}

}  // namespace pevcc
