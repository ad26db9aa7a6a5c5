#pragma once

#include "pevcc/ci_solver.hpp"
#include "pevcc/metrics.hpp"
#include "pevcc/reference.hpp"

#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

namespace pevcc {

// Shortest text that reads back to the same double.
std::string format_number(double v);

// Streams a run: trace.csv (iteration, rel_obj, rel_load, consensus_disagreement,
// max_kkt_residual) and progress.csv (iteration, objective, total_energy,
// consensus_disagreement, max_kkt_residual, max_local_residual).
class TraceWriter {
public:
    explicit TraceWriter(const std::filesystem::path& out_dir);
    void operator()(const IterationRecord& rec, const std::vector<AgentState>& agents);
    TraceSink sink();

private:
    std::ofstream trace_;
    std::ofstream progress_;
};

struct ProgressRow {
    long iteration = 0;
    double objective = 0.0;
    double total_energy = 0.0;
    double consensus_disagreement = 0.0;
    double max_kkt_residual = 0.0;
    double max_local_residual = 0.0;
};

std::vector<ProgressRow> read_progress_csv(const std::filesystem::path& file);
std::vector<ConvergenceSample> read_trace_csv(const std::filesystem::path& file);
void write_convergence_csv(const std::filesystem::path& file, const std::vector<ConvergenceSample>& samples);

// pev_id, t, x_kw
void write_schedules_csv(const std::filesystem::path& file, const std::vector<Vec>& schedules);
std::vector<Vec> read_schedules_csv(const std::filesystem::path& file);

// time_index, load_kw
void write_load_csv(const std::filesystem::path& file, const Vec& load);
Vec read_load_csv(const std::filesystem::path& file);

// solution.csv, solution_summary.txt (f*, method, residuals), load.csv (time_index,
// load_kw, price) and inelastic.csv.
void write_solution(const std::filesystem::path& out_dir, const Problem& problem, const CentralSolution& sol,
                    const ResidualReport& residuals);

struct StoredSolution {
    double objective = 0.0;
    std::vector<Vec> schedules;
    Vec load;
};

StoredSolution read_solution(const std::filesystem::path& dir);

}  // namespace pevcc
