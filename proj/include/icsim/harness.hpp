#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "icsim/algorithms.hpp"
#include "icsim/io.hpp"
#include "icsim/quad_core.hpp"

namespace icsim {

// c * H^a * mu^b * K^c * R^d with rational exponents, e.g. "1/(2*H*K^(3/2))".
class ScheduleExpr {
public:
    static ScheduleExpr parse(const std::string& text);
    static ScheduleExpr constant(double c);

    double evaluate(const std::map<std::string, double>& values) const;
    // symbols with a nonzero exponent
    std::vector<std::string> symbols() const;
    const std::string& text() const { return text_; }
    double coefficient() const { return coefficient_; }
    double exponent(const std::string& symbol) const;

private:
    std::string text_;
    double coefficient_ = 1.0;
    std::map<std::string, double> exponents_;
};

// Symbols a schedule may use.
const std::vector<std::string>& schedule_symbols();

struct AxisValue {
    std::optional<double> number;
    std::optional<ScheduleExpr> schedule;

    std::string label() const;
    double resolve(const std::map<std::string, double>& values) const;
};

struct SweepAxis {
    std::string name;  // K, R, eta, beta, gamma, sigma, seed, R1
    std::vector<AxisValue> values;
};

struct NamedSchedule {
    std::string name;
    ScheduleExpr expr;
};

struct ExperimentConfig {
    std::string kind = "simulation";  // or "fixed_point_sweep"
    json instance;                    // {"generator": ..., "params": {...}} or {"file": ...}
    std::vector<AlgorithmConfig> algorithms;
    std::vector<SweepAxis> axes;      // evaluated in canonical order, see sweep_axis_names()
    std::string output_dir = "out";
    std::uint64_t seed = 0;
    std::size_t max_runs = 100000;
    std::vector<NamedSchedule> eta_schedules;  // fixed_point_sweep only
    std::vector<int> K_grid;                   // fixed_point_sweep only
    std::string base_dir;                      // resolves relative instance files
    std::string raw;                           // config bytes, hashed into the manifest
};

const std::vector<std::string>& sweep_axis_names();

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& base_dir = "");
ExperimentConfig load_experiment_config(const std::string& path);

// Generators: motivating, rank_one, chain, gd_worst_case, random, regression.
ProblemInstance make_instance(const std::string& generator, const json& params);
ProblemInstance make_instance_from_config(const json& source, const std::string& base_dir = "");

struct RunRecord {
    int index = 0;
    AlgorithmConfig config;
    json params;  // resolved sweep values
    std::string status = "ok";  // ok, diverged, error
    std::string message;
    double final_suboptimality = 0.0;
    int rounds = 0;
    std::string file;
    std::string csv;
};

struct ExperimentResult {
    std::vector<RunRecord> runs;
    json manifest;
    std::string output_dir;
};

// Expands the sweep in canonical order without running anything.
std::vector<RunRecord> expand_sweep(const ExperimentConfig& config, const ProblemInstance& instance);

ExperimentResult run_experiment(const ExperimentConfig& config);

struct FixedPointSweepRow {
    int K;
    std::string schedule;
    double eta;
    bool exists;
    double dist_to_xstar;
    double dist_to_xbar;
    double log_dist_to_xstar;
    std::string status;  // ok, no_fixed_point, invalid_eta
};

std::vector<FixedPointSweepRow> sweep_fixed_point(const ProblemInstance& instance,
                                                  const std::vector<NamedSchedule>& eta_schedules,
                                                  const std::vector<int>& K_grid);
std::string fixed_point_sweep_csv(const std::vector<FixedPointSweepRow>& rows);

struct StepSizeSearch {
    double best = 0.0;
    double best_eta = 0.0;   // gamma for the mini-batch methods
    double best_beta = 1.0;
    int evaluations = 0;
    int diverged = 0;
};

// Runs every grid point; divergent runs count as +inf. For the mini-batch methods the
// eta grid is the gamma grid and beta is ignored.
StepSizeSearch step_size_search(const ProblemInstance& instance, const AlgorithmConfig& base,
                                const std::vector<double>& eta_grid,
                                const std::vector<double>& beta_grid, int R);

// n log-spaced points from lo to hi inclusive
std::vector<double> log_grid(double lo, double hi, int n);

// ICSIM_THREADS if set, else hardware concurrency
int worker_threads();

// Calls f(i) for i in [0, n) on up to worker_threads() threads.
void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f);

std::string hex64(std::uint64_t v);

}  // namespace icsim
