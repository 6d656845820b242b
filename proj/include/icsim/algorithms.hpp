#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "icsim/oracle.hpp"
#include "icsim/quad_core.hpp"

namespace icsim {

enum class Algorithm {
    local_sgd,
    minibatch_sgd,
    accelerated_minibatch_sgd,
    single_machine_sgd,
    two_stage,
};

std::string to_string(Algorithm a);
Algorithm parse_algorithm(const std::string& name);

// Unset step sizes resolve to eta = 1/(2H), beta = 1, gamma = 1/H.
struct AlgorithmConfig {
    Algorithm algorithm = Algorithm::local_sgd;
    std::optional<double> eta;
    std::optional<double> beta;
    std::optional<double> gamma;
    int K = 1;
    int R = 1;
    NoiseSpec noise;
    bool record_local = false;
    bool record_consensus = false;
    std::optional<int> stage_switch;
    // accuracy target used to pick the switch round automatically
    std::optional<double> target_epsilon;
    // stop once ||x_r - x_{r-1}|| <= tol * (1 + ||x_r||)
    std::optional<double> stop_tolerance;
};

struct ResolvedSteps {
    double eta;
    double beta;
    double gamma;
};

ResolvedSteps resolve_steps(const AlgorithmConfig& config, const ProblemInstance& instance);

struct RoundRecord {
    int round;
    Vector x;
    double suboptimality;
    double distance;
    double consensus;  // peak consensus error inside the round, NaN when not recorded
};

struct ConsensusRecord {
    int round;
    int step;  // local steps taken in this round, 1..K
    double value;
};

struct Trajectory {
    std::vector<RoundRecord> rounds;
    // locals[t][m] with t = (r-1)*K + k, k in [0, K): the point where step t queries its gradient
    std::vector<std::vector<Vector>> locals;
    std::vector<ConsensusRecord> consensus;
    AlgorithmConfig config;
    ResolvedSteps steps{};
    std::uint64_t instance_fingerprint = 0;
    std::optional<int> switch_round;
    int machines = 0;
    bool stopped_early = false;

    const Vector& final_iterate() const { return rounds.back().x; }
    double final_suboptimality() const { return rounds.back().suboptimality; }
};

Trajectory run_local_sgd(const ProblemInstance& instance, const AlgorithmConfig& config);
Trajectory run_minibatch_sgd(const ProblemInstance& instance, const AlgorithmConfig& config);
Trajectory run_accelerated_minibatch_sgd(const ProblemInstance& instance,
                                         const AlgorithmConfig& config);
Trajectory run_single_machine_sgd(const ProblemInstance& instance, const AlgorithmConfig& config);
Trajectory run_two_stage(const ProblemInstance& instance, const AlgorithmConfig& config);

// Dispatches on config.algorithm.
Trajectory run_algorithm(const ProblemInstance& instance, const AlgorithmConfig& config);

// Switch round chosen from the crossover of the local-GD contraction and its fixed-point bias.
int auto_stage_switch(const ProblemInstance& instance, const AlgorithmConfig& config);

Vector weighted_average_iterate(const Trajectory& traj, double mu, double eta);

double consensus_error(const std::vector<Vector>& iterates);

std::optional<int> rounds_to_accuracy(const Trajectory& traj, double epsilon);

}  // namespace icsim
