#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "icsim/oracle.hpp"
#include "icsim/quad_core.hpp"

namespace icsim::gen {

ProblemInstance make_motivating_pair(double H, const Vector& x_star);

struct RankOnePair {
    ProblemInstance instance;
    double alpha;
    double mixture_weight;  // fraction of machines holding v v^T
    double lambda1;         // eigenvalues of the average, in units of H
    double lambda2;
};

// kappa of the average as a function of alpha for mixture weight a
double rank_one_kappa(double alpha, double a);
RankOnePair make_rank_one_pair(double H, double B, int M, double target_kappa);

struct ChainSpec {
    double H = 1.0;
    double B = 1.0;
    int R = 10;
    std::optional<int> d;  // default ceil(4 (t + R))
    int M = 2;

    double q() const { return 1.0 - 1.0 / R; }
    double t() const;
    int dimension() const;
};

struct ChainInstance {
    ProblemInstance instance;
    Vector x0;
    double q;
    double t;
    int d;
    double mixture_weight;  // fraction of even-labelled machines
};

ChainInstance make_chain_instance(const ChainSpec& spec);

// (1 + q^2) H - 2 q H cos(i pi / (d + 1)), i = 1..d, descending
Vector chain_toeplitz_eigenvalues(double H, double q, int d);

struct GdWorstCase {
    ProblemInstance instance;
    bool floor_constants_valid;  // kappa >= 6
};
GdWorstCase make_gd_worst_case(double H, double kappa, double B, int d = 2);

struct HeteroDials {
    double concept_spread = 0.0;
    double hessian_spread = 0.0;
    double center_norm = 1.0;
};

ProblemInstance make_random_instance(int M, int d, double mu, double H, const HeteroDials& dials,
                                     std::uint64_t seed);

Matrix random_orthogonal(int d, std::mt19937_64& eng);

struct RegressionMachine {
    Vector covariate_mean;
    SymMatrix covariate_cov;
    Vector ground_truth;
    double label_noise = 0.0;
};
using RegressionSpec = std::vector<RegressionMachine>;

class RegressionSampler {
public:
    explicit RegressionSampler(RegressionSpec spec);

    struct Sample {
        Vector beta;
        double y;
    };
    Sample draw(int machine, const RngKey& key) const;
    // gradient of 1/2 (y - <x, beta>)^2 on one fresh sample
    Vector sample_gradient(int machine, const Vector& x, const RngKey& key) const;

private:
    RegressionSpec spec_;
    std::vector<Matrix> cov_sqrt_;
};

struct LinearRegression {
    ProblemInstance instance;
    RegressionSampler sampler;
};
LinearRegression make_linear_regression(const RegressionSpec& spec, bool strongly_convex = false);

struct RegressionTau {
    Matrix pairwise_bound;
    double tau_bound;
    double measured_tau;
};
RegressionTau regression_tau_bound(const RegressionSpec& spec);

}  // namespace icsim::gen
