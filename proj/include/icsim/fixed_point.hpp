#pragma once

#include <optional>
#include <string>
#include <vector>

#include "icsim/quad_core.hpp"

namespace icsim {

struct FixedPointReport {
    Vector x_infinity;
    std::vector<SymMatrix> c_machines;  // C_m = I - (I - eta A_m)^K
    SymMatrix c_average;                // C
    bool exists = false;
    double lambda_min_C = 0.0;
    double kappa_prime = 0.0;
    double stationarity_residual = 0.0;  // || sum_m C_m (x_inf - x_m*) || / eta
    double eta = 0.0;
    int K = 0;
    std::optional<double> beta;
};

// 1 - (1 - t)^K, accurate for small t
double one_minus_power(double t, int K);

double kappa_prime(double mu, double H, double eta, int K);

FixedPointReport fixed_point(const ProblemInstance& instance, double eta, int K);

struct ExistenceResult {
    bool exists;
    double contraction_factor;  // spectral radius of I - beta C
};
ExistenceResult fixed_point_exists(const ProblemInstance& instance, double eta, int K,
                                   double beta);

struct DiscrepancyReport {
    double bound_xstar_xbar;                // zeta* tau / (H mu)
    std::optional<double> bound_xinf_xbar;  // needs K > 1
    double measured_xstar_xbar;
    double measured_xinf_xbar;
    double zeta_star;
    double tau;
};

// ratio eta mu K (1 - eta mu)^(K-1) / (1 - (1 - eta mu)^K), in (0, 1]
double discrepancy_factor(double eta_mu, int K);

DiscrepancyReport discrepancy_bounds(const ProblemInstance& instance, double eta, int K);

struct ContractionPrediction {
    double bound;               // on ||x_R - x_inf|| from a zero start
    double rate;                // per-round contraction used
    double kappa_prime;
    double x_inf_norm;
    std::string path;           // "beta_one" or "beta_scaled"
    double simplified_bound;    // B exp(-K R / kappa), constants omitted
};

ContractionPrediction contraction_predictor(const ProblemInstance& instance, double eta,
                                            double beta, int K, int R);

// Local GD (sigma = 0) run until successive iterates agree to tol, at most max_rounds.
Vector simulated_limit(const ProblemInstance& instance, double eta, int K, double beta = 1.0,
                       int max_rounds = 10000, double tol = 1e-14);

}  // namespace icsim
