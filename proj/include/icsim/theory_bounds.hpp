#pragma once

#include <string>
#include <utility>
#include <vector>

#include "icsim/quad_core.hpp"

namespace icsim::bounds {

struct BoundParams {
    double H = 1.0;
    double B = 1.0;
    double sigma = 0.0;
    double mu = 0.0;
    double tau = 0.0;
    double zeta = 0.0;       // heterogeneity over the region visited by the iterates
    double zeta_star = 0.0;  // heterogeneity at the optimum
    double Q = 0.0;
    double M = 1.0;
    double K = 1.0;
    double R = 1.0;
    double D = 0.0;
    double epsilon = 0.0;
    double eta = 0.0;  // consensus bound only
};

struct BoundReport {
    std::string name;
    double value = 0.0;
    std::string aggregation = "sum";
    std::vector<std::pair<std::string, double>> terms;
    std::vector<std::string> caveats;
    std::string branch;  // convex bound: which side of the inner min won
    std::vector<std::pair<std::string, double>> branch_totals;

    double term(const std::string& label) const;
};

BoundReport eval_sc_upper_bound(const BoundParams& p);
BoundReport eval_convex_upper_bound(const BoundParams& p);
BoundReport eval_lsgd_lower_bound(const BoundParams& p);
BoundReport eval_ai_lower_bound(const BoundParams& p);
double eval_gd_lower_bound(double H, double B, double kappa, double R);

struct TwoStageRounds {
    int R1;
    int R2;
    int total;
    int printed_formula_total;
    double R1_raw;
    double R2_raw;
    double printed_formula_raw;
};
TwoStageRounds two_stage_rounds(double kappa, double K, double zeta_star, double tau, double H,
                                double mu, double B, double epsilon);

Vector closed_form_motivating(double H, double eta, double beta, int K, int R,
                              const Vector& x_star);

double consensus_bound(double sigma, double eta, double K, double zeta);

// Names accepted by evaluate(): sc_upper, convex_upper, lsgd_lower, ai_lower, gd_lower,
// two_stage, consensus.
std::vector<std::string> evaluator_names();
BoundReport evaluate(const std::string& name, const BoundParams& p);

}  // namespace icsim::bounds
