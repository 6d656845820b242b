#pragma once

#include <cstdint>
#include <optional>
#include <string>

#include "icsim/quad_core.hpp"

namespace icsim {

struct ZetaStar {
    double distance_form;  // H * sqrt(mean ||x_m* - x*||^2), the canonical value
    double gradient_form;  // sqrt(mean ||grad F_m(x*)||^2)
};
ZetaStar zeta_star(const ProblemInstance& instance);

struct TauReport {
    double tau;
    Matrix pairwise;  // ||A_m - A_n||_2
};
TauReport tau(const ProblemInstance& instance);

// Identically zero: quadratic Hessians are constant.
double q_lipschitz(const ProblemInstance& instance);

// sqrt((1/M) sum_m ||grad F_m(x) - grad F(x)||^2)
double gradient_dissimilarity(const ProblemInstance& instance, const Vector& x);

enum class BallCenter { origin, optimum };
std::string to_string(BallCenter c);

struct ZetaBall {
    double D;
    BallCenter center;
    double empirical;        // sup of the dissimilarity over evaluated points of the ball
    double bound;            // zeta* + tau * (largest distance from x* to the ball)
    double anchor_distance;  // that largest distance: D + ||center - x*||
    double exact_sup;        // value at the analytic maximizer
    Vector maximizer;
};
ZetaBall zeta_ball(const ProblemInstance& instance, double D, int n_samples, std::uint64_t seed,
                   BallCenter center = BallCenter::origin);

// (1/(M eta K)) || sum_m (x* - xhat_K^m) || with K exact local steps from x*.
double rho(const ProblemInstance& instance, double eta, int K);
// Same quantity through (I - (I - eta A_m)^K)(x* - x_m*).
double rho_closed_form(const ProblemInstance& instance, double eta, int K);

struct RhoBounds {
    double general;    // zeta* ((1 + eta H)^(K-1) - 1)
    double quadratic;  // (1 - (1 - eta H)^K) / (eta K) * zeta* / H
};
RhoBounds rho_bounds(const ProblemInstance& instance, double eta, int K);

struct HeterogeneityReport {
    ZetaStar zeta_star;
    double tau;
    Matrix pairwise_tau;
    std::optional<ZetaBall> zeta_ball;
    std::optional<ZetaBall> zeta_ball_at_optimum;
    double rho_eta = 0.0;
    int rho_K = 0;
    double rho = 0.0;
    RhoBounds rho_bounds{};
    double q_lipschitz = 0.0;
};

struct HeterogeneityOptions {
    std::optional<double> ball_radius;
    std::optional<double> eta;  // default 1/(2H)
    int K = 10;
    int n_samples = 10000;
    std::uint64_t seed = 0;
};
HeterogeneityReport heterogeneity_report(const ProblemInstance& instance,
                                         const HeterogeneityOptions& options = {});

}  // namespace icsim
