#include "icsim/fixed_point.hpp"

#include <cmath>
#include <limits>
#include <sstream>

#include "icsim/algorithms.hpp"
#include "icsim/heterogeneity.hpp"

namespace icsim {

double one_minus_power(double t, int K) {
    if (t >= 0.0 && t < 1.0) return -std::expm1(static_cast<double>(K) * std::log1p(-t));
    return 1.0 - std::pow(1.0 - t, K);
}

double kappa_prime(double mu, double H, double eta, int K) {
    double den = one_minus_power(eta * mu, K);
    if (den <= 0.0) throw DomainError("kappa' undefined: 1 - (1 - eta mu)^K <= 0");
    return one_minus_power(eta * H, K) / den;
}

namespace {

void require_strongly_convex(const ProblemInstance& instance) {
    for (const auto& m : instance.machines()) {
        if (!m.strongly_convex()) {
            std::ostringstream os;
            os << "machine " << m.label() << " is not strongly convex (lambda_min = "
               << m.hessian().lambda_min() << "); the fixed point is undefined";
            throw NotStronglyConvex(os.str());
        }
    }
}

}  // namespace

FixedPointReport fixed_point(const ProblemInstance& instance, double eta, int K) {
    if (!(eta > 0)) throw DomainError("eta must be positive");
    if (K < 1) throw DomainError("K must be at least 1");
    require_strongly_convex(instance);

    const int M = instance.num_machines();
    const int d = instance.dim();
    FixedPointReport rep;
    rep.eta = eta;
    rep.K = K;
    Matrix csum = Matrix::Zero(d, d);
    Vector rhs = Vector::Zero(d);
    rep.c_machines.reserve(M);
    for (const auto& m : instance.machines()) {
        SymMatrix cm = m.hessian().map([&](double l) { return one_minus_power(eta * l, K); });
        csum += cm.matrix();
        rhs += cm.matrix() * m.optimum();
        rep.c_machines.push_back(std::move(cm));
    }
    rep.c_average = SymMatrix(Matrix(csum / static_cast<double>(M)));
    rhs /= static_cast<double>(M);
    rep.lambda_min_C = rep.c_average.lambda_min();
    rep.exists = rep.lambda_min_C > 1e-12;
    rep.kappa_prime = kappa_prime(instance.mu(), instance.smoothness(), eta, K);
    if (rep.exists) {
        rep.x_infinity = rep.c_average.solve(rhs, 0.0);
        Vector res = Vector::Zero(d);
        for (int m = 0; m < M; ++m) {
            res += rep.c_machines[m].matrix() * (rep.x_infinity - instance.machine(m).optimum());
        }
        rep.stationarity_residual = res.norm() / eta;
    } else {
        rep.x_infinity = Vector::Constant(d, std::numeric_limits<double>::quiet_NaN());
        rep.stationarity_residual = std::numeric_limits<double>::quiet_NaN();
    }
    return rep;
}

ExistenceResult fixed_point_exists(const ProblemInstance& instance, double eta, int K,
                                   double beta) {
    if (!(beta > 0)) throw DomainError("beta must be positive");
    auto rep = fixed_point(instance, eta, K);
    const Vector& lam = rep.c_average.eigenvalues();
    double radius = 0.0;
    for (Eigen::Index i = 0; i < lam.size(); ++i) {
        radius = std::max(radius, std::abs(1.0 - beta * lam(i)));
    }
    return {rep.exists && radius < 1.0, radius};
}

double discrepancy_factor(double eta_mu, int K) {
    if (!(eta_mu > 0) || eta_mu > 1) throw DomainError("discrepancy factor needs eta*mu in (0,1]");
    if (K < 1) throw DomainError("K must be at least 1");
    return eta_mu * K * std::pow(1.0 - eta_mu, K - 1) / one_minus_power(eta_mu, K);
}

DiscrepancyReport discrepancy_bounds(const ProblemInstance& instance, double eta, int K) {
    if (K <= 1) throw DomainError("the fixed-point discrepancy bound needs K > 1");
    require_strongly_convex(instance);
    const double H = instance.smoothness();
    const double mu = instance.mu();
    DiscrepancyReport rep;
    rep.zeta_star = zeta_star(instance).distance_form;
    rep.tau = tau(instance).tau;
    rep.bound_xstar_xbar = rep.zeta_star * rep.tau / (H * mu);
    rep.bound_xinf_xbar = rep.bound_xstar_xbar * discrepancy_factor(eta * mu, K);
    const Vector xbar = instance.mean_optimum();
    rep.measured_xstar_xbar = (instance.global_optimum() - xbar).norm();
    auto fp = fixed_point(instance, eta, K);
    if (!fp.exists) throw DomainError("fixed point does not exist for these step sizes");
    rep.measured_xinf_xbar = (fp.x_infinity - xbar).norm();
    return rep;
}

ContractionPrediction contraction_predictor(const ProblemInstance& instance, double eta,
                                            double beta, int K, int R) {
    if (R < 0) throw DomainError("R must be nonnegative");
    auto fp = fixed_point(instance, eta, K);
    if (!fp.exists) throw DomainError("fixed point does not exist for these step sizes");
    const double H = instance.smoothness();
    const double mu = instance.mu();
    ContractionPrediction p;
    p.kappa_prime = fp.kappa_prime;
    p.x_inf_norm = fp.x_infinity.norm();
    if (beta == 1.0) {
        p.path = "beta_one";
        p.rate = std::pow(1.0 - eta * mu, K);
        p.bound = std::pow(1.0 - eta * mu, static_cast<double>(K) * R) * p.kappa_prime *
                  p.x_inf_norm;
    } else {
        const double top = one_minus_power(eta * H, K);
        const double c = 1.0 / (beta * top);
        if (!(top > 0) || !(c > 1.0)) {
            std::ostringstream os;
            os << "beta = " << beta << " is not of the form 1/(c(1-(1-eta H)^K)) with c > 1; "
               << "no contraction bound is available";
            throw DomainError(os.str());
        }
        p.path = "beta_scaled";
        p.rate = 1.0 - 1.0 / (c * p.kappa_prime);
        p.bound = std::pow(p.rate, R) * p.kappa_prime * p.x_inf_norm;
    }
    p.simplified_bound =
        instance.radius_b() * std::exp(-static_cast<double>(K) * R * mu / H);
    return p;
}

Vector simulated_limit(const ProblemInstance& instance, double eta, int K, double beta,
                       int max_rounds, double tol) {
    AlgorithmConfig cfg;
    cfg.algorithm = Algorithm::local_sgd;
    cfg.eta = eta;
    cfg.beta = beta;
    cfg.K = K;
    cfg.R = max_rounds;
    cfg.stop_tolerance = tol;
    return run_local_sgd(instance, cfg).final_iterate();
}

}  // namespace icsim
