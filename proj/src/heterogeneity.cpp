#include "icsim/heterogeneity.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "icsim/fixed_point.hpp"
#include "icsim/oracle.hpp"

namespace icsim {

ZetaStar zeta_star(const ProblemInstance& instance) {
    const Vector& xs = instance.global_optimum();
    const int M = instance.num_machines();
    double dist2 = 0.0;
    double grad2 = 0.0;
    for (const auto& m : instance.machines()) {
        dist2 += (m.optimum() - xs).squaredNorm();
        grad2 += m.gradient(xs).squaredNorm();
    }
    return {instance.smoothness() * std::sqrt(dist2 / M), std::sqrt(grad2 / M)};
}

TauReport tau(const ProblemInstance& instance) {
    const int M = instance.num_machines();
    TauReport rep{0.0, Matrix::Zero(M, M)};
    for (int m = 0; m < M; ++m) {
        for (int n = m + 1; n < M; ++n) {
            double t = (instance.machine(m).hessian() - instance.machine(n).hessian()).spectral_norm();
            rep.pairwise(m, n) = rep.pairwise(n, m) = t;
            rep.tau = std::max(rep.tau, t);
        }
    }
    return rep;
}

double q_lipschitz(const ProblemInstance&) { return 0.0; }

double gradient_dissimilarity(const ProblemInstance& instance, const Vector& x) {
    const Vector g = instance.gradient(x);
    double s = 0.0;
    for (const auto& m : instance.machines()) s += (m.gradient(x) - g).squaredNorm();
    return std::sqrt(s / instance.num_machines());
}

std::string to_string(BallCenter c) { return c == BallCenter::origin ? "origin" : "optimum"; }

namespace {

// argmax over ||y|| <= D of y^T P y + 2 q^T y for PSD P; the maximum sits on the sphere
// at y = (lambda I - P)^{-1} q with lambda >= lambda_max(P).
Vector maximize_convex_quadratic_on_ball(const SymMatrix& P, const Vector& q, double D) {
    const int d = P.dim();
    if (D <= 0.0) return Vector::Zero(d);
    const Vector& p = P.eigenvalues();
    const Matrix& U = P.eigenvectors();
    const Vector qt = U.transpose() * q;
    const double pmax = p(0);
    auto y_of = [&](double lam) {
        Vector y(d);
        for (int i = 0; i < d; ++i) y(i) = qt(i) / (lam - p(i));
        return y;
    };
    const double span = std::max(1e-300, std::abs(pmax) * 1e-15);
    double lo = pmax + span;
    Vector ylo = y_of(lo);
    Vector y;
    if (ylo.allFinite() && ylo.norm() < D) {
        // hard case: complete along the top eigenvector
        double rest = std::sqrt(std::max(0.0, D * D - ylo.squaredNorm()));
        y = ylo;
        y(0) += rest;
    } else {
        double hi = pmax + q.norm() / D + span;
        for (int it = 0; it < 300; ++it) {
            double mid = 0.5 * (lo + hi);
            if (mid <= lo || mid >= hi) break;
            if (y_of(mid).norm() > D) {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        y = y_of(hi);
    }
    Vector out = U * y;
    double n = out.norm();
    if (n > D) out *= D / n;
    return out;
}

}  // namespace

ZetaBall zeta_ball(const ProblemInstance& instance, double D, int n_samples, std::uint64_t seed,
                   BallCenter center) {
    if (D < 0) throw DomainError("ball radius must be nonnegative");
    const int d = instance.dim();
    const int M = instance.num_machines();
    const Vector& xs = instance.global_optimum();
    const Vector c0 = center == BallCenter::origin ? Vector::Zero(d) : xs;

    ZetaBall out;
    out.D = D;
    out.center = center;
    out.anchor_distance = D + (c0 - xs).norm();
    out.bound = zeta_star(instance).distance_form + tau(instance).tau * out.anchor_distance;
    out.empirical = 0.0;

    auto consider = [&](const Vector& y) {
        double v = gradient_dissimilarity(instance, c0 + y);
        if (v > out.empirical) out.empirical = v;
        return v;
    };
    consider(Vector::Zero(d));
    if (D == 0.0) {
        out.exact_sup = out.empirical;
        out.maximizer = c0;
        return out;
    }

    // dissimilarity^2 at c0 + y is (1/M) sum ||G_m y + c_m||^2 with G_m = A_m - A
    const Matrix& A = instance.average_hessian().matrix();
    const Vector gbar = instance.gradient(c0);
    Matrix P = Matrix::Zero(d, d);
    Vector q = Vector::Zero(d);
    std::vector<SymMatrix> G;
    G.reserve(M);
    for (const auto& m : instance.machines()) {
        Matrix Gm = m.hessian().matrix() - A;
        Vector cm = m.gradient(c0) - gbar;
        P += Gm * Gm;
        q += Gm * cm;
        G.emplace_back(Matrix(0.5 * (Gm + Gm.transpose())), 1e-9);
    }
    P /= M;
    q /= M;
    SymMatrix Ps(Matrix(0.5 * (P + P.transpose())), 1e-9);
    Vector ystar = maximize_convex_quadratic_on_ball(Ps, q, D);
    out.exact_sup = consider(ystar);
    out.maximizer = c0 + ystar;

    for (const auto& g : G) {
        consider(D * g.eigenvectors().col(0));
        consider(-D * g.eigenvectors().col(0));
        consider(D * g.eigenvectors().col(d - 1));
        consider(-D * g.eigenvectors().col(d - 1));
    }
    if (center == BallCenter::origin && xs.norm() > 0) {
        consider(xs.norm() <= D ? Vector(xs) : Vector(D * xs / xs.norm()));
        consider(-D * xs / xs.norm());
    }

    auto eng = keyed_engine(RngKey{seed, 0, 0, 0, 0x7a657461ULL});
    std::normal_distribution<double> normal;
    std::uniform_real_distribution<double> unif;
    Vector y(d);
    for (int s = 0; s < n_samples; ++s) {
        for (int i = 0; i < d; ++i) y(i) = normal(eng);
        double n = y.norm();
        if (n == 0.0) continue;
        double r = D * std::pow(unif(eng), 1.0 / d);
        consider(y * (r / n));
    }
    return out;
}

double rho(const ProblemInstance& instance, double eta, int K) {
    if (!(eta > 0) || K < 1) throw DomainError("rho needs eta > 0 and K >= 1");
    const Vector& xs = instance.global_optimum();
    const int M = instance.num_machines();
    Vector sum = Vector::Zero(instance.dim());
    Vector g(instance.dim());
    for (const auto& m : instance.machines()) {
        Vector x = xs;
        for (int k = 0; k < K; ++k) {
            m.gradient_into(x, g);
            x -= eta * g;
        }
        sum += xs - x;
    }
    return sum.norm() / (M * eta * K);
}

double rho_closed_form(const ProblemInstance& instance, double eta, int K) {
    if (!(eta > 0) || K < 1) throw DomainError("rho needs eta > 0 and K >= 1");
    const Vector& xs = instance.global_optimum();
    const int M = instance.num_machines();
    Vector sum = Vector::Zero(instance.dim());
    for (const auto& m : instance.machines()) {
        SymMatrix cm = m.hessian().map([&](double l) { return one_minus_power(eta * l, K); });
        sum += cm.matrix() * (xs - m.optimum());
    }
    return sum.norm() / (M * eta * K);
}

RhoBounds rho_bounds(const ProblemInstance& instance, double eta, int K) {
    if (!(eta > 0) || K < 1) throw DomainError("rho bounds need eta > 0 and K >= 1");
    const double H = instance.smoothness();
    const double zs = zeta_star(instance).distance_form;
    RhoBounds b;
    b.general = zs * std::expm1((K - 1) * std::log1p(eta * H));
    b.quadratic = one_minus_power(eta * H, K) / (eta * K) * zs / H;
    return b;
}

HeterogeneityReport heterogeneity_report(const ProblemInstance& instance,
                                         const HeterogeneityOptions& options) {
    HeterogeneityReport rep;
    rep.zeta_star = zeta_star(instance);
    auto t = tau(instance);
    rep.tau = t.tau;
    rep.pairwise_tau = t.pairwise;
    if (options.ball_radius) {
        rep.zeta_ball = zeta_ball(instance, *options.ball_radius, options.n_samples, options.seed,
                                  BallCenter::origin);
        rep.zeta_ball_at_optimum = zeta_ball(instance, *options.ball_radius, options.n_samples,
                                             options.seed, BallCenter::optimum);
    }
    rep.rho_eta = options.eta.value_or(1.0 / (2.0 * instance.smoothness()));
    rep.rho_K = options.K;
    rep.rho = rho(instance, rep.rho_eta, rep.rho_K);
    rep.rho_bounds = rho_bounds(instance, rep.rho_eta, rep.rho_K);
    rep.q_lipschitz = q_lipschitz(instance);
    return rep;
}

}  // namespace icsim
