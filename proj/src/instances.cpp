#include "icsim/instances.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace icsim::gen {

ProblemInstance make_motivating_pair(double H, const Vector& x_star) {
    if (!(H > 0)) throw DomainError("H must be positive");
    if (x_star.size() != 2) throw DomainError("the motivating pair lives in two dimensions");
    std::vector<QuadraticMachine> ms;
    ms.emplace_back(SymMatrix::diagonal(Vector{{H, 0.0}}), x_star, 1);
    ms.emplace_back(SymMatrix::diagonal(Vector{{0.0, H}}), x_star, 2);
    return ProblemInstance(std::move(ms));
}

namespace {

void fix_sign(Eigen::Ref<Vector> v) {
    Eigen::Index i = 0;
    v.cwiseAbs().maxCoeff(&i);
    if (v(i) < 0) v = -v;
}

std::pair<double, double> rank_one_eigs(double alpha, double a) {
    double disc = std::sqrt(std::max(0.0, 0.25 - (a - a * a) * (1.0 - alpha * alpha)));
    return {0.5 + disc, 0.5 - disc};
}

}  // namespace

double rank_one_kappa(double alpha, double a) {
    auto [l1, l2] = rank_one_eigs(alpha, a);
    return l2 > 0 ? l1 / l2 : std::numeric_limits<double>::infinity();
}

RankOnePair make_rank_one_pair(double H, double B, int M, double target_kappa) {
    if (!(H > 0) || B < 0) throw DomainError("rank-one pair needs H > 0 and B >= 0");
    if (M < 2) throw DomainError("rank-one pair needs M >= 2");
    if (!(target_kappa >= 1)) throw DomainError("target kappa must be at least 1");
    const int n_odd = (M + 1) / 2;
    const double a = static_cast<double>(n_odd) / M;
    const double k0 = rank_one_kappa(0.0, a);
    if (target_kappa < k0 - 1e-12) {
        std::ostringstream os;
        os << "target kappa " << target_kappa << " is below the alpha = 0 value " << k0;
        throw InfeasibleError(os.str());
    }
    double lo = 0.0, hi = 1.0;
    for (int it = 0; it < 80; ++it) {
        double mid = 0.5 * (lo + hi);
        if (rank_one_kappa(mid, a) < target_kappa) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    const double alpha = target_kappa <= k0 ? 0.0 : 0.5 * (lo + hi);
    const Vector v{{alpha, std::sqrt(1.0 - alpha * alpha)}};
    const SymMatrix A1 = SymMatrix::diagonal(Vector{{H, 0.0}});
    const SymMatrix A2(Matrix(H * v * v.transpose()));

    SymMatrix avg(Matrix((1.0 - a) * A1.matrix() + a * A2.matrix()));
    Matrix V = avg.eigenvectors();
    fix_sign(V.col(0));
    fix_sign(V.col(1));
    const Vector xs = -B * (V.col(0) + V.col(1)) / std::sqrt(2.0);

    std::vector<QuadraticMachine> ms;
    for (int m = 1; m <= M; ++m) ms.emplace_back(m % 2 == 0 ? A1 : A2, xs, m);
    ProblemInstance inst(std::move(ms), InstanceParams{0.0, {}, {}, B, {}});
    auto [l1, l2] = rank_one_eigs(alpha, a);
    return {std::move(inst), alpha, a, l1, l2};
}

double ChainSpec::t() const {
    if (R < 2) throw DomainError("chain instance needs R >= 2");
    return 0.5 * std::log(B * B / R) / std::log(q());
}

int ChainSpec::dimension() const {
    return d ? *d : static_cast<int>(std::ceil(4.0 * (t() + R)));
}

Vector chain_toeplitz_eigenvalues(double H, double q, int d) {
    Vector lam(d);
    for (int i = 1; i <= d; ++i) {
        lam(i - 1) = (1.0 + q * q) * H + 2.0 * q * H * std::cos(i * std::numbers::pi / (d + 1));
    }
    return lam;
}

ChainInstance make_chain_instance(const ChainSpec& spec) {
    if (!(spec.H > 0) || !(spec.B > 0)) throw DomainError("chain instance needs H, B > 0");
    if (spec.M < 2) throw DomainError("chain instance needs M >= 2");
    const double q = spec.q();
    const double t = spec.t();
    const int d = spec.dimension();
    if (d < 1) throw CoverageError("chain dimension must be positive");
    if (std::pow(q, 2.0 * d) > 1e-3 * std::pow(q, 2.0 * (t + spec.R))) {
        std::ostringstream os;
        os << "dimension " << d << " too small: q^(2d) exceeds 1e-3 q^(2(t+R))";
        throw CoverageError(os.str());
    }
    const int n_even = spec.M / 2;
    const int n_odd = spec.M - n_even;
    const double pe = static_cast<double>(n_even) / spec.M;
    const double po = static_cast<double>(n_odd) / spec.M;

    // coordinate i (1-based) couples to i+1 through v_i = q e_i - e_{i+1}, with e_{d+1} = 0
    Matrix even = Matrix::Zero(d, d);
    Matrix odd = Matrix::Zero(d, d);
    even(0, 0) = 1.0;
    for (int i = 1; i <= d; ++i) {
        Matrix& target = (i % 2 == 0) ? even : odd;
        const int j = i - 1;
        target(j, j) += q * q;
        if (i < d) {
            target(j + 1, j + 1) += 1.0;
            target(j, j + 1) -= q;
            target(j + 1, j) -= q;
        }
    }
    even *= spec.H / pe;
    odd *= spec.H / po;

    Vector b_even = Vector::Zero(d);
    b_even(0) = spec.H / pe * q;
    Vector opt_even = Vector::Zero(d);
    opt_even(0) = q;

    std::vector<QuadraticMachine> ms;
    const SymMatrix Se(even), So(odd);
    for (int m = 1; m <= spec.M; ++m) {
        if (m % 2 == 0) {
            ms.emplace_back(Se, opt_even, b_even, m);
        } else {
            ms.emplace_back(So, Vector::Zero(d), Vector::Zero(d), m);
        }
    }
    Vector x0 = Vector::Zero(d);
    for (int i = 1; i <= d && i < t; ++i) x0(i - 1) = std::pow(q, i);
    InstanceParams params;
    params.radius_b = spec.B;
    params.start = x0;
    return {ProblemInstance(std::move(ms), params), x0, q, t, d, pe};
}

GdWorstCase make_gd_worst_case(double H, double kappa, double B, int d) {
    if (!(H > 0) || !(kappa >= 1) || B < 0) throw DomainError("invalid worst-case parameters");
    if (d < 2) throw DomainError("worst-case instance needs d >= 2");
    Vector diag = Vector::Constant(d, H);
    diag(1) = H / kappa;
    Vector xs = Vector::Zero(d);
    xs(0) = xs(1) = -B / std::sqrt(2.0);
    std::vector<QuadraticMachine> ms;
    ms.emplace_back(SymMatrix::diagonal(diag), xs, 1);
    return {ProblemInstance(std::move(ms), InstanceParams{0.0, {}, {}, B, {}}), kappa >= 6.0};
}

Matrix random_orthogonal(int d, std::mt19937_64& eng) {
    std::normal_distribution<double> n;
    Matrix G(d, d);
    for (int j = 0; j < d; ++j)
        for (int i = 0; i < d; ++i) G(i, j) = n(eng);
    Eigen::HouseholderQR<Matrix> qr(G);
    Matrix Q = qr.householderQ();
    Matrix Rm = qr.matrixQR().triangularView<Eigen::Upper>();
    for (int j = 0; j < d; ++j) {
        if (Rm(j, j) < 0) Q.col(j) = -Q.col(j);
    }
    return Q;
}

namespace {

Vector random_spectrum(int d, double mu, double H, std::mt19937_64& eng) {
    std::uniform_real_distribution<double> u(mu, H);
    Vector s(d);
    for (int i = 0; i < d; ++i) s(i) = u(eng);
    s(0) = H;
    if (d > 1) s(d - 1) = mu;
    return s;
}

Vector random_unit(int d, std::mt19937_64& eng) {
    std::normal_distribution<double> n;
    Vector v(d);
    do {
        for (int i = 0; i < d; ++i) v(i) = n(eng);
    } while (v.norm() == 0.0);
    return v / v.norm();
}

}  // namespace

ProblemInstance make_random_instance(int M, int d, double mu, double H, const HeteroDials& dials,
                                     std::uint64_t seed) {
    if (M < 1 || d < 1) throw DomainError("random instance needs M, d >= 1");
    if (!(mu > 0) || mu > H) throw DomainError("random instance needs 0 < mu <= H");
    if (dials.hessian_spread < 0 || dials.hessian_spread > 1 || dials.concept_spread < 0) {
        throw DomainError("hessian_spread must lie in [0,1] and concept_spread be nonnegative");
    }
    auto eng = keyed_engine(RngKey{seed, 0, 0, 0, 0x72616e64ULL});
    auto conj = [](const Matrix& Q, const Vector& s) {
        Matrix A = Q * s.asDiagonal() * Q.transpose();
        return Matrix(0.5 * (A + A.transpose()));
    };
    const Matrix base = conj(random_orthogonal(d, eng), random_spectrum(d, mu, H, eng));
    const Vector target = dials.center_norm * random_unit(d, eng);
    const double t = dials.hessian_spread;
    std::vector<QuadraticMachine> ms;
    for (int m = 0; m < M; ++m) {
        Matrix Bm = conj(random_orthogonal(d, eng), random_spectrum(d, mu, H, eng));
        Vector u = random_unit(d, eng);
        Matrix Am = t == 0.0 ? base : Matrix((1.0 - t) * base + t * Bm);
        ms.emplace_back(SymMatrix(Am), Vector(target + dials.concept_spread * u), m + 1);
    }
    return ProblemInstance(std::move(ms));
}

namespace {

void validate_regression(const RegressionSpec& spec) {
    if (spec.empty()) throw SpecError("regression spec needs at least one machine");
    const int d = spec.front().covariate_cov.dim();
    for (const auto& m : spec) {
        if (m.covariate_cov.dim() != d || m.covariate_mean.size() != d ||
            m.ground_truth.size() != d) {
            throw SpecError("regression spec dimensions disagree");
        }
        double scale = std::max(1.0, std::abs(m.covariate_cov.lambda_max()));
        if (m.covariate_cov.lambda_min() < -1e-12 * scale) {
            std::ostringstream os;
            os << "covariate covariance is indefinite (lambda_min = "
               << m.covariate_cov.lambda_min() << ")";
            throw SpecError(os.str());
        }
        if (m.label_noise < 0) throw SpecError("label noise must be nonnegative");
    }
}

SymMatrix second_moment(const RegressionMachine& m) {
    return SymMatrix(Matrix(m.covariate_mean * m.covariate_mean.transpose() +
                            m.covariate_cov.matrix()));
}

}  // namespace

RegressionSampler::RegressionSampler(RegressionSpec spec) : spec_(std::move(spec)) {
    validate_regression(spec_);
    for (const auto& m : spec_) {
        SymMatrix root =
            m.covariate_cov.map([](double l) { return std::sqrt(std::max(l, 0.0)); });
        cov_sqrt_.push_back(root.matrix());
    }
}

RegressionSampler::Sample RegressionSampler::draw(int machine, const RngKey& key) const {
    const auto& m = spec_.at(machine);
    auto eng = keyed_engine(key);
    std::normal_distribution<double> n;
    const int d = static_cast<int>(m.covariate_mean.size());
    Vector z(d);
    for (int i = 0; i < d; ++i) z(i) = n(eng);
    Vector beta = m.covariate_mean + cov_sqrt_[machine] * z;
    double y = m.ground_truth.dot(beta) + m.label_noise * n(eng);
    return {beta, y};
}

Vector RegressionSampler::sample_gradient(int machine, const Vector& x, const RngKey& key) const {
    auto s = draw(machine, key);
    return (x.dot(s.beta) - s.y) * s.beta;
}

LinearRegression make_linear_regression(const RegressionSpec& spec, bool strongly_convex) {
    validate_regression(spec);
    std::vector<QuadraticMachine> ms;
    int label = 1;
    for (const auto& m : spec) {
        SymMatrix A = second_moment(m);
        QuadraticMachine qm(A, m.ground_truth, label++, 0.5 * m.label_noise * m.label_noise);
        if (strongly_convex && !qm.strongly_convex()) {
            throw SpecError("strongly convex mode needs positive definite second moments");
        }
        ms.push_back(std::move(qm));
    }
    return {ProblemInstance(std::move(ms)), RegressionSampler(spec)};
}

RegressionTau regression_tau_bound(const RegressionSpec& spec) {
    validate_regression(spec);
    const int M = static_cast<int>(spec.size());
    RegressionTau out{Matrix::Zero(M, M), 0.0, 0.0};
    std::vector<SymMatrix> A;
    for (const auto& m : spec) A.push_back(second_moment(m));
    for (int m = 0; m < M; ++m) {
        for (int n = m + 1; n < M; ++n) {
            const auto& a = spec[m];
            const auto& b = spec[n];
            double bound = (a.covariate_mean.norm() + b.covariate_mean.norm()) *
                               (a.covariate_mean - b.covariate_mean).norm() +
                           (a.covariate_cov - b.covariate_cov).spectral_norm();
            out.pairwise_bound(m, n) = out.pairwise_bound(n, m) = bound;
            out.tau_bound = std::max(out.tau_bound, bound);
            out.measured_tau = std::max(out.measured_tau, (A[m] - A[n]).spectral_norm());
        }
    }
    return out;
}

}  // namespace icsim::gen
