#include "icsim/quad_core.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "icsim/hash.hpp"

namespace icsim {

SymMatrix::SymMatrix(const Matrix& entries, double symmetry_tol) {
    if (entries.rows() != entries.cols() || entries.rows() == 0) {
        throw InvalidInstance("symmetric matrix must be square and non-empty");
    }
    if (!entries.allFinite()) throw InvalidInstance("matrix has non-finite entries");
    double asym = (entries - entries.transpose()).cwiseAbs().maxCoeff();
    if (asym > symmetry_tol) {
        std::ostringstream os;
        os << "matrix is not symmetric (max |S - S^T| = " << asym << ")";
        throw InvalidInstance(os.str());
    }
    entries_ = 0.5 * (entries + entries.transpose());
    Eigen::SelfAdjointEigenSolver<Matrix> es(entries_);
    if (es.info() != Eigen::Success) throw InvalidInstance("eigendecomposition failed");
    eigenvalues_ = es.eigenvalues().reverse();
    eigenvectors_ = es.eigenvectors().rowwise().reverse();
}

SymMatrix SymMatrix::identity(int d) { return SymMatrix(Matrix::Identity(d, d)); }

SymMatrix SymMatrix::diagonal(const Vector& diag) { return SymMatrix(Matrix(diag.asDiagonal())); }

double SymMatrix::spectral_norm() const {
    return std::max(std::abs(lambda_max()), std::abs(lambda_min()));
}

SymMatrix SymMatrix::map(const std::function<double(double)>& f) const {
    Vector fl(eigenvalues_.size());
    for (Eigen::Index i = 0; i < fl.size(); ++i) {
        fl(i) = f(eigenvalues_(i));
        if (!std::isfinite(fl(i))) {
            std::ostringstream os;
            os << "matrix function not finite at eigenvalue " << eigenvalues_(i);
            throw DomainError(os.str());
        }
    }
    Matrix out = eigenvectors_ * fl.asDiagonal() * eigenvectors_.transpose();
    return SymMatrix(Matrix(0.5 * (out + out.transpose())), std::numeric_limits<double>::infinity());
}

SymMatrix SymMatrix::inverse(double tol) const {
    for (Eigen::Index i = 0; i < eigenvalues_.size(); ++i) {
        if (std::abs(eigenvalues_(i)) <= tol) {
            std::ostringstream os;
            os << "matrix is singular: eigenvalue " << eigenvalues_(i) << " within " << tol
               << " of zero";
            throw SingularityError(os.str(), eigenvalues_(i));
        }
    }
    return map([](double l) { return 1.0 / l; });
}

Vector SymMatrix::solve(const Vector& b, double tol) const {
    Vector c = eigenvectors_.transpose() * b;
    for (Eigen::Index i = 0; i < c.size(); ++i) {
        if (std::abs(eigenvalues_(i)) <= tol) {
            std::ostringstream os;
            os << "matrix is singular: eigenvalue " << eigenvalues_(i);
            throw SingularityError(os.str(), eigenvalues_(i));
        }
        c(i) /= eigenvalues_(i);
    }
    return eigenvectors_ * c;
}

SymMatrix matrix_function(const SymMatrix& s, const std::function<double(double)>& f) {
    return s.map(f);
}

SymMatrix matrix_power_by_squaring(const SymMatrix& s, int k) {
    if (k < 0) throw DomainError("negative matrix power");
    Matrix result = Matrix::Identity(s.dim(), s.dim());
    Matrix base = s.matrix();
    while (k > 0) {
        if (k & 1) result = result * base;
        k >>= 1;
        if (k > 0) base = base * base;
    }
    return SymMatrix(Matrix(0.5 * (result + result.transpose())),
                     std::numeric_limits<double>::infinity());
}

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(Matrix(a.matrix() + b.matrix()));
}
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b) {
    return SymMatrix(Matrix(a.matrix() - b.matrix()));
}
SymMatrix operator*(double c, const SymMatrix& a) { return SymMatrix(Matrix(c * a.matrix())); }

QuadraticMachine::QuadraticMachine(SymMatrix hessian, Vector optimum, int label, double offset)
    : hessian_(std::move(hessian)), optimum_(std::move(optimum)), label_(label), offset_(offset) {
    if (optimum_.size() != hessian_.dim()) {
        throw InvalidInstance("machine optimum dimension does not match hessian");
    }
    if (!optimum_.allFinite()) throw InvalidInstance("machine optimum has non-finite entries");
    double scale = std::max(1.0, std::abs(hessian_.lambda_max()));
    if (hessian_.lambda_min() < -1e-10 * scale) {
        std::ostringstream os;
        os << "machine " << label_ << " hessian is not PSD (lambda_min = "
           << hessian_.lambda_min() << ")";
        throw InvalidInstance(os.str());
    }
    linear_ = hessian_.matrix() * optimum_;
}

QuadraticMachine::QuadraticMachine(SymMatrix hessian, Vector optimum, Vector linear_term,
                                   int label, double offset)
    : QuadraticMachine(std::move(hessian), std::move(optimum), label, offset) {
    if (linear_term.size() != dim()) throw InvalidInstance("linear term dimension mismatch");
    double ref = linear_.norm();
    if ((linear_term - linear_).norm() > 1e-9 * (1.0 + ref)) {
        throw InvalidInstance("linear term is inconsistent with A_m x_m*");
    }
    linear_ = std::move(linear_term);
}

bool QuadraticMachine::strongly_convex() const {
    double scale = std::max(1.0, std::abs(hessian_.lambda_max()));
    return hessian_.lambda_min() > 1e-12 * scale;
}

double QuadraticMachine::value(const Vector& x) const {
    if (x.size() != dim()) throw InvalidInstance("dimension mismatch in value");
    Vector e = x - optimum_;
    return 0.5 * e.dot(hessian_.matrix() * e) + offset_;
}

Vector QuadraticMachine::gradient(const Vector& x) const {
    Vector g(dim());
    gradient_into(x, g);
    return g;
}

void QuadraticMachine::gradient_into(const Vector& x, Vector& out) const {
    if (x.size() != dim()) throw InvalidInstance("dimension mismatch in gradient");
    out.noalias() = hessian_.matrix() * x;
    out -= linear_;
}

ProblemInstance::ProblemInstance(std::vector<QuadraticMachine> machines, InstanceParams params)
    : machines_(std::move(machines)), params_(std::move(params)) {
    if (machines_.empty()) throw InvalidInstance("instance needs at least one machine");
    dim_ = machines_.front().dim();
    for (const auto& m : machines_) {
        if (m.dim() != dim_) throw InvalidInstance("machines do not share a dimension");
    }
    if (params_.sigma < 0 || !std::isfinite(params_.sigma)) {
        throw InvalidInstance("sigma must be finite and nonnegative");
    }
    sigma_ = params_.sigma;

    mu_ = std::numeric_limits<double>::infinity();
    smoothness_ = 0.0;
    Matrix sum = Matrix::Zero(dim_, dim_);
    average_linear_ = Vector::Zero(dim_);
    for (const auto& m : machines_) {
        mu_ = std::min(mu_, m.hessian().lambda_min());
        smoothness_ = std::max(smoothness_, m.hessian().lambda_max());
        sum += m.hessian().matrix();
        average_linear_ += m.linear_term();
    }
    mu_ = std::max(mu_, 0.0);
    const double inv_m = 1.0 / static_cast<double>(machines_.size());
    average_ = SymMatrix(Matrix(inv_m * sum));
    average_linear_ *= inv_m;
    if (smoothness_ <= 0.0) throw InvalidInstance("all hessians are zero");

    claimed_mu_ = params_.mu.value_or(mu_);
    claimed_smoothness_ = params_.smoothness.value_or(smoothness_);
    if (claimed_mu_ > mu_ + 1e-10) {
        std::ostringstream os;
        os << "claimed mu " << claimed_mu_ << " exceeds computed " << mu_;
        throw InvalidInstance(os.str());
    }
    if (claimed_smoothness_ < smoothness_ - 1e-10) {
        std::ostringstream os;
        os << "claimed H " << claimed_smoothness_ << " is below computed " << smoothness_;
        throw InvalidInstance(os.str());
    }

    if (average_.lambda_min() > 1e-12 * std::max(1.0, average_.lambda_max())) {
        global_optimum_ = average_.solve(average_linear_);
    }
    if (params_.radius_b) {
        if (*params_.radius_b < 0) throw InvalidInstance("radius_b must be nonnegative");
        radius_b_ = *params_.radius_b;
    } else {
        radius_auto_ = true;
        radius_b_ = global_optimum_ ? global_optimum_->norm() : 0.0;
    }
    start_ = params_.start.value_or(Vector::Zero(dim_));
    if (start_.size() != dim_) throw InvalidInstance("start point dimension mismatch");
    if (!start_.allFinite()) throw InvalidInstance("start point has non-finite entries");
}

const Vector& ProblemInstance::global_optimum() const {
    if (!global_optimum_) {
        std::ostringstream os;
        os << "average hessian is singular (lambda_min = " << average_.lambda_min() << ")";
        throw NotStronglyConvex(os.str());
    }
    return *global_optimum_;
}

bool ProblemInstance::all_strongly_convex() const {
    return std::all_of(machines_.begin(), machines_.end(),
                       [](const QuadraticMachine& m) { return m.strongly_convex(); });
}

Vector ProblemInstance::mean_optimum() const {
    Vector s = Vector::Zero(dim_);
    for (const auto& m : machines_) {
        if (!m.strongly_convex()) {
            std::ostringstream os;
            os << "machine " << m.label() << " has a singular hessian; its optimum is not unique";
            throw AmbiguousOptimum(os.str());
        }
        s += m.optimum();
    }
    return s / static_cast<double>(machines_.size());
}

double ProblemInstance::value(const Vector& x) const {
    double s = 0.0;
    for (const auto& m : machines_) s += m.value(x);
    return s / static_cast<double>(machines_.size());
}

Vector ProblemInstance::gradient(const Vector& x) const {
    if (x.size() != dim_) throw InvalidInstance("dimension mismatch in gradient");
    Vector g = average_.matrix() * x;
    g -= average_linear_;
    return g;
}

double ProblemInstance::suboptimality(const Vector& x) const {
    if (!global_optimum_) return std::numeric_limits<double>::quiet_NaN();
    Vector e = x - *global_optimum_;
    return 0.5 * e.dot(average_.matrix() * e);
}

std::uint64_t ProblemInstance::fingerprint() const {
    std::uint64_t h = kFnvOffset;
    auto feed = [&h](const double* p, Eigen::Index n) {
        h = fnv1a64(p, static_cast<std::size_t>(n) * sizeof(double), h);
    };
    std::int64_t header[2] = {dim_, static_cast<std::int64_t>(machines_.size())};
    h = fnv1a64(header, sizeof header, h);
    for (const auto& m : machines_) {
        feed(m.hessian().matrix().data(), m.hessian().matrix().size());
        feed(m.optimum().data(), m.optimum().size());
        feed(m.linear_term().data(), m.linear_term().size());
        double off = m.offset();
        feed(&off, 1);
    }
    feed(&sigma_, 1);
    feed(&radius_b_, 1);
    feed(start_.data(), start_.size());
    return h;
}

SymMatrix average_hessian(const ProblemInstance& instance) { return instance.average_hessian(); }
Vector global_optimum(const ProblemInstance& instance) { return instance.global_optimum(); }
Vector mean_optimum(const ProblemInstance& instance) { return instance.mean_optimum(); }

ValueAndGradient eval_and_gradient(const QuadraticMachine& machine, const Vector& x) {
    return {machine.value(x), machine.gradient(x)};
}

ValueAndGradient eval_and_gradient(const ProblemInstance& instance, const Vector& x) {
    return {instance.value(x), instance.gradient(x)};
}

}  // namespace icsim
