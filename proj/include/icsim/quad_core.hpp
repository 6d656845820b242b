#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "icsim/error.hpp"

namespace icsim {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

// Dense symmetric matrix with an eagerly computed eigendecomposition.
// Eigenvalues are stored in descending order.
class SymMatrix {
public:
    SymMatrix() = default;
    explicit SymMatrix(const Matrix& entries, double symmetry_tol = 1e-12);

    static SymMatrix identity(int d);
    static SymMatrix diagonal(const Vector& diag);

    int dim() const { return static_cast<int>(entries_.rows()); }
    const Matrix& matrix() const { return entries_; }
    const Vector& eigenvalues() const { return eigenvalues_; }
    const Matrix& eigenvectors() const { return eigenvectors_; }
    double lambda_max() const { return eigenvalues_(0); }
    double lambda_min() const { return eigenvalues_(eigenvalues_.size() - 1); }
    double spectral_norm() const;

    Vector apply(const Vector& x) const { return entries_ * x; }

    // V diag(f(lambda)) V^T
    SymMatrix map(const std::function<double(double)>& f) const;
    SymMatrix inverse(double tol = 1e-12) const;
    Vector solve(const Vector& b, double tol = 1e-12) const;

private:
    Matrix entries_;
    Vector eigenvalues_;
    Matrix eigenvectors_;
};

SymMatrix matrix_function(const SymMatrix& s, const std::function<double(double)>& f);

// Integer power via binary exponentiation; cross-check for the eigen route.
SymMatrix matrix_power_by_squaring(const SymMatrix& s, int k);

SymMatrix operator+(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator-(const SymMatrix& a, const SymMatrix& b);
SymMatrix operator*(double c, const SymMatrix& a);

// F_m(x) = 1/2 (x - x_m*)^T A_m (x - x_m*) + offset.
// The gradient is evaluated as A_m x - b_m with b_m = A_m x_m*; generators with an
// exactly known sparse b_m pass it in so that structural zeros survive rounding.
class QuadraticMachine {
public:
    QuadraticMachine(SymMatrix hessian, Vector optimum, int label = 0, double offset = 0.0);
    QuadraticMachine(SymMatrix hessian, Vector optimum, Vector linear_term, int label,
                     double offset = 0.0);

    int dim() const { return hessian_.dim(); }
    int label() const { return label_; }
    const SymMatrix& hessian() const { return hessian_; }
    const Vector& optimum() const { return optimum_; }
    const Vector& linear_term() const { return linear_; }
    double offset() const { return offset_; }
    bool strongly_convex() const;

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
    // out = A x - b without allocating
    void gradient_into(const Vector& x, Vector& out) const;

private:
    SymMatrix hessian_;
    Vector optimum_;
    Vector linear_;
    int label_;
    double offset_;
};

struct InstanceParams {
    double sigma = 0.0;
    std::optional<double> mu;
    std::optional<double> smoothness;
    std::optional<double> radius_b;
    std::optional<Vector> start;
};

class ProblemInstance {
public:
    ProblemInstance(std::vector<QuadraticMachine> machines, InstanceParams params = {});

    int num_machines() const { return static_cast<int>(machines_.size()); }
    int dim() const { return dim_; }
    const std::vector<QuadraticMachine>& machines() const { return machines_; }
    const QuadraticMachine& machine(int m) const { return machines_.at(m); }
    double sigma() const { return sigma_; }

    // Computed spectral constants; these are what every formula uses.
    double mu() const { return mu_; }
    double smoothness() const { return smoothness_; }
    // Claimed values as supplied (or the computed ones when absent).
    double claimed_mu() const { return claimed_mu_; }
    double claimed_smoothness() const { return claimed_smoothness_; }
    double radius_b() const { return radius_b_; }
    bool radius_auto() const { return radius_auto_; }
    const Vector& start() const { return start_; }
    const InstanceParams& params() const { return params_; }

    const SymMatrix& average_hessian() const { return average_; }
    bool has_global_optimum() const { return global_optimum_.has_value(); }
    const Vector& global_optimum() const;
    Vector mean_optimum() const;
    bool all_strongly_convex() const;

    double value(const Vector& x) const;
    Vector gradient(const Vector& x) const;
    // F(x) - F(x*) evaluated as 1/2 (x-x*)^T A (x-x*)
    double suboptimality(const Vector& x) const;

    std::uint64_t fingerprint() const;

private:
    std::vector<QuadraticMachine> machines_;
    InstanceParams params_;
    int dim_ = 0;
    double sigma_ = 0.0;
    double mu_ = 0.0;
    double smoothness_ = 0.0;
    double claimed_mu_ = 0.0;
    double claimed_smoothness_ = 0.0;
    double radius_b_ = 0.0;
    bool radius_auto_ = false;
    Vector start_;
    SymMatrix average_;
    Vector average_linear_;
    std::optional<Vector> global_optimum_;
};

SymMatrix average_hessian(const ProblemInstance& instance);
Vector global_optimum(const ProblemInstance& instance);
Vector mean_optimum(const ProblemInstance& instance);

struct ValueAndGradient {
    double value;
    Vector gradient;
};
ValueAndGradient eval_and_gradient(const QuadraticMachine& machine, const Vector& x);
ValueAndGradient eval_and_gradient(const ProblemInstance& instance, const Vector& x);

}  // namespace icsim
