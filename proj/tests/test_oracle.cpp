#include <doctest.h>

#include <cmath>

#include "icsim/oracle.hpp"
#include "icsim/verify.hpp"

using namespace icsim;

TEST_CASE("zero noise returns the exact gradient") {
    ProblemInstance inst = seeded_instance(3);
    Vector x = Vector::Constant(inst.dim(), 0.7);
    for (int m = 0; m < inst.num_machines(); ++m) {
        Vector g = stochastic_gradient(inst.machine(m), x, NoiseSpec{0.0, 5}, RngKey{5, m, 1, 2});
        CHECK(g == inst.machine(m).gradient(x));
    }
    CHECK((minibatch_gradient(inst, x, 4, NoiseSpec{0.0, 1}, 3) - inst.gradient(x)).norm() < 1e-14);
}

TEST_CASE("identical keys give identical draws, distinct keys differ") {
    RngKey k{9, 2, 3, 4};
    CHECK(gaussian_noise(5, 1.0, k) == gaussian_noise(5, 1.0, k));
    RngKey other = k;
    other.step = 5;
    CHECK(gaussian_noise(5, 1.0, k) != gaussian_noise(5, 1.0, other));
    RngKey stream = k;
    stream.stream = 1;
    CHECK(gaussian_noise(5, 1.0, k) != gaussian_noise(5, 1.0, stream));
}

TEST_CASE("noise energy matches sigma^2 at d = 2") {
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) acc += gaussian_noise(2, 1.0, RngKey{1, 0, 0, i}).squaredNorm();
    const double mean = acc / n;
    CHECK(mean >= 0.99);
    CHECK(mean <= 1.01);
}

TEST_CASE("oracle is unbiased") {
    ProblemInstance inst = seeded_instance(4);
    const auto& mach = inst.machine(0);
    const int d = inst.dim();
    Vector x = Vector::Constant(d, -0.2);
    Vector g = mach.gradient(x);
    Vector acc = Vector::Zero(d);
    const int n = 100000;
    const double sigma = 1.5;
    for (int i = 0; i < n; ++i) acc += stochastic_gradient(mach, x, NoiseSpec{sigma, 2}, RngKey{2, 0, 0, i});
    acc /= n;
    const double tol = 4.0 * sigma / std::sqrt(static_cast<double>(n) * d);
    CHECK((acc - g).cwiseAbs().maxCoeff() <= tol);
}

TEST_CASE("mini-batch deviation variance is sigma^2/(MK)") {
    std::vector<QuadraticMachine> ms;
    for (int m = 0; m < 4; ++m) ms.emplace_back(SymMatrix::identity(3), Vector::Constant(3, m), m + 1);
    ProblemInstance inst(std::move(ms));
    Vector x = Vector::Zero(3);
    Vector g = inst.gradient(x);
    double acc = 0.0;
    const int reps = 10000;
    for (int r = 0; r < reps; ++r) acc += (minibatch_gradient(inst, x, 8, NoiseSpec{1.0, 4}, r) - g).squaredNorm();
    acc /= reps;
    CHECK(acc >= 0.95 / 32.0);
    CHECK(acc <= 1.05 / 32.0);
}

TEST_CASE("single machine, single draw mini-batch equals one oracle call") {
    std::vector<QuadraticMachine> ms;
    ms.emplace_back(SymMatrix::diagonal(Vector{{2.0, 1.0}}), Vector{{1.0, 0.0}}, 1);
    ProblemInstance inst(std::move(ms));
    Vector x{{0.3, 0.1}};
    NoiseSpec noise{0.8, 21};
    Vector a = minibatch_gradient(inst, x, 1, noise, 6);
    Vector b = stochastic_gradient(inst.machine(0), x, noise, RngKey{21, 0, 6, 0});
    CHECK((a - b).norm() < 1e-15);
}

TEST_CASE("draw order does not change per-machine noise") {
    ProblemInstance inst = seeded_instance(8);
    Vector x = Vector::Zero(inst.dim());
    NoiseSpec noise{1.0, 77};
    std::vector<Vector> fwd, bwd(inst.num_machines());
    for (int m = 0; m < inst.num_machines(); ++m)
        fwd.push_back(stochastic_gradient(inst.machine(m), x, noise, RngKey{77, m, 1, 0}));
    for (int m = inst.num_machines() - 1; m >= 0; --m)
        bwd[m] = stochastic_gradient(inst.machine(m), x, noise, RngKey{77, m, 1, 0});
    for (int m = 0; m < inst.num_machines(); ++m) CHECK(fwd[m] == bwd[m]);
}

TEST_CASE("mini-batch needs K >= 1") {
    ProblemInstance inst = seeded_instance(1);
    CHECK_THROWS_AS(minibatch_gradient(inst, Vector::Zero(inst.dim()), 0, NoiseSpec{}, 0), DomainError);
}
