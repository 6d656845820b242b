#include <doctest.h>

#include <cmath>
#include <random>

#include "icsim/instances.hpp"
#include "icsim/quad_core.hpp"
#include "icsim/verify.hpp"
#include "support/bridge.hpp"

using namespace icsim;

namespace {

ProblemInstance inst_a() {
    std::vector<QuadraticMachine> ms;
    ms.emplace_back(SymMatrix::diagonal(Vector{{2.0, 1.0}}), Vector{{1.0, 0.0}}, 1);
    ms.emplace_back(SymMatrix::diagonal(Vector{{1.0, 2.0}}), Vector{{0.0, 1.0}}, 2);
    return ProblemInstance(std::move(ms));
}

}  // namespace

TEST_CASE("average hessian of the two-diagonal instance") {
    SymMatrix A = average_hessian(inst_a());
    CHECK(A.matrix().isApprox(Matrix(Vector{{1.5, 1.5}}.asDiagonal()), 1e-15));
    CHECK(A.eigenvalues()(0) == doctest::Approx(1.5));
}

TEST_CASE("average hessian of identical machines is that hessian") {
    SymMatrix A0(Matrix{{2.0, 0.5}, {0.5, 1.0}});
    std::vector<QuadraticMachine> ms;
    for (int m = 0; m < 3; ++m) ms.emplace_back(A0, Vector::Constant(2, m), m);
    ProblemInstance inst(std::move(ms));
    CHECK((inst.average_hessian().matrix() - A0.matrix()).norm() < 1e-15);
}

TEST_CASE("average hessian of the motivating pair") {
    ProblemInstance inst = gen::make_motivating_pair(1.0, Vector{{1.0, 1.0}});
    CHECK(inst.average_hessian().matrix().isApprox(Matrix(Vector{{0.5, 0.5}}.asDiagonal())));
}

TEST_CASE("global and mean optimum of the two-diagonal instance") {
    ProblemInstance inst = inst_a();
    Vector xs = inst.global_optimum();
    CHECK(xs(0) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(xs(1) == doctest::Approx(2.0 / 3.0).epsilon(1e-14));
    CHECK(inst.gradient(xs).norm() < 1e-14);
    Vector xb = inst.mean_optimum();
    CHECK(xb(0) == 0.5);
    CHECK(xb(1) == 0.5);
    // independent solve
    auto ref = oracle::global_optimum(oracle::to_quads(inst));
    CHECK(std::abs(ref[0] - xs(0)) < 1e-14);
}

TEST_CASE("homogeneous hessians give x* equal to the mean optimum") {
    SymMatrix A0(Matrix{{3.0, 1.0}, {1.0, 2.0}});
    std::vector<QuadraticMachine> ms;
    ms.emplace_back(A0, Vector{{1.0, 2.0}}, 1);
    ms.emplace_back(A0, Vector{{-3.0, 0.5}}, 2);
    ProblemInstance inst(std::move(ms));
    CHECK((inst.global_optimum() - inst.mean_optimum()).norm() < 1e-14);
}

TEST_CASE("single machine optimum") {
    std::vector<QuadraticMachine> ms;
    ms.emplace_back(SymMatrix(Matrix{{2.0, 0.3}, {0.3, 1.0}}), Vector{{0.4, -1.1}}, 1);
    ProblemInstance inst(std::move(ms));
    CHECK((inst.global_optimum() - Vector{{0.4, -1.1}}).norm() < 1e-14);
}

TEST_CASE("mean optimum of three symmetric optima") {
    std::vector<QuadraticMachine> ms;
    ms.emplace_back(SymMatrix::identity(2), Vector{{1.0, 0.0}}, 1);
    ms.emplace_back(SymMatrix::identity(2), Vector{{0.0, 1.0}}, 2);
    ms.emplace_back(SymMatrix::identity(2), Vector{{-1.0, -1.0}}, 3);
    CHECK(ProblemInstance(std::move(ms)).mean_optimum().norm() < 1e-15);
}

TEST_CASE("mean optimum needs strongly convex machines") {
    ProblemInstance inst = gen::make_motivating_pair(1.0, Vector{{1.0, 1.0}});
    CHECK_THROWS_AS(inst.mean_optimum(), AmbiguousOptimum);
    CHECK_NOTHROW(inst.global_optimum());
}

TEST_CASE("singular average hessian has no global optimum") {
    std::vector<QuadraticMachine> ms;
    ms.emplace_back(SymMatrix::diagonal(Vector{{1.0, 0.0}}), Vector{{1.0, 0.0}}, 1);
    ms.emplace_back(SymMatrix::diagonal(Vector{{2.0, 0.0}}), Vector{{0.0, 0.0}}, 2);
    ProblemInstance inst(std::move(ms));
    CHECK_FALSE(inst.has_global_optimum());
    CHECK_THROWS_AS(inst.global_optimum(), NotStronglyConvex);
    CHECK(std::isnan(inst.suboptimality(Vector::Zero(2))));
}

TEST_CASE("value and gradient by hand") {
    QuadraticMachine m(SymMatrix::diagonal(Vector{{2.0, 1.0}}), Vector{{1.0, 0.0}});
    auto vg = eval_and_gradient(m, Vector::Zero(2));
    CHECK(vg.value == 1.0);
    CHECK(vg.gradient(0) == -2.0);
    CHECK(vg.gradient(1) == 0.0);
    auto at = eval_and_gradient(m, Vector{{1.0, 0.0}});
    CHECK(at.value == 0.0);
    CHECK(at.gradient.norm() == 0.0);
}

TEST_CASE("motivating average vanishes at the shared optimum") {
    Vector xs{{0.3, -2.0}};
    ProblemInstance inst = gen::make_motivating_pair(3.0, xs);
    auto vg = eval_and_gradient(inst, xs);
    CHECK(vg.value == 0.0);
    CHECK(vg.gradient.norm() == 0.0);
}

TEST_CASE("matrix functions") {
    SymMatrix S = SymMatrix::diagonal(Vector{{0.5, 0.75}});
    SymMatrix sq = matrix_function(S, [](double l) { return l * l; });
    CHECK(std::abs(sq.matrix()(0, 0) - 0.25) < 1e-15);
    CHECK(std::abs(sq.matrix()(1, 1) - 0.5625) < 1e-15);
    SymMatrix id = matrix_function(S, [](double l) { return l; });
    CHECK((id.matrix() - S.matrix()).norm() < 1e-15);
    SymMatrix inv = SymMatrix::diagonal(Vector{{2.0, 1.0}}).inverse();
    CHECK(std::abs(inv.matrix()(0, 0) - 0.5) < 1e-15);
    CHECK(std::abs(inv.matrix()(1, 1) - 1.0) < 1e-15);
}

TEST_CASE("inverse of a singular matrix names the eigenvalue") {
    SymMatrix S = SymMatrix::diagonal(Vector{{1.0, 1e-14}});
    try {
        (void)S.inverse();
        FAIL("expected a singularity error");
    } catch (const SingularityError& e) {
        CHECK(e.eigenvalue() == doctest::Approx(1e-14));
    }
}

TEST_CASE("asymmetric entries are rejected") {
    CHECK_THROWS_AS(SymMatrix(Matrix{{1.0, 0.1}, {0.2, 1.0}}), InvalidInstance);
    CHECK_NOTHROW(SymMatrix(Matrix{{1.0, 0.1}, {0.1 + 1e-13, 1.0}}));
}

TEST_CASE("machines with an indefinite hessian are rejected") {
    CHECK_THROWS_AS(QuadraticMachine(SymMatrix::diagonal(Vector{{1.0, -0.1}}), Vector::Zero(2)),
                    InvalidInstance);
}

TEST_CASE("dimension mismatches are rejected") {
    std::vector<QuadraticMachine> ms;
    ms.emplace_back(SymMatrix::identity(2), Vector::Zero(2), 1);
    ms.emplace_back(SymMatrix::identity(3), Vector::Zero(3), 2);
    CHECK_THROWS_AS(ProblemInstance(std::move(ms)), InvalidInstance);
    QuadraticMachine m(SymMatrix::identity(2), Vector::Zero(2));
    CHECK_THROWS_AS(m.gradient(Vector::Zero(3)), InvalidInstance);
}

TEST_CASE("claimed constants are validated and computed ones win") {
    auto make = [](InstanceParams p) {
        std::vector<QuadraticMachine> ms;
        ms.emplace_back(SymMatrix::diagonal(Vector{{2.0, 0.5}}), Vector{{1.0, 1.0}}, 1);
        return ProblemInstance(std::move(ms), p);
    };
    InstanceParams bad_mu;
    bad_mu.mu = 0.6;
    CHECK_THROWS_AS(make(bad_mu), InvalidInstance);
    InstanceParams bad_h;
    bad_h.smoothness = 1.9;
    CHECK_THROWS_AS(make(bad_h), InvalidInstance);
    InstanceParams loose;
    loose.mu = 0.1;
    loose.smoothness = 10.0;
    ProblemInstance inst = make(loose);
    CHECK(inst.mu() == 0.5);
    CHECK(inst.smoothness() == 2.0);
    CHECK(inst.claimed_mu() == 0.1);
    CHECK(inst.claimed_smoothness() == 10.0);
}

TEST_CASE("auto radius bounds the optimum") {
    for (std::uint64_t s = 0; s < 20; ++s) {
        ProblemInstance inst = seeded_instance(s);
        CHECK(inst.radius_auto());
        CHECK(inst.global_optimum().norm() <= inst.radius_b() + 1e-9);
    }
}

TEST_CASE("property: analytic gradient matches central differences") {
    std::mt19937_64 eng(11);
    std::normal_distribution<double> n;
    int checked = 0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        ProblemInstance inst = seeded_instance(300 + s);
        for (int m = 0; m < inst.num_machines() && checked < 200; ++m) {
            const auto& mach = inst.machine(m);
            Vector x(inst.dim());
            for (int i = 0; i < inst.dim(); ++i) x(i) = n(eng);
            Vector g = mach.gradient(x);
            Vector fd(inst.dim());
            const double h = 1e-5;
            for (int i = 0; i < inst.dim(); ++i) {
                Vector e = Vector::Zero(inst.dim());
                e(i) = h;
                fd(i) = (mach.value(x + e) - mach.value(x - e)) / (2 * h);
            }
            CHECK((g - fd).norm() <= 1e-6 * (1.0 + g.norm()));
            ++checked;
        }
    }
    CHECK(checked >= 100);
}

TEST_CASE("property: gradient of the average vanishes at x*") {
    for (std::uint64_t s = 0; s < 100; ++s) {
        ProblemInstance inst = seeded_instance(s);
        const Vector& xs = inst.global_optimum();
        CHECK(inst.gradient(xs).norm() <= 1e-10 * inst.smoothness() * (1.0 + xs.norm()));
    }
}

TEST_CASE("property: eigen powers agree with repeated multiplication") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        ProblemInstance inst = seeded_instance(700 + s);
        const SymMatrix& A = inst.machine(0).hessian();
        auto Am = oracle::to_mat(A.matrix());
        for (int k = 0; k <= 8; ++k) {
            SymMatrix P = matrix_function(A, [k](double l) { return std::pow(l, k); });
            auto ref = oracle::power(Am, k);
            double err = 0.0, sc = 0.0;
            for (int i = 0; i < A.dim(); ++i)
                for (int j = 0; j < A.dim(); ++j) {
                    err = std::max(err, std::abs(P.matrix()(i, j) - ref[i][j]));
                    sc = std::max(sc, std::abs(ref[i][j]));
                }
            CHECK(err <= 1e-9 * std::max(sc, 1.0));
        }
        for (int k : {16, 33, 64}) {
            SymMatrix P = matrix_function(A, [k](double l) { return std::pow(l, k); });
            SymMatrix Q = matrix_power_by_squaring(A, k);
            CHECK((P.matrix() - Q.matrix()).norm() <= 1e-9 * std::max(1.0, Q.matrix().norm()));
        }
    }
}

TEST_CASE("property: eigen reconstruction and ordering") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        ProblemInstance inst = seeded_instance(900 + s);
        const SymMatrix& A = inst.average_hessian();
        Matrix rec = A.eigenvectors() * A.eigenvalues().asDiagonal() * A.eigenvectors().transpose();
        CHECK((rec - A.matrix()).norm() <= 1e-10 * A.matrix().norm());
        for (int i = 1; i < A.dim(); ++i) CHECK(A.eigenvalues()(i - 1) >= A.eigenvalues()(i));
    }
}

TEST_CASE("property: average eigenvalues within machine extremes") {
    for (std::uint64_t s = 0; s < 50; ++s) {
        ProblemInstance inst = seeded_instance(1200 + s);
        double lo = 1e300, hi = 0.0;
        for (const auto& m : inst.machines()) {
            lo = std::min(lo, m.hessian().lambda_min());
            hi = std::max(hi, m.hessian().lambda_max());
        }
        CHECK(inst.average_hessian().lambda_min() >= lo - 1e-12);
        CHECK(inst.average_hessian().lambda_max() <= hi + 1e-12);
    }
}

TEST_CASE("fingerprint is stable and sensitive") {
    ProblemInstance a = seeded_instance(5), b = seeded_instance(5), c = seeded_instance(6);
    CHECK(a.fingerprint() == b.fingerprint());
    CHECK(a.fingerprint() != c.fingerprint());
}
