#include <doctest.h>

#include <cmath>

#include "icsim/heterogeneity.hpp"
#include "icsim/instances.hpp"
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

ProblemInstance homogeneous() {
    SymMatrix A(Matrix{{2.0, 0.3}, {0.3, 1.0}});
    std::vector<QuadraticMachine> ms;
    for (int m = 0; m < 3; ++m) ms.emplace_back(A, Vector{{1.0, -1.0}}, m + 1);
    return ProblemInstance(std::move(ms));
}

// K exact local steps from x* on every machine, by hand
double rho_reference(const ProblemInstance& inst, double eta, int K) {
    auto qs = oracle::to_quads(inst);
    oracle::Vec xs = oracle::to_vec(inst.global_optimum());
    oracle::Vec sum(xs.size(), 0.0);
    for (const auto& q : qs) {
        oracle::Vec y = xs;
        for (int k = 0; k < K; ++k) y = oracle::add(y, oracle::grad(q, y), -eta);
        sum = oracle::add(sum, oracle::add(xs, y, -1.0));
    }
    return oracle::norm(sum) / (qs.size() * eta * K);
}

}  // namespace

TEST_CASE("zeta star") {
    CHECK(zeta_star(inst_a()).distance_form == doctest::Approx(2.0 * std::sqrt(5.0) / 3.0).epsilon(1e-14));
    CHECK(zeta_star(homogeneous()).distance_form < 1e-12);
    ProblemInstance mot = gen::make_motivating_pair(3.0, Vector{{1.0, 2.0}});
    CHECK(zeta_star(mot).distance_form == 0.0);
    CHECK(zeta_star(mot).gradient_form == 0.0);
}

TEST_CASE("tau") {
    CHECK(tau(homogeneous()).tau == 0.0);
    CHECK(tau(inst_a()).tau == doctest::Approx(1.0));
    CHECK(tau(gen::make_motivating_pair(2.5, Vector{{1.0, 1.0}})).tau == doctest::Approx(2.5));
    CHECK(q_lipschitz(inst_a()) == 0.0);
}

TEST_CASE("pairwise tau is symmetric with a zero diagonal and tau is its max") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        ProblemInstance inst = seeded_instance(600 + s);
        TauReport t = tau(inst);
        CHECK((t.pairwise - t.pairwise.transpose()).norm() == 0.0);
        CHECK(t.pairwise.diagonal().norm() == 0.0);
        CHECK(t.pairwise.maxCoeff() == t.tau);
        CHECK(t.pairwise.minCoeff() >= 0.0);
    }
}

TEST_CASE("rho") {
    CHECK(rho(gen::make_motivating_pair(1.0, Vector{{1.0, 1.0}}), 0.5, 7) == 0.0);
    for (std::uint64_t s = 0; s < 5; ++s) CHECK(rho(seeded_instance(700 + s), 0.5, 1) < 1e-12);
    ProblemInstance a = inst_a();
    CHECK(rho(a, 0.25, 2) == doctest::Approx(rho_reference(a, 0.25, 2)).epsilon(1e-13));
    CHECK(rho(a, 0.25, 2) == doctest::Approx(rho_closed_form(a, 0.25, 2)).epsilon(1e-13));
    CHECK(rho(a, 0.25, 2) > 0.0);
}

TEST_CASE("rho bounds at K = 1 vanish") {
    RhoBounds b = rho_bounds(inst_a(), 0.1, 1);
    CHECK(b.general == 0.0);
}

TEST_CASE("quadratic rho bound under eta = 1/(2HK) approaches its limit") {
    ProblemInstance a = inst_a();
    const double H = a.smoothness();
    const double K = 1e4;
    RhoBounds b = rho_bounds(a, 1.0 / (2 * H * K), static_cast<int>(K));
    const double zs = zeta_star(a).distance_form;
    const double limit = (1.0 - 1.0 / std::sqrt(std::exp(1.0))) * 2.0 * zs;
    CHECK(b.quadratic == doctest::Approx(limit).epsilon(0.01));
}

TEST_CASE("quadratic rho bound under eta = 1/(2H sqrt K) trends to zero") {
    ProblemInstance a = inst_a();
    const double H = a.smoothness();
    double prev = 1e300;
    for (int K : {10, 100, 1000, 10000}) {
        double v = rho_bounds(a, 1.0 / (2 * H * std::sqrt(K)), K).quadratic;
        CHECK(v < prev);
        prev = v;
    }
    CHECK(prev <= 0.05 * rho_bounds(a, 1.0 / (2 * H), 1).quadratic);
}

TEST_CASE("zeta ball") {
    SUBCASE("homogeneous machines give the constant offset") {
        ProblemInstance h = homogeneous();
        for (double D : {0.0, 1.0, 5.0}) CHECK(zeta_ball(h, D, 200, 1).empirical < 1e-12);
    }
    SUBCASE("two-diagonal instance with D = 2") {
        ZetaBall z = zeta_ball(inst_a(), 2.0, 10000, 3);
        CHECK(z.empirical <= z.bound + 1e-9);
        CHECK(z.empirical >= z.exact_sup - 1e-12);
        CHECK(z.maximizer.norm() <= 2.0 + 1e-12);
        CHECK(z.anchor_distance == doctest::Approx(2.0 + std::sqrt(8.0) / 3.0));
        CHECK(z.bound == doctest::Approx(2.0 * std::sqrt(5.0) / 3.0 + z.anchor_distance));
    }
    SUBCASE("D = 0 is the single point at the center") {
        ProblemInstance a = inst_a();
        ZetaBall z = zeta_ball(a, 0.0, 50, 1);
        CHECK(z.empirical == doctest::Approx(gradient_dissimilarity(a, Vector::Zero(2))));
        ZetaBall o = zeta_ball(a, 0.0, 50, 1, BallCenter::optimum);
        CHECK(o.empirical == doctest::Approx(zeta_star(a).gradient_form));
    }
    SUBCASE("negative radius") { CHECK_THROWS_AS(zeta_ball(inst_a(), -1.0, 10, 1), DomainError); }
}

TEST_CASE("report bundles every measurement") {
    HeterogeneityOptions opt;
    opt.ball_radius = 1.0;
    opt.n_samples = 200;
    HeterogeneityReport r = heterogeneity_report(inst_a(), opt);
    CHECK(r.tau == doctest::Approx(1.0));
    REQUIRE(r.zeta_ball.has_value());
    REQUIRE(r.zeta_ball_at_optimum.has_value());
    CHECK(r.rho_eta == doctest::Approx(0.25));
    CHECK(r.rho_K == 10);
    CHECK(r.rho <= r.rho_bounds.quadratic + 1e-12);
}

TEST_CASE("property: rho under both bounds, ball under its bound") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        ProblemInstance inst = seeded_instance(800 + s);
        const double H = inst.smoothness();
        for (double c : {0.1, 0.5, 1.0})
            for (int K : {1, 2, 8, 64}) {
                const double r = rho(inst, c / H, K);
                RhoBounds b = rho_bounds(inst, c / H, K);
                CHECK(r <= b.general * (1 + 1e-9) + 1e-12);
                CHECK(r <= b.quadratic * (1 + 1e-9) + 1e-12);
            }
        for (double D : {0.5, 1.0, 2.0}) {
            ZetaBall z = zeta_ball(inst, D * inst.radius_b(), 100, s);
            CHECK(z.empirical <= z.bound + 1e-9);
        }
    }
}

TEST_CASE("property: equal hessians make the dissimilarity constant") {
    for (std::uint64_t s = 0; s < 10; ++s) {
        gen::HeteroDials dials;
        dials.concept_spread = 1.0;
        dials.hessian_spread = 0.0;
        ProblemInstance inst = gen::make_random_instance(4, 3, 0.2, 1.0, dials, s);
        REQUIRE(tau(inst).tau < 1e-12);
        const double g = zeta_star(inst).gradient_form;
        for (double D : {0.0, 0.7, 3.0}) CHECK(zeta_ball(inst, D, 50, s).empirical == doctest::Approx(g).epsilon(1e-10));
        CHECK((inst.global_optimum() - inst.mean_optimum()).norm() < 1e-12);
    }
}

TEST_CASE("property: gradient and distance forms of zeta star bracket each other") {
    for (std::uint64_t s = 0; s < 30; ++s) {
        ProblemInstance inst = seeded_instance(900 + s);
        ZetaStar z = zeta_star(inst);
        const double ratio = inst.mu() / inst.smoothness();
        CHECK(z.gradient_form <= z.distance_form * (1 + 1e-12) + 1e-15);
        CHECK(z.gradient_form >= ratio * z.distance_form * (1 - 1e-12) - 1e-15);
    }
}
