#include <doctest.h>

#include <cmath>

#include "icsim/theory_bounds.hpp"

using namespace icsim;
using namespace icsim::bounds;

namespace {

BoundParams base() {
    BoundParams p;
    p.H = 1;
    p.B = 1;
    p.mu = 0.1;
    p.sigma = 1;
    p.tau = 0.5;
    p.zeta = 1;
    p.M = 4;
    p.K = 8;
    p.R = 16;
    return p;
}

double sum_terms(const BoundReport& r) {
    double s = 0;
    for (const auto& [l, v] : r.terms) s += v;
    return s;
}

}  // namespace

TEST_CASE("strongly convex upper bound") {
    SUBCASE("term arithmetic at the reference point") {
        BoundReport r = eval_sc_upper_bound(base());
        CHECK(r.term("optimization") == doctest::Approx(std::exp(-12.8)).epsilon(1e-14));
        CHECK(r.term("noise") == doctest::Approx(1.0 / 51.2).epsilon(1e-14));
        CHECK(r.term("tau_sigma") == doctest::Approx(0.25 / 2.048).epsilon(1e-14));
        CHECK(r.term("tau_zeta_consensus") == doctest::Approx(0.25 / 0.256).epsilon(1e-14));
        CHECK(r.term("Q_sigma") == 0.0);
        CHECK(r.value == doctest::Approx(sum_terms(r)).epsilon(1e-12));
    }
    SUBCASE("noise-free homogeneous case keeps only the optimization term") {
        BoundParams p = base();
        p.sigma = p.tau = p.Q = 0;
        BoundReport r = eval_sc_upper_bound(p);
        CHECK(r.value == r.term("optimization"));
    }
    SUBCASE("doubling M halves only the noise term") {
        BoundParams p = base();
        p.Q = 0.3;
        BoundReport a = eval_sc_upper_bound(p);
        p.M *= 2;
        BoundReport b = eval_sc_upper_bound(p);
        for (std::size_t i = 0; i < a.terms.size(); ++i) {
            if (a.terms[i].first == "noise") {
                CHECK(b.terms[i].second == doctest::Approx(a.terms[i].second / 2));
            } else {
                CHECK(b.terms[i].second == a.terms[i].second);
            }
        }
    }
    SUBCASE("mu = 0 is refused") {
        BoundParams p = base();
        p.mu = 0;
        CHECK_THROWS_AS(eval_sc_upper_bound(p), DomainError);
    }
}

TEST_CASE("convex upper bound") {
    SUBCASE("homogeneous case") {
        BoundParams p = base();
        p.tau = p.zeta = p.zeta_star = p.Q = 0;
        BoundReport r = eval_convex_upper_bound(p);
        CHECK(r.value == doctest::Approx(1.0 / 128 + 1.0 / std::sqrt(512.0)).epsilon(1e-14));
    }
    SUBCASE("large K with no noise leaves the R-only terms") {
        BoundParams p = base();
        p.sigma = 0;
        p.Q = 0.2;
        p.K = 1e12;
        p.zeta_star = 0.1;
        p.D = 1;
        BoundReport r = eval_convex_upper_bound(p);
        const double tz = std::sqrt(0.5 * 1.0) / 4 + std::cbrt(0.2 * 1.0) / std::pow(16.0, 2.0 / 3.0);
        const double ts = std::sqrt(0.5 * 0.1) / 4 + std::cbrt(0.2 * 0.01) / std::pow(16.0, 2.0 / 3.0) +
                          std::sqrt(0.25) / 4 + std::cbrt(0.2 * 0.25) / std::pow(16.0, 2.0 / 3.0);
        CHECK(r.value == doctest::Approx(std::min(tz, ts)).epsilon(1e-9));
    }
    SUBCASE("branch switches where sqrt(tau D) = sqrt(zeta) - sqrt(zeta*)") {
        BoundParams p = base();
        p.zeta = 1.0;
        p.zeta_star = 0.25;
        const double D_cross = std::pow(1.0 - 0.5, 2) / p.tau;
        p.D = 0.9 * D_cross;
        CHECK(eval_convex_upper_bound(p).branch == "zeta_star_tau_D");
        p.D = 1.1 * D_cross;
        CHECK(eval_convex_upper_bound(p).branch == "zeta");
    }
}

TEST_CASE("local SGD lower bound") {
    SUBCASE("no noise, no heterogeneity") {
        BoundParams p = base();
        p.sigma = p.zeta_star = 0;
        CHECK(eval_lsgd_lower_bound(p).value == doctest::Approx(1.0 / 16));
    }
    SUBCASE("the K-free floor survives large K") {
        BoundParams p = base();
        p.zeta_star = 0.5;
        p.K = 1e15;
        const double floor = 1.0 / 16 + std::cbrt(0.25) / std::pow(16.0, 2.0 / 3.0);
        CHECK(eval_lsgd_lower_bound(p).value == doctest::Approx(floor).epsilon(1e-4));
        CHECK(eval_lsgd_lower_bound(p).value > floor);
    }
    SUBCASE("term arithmetic") {
        BoundParams p;
        p.H = p.B = p.sigma = p.zeta_star = 1;
        p.M = 2;
        p.K = 4;
        p.R = 8;
        BoundReport r = eval_lsgd_lower_bound(p);
        CHECK(r.term("optimization") == 0.125);
        CHECK(r.term("drift_sigma") == doctest::Approx(1.0 / (std::cbrt(4.0) * 4.0)));
        CHECK(r.term("noise") == doctest::Approx(0.125));
        CHECK(r.term("drift_zeta_star") == doctest::Approx(0.25));
    }
}

TEST_CASE("accelerated lower bound") {
    BoundParams p;
    p.H = p.B = p.sigma = 1;
    p.M = 4;
    p.K = 4;
    p.R = 10;
    CHECK(eval_ai_lower_bound(p).value == doctest::Approx(0.01 + 1.0 / std::sqrt(160.0)).epsilon(1e-14));
    p.sigma = 0;
    CHECK(eval_ai_lower_bound(p).value == doctest::Approx(0.01));
}

TEST_CASE("GD lower bound") {
    CHECK(eval_gd_lower_bound(2.0, 3.0, 10.0, 0.0) == doctest::Approx(18.0 / 40.0));
    CHECK(eval_gd_lower_bound(1.0, 1.0, 50.0, 50.0) == doctest::Approx(std::exp(-12.0) / 200.0));
    CHECK(eval_gd_lower_bound(1.0, 1.0, 30.0, 30.0) == doctest::Approx(std::exp(-12.0) / 120.0).epsilon(1e-14));
}

TEST_CASE("two-stage rounds") {
    SUBCASE("reference point") {
        TwoStageRounds t = two_stage_rounds(10, 16, 0.1, 0.1, 1, 0.1, 1, 1e-4);
        CHECK(t.R1_raw == doctest::Approx(10.0 / 16.0 * std::log(10.0)));
        CHECK(t.R2_raw == doctest::Approx(10.0 * std::log(1000.0)));
        CHECK(t.R1 == 2);
        CHECK(t.R2 == 70);
        CHECK(t.total == 72);
        CHECK(t.printed_formula_total == 71);
    }
    SUBCASE("discrepancy equal to B needs no first stage") {
        TwoStageRounds t = two_stage_rounds(10, 4, 1.0, 0.1, 1, 0.1, 1, 1e-3);
        CHECK(t.R1 == 0);
    }
    SUBCASE("large K removes the first stage") {
        TwoStageRounds t = two_stage_rounds(10, 1e9, 0.1, 0.1, 1, 0.1, 1, 1e-4);
        CHECK(t.R1 == 1);
        CHECK(t.R1_raw < 1e-7);
        CHECK(t.total == t.R2 + 1);
    }
    SUBCASE("target above the discrepancy skips the second stage") {
        TwoStageRounds t = two_stage_rounds(10, 4, 0.1, 0.1, 1, 0.1, 1, 0.5);
        CHECK(t.R2 == 0);
    }
    SUBCASE("zero heterogeneity is out of domain") {
        CHECK_THROWS_AS(two_stage_rounds(10, 4, 0.0, 0.1, 1, 0.1, 1, 1e-3), DomainError);
    }
}

TEST_CASE("closed-form motivating iterate") {
    Vector xs{{2.0, -4.0}};
    CHECK((closed_form_motivating(1.0, 1.0, 1.0, 5, 3, xs) - 0.875 * xs).norm() < 1e-15);
    CHECK((closed_form_motivating(2.0, 0.5, 2.0, 3, 1, xs) - xs).norm() < 1e-15);
    CHECK(closed_form_motivating(1.0, 0.3, 1.0, 4, 0, xs).norm() == 0.0);
}

TEST_CASE("consensus bound") {
    CHECK(consensus_bound(0, 0.1, 5, 0) == 0.0);
    CHECK(consensus_bound(1, 0, 5, 1) == 0.0);
    CHECK(consensus_bound(2, 0.1, 3, 0.5) == doctest::Approx(3 * 3 * 4 * 0.01 + 6 * 9 * 0.01 * 0.25));
    BoundParams p;
    p.sigma = 2;
    p.eta = 0.1;
    p.K = 3;
    p.zeta = 0.5;
    CHECK(evaluate("consensus", p).value == doctest::Approx(consensus_bound(2, 0.1, 3, 0.5)));
}

TEST_CASE("dispatch by name") {
    for (const auto& n : evaluator_names()) {
        BoundParams p = base();
        p.zeta_star = 0.2;
        p.epsilon = 1e-3;
        CHECK_NOTHROW(evaluate(n, p));
    }
    CHECK_THROWS_AS(evaluate("nope", base()), ConfigError);
    CHECK(evaluate("gd_lower", base()).value == doctest::Approx(eval_gd_lower_bound(1, 1, 10, 16)));
}

TEST_CASE("negative inputs are refused") {
    BoundParams p = base();
    p.sigma = -1;
    CHECK_THROWS_AS(eval_lsgd_lower_bound(p), DomainError);
    p = base();
    p.R = 0;
    CHECK_THROWS_AS(eval_ai_lower_bound(p), DomainError);
}

TEST_CASE("property: every evaluator is non-increasing in R, K and M") {
    using Fn = BoundReport (*)(const BoundParams&);
    const Fn fns[] = {eval_sc_upper_bound, eval_convex_upper_bound, eval_lsgd_lower_bound,
                      eval_ai_lower_bound};
    for (Fn f : fns) {
        for (double zs : {0.0, 0.3})
            for (double Q : {0.0, 0.4}) {
                BoundParams p = base();
                p.zeta_star = zs;
                p.Q = Q;
                p.D = 0.5;
                for (const char* axis : {"R", "K", "M"}) {
                    double prev = 1e300;
                    for (double v : {1.0, 2.0, 5.0, 10.0, 100.0, 1000.0}) {
                        BoundParams q = p;
                        if (axis[0] == 'R') q.R = v;
                        if (axis[0] == 'K') q.K = v;
                        if (axis[0] == 'M') q.M = v;
                        const double val = f(q).value;
                        CHECK(val <= prev * (1 + 1e-12));
                        prev = val;
                    }
                }
            }
    }
    double prev = 1e300;
    for (double R : {0.0, 1.0, 10.0, 100.0}) {
        CHECK(eval_gd_lower_bound(1, 1, 20, R) <= prev);
        prev = eval_gd_lower_bound(1, 1, 20, R);
    }
}

TEST_CASE("property: terms scale with the documented power of B") {
    BoundParams p = base();
    p.zeta_star = 0.3;
    p.Q = 0.2;
    p.D = 0.4;
    const double c = 3.0;
    BoundParams q = p;
    q.B *= c;
    // the convex bound's D also scales with distances
    q.D *= c;
    struct Power {
        const char* label;
        double power;
    };
    auto check = [&](BoundReport (*f)(const BoundParams&), std::initializer_list<Power> ps) {
        BoundReport a = f(p), b = f(q);
        for (const auto& [label, pw] : ps)
            CHECK(b.term(label) == doctest::Approx(std::pow(c, pw) * a.term(label)).epsilon(1e-12));
    };
    check(eval_lsgd_lower_bound, {{"optimization", 2}, {"drift_sigma", 4.0 / 3}, {"noise", 1}, {"drift_zeta_star", 4.0 / 3}});
    check(eval_ai_lower_bound, {{"optimization", 2}, {"noise", 1}});
    check(eval_convex_upper_bound, {{"optimization", 2}, {"noise", 1}, {"tau_sigma", 1.5}, {"Q_sigma", 5.0 / 3}});
    BoundReport a = eval_sc_upper_bound(p), b = eval_sc_upper_bound(q);
    CHECK(b.term("optimization") == doctest::Approx(c * c * a.term("optimization")));
    CHECK(b.term("noise") == a.term("noise"));
}
