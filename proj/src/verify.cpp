#include "icsim/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <functional>
#include <limits>
#include <map>
#include <sstream>

#include "icsim/algorithms.hpp"
#include "icsim/fixed_point.hpp"
#include "icsim/harness.hpp"
#include "icsim/heterogeneity.hpp"
#include "icsim/instances.hpp"
#include "icsim/oracle.hpp"
#include "icsim/theory_bounds.hpp"

namespace icsim {

bool VerifyReport::passed() const {
    return !checks.empty() &&
           std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

ProblemInstance seeded_instance(std::uint64_t seed, int max_M, int max_d) {
    auto eng = keyed_engine(RngKey{seed, 0, 0, 0, 0x76657269ULL});
    std::uniform_int_distribution<int> Md(1, max_M), dd(1, max_d);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    const int M = Md(eng);
    const int d = dd(eng);
    const double mu = 0.05 + 0.45 * u(eng);
    gen::HeteroDials dials;
    dials.concept_spread = 2.0 * u(eng);
    dials.hessian_spread = u(eng);
    dials.center_norm = 0.5 + 1.5 * u(eng);
    return gen::make_random_instance(M, d, mu, 1.0, dials, seed);
}

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Counts violations of lhs <= rhs and remembers the worst margin.
struct Tally {
    int cases = 0;
    int violations = 0;
    double worst_ratio = 0.0;  // max lhs / rhs
    std::string worst;

    void add(double lhs, double rhs, const std::string& where) {
        ++cases;
        const bool ok = lhs <= rhs;
        const double ratio = rhs > 0 ? lhs / rhs : (lhs > 0 ? kInf : 0.0);
        if (!ok) ++violations;
        if (ratio > worst_ratio || (!ok && worst.empty())) {
            worst_ratio = ratio;
            worst = where;
        }
    }

    CheckResult result(const std::string& name) const {
        CheckResult c;
        c.name = name;
        c.passed = violations == 0 && cases > 0;
        c.measured = violations;
        c.expected = 0;
        std::ostringstream os;
        os << cases << " cases, " << violations << " violations, worst lhs/rhs = " << worst_ratio;
        if (!worst.empty()) os << " at " << worst;
        c.detail = os.str();
        return c;
    }
};

CheckResult runtime_check(const std::string& name, double seconds, double limit) {
    CheckResult c;
    c.name = name;
    c.measured = seconds;
    c.expected = limit;
    c.passed = seconds < limit;
    std::ostringstream os;
    os << seconds << " s (limit " << limit << " s)";
    c.detail = os.str();
    return c;
}

CheckResult value_check(const std::string& name, double measured, double expected, double tol) {
    CheckResult c;
    c.name = name;
    c.measured = measured;
    c.expected = expected;
    c.tolerance = tol;
    c.passed = std::abs(measured - expected) <= tol;
    std::ostringstream os;
    os.precision(17);
    os << "measured " << measured << ", expected " << expected << ", tol " << tol;
    c.detail = os.str();
    return c;
}

CheckResult flag_check(const std::string& name, bool ok, const std::string& detail) {
    CheckResult c;
    c.name = name;
    c.passed = ok;
    c.measured = ok ? 1 : 0;
    c.expected = 1;
    c.detail = detail;
    return c;
}

std::string where(std::uint64_t seed, int K, double eta = 0.0) {
    std::ostringstream os;
    os << "seed=" << seed << " K=" << K;
    if (eta > 0) os << " eta=" << eta;
    return os.str();
}

AlgorithmConfig local_gd(double eta, double beta, int K, int R) {
    AlgorithmConfig c;
    c.algorithm = Algorithm::local_sgd;
    c.eta = eta;
    c.beta = beta;
    c.K = K;
    c.R = R;
    return c;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// ---------------------------------------------------------------- 1

VerifyReport suite_fixed_point() {
    VerifyReport rep{"fixed_point", "fixed point closed form matches 10^4-round simulation", {}};
    auto t0 = std::chrono::steady_clock::now();
    Tally tally;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ProblemInstance inst = seeded_instance(seed);
        const double eta = 1.0 / (2.0 * inst.smoothness());
        for (int K : {1, 2, 5, 10}) {
            FixedPointReport fp = fixed_point(inst, eta, K);
            Trajectory t = run_local_sgd(inst, local_gd(eta, 1.0, K, 10000));
            double err = (t.final_iterate() - fp.x_infinity).norm();
            tally.add(err, 1e-6 * (1.0 + fp.x_infinity.norm()), where(seed, K));
        }
    }
    rep.checks.push_back(tally.result("distance to x_inf after 10^4 rounds <= 1e-6 (1 + |x_inf|)"));
    rep.checks.push_back(runtime_check("runtime", seconds_since(t0), 30.0));
    return rep;
}

// ---------------------------------------------------------------- 2

VerifyReport suite_k1() {
    VerifyReport rep{"k1_correctness", "K = 1 fixed point equals x*", {}};
    Tally tally;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ProblemInstance inst = seeded_instance(seed);
        const double H = inst.smoothness();
        const Vector& xs = inst.global_optimum();
        for (double eta : {0.1 / H, 1.0 / (2.0 * H), 1.0 / H}) {
            FixedPointReport fp = fixed_point(inst, eta, 1);
            tally.add((fp.x_infinity - xs).norm(), 1e-10 * (1.0 + xs.norm()), where(seed, 1, eta));
        }
    }
    rep.checks.push_back(tally.result("|x_inf(1, eta) - x*| <= 1e-10 (1 + |x*|)"));
    return rep;
}

// ---------------------------------------------------------------- 3

VerifyReport suite_motivating() {
    VerifyReport rep{"motivating", "two-machine closed form matches simulation", {}};
    const double H = 2.0;
    const Vector xs{{0.7, -1.3}};
    ProblemInstance inst = gen::make_motivating_pair(H, xs);
    Tally tally;
    double worst = 0.0;
    for (double e : {0.2, 0.4, 0.6, 0.8, 1.0}) {
        for (double beta : {0.4, 0.8, 1.2, 1.6, 2.0}) {
            for (int K : {1, 2, 4, 16, 32}) {
                for (int R : {1, 2, 4, 16, 32}) {
                    const double eta = e / H;
                    Trajectory t = run_local_sgd(inst, local_gd(eta, beta, K, R));
                    Vector cf = bounds::closed_form_motivating(H, eta, beta, K, R, xs);
                    double err = (t.final_iterate() - cf).norm();
                    worst = std::max(worst, err);
                    std::ostringstream os;
                    os << "eta=" << eta << " beta=" << beta << " K=" << K << " R=" << R;
                    tally.add(err, 1e-12, os.str());
                }
            }
        }
    }
    rep.checks.push_back(tally.result("625-point grid within 1e-12"));
    Trajectory one = run_local_sgd(inst, local_gd(1.0 / (2.0 * H), 2.0, 1000, 1));
    double dist = (one.final_iterate() - xs).norm();
    CheckResult c = value_check("beta = 2, K = 1000 reaches x* in one round", dist, 0.0,
                                1e-6 * xs.norm());
    rep.checks.push_back(c);
    return rep;
}

// ---------------------------------------------------------------- 4

VerifyReport suite_bar_star() {
    VerifyReport rep{"bar_star_distance", "|x* - xbar*| and |x_inf - xbar*| bounds", {}};
    Tally first, second;
    for (std::uint64_t seed = 0; seed < 1000; ++seed) {
        ProblemInstance inst = seeded_instance(1000 + seed);
        const int K = 2 + static_cast<int>(seed % 49);
        const double eta = 1.0 / (2.0 * inst.smoothness());
        DiscrepancyReport d = discrepancy_bounds(inst, eta, K);
        first.add(d.measured_xstar_xbar, d.bound_xstar_xbar + 1e-9, where(1000 + seed, K));
        second.add(d.measured_xinf_xbar, *d.bound_xinf_xbar + 1e-9, where(1000 + seed, K));
    }
    rep.checks.push_back(first.result("|x* - xbar*| <= zeta* tau / (H mu)"));
    rep.checks.push_back(second.result("|x_inf - xbar*| <= scaled discrepancy bound"));
    return rep;
}

// ---------------------------------------------------------------- 5

VerifyReport suite_fixed_convergence() {
    VerifyReport rep{"fixed_convergence", "|x_R - x*| within contraction plus discrepancy", {}};
    Tally tally;
    for (std::uint64_t seed = 0; seed < 200; ++seed) {
        ProblemInstance inst = seeded_instance(5000 + seed);
        const int K = 2 + static_cast<int>(seed % 19);
        const int R = 1 + static_cast<int>((seed * 37) % 100);
        const double eta = 1.0 / (2.0 * inst.smoothness());
        Trajectory t = run_local_sgd(inst, local_gd(eta, 1.0, K, R));
        ContractionPrediction p = contraction_predictor(inst, eta, 1.0, K, R);
        DiscrepancyReport d = discrepancy_bounds(inst, eta, K);
        const double lhs = (t.final_iterate() - inst.global_optimum()).norm();
        const double rhs = p.bound + *d.bound_xinf_xbar + d.measured_xstar_xbar;
        std::ostringstream os;
        os << where(5000 + seed, K) << " R=" << R;
        tally.add(lhs, rhs * (1.0 + 1e-12) + 1e-12, os.str());
    }
    rep.checks.push_back(tally.result("200 instances, zero violations"));
    return rep;
}

// ---------------------------------------------------------------- 6

VerifyReport suite_lower_bound_floor() {
    VerifyReport rep{"lower_bound_floor", "tuned local GD cannot beat H B^2 / R on the rank-1 pair",
                     {}};
    auto t0 = std::chrono::steady_clock::now();
    const int R = 20;
    const double H = 1.0, B = 1.0;
    gen::RankOnePair pair = gen::make_rank_one_pair(H, B, 2, 3.0 * R);
    const std::vector<double> etas = log_grid(1e-4 / H, 3.0 / H, 50);
    const std::vector<double> betas = log_grid(1e-2, 1e1, 50);
    std::vector<double> floors;
    std::ostringstream det;
    for (int K : {1, 10, 100, 1000}) {
        StepSizeSearch s = step_size_search(pair.instance, local_gd(1.0, 1.0, K, R), etas, betas, R);
        floors.push_back(s.best);
        det << "K=" << K << ": " << s.best << " (eta " << s.best_eta << ", beta " << s.best_beta
            << ") ";
    }
    const double threshold = 1e-3 * H * B * B / R;
    const double lo = *std::min_element(floors.begin(), floors.end());
    const double hi = *std::max_element(floors.begin(), floors.end());
    CheckResult c{"best suboptimality >= 1e-3 H B^2 / R", lo >= threshold, lo, threshold, 0.0,
                  det.str()};
    rep.checks.push_back(c);
    CheckResult f{"floors across K agree within factor 2", hi <= 2.0 * lo, hi / lo, 2.0, 0.0,
                  det.str()};
    rep.checks.push_back(f);
    rep.checks.push_back(runtime_check("runtime", seconds_since(t0), 300.0));
    return rep;
}

// ---------------------------------------------------------------- 7

VerifyReport suite_gd_floor() {
    VerifyReport rep{"gd_floor", "gradient descent floor on the worst-case quadratic", {}};
    const double H = 1.0, B = 1.0, kappa = 30.0;
    const int R = 30;
    gen::GdWorstCase wc = gen::make_gd_worst_case(H, kappa, B);
    AlgorithmConfig c;
    c.algorithm = Algorithm::minibatch_sgd;
    c.K = 1;
    StepSizeSearch s = step_size_search(wc.instance, c, log_grid(1e-4 / H, 3.0 / H, 50), {}, R);
    const double floor = bounds::eval_gd_lower_bound(H, B, kappa, R);
    std::ostringstream os;
    os << "best " << s.best << " at gamma " << s.best_eta << ", floor " << floor;
    rep.checks.push_back({"best-over-eta GD >= (H B^2 / 4 kappa) e^(-12 R / kappa)",
                          s.best >= floor, s.best, floor, 0.0, os.str()});
    return rep;
}

// ---------------------------------------------------------------- 8

VerifyReport suite_chain() {
    VerifyReport rep{"chain", "chain instance spectrum, zero propagation and floor", {}};
    const double H = 1.0, B = 1.0;
    double worst = 0.0;
    for (int d : {64, 128, 256}) {
        gen::ChainSpec spec{H, B, 10, d, 2};
        gen::ChainInstance ch = gen::make_chain_instance(spec);
        Vector got = ch.instance.average_hessian().eigenvalues();
        Vector want = gen::chain_toeplitz_eigenvalues(H, ch.q, d);
        worst = std::max(worst, (got - want).cwiseAbs().maxCoeff());
    }
    rep.checks.push_back(value_check("average Hessian eigenvalues vs Toeplitz formula", worst, 0.0,
                                     1e-9));

    gen::ChainSpec spec{H, B, 10, std::nullopt, 2};
    gen::ChainInstance ch = gen::make_chain_instance(spec);
    int support0 = 0;
    for (int i = 0; i < ch.d; ++i) {
        if (ch.x0(i) != 0.0) support0 = i + 1;
    }
    bool zero_ok = true;
    std::ostringstream zdet;
    for (int K : {1, 5, 50}) {
        AlgorithmConfig c = local_gd(1.0 / (2.0 * ch.instance.smoothness()), 1.0, K, 10);
        Trajectory t = run_local_sgd(ch.instance, c);
        for (const auto& rec : t.rounds) {
            for (int i = support0 + rec.round; i < ch.d; ++i) {
                if (rec.x(i) != 0.0) {
                    if (zero_ok) zdet << "K=" << K << " round " << rec.round << " coord " << i + 1;
                    zero_ok = false;
                }
            }
        }
    }
    rep.checks.push_back(
        flag_check("coordinates beyond support + r stay exactly zero", zero_ok,
                   zero_ok ? "K in {1, 5, 50}, R = 10" : zdet.str()));

    const double Hc = ch.instance.smoothness();
    const std::vector<double> etas = log_grid(1e-3 / Hc, 2.0 / Hc, 20);
    const std::vector<double> betas = log_grid(0.1, 10.0, 10);
    double best = kInf;
    std::ostringstream fdet;
    for (int K : {1, 10, 100}) {
        StepSizeSearch s = step_size_search(ch.instance, local_gd(1.0, 1.0, K, 10), etas, betas, 10);
        best = std::min(best, s.best);
        fdet << "K=" << K << ": " << s.best << " ";
    }
    const double floor = 1e-3 * H * B * B / 100.0;
    rep.checks.push_back({"tuned local GD stays above 1e-3 H B^2 / R^2", best >= floor, best, floor,
                          0.0, fdet.str()});
    return rep;
}

// ---------------------------------------------------------------- 9

VerifyReport suite_oracle() {
    VerifyReport rep{"oracle", "noise and mini-batch variance", {}};
    const int d = 10;
    const double sigma = 2.0;
    double acc = 0.0;
    const int n = 100000;
    for (int i = 0; i < n; ++i) {
        acc += gaussian_noise(d, sigma, RngKey{42, 0, 0, i, 0}).squaredNorm();
    }
    const double mean = acc / n;
    rep.checks.push_back(value_check("E|noise|^2 vs sigma^2 (2%)", mean, sigma * sigma,
                                     0.02 * sigma * sigma));

    const int dd = 6;
    std::vector<QuadraticMachine> four;
    for (int m = 0; m < 4; ++m) {
        Vector diag = Vector::LinSpaced(dd, 0.5, 1.0 + m);
        four.emplace_back(SymMatrix::diagonal(diag), Vector::Constant(dd, m), m + 1);
    }
    ProblemInstance p(std::move(four));
    const int M = 4, K = 8, reps = 10000;
    Vector x = Vector::Constant(dd, 0.3);
    Vector g = p.gradient(x);
    double var = 0.0;
    for (int r = 0; r < reps; ++r) {
        var += (minibatch_gradient(p, x, K, NoiseSpec{sigma, 9}, r) - g).squaredNorm();
    }
    var /= reps;
    const double want = sigma * sigma / (M * K);
    rep.checks.push_back(value_check("mini-batch deviation variance vs sigma^2/(MK) (5%)", var, want,
                                     0.05 * want));
    return rep;
}

// ---------------------------------------------------------------- 10

VerifyReport suite_heterogeneity() {
    VerifyReport rep{"heterogeneity", "rho bounds and zeta-ball bounds", {}};
    Tally general, quadratic, ball_origin, ball_opt;
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
        ProblemInstance inst = seeded_instance(9000 + seed);
        const double H = inst.smoothness();
        const double B = inst.radius_b();
        const double zs = zeta_star(inst).distance_form;
        for (double e : {0.1, 0.5, 1.0}) {
            for (int K : {1, 4, 16, 64}) {
                const double eta = e / H;
                const double r = rho(inst, eta, K);
                RhoBounds rb = rho_bounds(inst, eta, K);
                const double slack = 1e-9 * (1.0 + zs);
                general.add(r, rb.general + slack, where(9000 + seed, K, eta));
                quadratic.add(r, rb.quadratic + slack, where(9000 + seed, K, eta));
            }
        }
        for (double f : {0.5, 1.0, 2.0}) {
            const double D = f * B;
            ZetaBall zo = zeta_ball(inst, D, 500, seed, BallCenter::origin);
            ZetaBall zx = zeta_ball(inst, D, 500, seed, BallCenter::optimum);
            std::ostringstream os;
            os << "seed=" << 9000 + seed << " D=" << D;
            ball_origin.add(zo.empirical, zo.bound * (1.0 + 1e-9) + 1e-12, os.str());
            ball_opt.add(zx.empirical, zx.bound * (1.0 + 1e-9) + 1e-12, os.str());
        }
    }
    rep.checks.push_back(general.result("rho <= zeta* ((1 + eta H)^(K-1) - 1)"));
    rep.checks.push_back(quadratic.result("rho <= (1 - (1 - eta H)^K) / (eta K) zeta* / H"));
    rep.checks.push_back(ball_opt.result("ball at x*: sup <= zeta* + tau D"));
    rep.checks.push_back(ball_origin.result("ball at origin: sup <= zeta* + tau (D + |x*|)"));

    ProblemInstance inst = seeded_instance(9000);
    const double H = inst.smoothness();
    std::vector<double> trend;
    std::ostringstream os;
    for (int K : {10, 100, 1000, 10000}) {
        const double eta = 1.0 / (2.0 * H * std::sqrt(static_cast<double>(K)));
        trend.push_back(rho_bounds(inst, eta, K).quadratic);
        os << "K=" << K << ": " << trend.back() << " ";
    }
    bool dec = std::is_sorted(trend.rbegin(), trend.rend()) && trend.back() < 0.1 * trend.front();
    rep.checks.push_back(flag_check("quadratic rho bound at eta = 1/(2 H sqrt K) decreases to 0",
                                    dec, os.str()));
    return rep;
}

// ---------------------------------------------------------------- 11

VerifyReport suite_figure_trends() {
    VerifyReport rep{"figure_trends", "fixed-point trends on the mu = 1, H = 6 family", {}};
    auto t0 = std::chrono::steady_clock::now();
    const std::vector<int> Ks = {2, 5, 10, 25, 50, 100};
    const std::vector<NamedSchedule> scheds = {{"1/(2H)", ScheduleExpr::parse("1/(2*H)")},
                                               {"1/(HK^2)", ScheduleExpr::parse("1/(H*K^2)")}};
    bool a_ok = true, b_ok = true;
    std::ostringstream da, db;
    // every machine exactly 1-strongly convex and 6-smooth: independent Hessians with spectrum {6, 1}
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        gen::HeteroDials dials;
        dials.concept_spread = 1.0;
        dials.hessian_spread = 1.0;
        ProblemInstance inst = gen::make_random_instance(5, 2, 1.0, 6.0, dials, seed);
        auto rows = sweep_fixed_point(inst, scheds, Ks);
        for (std::size_t i = 1; i < Ks.size(); ++i) {
            const auto& pa = rows[i - 1];
            const auto& ca = rows[i];
            if (ca.dist_to_xbar > pa.dist_to_xbar * (1.0 + 1e-12) + 1e-15) {
                if (a_ok) da << "seed " << seed << " K " << pa.K << "->" << ca.K;
                a_ok = false;
            }
            const auto& pb = rows[Ks.size() + i - 1];
            const auto& cb = rows[Ks.size() + i];
            if (cb.dist_to_xstar > pb.dist_to_xstar * (1.0 + 1e-12) + 1e-15) {
                if (b_ok) db << "seed " << seed << " K " << pb.K << "->" << cb.K;
                b_ok = false;
            }
        }
    }
    rep.checks.push_back(flag_check("trend A: eta = 1/(2H), dist to xbar* non-increasing in K", a_ok,
                                    a_ok ? "seeds 1..20" : da.str()));
    rep.checks.push_back(flag_check("trend B: eta = 1/(H K^2), dist to x* non-increasing in K", b_ok,
                                    b_ok ? "seeds 1..20" : db.str()));
    rep.checks.push_back(runtime_check("runtime", seconds_since(t0), 10.0));
    return rep;
}

// ---------------------------------------------------------------- 12

VerifyReport suite_two_stage() {
    VerifyReport rep{"two_stage", "local GD then mini-batch GD beats mini-batch GD alone", {}};
    gen::HeteroDials dials;
    dials.concept_spread = 0.003;
    dials.hessian_spread = 0.003;
    // the spread moves the extreme eigenvalues, so rescale the mu dial until H / mu = 50
    double mu_dial = 0.02;
    ProblemInstance inst = gen::make_random_instance(4, 5, mu_dial, 1.0, dials, 12);
    for (int it = 0; it < 50 && std::abs(inst.smoothness() / inst.mu() - 50.0) > 1e-9; ++it) {
        mu_dial *= inst.smoothness() / inst.mu() / 50.0;
        inst = gen::make_random_instance(4, 5, mu_dial, 1.0, dials, 12);
    }
    const double H = inst.smoothness(), mu = inst.mu();
    const double zs = zeta_star(inst).distance_form;
    const double ta = tau(inst).tau;
    const double disc = zs * ta / (H * mu);
    const double B = inst.radius_b();
    std::ostringstream pre;
    pre << "zeta* tau / (H mu) = " << disc << ", 1e-3 B = " << 1e-3 * B << ", kappa = " << H / mu;
    rep.checks.push_back(flag_check("precondition zeta* tau / (H mu) <= 1e-3 B", disc <= 1e-3 * B,
                                    pre.str()));

    const double eps = 1e-6;
    const int K = 64, Rmax = 5000;
    AlgorithmConfig ts;
    ts.algorithm = Algorithm::two_stage;
    ts.K = K;
    ts.R = Rmax;
    ts.target_epsilon = eps;
    Trajectory t2 = run_two_stage(inst, ts);
    AlgorithmConfig mb;
    mb.algorithm = Algorithm::minibatch_sgd;
    mb.K = K;
    mb.R = Rmax;
    Trajectory t1 = run_minibatch_sgd(inst, mb);
    auto r2 = rounds_to_accuracy(t2, eps);
    auto r1 = rounds_to_accuracy(t1, eps);
    auto pred = bounds::two_stage_rounds(H / mu, K, zs, ta, H, mu, B, eps);
    const double a = r2 ? *r2 : kInf, b = r1 ? *r1 : kInf;
    std::ostringstream os;
    os << "two_stage " << a << " rounds (R1 = " << *t2.switch_round << "), mini-batch " << b
       << " rounds, prediction " << pred.total;
    rep.checks.push_back({"two_stage rounds <= mini-batch rounds", a <= b, a, b, 0.0, os.str()});
    rep.checks.push_back({"two_stage rounds <= 1.5 x prediction", a <= 1.5 * pred.total, a,
                          1.5 * pred.total, 0.0, os.str()});
    return rep;
}

// ---------------------------------------------------------------- 13

VerifyReport suite_bounds() {
    VerifyReport rep{"bounds_monotonicity", "bound evaluator arithmetic and monotonicity", {}};
    const double tol = 1e-14;
    {
        bounds::BoundParams p;
        p.H = 1, p.B = 1, p.mu = 0.1, p.sigma = 1, p.tau = 0.5, p.zeta = 1, p.Q = 0;
        p.M = 4, p.K = 8, p.R = 16;
        auto r = bounds::eval_sc_upper_bound(p);
        rep.checks.push_back(value_check("sc_upper optimization", r.term("optimization"),
                                         2.7607725720371986e-06, tol));
        rep.checks.push_back(value_check("sc_upper noise", r.term("noise"), 0.01953125, tol));
        rep.checks.push_back(
            value_check("sc_upper tau_sigma", r.term("tau_sigma"), 0.1220703125, 1e-13));
        rep.checks.push_back(value_check("sc_upper tau_zeta_consensus",
                                         r.term("tau_zeta_consensus"), 0.9765625, 1e-13));
        rep.checks.push_back(value_check("sc_upper total", r.value, 1.1181668232725719, 1e-13));
    }
    {
        bounds::BoundParams p;
        p.H = 1, p.B = 1, p.sigma = 1, p.tau = 0.5, p.zeta = 1, p.zeta_star = 0.25, p.Q = 0;
        p.M = 4, p.K = 8, p.R = 16, p.D = 1;
        auto r = bounds::eval_convex_upper_bound(p);
        rep.checks.push_back(value_check("convex_upper total", r.value, 0.33389542102751046, 1e-14));
        rep.checks.push_back(flag_check("convex_upper picks the zeta branch", r.branch == "zeta",
                                        r.branch));
    }
    {
        bounds::BoundParams p;
        p.H = 1, p.B = 1, p.sigma = 1, p.zeta_star = 0.5, p.M = 4, p.K = 8, p.R = 16;
        auto r = bounds::eval_lsgd_lower_bound(p);
        rep.checks.push_back(value_check("lsgd_lower total", r.value, 0.2846518051906013, 1e-14));
    }
    {
        bounds::BoundParams p;
        p.H = 1, p.B = 1, p.sigma = 1, p.M = 4, p.K = 4, p.R = 10;
        rep.checks.push_back(value_check("ai_lower total", bounds::eval_ai_lower_bound(p).value,
                                         0.08905694150420948, 1e-15));
    }
    rep.checks.push_back(value_check("gd_lower", bounds::eval_gd_lower_bound(1, 1, 30, 30),
                                     5.1201769611068415e-08, 1e-20));
    {
        auto t = bounds::two_stage_rounds(10, 16, 0.1, 0.1, 1, 0.1, 1, 1e-4);
        rep.checks.push_back(value_check("two_stage R1", t.R1, 2, 0));
        rep.checks.push_back(value_check("two_stage R2", t.R2, 70, 0));
        rep.checks.push_back(value_check("two_stage printed-form total", t.printed_formula_total, 71, 0));
    }

    // monotone non-increasing in R, K and M over a grid
    int violations = 0, cases = 0;
    std::string first;
    for (const char* name : {"sc_upper", "convex_upper", "lsgd_lower", "ai_lower"}) {
        for (const char* axis : {"R", "K", "M"}) {
            for (double sigma : {0.0, 1.0}) {
                for (double zeta : {0.0, 0.7}) {
                    double prev = kInf;
                    for (double v : {1.0, 2.0, 4.0, 16.0, 64.0, 256.0}) {
                        bounds::BoundParams p;
                        p.H = 2, p.B = 1.5, p.mu = 0.2, p.sigma = sigma, p.tau = 0.3;
                        p.zeta = zeta, p.zeta_star = 0.5 * zeta, p.Q = 0.4, p.D = 1;
                        p.M = 3, p.K = 5, p.R = 7;
                        if (std::string(axis) == "R") p.R = v;
                        if (std::string(axis) == "K") p.K = v;
                        if (std::string(axis) == "M") p.M = v;
                        const double val = bounds::evaluate(name, p).value;
                        ++cases;
                        if (val > prev * (1.0 + 1e-12)) {
                            if (first.empty()) first = std::string(name) + " in " + axis;
                            ++violations;
                        }
                        prev = val;
                    }
                }
            }
        }
    }
    double prev = kInf;
    for (double R : {1.0, 5.0, 30.0, 100.0}) {
        double v = bounds::eval_gd_lower_bound(1, 1, 30, R);
        ++cases;
        if (v > prev) ++violations;
        prev = v;
    }
    std::ostringstream os;
    os << cases << " grid steps, " << violations << " increases";
    if (!first.empty()) os << ", first: " << first;
    rep.checks.push_back({"non-increasing in R, K, M", violations == 0, double(violations), 0.0, 0.0,
                          os.str()});
    return rep;
}

using SuiteFn = std::function<VerifyReport()>;

const std::vector<std::pair<std::string, SuiteFn>>& registry() {
    static const std::vector<std::pair<std::string, SuiteFn>> r = {
        {"fixed_point", suite_fixed_point},
        {"k1_correctness", suite_k1},
        {"motivating", suite_motivating},
        {"bar_star_distance", suite_bar_star},
        {"fixed_convergence", suite_fixed_convergence},
        {"lower_bound_floor", suite_lower_bound_floor},
        {"gd_floor", suite_gd_floor},
        {"chain", suite_chain},
        {"oracle", suite_oracle},
        {"heterogeneity", suite_heterogeneity},
        {"figure_trends", suite_figure_trends},
        {"two_stage", suite_two_stage},
        {"bounds_monotonicity", suite_bounds},
    };
    return r;
}

}  // namespace

const std::vector<std::string>& verify_suite_names() {
    static const std::vector<std::string> names = [] {
        std::vector<std::string> n;
        for (const auto& [k, f] : registry()) n.push_back(k);
        return n;
    }();
    return names;
}

VerifyReport verify(const std::string& suite) {
    for (const auto& [name, fn] : registry()) {
        if (name != suite) continue;
        auto t0 = std::chrono::steady_clock::now();
        VerifyReport rep;
        try {
            rep = fn();
        } catch (const Error& e) {
            rep.suite = suite;
            rep.checks.push_back(flag_check("suite completed", false, e.what()));
        }
        rep.seconds = seconds_since(t0);
        return rep;
    }
    throw ConfigError("unknown verify suite '" + suite + "'");
}

}  // namespace icsim
