#include "icsim/theory_bounds.hpp"

#include <cmath>
#include <sstream>

#include "icsim/error.hpp"

namespace icsim::bounds {

namespace {

constexpr const char* kOrderCaveat = "order-level expression: absolute constants omitted";
constexpr const char* kLogCaveat = "logarithmic factors omitted";

void finish(BoundReport& r) {
    r.value = 0.0;
    for (const auto& [label, v] : r.terms) r.value += v;
}

void require_positive(double v, const char* name) {
    if (!(v > 0)) {
        std::ostringstream os;
        os << name << " must be positive (got " << v << ")";
        throw DomainError(os.str());
    }
}

void require_nonneg(double v, const char* name) {
    if (!(v >= 0)) {
        std::ostringstream os;
        os << name << " must be nonnegative (got " << v << ")";
        throw DomainError(os.str());
    }
}

void require_common(const BoundParams& p) {
    require_nonneg(p.H, "H");
    require_nonneg(p.B, "B");
    require_nonneg(p.sigma, "sigma");
    require_nonneg(p.tau, "tau");
    require_nonneg(p.zeta, "zeta");
    require_nonneg(p.zeta_star, "zeta_star");
    require_nonneg(p.Q, "Q");
    require_positive(p.M, "M");
    require_positive(p.K, "K");
    require_positive(p.R, "R");
}

}  // namespace

double BoundReport::term(const std::string& label) const {
    for (const auto& [l, v] : terms) {
        if (l == label) return v;
    }
    throw DomainError("bound report has no term '" + label + "'");
}

BoundReport eval_sc_upper_bound(const BoundParams& p) {
    require_common(p);
    if (!(p.mu > 0)) {
        throw DomainError("mu = 0: the strongly convex bound does not apply, use convex_upper");
    }
    const double mu = p.mu, K = p.K, R = p.R, M = p.M;
    BoundReport r;
    r.name = "sc_upper";
    r.terms = {
        {"optimization", p.H * p.B * p.B * std::exp(-mu * K * R / p.H)},
        {"noise", p.sigma * p.sigma / (mu * M * K * R)},
        {"tau_sigma", p.tau * p.tau * p.sigma * p.sigma / (std::pow(mu, 3) * K * R * R)},
        {"tau_zeta_consensus", p.tau * p.tau * p.zeta * p.zeta / (std::pow(mu, 3) * R * R)},
        {"Q_sigma",
         p.Q * p.Q * std::pow(p.sigma, 4) / (std::pow(mu, 5) * K * K * std::pow(R, 4))},
        {"Q_zeta_consensus", p.Q * p.Q * std::pow(p.zeta, 4) / (std::pow(mu, 5) * std::pow(R, 4))},
    };
    r.caveats = {kOrderCaveat, kLogCaveat,
                 "zeta is the heterogeneity over the visited region, not zeta_star"};
    finish(r);
    return r;
}

BoundReport eval_convex_upper_bound(const BoundParams& p) {
    require_common(p);
    require_nonneg(p.D, "D");
    const double H = p.H, B = p.B, s = p.sigma, K = p.K, R = p.R, M = p.M, Q = p.Q;
    const double B3 = std::pow(B, 3), B5 = std::pow(B, 5);
    BoundReport r;
    r.name = "convex_upper";
    r.terms = {
        {"optimization", H * B * B / (K * R)},
        {"noise", s * B / std::sqrt(M * K * R)},
        {"tau_sigma", std::sqrt(p.tau * s * B3) / (std::pow(K, 0.25) * std::sqrt(R))},
        {"Q_sigma", std::cbrt(Q * s * s * B5) / (std::cbrt(K) * std::pow(R, 2.0 / 3.0))},
    };
    std::vector<std::pair<std::string, double>> zeta_branch = {
        {"tau_zeta", std::sqrt(p.tau * p.zeta * B3) / std::sqrt(R)},
        {"Q_zeta", std::cbrt(Q * p.zeta * p.zeta * B5) / std::pow(R, 2.0 / 3.0)},
    };
    std::vector<std::pair<std::string, double>> star_branch = {
        {"tau_zeta_star", std::sqrt(p.tau * p.zeta_star * B3) / std::sqrt(R)},
        {"Q_zeta_star",
         std::cbrt(Q * p.zeta_star * p.zeta_star * B5) / std::pow(R, 2.0 / 3.0)},
        {"tau_tau_D", std::sqrt(p.tau * p.tau * p.D * B3) / std::sqrt(R)},
        {"Q_tau_D", std::cbrt(Q * p.tau * p.tau * p.D * p.D * B5) / std::pow(R, 2.0 / 3.0)},
    };
    auto total = [](const auto& v) {
        double t = 0.0;
        for (const auto& [l, x] : v) t += x;
        return t;
    };
    const double tz = total(zeta_branch), ts = total(star_branch);
    const auto& win = tz <= ts ? zeta_branch : star_branch;
    r.branch = tz <= ts ? "zeta" : "zeta_star_tau_D";
    r.branch_totals = {{"zeta", tz}, {"zeta_star_tau_D", ts}};
    r.terms.insert(r.terms.end(), win.begin(), win.end());
    r.caveats = {kOrderCaveat, kLogCaveat};
    finish(r);
    return r;
}

BoundReport eval_lsgd_lower_bound(const BoundParams& p) {
    require_common(p);
    const double H = p.H, B = p.B, s = p.sigma, K = p.K, R = p.R, M = p.M;
    BoundReport r;
    r.name = "lsgd_lower";
    r.terms = {
        {"optimization", H * B * B / R},
        {"drift_sigma", std::cbrt(H * s * s * std::pow(B, 4)) / (std::cbrt(K) * std::pow(R, 2.0 / 3.0))},
        {"noise", s * B / std::sqrt(M * K * R)},
        {"drift_zeta_star",
         std::cbrt(H * p.zeta_star * p.zeta_star * std::pow(B, 4)) / std::pow(R, 2.0 / 3.0)},
    };
    r.caveats = {kOrderCaveat};
    finish(r);
    return r;
}

BoundReport eval_ai_lower_bound(const BoundParams& p) {
    require_common(p);
    BoundReport r;
    r.name = "ai_lower";
    r.terms = {
        {"optimization", p.H * p.B * p.B / (p.R * p.R)},
        {"noise", p.sigma * p.B / std::sqrt(p.M * p.K * p.R)},
    };
    r.caveats = {kOrderCaveat};
    finish(r);
    return r;
}

double eval_gd_lower_bound(double H, double B, double kappa, double R) {
    require_nonneg(H, "H");
    require_nonneg(B, "B");
    require_positive(kappa, "kappa");
    require_nonneg(R, "R");
    return H * B * B / (4.0 * kappa) * std::exp(-12.0 * R / kappa);
}

TwoStageRounds two_stage_rounds(double kappa, double K, double zeta_star, double tau, double H,
                                double mu, double B, double epsilon) {
    require_positive(kappa, "kappa");
    require_positive(K, "K");
    require_positive(H, "H");
    require_positive(mu, "mu");
    require_positive(B, "B");
    require_positive(epsilon, "epsilon");
    if (!(zeta_star * tau > 0)) throw DomainError("two-stage rounds need zeta_star * tau > 0");
    const double disc = zeta_star * tau / (H * mu);
    auto ceil0 = [](double x) { return x <= 0 ? 0 : static_cast<int>(std::ceil(x - 1e-9)); };
    TwoStageRounds out;
    out.R1_raw = kappa / K * std::log(B / disc);
    out.R2_raw = epsilon >= disc ? 0.0 : kappa * std::log(disc / epsilon);
    out.R1 = ceil0(out.R1_raw);
    out.R2 = ceil0(out.R2_raw);
    out.total = out.R1 + out.R2;
    out.printed_formula_raw =
        kappa * (std::log(H * mu / (zeta_star * tau * B)) / K + std::log(disc / epsilon));
    out.printed_formula_total = ceil0(out.printed_formula_raw);
    return out;
}

Vector closed_form_motivating(double H, double eta, double beta, int K, int R,
                              const Vector& x_star) {
    const double inner = 1.0 - beta / 2.0 * (1.0 - std::pow(1.0 - eta * H, K));
    return x_star * (1.0 - std::pow(inner, R));
}

double consensus_bound(double sigma, double eta, double K, double zeta) {
    return 3.0 * K * sigma * sigma * eta * eta + 6.0 * K * K * eta * eta * zeta * zeta;
}

std::vector<std::string> evaluator_names() {
    return {"sc_upper", "convex_upper", "lsgd_lower", "ai_lower", "gd_lower", "two_stage",
            "consensus"};
}

BoundReport evaluate(const std::string& name, const BoundParams& p) {
    if (name == "sc_upper") return eval_sc_upper_bound(p);
    if (name == "convex_upper") return eval_convex_upper_bound(p);
    if (name == "lsgd_lower") return eval_lsgd_lower_bound(p);
    if (name == "ai_lower") return eval_ai_lower_bound(p);
    if (name == "gd_lower") {
        require_positive(p.mu, "mu");
        BoundReport r;
        r.name = name;
        r.terms = {{"floor", eval_gd_lower_bound(p.H, p.B, p.H / p.mu, p.R)}};
        finish(r);
        return r;
    }
    if (name == "two_stage") {
        require_positive(p.mu, "mu");
        auto t = two_stage_rounds(p.H / p.mu, p.K, p.zeta_star, p.tau, p.H, p.mu, p.B, p.epsilon);
        BoundReport r;
        r.name = name;
        r.terms = {{"R1", static_cast<double>(t.R1)}, {"R2", static_cast<double>(t.R2)}};
        r.branch_totals = {{"printed_formula_total", static_cast<double>(t.printed_formula_total)}};
        r.caveats = {"rounds are ceilings of the logarithmic expressions, floored at 0"};
        finish(r);
        return r;
    }
    if (name == "consensus") {
        BoundReport r;
        r.name = name;
        r.terms = {{"noise", 3.0 * p.K * p.sigma * p.sigma * p.eta * p.eta},
                   {"drift", 6.0 * p.K * p.K * p.eta * p.eta * p.zeta * p.zeta}};
        finish(r);
        return r;
    }
    throw ConfigError("unknown bound evaluator '" + name + "'");
}

}  // namespace icsim::bounds
