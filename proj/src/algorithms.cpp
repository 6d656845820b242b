#include "icsim/algorithms.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "icsim/heterogeneity.hpp"
#include "icsim/theory_bounds.hpp"

namespace icsim {

std::string to_string(Algorithm a) {
    switch (a) {
        case Algorithm::local_sgd: return "local_sgd";
        case Algorithm::minibatch_sgd: return "minibatch_sgd";
        case Algorithm::accelerated_minibatch_sgd: return "accelerated_minibatch_sgd";
        case Algorithm::single_machine_sgd: return "single_machine_sgd";
        case Algorithm::two_stage: return "two_stage";
    }
    return "unknown";
}

Algorithm parse_algorithm(const std::string& name) {
    for (Algorithm a : {Algorithm::local_sgd, Algorithm::minibatch_sgd,
                        Algorithm::accelerated_minibatch_sgd, Algorithm::single_machine_sgd,
                        Algorithm::two_stage}) {
        if (to_string(a) == name) return a;
    }
    throw ConfigError("unknown algorithm '" + name + "'");
}

ResolvedSteps resolve_steps(const AlgorithmConfig& config, const ProblemInstance& instance) {
    const double H = instance.smoothness();
    ResolvedSteps s{config.eta.value_or(1.0 / (2.0 * H)), config.beta.value_or(1.0),
                    config.gamma.value_or(1.0 / H)};
    if (!(s.eta > 0) || !(s.beta > 0) || !(s.gamma > 0)) {
        throw ConfigError("step sizes must be positive");
    }
    if (config.K < 1) throw ConfigError("K must be at least 1");
    if (config.R < 0) throw ConfigError("R must be nonnegative");
    if (config.noise.sigma < 0) throw ConfigError("noise sigma must be nonnegative");
    return s;
}

namespace {

class Runner {
public:
    Runner(const ProblemInstance& inst, const AlgorithmConfig& cfg)
        : inst_(inst), cfg_(cfg), limit_(1e12 * (1.0 + inst.radius_b())) {
        traj_.config = cfg;
        traj_.steps = resolve_steps(cfg, inst);
        traj_.instance_fingerprint = inst.fingerprint();
        traj_.machines = inst.num_machines();
        traj_.rounds.reserve(static_cast<std::size_t>(cfg.R) + 1);
        record(0, inst.start(), cfg.record_consensus ? 0.0 : nan());
    }

    const ResolvedSteps& steps() const { return traj_.steps; }
    Trajectory& traj() { return traj_; }

    static double nan() { return std::numeric_limits<double>::quiet_NaN(); }

    void check(const Vector& x, int r) const {
        if (!x.allFinite() || x.norm() > limit_) {
            std::ostringstream os;
            os << "iterate diverged at round " << r;
            throw DivergenceError(os.str(), r);
        }
    }

    void record(int r, const Vector& x, double consensus) {
        double dist = inst_.has_global_optimum() ? (x - inst_.global_optimum()).norm() : nan();
        traj_.rounds.push_back({r, x, inst_.suboptimality(x), dist, consensus});
    }

    // true when the early-stop criterion fires
    bool finish_round(int r, const Vector& prev, const Vector& x, double consensus) {
        check(x, r);
        record(r, x, consensus);
        if (cfg_.stop_tolerance && (x - prev).norm() <= *cfg_.stop_tolerance * (1.0 + x.norm())) {
            traj_.stopped_early = true;
            return true;
        }
        return false;
    }

    // x <- x + (beta/M) sum_m (x^m_{r,K} - x); returns peak consensus error
    double local_round(Vector& x, double eta, double beta, int r) {
        const int M = inst_.num_machines();
        const int d = inst_.dim();
        const int K = cfg_.K;
        disp_.assign(M, Vector::Zero(d));
        point_.resize(d);
        grad_.resize(d);
        double peak = cfg_.record_consensus ? 0.0 : nan();
        for (int k = 0; k < K; ++k) {
            if (cfg_.record_local) traj_.locals.emplace_back(M);
            for (int m = 0; m < M; ++m) {
                point_.noalias() = x + disp_[m];
                if (cfg_.record_local) traj_.locals.back()[m] = point_;
                stochastic_gradient_into(inst_.machine(m), point_, cfg_.noise,
                                         RngKey{cfg_.noise.seed, m, r, k}, grad_);
                descend(disp_[m], eta, grad_);
            }
            if (cfg_.record_consensus) {
                std::vector<Vector> pts(M);
                for (int m = 0; m < M; ++m) pts[m] = x + disp_[m];
                double xi = consensus_error(pts);
                traj_.consensus.push_back({r, k + 1, xi});
                peak = std::max(peak, xi);
            }
        }
        sum_.setZero(d);
        for (int m = 0; m < M; ++m) sum_ += disp_[m];
        server_step(x, beta / static_cast<double>(M), sum_);
        return peak;
    }

    // x <- x - gamma * (mean of M*K stochastic gradients at x)
    void minibatch_round(Vector& x, double gamma, int r) { x = minibatch_point(x, gamma, r); }

    Vector minibatch_point(const Vector& at, double gamma, int r) {
        const int M = inst_.num_machines();
        const int K = cfg_.K;
        grad_.resize(inst_.dim());
        sum_.setZero(inst_.dim());
        for (int m = 0; m < M; ++m) {
            for (int k = 0; k < K; ++k) {
                stochastic_gradient_into(inst_.machine(m), at, cfg_.noise,
                                         RngKey{cfg_.noise.seed, m, r, k}, grad_);
                descend(sum_, gamma, grad_);
            }
        }
        Vector out = at;
        server_step(out, 1.0 / static_cast<double>(M * K), sum_);
        return out;
    }

private:
    // Shared by local and mini-batch paths so that K = 1, beta = 1 runs agree bitwise.
    static void descend(Vector& acc, double step, const Vector& g) { acc -= step * g; }
    static void server_step(Vector& x, double scale, const Vector& sum) { x += scale * sum; }

    const ProblemInstance& inst_;
    const AlgorithmConfig& cfg_;
    double limit_;
    Trajectory traj_;
    std::vector<Vector> disp_;
    Vector point_, grad_, sum_;
};

void require(const AlgorithmConfig& config, Algorithm a) {
    if (config.algorithm != a) {
        throw ConfigError("configuration is for " + to_string(config.algorithm) + ", not " +
                          to_string(a));
    }
}

}  // namespace

Trajectory run_local_sgd(const ProblemInstance& instance, const AlgorithmConfig& config) {
    require(config, Algorithm::local_sgd);
    Runner run(instance, config);
    Vector x = instance.start();
    for (int r = 1; r <= config.R; ++r) {
        Vector prev = x;
        double c = run.local_round(x, run.steps().eta, run.steps().beta, r);
        if (run.finish_round(r, prev, x, c)) break;
    }
    return std::move(run.traj());
}

Trajectory run_minibatch_sgd(const ProblemInstance& instance, const AlgorithmConfig& config) {
    require(config, Algorithm::minibatch_sgd);
    Runner run(instance, config);
    const double c0 = config.record_consensus ? 0.0 : Runner::nan();
    Vector x = instance.start();
    for (int r = 1; r <= config.R; ++r) {
        Vector prev = x;
        run.minibatch_round(x, run.steps().gamma, r);
        if (run.finish_round(r, prev, x, c0)) break;
    }
    return std::move(run.traj());
}

Trajectory run_accelerated_minibatch_sgd(const ProblemInstance& instance,
                                         const AlgorithmConfig& config) {
    require(config, Algorithm::accelerated_minibatch_sgd);
    Runner run(instance, config);
    const double c0 = config.record_consensus ? 0.0 : Runner::nan();
    Vector x = instance.start();
    Vector y = x;
    for (int r = 1; r <= config.R; ++r) {
        Vector prev = x;
        x = run.minibatch_point(y, run.steps().gamma, r);
        const double momentum = static_cast<double>(r - 1) / static_cast<double>(r + 2);
        y = x + momentum * (x - prev);
        run.check(y, r);
        if (run.finish_round(r, prev, x, c0)) break;
    }
    return std::move(run.traj());
}

Trajectory run_single_machine_sgd(const ProblemInstance& instance, const AlgorithmConfig& config) {
    require(config, Algorithm::single_machine_sgd);
    Runner run(instance, config);
    const double c0 = config.record_consensus ? 0.0 : Runner::nan();
    const auto& machine = instance.machine(0);
    const double eta = run.steps().eta;
    Vector x = instance.start();
    Vector g(instance.dim());
    for (int r = 1; r <= config.R; ++r) {
        Vector prev = x;
        for (int k = 0; k < config.K; ++k) {
            if (config.record_local) run.traj().locals.push_back({x});
            stochastic_gradient_into(machine, x, config.noise, RngKey{config.noise.seed, 0, r, k},
                                     g);
            x -= eta * g;
        }
        if (run.finish_round(r, prev, x, c0)) break;
    }
    return std::move(run.traj());
}

int auto_stage_switch(const ProblemInstance& instance, const AlgorithmConfig& config) {
    if (!config.target_epsilon) {
        throw ConfigError("two_stage needs stage_switch or target_epsilon");
    }
    if (!instance.all_strongly_convex()) {
        throw DomainError("automatic stage switch needs strongly convex machines");
    }
    const double H = instance.smoothness();
    const double mu = instance.mu();
    const double zs = zeta_star(instance).distance_form;
    const double t = tau(instance).tau;
    auto rounds = bounds::two_stage_rounds(H / mu, config.K, zs, t, H, mu, instance.radius_b(),
                                           *config.target_epsilon);
    return rounds.R1;
}

Trajectory run_two_stage(const ProblemInstance& instance, const AlgorithmConfig& config) {
    require(config, Algorithm::two_stage);
    const int R1 = config.stage_switch ? *config.stage_switch : auto_stage_switch(instance, config);
    if (R1 < 0) throw ConfigError("stage switch must be nonnegative");
    if (R1 > config.R) {
        std::ostringstream os;
        os << "stage switch " << R1 << " exceeds R = " << config.R;
        throw ConfigError(os.str());
    }
    Runner run(instance, config);
    run.traj().switch_round = R1;
    const double c0 = config.record_consensus ? 0.0 : Runner::nan();
    Vector x = instance.start();
    for (int r = 1; r <= config.R; ++r) {
        Vector prev = x;
        double c = c0;
        if (r <= R1) {
            c = run.local_round(x, run.steps().eta, run.steps().beta, r);
        } else {
            run.minibatch_round(x, run.steps().gamma, r);
        }
        if (run.finish_round(r, prev, x, c)) break;
    }
    return std::move(run.traj());
}

Trajectory run_algorithm(const ProblemInstance& instance, const AlgorithmConfig& config) {
    switch (config.algorithm) {
        case Algorithm::local_sgd: return run_local_sgd(instance, config);
        case Algorithm::minibatch_sgd: return run_minibatch_sgd(instance, config);
        case Algorithm::accelerated_minibatch_sgd:
            return run_accelerated_minibatch_sgd(instance, config);
        case Algorithm::single_machine_sgd: return run_single_machine_sgd(instance, config);
        case Algorithm::two_stage: return run_two_stage(instance, config);
    }
    throw ConfigError("unknown algorithm");
}

Vector weighted_average_iterate(const Trajectory& traj, double mu, double eta) {
    if (traj.locals.empty()) throw ConfigError("trajectory has no recorded local iterates");
    if (mu < 0 || eta <= 0) throw DomainError("weighted average needs mu >= 0 and eta > 0");
    const double base = 1.0 - mu * eta / 2.0;
    if (base <= 0.0) {
        throw DomainError("weights (1 - mu*eta/2)^-(t+1) are undefined for mu*eta/2 >= 1");
    }
    // w_t = base^-(t+1); rescaled by w_{T-1} to base^(T-1-t) to stay finite
    const std::size_t T = traj.locals.size();
    const int d = static_cast<int>(traj.locals.front().front().size());
    Vector acc = Vector::Zero(d);
    double wsum = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
        double w = std::pow(base, static_cast<double>(T - 1 - t));
        for (const auto& x : traj.locals[t]) {
            acc += w * x;
            wsum += w;
        }
    }
    return acc / wsum;
}

double consensus_error(const std::vector<Vector>& iterates) {
    if (iterates.empty()) return 0.0;
    Vector mean = Vector::Zero(iterates.front().size());
    for (const auto& x : iterates) mean += x;
    mean /= static_cast<double>(iterates.size());
    double s = 0.0;
    for (const auto& x : iterates) s += (x - mean).squaredNorm();
    return s / static_cast<double>(iterates.size());
}

std::optional<int> rounds_to_accuracy(const Trajectory& traj, double epsilon) {
    if (!(epsilon > 0)) throw DomainError("epsilon must be positive");
    for (const auto& rec : traj.rounds) {
        if (rec.suboptimality <= epsilon) return rec.round;
    }
    return std::nullopt;
}

}  // namespace icsim
