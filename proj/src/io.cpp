#include "icsim/io.hpp"

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>

namespace icsim {

json vector_to_json(const Vector& v) {
    json a = json::array();
    for (Eigen::Index i = 0; i < v.size(); ++i) a.push_back(v(i));
    return a;
}

Vector vector_from_json(const json& j) {
    if (!j.is_array()) throw InvalidInstance("expected a numeric array");
    Vector v(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
        if (!j[i].is_number()) throw InvalidInstance("expected a numeric array");
        v(static_cast<Eigen::Index>(i)) = j[i].get<double>();
    }
    return v;
}

json matrix_to_json(const Matrix& m) {
    json a = json::array();
    for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index k = 0; k < m.cols(); ++k) a.push_back(m(i, k));
    return a;
}

Matrix matrix_from_json(const json& j, int dim) {
    if (!j.is_array()) throw InvalidInstance("hessian must be an array");
    Matrix m(dim, dim);
    if (!j.empty() && j[0].is_array()) {
        if (static_cast<int>(j.size()) != dim) throw InvalidInstance("hessian row count mismatch");
        for (int i = 0; i < dim; ++i) {
            Vector row = vector_from_json(j[i]);
            if (row.size() != dim) throw InvalidInstance("hessian row length mismatch");
            m.row(i) = row.transpose();
        }
        return m;
    }
    Vector flat = vector_from_json(j);
    if (flat.size() != static_cast<Eigen::Index>(dim) * dim) {
        throw InvalidInstance("hessian must hold dim*dim entries");
    }
    for (int i = 0; i < dim; ++i)
        for (int k = 0; k < dim; ++k) m(i, k) = flat(i * dim + k);
    return m;
}

json instance_to_json(const ProblemInstance& inst) {
    json j;
    j["dim"] = inst.dim();
    j["sigma"] = inst.sigma();
    json ms = json::array();
    for (const auto& m : inst.machines()) {
        json jm;
        jm["label"] = m.label();
        jm["hessian"] = matrix_to_json(m.hessian().matrix());
        jm["optimum"] = vector_to_json(m.optimum());
        jm["linear_term"] = vector_to_json(m.linear_term());
        if (m.offset() != 0.0) jm["offset"] = m.offset();
        ms.push_back(jm);
    }
    j["machines"] = ms;
    j["start"] = vector_to_json(inst.start());
    const auto& p = inst.params();
    if (p.mu) j["mu"] = *p.mu;
    if (p.smoothness) j["smoothness"] = *p.smoothness;
    if (p.radius_b) j["radius_b"] = *p.radius_b;
    return j;
}

ProblemInstance instance_from_json(const json& j) {
    if (!j.is_object() || !j.contains("machines") || !j.contains("dim")) {
        throw InvalidInstance("instance JSON needs 'dim' and 'machines'");
    }
    const int d = j.at("dim").get<int>();
    if (d < 1) throw InvalidInstance("dim must be positive");
    std::vector<QuadraticMachine> ms;
    int label = 1;
    for (const auto& jm : j.at("machines")) {
        SymMatrix A(matrix_from_json(jm.at("hessian"), d));
        Vector opt = vector_from_json(jm.at("optimum"));
        if (opt.size() != d) throw InvalidInstance("optimum dimension mismatch");
        int lab = jm.value("label", label);
        double off = jm.value("offset", 0.0);
        if (jm.contains("linear_term")) {
            ms.emplace_back(A, opt, vector_from_json(jm.at("linear_term")), lab, off);
        } else {
            ms.emplace_back(A, opt, lab, off);
        }
        ++label;
    }
    InstanceParams p;
    p.sigma = j.value("sigma", 0.0);
    if (j.contains("mu")) p.mu = j.at("mu").get<double>();
    if (j.contains("smoothness")) p.smoothness = j.at("smoothness").get<double>();
    if (j.contains("radius_b")) p.radius_b = j.at("radius_b").get<double>();
    if (j.contains("start")) p.start = vector_from_json(j.at("start"));
    return ProblemInstance(std::move(ms), p);
}

std::string read_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw ConfigError("cannot read '" + path + "'");
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void write_file_atomic(const std::string& path, const std::string& contents) {
    const std::string tmp = path + ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw ConfigError("cannot write '" + tmp + "'");
        out << contents;
        if (!out) throw ConfigError("write to '" + tmp + "' failed");
    }
    std::error_code ec;
    std::filesystem::rename(tmp, path, ec);
    if (ec) throw ConfigError("cannot rename '" + tmp + "': " + ec.message());
}

ProblemInstance load_instance(const std::string& path) {
    json j;
    try {
        j = json::parse(read_file(path));
    } catch (const json::exception& e) {
        throw InvalidInstance("instance file '" + path + "': " + e.what());
    }
    return instance_from_json(j);
}

void save_instance(const ProblemInstance& inst, const std::string& path) {
    write_file_atomic(path, instance_to_json(inst).dump(2) + "\n");
}

ProblemInstance with_sigma(const ProblemInstance& inst, double sigma) {
    InstanceParams p = inst.params();
    p.sigma = sigma;
    if (!p.start) p.start = inst.start();
    return ProblemInstance(inst.machines(), p);
}

std::string format_double(double v) {
    if (std::isnan(v)) return "nan";
    if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.17g", v);
    return buf;
}

std::string trajectory_csv(const Trajectory& traj, const std::optional<Vector>& fixed_point) {
    const bool with_consensus = traj.config.record_consensus;
    std::ostringstream os;
    os << "round,suboptimality,distance_to_opt";
    if (fixed_point) os << ",distance_to_fixed_point";
    if (with_consensus) os << ",consensus";
    os << '\n';
    for (const auto& rec : traj.rounds) {
        os << rec.round << ',' << format_double(rec.suboptimality) << ','
           << format_double(rec.distance);
        if (fixed_point) os << ',' << format_double((rec.x - *fixed_point).norm());
        if (with_consensus) os << ',' << format_double(rec.consensus);
        os << '\n';
    }
    return os.str();
}

json algorithm_config_to_json(const AlgorithmConfig& cfg) {
    json j;
    j["algorithm"] = to_string(cfg.algorithm);
    if (cfg.eta) j["eta"] = *cfg.eta;
    if (cfg.beta) j["beta"] = *cfg.beta;
    if (cfg.gamma) j["gamma"] = *cfg.gamma;
    j["K"] = cfg.K;
    j["R"] = cfg.R;
    j["noise"] = {{"sigma", cfg.noise.sigma}, {"seed", cfg.noise.seed}};
    j["record_local"] = cfg.record_local;
    j["record_consensus"] = cfg.record_consensus;
    if (cfg.stage_switch) j["stage_switch"] = *cfg.stage_switch;
    if (cfg.target_epsilon) j["target_epsilon"] = *cfg.target_epsilon;
    return j;
}

namespace {

json finite_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

json fixed_point_to_json(const FixedPointReport& rep, const std::optional<DiscrepancyReport>& disc) {
    json j;
    j["eta"] = rep.eta;
    j["K"] = rep.K;
    if (rep.beta) j["beta"] = *rep.beta;
    j["exists"] = rep.exists;
    j["x_infinity"] = rep.exists ? vector_to_json(rep.x_infinity) : json(nullptr);
    j["lambda_min_C"] = rep.lambda_min_C;
    j["kappa_prime"] = rep.kappa_prime;
    j["stationarity_residual"] = finite_or_null(rep.stationarity_residual);
    if (disc) {
        j["bounds"] = {{"xstar_xbar", disc->bound_xstar_xbar},
                       {"xinf_xbar", disc->bound_xinf_xbar ? json(*disc->bound_xinf_xbar)
                                                           : json(nullptr)}};
        j["measured"] = {{"xstar_xbar", disc->measured_xstar_xbar},
                         {"xinf_xbar", disc->measured_xinf_xbar}};
        j["zeta_star"] = disc->zeta_star;
        j["tau"] = disc->tau;
    }
    return j;
}

json heterogeneity_to_json(const HeterogeneityReport& rep) {
    json j;
    j["zeta_star"] = rep.zeta_star.distance_form;
    j["zeta_star_gradient_form"] = rep.zeta_star.gradient_form;
    j["tau"] = rep.tau;
    json pw = json::array();
    for (Eigen::Index i = 0; i < rep.pairwise_tau.rows(); ++i) {
        Vector row = rep.pairwise_tau.row(i).transpose();
        pw.push_back(vector_to_json(row));
    }
    j["pairwise_tau"] = pw;
    auto ball = [](const ZetaBall& b) {
        return json{{"D", b.D},
                    {"center", to_string(b.center)},
                    {"empirical_sup", b.empirical},
                    {"analytic_bound", b.bound},
                    {"anchor_distance", b.anchor_distance},
                    {"gap", b.bound - b.empirical}};
    };
    if (rep.zeta_ball) j["zeta_ball"] = ball(*rep.zeta_ball);
    if (rep.zeta_ball_at_optimum) j["zeta_ball_at_optimum"] = ball(*rep.zeta_ball_at_optimum);
    j["rho"] = {{"eta", rep.rho_eta},
                {"K", rep.rho_K},
                {"value", rep.rho},
                {"bound_general", rep.rho_bounds.general},
                {"bound_quadratic", rep.rho_bounds.quadratic}};
    j["q_lipschitz"] = rep.q_lipschitz;
    return j;
}

json bound_report_to_json(const bounds::BoundReport& rep) {
    json j;
    j["name"] = rep.name;
    j["value"] = rep.value;
    j["aggregation"] = rep.aggregation;
    json terms = json::array();
    for (const auto& [l, v] : rep.terms) terms.push_back({{"term", l}, {"value", v}});
    j["terms"] = terms;
    if (!rep.branch.empty()) j["branch"] = rep.branch;
    for (const auto& [l, v] : rep.branch_totals) j["alternatives"][l] = v;
    j["caveats"] = rep.caveats;
    return j;
}

bounds::BoundParams bound_params_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("bound parameters must be a JSON object");
    bounds::BoundParams p;
    static const std::vector<std::string> known = {
        "H", "B", "sigma", "mu", "tau", "zeta", "zeta_consensus", "zeta_star", "Q",
        "M", "K", "R", "D", "epsilon", "eta", "kappa"};
    for (const auto& [k, v] : j.items()) {
        if (std::find(known.begin(), known.end(), k) == known.end()) {
            throw ConfigError("unknown bound parameter '" + k + "'");
        }
        if (!v.is_number()) throw ConfigError("bound parameter '" + k + "' must be numeric");
    }
    auto get = [&](const char* k, double def) { return j.contains(k) ? j.at(k).get<double>() : def; };
    p.H = get("H", p.H);
    p.B = get("B", p.B);
    p.sigma = get("sigma", p.sigma);
    p.mu = get("mu", p.mu);
    if (j.contains("kappa")) {
        if (j.contains("mu")) throw ConfigError("give either mu or kappa, not both");
        p.mu = p.H / j.at("kappa").get<double>();
    }
    p.tau = get("tau", p.tau);
    p.zeta = get("zeta", get("zeta_consensus", p.zeta));
    p.zeta_star = get("zeta_star", p.zeta_star);
    p.Q = get("Q", p.Q);
    p.M = get("M", p.M);
    p.K = get("K", p.K);
    p.R = get("R", p.R);
    p.D = get("D", p.D);
    p.epsilon = get("epsilon", p.epsilon);
    p.eta = get("eta", p.eta);
    return p;
}

}  // namespace icsim
