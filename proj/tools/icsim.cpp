// icsim: command-line front end for the intermittent-communication simulator.
// Exit codes: 0 ok, 1 check failure, 2 usage, 3 numerical error.

#include <CLI11.hpp>

#include <cstdio>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "icsim/fixed_point.hpp"
#include "icsim/harness.hpp"
#include "icsim/heterogeneity.hpp"
#include "icsim/io.hpp"
#include "icsim/theory_bounds.hpp"
#include "icsim/verify.hpp"

namespace {

using namespace icsim;

constexpr int kOk = 0;
constexpr int kCheckFailed = 1;
constexpr int kUsage = 2;
constexpr int kNumerical = 3;

// key=value pairs; values are parsed as JSON when possible, else kept as strings
json parse_assignments(const std::vector<std::string>& kv) {
    json out = json::object();
    for (const auto& s : kv) {
        auto eq = s.find('=');
        if (eq == std::string::npos || eq == 0) throw ConfigError("expected key=value, got '" + s + "'");
        std::string key = s.substr(0, eq), val = s.substr(eq + 1);
        try {
            out[key] = json::parse(val);
        } catch (const json::exception&) {
            out[key] = val;
        }
    }
    return out;
}

void emit(const std::string& text, const std::string& path) {
    if (path.empty() || path == "-") {
        std::cout << text;
    } else {
        write_file_atomic(path, text);
    }
}

std::vector<int> parse_int_list(const std::string& s) {
    std::vector<int> out;
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
        if (item.empty()) continue;
        std::size_t used = 0;
        int v = std::stoi(item, &used);
        if (used != item.size()) throw ConfigError("bad integer '" + item + "'");
        out.push_back(v);
    }
    if (out.empty()) throw ConfigError("empty integer list");
    return out;
}

int print_verify(const std::vector<std::string>& suites) {
    bool all = true;
    for (const auto& name : suites) {
        VerifyReport rep = verify(name);
        std::printf("[%s] %s (%.2f s)\n", rep.passed() ? "PASS" : "FAIL", rep.suite.c_str(),
                    rep.seconds);
        for (const auto& c : rep.checks) {
            std::printf("    %s  %s: %s\n", c.passed ? "ok  " : "FAIL", c.name.c_str(),
                        c.detail.c_str());
        }
        all = all && rep.passed();
    }
    return all ? kOk : kCheckFailed;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"icsim: local SGD and mini-batch SGD on heterogeneous quadratics"};
    app.require_subcommand(1);

    // instance
    auto* inst_cmd = app.add_subcommand("instance", "generate a problem instance");
    std::string gen_name, out_path;
    std::vector<std::string> gen_params;
    inst_cmd->add_option("generator", gen_name,
                         "motivating, rank_one, chain, gd_worst_case, random, regression")
        ->required();
    inst_cmd->add_option("params", gen_params, "key=value parameters");
    inst_cmd->add_option("-o,--output", out_path, "output JSON file (default stdout)");

    // simulate / sweep
    auto* sim_cmd = app.add_subcommand("simulate", "run an experiment configuration");
    std::string config_path, out_dir;
    sim_cmd->add_option("-c,--config", config_path, "experiment JSON")->required();
    sim_cmd->add_option("-o,--output", out_dir, "override the output directory");
    auto* sweep_cmd = app.add_subcommand("sweep", "run a sweep configuration");
    sweep_cmd->add_option("-c,--config", config_path, "experiment JSON")->required();
    sweep_cmd->add_option("-o,--output", out_dir, "override the output directory");

    // fixed-point
    auto* fp_cmd = app.add_subcommand("fixed-point", "fixed point of local GD");
    std::string fp_inst, k_grid = "1";
    std::vector<std::string> etas;
    bool fp_report = false;
    fp_cmd->add_option("-i,--instance", fp_inst, "instance JSON")->required();
    fp_cmd->add_option("--eta", etas, "step size or schedule such as 1/(2*H*K); repeatable")
        ->required();
    fp_cmd->add_option("--k-grid", k_grid, "comma-separated K values");
    fp_cmd->add_flag("--report", fp_report, "JSON report per point instead of the CSV table");
    fp_cmd->add_option("-o,--output", out_path, "output file (default stdout)");

    // hetero
    auto* het_cmd = app.add_subcommand("hetero", "heterogeneity measures of an instance");
    std::string het_inst;
    HeterogeneityOptions hopt;
    double ball = 0.0;
    double het_eta = 0.0;
    het_cmd->add_option("-i,--instance", het_inst, "instance JSON")->required();
    het_cmd->add_option("--ball", ball, "radius D of the zeta ball");
    het_cmd->add_option("--eta", het_eta, "step size for rho (default 1/(2H))");
    het_cmd->add_option("--K", hopt.K, "local steps for rho");
    het_cmd->add_option("--samples", hopt.n_samples, "Monte Carlo samples in the ball");
    het_cmd->add_option("--seed", hopt.seed, "sampling seed");
    het_cmd->add_option("-o,--output", out_path, "output file (default stdout)");

    // bounds
    auto* b_cmd = app.add_subcommand("bounds", "evaluate a theory bound");
    std::string b_name, b_params;
    std::vector<std::string> b_set;
    b_cmd->add_option("name", b_name, "sc_upper, convex_upper, lsgd_lower, ai_lower, gd_lower, "
                                      "two_stage, consensus")
        ->required();
    b_cmd->add_option("-p,--params", b_params, "parameter JSON file");
    b_cmd->add_option("--set", b_set, "key=value overrides");

    // verify
    auto* v_cmd = app.add_subcommand("verify", "run the self-verification suites");
    std::string suite = "all";
    v_cmd->add_option("suite", suite, "suite name or 'all'");
    bool list = false;
    v_cmd->add_flag("--list", list, "list suite names");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kOk : kUsage;
    }

    try {
        if (*inst_cmd) {
            ProblemInstance inst = make_instance(gen_name, parse_assignments(gen_params));
            emit(instance_to_json(inst).dump(2) + "\n", out_path);
        } else if (*sim_cmd || *sweep_cmd) {
            ExperimentConfig cfg = load_experiment_config(config_path);
            if (!out_dir.empty()) cfg.output_dir = out_dir;
            ExperimentResult res = run_experiment(cfg);
            if (cfg.kind == "fixed_point_sweep") {
                std::printf("%d fixed-point rows written to %s\n", res.manifest["rows"].get<int>(),
                            res.output_dir.c_str());
                return kOk;
            }
            int diverged = 0;
            for (const auto& r : res.runs) diverged += r.status != "ok";
            std::printf("%zu runs written to %s (%d not ok)\n", res.runs.size(),
                        res.output_dir.c_str(), diverged);
        } else if (*fp_cmd) {
            ProblemInstance inst = load_instance(fp_inst);
            std::vector<NamedSchedule> scheds;
            for (const auto& e : etas) scheds.push_back({e, ScheduleExpr::parse(e)});
            std::vector<int> Ks = parse_int_list(k_grid);
            if (!fp_report) {
                emit(fixed_point_sweep_csv(sweep_fixed_point(inst, scheds, Ks)), out_path);
            } else {
                json all = json::array();
                for (const auto& s : scheds) {
                    for (int K : Ks) {
                        double eta = s.expr.evaluate({{"H", inst.smoothness()},
                                                      {"mu", inst.mu()},
                                                      {"K", static_cast<double>(K)}});
                        FixedPointReport rep = fixed_point(inst, eta, K);
                        std::optional<DiscrepancyReport> disc;
                        if (K > 1 && rep.exists) disc = discrepancy_bounds(inst, eta, K);
                        json j = fixed_point_to_json(rep, disc);
                        j["schedule"] = s.name;
                        all.push_back(j);
                    }
                }
                emit(all.dump(2) + "\n", out_path);
            }
        } else if (*het_cmd) {
            ProblemInstance inst = load_instance(het_inst);
            if (het_cmd->count("--ball")) hopt.ball_radius = ball;
            if (het_cmd->count("--eta")) hopt.eta = het_eta;
            emit(heterogeneity_to_json(heterogeneity_report(inst, hopt)).dump(2) + "\n", out_path);
        } else if (*b_cmd) {
            json p = b_params.empty() ? json::object() : json::parse(read_file(b_params));
            json overrides = parse_assignments(b_set);
            for (const auto& [k, v] : overrides.items()) p[k] = v;
            auto rep = bounds::evaluate(b_name, bound_params_from_json(p));
            std::cout << bound_report_to_json(rep).dump(2) << "\n";
        } else if (*v_cmd) {
            if (list) {
                for (const auto& n : verify_suite_names()) std::cout << n << "\n";
                return kOk;
            }
            if (suite == "all") return print_verify(verify_suite_names());
            return print_verify({suite});
        }
    } catch (const ConfigError& e) {
        std::cerr << "icsim: " << e.what() << "\n";
        return kUsage;
    } catch (const InvalidInstance& e) {
        std::cerr << "icsim: invalid instance: " << e.what() << "\n";
        return kUsage;
    } catch (const SpecError& e) {
        std::cerr << "icsim: " << e.what() << "\n";
        return kUsage;
    } catch (const json::exception& e) {
        std::cerr << "icsim: JSON error: " << e.what() << "\n";
        return kUsage;
    } catch (const Error& e) {
        std::cerr << "icsim: numerical error: " << e.what() << "\n";
        return kNumerical;
    } catch (const std::exception& e) {
        std::cerr << "icsim: " << e.what() << "\n";
        return kNumerical;
    }
    return kOk;
}
