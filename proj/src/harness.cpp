#include "icsim/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include "icsim/fixed_point.hpp"
#include "icsim/hash.hpp"
#include "icsim/instances.hpp"

namespace icsim {

namespace fs = std::filesystem;

// ---------------------------------------------------------------- schedules

const std::vector<std::string>& schedule_symbols() {
    static const std::vector<std::string> s = {"H", "mu", "K", "R"};
    return s;
}

namespace {

struct Monomial {
    double c = 1.0;
    std::map<std::string, double> e;

    Monomial& operator*=(const Monomial& o) {
        c *= o.c;
        for (const auto& [k, v] : o.e) e[k] += v;
        return *this;
    }
    Monomial& operator/=(const Monomial& o) {
        c /= o.c;
        for (const auto& [k, v] : o.e) e[k] -= v;
        return *this;
    }
    void raise(double p) {
        c = std::pow(c, p);
        for (auto& [k, v] : e) v *= p;
    }
};

class Parser {
public:
    explicit Parser(const std::string& s) : s_(s) {}

    Monomial parse() {
        Monomial m = expr();
        skip();
        if (i_ != s_.size()) fail("unexpected '" + std::string(1, s_[i_]) + "'");
        return m;
    }

private:
    [[noreturn]] void fail(const std::string& why) const {
        throw ConfigError("schedule '" + s_ + "': " + why);
    }
    void skip() {
        while (i_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[i_]))) ++i_;
    }
    bool eat(char c) {
        skip();
        if (i_ < s_.size() && s_[i_] == c) {
            ++i_;
            return true;
        }
        return false;
    }

    Monomial expr() {
        Monomial m = factor();
        for (;;) {
            if (eat('*')) {
                m *= factor();
            } else if (eat('/')) {
                m /= factor();
            } else {
                return m;
            }
        }
    }

    Monomial factor() {
        Monomial m = primary();
        if (eat('^')) m.raise(exponent());
        return m;
    }

    double number() {
        skip();
        const char* begin = s_.c_str() + i_;
        char* end = nullptr;
        double v = std::strtod(begin, &end);
        if (end == begin) fail("expected a number");
        i_ += static_cast<std::size_t>(end - begin);
        return v;
    }

    // integer or decimal, optionally negated; p/q only inside parentheses
    double exponent() {
        if (eat('(')) {
            double sign = eat('-') ? -1.0 : 1.0;
            double p = number();
            if (eat('/')) {
                double q = number();
                if (q == 0) fail("zero denominator in exponent");
                p /= q;
            }
            if (!eat(')')) fail("missing ')' in exponent");
            return sign * p;
        }
        double sign = eat('-') ? -1.0 : 1.0;
        return sign * number();
    }

    Monomial primary() {
        skip();
        if (eat('(')) {
            Monomial m = expr();
            if (!eat(')')) fail("missing ')'");
            return m;
        }
        if (i_ < s_.size() && std::isalpha(static_cast<unsigned char>(s_[i_]))) {
            std::size_t j = i_;
            while (j < s_.size() && std::isalnum(static_cast<unsigned char>(s_[j]))) ++j;
            std::string name = s_.substr(i_, j - i_);
            const auto& ok = schedule_symbols();
            if (std::find(ok.begin(), ok.end(), name) == ok.end()) {
                fail("unknown symbol '" + name + "' (allowed: H, mu, K, R)");
            }
            i_ = j;
            Monomial m;
            m.e[name] = 1.0;
            return m;
        }
        Monomial m;
        m.c = number();
        return m;
    }

    std::string s_;
    std::size_t i_ = 0;
};

}  // namespace

ScheduleExpr ScheduleExpr::parse(const std::string& text) {
    Monomial m = Parser(text).parse();
    if (!std::isfinite(m.c)) throw ConfigError("schedule '" + text + "': coefficient not finite");
    ScheduleExpr out;
    out.text_ = text;
    out.coefficient_ = m.c;
    for (const auto& [k, v] : m.e) {
        if (v != 0.0) out.exponents_[k] = v;
    }
    return out;
}

ScheduleExpr ScheduleExpr::constant(double c) {
    ScheduleExpr out;
    out.text_ = format_double(c);
    out.coefficient_ = c;
    return out;
}

double ScheduleExpr::evaluate(const std::map<std::string, double>& values) const {
    double v = coefficient_;
    for (const auto& [k, p] : exponents_) {
        auto it = values.find(k);
        if (it == values.end()) {
            throw ConfigError("schedule '" + text_ + "' uses '" + k + "', which is not declared");
        }
        v *= std::pow(it->second, p);
    }
    return v;
}

std::vector<std::string> ScheduleExpr::symbols() const {
    std::vector<std::string> out;
    for (const auto& [k, v] : exponents_) out.push_back(k);
    return out;
}

double ScheduleExpr::exponent(const std::string& symbol) const {
    auto it = exponents_.find(symbol);
    return it == exponents_.end() ? 0.0 : it->second;
}

std::string AxisValue::label() const {
    return schedule ? schedule->text() : format_double(number.value_or(0.0));
}

double AxisValue::resolve(const std::map<std::string, double>& values) const {
    return schedule ? schedule->evaluate(values) : *number;
}

// ---------------------------------------------------------------- config

const std::vector<std::string>& sweep_axis_names() {
    // integer axes first so that schedules can refer to K and R
    static const std::vector<std::string> n = {"K", "R", "R1", "seed", "sigma", "eta", "beta",
                                               "gamma"};
    return n;
}

namespace {

std::vector<AxisValue> parse_axis(const std::string& name, const json& j) {
    std::vector<AxisValue> out;
    auto one = [&](const json& v) {
        AxisValue a;
        if (v.is_number()) {
            a.number = v.get<double>();
        } else if (v.is_string()) {
            a.schedule = ScheduleExpr::parse(v.get<std::string>());
        } else {
            throw ConfigError("sweep axis '" + name + "': values must be numbers or schedules");
        }
        out.push_back(a);
    };
    if (j.is_array()) {
        for (const auto& v : j) one(v);
    } else if (j.is_object() && j.contains("range")) {
        const auto& r = j.at("range");
        if (!r.is_array() || r.size() != 2) throw ConfigError("range needs [first, last]");
        double a = r[0].get<double>(), b = r[1].get<double>();
        double step = j.value("step", 1.0);
        if (!(step > 0)) throw ConfigError("range step must be positive");
        const auto n = static_cast<long>(std::floor((b - a) / step + 1e-9));
        for (long i = 0; i <= n; ++i) one(json(a + static_cast<double>(i) * step));
    } else if (j.is_object() && j.contains("log")) {
        const auto& r = j.at("log");
        if (!r.is_array() || r.size() != 3) throw ConfigError("log needs [lo, hi, n]");
        for (double v : log_grid(r[0].get<double>(), r[1].get<double>(), r[2].get<int>())) {
            one(json(v));
        }
    } else {
        one(j);
    }
    return out;
}

AlgorithmConfig parse_algorithm_config(const json& j) {
    if (!j.is_object()) throw ConfigError("algorithm entries must be objects");
    static const std::set<std::string> known = {
        "algorithm", "eta", "beta", "gamma", "K", "R", "sigma", "noise", "seed",
        "record_consensus", "stage_switch", "R1", "target_epsilon", "stop_tolerance"};
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ConfigError("unknown algorithm field '" + k + "'");
    }
    AlgorithmConfig c;
    c.algorithm = parse_algorithm(j.value("algorithm", std::string("local_sgd")));
    if (j.contains("eta")) c.eta = j.at("eta").get<double>();
    if (j.contains("beta")) c.beta = j.at("beta").get<double>();
    if (j.contains("gamma")) c.gamma = j.at("gamma").get<double>();
    c.K = j.value("K", 1);
    c.R = j.value("R", 1);
    if (j.contains("noise")) {
        c.noise.sigma = j.at("noise").value("sigma", -1.0);
        c.noise.seed = j.at("noise").value("seed", std::uint64_t{0});
    } else {
        c.noise.sigma = j.value("sigma", -1.0);  // negative: take the instance's sigma
        c.noise.seed = j.value("seed", std::uint64_t{0});
    }
    c.record_consensus = j.value("record_consensus", false);
    if (j.contains("stage_switch")) c.stage_switch = j.at("stage_switch").get<int>();
    if (j.contains("R1")) c.stage_switch = j.at("R1").get<int>();
    if (j.contains("target_epsilon")) c.target_epsilon = j.at("target_epsilon").get<double>();
    if (j.contains("stop_tolerance")) c.stop_tolerance = j.at("stop_tolerance").get<double>();
    return c;
}

double get_num(const json& p, const char* key, double def) {
    if (!p.contains(key)) return def;
    if (!p.at(key).is_number()) throw ConfigError(std::string("parameter '") + key + "' must be numeric");
    return p.at(key).get<double>();
}

}  // namespace

ExperimentConfig parse_experiment_config(const std::string& text, const std::string& base_dir) {
    json j;
    try {
        j = json::parse(text);
    } catch (const json::exception& e) {
        throw ConfigError(std::string("config is not valid JSON: ") + e.what());
    }
    if (!j.is_object()) throw ConfigError("config must be a JSON object");
    static const std::set<std::string> known = {"kind",   "instance",      "algorithm",
                                                "algorithms", "sweep",     "output",
                                                "seed",   "max_runs",      "eta_schedules",
                                                "K_grid", "description"};
    for (const auto& [k, v] : j.items()) {
        if (!known.count(k)) throw ConfigError("unknown config field '" + k + "'");
    }
    ExperimentConfig c;
    c.raw = text;
    c.base_dir = base_dir;
    c.kind = j.value("kind", std::string("simulation"));
    if (c.kind != "simulation" && c.kind != "fixed_point_sweep") {
        throw ConfigError("kind must be 'simulation' or 'fixed_point_sweep'");
    }
    if (!j.contains("instance")) throw ConfigError("config needs an 'instance'");
    c.instance = j.at("instance");
    c.seed = j.value("seed", std::uint64_t{0});
    c.max_runs = j.value("max_runs", std::size_t{100000});
    if (j.contains("output")) {
        const auto& o = j.at("output");
        if (o.is_string()) {
            c.output_dir = o.get<std::string>();
        } else {
            c.output_dir = o.value("directory", c.output_dir);
        }
    }
    if (j.contains("algorithm")) c.algorithms.push_back(parse_algorithm_config(j.at("algorithm")));
    if (j.contains("algorithms")) {
        for (const auto& a : j.at("algorithms")) c.algorithms.push_back(parse_algorithm_config(a));
    }

    std::set<std::string> declared = {"H", "mu"};
    if (j.contains("sweep")) {
        const auto& s = j.at("sweep");
        if (!s.is_object()) throw ConfigError("'sweep' must be an object of axes");
        const auto& names = sweep_axis_names();
        for (const auto& [k, v] : s.items()) {
            if (std::find(names.begin(), names.end(), k) == names.end()) {
                throw ConfigError("unknown sweep axis '" + k + "'");
            }
        }
        for (const auto& name : names) {
            if (!s.contains(name)) continue;
            SweepAxis axis{name, parse_axis(name, s.at(name))};
            c.axes.push_back(std::move(axis));
        }
    }
    // K and R are always available from the algorithm entry itself
    declared.insert("K");
    declared.insert("R");
    for (const auto& axis : c.axes) {
        for (const auto& v : axis.values) {
            if (!v.schedule) continue;
            if (axis.name != "eta" && axis.name != "beta" && axis.name != "gamma" &&
                axis.name != "sigma") {
                throw ConfigError("axis '" + axis.name + "' does not accept schedules");
            }
            for (const auto& sym : v.schedule->symbols()) {
                if (!declared.count(sym)) {
                    throw ConfigError("schedule '" + v.schedule->text() + "' uses undeclared '" +
                                      sym + "'");
                }
            }
        }
    }

    if (c.kind == "fixed_point_sweep") {
        if (!j.contains("eta_schedules") || !j.contains("K_grid")) {
            throw ConfigError("fixed_point_sweep needs 'eta_schedules' and 'K_grid'");
        }
        const auto& es = j.at("eta_schedules");
        auto add = [&](const std::string& name, const json& v) {
            ScheduleExpr e = v.is_number() ? ScheduleExpr::constant(v.get<double>())
                                           : ScheduleExpr::parse(v.get<std::string>());
            for (const auto& sym : e.symbols()) {
                if (sym == "R") throw ConfigError("fixed-point schedules cannot depend on R");
            }
            c.eta_schedules.push_back({name, e});
        };
        if (es.is_object()) {
            for (const auto& [k, v] : es.items()) add(k, v);
        } else if (es.is_array()) {
            for (const auto& v : es) add(v.is_string() ? v.get<std::string>() : v.dump(), v);
        } else {
            throw ConfigError("eta_schedules must be an object or array");
        }
        for (const auto& v : parse_axis("K_grid", j.at("K_grid"))) {
            if (!v.number) throw ConfigError("K_grid must be numeric");
            c.K_grid.push_back(static_cast<int>(std::lround(*v.number)));
        }
    } else if (c.algorithms.empty()) {
        throw ConfigError("simulation config needs 'algorithm' or 'algorithms'");
    }
    return c;
}

ExperimentConfig load_experiment_config(const std::string& path) {
    fs::path p(path);
    return parse_experiment_config(read_file(path), p.parent_path().string());
}

// ---------------------------------------------------------------- instances

ProblemInstance make_instance(const std::string& generator, const json& params) {
    const json p = params.is_null() ? json::object() : params;
    if (!p.is_object()) throw ConfigError("generator parameters must be an object");
    ProblemInstance inst = [&]() -> ProblemInstance {
        if (generator == "motivating") {
            Vector xs = p.contains("x_star") ? vector_from_json(p.at("x_star")) : Vector{{1.0, 1.0}};
            return gen::make_motivating_pair(get_num(p, "H", 1.0), xs);
        }
        if (generator == "rank_one") {
            return gen::make_rank_one_pair(get_num(p, "H", 1.0), get_num(p, "B", 1.0),
                                           static_cast<int>(get_num(p, "M", 2)),
                                           get_num(p, "kappa", 10.0))
                .instance;
        }
        if (generator == "chain") {
            gen::ChainSpec s;
            s.H = get_num(p, "H", s.H);
            s.B = get_num(p, "B", s.B);
            s.R = static_cast<int>(get_num(p, "R", s.R));
            s.M = static_cast<int>(get_num(p, "M", s.M));
            if (p.contains("d")) s.d = static_cast<int>(get_num(p, "d", 0));
            return gen::make_chain_instance(s).instance;
        }
        if (generator == "gd_worst_case") {
            return gen::make_gd_worst_case(get_num(p, "H", 1.0), get_num(p, "kappa", 30.0),
                                           get_num(p, "B", 1.0),
                                           static_cast<int>(get_num(p, "d", 2)))
                .instance;
        }
        if (generator == "random") {
            gen::HeteroDials dials;
            dials.concept_spread = get_num(p, "concept_spread", dials.concept_spread);
            dials.hessian_spread = get_num(p, "hessian_spread", dials.hessian_spread);
            dials.center_norm = get_num(p, "center_norm", dials.center_norm);
            return gen::make_random_instance(static_cast<int>(get_num(p, "M", 4)),
                                             static_cast<int>(get_num(p, "d", 2)),
                                             get_num(p, "mu", 0.1), get_num(p, "H", 1.0), dials,
                                             static_cast<std::uint64_t>(get_num(p, "seed", 0)));
        }
        if (generator == "regression") {
            if (!p.contains("machines")) throw ConfigError("regression needs 'machines'");
            gen::RegressionSpec spec;
            for (const auto& jm : p.at("machines")) {
                Vector mean = vector_from_json(jm.at("mean"));
                const int d = static_cast<int>(mean.size());
                SymMatrix cov = jm.contains("cov")
                                    ? SymMatrix(matrix_from_json(jm.at("cov"), d))
                                    : SymMatrix::identity(d);
                spec.push_back({mean, cov, vector_from_json(jm.at("truth")),
                                jm.value("noise", 0.0)});
            }
            return gen::make_linear_regression(spec, p.value("strongly_convex", false)).instance;
        }
        throw ConfigError("unknown generator '" + generator +
                          "' (motivating, rank_one, chain, gd_worst_case, random, regression)");
    }();
    if (p.contains("sigma")) return with_sigma(inst, get_num(p, "sigma", 0.0));
    return inst;
}

ProblemInstance make_instance_from_config(const json& source, const std::string& base_dir) {
    if (source.is_string() || (source.is_object() && source.contains("file"))) {
        std::string f = source.is_string() ? source.get<std::string>()
                                           : source.at("file").get<std::string>();
        fs::path path(f);
        if (path.is_relative() && !base_dir.empty()) path = fs::path(base_dir) / path;
        ProblemInstance inst = load_instance(path.string());
        if (source.is_object() && source.contains("sigma")) {
            return with_sigma(inst, get_num(source, "sigma", 0.0));
        }
        return inst;
    }
    if (!source.is_object() || !source.contains("generator")) {
        throw ConfigError("instance needs 'generator' or 'file'");
    }
    return make_instance(source.at("generator").get<std::string>(),
                         source.value("params", json::object()));
}

// ---------------------------------------------------------------- execution

int worker_threads() {
    if (const char* env = std::getenv("ICSIM_THREADS")) {
        char* end = nullptr;
        long v = std::strtol(env, &end, 10);
        if (end != env && v > 0) return static_cast<int>(std::min(v, 1024L));
    }
    unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

void parallel_for(std::size_t n, const std::function<void(std::size_t)>& f) {
    const std::size_t workers = std::min<std::size_t>(static_cast<std::size_t>(worker_threads()), n);
    if (workers <= 1) {
        for (std::size_t i = 0; i < n; ++i) f(i);
        return;
    }
    std::atomic<std::size_t> next{0};
    std::exception_ptr first;
    std::mutex mu;
    auto work = [&] {
        for (;;) {
            std::size_t i = next.fetch_add(1);
            if (i >= n) return;
            try {
                f(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(mu);
                if (!first) first = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (std::size_t t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
    if (first) std::rethrow_exception(first);
}

std::string hex64(std::uint64_t v) {
    char buf[17];
    std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
    return buf;
}

std::vector<double> log_grid(double lo, double hi, int n) {
    if (!(lo > 0) || !(hi >= lo) || n < 1) throw ConfigError("log grid needs 0 < lo <= hi, n >= 1");
    std::vector<double> g(static_cast<std::size_t>(n));
    if (n == 1) {
        g[0] = lo;
        return g;
    }
    const double a = std::log(lo), b = std::log(hi);
    for (int i = 0; i < n; ++i) g[i] = std::exp(a + (b - a) * i / (n - 1));
    g.front() = lo;
    g.back() = hi;
    return g;
}

std::vector<RunRecord> expand_sweep(const ExperimentConfig& config, const ProblemInstance& instance) {
    std::size_t total = config.algorithms.size();
    for (const auto& axis : config.axes) {
        if (axis.values.empty()) return {};
        total *= axis.values.size();
        if (total > config.max_runs) {
            throw ConfigError("sweep exceeds max_runs = " + std::to_string(config.max_runs));
        }
    }
    std::vector<RunRecord> out;
    out.reserve(total);
    std::vector<std::size_t> idx(config.axes.size(), 0);
    for (const auto& base : config.algorithms) {
        std::fill(idx.begin(), idx.end(), 0);
        for (;;) {
            RunRecord rec;
            rec.index = static_cast<int>(out.size());
            rec.config = base;
            if (rec.config.noise.sigma < 0) rec.config.noise.sigma = instance.sigma();
            if (!base.noise.seed) rec.config.noise.seed = config.seed;
            std::map<std::string, double> vals = {{"H", instance.smoothness()},
                                                  {"mu", instance.mu()},
                                                  {"K", static_cast<double>(base.K)},
                                                  {"R", static_cast<double>(base.R)}};
            rec.params = json::object();
            for (std::size_t a = 0; a < config.axes.size(); ++a) {
                const auto& axis = config.axes[a];
                const auto& av = axis.values[idx[a]];
                const double v = av.resolve(vals);
                auto as_int = [&](const char* what) {
                    if (v != std::floor(v) || v < 0) {
                        throw ConfigError(std::string(what) + " must be a nonnegative integer");
                    }
                    return static_cast<int>(v);
                };
                if (axis.name == "K") {
                    rec.config.K = as_int("K");
                    vals["K"] = v;
                } else if (axis.name == "R") {
                    rec.config.R = as_int("R");
                    vals["R"] = v;
                } else if (axis.name == "R1") {
                    rec.config.stage_switch = as_int("R1");
                } else if (axis.name == "seed") {
                    rec.config.noise.seed = static_cast<std::uint64_t>(as_int("seed"));
                } else if (axis.name == "sigma") {
                    rec.config.noise.sigma = v;
                } else if (axis.name == "eta") {
                    rec.config.eta = v;
                } else if (axis.name == "beta") {
                    rec.config.beta = v;
                } else if (axis.name == "gamma") {
                    rec.config.gamma = v;
                }
                rec.params[axis.name] = v;
                if (av.schedule) rec.params[axis.name + "_schedule"] = av.schedule->text();
            }
            char name[32];
            std::snprintf(name, sizeof name, "run_%05d.csv", rec.index);
            rec.file = name;
            out.push_back(std::move(rec));
            // odometer over the axes, last axis fastest
            bool carry = true;
            for (std::size_t a = config.axes.size(); carry && a > 0; --a) {
                if (++idx[a - 1] < config.axes[a - 1].values.size()) {
                    carry = false;
                } else {
                    idx[a - 1] = 0;
                }
            }
            if (carry) break;
        }
    }
    return out;
}

namespace {

void execute(const ProblemInstance& instance, RunRecord& rec) {
    try {
        Trajectory t = run_algorithm(instance, rec.config);
        std::optional<Vector> fp;
        if (rec.config.algorithm == Algorithm::local_sgd && instance.all_strongly_convex()) {
            FixedPointReport r = fixed_point(instance, t.steps.eta, rec.config.K);
            if (r.exists) fp = r.x_infinity;
        }
        rec.csv = trajectory_csv(t, fp);
        rec.final_suboptimality = t.final_suboptimality();
        rec.rounds = t.rounds.back().round;
    } catch (const DivergenceError& e) {
        rec.status = "diverged";
        rec.message = e.what();
        rec.final_suboptimality = std::numeric_limits<double>::infinity();
        rec.rounds = e.round();
        rec.csv = "round,status\n" + std::to_string(e.round()) + ",diverged\n";
    } catch (const Error& e) {
        rec.status = "error";
        rec.message = e.what();
        rec.final_suboptimality = std::numeric_limits<double>::quiet_NaN();
        rec.csv = "round,status\n0,error\n";
    }
}

fs::path prepare_output(const std::string& dir) {
    fs::path out(dir);
    std::error_code ec;
    fs::create_directories(out, ec);
    if (ec || !fs::is_directory(out)) {
        throw ConfigError("output directory '" + dir + "' cannot be created");
    }
    // probe writability up front instead of failing after the runs
    fs::path probe = out / ".icsim_probe";
    {
        std::ofstream f(probe);
        if (!f) throw ConfigError("output directory '" + dir + "' is not writable");
    }
    fs::remove(probe, ec);
    return out;
}

json num_or_null(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& config) {
    ProblemInstance instance = make_instance_from_config(config.instance, config.base_dir);
    fs::path out = prepare_output(config.output_dir);

    ExperimentResult res;
    res.output_dir = out.string();
    json manifest;
    manifest["config_hash"] = hex64(fnv1a64(config.raw));
    manifest["kind"] = config.kind;
    manifest["seed"] = config.seed;
    manifest["instance_fingerprint"] = hex64(instance.fingerprint());

    if (config.kind == "fixed_point_sweep") {
        auto rows = sweep_fixed_point(instance, config.eta_schedules, config.K_grid);
        write_file_atomic((out / "fixed_point_sweep.csv").string(), fixed_point_sweep_csv(rows));
        manifest["files"] = json::array({"fixed_point_sweep.csv"});
        manifest["rows"] = rows.size();
        res.manifest = manifest;
        write_file_atomic((out / "manifest.json").string(), manifest.dump(2) + "\n");
        return res;
    }

    res.runs = expand_sweep(config, instance);
    parallel_for(res.runs.size(), [&](std::size_t i) { execute(instance, res.runs[i]); });

    // barrier passed: write in grid order
    json runs = json::array();
    for (const auto& r : res.runs) {
        write_file_atomic((out / r.file).string(), r.csv);
        json jr;
        jr["index"] = r.index;
        jr["file"] = r.file;
        jr["config"] = algorithm_config_to_json(r.config);
        jr["params"] = r.params;
        jr["seed"] = r.config.noise.seed;
        jr["status"] = r.status;
        if (!r.message.empty()) jr["message"] = r.message;
        jr["final_suboptimality"] = num_or_null(r.final_suboptimality);
        jr["rounds"] = r.rounds;
        runs.push_back(jr);
    }
    manifest["runs"] = runs;
    res.manifest = manifest;
    write_file_atomic((out / "manifest.json").string(), manifest.dump(2) + "\n");
    return res;
}

// ---------------------------------------------------------------- fixed-point sweep

std::vector<FixedPointSweepRow> sweep_fixed_point(const ProblemInstance& instance,
                                                  const std::vector<NamedSchedule>& eta_schedules,
                                                  const std::vector<int>& K_grid) {
    if (!instance.all_strongly_convex()) {
        throw NotStronglyConvex("fixed-point sweep needs strongly convex machines");
    }
    const Vector xs = instance.global_optimum();
    const Vector xbar = instance.mean_optimum();
    const double nan = std::numeric_limits<double>::quiet_NaN();
    std::vector<FixedPointSweepRow> rows(eta_schedules.size() * K_grid.size());
    parallel_for(rows.size(), [&](std::size_t i) {
        const auto& sched = eta_schedules[i / K_grid.size()];
        const int K = K_grid[i % K_grid.size()];
        FixedPointSweepRow row{K, sched.name, nan, false, nan, nan, nan, "ok"};
        if (K < 1) {
            row.status = "invalid_K";
            rows[i] = row;
            return;
        }
        row.eta = sched.expr.evaluate({{"H", instance.smoothness()},
                                       {"mu", instance.mu()},
                                       {"K", static_cast<double>(K)}});
        if (!(row.eta > 0) || !std::isfinite(row.eta)) {
            row.status = "invalid_eta";
            rows[i] = row;
            return;
        }
        FixedPointReport fp = fixed_point(instance, row.eta, K);
        row.exists = fp.exists;
        if (!fp.exists) {
            row.status = "no_fixed_point";
        } else {
            row.dist_to_xstar = (fp.x_infinity - xs).norm();
            row.dist_to_xbar = (fp.x_infinity - xbar).norm();
            row.log_dist_to_xstar = std::log10(row.dist_to_xstar);
        }
        rows[i] = row;
    });
    return rows;
}

std::string fixed_point_sweep_csv(const std::vector<FixedPointSweepRow>& rows) {
    std::ostringstream os;
    os << "K,eta_schedule,eta,exists,dist_to_xstar,dist_to_xbar,log_dist_to_xstar,status\n";
    for (const auto& r : rows) {
        std::string name = r.schedule;
        if (name.find_first_of(",\"") != std::string::npos) {
            std::string q = "\"";
            for (char c : name) q += c == '"' ? std::string("\"\"") : std::string(1, c);
            name = q + "\"";
        }
        os << r.K << ',' << name << ',' << format_double(r.eta) << ',' << (r.exists ? 1 : 0)
           << ',' << format_double(r.dist_to_xstar) << ',' << format_double(r.dist_to_xbar) << ','
           << format_double(r.log_dist_to_xstar) << ',' << r.status << '\n';
    }
    return os.str();
}

// ---------------------------------------------------------------- step-size search

StepSizeSearch step_size_search(const ProblemInstance& instance, const AlgorithmConfig& base,
                                const std::vector<double>& eta_grid,
                                const std::vector<double>& beta_grid, int R) {
    if (eta_grid.empty()) throw ConfigError("step-size search needs a non-empty eta grid");
    const bool uses_beta =
        base.algorithm == Algorithm::local_sgd || base.algorithm == Algorithm::two_stage;
    if (uses_beta && beta_grid.empty()) throw ConfigError("step-size search needs a beta grid");
    const std::vector<double> betas = uses_beta ? beta_grid : std::vector<double>{1.0};
    const std::size_t n = eta_grid.size() * betas.size();
    std::vector<double> value(n, std::numeric_limits<double>::infinity());
    std::vector<char> div(n, 0);
    parallel_for(n, [&](std::size_t i) {
        AlgorithmConfig c = base;
        c.R = R;
        c.record_local = false;
        c.record_consensus = false;
        const double e = eta_grid[i / betas.size()];
        const bool minibatch = base.algorithm == Algorithm::minibatch_sgd ||
                               base.algorithm == Algorithm::accelerated_minibatch_sgd;
        if (minibatch) {
            c.gamma = e;
        } else {
            c.eta = e;
            c.beta = betas[i % betas.size()];
        }
        try {
            double v = run_algorithm(instance, c).final_suboptimality();
            value[i] = std::isfinite(v) ? v : std::numeric_limits<double>::infinity();
        } catch (const DivergenceError&) {
            div[i] = 1;
        }
    });
    StepSizeSearch s;
    s.best = std::numeric_limits<double>::infinity();
    s.evaluations = static_cast<int>(n);
    for (std::size_t i = 0; i < n; ++i) {
        s.diverged += div[i];
        if (value[i] < s.best) {
            s.best = value[i];
            s.best_eta = eta_grid[i / betas.size()];
            s.best_beta = betas[i % betas.size()];
        }
    }
    return s;
}

}  // namespace icsim
