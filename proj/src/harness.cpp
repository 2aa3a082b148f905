#include "cumlog/harness.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <sstream>
#include <stdexcept>

#include "cumlog/choice.hpp"
#include "cumlog/equilibrium.hpp"

namespace cumlog {

namespace {

std::string trim(const std::string& s) {
    size_t a = s.find_first_not_of(" \t\r");
    size_t b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, sep)) out.push_back(cur);
    return out;
}

Schedule parse_eta(const std::string& spec) {
    auto parts = split(spec, ':');
    if (parts[0] == "constant" && parts.size() == 2) return Schedule::constant(std::stod(parts[1]));
    if (parts[0] == "power" && parts.size() == 2) return Schedule::power(std::stod(parts[1]));
    if (parts[0] == "harmonic" && parts.size() == 1) return Schedule::harmonic();
    throw std::runtime_error("bad eta spec '" + spec + "'");
}

RSchedule parse_r(const std::string& spec) {
    auto parts = split(spec, ':');
    if (parts[0] == "constant" && parts.size() == 2)
        return RSchedule::constant(std::stod(parts[1]));
    if (parts[0] == "power" && parts.size() == 2) return RSchedule::power(std::stod(parts[1]));
    // bare number means a constant exploitation parameter
    if (parts.size() == 1) return RSchedule::constant(std::stod(parts[0]));
    throw std::runtime_error("bad r spec '" + spec + "'");
}

constexpr double kDefaultSigma = 0.5;

}  // namespace

std::string ExperimentConfig::serialize() const {
    std::ostringstream os;
    os.precision(17);
    os << "[experiment]\n";
    os << "network=" << network << "\n";
    os << "routes=" << routes << "\n";
    os << "engine=" << engine << "\n";
    os << "eta=" << eta << "\n";
    os << "r=" << r << "\n";
    os << "s0=" << s0 << "\n";
    os << "max_days=" << max_days << "\n";
    os << "gap_tol=" << gap_tol << "\n";
    if (!out_dir.empty()) os << "out_dir=" << out_dir << "\n";
    if (!seeds.empty()) {
        os << "seeds=";
        for (size_t i = 0; i < seeds.size(); ++i) os << (i ? "," : "") << seeds[i];
        os << "\n";
    }
    if (!classes.empty()) os << "classes=" << classes << "\n";
    return os.str();
}

ExperimentConfig ExperimentConfig::parse(const std::string& text) {
    ExperimentConfig cfg;
    std::istringstream is(text);
    std::string line;
    int lineno = 0;
    std::string section;
    while (std::getline(is, line)) {
        ++lineno;
        std::string s = trim(line);
        if (s.empty() || s[0] == '#') continue;
        if (s.front() == '[' && s.back() == ']') {
            section = s.substr(1, s.size() - 2);
            continue;
        }
        size_t eq = s.find('=');
        if (eq == std::string::npos)
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": expected key=value");
        std::string key = trim(s.substr(0, eq));
        std::string value = trim(s.substr(eq + 1));
        if (key == "network") cfg.network = value;
        else if (key == "routes") cfg.routes = value;
        else if (key == "engine") cfg.engine = value;
        else if (key == "eta") cfg.eta = value;
        else if (key == "r") cfg.r = value;
        else if (key == "s0") cfg.s0 = value;
        else if (key == "max_days") cfg.max_days = std::stoi(value);
        else if (key == "gap_tol") cfg.gap_tol = std::stod(value);
        else if (key == "out_dir") cfg.out_dir = value;
        else if (key == "classes") cfg.classes = value;
        else if (key == "seeds") {
            for (const std::string& tok : split(value, ','))
                cfg.seeds.push_back(std::stoull(trim(tok)));
        } else {
            throw std::runtime_error("config line " + std::to_string(lineno) +
                                     ": unknown key '" + key + "'");
        }
    }
    if (cfg.max_days < 1) throw std::runtime_error("max_days must be >= 1");
    if (cfg.gap_tol < 0) throw std::runtime_error("gap_tol must be >= 0");
    return cfg;
}

namespace {

std::pair<Network, RouteSet> load_network(const ExperimentConfig& cfg) {
    if (cfg.network.rfind("tntp:", 0) == 0) {
        auto parts = split(cfg.network, ':');
        if (parts.size() != 3) throw std::runtime_error("network=tntp:<net>:<trips> expected");
        auto slurp = [](const std::string& path) {
            std::ifstream f(path);
            if (!f) throw std::runtime_error("cannot open '" + path + "'");
            std::ostringstream os;
            os << f.rdbuf();
            return os.str();
        };
        Network net = parse_tntp(slurp(parts[1]), slurp(parts[2]));
        RoutePolicy policy;
        auto rparts = split(cfg.routes, ':');
        if (rparts[0] == "all-simple") {
            policy.kind = RoutePolicy::Kind::AllSimplePaths;
        } else if (rparts[0] == "k-shortest" && rparts.size() >= 2) {
            policy.kind = RoutePolicy::Kind::KShortest;
            policy.k = std::stoi(rparts[1]);
            if (rparts.size() >= 3 && rparts[2] == "we-costs")
                policy.cost_basis = link_costs(net, beckmann_oracle(net, 1e-4));
        } else {
            throw std::runtime_error("bad routes spec '" + cfg.routes + "'");
        }
        RouteSet rs = enumerate_routes(net, policy);
        return {std::move(net), std::move(rs)};
    }
    return builtin(cfg.network);
}

std::vector<double> make_s0(const std::string& spec, int n, std::uint64_t seed_override,
                            bool has_override) {
    auto parts = split(spec, ':');
    if (parts[0] == "zeros" && !has_override) return std::vector<double>(n, 0.0);
    double sigma = kDefaultSigma;
    std::uint64_t seed = 0;
    if (parts[0] == "normal") {
        if (parts.size() >= 2) seed = std::stoull(parts[1]);
        if (parts.size() >= 3) sigma = std::stod(parts[2]);
    } else if (parts[0] != "zeros") {
        throw std::runtime_error("bad s0 spec '" + spec + "'");
    }
    if (has_override) seed = seed_override;
    return normal_s0(n, seed, sigma);
}

RunSummary summarize(const std::string& label, const Trajectory& traj, const Incidence& inc) {
    RunSummary s;
    s.label = label;
    s.status = traj.status;
    s.days = traj.final_day;
    s.initial_gap = traj.days.front().gap;
    s.final_gap = traj.final_gap;
    const DayRecord& last = traj.days.back();
    s.entropy = last.entropy;
    s.used_routes = last.used_routes;
    return s;
}

const char* status_name(Termination t) {
    switch (t) {
        case Termination::Converged: return "converged";
        case Termination::Diverged: return "diverged";
        case Termination::MaxDays: return "max_days";
    }
    return "?";
}

}  // namespace

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers) {
    ExperimentResult result;
    auto [net, routes] = load_network(cfg);
    Incidence inc = make_incidence(net, routes);

    StopRule stop;
    stop.max_days = cfg.max_days;
    stop.gap_tol = cfg.gap_tol;

    namespace fs = std::filesystem;
    if (!cfg.out_dir.empty()) fs::create_directories(cfg.out_dir);

    auto write_outputs = [&](const std::string& label, const Trajectory& traj) {
        if (cfg.out_dir.empty()) return;
        std::ofstream csv(fs::path(cfg.out_dir) / (label + ".csv"));
        csv << traj.to_csv();
        std::ofstream js(fs::path(cfg.out_dir) / (label + ".json"));
        js << traj.to_json();
    };

    if (!cfg.classes.empty()) {
        std::vector<ClassSpec> classes;
        for (const std::string& tok : split(cfg.classes, ',')) {
            auto rv = split(tok, ':');
            if (rv.size() != 2) throw std::runtime_error("classes entries must be r:share");
            ClassSpec c;
            c.r = std::stod(rv[0]);
            c.share = std::stod(rv[1]);
            c.label = "class_r" + rv[0];
            classes.push_back(c);
        }
        MulticlassResult mc = run_multiclass(net, inc, classes, parse_eta(cfg.eta), stop);
        for (size_t i = 0; i < classes.size(); ++i) {
            result.runs.push_back(summarize(classes[i].label, mc.per_class[i], inc));
            write_outputs(classes[i].label, mc.per_class[i]);
        }
    } else {
        RunConfig rc;
        rc.engine = cfg.engine == "sa" ? RunConfig::Engine::Sa : RunConfig::Engine::CumLog;
        if (cfg.engine != "sa" && cfg.engine != "cumlog")
            throw std::runtime_error("engine must be cumlog or sa");
        rc.schedule = parse_eta(cfg.eta);
        rc.r_schedule = parse_r(cfg.r);

        struct Job {
            std::string label;
            std::vector<double> s0;
        };
        std::vector<Job> jobs;
        if (cfg.seeds.empty()) {
            jobs.push_back({"run", make_s0(cfg.s0, inc.num_routes, 0, false)});
        } else {
            for (std::uint64_t seed : cfg.seeds)
                jobs.push_back({"run_seed" + std::to_string(seed),
                                make_s0(cfg.s0, inc.num_routes, seed, true)});
        }
        workers = std::max(1, workers);
        std::vector<Trajectory> trajs(jobs.size());
        // bounded parallelism; results merged in seed order
        for (size_t base = 0; base < jobs.size(); base += workers) {
            size_t chunk = std::min(jobs.size() - base, static_cast<size_t>(workers));
            std::vector<std::future<Trajectory>> futs;
            for (size_t i = 0; i < chunk; ++i) {
                RunConfig rci = rc;
                rci.s0 = jobs[base + i].s0;
                futs.push_back(std::async(std::launch::async, [&net, &inc, rci, &stop]() {
                    return run(net, inc, rci, stop);
                }));
            }
            for (size_t i = 0; i < chunk; ++i) trajs[base + i] = futs[i].get();
        }
        for (size_t i = 0; i < jobs.size(); ++i) {
            result.runs.push_back(summarize(jobs[i].label, trajs[i], inc));
            write_outputs(jobs[i].label, trajs[i]);
        }
    }

    bool any_diverged = false;
    for (const RunSummary& s : result.runs) any_diverged |= s.status == Termination::Diverged;
    result.exit_code = any_diverged ? 2 : 0;

    if (!cfg.out_dir.empty()) {
        std::ofstream js(fs::path(cfg.out_dir) / "summary.json");
        js.precision(17);
        js << "[";
        for (size_t i = 0; i < result.runs.size(); ++i) {
            const RunSummary& s = result.runs[i];
            if (i) js << ",";
            js << "{\"label\":\"" << s.label << "\",\"status\":\"" << status_name(s.status)
               << "\",\"days\":" << s.days << ",\"initial_gap\":" << s.initial_gap
               << ",\"final_gap\":" << s.final_gap << ",\"entropy\":" << s.entropy
               << ",\"used_routes\":" << s.used_routes << "}";
        }
        js << "]";
    }
    return result;
}

namespace {

struct Preset {
    std::string description;
    // presets that need several differently-parameterized runs expand to a
    // list of configs executed in order
    std::vector<ExperimentConfig> configs;
};

ExperimentConfig base_3n4l(const std::string& eta, const std::string& r, int days,
                           double tol) {
    ExperimentConfig c;
    c.network = "3n4l";
    c.engine = "cumlog";
    c.eta = eta;
    c.r = r;
    c.max_days = days;
    c.gap_tol = tol;
    return c;
}

std::map<std::string, Preset> make_presets() {
    std::map<std::string, Preset> m;
    {
        Preset p;
        p.description =
            "three-parallel network, cumulative dynamics, r=0.25, eta=1, 30 days; "
            "converges toward [2/3, 1/3, 0]";
        ExperimentConfig c;
        c.network = "three-parallel";
        c.eta = "constant:1";
        c.r = "constant:0.25";
        c.max_days = 30;
        c.gap_tol = 0.0;
        p.configs = {c};
        m["fig2"] = p;
    }
    {
        Preset p;
        p.description =
            "3n4l step-size conditions: harmonic eta with r in {10,20,40}; constant eta=1 "
            "with r in {0.25,0.5,1,2.5} (the last diverges)";
        for (double r : {10.0, 20.0, 40.0})
            p.configs.push_back(
                base_3n4l("harmonic", "constant:" + std::to_string(r), 120, 1e-9));
        for (double r : {0.25, 0.5, 1.0, 2.5})
            p.configs.push_back(
                base_3n4l("constant:1", "constant:" + std::to_string(r), 120, 1e-9));
        m["fig5"] = p;
    }
    {
        Preset p;
        p.description =
            "3n4l schedule sweep: eta^t=(t+1)^alpha for alpha in {-0.5,-0.25,0,0.25}, r=1";
        for (double a : {-0.5, -0.25, 0.0, 0.25})
            p.configs.push_back(base_3n4l("power:" + std::to_string(a), "constant:1", 500, 1e-6));
        m["fig6-schedules"] = p;
    }
    {
        Preset p;
        p.description =
            "successive-average variants A-E on 3n4l: A eta=1/(t+1), r=t+1 (converges fast); "
            "B-E perturb the exponents and stall for 1e5 days";
        auto sa = [](double eexp, double rexp, int days) {
            ExperimentConfig c;
            c.network = "3n4l";
            c.engine = "sa";
            c.eta = "power:" + std::to_string(-eexp);
            c.r = "power:" + std::to_string(rexp);
            c.max_days = days;
            c.gap_tol = 1e-9;
            return c;
        };
        p.configs = {sa(1.0, 1.0, 100000), sa(0.99, 1.0, 100000), sa(1.01, 1.0, 100000),
                     sa(0.99, 0.99, 100000), sa(1.01, 1.01, 100000)};
        m["fig7-models"] = p;
    }
    {
        Preset p;
        p.description =
            "3n4l with four traveler classes (r = 0.01, 0.1, 1, 10; equal demand shares), "
            "eta=1, 1000 days; aggregate flows reach equilibrium";
        ExperimentConfig c;
        c.network = "3n4l";
        c.eta = "constant:1";
        c.classes = "0.01:0.25,0.1:0.25,1:0.25,10:0.25";
        c.max_days = 1000;
        c.gap_tol = 0.0;
        p.configs = {c};
        m["fig8-classes"] = p;
    }
    {
        Preset p;
        p.description =
            "2000 random normal initializations on 3n4l (r=1, eta=1, gap tolerance 1e-6); "
            "reports the entropy spread of the reached equilibria";
        ExperimentConfig c;
        c.network = "3n4l";
        c.eta = "constant:1";
        c.r = "constant:1";
        c.s0 = "normal:0";
        c.max_days = 100000;
        c.gap_tol = 1e-6;
        c.seeds.resize(2000);
        for (int i = 0; i < 2000; ++i) c.seeds[i] = i;
        p.configs = {c};
        m["entropy-sweep"] = p;
    }
    {
        Preset p;
        p.description =
            "Sioux Falls (bundled fixture): 3-shortest routes per OD under congested "
            "equilibrium costs, r=2.5, eta=1, 1000 days, zero and 5 random initializations; "
            "reports used-route counts";
        ExperimentConfig c;
        c.network = "sioux-falls";
        c.eta = "constant:1";
        c.r = "constant:2.5";
        c.max_days = 1000;
        c.gap_tol = 0.0;
        c.s0 = "zeros";
        p.configs = {c};
        ExperimentConfig cs = c;
        cs.s0 = "normal:0";
        cs.seeds = {0, 1, 2, 3, 4};
        p.configs.push_back(cs);
        m["sioux-routes"] = p;
    }
    return m;
}

const std::map<std::string, Preset>& presets() {
    static const std::map<std::string, Preset> m = make_presets();
    return m;
}

}  // namespace

std::vector<std::string> list_presets() {
    std::vector<std::string> names;
    for (const auto& [name, p] : presets()) names.push_back(name);
    return names;
}

std::string describe_preset(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) throw std::runtime_error("unknown preset '" + name + "'");
    return it->second.description;
}

ExperimentConfig preset_config(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) throw std::runtime_error("unknown preset '" + name + "'");
    return it->second.configs.front();
}

std::vector<ExperimentConfig> preset_configs(const std::string& name) {
    auto it = presets().find(name);
    if (it == presets().end()) throw std::runtime_error("unknown preset '" + name + "'");
    return it->second.configs;
}

}  // namespace cumlog
