// Command-line front end: run experiment configs, replay presets, score a
// link-flow file against a network, or solve the convex benchmark directly.
#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <sstream>

#include "cumlog/cost.hpp"
#include "cumlog/equilibrium.hpp"
#include "cumlog/harness.hpp"
#include "cumlog/network.hpp"

namespace {

std::string slurp(const std::string& path) {
    std::ifstream f(path);
    if (!f) throw std::runtime_error("cannot open '" + path + "'");
    std::ostringstream os;
    os << f.rdbuf();
    return os.str();
}

std::string default_out_dir() {
    const char* env = std::getenv("CUMLOG_OUT_DIR");
    return env ? env : "";
}

const char* status_name(cumlog::Termination t) {
    switch (t) {
        case cumlog::Termination::Converged: return "converged";
        case cumlog::Termination::Diverged: return "diverged";
        case cumlog::Termination::MaxDays: return "max_days";
    }
    return "?";
}

void print_summaries(const cumlog::ExperimentResult& result) {
    for (const cumlog::RunSummary& s : result.runs) {
        std::cout << s.label << ": " << status_name(s.status) << " after " << s.days
                  << " days, gap " << s.initial_gap << " -> " << s.final_gap << ", entropy "
                  << s.entropy << ", used routes " << s.used_routes << "\n";
    }
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"day-to-day route choice dynamics"};
    app.require_subcommand(1);

    std::string out_dir = default_out_dir();
    int workers = 1;

    // run <config>
    auto* run_cmd = app.add_subcommand("run", "execute an experiment config file");
    std::string config_path;
    run_cmd->add_option("config", config_path, "key=value config file")->required();
    run_cmd->add_option("--out", out_dir, "output directory (default $CUMLOG_OUT_DIR)");
    run_cmd->add_option("--workers", workers, "parallel runs for seeded repeats");

    // preset <name>
    auto* preset_cmd = app.add_subcommand("preset", "run a named built-in experiment");
    std::string preset_name;
    bool list = false, describe = false;
    long long seed_override = -1;
    preset_cmd->add_option("name", preset_name, "preset name");
    preset_cmd->add_flag("--list", list, "list available presets");
    preset_cmd->add_flag("--describe", describe, "print what the preset does");
    preset_cmd->add_option("--seed", seed_override, "replace the seed list with one seed");
    preset_cmd->add_option("--out", out_dir, "output directory (default $CUMLOG_OUT_DIR)");
    preset_cmd->add_option("--workers", workers, "parallel runs for seeded repeats");

    // gap <net> <trips> <flows.csv>
    auto* gap_cmd = app.add_subcommand("gap", "equilibrium gap of a link-flow file");
    std::string net_path, trips_path, flows_path;
    gap_cmd->add_option("net", net_path, "network file")->required();
    gap_cmd->add_option("trips", trips_path, "trip table file")->required();
    gap_cmd->add_option("flows", flows_path, "CSV with link_id,flow rows")->required();

    // oracle <network>
    auto* oracle_cmd = app.add_subcommand("oracle", "solve the convex benchmark problem");
    std::string oracle_network;
    double oracle_tol = 1e-6;
    std::string oracle_out;
    oracle_cmd->add_option("network", oracle_network, "builtin name or tntp:<net>:<trips>")
        ->required();
    oracle_cmd->add_option("--tol", oracle_tol, "relative gap tolerance");
    oracle_cmd->add_option("--out", oracle_out, "write link flows as CSV to this file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (run_cmd->parsed()) {
            cumlog::ExperimentConfig cfg = cumlog::ExperimentConfig::parse(slurp(config_path));
            if (!out_dir.empty()) cfg.out_dir = out_dir;
            cumlog::ExperimentResult result = cumlog::run_experiment(cfg, workers);
            print_summaries(result);
            return result.exit_code;
        }

        if (preset_cmd->parsed()) {
            if (list) {
                for (const std::string& name : cumlog::list_presets()) std::cout << name << "\n";
                return 0;
            }
            if (preset_name.empty()) {
                std::cerr << "preset name required (or --list)\n";
                return 1;
            }
            if (describe) {
                std::cout << cumlog::describe_preset(preset_name) << "\n";
                return 0;
            }
            int exit_code = 0;
            int part = 0;
            auto configs = cumlog::preset_configs(preset_name);
            for (cumlog::ExperimentConfig cfg : configs) {
                if (seed_override >= 0 && !cfg.seeds.empty())
                    cfg.seeds = {static_cast<std::uint64_t>(seed_override)};
                if (!out_dir.empty()) {
                    cfg.out_dir = out_dir;
                    if (configs.size() > 1)
                        cfg.out_dir += "/part" + std::to_string(part);
                }
                std::cout << "# " << preset_name << " [" << part << "] engine=" << cfg.engine
                          << " eta=" << cfg.eta << " r=" << cfg.r
                          << (cfg.classes.empty() ? "" : " classes=" + cfg.classes) << "\n";
                cumlog::ExperimentResult result = cumlog::run_experiment(cfg, workers);
                print_summaries(result);
                exit_code = std::max(exit_code, result.exit_code);
                ++part;
            }
            return exit_code;
        }

        if (gap_cmd->parsed()) {
            cumlog::Network net = cumlog::parse_tntp(slurp(net_path), slurp(trips_path));
            std::vector<double> x(net.links.size(), 0.0);
            std::ifstream f(flows_path);
            if (!f) throw std::runtime_error("cannot open '" + flows_path + "'");
            std::string line;
            while (std::getline(f, line)) {
                if (line.empty() || !std::isdigit(static_cast<unsigned char>(line[0]))) continue;
                std::istringstream is(line);
                int id;
                char comma;
                double flow;
                if (!(is >> id >> comma >> flow) || id < 0 ||
                    id >= static_cast<int>(x.size()))
                    throw std::runtime_error("bad flow row: " + line);
                x[id] = flow;
            }
            cumlog::GapReport rep = cumlog::gap_report(net, x);
            std::cout << rep.to_json() << "\n";
            return 0;
        }

        if (oracle_cmd->parsed()) {
            cumlog::Network net = [&]() {
                if (oracle_network.rfind("tntp:", 0) == 0) {
                    std::istringstream is(oracle_network.substr(5));
                    std::string np, tp;
                    std::getline(is, np, ':');
                    std::getline(is, tp, ':');
                    return cumlog::parse_tntp(slurp(np), slurp(tp));
                }
                return cumlog::builtin(oracle_network).first;
            }();
            std::vector<double> x = cumlog::beckmann_oracle(net, oracle_tol);
            cumlog::GapReport rep = cumlog::gap_report(net, x);
            std::cout << rep.to_json() << "\n";
            if (!oracle_out.empty()) {
                std::ofstream out(oracle_out);
                out << cumlog::oracle_flows_to_csv(net, x);
            }
            return 0;
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 1;
}
