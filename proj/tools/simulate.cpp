// Command-line driver: runs the configured agents over a MIoT sweep and seeds.

#include "mecsim/config.hpp"
#include "mecsim/errors.hpp"
#include "mecsim/experiment.hpp"

#include "CLI11.hpp"

#include <iostream>

int main(int argc, char** argv) {
    CLI::App app{"Maritime MEC offloading simulator"};
    std::string config_path;
    std::string agent;
    std::string sweep;
    std::string seeds;
    std::string out;
    int threads = 0;
    bool print_config = false;
    app.add_option("--config", config_path, "Config file (key = value lines)")->check(CLI::ExistingFile);
    app.add_option("--agent", agent, "Run a single agent: vqq, tabular, greedy or random");
    app.add_option("--sweep-miot", sweep, "Comma-separated MIoT counts, e.g. 10,20,30");
    app.add_option("--seeds", seeds, "Seed list or range, e.g. 1..10");
    app.add_option("--out", out, "Output directory");
    app.add_option("--threads", threads, "Worker threads (default: MEC_SIM_THREADS or all cores)");
    app.add_flag("--print-config", print_config, "Print the resolved config and exit");
    CLI11_PARSE(app, argc, argv);

    try {
        mecsim::ExperimentConfig cfg = config_path.empty() ? mecsim::parse_config("")
                                                           : mecsim::load_config(config_path);
        if (!agent.empty()) cfg.agents = {mecsim::parse_agent_kind(agent)};
        if (!sweep.empty()) cfg.sweep = mecsim::parse_int_list(sweep);
        if (!seeds.empty()) cfg.seeds = mecsim::parse_seed_list(seeds);
        if (!out.empty()) cfg.output_dir = out;
        cfg.resolve();
        if (print_config) {
            std::cout << mecsim::emit_config(cfg);
            return 0;
        }
        const auto result = mecsim::run_experiment(cfg, true, threads);
        std::cout << mecsim::summary_csv(result.summary);
        std::cerr << "wrote " << cfg.output_dir << "\n";
    } catch (const mecsim::ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
