#include "mecsim/experiment.hpp"

#include "mecsim/errors.hpp"
#include "mecsim/policy_io.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <mutex>
#include <thread>

namespace mecsim {

namespace fs = std::filesystem;

namespace {

std::string num(double v) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.10g", v);
    return buf;
}

std::string cell_name(AgentKind agent, int miots, std::uint64_t seed) {
    return to_string(agent) + "_I" + std::to_string(miots) + "_seed" + std::to_string(seed);
}

void write_text(const fs::path& path, const std::string& text) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw ExperimentError("cannot write '" + path.string() + "'");
    os << text;
}

const char* kMetricHeader =
    "agent,miots,seed,phase,episode,mean_time_s,mean_energy_j,mean_cost,mean_task_time_s,"
    "mean_task_energy_j,norm_time,norm_energy,time_ratio,energy_ratio,final_vt_mean,final_vt_max,"
    "final_ve_mean,final_ve_max,platform_energy_j,penalty_sum,tasks,deferred,aborted\n";

std::string metric_row(const MetricRecord& r) {
    const auto& m = r.metrics;
    std::string s = to_string(r.agent) + "," + std::to_string(r.miots) + "," + std::to_string(r.seed) + "," +
                    (r.training ? "train" : "eval") + "," + std::to_string(m.episode);
    for (double v : {m.mean_slot_time_s, m.mean_slot_energy_j, m.mean_cost, m.mean_task_time_s,
                     m.mean_task_energy_j, m.norm_time, m.norm_energy, m.time_ratio, m.energy_ratio,
                     m.final_vt_mean, m.final_vt_max, m.final_ve_mean, m.final_ve_max, m.platform_energy_j,
                     m.penalty_sum}) {
        s += "," + num(v);
    }
    s += "," + std::to_string(m.tasks) + "," + std::to_string(m.deferred) + "," + (m.aborted ? "1" : "0") + "\n";
    return s;
}

double mean_of(const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    const double m = mean_of(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
}

} // namespace

std::vector<MetricRecord> CellResult::records() const {
    std::vector<MetricRecord> out;
    for (const auto* series : {&train, &eval}) {
        for (const auto& m : *series) out.push_back({agent, miots, seed, series == &train, m});
    }
    return out;
}

std::vector<SummaryRow> summarize(const std::vector<MetricRecord>& records) {
    struct SeedAcc {
        double time = 0, energy = 0, cost = 0, task_time = 0, task_energy = 0, tr = 0, er = 0;
        int n = 0;
    };
    // (agent, miots) in first-seen order, then seeds in first-seen order.
    std::vector<std::pair<AgentKind, int>> groups;
    std::map<std::pair<int, int>, std::vector<std::pair<std::uint64_t, SeedAcc>>> acc;
    for (const auto& r : records) {
        if (r.training) continue;
        const auto key = std::make_pair(static_cast<int>(r.agent), r.miots);
        auto& seeds = acc[key];
        if (seeds.empty()) groups.emplace_back(r.agent, r.miots);
        auto it = std::find_if(seeds.begin(), seeds.end(), [&](const auto& p) { return p.first == r.seed; });
        if (it == seeds.end()) {
            seeds.emplace_back(r.seed, SeedAcc{});
            it = std::prev(seeds.end());
        }
        auto& a = it->second;
        const auto& m = r.metrics;
        a.time += m.mean_slot_time_s;
        a.energy += m.mean_slot_energy_j;
        a.cost += m.mean_cost;
        a.task_time += m.mean_task_time_s;
        a.task_energy += m.mean_task_energy_j;
        a.tr += m.time_ratio;
        a.er += m.energy_ratio;
        ++a.n;
    }
    std::vector<SummaryRow> rows;
    for (const auto& [agent, miots] : groups) {
        const auto& seeds = acc[{static_cast<int>(agent), miots}];
        std::vector<double> t, e, c, tt, te, tr, er;
        for (const auto& [seed, a] : seeds) {
            const double n = a.n;
            t.push_back(a.time / n);
            e.push_back(a.energy / n);
            c.push_back(a.cost / n);
            tt.push_back(a.task_time / n);
            te.push_back(a.task_energy / n);
            tr.push_back(a.tr / n);
            er.push_back(a.er / n);
        }
        SummaryRow row;
        row.agent = agent;
        row.miots = miots;
        row.seeds = static_cast<int>(seeds.size());
        row.time_mean = mean_of(t);
        row.time_std = std_of(t);
        row.energy_mean = mean_of(e);
        row.energy_std = std_of(e);
        row.cost_mean = mean_of(c);
        row.cost_std = std_of(c);
        row.task_time_mean = mean_of(tt);
        row.task_energy_mean = mean_of(te);
        row.time_ratio_mean = mean_of(tr);
        row.energy_ratio_mean = mean_of(er);
        rows.push_back(row);
    }
    return rows;
}

std::string metrics_csv(const std::vector<MetricRecord>& records) {
    std::string out = kMetricHeader;
    for (const auto& r : records) out += metric_row(r);
    return out;
}

std::string summary_csv(const std::vector<SummaryRow>& rows) {
    std::string out =
        "agent,miots,seeds,time_mean,time_std,energy_mean,energy_std,cost_mean,cost_std,task_time_mean,"
        "task_energy_mean,time_ratio_mean,energy_ratio_mean\n";
    for (const auto& r : rows) {
        out += to_string(r.agent) + "," + std::to_string(r.miots) + "," + std::to_string(r.seeds);
        for (double v : {r.time_mean, r.time_std, r.energy_mean, r.energy_std, r.cost_mean, r.cost_std,
                         r.task_time_mean, r.task_energy_mean, r.time_ratio_mean, r.energy_ratio_mean}) {
            out += "," + num(v);
        }
        out += "\n";
    }
    return out;
}

Environment make_environment(const ExperimentConfig& cfg, int miots, std::uint64_t seed) {
    ScenarioConfig sc = cfg.scenario;
    sc.miots = miots;
    sc.seed = stream_seed(seed, Stream::evaluation);
    Rng rng(stream_seed(seed, Stream::scenario));
    WorldState world = generate_scenario(sc, rng);
    return Environment(sc, cfg.channel, cfg.bounds, std::move(world));
}

CellResult run_cell(const ExperimentConfig& cfg, AgentKind agent, int miots, std::uint64_t seed) {
    const auto start = std::chrono::steady_clock::now();
    CellResult cell;
    cell.agent = agent;
    cell.miots = miots;
    cell.seed = seed;
    const Environment env = make_environment(cfg, miots, seed);
    if (is_learning(agent)) {
        TrainResult tr = train_vqq(env, agent, cfg.agent, seed);
        tr.policy.config_hash = config_hash(cfg);
        auto ctl = make_policy_controller(tr.policy, cfg.agent, stream_seed(seed, Stream::exploration));
        cell.eval = evaluate(env, *ctl, cfg.eval_episodes, seed);
        normalize(cell.eval, tr.episodes.front());
        cell.train = std::move(tr.episodes);
        cell.policy = std::move(tr.policy);
    } else {
        auto ctl = make_baseline_controller(agent, stream_seed(seed, Stream::baseline));
        cell.eval = evaluate(env, *ctl, cfg.eval_episodes, seed);
        normalize(cell.eval, cell.eval.front());
    }
    cell.wall_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    return cell;
}

int default_thread_count() {
    if (const char* env = std::getenv("MEC_SIM_THREADS")) {
        const int n = std::atoi(env);
        if (n > 0) return n;
    }
    const unsigned hw = std::thread::hardware_concurrency();
    return hw == 0 ? 1 : static_cast<int>(hw);
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, bool write_files, int threads) {
    struct Job {
        AgentKind agent;
        int miots;
        std::uint64_t seed;
    };
    std::vector<Job> jobs;
    for (std::uint64_t seed : cfg.seeds) {
        for (AgentKind agent : cfg.agents) {
            for (int miots : cfg.miot_counts()) jobs.push_back({agent, miots, seed});
        }
    }

    const fs::path root(cfg.output_dir);
    if (write_files) {
        fs::create_directories(root);
        write_text(root / "config.resolved", emit_config(cfg));
    }

    ExperimentResult result;
    result.cells.resize(jobs.size());
    std::atomic<std::size_t> next{0};
    const auto work = [&] {
        for (std::size_t k = next++; k < jobs.size(); k = next++) {
            const Job& j = jobs[k];
            CellResult& cell = result.cells[k];
            try {
                cell = run_cell(cfg, j.agent, j.miots, j.seed);
                if (write_files) {
                    const fs::path dir = root / cell_name(j.agent, j.miots, j.seed);
                    fs::create_directories(dir);
                    write_text(dir / "series.csv", metrics_csv(cell.records()));
                    if (cell.policy) save_policy_file(*cell.policy, (dir / "policy.txt").string());
                }
            } catch (const std::exception& e) {
                cell.agent = j.agent;
                cell.miots = j.miots;
                cell.seed = j.seed;
                cell.error = e.what();
            }
        }
    };
    int n = threads > 0 ? threads : default_thread_count();
    n = std::max(1, std::min<int>(n, static_cast<int>(jobs.size())));
    if (n == 1) {
        work();
    } else {
        std::vector<std::thread> pool;
        for (int t = 0; t < n; ++t) pool.emplace_back(work);
        for (auto& t : pool) t.join();
    }

    std::vector<MetricRecord> records;
    std::string failures;
    std::string timings = "agent,miots,seed,wall_s\n";
    for (const auto& cell : result.cells) {
        if (!cell.error.empty()) {
            failures += "\n  " + cell_name(cell.agent, cell.miots, cell.seed) + ": " + cell.error;
            continue;
        }
        const auto r = cell.records();
        records.insert(records.end(), r.begin(), r.end());
        timings += to_string(cell.agent) + "," + std::to_string(cell.miots) + "," + std::to_string(cell.seed) +
                   "," + num(cell.wall_s) + "\n";
    }
    result.summary = summarize(records);
    if (write_files) {
        write_text(root / "metrics.csv", metrics_csv(records));
        write_text(root / "summary.csv", summary_csv(result.summary));
        write_text(root / "timings.csv", timings);
    }
    if (!failures.empty()) throw ExperimentError("experiment cells failed:" + failures);
    return result;
}

} // namespace mecsim
