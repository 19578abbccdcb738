// Acceptance checks. Prints one PASS/FAIL line per criterion and exits
// nonzero if any fails. Pass criterion numbers as arguments to run a subset.

#include "mecsim/agents.hpp"
#include "mecsim/channel.hpp"
#include "mecsim/compute_energy.hpp"
#include "mecsim/config.hpp"
#include "mecsim/experiment.hpp"
#include "mecsim/lyapunov.hpp"
#include "mecsim/mlp.hpp"
#include "mecsim/policy_io.hpp"
#include "mecsim/training.hpp"
#include "oracle.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace mecsim;
namespace fs = std::filesystem;

namespace {

struct Verdict {
    bool pass = false;
    std::string detail;
};

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double rel_err(double got, double want) {
    if (got == want) return 0.0;
    return std::abs(got - want) / std::max(std::abs(want), 1e-300);
}

std::string fmt(const char* f, double a) {
    char buf[64];
    std::snprintf(buf, sizeof buf, f, a);
    return buf;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// Tracks the worst relative error per formula.
class ErrorTable {
public:
    void add(const std::string& name, double got, double want, double tol) {
        auto& e = worst_[name];
        e.tol = tol;
        e.err = std::max(e.err, rel_err(got, want));
        if (!std::isfinite(got) || !std::isfinite(want)) e.err = INFINITY;
    }
    bool ok(std::string& detail) const {
        bool all = true;
        for (const auto& [name, e] : worst_) {
            if (!(e.err <= e.tol)) {
                all = false;
                detail += " " + name + fmt("=%.2e", e.err);
            }
        }
        return all;
    }
    std::size_t size() const { return worst_.size(); }

private:
    struct Entry {
        double err = 0.0, tol = 0.0;
    };
    std::map<std::string, Entry> worst_;
};

oracle::Net to_nested(const MlpWeights& w) {
    oracle::Net n;
    for (const auto& l : w.layers) {
        std::vector<std::vector<double>> rows(l.out, std::vector<double>(l.in));
        for (std::size_t r = 0; r < l.out; ++r) {
            for (std::size_t c = 0; c < l.in; ++c) rows[r][c] = l.w[r * l.in + c];
        }
        n.W.push_back(rows);
        n.B.push_back(l.b);
    }
    return n;
}

// ---------------------------------------------------------------------------

Verdict formula_oracles() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(20240601);
    ErrorTable table;
    const double exact = 1e-12, composed = 1e-9;
    for (int n = 0; n < 1000; ++n) {
        ChannelParams p;
        p.zeta_los_db = rng.uniform(0.5, 5.0);
        p.zeta_nlos_db = rng.uniform(10.0, 40.0);
        p.alpha = rng.uniform(3.0, 12.0);
        p.beta = rng.uniform(0.1, 0.6);
        p.carrier_hz = rng.uniform(1e5, 2e9);
        p.noise_power_w = dbm_to_watts(rng.uniform(-130.0, -90.0));
        p.bandwidth_hz = rng.uniform(1e5, 2e7);
        oracle::Env env{p.zeta_los_db, p.zeta_nlos_db, p.alpha, p.beta, p.carrier_hz, p.light_speed_mps};

        const Position3D a{rng.uniform(0, 5000), rng.uniform(0, 5000), 0.0};
        const Position3D b{rng.uniform(0, 5000), rng.uniform(0, 5000), rng.uniform(10, 300)};
        const double horiz = std::hypot(a.x - b.x, a.y - b.y);
        const double dist = std::hypot(horiz, b.h - a.h);
        const double pl = oracle::path_loss(b.h - a.h, horiz, dist, env);
        table.add("path_loss", path_loss_db(a, b, p), pl, exact);
        const double power = rng.uniform(0.1, 20.0);
        table.add("rate", link_rate(power, a, b, p), oracle::rate(p.bandwidth_hz, power, pl, p.noise_power_w),
                  composed);

        Task task;
        task.input_bits = rng.uniform(1e5, 5e6);
        task.cycles = rng.uniform(1e5, 5e6);
        Uav u;
        u.cpu_hz = rng.uniform(1e5, 1e8);
        u.max_speed_mps = rng.uniform(1.0, 30.0);
        u.mass_kg = rng.uniform(0.5, 10.0);
        u.prop_radius_m = rng.uniform(0.05, 0.6);
        u.prop_count = 1 + static_cast<int>(rng.index(8));
        u.energy_per_cycle_j = rng.uniform(1e-8, 1e-5);
        u.tx_power_w = rng.uniform(0.1, 20.0);
        Vessel v;
        v.cpu_hz = rng.uniform(1e8, 1e10);
        v.energy_per_cycle_j = rng.uniform(1e-8, 1e-5);
        const double r_up = rng.uniform(1e5, 5e7), r_relay = rng.uniform(1e5, 5e7), queue = rng.uniform(0, 20);
        table.add("uav_time", uav_exec_time(task, u, r_up, queue).total_s,
                  oracle::uav_time(task.cycles, u.cpu_hz, task.input_bits, r_up, queue), exact);
        table.add("vessel_time", vessel_exec_time(task, v, r_up, r_relay, queue).total_s,
                  oracle::vessel_time(task.cycles, v.cpu_hz, task.input_bits, r_up, r_relay, queue), exact);

        const double gravity = rng.uniform(9.0, 10.0), rho = rng.uniform(1.0, 1.3);
        const double hover = oracle::hover_power(gravity, rho, u.mass_kg, u.prop_radius_m, u.prop_count);
        table.add("hover_power", hover_power(u, gravity, rho), hover, exact);
        u.max_power_w = hover + rng.uniform(1.0, 200.0);
        const double speed = rng.uniform(0.0, u.max_speed_mps);
        table.add("trajectory_power", trajectory_power(u, speed, hover),
                  oracle::trajectory_power(speed, u.max_speed_mps, u.max_power_w, hover), exact);
        table.add("uav_compute_energy", compute_energy(task, u.energy_per_cycle_j),
                  oracle::compute_energy(task.cycles, u.energy_per_cycle_j), exact);
        table.add("vessel_compute_energy", compute_energy(task, v.energy_per_cycle_j),
                  oracle::compute_energy(task.cycles, v.energy_per_cycle_j), exact);

        const double slot = rng.uniform(0.5, 2.0);
        const double disp = rng.uniform(0.0, u.max_speed_mps * slot);
        const double vel = disp / slot;
        const bool relayed = rng.uniform01() < 0.5;
        const auto relay = relayed ? std::optional<RelayLeg>(RelayLeg{v.energy_per_cycle_j, r_relay}) : std::nullopt;
        table.add("task_energy", total_task_energy(task, u, disp, slot, hover, relay).total_j,
                  oracle::task_energy(relayed, oracle::trajectory_power(vel, u.max_speed_mps, u.max_power_w, hover),
                                      disp, vel, hover, slot, task.cycles, u.energy_per_cycle_j,
                                      v.energy_per_cycle_j, u.tx_power_w, task.input_bits, r_relay),
                  composed);

        // Virtual queues, ratios and the drift term.
        ConstraintBounds bounds;
        bounds.phi_time = rng.uniform(0.5, 1.0);
        bounds.phi_energy = rng.uniform(0.5, 1.0);
        bounds.weight_time = rng.uniform(0.0, 3.0);
        bounds.weight_energy = rng.uniform(0.0, 3.0);
        RunningAverages avg(1);
        std::vector<double> ts, es;
        const int hist = 1 + static_cast<int>(rng.index(20));
        for (int h = 0; h < hist; ++h) {
            ts.push_back(rng.uniform(0.01, 10.0));
            es.push_back(rng.uniform(1.0, 300.0));
            avg = update_averages(avg, 0, ts.back(), es.back());
        }
        double tsum = 0.0, esum = 0.0;
        for (int h = 0; h < hist; ++h) {
            tsum += ts[h];
            esum += es[h];
        }
        const double t_obs = rng.uniform(0.01, 10.0), e_obs = rng.uniform(1.0, 300.0);
        const Ratios ratios = observation_ratios(avg, 0, t_obs, e_obs);
        const double rt = t_obs / (tsum / hist), re = e_obs / (esum / hist);
        table.add("time_ratio", ratios.time, rt, composed);
        table.add("energy_ratio", ratios.energy, re, composed);
        VirtualQueues q(1);
        q.v_time[0] = rng.uniform(0, 5);
        q.v_energy[0] = rng.uniform(0, 5);
        const VirtualQueues nq = update_queues(q, 0, rt, re, bounds);
        table.add("queue_time", nq.v_time[0], oracle::queue_next(q.v_time[0], rt, bounds.phi_time), exact);
        table.add("queue_energy", nq.v_energy[0], oracle::queue_next(q.v_energy[0], re, bounds.phi_energy), exact);
        table.add("drift_penalty", drift_penalty(q, 0, rt, re, bounds),
                  oracle::drift(q.v_time[0], rt, bounds.phi_time, q.v_energy[0], re, bounds.phi_energy,
                                bounds.weight_time, bounds.weight_energy),
                  exact);

        QTable qt(3);
        const double q0 = rng.uniform(-5, 5), q1 = rng.uniform(-5, 5), q2 = rng.uniform(-5, 5);
        qt.set(0, 1, q0);
        qt.set(1, 0, q1);
        qt.set(1, 2, q2);
        const double lr = rng.uniform(0.01, 1.0), rew = rng.uniform(-3, 3), disc = rng.uniform(0, 0.99);
        q_update(qt, 0, 1, rew, 1, std::vector<std::size_t>{0, 2}, lr, disc);
        table.add("q_update", qt.get(0, 1), oracle::q_next(q0, lr, rew, disc, std::max(q1, q2)), exact);

        const std::vector<int> hidden{1 + static_cast<int>(rng.index(16)), 1 + static_cast<int>(rng.index(16))};
        const std::size_t in = 1 + rng.index(12);
        const MlpWeights w = MlpWeights::random(in, hidden, rng);
        std::vector<double> x(in);
        for (auto& xi : x) xi = rng.uniform(-1, 1);
        const double target = rng.uniform(-3, 3);
        table.add("td_loss", q_loss_and_grad(x, target, w).loss,
                  oracle::td_loss(oracle::forward(to_nested(w), x), target), composed);
    }
    std::string bad;
    const bool ok = table.ok(bad);
    const double secs = seconds_since(t0);
    Verdict v;
    v.pass = ok && secs < 10.0;
    v.detail = std::to_string(table.size()) + " formulas x 1000 inputs" + (ok ? "" : ", worst:" + bad) +
               fmt(", %.2fs", secs);
    return v;
}

// ---------------------------------------------------------------------------

struct InvariantCounts {
    long steps = 0;
    long violations = 0;
    std::string first;
};

void check_step(const Environment& env, const StepOutcome& out, InvariantCounts& c) {
    ++c.steps;
    auto fail = [&](const std::string& what) {
        if (c.violations++ == 0) c.first = what;
    };
    if (out.violations.any()) fail("environment flagged: " + out.violations.detail);
    const auto& w = env.world();
    const auto& sc = env.scenario();
    // One destination per placed task, each task at most once.
    std::set<std::uint64_t> seen;
    std::map<std::size_t, std::set<std::size_t>> vessel_links;
    for (const auto& r : out.records) {
        if (!seen.insert(r.task.id).second) fail("task placed twice");
        if (r.placement.uav >= w.uavs.size()) fail("placement uav out of range");
        if (r.placement.vessel) {
            if (*r.placement.vessel >= w.vessels.size()) fail("placement vessel out of range");
            vessel_links[*r.placement.vessel].insert(r.placement.uav);
        }
    }
    for (const auto& [k, uavs] : vessel_links) {
        if (static_cast<int>(uavs.size()) > w.vessels[k].antenna_cap) fail("antenna cap exceeded");
    }
    for (const auto& u : w.uavs) {
        if (u.storage_used_bits < -1e-6 || u.storage_used_bits > u.storage_cap_bits + 1e-6) fail("storage bound");
    }
    for (double d : out.uav_displacement) {
        if (d > sc.uav.max_speed_mps * sc.slot_len_s * (1.0 + 1e-12)) fail("speed bound");
    }
    const auto& q = env.queues();
    for (std::size_t i = 0; i < q.v_time.size(); ++i) {
        if (!(q.v_time[i] >= 0.0) || !(q.v_energy[i] >= 0.0)) fail("negative virtual queue");
    }
    const std::string audit = env.audit();
    if (!audit.empty()) fail("audit: " + audit);
    for (double p : out.penalty) {
        if (!std::isfinite(p)) fail("non-finite penalty");
    }
}

Verdict constraint_invariants() {
    const auto t0 = std::chrono::steady_clock::now();
    Rng rng(777);
    InvariantCounts counts;
    const AgentKind kinds[] = {AgentKind::vqq, AgentKind::tabular, AgentKind::greedy, AgentKind::random};
    int scenario_no = 0;
    long placed = 0, deferred = 0;
    while (counts.steps < 10000) {
        ScenarioConfig sc;
        sc.miots = 1 + static_cast<int>(rng.index(30));
        sc.uavs = 1 + static_cast<int>(rng.index(10));
        sc.vessels = 1 + static_cast<int>(rng.index(3));
        sc.horizon = 50;
        sc.arrival_prob = rng.uniform(0.3, 1.0);
        // Tight storage and antennas so the masks actually bind.
        sc.uav.storage_cap_bits = rng.uniform(3e6, 20e6);
        sc.vessel.antenna_cap = 1 + static_cast<int>(rng.index(5));
        Rng wr(rng.next());
        Environment env(sc, {}, {}, generate_scenario(sc, wr));
        const AgentKind kind = kinds[scenario_no++ % 4];
        std::unique_ptr<Controller> ctl;
        AgentConfig ac;
        ac.hidden = {8};
        if (kind == AgentKind::vqq) {
            Rng init(rng.next());
            ApproxModel model;
            model.uavs = static_cast<std::size_t>(sc.uavs);
            model.vessels = static_cast<std::size_t>(sc.vessels);
            model.weights = MlpWeights::random(model.input_size(), ac.hidden, init);
            auto c = std::make_unique<ApproxController>(ac, rng.next(), std::move(model));
            c->set_mode(true, 0.3);
            ctl = std::move(c);
        } else if (kind == AgentKind::tabular) {
            auto c = std::make_unique<TabularController>(ac, rng.next(),
                                                        TabularModel{TabularEncoder(1), QTable(env.lattice_size())});
            c->set_mode(true, 0.3);
            ctl = std::move(c);
        } else {
            ctl = make_baseline_controller(kind, rng.next());
        }
        env.reset(rng.next());
        while (!env.done() && counts.steps < 10000) {
            env.begin_slot();
            const std::size_t offered = env.slot_tasks().size();
            const Action a = ctl->act(env);
            const StepOutcome out = env.step(a);
            ctl->observe(env, out);
            if (out.records.size() + out.deferred.size() != offered) {
                if (counts.violations++ == 0) counts.first = "task lost";
            }
            placed += static_cast<long>(out.records.size());
            deferred += static_cast<long>(out.deferred.size());
            check_step(env, out, counts);
        }
        ctl->end_episode();
    }
    const double secs = seconds_since(t0);
    Verdict v;
    v.pass = counts.violations == 0 && secs < 60.0;
    v.detail = std::to_string(counts.steps) + " steps over " + std::to_string(scenario_no) + " scenarios, " +
               std::to_string(placed) + " tasks placed, " + std::to_string(counts.violations) + " violations" +
               (counts.first.empty() ? "" : " (first: " + counts.first + ")") + fmt(", %.1fs", secs);
    return v;
}

// ---------------------------------------------------------------------------

Verdict gradient_check() {
    Rng rng(4242);
    double worst = 0.0;
    long params = 0;
    for (int n = 0; n < 100; ++n) {
        const std::size_t in = 4 + rng.index(12);
        const std::vector<int> hidden{4 + static_cast<int>(rng.index(12)), 2 + static_cast<int>(rng.index(8))};
        const MlpWeights w = MlpWeights::random(in, hidden, rng);
        Transition t;
        t.input.resize(in);
        for (auto& x : t.input) x = rng.uniform(-1, 1);
        t.reward = rng.uniform(-3, 3);
        const double discount = 0.9;
        for (int k = 0; k < 3; ++k) {
            std::vector<double> nx(in);
            for (auto& x : nx) x = rng.uniform(-1, 1);
            t.next_inputs.push_back(nx);
        }
        // The bootstrap target is held fixed while differentiating.
        double target = t.reward;
        double best = -INFINITY;
        for (const auto& nx : t.next_inputs) best = std::max(best, oracle::forward(to_nested(w), nx));
        target += discount * best;
        const LossGrad lg = q_loss_and_grad(t, w, discount);
        const auto flat = w.flatten();
        const auto grad = lg.grad.flatten();
        for (std::size_t p = 0; p < flat.size(); ++p) {
            auto plus = flat, minus = flat;
            plus[p] += 1e-5;
            minus[p] -= 1e-5;
            MlpWeights wp = w, wm = w;
            wp.assign(plus);
            wm.assign(minus);
            const double fd = (oracle::td_loss(oracle::forward(to_nested(wp), t.input), target) -
                               oracle::td_loss(oracle::forward(to_nested(wm), t.input), target)) /
                              2e-5;
            const double scale = std::max({std::abs(fd), std::abs(grad[p]), 1e-6});
            worst = std::max(worst, std::abs(fd - grad[p]) / scale);
            ++params;
        }
    }
    Verdict v;
    v.pass = worst <= 1e-4;
    v.detail = "100 transitions, " + std::to_string(params) + " parameters, worst relative error " + fmt("%.2e", worst);
    return v;
}

// ---------------------------------------------------------------------------

ScenarioConfig tiny_scenario() {
    ScenarioConfig sc;
    sc.miots = 1;
    sc.uavs = 1;
    sc.vessels = 1;
    sc.horizon = 5;
    // Fixed task sizes make the MDP deterministic so enumeration is exact.
    sc.bits_lo = sc.bits_hi = 2.5e6;
    sc.cycles_lo = sc.cycles_hi = 3.0e6;
    return sc;
}

AgentConfig tiny_agent() {
    AgentConfig ac;
    ac.discount = 0.99;
    ac.epochs = 3000;
    ac.learn_rate = 0.1;
    ac.epsilon = 0.2;
    ac.bins = 8;
    return ac;
}

// Total drift-plus-penalty of an episode driven by a fixed placement list.
double sequence_cost(Environment env, const std::vector<Placement>& plan, std::uint64_t episode_seed) {
    env.reset(episode_seed);
    double total = 0.0;
    std::size_t slot = 0;
    while (!env.done()) {
        env.begin_slot();
        Action a;
        for (std::size_t t = 0; t < env.slot_tasks().size(); ++t) a.decisions.push_back({t, plan.at(slot)});
        const StepOutcome out = env.step(a);
        for (double p : out.penalty) total += p;
        ++slot;
    }
    return total;
}

struct TinyResult {
    int matches = 0;
    std::string trace;   // deterministic summary for the rerun check
};

TinyResult tiny_optimality() {
    TinyResult res;
    const ScenarioConfig base = tiny_scenario();
    const AgentConfig ac = tiny_agent();
    for (std::uint64_t seed = 1; seed <= 20; ++seed) {
        ScenarioConfig sc = base;
        Rng wr(stream_seed(seed, Stream::scenario));
        const Environment env(sc, {}, {}, generate_scenario(sc, wr));
        const std::uint64_t episode_seed = stream_seed(seed, Stream::evaluation);

        double best = INFINITY;
        for (int mask = 0; mask < (1 << sc.horizon); ++mask) {
            std::vector<Placement> plan;
            for (int t = 0; t < sc.horizon; ++t) {
                Placement p;
                if (mask >> t & 1) p.vessel = 0;
                plan.push_back(p);
            }
            best = std::min(best, sequence_cost(env, plan, episode_seed));
        }

        const TrainResult tr = train_vqq(env, AgentKind::tabular, ac, seed);
        auto ctl = make_policy_controller(tr.policy, ac, seed);
        std::vector<Placement> learned;
        Environment run = env;
        run_episode(run, *ctl, episode_seed, [&](const StepOutcome& out) {
            for (const auto& r : out.records) learned.push_back(r.placement);
        });
        const double got = sequence_cost(env, learned, episode_seed);
        const bool match = got <= best + 1e-9 * std::max(1.0, std::abs(best));
        res.matches += match;
        std::string seq;
        for (const auto& p : learned) seq += p.relayed() ? 'V' : 'U';
        res.trace += std::to_string(seed) + " " + seq + fmt(" %.17g", got) + fmt(" %.17g\n", best);
    }
    return res;
}

Verdict tiny_optimality_verdict(TinyResult& out) {
    const auto t0 = std::chrono::steady_clock::now();
    out = tiny_optimality();
    const double secs = seconds_since(t0);
    Verdict v;
    v.pass = out.matches >= 18 && secs < 120.0;
    v.detail = std::to_string(out.matches) + "/20 seeds optimal" + fmt(", %.1fs", secs);
    return v;
}

// ---------------------------------------------------------------------------

ExperimentConfig grid_config(const fs::path& dir) {
    ExperimentConfig cfg = parse_config("experiment.sweep = 10,20,30\nexperiment.seeds = 1..10\n"
                                        "experiment.agents = vqq,greedy,random\n");
    cfg.output_dir = dir.string();
    return cfg;
}

struct GridOutcome {
    ExperimentResult result;
    double secs = 0.0;
};

double eval_mean(const CellResult& c, double EpisodeMetrics::*field) {
    double s = 0.0;
    for (const auto& m : c.eval) s += m.*field;
    return s / static_cast<double>(c.eval.size());
}

Verdict trend_verdict(const GridOutcome& g) {
    std::map<std::tuple<AgentKind, int, std::uint64_t>, const CellResult*> cells;
    std::set<std::uint64_t> seeds;
    std::set<int> counts;
    for (const auto& c : g.result.cells) {
        cells[{c.agent, c.miots, c.seed}] = &c;
        seeds.insert(c.seed);
        counts.insert(c.miots);
    }
    int good = 0;
    int mono_fail = 0, vqq_fail = 0, greedy_fail = 0;
    std::string failing;
    for (std::uint64_t s : seeds) {
        bool ok = true;
        for (AgentKind k : {AgentKind::vqq, AgentKind::greedy, AgentKind::random}) {
            double prev_t = -INFINITY, prev_e = -INFINITY;
            for (int i : counts) {
                const CellResult& c = *cells.at({k, i, s});
                const double t = eval_mean(c, &EpisodeMetrics::mean_slot_time_s);
                const double e = eval_mean(c, &EpisodeMetrics::mean_slot_energy_j);
                if (t < prev_t || e < prev_e) {
                    ok = false;
                    ++mono_fail;
                }
                prev_t = t;
                prev_e = e;
            }
        }
        for (int i : counts) {
            const double v = eval_mean(*cells.at({AgentKind::vqq, i, s}), &EpisodeMetrics::mean_cost);
            const double gr = eval_mean(*cells.at({AgentKind::greedy, i, s}), &EpisodeMetrics::mean_cost);
            const double r = eval_mean(*cells.at({AgentKind::random, i, s}), &EpisodeMetrics::mean_cost);
            if (v > gr) {
                ok = false;
                ++vqq_fail;
            }
            if (gr > 1.05 * r) {
                ok = false;
                ++greedy_fail;
            }
        }
        good += ok;
        if (!ok) failing += " " + std::to_string(s);
    }
    Verdict v;
    v.pass = good >= 8 && g.secs < 900.0;
    v.detail = std::to_string(good) + "/" + std::to_string(seeds.size()) + " seeds hold all trends";
    if (!failing.empty()) {
        v.detail += " (failing seeds:" + failing + "; " + std::to_string(mono_fail) + " monotonicity, " +
                    std::to_string(vqq_fail) + " vqq>greedy, " + std::to_string(greedy_fail) + " greedy>1.05*random)";
    }
    v.detail += fmt(", %.0fs", g.secs);
    return v;
}

Verdict convergence_verdict(const GridOutcome& g) {
    int runs = 0, stable = 0;
    double worst = 0.0;
    for (const auto& c : g.result.cells) {
        if (c.agent != AgentKind::vqq) continue;
        ++runs;
        const std::size_t n = c.train.size();
        const std::size_t tail = std::max<std::size_t>(1, n / 10);
        bool ok = true;
        for (double EpisodeMetrics::*f : {&EpisodeMetrics::norm_time, &EpisodeMetrics::norm_energy}) {
            double mean = 0.0;
            for (std::size_t e = n - tail; e < n; ++e) mean += c.train[e].*f;
            mean /= static_cast<double>(tail);
            double var = 0.0;
            for (std::size_t e = n - tail; e < n; ++e) var += (c.train[e].*f - mean) * (c.train[e].*f - mean);
            const double sd = std::sqrt(var / static_cast<double>(tail));
            const double cv = sd / mean;
            worst = std::max(worst, cv);
            if (!(sd <= 0.1 * mean)) ok = false;
        }
        stable += ok;
    }
    Verdict v;
    v.pass = runs > 0 && stable == runs;
    v.detail = std::to_string(stable) + "/" + std::to_string(runs) +
               " vqq training runs stable over the final 10% of episodes, worst std/mean " + fmt("%.3f", worst);
    return v;
}

Verdict queue_verdict(const GridOutcome& g, int default_miots) {
    int runs = 0, ok = 0;
    double worst_t = 0.0, worst_e = 0.0;
    for (const auto& c : g.result.cells) {
        if (c.agent != AgentKind::vqq || c.miots != default_miots) continue;
        ++runs;
        const double t = eval_mean(c, &EpisodeMetrics::time_ratio);
        const double e = eval_mean(c, &EpisodeMetrics::energy_ratio);
        worst_t = std::max(worst_t, t);
        worst_e = std::max(worst_e, e);
        ok += t <= 0.99 + 0.05 && e <= 0.99 + 0.05;
    }
    Verdict v;
    v.pass = runs > 0 && ok == runs;
    v.detail = std::to_string(ok) + "/" + std::to_string(runs) + " seeds at I=" + std::to_string(default_miots) +
               fmt(" within 1.04; worst time ratio %.4f", worst_t) + fmt(", energy ratio %.4f", worst_e);
    return v;
}

// ---------------------------------------------------------------------------

std::vector<std::string> output_files(const fs::path& dir) {
    std::vector<std::string> files;
    for (const auto& e : fs::recursive_directory_iterator(dir)) {
        if (!e.is_regular_file()) continue;
        const std::string name = e.path().filename().string();
        // timings.csv holds wall-clock durations; everything else is derived
        // from the config alone.
        if (name == "timings.csv") continue;
        files.push_back(fs::relative(e.path(), dir).string());
    }
    std::sort(files.begin(), files.end());
    return files;
}

// The resolved config records where it was written; that line is expected
// to differ between the two output directories.
std::string comparable(const fs::path& p) {
    std::string text = slurp(p);
    if (p.filename() != "config.resolved") return text;
    std::istringstream in(text);
    std::string line, out;
    while (std::getline(in, line)) {
        if (line.rfind("experiment.output_dir", 0) != 0) out += line + "\n";
    }
    return out;
}

Verdict determinism_verdict(const fs::path& first_grid, const fs::path& scratch, const std::string& tiny_trace) {
    int compared = 0, differing = 0;
    std::string first_diff;
    auto compare_dirs = [&](const fs::path& a, const fs::path& b) {
        const auto fa = output_files(a), fb = output_files(b);
        if (fa != fb) {
            ++differing;
            if (first_diff.empty()) first_diff = "file lists differ";
            return;
        }
        for (const auto& f : fa) {
            ++compared;
            if (comparable(a / f) != comparable(b / f)) {
                ++differing;
                if (first_diff.empty()) first_diff = f;
            }
        }
    };

    // Rerun the trend grid into a second directory on a different worker count.
    if (!first_grid.empty()) {
        ExperimentConfig cfg = grid_config(scratch / "grid_rerun");
        run_experiment(cfg, true, 2);
        compare_dirs(first_grid, scratch / "grid_rerun");
    }
    // A small run with every agent kind, twice.
    for (const char* name : {"small_a", "small_b"}) {
        ExperimentConfig cfg = parse_config("scenario.I = 6\nscenario.T = 20\nagent.epochs = 5\n"
                                            "experiment.seeds = 1..3\nexperiment.agents = vqq,tabular,greedy,random\n");
        cfg.output_dir = (scratch / name).string();
        run_experiment(cfg, true, name[6] == 'a' ? 1 : 3);
    }
    compare_dirs(scratch / "small_a", scratch / "small_b");
    // The tiny enumeration run.
    const bool tiny_same = tiny_trace.empty() || tiny_optimality().trace == tiny_trace;
    if (!tiny_same) {
        ++differing;
        if (first_diff.empty()) first_diff = "tiny-scenario trace";
    }
    Verdict v;
    v.pass = differing == 0 && compared > 0;
    v.detail = std::to_string(compared) + " files compared byte for byte, " + std::to_string(differing) +
               " differing" + (first_diff.empty() ? "" : " (first: " + first_diff + ")");
    return v;
}

} // namespace

int main(int argc, char** argv) {
    std::set<int> wanted;
    for (int a = 1; a < argc; ++a) wanted.insert(std::atoi(argv[a]));
    auto want = [&](int n) { return wanted.empty() || wanted.count(n) > 0; };

    const fs::path scratch = fs::temp_directory_path() / "mecsim_acceptance";
    fs::remove_all(scratch);
    fs::create_directories(scratch);

    const char* names[] = {"",
                           "formula oracles",
                           "constraint invariants",
                           "gradient check",
                           "tiny-scenario optimality",
                           "MIoT-count trends",
                           "training convergence",
                           "queue stability",
                           "determinism"};
    int failures = 0;
    auto report = [&](int n, const Verdict& v) {
        std::printf("criterion %d %-26s %s  %s\n", n, names[n], v.pass ? "PASS" : "FAIL", v.detail.c_str());
        std::fflush(stdout);
        failures += !v.pass;
    };
    auto guarded = [&](int n, const std::function<Verdict()>& fn) {
        try {
            report(n, fn());
        } catch (const std::exception& e) {
            report(n, Verdict{false, std::string("exception: ") + e.what()});
        }
    };

    if (want(1)) guarded(1, formula_oracles);
    if (want(2)) guarded(2, constraint_invariants);
    if (want(3)) guarded(3, gradient_check);
    TinyResult tiny;
    if (want(4)) guarded(4, [&] { return tiny_optimality_verdict(tiny); });

    GridOutcome grid;
    fs::path grid_dir;
    if (want(5) || want(6) || want(7) || want(8)) {
        try {
            grid_dir = scratch / "grid";
            const ExperimentConfig cfg = grid_config(grid_dir);
            const auto t0 = std::chrono::steady_clock::now();
            grid.result = run_experiment(cfg, true);
            grid.secs = seconds_since(t0);
        } catch (const std::exception& e) {
            for (int n : {5, 6, 7}) {
                if (want(n)) report(n, Verdict{false, std::string("grid failed: ") + e.what()});
            }
            grid_dir.clear();
        }
    }
    if (!grid_dir.empty()) {
        if (want(5)) guarded(5, [&] { return trend_verdict(grid); });
        if (want(6)) guarded(6, [&] { return convergence_verdict(grid); });
        if (want(7)) guarded(7, [&] { return queue_verdict(grid, ScenarioConfig{}.miots); });
    }
    if (want(8)) guarded(8, [&] { return determinism_verdict(grid_dir, scratch, tiny.trace); });

    fs::remove_all(scratch);
    return failures == 0 ? 0 : 1;
}
