#include "mecsim/training.hpp"

#include "mecsim/errors.hpp"

#include <algorithm>
#include <iostream>

namespace mecsim {

EpisodeMetrics run_episode(Environment& env, Controller& controller, std::uint64_t episode_seed,
                           const SlotSink& sink) {
    env.reset(episode_seed);
    const std::size_t I = env.world().miots.size();
    std::vector<double> ratio_t(I, 0.0), ratio_e(I, 0.0);
    std::vector<long> ratio_n(I, 0);
    double time_sum = 0.0, energy_sum = 0.0, platform = 0.0;
    EpisodeMetrics m;
    int slots = 0;
    while (!env.done()) {
        env.begin_slot();
        const Action action = controller.act(env);
        const StepOutcome out = env.step(action);
        controller.observe(env, out);
        if (sink) sink(out);
        ++slots;
        for (const auto& r : out.records) {
            time_sum += r.time.total_s;
            energy_sum += r.energy.total_j;
        }
        m.tasks += static_cast<long>(out.records.size());
        m.deferred += static_cast<long>(out.deferred.size());
        platform += out.platform_energy_j;
        for (std::size_t i = 0; i < I; ++i) {
            if (!out.observed[i]) continue;
            ratio_t[i] += out.ratios[i].time;
            ratio_e[i] += out.ratios[i].energy;
            ++ratio_n[i];
            m.penalty_sum += out.penalty[i];
        }
    }
    controller.end_episode();

    const double s = std::max(slots, 1);
    m.mean_slot_time_s = time_sum / s;
    m.mean_slot_energy_j = energy_sum / s;
    m.platform_energy_j = platform / s;
    if (m.tasks > 0) {
        m.mean_task_time_s = time_sum / static_cast<double>(m.tasks);
        m.mean_task_energy_j = energy_sum / static_cast<double>(m.tasks);
    }
    const auto& b = env.bounds();
    m.mean_cost = b.weight_energy * m.mean_slot_energy_j + b.weight_time * m.mean_slot_time_s;

    long observed = 0;
    for (std::size_t i = 0; i < I; ++i) {
        if (ratio_n[i] == 0) continue;
        m.time_ratio += ratio_t[i] / static_cast<double>(ratio_n[i]);
        m.energy_ratio += ratio_e[i] / static_cast<double>(ratio_n[i]);
        ++observed;
    }
    if (observed > 0) {
        m.time_ratio /= static_cast<double>(observed);
        m.energy_ratio /= static_cast<double>(observed);
    }
    const auto& q = env.queues();
    for (std::size_t i = 0; i < I; ++i) {
        m.final_vt_mean += q.v_time[i];
        m.final_ve_mean += q.v_energy[i];
        m.final_vt_max = std::max(m.final_vt_max, q.v_time[i]);
        m.final_ve_max = std::max(m.final_ve_max, q.v_energy[i]);
    }
    if (I > 0) {
        m.final_vt_mean /= static_cast<double>(I);
        m.final_ve_mean /= static_cast<double>(I);
    }
    return m;
}

void normalize(std::vector<EpisodeMetrics>& series, const EpisodeMetrics& reference) {
    for (auto& m : series) {
        m.norm_time = reference.mean_slot_time_s > 0.0 ? m.mean_slot_time_s / reference.mean_slot_time_s : 0.0;
        m.norm_energy =
            reference.mean_slot_energy_j > 0.0 ? m.mean_slot_energy_j / reference.mean_slot_energy_j : 0.0;
    }
}

namespace {

/// Records the state of every deciding MIoT before delegating.
class StateRecorder final : public Controller {
public:
    StateRecorder(Controller& inner, std::vector<StateComponents>& sink) : inner_(inner), sink_(sink) {}

    Action act(const Environment& env) override {
        for (const auto& t : env.slot_tasks()) sink_.push_back(env.state().components(t.origin));
        return inner_.act(env);
    }

private:
    Controller& inner_;
    std::vector<StateComponents>& sink_;
};

} // namespace

TrainResult train_vqq(const Environment& prototype, AgentKind kind, const AgentConfig& cfg,
                      std::uint64_t seed, const SlotSink& sink) {
    if (!is_learning(kind)) {
        throw ConfigError("train_vqq: agent kind '" + to_string(kind) + "' does not learn");
    }
    cfg.validate();
    Environment env = prototype;
    std::unique_ptr<QController> controller;

    if (kind == AgentKind::tabular) {
        TabularModel model{TabularEncoder(cfg.bins), QTable(env.lattice_size())};
        std::vector<StateComponents> sample;
        RandomController explorer(stream_seed(seed, Stream::calibration, 1u << 20));
        StateRecorder recorder(explorer, sample);
        for (int e = 0; e < cfg.calibration_episodes; ++e) {
            run_episode(env, recorder, stream_seed(seed, Stream::calibration, static_cast<std::uint64_t>(e)));
        }
        model.encoder.calibrate(sample);
        controller = std::make_unique<TabularController>(cfg, stream_seed(seed, Stream::exploration),
                                                         std::move(model));
    } else {
        ApproxModel model;
        model.uavs = env.world().uavs.size();
        model.vessels = env.world().vessels.size();
        Rng init(stream_seed(seed, Stream::weights));
        model.weights = MlpWeights::random(model.input_size(), cfg.hidden, init);
        controller = std::make_unique<ApproxController>(cfg, stream_seed(seed, Stream::exploration),
                                                        std::move(model));
    }

    TrainResult result;
    for (int e = 0; e < cfg.epochs; ++e) {
        controller->set_mode(true, cfg.epsilon_at(e));
        const std::uint64_t ep_seed = stream_seed(seed, Stream::training, static_cast<std::uint64_t>(e));
        EpisodeMetrics m;
        try {
            m = run_episode(env, *controller, ep_seed, sink);
        } catch (const NonFiniteLoss& err) {
            std::cerr << "train_vqq: epoch " << e << " aborted: " << err.what() << "\n"
                      << "  slot " << env.clock().slot << ", updates so far " << controller->updates()
                      << ", last finite loss " << controller->last_loss() << "\n";
            controller->set_mode(false, 0.0);
            m.aborted = true;
        }
        m.episode = e;
        m.training = true;
        result.episodes.push_back(m);
    }
    if (!result.episodes.empty()) normalize(result.episodes, result.episodes.front());

    if (auto* tab = dynamic_cast<TabularController*>(controller.get())) {
        result.policy.model = tab->model();
    } else {
        result.policy.model = dynamic_cast<ApproxController&>(*controller).model();
    }
    return result;
}

std::unique_ptr<Controller> make_policy_controller(const Policy& policy, const AgentConfig& cfg,
                                                   std::uint64_t seed) {
    std::unique_ptr<QController> c;
    if (const auto* tab = std::get_if<TabularModel>(&policy.model)) {
        c = std::make_unique<TabularController>(cfg, seed, *tab);
    } else {
        c = std::make_unique<ApproxController>(cfg, seed, std::get<ApproxModel>(policy.model));
    }
    c->set_mode(false, 0.0);
    return c;
}

std::unique_ptr<Controller> make_baseline_controller(AgentKind kind, std::uint64_t seed) {
    switch (kind) {
    case AgentKind::greedy: return std::make_unique<GreedyController>();
    case AgentKind::random: return std::make_unique<RandomController>(seed);
    default: throw ConfigError("make_baseline_controller: '" + to_string(kind) + "' is not a baseline");
    }
}

std::vector<EpisodeMetrics> evaluate(const Environment& prototype, Controller& controller, int episodes,
                                     std::uint64_t seed) {
    Environment env = prototype;
    std::vector<EpisodeMetrics> out;
    for (int e = 0; e < episodes; ++e) {
        EpisodeMetrics m =
            run_episode(env, controller, stream_seed(seed, Stream::evaluation, static_cast<std::uint64_t>(e)));
        m.episode = e;
        out.push_back(m);
    }
    return out;
}

} // namespace mecsim
