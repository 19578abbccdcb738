#include "mecsim/agents.hpp"

#include "mecsim/errors.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mecsim {

std::string to_string(AgentKind kind) {
    switch (kind) {
    case AgentKind::vqq: return "vqq";
    case AgentKind::tabular: return "tabular";
    case AgentKind::greedy: return "greedy";
    case AgentKind::random: return "random";
    }
    return "unknown";
}

AgentKind parse_agent_kind(const std::string& name) {
    if (name == "vqq" || name == "approx") return AgentKind::vqq;
    if (name == "tabular") return AgentKind::tabular;
    if (name == "greedy") return AgentKind::greedy;
    if (name == "random") return AgentKind::random;
    throw ConfigError("agent: unknown kind '" + name + "' (expected vqq|tabular|greedy|random)");
}

void AgentConfig::validate() const {
    if (!(epsilon >= 0.0 && epsilon <= 1.0)) throw ConfigError("agent.epsilon: must be in [0, 1]");
    if (!(epsilon_final >= 0.0 && epsilon_final <= 1.0)) {
        throw ConfigError("agent.epsilon_final: must be in [0, 1]");
    }
    if (!(learn_rate > 0.0 && learn_rate <= 1.0)) throw ConfigError("agent.learn_rate: must be in (0, 1]");
    if (!(approx_learn_rate > 0.0 && approx_learn_rate <= 1.0)) {
        throw ConfigError("agent.approx_learn_rate: must be in (0, 1]");
    }
    if (!(discount >= 0.0 && discount < 1.0)) throw ConfigError("agent.discount: must be in [0, 1)");
    if (epochs < 1) throw ConfigError("agent.epochs: must be >= 1");
    if (hidden.empty()) throw ConfigError("agent.hidden: at least one hidden layer");
    for (int h : hidden) {
        if (h < 1) throw ConfigError("agent.hidden: layer widths must be >= 1");
    }
    if (bins < 1) throw ConfigError("agent.bins: must be >= 1");
    if (calibration_episodes < 0) throw ConfigError("agent.calibration_episodes: must be >= 0");
    if (!std::isfinite(grad_clip)) throw ConfigError("agent.grad_clip: must be finite");
}

double AgentConfig::epsilon_at(int epoch) const {
    if (!epsilon_decay || epochs <= 1) return epsilon;
    const double f = std::clamp(static_cast<double>(epoch) / (epochs - 1), 0.0, 1.0);
    return epsilon + (epsilon_final - epsilon) * f;
}

std::size_t select_action(std::span<const double> scores, double epsilon, Rng& rng) {
    if (scores.empty()) {
        throw NoFeasibleActionError("select_action: no feasible candidates");
    }
    if (epsilon > 0.0 && rng.uniform01() < epsilon) {
        return rng.index(scores.size());
    }
    std::size_t best = 0;
    for (std::size_t i = 1; i < scores.size(); ++i) {
        if (scores[i] > scores[best]) best = i;
    }
    return best;
}

double QTable::get(std::size_t state, std::size_t action) const {
    const auto it = values_.find(static_cast<std::uint64_t>(state) * actions_ + action);
    return it == values_.end() ? 0.0 : it->second;
}

void QTable::set(std::size_t state, std::size_t action, double value) {
    if (action >= actions_) throw InvariantViolation("QTable::set: action out of range");
    values_[static_cast<std::uint64_t>(state) * actions_ + action] = value;
}

std::vector<std::tuple<std::size_t, std::size_t, double>> QTable::entries() const {
    std::vector<std::pair<std::uint64_t, double>> flat(values_.begin(), values_.end());
    std::sort(flat.begin(), flat.end());
    std::vector<std::tuple<std::size_t, std::size_t, double>> out;
    out.reserve(flat.size());
    for (const auto& [key, v] : flat) {
        out.emplace_back(static_cast<std::size_t>(key / actions_), static_cast<std::size_t>(key % actions_), v);
    }
    return out;
}

void q_update(QTable& q, std::size_t state, std::size_t action, double reward,
              std::size_t next_state, std::span<const std::size_t> feasible_next,
              double learn_rate, double discount) {
    double best_next = 0.0;
    if (!feasible_next.empty()) {
        best_next = -std::numeric_limits<double>::infinity();
        for (std::size_t a : feasible_next) best_next = std::max(best_next, q.get(next_state, a));
    }
    const double current = q.get(state, action);
    q.set(state, action, current + learn_rate * (reward + discount * best_next - current));
}

AgentKind Policy::kind() const {
    return std::holds_alternative<TabularModel>(model) ? AgentKind::tabular : AgentKind::vqq;
}

void candidate_input(const ApproxModel& model, const StateComponents& encoded_state,
                     const SlotPlanner& planner, const Candidate& c, std::vector<double>& out) {
    out.assign(model.input_size(), 0.0);
    std::copy(encoded_state.begin(), encoded_state.end(), out.begin());
    std::size_t pos = kStateComponents;
    const bool relayed = c.placement.relayed();
    out[pos + (relayed ? 1 : 0)] = 1.0;
    pos += 2;
    if (c.uav_rank < model.uavs) out[pos + c.uav_rank] = 1.0;
    pos += model.uavs;
    if (relayed && c.vessel_rank < model.vessels) out[pos + c.vessel_rank] = 1.0;
    pos += model.vessels;
    const double backlog = relayed ? planner.vessel_backlog_s(*c.placement.vessel)
                                   : planner.uav_backlog_s(c.placement.uav);
    out[pos++] = backlog / (backlog + 1.0);
    const double load = planner.uplink_load(c.placement.uav);
    out[pos++] = load / (load + 1.0);
}

Action greedy_policy(const Environment& env) {
    SlotPlanner planner = env.planner();
    for (std::size_t t = 0; t < planner.task_count(); ++t) {
        const auto cands = planner.candidates(t);
        if (cands.empty()) continue;
        // Lattice order puts nearer UAVs first, local before relay.
        auto local = std::find_if(cands.begin(), cands.end(),
                                  [](const Candidate& c) { return !c.placement.relayed(); });
        planner.commit(t, local != cands.end() ? local->placement : cands.front().placement);
    }
    return planner.action();
}

Action random_policy(const Environment& env, Rng& rng) {
    SlotPlanner planner = env.planner();
    for (std::size_t t = 0; t < planner.task_count(); ++t) {
        const auto cands = planner.candidates(t);
        if (cands.empty()) continue;
        planner.commit(t, cands[rng.index(cands.size())].placement);
    }
    return planner.action();
}

QController::QController(const AgentConfig& cfg, std::uint64_t seed)
    : cfg_(cfg), rng_(seed), epsilon_(cfg.epsilon) {
    cfg_.validate();
}

void QController::set_mode(bool learning, double epsilon) {
    learning_ = learning;
    epsilon_ = epsilon;
    if (!learning_) pending_.clear();
}

void QController::complete_pending(std::size_t miot, std::span<const double> next_scores,
                                   std::span<const Candidate> next_cands) {
    for (auto it = pending_.begin(); it != pending_.end();) {
        if (it->miot == miot && it->rewarded) {
            update(*it, next_scores, next_cands);
            ++updates_;
            it = pending_.erase(it);
        } else {
            ++it;
        }
    }
}

Action QController::act(const Environment& env) {
    SlotPlanner planner = env.planner();
    std::vector<double> scores;
    for (std::size_t t = 0; t < planner.task_count(); ++t) {
        const auto cands = planner.candidates(t);
        if (cands.empty()) continue;
        const std::size_t miot = planner.task(t).origin;
        prepare_state(env, miot);
        scores.clear();
        score(planner, t, cands, scores);
        if (learning_) complete_pending(miot, scores, cands);
        const std::size_t pick = select_action(scores, epsilon_, rng_);
        if (learning_) {
            Pending p;
            p.miot = miot;
            record(planner, t, cands[pick], p);
            pending_.push_back(std::move(p));
        }
        planner.commit(t, cands[pick].placement);
    }
    return planner.action();
}

void QController::observe(const Environment&, const StepOutcome& outcome) {
    if (!learning_) return;
    for (auto& p : pending_) {
        if (!p.rewarded) {
            p.reward = reward(outcome.penalty.at(p.miot));
            p.rewarded = true;
        }
    }
}

void QController::end_episode() {
    if (learning_) {
        for (const auto& p : pending_) {
            if (p.rewarded) {
                update(p, {}, {});
                ++updates_;
            }
        }
    }
    pending_.clear();
}

TabularController::TabularController(const AgentConfig& cfg, std::uint64_t seed, TabularModel model)
    : QController(cfg, seed), model_(std::move(model)) {}

void TabularController::prepare_state(const Environment& env, std::size_t miot) {
    current_state_ = model_.encoder.encode(env.state().components(miot));
}

void TabularController::score(const SlotPlanner&, std::size_t, const std::vector<Candidate>& cands,
                              std::vector<double>& scores) {
    for (const auto& c : cands) scores.push_back(model_.table.get(current_state_, c.lattice));
}

void TabularController::record(const SlotPlanner&, std::size_t, const Candidate& chosen, Pending& p) {
    p.state = current_state_;
    p.action = chosen.lattice;
}

void TabularController::update(const Pending& p, std::span<const double>,
                               std::span<const Candidate> next_cands) {
    std::vector<std::size_t> feasible;
    feasible.reserve(next_cands.size());
    for (const auto& c : next_cands) feasible.push_back(c.lattice);
    q_update(model_.table, p.state, p.action, p.reward, current_state_, feasible, cfg_.learn_rate,
             cfg_.discount);
}

ApproxController::ApproxController(const AgentConfig& cfg, std::uint64_t seed, ApproxModel model)
    : QController(cfg, seed), model_(std::move(model)) {
    model_.weights.validate();
    if (model_.weights.input_size() != model_.input_size()) {
        throw ConfigError("vqq: network input does not match the candidate feature layout");
    }
}

void ApproxController::prepare_state(const Environment& env, std::size_t miot) {
    const StateComponents raw = env.state().components(miot);
    if (learning_) model_.encoder.observe(raw);
    current_ = model_.encoder.encode(raw);
}

void ApproxController::score(const SlotPlanner& planner, std::size_t, const std::vector<Candidate>& cands,
                             std::vector<double>& scores) {
    for (const auto& c : cands) {
        candidate_input(model_, current_, planner, c, row_);
        scores.push_back(mlp_q(row_, model_.weights, scratch_));
    }
}

void ApproxController::record(const SlotPlanner& planner, std::size_t, const Candidate& chosen,
                              Pending& p) {
    candidate_input(model_, current_, planner, chosen, p.input);
}

void ApproxController::update(const Pending& p, std::span<const double> next_scores,
                              std::span<const Candidate>) {
    double target = p.reward;
    if (!next_scores.empty()) {
        target += cfg_.discount * *std::max_element(next_scores.begin(), next_scores.end());
    }
    LossGrad lg = q_loss_and_grad(p.input, target, model_.weights);
    if (!std::isfinite(lg.loss)) {
        throw NonFiniteLoss("vqq: non-finite TD loss (target " + std::to_string(target) + ")");
    }
    last_loss_ = lg.loss;
    if (cfg_.grad_clip > 0.0) clip_gradient(lg.grad, cfg_.grad_clip);
    sgd_step_inplace(model_.weights, lg.grad, cfg_.approx_learn_rate);
}

} // namespace mecsim
