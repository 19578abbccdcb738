#pragma once

#include "mecsim/encoding.hpp"
#include "mecsim/environment.hpp"
#include "mecsim/mlp.hpp"
#include "mecsim/rng.hpp"

#include <cstddef>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <tuple>
#include <unordered_map>
#include <variant>
#include <vector>

namespace mecsim {

/// vqq is the network-backed learner; tabular is the binned Q-table learner.
enum class AgentKind { vqq, tabular, greedy, random };

std::string to_string(AgentKind kind);
AgentKind parse_agent_kind(const std::string& name);
inline bool is_learning(AgentKind kind) { return kind == AgentKind::vqq || kind == AgentKind::tabular; }

struct AgentConfig {
    double epsilon = 0.1;
    bool epsilon_decay = false;      // linear from epsilon to epsilon_final over the epochs
    double epsilon_final = 0.01;
    double learn_rate = 0.1;         // tabular step size
    double approx_learn_rate = 1e-3; // network step size
    double discount = 0.5;
    int epochs = 50;
    std::vector<int> hidden{64, 64};
    int bins = 4;
    int calibration_episodes = 3;
    double grad_clip = 10.0;         // global-norm clip; <= 0 disables

    void validate() const;
    double epsilon_at(int epoch) const;
};

/// Epsilon-greedy choice over candidate scores. Exploration is uniform over
/// all candidates; exploitation takes the first maximum.
std::size_t select_action(std::span<const double> scores, double epsilon, Rng& rng);

/// Sparse Q values; unseen entries read as 0.
class QTable {
public:
    explicit QTable(std::size_t actions = 1) : actions_(actions) {}

    std::size_t actions() const { return actions_; }
    double get(std::size_t state, std::size_t action) const;
    void set(std::size_t state, std::size_t action, double value);
    std::size_t size() const { return values_.size(); }
    /// (state, action, value) sorted by key.
    std::vector<std::tuple<std::size_t, std::size_t, double>> entries() const;

private:
    std::size_t actions_;
    std::unordered_map<std::uint64_t, double> values_;
};

/// Q(s,a) += lr * (r + discount * max_{a' in feasible_next} Q(s',a') - Q(s,a)).
/// An empty feasible_next is terminal.
void q_update(QTable& q, std::size_t state, std::size_t action, double reward,
              std::size_t next_state, std::span<const std::size_t> feasible_next,
              double learn_rate, double discount);

struct TabularModel {
    TabularEncoder encoder;
    QTable table;
};

/// Network input: 4 normalized state components, then candidate features
/// [local, relayed, one-hot UAV rank (J), one-hot vessel rank (K),
///  destination backlog / (backlog + 1 s), uplink load / (load + 1)].
struct ApproxModel {
    VectorEncoder encoder;
    MlpWeights weights;
    std::size_t uavs = 0;
    std::size_t vessels = 0;

    std::size_t input_size() const { return kStateComponents + 2 + uavs + vessels + 2; }
};

struct Policy {
    std::variant<TabularModel, ApproxModel> model;
    std::uint64_t config_hash = 0;

    AgentKind kind() const;
};

/// Builds one network input row.
void candidate_input(const ApproxModel& model, const StateComponents& encoded_state,
                     const SlotPlanner& planner, const Candidate& c, std::vector<double>& out);

/// Nearest feasible UAV for local execution, else nearest UAV relaying to its
/// nearest available vessel; tasks with no placement are deferred.
Action greedy_policy(const Environment& env);

/// Uniform over feasible placements per task.
Action random_policy(const Environment& env, Rng& rng);

/// Per-slot decision maker driven by run_episode.
class Controller {
public:
    virtual ~Controller() = default;
    virtual Action act(const Environment& env) = 0;
    virtual void observe(const Environment&, const StepOutcome&) {}
    virtual void end_episode() {}
};

class GreedyController final : public Controller {
public:
    Action act(const Environment& env) override { return greedy_policy(env); }
};

class RandomController final : public Controller {
public:
    explicit RandomController(std::uint64_t seed) : rng_(seed) {}
    Action act(const Environment& env) override { return random_policy(env, rng_); }

private:
    Rng rng_;
};

/// Thrown when a network update produces a non-finite loss.
class NonFiniteLoss : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Per-task Q-learning. Each MIoT's decision is one transition whose reward
/// is that MIoT's negated drift-plus-penalty; it is completed when the MIoT
/// next decides (bootstrapping over that decision's feasible candidates) or
/// at episode end (terminal).
class QController : public Controller {
public:
    QController(const AgentConfig& cfg, std::uint64_t seed);

    /// learning = false freezes the model and the encoder.
    void set_mode(bool learning, double epsilon);
    bool learning() const { return learning_; }

    Action act(const Environment& env) override;
    void observe(const Environment& env, const StepOutcome& outcome) override;
    void end_episode() override;

    std::size_t updates() const { return updates_; }
    double last_loss() const { return last_loss_; }

protected:
    struct Pending {
        std::size_t miot = 0;
        std::size_t state = 0;           // tabular
        std::size_t action = 0;          // lattice index (tabular)
        std::vector<double> input;       // network input (approx)
        double reward = 0.0;
        bool rewarded = false;
    };

    virtual void prepare_state(const Environment& env, std::size_t miot) = 0;
    virtual void score(const SlotPlanner& planner, std::size_t task_idx,
                       const std::vector<Candidate>& cands, std::vector<double>& scores) = 0;
    virtual void record(const SlotPlanner& planner, std::size_t task_idx, const Candidate& chosen,
                        Pending& p) = 0;
    /// next_scores empty means terminal.
    virtual void update(const Pending& p, std::span<const double> next_scores,
                        std::span<const Candidate> next_cands) = 0;

    AgentConfig cfg_;
    Rng rng_;
    bool learning_ = true;
    double epsilon_ = 0.1;
    std::size_t updates_ = 0;
    double last_loss_ = 0.0;

private:
    void complete_pending(std::size_t miot, std::span<const double> next_scores,
                          std::span<const Candidate> next_cands);

    std::vector<Pending> pending_;
};

class TabularController final : public QController {
public:
    TabularController(const AgentConfig& cfg, std::uint64_t seed, TabularModel model);

    const TabularModel& model() const { return model_; }
    TabularModel& model() { return model_; }

protected:
    void prepare_state(const Environment& env, std::size_t miot) override;
    void score(const SlotPlanner& planner, std::size_t task_idx, const std::vector<Candidate>& cands,
               std::vector<double>& scores) override;
    void record(const SlotPlanner& planner, std::size_t task_idx, const Candidate& chosen,
                Pending& p) override;
    void update(const Pending& p, std::span<const double> next_scores,
                std::span<const Candidate> next_cands) override;

private:
    TabularModel model_;
    std::size_t current_state_ = 0;
};

class ApproxController final : public QController {
public:
    ApproxController(const AgentConfig& cfg, std::uint64_t seed, ApproxModel model);

    const ApproxModel& model() const { return model_; }

protected:
    void prepare_state(const Environment& env, std::size_t miot) override;
    void score(const SlotPlanner& planner, std::size_t task_idx, const std::vector<Candidate>& cands,
               std::vector<double>& scores) override;
    void record(const SlotPlanner& planner, std::size_t task_idx, const Candidate& chosen,
                Pending& p) override;
    void update(const Pending& p, std::span<const double> next_scores,
                std::span<const Candidate> next_cands) override;

private:
    ApproxModel model_;
    StateComponents current_{};
    MlpScratch scratch_;
    std::vector<double> row_;
};

} // namespace mecsim
