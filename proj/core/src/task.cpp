#include "kdlab/task.hpp"

#include <cmath>
#include <stdexcept>

namespace kdlab {

double Task::reward_by_id(std::size_t state_id, int a) const {
    if (a < 0 || static_cast<std::size_t>(a) >= vocab.size())
        throw TokenOutOfRangeError("action index out of range");
    const std::size_t cell = state_id * vocab.size() + static_cast<std::size_t>(a);
    if (cell >= reward_table.size())
        throw std::out_of_range("reward lookup past table end");
    return reward_table[cell];
}

double Task::reward(const Prefix& p, int a) const {
    if (p.length() >= horizon)
        throw HorizonExceededError("reward requested past the horizon");
    return reward_by_id(states->id_of(p), a);
}

Task make_task(std::string name, Vocabulary vocab, std::size_t horizon,
               numvec input_dist, const RewardFn& reward,
               const TeacherFactory& teacher_factory,
               std::shared_ptr<const StateIndex> prebuilt) {
    vocab.validate();
    if (horizon == 0) throw std::invalid_argument("horizon must be positive");
    if (input_dist.size() != vocab.input_count())
        throw std::invalid_argument("input distribution has wrong size");
    double mass = 0.0;
    for (double p : input_dist) {
        if (!(p >= 0.0) || !std::isfinite(p))
            throw std::invalid_argument("input distribution has bad entries");
        mass += p;
    }
    if (std::abs(mass - 1.0) > 1e-9)
        throw std::invalid_argument("input distribution does not sum to 1");

    auto states =
        prebuilt ? std::move(prebuilt) : build_state_index(vocab, horizon);
    if (states->n_inputs() != vocab.input_count() ||
        states->n_tokens() != vocab.size() || states->horizon() != horizon)
        throw std::invalid_argument("prebuilt state index disagrees with task");
    auto features = build_feature_map(vocab, horizon);

    const std::size_t V = vocab.size();
    const std::size_t n = states->decision_state_count();
    numvec reward_table(n * V);
    double r_max = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
        const Prefix p = states->prefix_of(s);
        for (std::size_t a = 0; a < V; ++a) {
            const double r = reward(p, static_cast<int>(a));
            if (!std::isfinite(r))
                throw NonFiniteError("reward function returned a non-finite value");
            reward_table[s * V + a] = r;
            r_max = std::max(r_max, std::abs(r));
        }
    }

    Policy teacher = teacher_factory(states, features);
    if (teacher.shape().n_tokens != V)
        throw std::invalid_argument("teacher token count disagrees with task");
    return Task{std::move(name),         std::move(vocab),
                horizon,                 std::move(input_dist),
                std::move(states),       std::move(features),
                std::move(reward_table), std::move(teacher),
                r_max};
}

Prefix step(const Task& task, const Prefix& p, int a) {
    if (a < 0 || static_cast<std::size_t>(a) >= task.vocab.size())
        throw TokenOutOfRangeError("action index out of range");
    if (p.length() >= task.horizon)
        throw HorizonExceededError("stepping past the horizon");
    Prefix next = p;
    next.generated.push_back(a);
    return next;
}

std::size_t sample_input(const Task& task, RandomStream& rng) {
    return rng.categorical(task.input_dist);
}

Trajectory rollout(const Task& task, const Policy& pol, std::size_t input,
                   RandomStream& rng, SourceTag source) {
    if (input >= task.vocab.input_count())
        throw TokenOutOfRangeError("input symbol index out of range");
    Trajectory tr;
    tr.input = input;
    tr.source = source;
    tr.actions.reserve(task.horizon);
    tr.rewards.reserve(task.horizon);
    Prefix p;
    p.input = input;
    for (std::size_t t = 0; t < task.horizon; ++t) {
        const numvec probs = pol.action_probs(p);
        const int a = static_cast<int>(rng.categorical(probs));
        tr.rewards.push_back(task.reward(p, a));
        tr.actions.push_back(a);
        p.generated.push_back(a);
    }
    return tr;
}

Trajectory rollout(const Task& task, const Policy& pol, RandomStream& rng,
                   SourceTag source) {
    return rollout(task, pol, sample_input(task, rng), rng, source);
}

Dataset generate_dataset(const Task& task, std::size_t n, RandomStream& rng) {
    if (n == 0) throw std::invalid_argument("generate_dataset: n must be positive");
    Dataset data;
    data.provenance = Dataset::Provenance::teacher_sampled;
    data.trajectories.reserve(n);
    const std::uint64_t master = rng.next_u64();
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream stream = RandomStream::derived(master, i);
        data.trajectories.push_back(
            rollout(task, task.teacher, stream, SourceTag::dataset));
    }
    return data;
}

}  // namespace kdlab
