#include "kdlab/fixtures.hpp"

#include <algorithm>
#include <cmath>

namespace kdlab {

namespace {

constexpr std::uint64_t fixture_b_teacher_seed = 181181;

Task make_fixture_a() {
    Vocabulary vocab;
    vocab.tokens = {"a", "b"};
    vocab.input_symbols = {"x0"};
    const RewardFn reward = [](const Prefix&, int a) {
        return a == 0 ? 1.0 : 0.0;
    };
    const TeacherFactory teacher = [](std::shared_ptr<const StateIndex> states,
                                      std::shared_ptr<const FeatureMap>) {
        // softmax(ln 9, 0) = (0.9, 0.1)
        return Policy::tabular_from_logits(std::move(states), 2,
                                           {std::log(9.0), 0.0});
    };
    return make_task("FIXTURE-A", vocab, 1, {1.0}, reward, teacher);
}

Task make_fixture_b() {
    Vocabulary vocab;
    vocab.tokens = {"t0", "t1", "t2", "t3"};
    vocab.input_symbols = {"x0", "x1"};
    const std::size_t horizon = 3;
    auto states = build_state_index(vocab, horizon);
    const std::size_t V = vocab.size();

    RandomStream rng(fixture_b_teacher_seed);
    numvec logits(states->decision_state_count() * V);
    for (double& v : logits) v = rng.uniform(-2.0, 2.0);

    const auto argmax_at = [&](std::size_t state_id) {
        const double* row = logits.data() + state_id * V;
        return static_cast<int>(std::max_element(row, row + V) - row);
    };
    const RewardFn reward = [&](const Prefix& p, int a) {
        return a == argmax_at(states->id_of(p)) ? 1.0 : 0.0;
    };
    const TeacherFactory teacher = [&](std::shared_ptr<const StateIndex> idx,
                                       std::shared_ptr<const FeatureMap>) {
        return Policy::tabular_from_logits(std::move(idx), V, logits);
    };
    return make_task("FIXTURE-B", vocab, horizon, {0.5, 0.5}, reward, teacher,
                     states);
}

}  // namespace

Task make_fixture_task(const std::string& name) {
    if (name == "FIXTURE-A") return make_fixture_a();
    if (name == "FIXTURE-B") return make_fixture_b();
    throw UnknownFixtureError("unknown fixture: " + name);
}

Policy default_student(const Task& task) {
    if (task.name == "FIXTURE-A") {
        // softmax(ln 1.5, 0) = (0.6, 0.4)
        return Policy::tabular_from_logits(task.states, task.vocab.size(),
                                           {std::log(1.5), 0.0});
    }
    return Policy::tabular(task.states, task.vocab.size());
}

Policy make_student(const Task& task, PolicyKind kind, std::uint64_t seed) {
    switch (kind) {
        case PolicyKind::tabular_softmax:
            return Policy::tabular(task.states, task.vocab.size());
        case PolicyKind::linear_softmax:
            return Policy::linear(task.features, task.vocab.size());
        case PolicyKind::mlp: {
            RandomStream rng = RandomStream::derived(seed, 0xA11CE);
            return Policy::mlp(task.features, task.vocab.size(), 16, rng);
        }
    }
    throw std::invalid_argument("bad PolicyKind");
}

QFunction make_critic(const Task& task, QKind kind, double bound,
                      std::size_t hidden, std::uint64_t seed) {
    const BoundMode mode =
        bound > 0.0 ? BoundMode::tanh_bounded(bound) : BoundMode::unbounded();
    RandomStream rng = RandomStream::derived(seed, 0xC417);
    switch (kind) {
        case QKind::tabular: return QFunction::tabular(task.states, mode);
        case QKind::linear_head:
            return QFunction::linear(task.features, mode, rng);
        case QKind::mlp_head:
            return QFunction::mlp(task.features, hidden, mode, rng);
    }
    throw std::invalid_argument("bad QKind");
}

}  // namespace kdlab
