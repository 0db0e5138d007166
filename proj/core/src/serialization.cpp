#include "kdlab/serialization.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace kdlab {

namespace {

using nlohmann::json;

json policy_to_json_obj(const Policy& pol) {
    const PolicyShape& s = pol.shape();
    json j;
    j["schema"] = "kdlab.policy.v1";
    j["kind"] = to_string(s.kind);
    j["n_tokens"] = s.n_tokens;
    j["n_states"] = s.n_states;
    j["feature_dim"] = s.feature_dim;
    j["hidden_dim"] = s.hidden_dim;
    j["values"] = numvec(pol.params().begin(), pol.params().end());
    return j;
}

Policy policy_from_json_obj(const json& j,
                            std::shared_ptr<const StateIndex> states,
                            std::shared_ptr<const FeatureMap> features) {
    if (j.value("schema", "") != "kdlab.policy.v1")
        throw std::invalid_argument("not a policy checkpoint");
    const PolicyKind kind = policy_kind_from_string(j.at("kind"));
    const std::size_t n_tokens = j.at("n_tokens");
    numvec values = j.at("values").get<numvec>();
    Policy pol = [&] {
        switch (kind) {
            case PolicyKind::tabular_softmax:
                return Policy::tabular(states, n_tokens);
            case PolicyKind::linear_softmax:
                return Policy::linear(features, n_tokens);
            case PolicyKind::mlp: {
                RandomStream rng(0);
                return Policy::mlp(features, n_tokens,
                                   j.at("hidden_dim").get<std::size_t>(), rng);
            }
        }
        throw std::invalid_argument("bad PolicyKind");
    }();
    pol.set_params(std::move(values));  // validates the size
    return pol;
}

json critic_to_json_obj(const QFunction& f) {
    const QShape& s = f.shape();
    json j;
    j["schema"] = "kdlab.critic.v1";
    j["kind"] = to_string(s.kind);
    j["n_tokens"] = s.n_tokens;
    j["n_states"] = s.n_states;
    j["feature_dim"] = s.feature_dim;
    j["hidden_dim"] = s.hidden_dim;
    j["bounded"] = f.bound_mode().bounded;
    j["bound"] = f.bound_mode().bound;
    j["values"] = numvec(f.params().begin(), f.params().end());
    return j;
}

QFunction critic_from_json_obj(const json& j,
                               std::shared_ptr<const StateIndex> states,
                               std::shared_ptr<const FeatureMap> features) {
    if (j.value("schema", "") != "kdlab.critic.v1")
        throw std::invalid_argument("not a critic checkpoint");
    const QKind kind = q_kind_from_string(j.at("kind"));
    const BoundMode bound = j.at("bounded").get<bool>()
                                ? BoundMode::tanh_bounded(j.at("bound"))
                                : BoundMode::unbounded();
    numvec values = j.at("values").get<numvec>();
    RandomStream rng(0);
    QFunction f = [&] {
        switch (kind) {
            case QKind::tabular: return QFunction::tabular(states, bound);
            case QKind::linear_head:
                return QFunction::linear(features, bound, rng);
            case QKind::mlp_head:
                return QFunction::mlp(features,
                                      j.at("hidden_dim").get<std::size_t>(),
                                      bound, rng);
        }
        throw std::invalid_argument("bad QKind");
    }();
    f.set_params(std::move(values));
    return f;
}

json task_to_json_obj(const Task& task) {
    json j;
    j["schema"] = "kdlab.task.v1";
    j["name"] = task.name;
    j["tokens"] = task.vocab.tokens;
    j["input_symbols"] = task.vocab.input_symbols;
    j["horizon"] = task.horizon;
    j["input_dist"] = task.input_dist;
    json rewards = json::object();
    const std::size_t V = task.vocab.size();
    for (std::size_t s = 0; s < task.states->decision_state_count(); ++s) {
        const Prefix p = task.states->prefix_of(s);
        numvec row(V);
        for (std::size_t a = 0; a < V; ++a)
            row[a] = task.reward_by_id(s, static_cast<int>(a));
        rewards[p.encode()] = row;
    }
    j["rewards"] = rewards;
    j["teacher"] = policy_to_json_obj(task.teacher);
    return j;
}

}  // namespace

std::string task_to_json(const Task& task) {
    return task_to_json_obj(task).dump(2) + "\n";
}

Task task_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.value("schema", "") != "kdlab.task.v1")
        throw std::invalid_argument("not a task document");
    Vocabulary vocab;
    vocab.tokens = j.at("tokens").get<std::vector<std::string>>();
    vocab.input_symbols = j.at("input_symbols").get<std::vector<std::string>>();
    const std::size_t horizon = j.at("horizon");
    auto states = build_state_index(vocab, horizon);

    const json& rewards = j.at("rewards");
    const RewardFn reward = [&](const Prefix& p, int a) {
        const auto it = rewards.find(p.encode());
        if (it == rewards.end())
            throw std::invalid_argument("reward table misses prefix " +
                                        p.encode());
        return it->at(static_cast<std::size_t>(a)).get<double>();
    };
    const json teacher_obj = j.at("teacher");
    const TeacherFactory teacher =
        [&](std::shared_ptr<const StateIndex> idx,
            std::shared_ptr<const FeatureMap> features) {
            return policy_from_json_obj(teacher_obj, std::move(idx),
                                        std::move(features));
        };
    return make_task(j.at("name"), vocab, horizon,
                     j.at("input_dist").get<numvec>(), reward, teacher, states);
}

std::string policy_to_json(const Policy& pol) {
    return policy_to_json_obj(pol).dump(2) + "\n";
}

Policy policy_from_json(const std::string& text, const Task& task) {
    return policy_from_json_obj(json::parse(text), task.states, task.features);
}

std::string critic_to_json(const QFunction& f) {
    return critic_to_json_obj(f).dump(2) + "\n";
}

QFunction critic_from_json(const std::string& text, const Task& task) {
    return critic_from_json_obj(json::parse(text), task.states, task.features);
}

std::string certification_instance_json(const Task& task,
                                        const Policy& student) {
    json j;
    j["task"] = task_to_json_obj(task);
    j["student"] = policy_to_json_obj(student);
    return j.dump(2) + "\n";
}

std::string read_text_file(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("cannot open " + path);
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path);
    out << content;
    if (!out) throw std::runtime_error("write failed for " + path);
}

}  // namespace kdlab
