#include "kdlab/objectives.hpp"

#include <cmath>
#include <limits>

#include "kdlab/gradients.hpp"
#include "kdlab/oracle.hpp"

namespace kdlab {

std::string to_string(Method m) {
    switch (m) {
        case Method::mm: return "mm";
        case Method::kl: return "kl";
        case Method::rkl: return "rkl";
        case Method::js: return "js";
        case Method::tv: return "tv";
        case Method::sft: return "sft";
    }
    throw std::invalid_argument("bad Method");
}

Method method_from_string(const std::string& s) {
    if (s == "mm") return Method::mm;
    if (s == "kl") return Method::kl;
    if (s == "rkl") return Method::rkl;
    if (s == "js") return Method::js;
    if (s == "tv") return Method::tv;
    if (s == "sft") return Method::sft;
    throw std::invalid_argument("bad method: " + s);
}

std::string to_string(Mode m) {
    switch (m) {
        case Mode::off: return "off";
        case Mode::on: return "on";
        case Mode::joint: return "joint";
    }
    throw std::invalid_argument("bad Mode");
}

Mode mode_from_string(const std::string& s) {
    if (s == "off") return Mode::off;
    if (s == "on") return Mode::on;
    if (s == "joint") return Mode::joint;
    throw std::invalid_argument("bad mode: " + s);
}

namespace {

void check_trajectory(const Task& task, const Trajectory& tr) {
    if (tr.actions.size() != task.horizon)
        throw HorizonExceededError("trajectory length != task horizon");
}

}  // namespace

double u_off(const Task& task, const Trajectory& tr, const QFunction& f,
             const Policy& student) {
    if (tr.source == SourceTag::student)
        throw std::invalid_argument(
            "u_off needs teacher or dataset trajectories");
    check_trajectory(task, tr);
    const std::size_t V = task.vocab.size();
    numvec terms(task.horizon);
    Prefix p;
    p.input = tr.input;
    for (std::size_t t = 0; t < task.horizon; ++t) {
        const numvec probs = student.action_probs(p);
        double expected = 0.0;
        for (std::size_t y = 0; y < V; ++y)
            expected += probs[y] * f.value(p, static_cast<int>(y));
        terms[t] = f.value(p, tr.actions[t]) - expected;
        p.generated.push_back(tr.actions[t]);
    }
    return pairwise_sum(terms);
}

double u_on(const Task& task, const Trajectory& tr, const QFunction& f,
            const Policy& teacher) {
    if (tr.source != SourceTag::student)
        throw std::invalid_argument("u_on needs student trajectories");
    check_trajectory(task, tr);
    const std::size_t V = task.vocab.size();
    numvec terms(task.horizon);
    Prefix p;
    p.input = tr.input;
    for (std::size_t t = 0; t < task.horizon; ++t) {
        const numvec probs = teacher.action_probs(p);
        double expected = 0.0;
        for (std::size_t y = 0; y < V; ++y)
            expected += probs[y] * f.value(p, static_cast<int>(y));
        terms[t] = expected - f.value(p, tr.actions[t]);
        p.generated.push_back(tr.actions[t]);
    }
    return pairwise_sum(terms);
}

double adversarial_loss(const Task& task, const Policy& student,
                        const QFunction& f1, const QFunction& f2,
                        std::span<const Trajectory> batch_off,
                        std::span<const Trajectory> batch_on) {
    if (batch_off.empty() || batch_on.empty())
        throw std::invalid_argument("adversarial_loss needs both batches");
    numvec off_terms(batch_off.size());
    for (std::size_t i = 0; i < batch_off.size(); ++i)
        off_terms[i] = u_off(task, batch_off[i], f1, student);
    numvec on_terms(batch_on.size());
    for (std::size_t i = 0; i < batch_on.size(); ++i)
        on_terms[i] = u_on(task, batch_on[i], f2, task.teacher);
    return pairwise_sum(off_terms) / static_cast<double>(batch_off.size()) +
           pairwise_sum(on_terms) / static_cast<double>(batch_on.size());
}

namespace {

constexpr double inf = std::numeric_limits<double>::infinity();

void check_step_inputs(std::span<const double> p, std::span<const double> q) {
    if (p.size() != q.size() || p.empty())
        throw std::invalid_argument("distributions differ in size");
    for (std::size_t i = 0; i < p.size(); ++i) {
        if (!std::isfinite(p[i]) || !std::isfinite(q[i]) || p[i] < 0.0 ||
            q[i] < 0.0)
            throw std::invalid_argument("distributions need finite nonnegative entries");
    }
}

}  // namespace

double step_distance(Method kind, std::span<const double> p,
                     std::span<const double> q) {
    check_step_inputs(p, q);
    switch (kind) {
        case Method::kl: {
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                if (p[i] == 0.0) continue;  // 0 log 0 = 0
                if (q[i] == 0.0) return inf;
                acc += p[i] * std::log(p[i] / q[i]);
            }
            return acc;
        }
        case Method::rkl: return step_distance(Method::kl, q, p);
        case Method::js: {
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i) {
                const double m = 0.5 * (p[i] + q[i]);
                if (p[i] > 0.0) acc += 0.5 * p[i] * std::log(p[i] / m);
                if (q[i] > 0.0) acc += 0.5 * q[i] * std::log(q[i] / m);
            }
            return acc;
        }
        case Method::tv: {
            double acc = 0.0;
            for (std::size_t i = 0; i < p.size(); ++i)
                acc += std::abs(p[i] - q[i]);
            return acc;
        }
        case Method::mm:
        case Method::sft:
            throw std::invalid_argument(to_string(kind) +
                                        " is not a step-wise distance");
    }
    throw std::invalid_argument("bad Method");
}

numvec step_distance_grad(Method kind, std::span<const double> p,
                          std::span<const double> q) {
    check_step_inputs(p, q);
    numvec g(q.size(), 0.0);
    switch (kind) {
        case Method::kl:
            for (std::size_t i = 0; i < q.size(); ++i) {
                if (p[i] == 0.0) continue;
                g[i] = q[i] == 0.0 ? -inf : -p[i] / q[i];
            }
            return g;
        case Method::rkl:
            for (std::size_t i = 0; i < q.size(); ++i) {
                if (q[i] == 0.0)
                    // lim_{q->0} d/dq q log(q/p) = -inf for p > 0
                    g[i] = p[i] > 0.0 ? -inf : inf;
                else
                    g[i] = p[i] == 0.0 ? inf : std::log(q[i] / p[i]) + 1.0;
            }
            return g;
        case Method::js:
            for (std::size_t i = 0; i < q.size(); ++i) {
                const double m = 0.5 * (p[i] + q[i]);
                if (q[i] == 0.0)
                    g[i] = m == 0.0 ? 0.0 : -inf;
                else
                    g[i] = 0.5 * std::log(q[i] / m);
            }
            return g;
        case Method::tv:
            for (std::size_t i = 0; i < q.size(); ++i) {
                if (p[i] > q[i]) g[i] = -1.0;
                else if (p[i] < q[i]) g[i] = 1.0;
            }
            return g;
        case Method::mm:
        case Method::sft:
            throw std::invalid_argument(to_string(kind) +
                                        " is not a step-wise distance");
    }
    throw std::invalid_argument("bad Method");
}

namespace {

double summed_step_distance(const Task& task, Method kind,
                            const Trajectory& tr, const Policy& student) {
    numvec terms(task.horizon);
    Prefix p;
    p.input = tr.input;
    for (std::size_t t = 0; t < task.horizon; ++t) {
        terms[t] = step_distance(kind, task.teacher.action_probs(p),
                                 student.action_probs(p));
        p.generated.push_back(tr.actions[t]);
    }
    return pairwise_sum(terms);
}

double one_mode_policy_distance(const Task& task, Method kind, Mode mode,
                                const Policy& student, std::size_t n_traj,
                                RandomStream& rng) {
    const Policy& sampler = mode == Mode::off ? task.teacher : student;
    const SourceTag tag =
        mode == Mode::off ? SourceTag::teacher : SourceTag::student;
    const std::uint64_t master = rng.next_u64();
    numvec vals(n_traj);
    for (std::size_t i = 0; i < n_traj; ++i) {
        RandomStream stream = RandomStream::derived(master, i);
        const Trajectory tr = rollout(task, sampler, stream, tag);
        vals[i] = summed_step_distance(task, kind, tr, student);
    }
    return pairwise_sum(vals) / static_cast<double>(n_traj);
}

}  // namespace

double policy_distance(const Task& task, Method kind, Mode mode,
                       const Policy& student, std::size_t n_traj,
                       RandomStream& rng) {
    if (n_traj == 0) throw std::invalid_argument("need at least one trajectory");
    if (mode == Mode::joint)
        return one_mode_policy_distance(task, kind, Mode::off, student, n_traj,
                                        rng) +
               one_mode_policy_distance(task, kind, Mode::on, student, n_traj,
                                        rng);
    return one_mode_policy_distance(task, kind, mode, student, n_traj, rng);
}

namespace {

/// E over mode trajectories of sum_t [E_teacher f - E_student f].
double mm_functional(const Task& task, Mode mode, const Policy& student,
                     const QFunction& f, const AdversarialBudget& budget,
                     RandomStream& rng) {
    const std::size_t V = task.vocab.size();
    const auto state_term = [&](const Prefix& p) {
        const numvec pt = task.teacher.action_probs(p);
        const numvec ps = student.action_probs(p);
        double acc = 0.0;
        for (std::size_t y = 0; y < V; ++y)
            acc += (pt[y] - ps[y]) * f.value(p, static_cast<int>(y));
        return acc;
    };
    if (budget.exact_eval) {
        const Policy& sampler = mode == Mode::off ? task.teacher : student;
        const ExactSolution sol = exact_solve(task, sampler, budget.cap);
        const std::size_t n = task.states->decision_state_count();
        numvec terms;
        terms.reserve(n);
        for (std::size_t s = 0; s < n; ++s) {
            const double mass = sol.state_occupancy[s];
            if (mass == 0.0) continue;
            terms.push_back(mass * state_term(task.states->prefix_of(s)));
        }
        return pairwise_sum(terms);
    }
    const Policy& sampler = mode == Mode::off ? task.teacher : student;
    const SourceTag tag =
        mode == Mode::off ? SourceTag::teacher : SourceTag::student;
    const std::uint64_t master = rng.next_u64();
    numvec vals(budget.n_eval_traj);
    for (std::size_t i = 0; i < budget.n_eval_traj; ++i) {
        RandomStream stream = RandomStream::derived(master, i);
        const Trajectory tr = rollout(task, sampler, stream, tag);
        numvec terms(task.horizon);
        for (std::size_t t = 0; t < task.horizon; ++t)
            terms[t] = state_term(tr.prefix_at(t));
        vals[i] = pairwise_sum(terms);
    }
    return pairwise_sum(vals) / static_cast<double>(budget.n_eval_traj);
}

QFunction fresh_ascent_critic(const Task& task, const AdversarialBudget& budget,
                              RandomStream& rng) {
    const BoundMode bound = BoundMode::tanh_bounded(budget.bound);
    switch (budget.critic_kind) {
        case QKind::tabular: return QFunction::tabular(task.states, bound);
        case QKind::linear_head:
            return QFunction::linear(task.features, bound, rng);
        case QKind::mlp_head:
            return QFunction::mlp(task.features, budget.hidden_dim, bound, rng);
    }
    throw std::invalid_argument("bad QKind");
}

}  // namespace

MmResult mm_distance(const Task& task, Mode mode, const Policy& student,
                     const AdversarialBudget& budget, RandomStream& rng) {
    if (mode == Mode::joint)
        throw std::invalid_argument("mm_distance is defined per mode");
    if (!(budget.bound > 0.0))
        throw std::invalid_argument("critic bound must be positive");
    switch (budget.maximizer) {
        case MmMaximizer::closed_form_box: {
            const Policy& sampler = mode == Mode::off ? task.teacher : student;
            const ExactSolution sol = exact_solve(task, sampler, budget.cap);
            const std::size_t V = task.vocab.size();
            const std::size_t n = task.states->decision_state_count();
            numvec cells(n * V, 0.0);
            numvec terms;
            terms.reserve(n);
            for (std::size_t s = 0; s < n; ++s) {
                const double mass = sol.state_occupancy[s];
                if (mass == 0.0) continue;
                const Prefix p = task.states->prefix_of(s);
                const numvec pt = task.teacher.action_probs(p);
                const numvec ps = student.action_probs(p);
                double acc = 0.0;
                for (std::size_t y = 0; y < V; ++y) {
                    const double coeff = mass * (pt[y] - ps[y]);
                    acc += budget.bound * std::abs(coeff);
                    if (coeff > 0.0) cells[s * V + y] = budget.bound;
                    else if (coeff < 0.0) cells[s * V + y] = -budget.bound;
                }
                terms.push_back(acc);
            }
            QFunction critic = QFunction::tabular_from_values(
                task.states, std::move(cells), BoundMode::unbounded());
            const double value = pairwise_sum(terms);
            return {value, std::move(critic)};
        }
        case MmMaximizer::gradient_ascent: {
            QFunction critic = fresh_ascent_critic(task, budget, rng);
            const Policy& sampler = mode == Mode::off ? task.teacher : student;
            const SourceTag tag =
                mode == Mode::off ? SourceTag::teacher : SourceTag::student;
            numvec grad(critic.shape().param_count());
            for (std::size_t it = 0; it < budget.ascent_steps; ++it) {
                const Trajectory tr = rollout(task, sampler, rng, tag);
                std::fill(grad.begin(), grad.end(), 0.0);
                if (mode == Mode::off)
                    add_critic_grad_off(task, tr, student, critic, 1.0, grad);
                else
                    add_critic_grad_on(task, tr, task.teacher, critic, 1.0, grad);
                critic.axpy_params(budget.ascent_lr, grad);
            }
            const double value =
                mm_functional(task, mode, student, critic, budget, rng);
            return {value, std::move(critic)};
        }
        case MmMaximizer::fixed_critic: {
            if (!budget.fixed)
                throw std::invalid_argument("fixed_critic needs a critic");
            QFunction critic = *budget.fixed;
            const double value =
                mm_functional(task, mode, student, critic, budget, rng);
            return {value, std::move(critic)};
        }
    }
    throw std::invalid_argument("bad MmMaximizer");
}

}  // namespace kdlab
