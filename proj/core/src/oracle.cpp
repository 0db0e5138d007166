#include "kdlab/oracle.hpp"

#include <cmath>

#include "kdlab/serialization.hpp"

namespace kdlab {

void check_enumeration_cap(const Task& task, std::size_t cap) {
    const std::size_t V = task.vocab.size();
    std::size_t count = task.vocab.input_count();
    for (std::size_t t = 0; t < task.horizon; ++t) {
        if (count > cap / V)
            throw CapExceededError("task has more than " + std::to_string(cap) +
                                   " trajectories");
        count *= V;
    }
    if (count > cap)
        throw CapExceededError("task has more than " + std::to_string(cap) +
                               " trajectories");
}

ExactSolution exact_solve(const Task& task, const Policy& pol,
                          std::size_t cap) {
    check_enumeration_cap(task, cap);
    const StateIndex& idx = *task.states;
    const std::size_t V = task.vocab.size();
    const std::size_t T = task.horizon;

    ExactSolution sol;
    sol.v.assign(idx.total_state_count(), 0.0);
    sol.q.assign(idx.decision_state_count() * V, 0.0);
    sol.state_occupancy.assign(idx.total_state_count(), 0.0);
    sol.cell_occupancy.assign(idx.decision_state_count() * V, 0.0);

    for (std::size_t t = T; t-- > 0;) {
        const std::size_t begin = idx.level_begin(t);
        const std::size_t count = idx.level_count(t);
        for (std::size_t s = begin; s < begin + count; ++s) {
            const Prefix p = idx.prefix_of(s);
            const numvec probs = pol.action_probs(p);
            double value = 0.0;
            for (std::size_t a = 0; a < V; ++a) {
                const double q = task.reward_by_id(s, static_cast<int>(a)) +
                                 sol.v[idx.child(s, static_cast<int>(a))];
                sol.q[s * V + a] = q;
                value += probs[a] * q;
            }
            sol.v[s] = value;
        }
    }
    numvec j_terms(task.vocab.input_count());
    for (std::size_t x = 0; x < task.vocab.input_count(); ++x) {
        const std::size_t root = idx.level_begin(0) + x;
        sol.state_occupancy[root] = task.input_dist[x];
        j_terms[x] = task.input_dist[x] * sol.v[root];
    }
    sol.j_value = pairwise_sum(j_terms);

    for (std::size_t t = 0; t < T; ++t) {
        const std::size_t begin = idx.level_begin(t);
        const std::size_t count = idx.level_count(t);
        for (std::size_t s = begin; s < begin + count; ++s) {
            const double mass = sol.state_occupancy[s];
            if (mass == 0.0) continue;
            const numvec probs = pol.action_probs(idx.prefix_of(s));
            for (std::size_t a = 0; a < V; ++a) {
                const double m = mass * probs[a];
                sol.cell_occupancy[s * V + a] = m;
                sol.state_occupancy[idx.child(s, static_cast<int>(a))] += m;
            }
        }
    }
    return sol;
}

QFunction exact_q(const Task& task, const Policy& pol, std::size_t cap) {
    ExactSolution sol = exact_solve(task, pol, cap);
    return QFunction::tabular_from_values(task.states, std::move(sol.q),
                                          BoundMode::unbounded());
}

void for_each_trajectory(
    const Task& task, const Policy& pol, SourceTag source, std::size_t cap,
    const std::function<void(const Trajectory&, double)>& fn) {
    check_enumeration_cap(task, cap);
    const std::size_t V = task.vocab.size();
    const std::size_t T = task.horizon;
    Trajectory tr;
    tr.source = source;
    tr.actions.assign(T, 0);
    tr.rewards.assign(T, 0.0);

    // DFS over the action tree, carrying the running probability.
    std::vector<numvec> prob_stack(T);
    const std::function<void(Prefix&, double, std::size_t)> walk =
        [&](Prefix& p, double prob, std::size_t t) {
            if (t == T) {
                fn(tr, prob);
                return;
            }
            prob_stack[t] = pol.action_probs(p);
            for (std::size_t a = 0; a < V; ++a) {
                const double pa = prob_stack[t][a];
                tr.actions[t] = static_cast<int>(a);
                tr.rewards[t] = task.reward(p, static_cast<int>(a));
                p.generated.push_back(static_cast<int>(a));
                walk(p, prob * pa, t + 1);
                p.generated.pop_back();
            }
        };

    for (std::size_t x = 0; x < task.vocab.input_count(); ++x) {
        if (task.input_dist[x] == 0.0) continue;
        Prefix p;
        p.input = x;
        tr.input = x;
        walk(p, task.input_dist[x], 0);
    }
}

double exact_j(const Task& task, const Policy& pol, std::size_t cap) {
    std::vector<double> terms;
    for_each_trajectory(task, pol, SourceTag::dataset, cap,
                        [&](const Trajectory& tr, double prob) {
                            terms.push_back(prob * trajectory_return(tr));
                        });
    return pairwise_sum(terms);
}

double exact_gap(const Task& task, const Policy& student, std::size_t cap) {
    return exact_solve(task, task.teacher, cap).j_value -
           exact_solve(task, student, cap).j_value;
}

namespace {

double occupancy_weighted(const Task& task, const numvec& occupancy,
                          const std::function<double(std::size_t s)>& term) {
    const std::size_t n = task.states->decision_state_count();
    numvec terms;
    terms.reserve(n);
    for (std::size_t s = 0; s < n; ++s) {
        const double mass = occupancy[s];
        if (mass == 0.0) continue;
        terms.push_back(mass * term(s));
    }
    return pairwise_sum(terms);
}

double one_mode_distance(const Task& task, Method kind, Mode mode,
                         const Policy& student, std::size_t cap) {
    const Policy& sampler = mode == Mode::off ? task.teacher : student;
    const ExactSolution sol = exact_solve(task, sampler, cap);
    return occupancy_weighted(task, sol.state_occupancy, [&](std::size_t s) {
        const Prefix p = task.states->prefix_of(s);
        return step_distance(kind, task.teacher.action_probs(p),
                             student.action_probs(p));
    });
}

}  // namespace

double exact_distance(const Task& task, Method kind, Mode mode,
                      const Policy& student, std::size_t cap) {
    if (mode == Mode::joint)
        return one_mode_distance(task, kind, Mode::off, student, cap) +
               one_mode_distance(task, kind, Mode::on, student, cap);
    return one_mode_distance(task, kind, mode, student, cap);
}

double box_sup_mm(const Task& task, Mode mode, const Policy& student,
                  double bound, std::size_t cap) {
    if (mode == Mode::joint)
        throw std::invalid_argument("box_sup_mm is defined per mode");
    if (!(bound > 0.0)) throw std::invalid_argument("bound must be positive");
    const Policy& sampler = mode == Mode::off ? task.teacher : student;
    const ExactSolution sol = exact_solve(task, sampler, cap);
    const std::size_t V = task.vocab.size();
    // sup over the box puts f = bound * sign(occupancy * (teacher - student)),
    // so the value is bound * sum |coefficient|.
    return occupancy_weighted(task, sol.state_occupancy, [&](std::size_t s) {
        const Prefix p = task.states->prefix_of(s);
        const numvec pt = task.teacher.action_probs(p);
        const numvec ps = student.action_probs(p);
        double acc = 0.0;
        for (std::size_t y = 0; y < V; ++y) acc += std::abs(pt[y] - ps[y]);
        return bound * acc;
    });
}

double population_u_off(const Task& task, const Policy& student,
                        const QFunction& f, std::size_t cap) {
    const ExactSolution sol = exact_solve(task, task.teacher, cap);
    const std::size_t V = task.vocab.size();
    return occupancy_weighted(task, sol.state_occupancy, [&](std::size_t s) {
        const Prefix p = task.states->prefix_of(s);
        const numvec pt = task.teacher.action_probs(p);
        const numvec ps = student.action_probs(p);
        double acc = 0.0;
        for (std::size_t y = 0; y < V; ++y)
            acc += (pt[y] - ps[y]) * f.value(p, static_cast<int>(y));
        return acc;
    });
}

double population_u_on(const Task& task, const Policy& student,
                       const QFunction& f, std::size_t cap) {
    const ExactSolution sol = exact_solve(task, student, cap);
    const std::size_t V = task.vocab.size();
    return occupancy_weighted(task, sol.state_occupancy, [&](std::size_t s) {
        const Prefix p = task.states->prefix_of(s);
        const numvec pt = task.teacher.action_probs(p);
        const numvec ps = student.action_probs(p);
        double acc = 0.0;
        for (std::size_t y = 0; y < V; ++y)
            acc += (pt[y] - ps[y]) * f.value(p, static_cast<int>(y));
        return acc;
    });
}

double population_loss(const Task& task, const Policy& student,
                       const QFunction& f1, const QFunction& f2,
                       std::size_t cap) {
    return population_u_off(task, student, f1, cap) +
           population_u_on(task, student, f2, cap);
}

double population_sft_nll(const Task& task, const Policy& student,
                          std::size_t cap) {
    const ExactSolution sol = exact_solve(task, task.teacher, cap);
    const std::size_t V = task.vocab.size();
    const double per_decision = 1.0 / static_cast<double>(task.horizon);
    return per_decision *
           occupancy_weighted(task, sol.state_occupancy, [&](std::size_t s) {
               const Prefix p = task.states->prefix_of(s);
               const numvec pt = task.teacher.action_probs(p);
               const numvec ps = student.action_probs(p);
               double acc = 0.0;
               for (std::size_t y = 0; y < V; ++y)
                   if (pt[y] > 0.0) acc -= pt[y] * std::log(ps[y]);
               return acc;
           });
}

Task rescaled_unit_q(const Task& task, double* factor_out) {
    double factor = task.r_max * static_cast<double>(task.horizon);
    if (!(factor > 0.0)) factor = 1.0;
    Task scaled = task;
    for (double& r : scaled.reward_table) r /= factor;
    scaled.r_max = task.r_max / factor;
    if (factor_out) *factor_out = factor;
    return scaled;
}

namespace {

CertCheck close_check(std::string name, double lhs, double rhs, double tol) {
    CertCheck c{std::move(name), lhs, rhs, tol, false};
    c.pass = std::isfinite(lhs) && std::isfinite(rhs) &&
             std::abs(lhs - rhs) <= tol;
    return c;
}

CertCheck leq_check(std::string name, double lhs, double rhs, double tol) {
    CertCheck c{std::move(name), lhs, rhs, tol, false};
    c.pass = std::isfinite(lhs) && std::isfinite(rhs) && lhs <= rhs + tol;
    return c;
}

}  // namespace

CertificationReport certify(const Task& task, const Policy& student,
                            std::size_t cap) {
    CertificationReport report;
    report.task_name = task.name;
    const Task scaled = rescaled_unit_q(task, &report.rescale_factor);

    const ExactSolution sol_teacher = exact_solve(scaled, scaled.teacher, cap);
    const ExactSolution sol_student = exact_solve(scaled, student, cap);
    const double gap = sol_teacher.j_value - sol_student.j_value;

    report.checks.push_back(close_check("j_routes_agree_teacher",
                                        exact_j(scaled, scaled.teacher, cap),
                                        sol_teacher.j_value, 1e-12));
    report.checks.push_back(close_check("j_routes_agree_student",
                                        exact_j(scaled, student, cap),
                                        sol_student.j_value, 1e-12));

    // Gap identities, driven through the same u_off / u_on code the
    // estimators use, with the true action-value tables as critics.
    const QFunction q_student = QFunction::tabular_from_values(
        scaled.states, sol_student.q, BoundMode::unbounded());
    const QFunction q_teacher = QFunction::tabular_from_values(
        scaled.states, sol_teacher.q, BoundMode::unbounded());
    {
        std::vector<double> terms;
        for_each_trajectory(scaled, scaled.teacher, SourceTag::teacher, cap,
                            [&](const Trajectory& tr, double prob) {
                                terms.push_back(
                                    prob * u_off(scaled, tr, q_student, student));
                            });
        report.checks.push_back(
            close_check("gap_equals_expected_u_off_at_student_q",
                        pairwise_sum(terms), gap, 1e-10));
    }
    {
        std::vector<double> terms;
        for_each_trajectory(scaled, student, SourceTag::student, cap,
                            [&](const Trajectory& tr, double prob) {
                                terms.push_back(
                                    prob * u_on(scaled, tr, q_teacher,
                                                scaled.teacher));
                            });
        report.checks.push_back(
            close_check("gap_equals_expected_u_on_at_teacher_q",
                        pairwise_sum(terms), gap, 1e-10));
    }

    for (const Mode mode : {Mode::off, Mode::on}) {
        const std::string tag = to_string(mode);
        const double box = box_sup_mm(scaled, mode, student, 1.0, cap);
        const double tv = exact_distance(scaled, Method::tv, mode, student, cap);
        report.checks.push_back(leq_check("gap_le_box_sup_" + tag, gap, box, 1e-10));
        report.checks.push_back(leq_check("box_sup_le_tv_" + tag, box, tv, 1e-10));
        report.checks.push_back(close_check("box_sup_equals_tv_" + tag, box, tv, 1e-10));
    }

    report.passed = true;
    for (const CertCheck& c : report.checks) report.passed = report.passed && c.pass;
    if (!report.passed)
        report.violating_instance = certification_instance_json(task, student);
    return report;
}

}  // namespace kdlab
