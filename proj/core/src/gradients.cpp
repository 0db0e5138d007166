#include "kdlab/gradients.hpp"

#include <cmath>

#include "kdlab/objectives.hpp"
#include "kdlab/oracle.hpp"

namespace kdlab {

namespace {

void check_off_source(const Trajectory& tr) {
    if (tr.source == SourceTag::student)
        throw std::invalid_argument(
            "off-policy estimator needs teacher or dataset trajectories");
}

void check_on_source(const Trajectory& tr) {
    if (tr.source != SourceTag::student)
        throw std::invalid_argument(
            "on-policy estimator needs student trajectories");
}

void check_length(const Task& task, const Trajectory& tr) {
    if (tr.actions.size() != task.horizon)
        throw HorizonExceededError("trajectory length != task horizon");
}

}  // namespace

void add_policy_grad_off(const Task& task, const Trajectory& tr,
                         const Policy& student, const QFunction& f1,
                         double scale, std::span<double> acc) {
    check_off_source(tr);
    check_length(task, tr);
    const std::size_t V = task.vocab.size();
    Prefix p;
    p.input = tr.input;
    for (std::size_t t = 0; t < task.horizon; ++t) {
        const numvec probs = student.action_probs(p);
        for (std::size_t y = 0; y < V; ++y)
            student.add_log_prob_grad(
                p, static_cast<int>(y),
                scale * probs[y] * f1.value(p, static_cast<int>(y)), acc);
        p.generated.push_back(tr.actions[t]);
    }
}

numvec policy_grad_off(const Task& task, const Trajectory& tr,
                       const Policy& student, const QFunction& f1) {
    numvec g(student.shape().param_count(), 0.0);
    add_policy_grad_off(task, tr, student, f1, 1.0, g);
    return g;
}

void add_policy_grad_on(const Task& task, const Trajectory& tr,
                        const Policy& student, const Policy& teacher,
                        const QFunction& f2, double scale,
                        std::span<double> acc) {
    check_on_source(tr);
    check_length(task, tr);
    const double advantage = u_on(task, tr, f2, teacher);
    Prefix p;
    p.input = tr.input;
    for (std::size_t t = 0; t < task.horizon; ++t) {
        student.add_log_prob_grad(p, tr.actions[t], scale * advantage, acc);
        p.generated.push_back(tr.actions[t]);
    }
}

numvec policy_grad_on(const Task& task, const Trajectory& tr,
                      const Policy& student, const Policy& teacher,
                      const QFunction& f2) {
    numvec g(student.shape().param_count(), 0.0);
    add_policy_grad_on(task, tr, student, teacher, f2, 1.0, g);
    return g;
}

void add_critic_grad_off(const Task& task, const Trajectory& tr,
                         const Policy& student, const QFunction& f1,
                         double scale, std::span<double> acc) {
    check_off_source(tr);
    check_length(task, tr);
    const std::size_t V = task.vocab.size();
    Prefix p;
    p.input = tr.input;
    for (std::size_t t = 0; t < task.horizon; ++t) {
        f1.add_param_grad(p, tr.actions[t], scale, acc);
        const numvec probs = student.action_probs(p);
        for (std::size_t y = 0; y < V; ++y)
            f1.add_param_grad(p, static_cast<int>(y), -scale * probs[y], acc);
        p.generated.push_back(tr.actions[t]);
    }
}

numvec critic_grad_off(const Task& task, const Trajectory& tr,
                       const Policy& student, const QFunction& f1) {
    numvec g(f1.shape().param_count(), 0.0);
    add_critic_grad_off(task, tr, student, f1, 1.0, g);
    return g;
}

void add_critic_grad_on(const Task& task, const Trajectory& tr,
                        const Policy& teacher, const QFunction& f2,
                        double scale, std::span<double> acc) {
    check_on_source(tr);
    check_length(task, tr);
    const std::size_t V = task.vocab.size();
    Prefix p;
    p.input = tr.input;
    for (std::size_t t = 0; t < task.horizon; ++t) {
        const numvec probs = teacher.action_probs(p);
        for (std::size_t y = 0; y < V; ++y)
            f2.add_param_grad(p, static_cast<int>(y), scale * probs[y], acc);
        f2.add_param_grad(p, tr.actions[t], -scale, acc);
        p.generated.push_back(tr.actions[t]);
    }
}

numvec critic_grad_on(const Task& task, const Trajectory& tr,
                      const Policy& teacher, const QFunction& f2) {
    numvec g(f2.shape().param_count(), 0.0);
    add_critic_grad_on(task, tr, teacher, f2, 1.0, g);
    return g;
}

std::string to_string(PopulationObjective obj) {
    switch (obj) {
        case PopulationObjective::loss_wrt_theta: return "loss_wrt_theta";
        case PopulationObjective::loss_wrt_phi1: return "loss_wrt_phi1";
        case PopulationObjective::loss_wrt_phi2: return "loss_wrt_phi2";
        case PopulationObjective::sft_loss: return "sft_loss";
    }
    throw std::invalid_argument("bad PopulationObjective");
}

namespace {

/// Population gradient by exhaustive enumeration through the same
/// per-trajectory estimators training uses.
numvec analytic_population_grad(const Task& task, PopulationObjective obj,
                                const Policy& student, const QFunction& f1,
                                const QFunction& f2, std::size_t cap) {
    switch (obj) {
        case PopulationObjective::loss_wrt_theta: {
            numvec g(student.shape().param_count(), 0.0);
            for_each_trajectory(task, student, SourceTag::student, cap,
                                [&](const Trajectory& tr, double prob) {
                                    add_policy_grad_on(task, tr, student,
                                                       task.teacher, f2, prob,
                                                       g);
                                });
            for_each_trajectory(task, task.teacher, SourceTag::teacher, cap,
                                [&](const Trajectory& tr, double prob) {
                                    add_policy_grad_off(task, tr, student, f1,
                                                        -prob, g);
                                });
            return g;
        }
        case PopulationObjective::loss_wrt_phi1: {
            numvec g(f1.shape().param_count(), 0.0);
            for_each_trajectory(task, task.teacher, SourceTag::teacher, cap,
                                [&](const Trajectory& tr, double prob) {
                                    add_critic_grad_off(task, tr, student, f1,
                                                        prob, g);
                                });
            return g;
        }
        case PopulationObjective::loss_wrt_phi2: {
            numvec g(f2.shape().param_count(), 0.0);
            for_each_trajectory(task, student, SourceTag::student, cap,
                                [&](const Trajectory& tr, double prob) {
                                    add_critic_grad_on(task, tr, task.teacher,
                                                       f2, prob, g);
                                });
            return g;
        }
        case PopulationObjective::sft_loss: {
            numvec g(student.shape().param_count(), 0.0);
            const double w = -1.0 / static_cast<double>(task.horizon);
            for_each_trajectory(
                task, task.teacher, SourceTag::teacher, cap,
                [&](const Trajectory& tr, double prob) {
                    Prefix p;
                    p.input = tr.input;
                    for (std::size_t t = 0; t < task.horizon; ++t) {
                        student.add_log_prob_grad(p, tr.actions[t], w * prob, g);
                        p.generated.push_back(tr.actions[t]);
                    }
                });
            return g;
        }
    }
    throw std::invalid_argument("bad PopulationObjective");
}

double population_value(const Task& task, PopulationObjective obj,
                        const Policy& student, const QFunction& f1,
                        const QFunction& f2, std::size_t cap) {
    switch (obj) {
        case PopulationObjective::loss_wrt_theta:
            return population_loss(task, student, f1, f2, cap);
        case PopulationObjective::loss_wrt_phi1:
            return population_u_off(task, student, f1, cap);
        case PopulationObjective::loss_wrt_phi2:
            return population_u_on(task, student, f2, cap);
        case PopulationObjective::sft_loss:
            return population_sft_nll(task, student, cap);
    }
    throw std::invalid_argument("bad PopulationObjective");
}

}  // namespace

GradientReport check_gradient(const Task& task, PopulationObjective obj,
                              const Policy& student, const QFunction& f1,
                              const QFunction& f2, double h, std::size_t cap,
                              double abs_floor, double fault) {
    if (!(h > 0.0)) throw std::invalid_argument("step size must be positive");
    GradientReport report;
    report.objective = to_string(obj);
    report.h = h;
    report.analytic = analytic_population_grad(task, obj, student, f1, f2, cap);
    if (fault != 0.0 && !report.analytic.empty()) report.analytic[0] += fault;

    const bool wrt_student = obj == PopulationObjective::loss_wrt_theta ||
                             obj == PopulationObjective::sft_loss;
    const bool wrt_f1 = obj == PopulationObjective::loss_wrt_phi1;

    Policy student_work = student;
    QFunction f1_work = f1;
    QFunction f2_work = f2;
    const std::span<const double> base = wrt_student ? student.params()
                                         : wrt_f1    ? f1.params()
                                                     : f2.params();
    report.numeric.resize(base.size());

    numvec point(base.begin(), base.end());
    const auto value_at = [&](const numvec& params) {
        if (wrt_student) student_work.set_params(params);
        else if (wrt_f1) f1_work.set_params(params);
        else f2_work.set_params(params);
        return population_value(task, obj, student_work, f1_work, f2_work, cap);
    };
    for (std::size_t i = 0; i < point.size(); ++i) {
        const double saved = point[i];
        point[i] = saved + h;
        const double up = value_at(point);
        point[i] = saved - h;
        const double down = value_at(point);
        point[i] = saved;
        report.numeric[i] = (up - down) / (2.0 * h);
    }

    for (std::size_t i = 0; i < report.analytic.size(); ++i) {
        const double a = report.analytic[i];
        const double n = report.numeric[i];
        const double abs_err = std::abs(a - n);
        if (abs_err > report.max_abs_err) report.max_abs_err = abs_err;
        // Differences at or below the floor are indistinguishable from
        // finite-difference roundoff; only larger ones rate a ratio.
        if (abs_err <= abs_floor) continue;
        const double mag = std::max(std::abs(a), std::abs(n));
        const double rel = abs_err / std::max(mag, 1e-12);
        if (rel > report.max_rel_err) {
            report.max_rel_err = rel;
            report.worst_index = i;
        }
    }
    return report;
}

}  // namespace kdlab
