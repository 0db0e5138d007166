#pragma once

#include <string>

#include "kdlab/qvalue.hpp"
#include "kdlab/task.hpp"

namespace kdlab {

/**
Per-trajectory gradient estimators for the two-critic saddle objective.
Signs follow the descent update on the student: the policy step is
theta <- theta - eta * (mean policy_grad_on - mean policy_grad_off),
and each critic ascends its own estimator's gradient.
*/

/// sum_t E_{y ~ student}[ grad log student(y|s_t) * f1(s_t, y) ] with the
/// inner expectation taken exactly over the token alphabet. Expects a
/// teacher or dataset trajectory.
numvec policy_grad_off(const Task& task, const Trajectory& tr,
                       const Policy& student, const QFunction& f1);
void add_policy_grad_off(const Task& task, const Trajectory& tr,
                         const Policy& student, const QFunction& f1,
                         double scale, std::span<double> acc);

/// ( sum_t grad log student(a_t|s_t) ) * u_on(tr, f2, teacher): the score
/// of the student trajectory times its advantage sum, which is constant
/// in theta once the trajectory is fixed.
numvec policy_grad_on(const Task& task, const Trajectory& tr,
                      const Policy& student, const Policy& teacher,
                      const QFunction& f2);
void add_policy_grad_on(const Task& task, const Trajectory& tr,
                        const Policy& student, const Policy& teacher,
                        const QFunction& f2, double scale,
                        std::span<double> acc);

/// d u_off / d phi1 along a teacher or dataset trajectory:
/// sum_t [ grad f1(s_t, a_t) - E_{y ~ student} grad f1(s_t, y) ].
numvec critic_grad_off(const Task& task, const Trajectory& tr,
                       const Policy& student, const QFunction& f1);
void add_critic_grad_off(const Task& task, const Trajectory& tr,
                         const Policy& student, const QFunction& f1,
                         double scale, std::span<double> acc);

/// d u_on / d phi2 along a student trajectory:
/// sum_t [ E_{y ~ teacher} grad f2(s_t, y) - grad f2(s_t, a_t) ].
numvec critic_grad_on(const Task& task, const Trajectory& tr,
                      const Policy& teacher, const QFunction& f2);
void add_critic_grad_on(const Task& task, const Trajectory& tr,
                        const Policy& teacher, const QFunction& f2,
                        double scale, std::span<double> acc);

/// Exhaustively enumerable objectives whose analytic gradients the
/// checker validates against central differences.
enum class PopulationObjective {
    loss_wrt_theta,  // saddle objective, student parameters
    loss_wrt_phi1,   // expected u_off, off-critic parameters
    loss_wrt_phi2,   // expected u_on, on-critic parameters
    sft_loss         // population behavior-cloning loss, student parameters
};

std::string to_string(PopulationObjective obj);

struct GradientReport {
    std::string objective;
    numvec analytic;
    numvec numeric;
    double h = 0.0;
    double max_rel_err = 0.0;
    double max_abs_err = 0.0;
    std::size_t worst_index = 0;

    bool pass(double tol) const { return max_rel_err <= tol; }
};

/**
Compares the analytic gradient of a population objective (computed by
exhaustive trajectory enumeration through the same per-trajectory
estimators used in training) against central finite differences at the
current parameters of the relevant object.

Per-component relative error uses max(|analytic|, |numeric|, 1e-12) as
the denominator; components where both magnitudes are at most
`abs_floor` are treated as agreeing (flat directions). `fault` is a
test hook added to the first analytic component before comparison, so
callers can prove the checker catches a corrupted gradient.
*/
GradientReport check_gradient(const Task& task, PopulationObjective obj,
                              const Policy& student, const QFunction& f1,
                              const QFunction& f2, double h = 1e-5,
                              std::size_t cap = default_enumeration_cap,
                              double abs_floor = 1e-8, double fault = 0.0);

}  // namespace kdlab
