#pragma once

#include <span>
#include <string>

#include "kdlab/qvalue.hpp"
#include "kdlab/task.hpp"

namespace kdlab {

/// Training methods: the adversarial moment matcher, four step-wise
/// distribution matchers, and behavior cloning.
enum class Method { mm, kl, rkl, js, tv, sft };
/// Whose trajectories drive the estimate: the teacher's (off), the
/// student's (on), or both summed (joint).
enum class Mode { off, on, joint };

std::string to_string(Method m);
Method method_from_string(const std::string& s);
std::string to_string(Mode m);
Mode mode_from_string(const std::string& s);

/**
Off-policy advantage sum along a teacher or dataset trajectory:
sum_t [ f(s_t, a_t) - E_{y ~ student}(f(s_t, y)) ]. At f = the
student's true action-value function, its expectation over teacher
trajectories equals the performance gap J(teacher) - J(student).
*/
double u_off(const Task& task, const Trajectory& tr, const QFunction& f,
             const Policy& student);

/**
On-policy counterpart along a student trajectory:
sum_t [ E_{y ~ teacher}(f(s_t, y)) - f(s_t, a_t) ]. Does not depend on
the student's parameters once the trajectory is fixed. At f = the
teacher's true action-value function, its expectation over student
trajectories equals the same gap.
*/
double u_on(const Task& task, const Trajectory& tr, const QFunction& f,
            const Policy& teacher);

/// Two-critic saddle objective: mean u_off over batch_off plus mean
/// u_on over batch_on.
double adversarial_loss(const Task& task, const Policy& student,
                        const QFunction& f1, const QFunction& f2,
                        std::span<const Trajectory> batch_off,
                        std::span<const Trajectory> batch_on);

/**
Distance between two distributions over tokens at a single step.
Conventions: 0 * log 0 = 0; kl is +inf where q lacks support that p has
(rkl mirrored); tv is the unhalved sum of absolute differences; js is
symmetrized against the even mixture and never exceeds ln 2. Inputs
need not be normalized; entries must be finite and nonnegative.
Only kl, rkl, js, tv are step-wise distances; other methods throw.
*/
double step_distance(Method kind, std::span<const double> p,
                     std::span<const double> q);

/// Partial derivatives of step_distance with respect to q's entries.
/// Entries may be +-inf at support boundaries; callers treat a
/// non-finite entry as a skip signal.
numvec step_distance_grad(Method kind, std::span<const double> p,
                          std::span<const double> q);

/**
Monte Carlo estimate of the expected summed step distance between
teacher and student along trajectories of the mode's sampling policy
(joint sums both sides). Per-trajectory streams are derived from the
given stream, so the estimate is independent of evaluation order.
*/
double policy_distance(const Task& task, Method kind, Mode mode,
                       const Policy& student, std::size_t n_traj,
                       RandomStream& rng);

enum class MmMaximizer {
    closed_form_box,  // exact sup over {|f| <= bound}; needs enumeration
    gradient_ascent,  // budgeted stochastic ascent over a critic class
    fixed_critic      // evaluate at a caller-supplied critic
};

struct AdversarialBudget {
    MmMaximizer maximizer = MmMaximizer::closed_form_box;
    double bound = 1.0;  // sup-norm budget of the critic class
    QKind critic_kind = QKind::tabular;
    std::size_t hidden_dim = 16;
    std::size_t ascent_steps = 200;
    double ascent_lr = 0.05;
    bool exact_eval = true;          // evaluate by enumeration when possible
    std::size_t n_eval_traj = 2048;  // Monte Carlo evaluation size otherwise
    std::size_t cap = default_enumeration_cap;
    const QFunction* fixed = nullptr;
};

struct MmResult {
    double value = 0.0;
    QFunction critic;
};

/**
Adversarial moment-matching distance for mode `off` or `on`: the
expectation, over trajectories of the mode's sampling policy, of
sum_t E_{y ~ teacher}(f(s_t, y)) - E_{y ~ student}(f(s_t, y)), at the
critic f chosen by the budget's maximizer. closed_form_box attains the
exact supremum over the bounded box, which equals bound times the
mode's total variation distance.
*/
MmResult mm_distance(const Task& task, Mode mode, const Policy& student,
                     const AdversarialBudget& budget, RandomStream& rng);

}  // namespace kdlab
