#pragma once

#include <functional>
#include <vector>

#include "kdlab/objectives.hpp"
#include "kdlab/qvalue.hpp"
#include "kdlab/task.hpp"

namespace kdlab {

/**
Everything backward induction and a forward occupancy sweep yield for
one policy on one task. Layout follows the task's state index: v spans
all levels (terminal entries are zero), q and cell_occupancy span the
decision states times |V|.
*/
struct ExactSolution {
    double j_value = 0.0;
    numvec v;                // total_state_count()
    numvec q;                // decision_state_count() * |V|
    numvec state_occupancy;  // total_state_count(); each level sums to 1
    numvec cell_occupancy;   // decision_state_count() * |V|
};

/// Throws CapExceededError when the task has more than `cap` trajectories.
void check_enumeration_cap(const Task& task, std::size_t cap);

ExactSolution exact_solve(const Task& task, const Policy& pol,
                          std::size_t cap = default_enumeration_cap);

/// The policy's true action-value table (backward induction).
QFunction exact_q(const Task& task, const Policy& pol,
                  std::size_t cap = default_enumeration_cap);

/// Expected return by full trajectory enumeration; an independent route
/// from exact_solve's backward induction.
double exact_j(const Task& task, const Policy& pol,
               std::size_t cap = default_enumeration_cap);

/// J(teacher) - J(student).
double exact_gap(const Task& task, const Policy& student,
                 std::size_t cap = default_enumeration_cap);

/// Visits every trajectory of positive probability under `pol` with its
/// probability. Rewards are attached; `source` tags the emitted copies.
void for_each_trajectory(
    const Task& task, const Policy& pol, SourceTag source, std::size_t cap,
    const std::function<void(const Trajectory&, double)>& fn);

/// Exact expected summed step distance (joint = off + on).
double exact_distance(const Task& task, Method kind, Mode mode,
                      const Policy& student,
                      std::size_t cap = default_enumeration_cap);

/**
Exact supremum of the moment-matching functional over critics with
|f| <= bound: bound times the mode's total variation distance, attained
at the sign critic of the occupancy-weighted policy difference.
*/
double box_sup_mm(const Task& task, Mode mode, const Policy& student,
                  double bound = 1.0,
                  std::size_t cap = default_enumeration_cap);

/// E over teacher trajectories of u_off(tr, f, student), by occupancy.
double population_u_off(const Task& task, const Policy& student,
                        const QFunction& f,
                        std::size_t cap = default_enumeration_cap);

/// E over student trajectories of u_on(tr, f, teacher), by occupancy.
double population_u_on(const Task& task, const Policy& student,
                       const QFunction& f,
                       std::size_t cap = default_enumeration_cap);

double population_loss(const Task& task, const Policy& student,
                       const QFunction& f1, const QFunction& f2,
                       std::size_t cap = default_enumeration_cap);

/// Per-decision mean teacher NLL under the student (the behavior
/// cloning objective at infinite data).
double population_sft_nll(const Task& task, const Policy& student,
                          std::size_t cap = default_enumeration_cap);

/// Copy of the task with rewards divided by r_max * horizon, so every
/// policy's action-value function has sup norm at most 1. Factor 1 when
/// rewards are identically zero.
Task rescaled_unit_q(const Task& task, double* factor_out = nullptr);

struct CertCheck {
    std::string name;
    double lhs = 0.0;
    double rhs = 0.0;
    double tol = 0.0;
    bool pass = false;
};

struct CertificationReport {
    bool passed = false;
    std::string task_name;
    double rescale_factor = 1.0;
    std::vector<CertCheck> checks;
    /// Serialized task + student when a check fails, empty otherwise.
    std::string violating_instance;
};

/**
Machine-checks the identities this laboratory is built around, on a
rescaled copy of the task (unit action-value sup norm):

  value routes    backward induction and trajectory enumeration agree on
                  J for both policies (1e-12)
  gap identities  the expected u_off at the student's true Q, and the
                  expected u_on at the teacher's true Q, both equal the
                  gap (1e-10)
  bound chain     gap <= box_sup_mm <= total variation distance, off and
                  on modes (1e-10), with the second comparison an
                  equality
*/
CertificationReport certify(const Task& task, const Policy& student,
                            std::size_t cap = default_enumeration_cap);

}  // namespace kdlab
