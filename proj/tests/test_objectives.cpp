#include <doctest.h>

#include <cmath>

#include "kdlab/fixtures.hpp"
#include "kdlab/objectives.hpp"
#include "kdlab/oracle.hpp"
#include "random_tasks.hpp"

using namespace kdlab;

namespace {

Trajectory fixture_a_traj(int action, SourceTag tag) {
    Trajectory tr;
    tr.input = 0;
    tr.actions = {action};
    tr.rewards = {action == 0 ? 1.0 : 0.0};
    tr.source = tag;
    return tr;
}

}  // namespace

TEST_CASE("off-policy advantage sums reproduce the hand fixture numbers") {
    const Task task = make_fixture_task("FIXTURE-A");
    const Policy student = default_student(task);
    const QFunction q_student = exact_q(task, student);  // values (1, 0)

    CHECK(u_off(task, fixture_a_traj(0, SourceTag::teacher), q_student, student)
          == doctest::Approx(0.4));
    CHECK(u_off(task, fixture_a_traj(1, SourceTag::dataset), q_student, student)
          == doctest::Approx(-0.6));

    // Expectation over teacher trajectories equals the return gap.
    double expectation = 0.0;
    for_each_trajectory(task, task.teacher, SourceTag::teacher, 1000,
                        [&](const Trajectory& tr, double prob) {
                            expectation +=
                                prob * u_off(task, tr, q_student, student);
                        });
    CHECK(expectation == doctest::Approx(0.30));
}

TEST_CASE("off-policy advantage vanishes for point-mass students and zero critics") {
    const Task task = make_fixture_task("FIXTURE-A");
    Policy point_mass = Policy::tabular(task.states, 2);
    point_mass.set_params(numvec{60.0, 0.0});
    const QFunction q = exact_q(task, point_mass);
    CHECK(std::abs(u_off(task, fixture_a_traj(0, SourceTag::teacher), q,
                         point_mass)) <= 1e-10);

    const QFunction zero = QFunction::tabular(task.states, BoundMode::unbounded());
    CHECK(u_off(task, fixture_a_traj(1, SourceTag::teacher), zero,
                default_student(task)) == 0.0);
}

TEST_CASE("on-policy advantage sums reproduce the hand fixture numbers") {
    const Task task = make_fixture_task("FIXTURE-A");
    const Policy student = default_student(task);
    const QFunction q_teacher = exact_q(task, task.teacher);  // values (1, 0)

    // sum_t E_{y~teacher} f - f(a_t): 0.9 - 1 and 0.9 - 0.
    CHECK(u_on(task, fixture_a_traj(0, SourceTag::student), q_teacher,
               task.teacher) == doctest::Approx(-0.1));
    CHECK(u_on(task, fixture_a_traj(1, SourceTag::student), q_teacher,
               task.teacher) == doctest::Approx(0.9));

    double expectation = 0.0;
    for_each_trajectory(task, student, SourceTag::student, 1000,
                        [&](const Trajectory& tr, double prob) {
                            expectation +=
                                prob * u_on(task, tr, q_teacher, task.teacher);
                        });
    CHECK(expectation == doctest::Approx(0.30));
}

TEST_CASE("advantage estimators enforce their trajectory sources") {
    const Task task = make_fixture_task("FIXTURE-A");
    const Policy student = default_student(task);
    const QFunction zero = QFunction::tabular(task.states, BoundMode::unbounded());
    CHECK_THROWS(u_off(task, fixture_a_traj(0, SourceTag::student), zero,
                       student));
    CHECK_THROWS(u_on(task, fixture_a_traj(0, SourceTag::teacher), zero,
                      student));
}

TEST_CASE("the saddle objective adds the two advantage means") {
    const Task task = make_fixture_task("FIXTURE-A");
    const Policy student = default_student(task);
    const QFunction f1 = exact_q(task, student);
    const QFunction f2 = exact_q(task, task.teacher);

    const std::vector<Trajectory> off = {fixture_a_traj(0, SourceTag::teacher),
                                         fixture_a_traj(1, SourceTag::teacher)};
    const std::vector<Trajectory> on = {fixture_a_traj(0, SourceTag::student)};
    const double loss = adversarial_loss(task, student, f1, f2, off, on);
    const double expect =
        0.5 * (u_off(task, off[0], f1, student) + u_off(task, off[1], f1, student)) +
        u_on(task, on[0], f2, task.teacher);
    CHECK(loss == doctest::Approx(expect));

    // Population value at the exact critics is twice the gap.
    CHECK(population_loss(task, student, f1, f2) == doctest::Approx(0.60));

    const QFunction zero = QFunction::tabular(task.states, BoundMode::unbounded());
    CHECK(population_loss(task, student, zero, zero) == 0.0);
    CHECK(population_loss(task, task.teacher, f1, f2) ==
          doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("step distances match hand values") {
    const numvec p = {0.9, 0.1}, q = {0.6, 0.4};
    CHECK(step_distance(Method::tv, p, q) == doctest::Approx(0.6));
    CHECK(step_distance(Method::kl, p, q) ==
          doctest::Approx(0.9 * std::log(0.9 / 0.6) + 0.1 * std::log(0.1 / 0.4))
              .epsilon(1e-9));
    CHECK(step_distance(Method::rkl, p, q) ==
          doctest::Approx(step_distance(Method::kl, q, p)));

    const numvec m = {0.75, 0.25};
    const double js_hand = 0.5 * step_distance(Method::kl, p, m) +
                           0.5 * step_distance(Method::kl, q, m);
    CHECK(step_distance(Method::js, p, q) == doctest::Approx(js_hand));

    for (Method kind : {Method::kl, Method::rkl, Method::js, Method::tv})
        CHECK(step_distance(kind, p, p) == doctest::Approx(0.0));

    CHECK_THROWS(step_distance(Method::mm, p, q));
    CHECK_THROWS(step_distance(Method::sft, p, q));
}

TEST_CASE("support mismatches hit the divergence sentinels") {
    const numvec p = {0.5, 0.5}, q = {1.0, 0.0};
    CHECK(std::isinf(step_distance(Method::kl, p, q)));
    CHECK(std::isinf(step_distance(Method::rkl, q, p)));
    CHECK(step_distance(Method::tv, p, q) == doctest::Approx(1.0));
    // Disjoint supports: unhalved total variation reaches 2.
    CHECK(step_distance(Method::tv, numvec{1.0, 0.0}, numvec{0.0, 1.0}) ==
          doctest::Approx(2.0));
    // 0 log 0 contributes nothing.
    CHECK(step_distance(Method::kl, q, numvec{0.7, 0.3}) ==
          doctest::Approx(std::log(1.0 / 0.7)));
}

TEST_CASE("jensen-shannon never exceeds ln 2") {
    RandomStream rng(31);
    for (int i = 0; i < 1000; ++i) {
        numvec p(3), q(3);
        double sp = 0, sq = 0;
        for (int k = 0; k < 3; ++k) {
            p[k] = rng.uniform01() + 1e-12;
            q[k] = rng.uniform01() + 1e-12;
            sp += p[k];
            sq += q[k];
        }
        for (int k = 0; k < 3; ++k) {
            p[k] /= sp;
            q[k] /= sq;
        }
        const double js = step_distance(Method::js, p, q);
        CHECK(js >= 0.0);
        CHECK(js <= std::log(2.0) + 1e-12);
    }
    CHECK(step_distance(Method::js, numvec{1.0, 0.0}, numvec{0.0, 1.0}) ==
          doctest::Approx(std::log(2.0)));
}

TEST_CASE("step distance gradients match finite differences") {
    const numvec p = {0.55, 0.25, 0.2};
    numvec q = {0.2, 0.5, 0.3};
    const double h = 1e-6;
    for (Method kind : {Method::kl, Method::rkl, Method::js, Method::tv}) {
        const numvec grad = step_distance_grad(kind, p, q);
        for (std::size_t j = 0; j < q.size(); ++j) {
            numvec hi = q, lo = q;
            hi[j] += h;
            lo[j] -= h;
            const double fd = (step_distance(kind, p, hi) -
                               step_distance(kind, p, lo)) / (2 * h);
            CHECK(grad[j] == doctest::Approx(fd).epsilon(1e-5).scale(
                                 std::max(1.0, std::abs(fd))));
        }
    }
    CHECK_THROWS(step_distance_grad(Method::mm, p, q));
}

TEST_CASE("monte carlo policy distance tracks the exact value") {
    const Task task = make_fixture_task("FIXTURE-A");
    const Policy student = default_student(task);
    for (Mode mode : {Mode::off, Mode::on, Mode::joint}) {
        const double exact = exact_distance(task, Method::kl, mode, student);
        RandomStream rng(77);
        const double mc =
            policy_distance(task, Method::kl, mode, student, 20000, rng);
        // Single-state task: per-trajectory distance is constant, so the
        // estimate should be nearly exact.
        CHECK(mc == doctest::Approx(exact).epsilon(1e-9));
    }

    const Task b = make_fixture_task("FIXTURE-B");
    const Policy sb = testing::random_student(b, 5);
    for (Method kind : {Method::tv, Method::js}) {
        const double exact = exact_distance(b, kind, Mode::joint, sb);
        RandomStream rng(78);
        const double mc = policy_distance(b, kind, Mode::joint, sb, 20000, rng);
        CHECK(mc == doctest::Approx(exact).epsilon(0.05));
    }
}

TEST_CASE("closed-form box supremum equals the scaled total variation") {
    const Task task = make_fixture_task("FIXTURE-A");
    const Policy student = default_student(task);
    AdversarialBudget budget;
    budget.maximizer = MmMaximizer::closed_form_box;
    budget.bound = 1.0;
    RandomStream rng(1);
    const MmResult off = mm_distance(task, Mode::off, student, budget, rng);
    CHECK(off.value == doctest::Approx(0.6));

    budget.bound = 2.5;
    const MmResult scaled = mm_distance(task, Mode::off, student, budget, rng);
    CHECK(scaled.value == doctest::Approx(2.5 * 0.6));

    // The returned critic attains the supremum.
    const double at_critic = population_u_off(task, student, off.critic) +
                             0.0;  // off-mode functional
    CHECK(at_critic == doctest::Approx(0.6));

    // Student equal to the teacher collapses the distance.
    const MmResult zero =
        mm_distance(task, Mode::on, task.teacher, budget, rng);
    CHECK(zero.value == doctest::Approx(0.0));
}

TEST_CASE("a critic class pinned to the student's true values recovers the gap") {
    const Task task = make_fixture_task("FIXTURE-A");
    const Policy student = default_student(task);
    const QFunction q_student = exact_q(task, student);
    AdversarialBudget budget;
    budget.maximizer = MmMaximizer::fixed_critic;
    budget.fixed = &q_student;
    RandomStream rng(1);
    CHECK(mm_distance(task, Mode::off, student, budget, rng).value ==
          doctest::Approx(0.30));
}

TEST_CASE("gradient ascent stays under the box supremum and climbs toward it") {
    const Task task = make_fixture_task("FIXTURE-A");
    const Policy student = default_student(task);
    AdversarialBudget budget;
    budget.maximizer = MmMaximizer::gradient_ascent;
    budget.bound = 1.0;
    budget.critic_kind = QKind::tabular;
    budget.ascent_steps = 400;
    budget.ascent_lr = 0.2;
    RandomStream rng(123);
    const MmResult res = mm_distance(task, Mode::off, student, budget, rng);
    CHECK(res.value <= 0.6 + 1e-9);
    CHECK(res.value >= 0.3);
}

TEST_CASE("method and mode names round trip") {
    for (Method m : {Method::mm, Method::kl, Method::rkl, Method::js,
                     Method::tv, Method::sft})
        CHECK(method_from_string(to_string(m)) == m);
    for (Mode m : {Mode::off, Mode::on, Mode::joint})
        CHECK(mode_from_string(to_string(m)) == m);
    CHECK_THROWS(method_from_string("nosuch"));
    CHECK_THROWS(mode_from_string("nosuch"));
}
