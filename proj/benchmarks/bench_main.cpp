#include <benchmark/benchmark.h>

#include "kdlab/fixtures.hpp"
#include "kdlab/gradients.hpp"
#include "kdlab/oracle.hpp"
#include "kdlab/trainer.hpp"

namespace {

using namespace kdlab;

const Task& fixture_b() {
    static const Task task = make_fixture_task("FIXTURE-B");
    return task;
}

void bm_rollout(benchmark::State& state) {
    const Task& task = fixture_b();
    RandomStream rng(7);
    for (auto _ : state)
        benchmark::DoNotOptimize(
            rollout(task, task.teacher, rng, SourceTag::teacher));
}
BENCHMARK(bm_rollout);

void bm_exact_solve(benchmark::State& state) {
    const Task& task = fixture_b();
    for (auto _ : state)
        benchmark::DoNotOptimize(exact_solve(task, task.teacher));
}
BENCHMARK(bm_exact_solve);

void bm_u_off(benchmark::State& state) {
    const Task& task = fixture_b();
    const Policy student = default_student(task);
    const QFunction q = exact_q(task, student);
    RandomStream rng(7);
    const Trajectory tr = rollout(task, task.teacher, rng, SourceTag::teacher);
    for (auto _ : state)
        benchmark::DoNotOptimize(u_off(task, tr, q, student));
}
BENCHMARK(bm_u_off);

void bm_policy_grad_off(benchmark::State& state) {
    const Task& task = fixture_b();
    const Policy student = default_student(task);
    const QFunction q = exact_q(task, student);
    RandomStream rng(7);
    const Trajectory tr = rollout(task, task.teacher, rng, SourceTag::teacher);
    numvec grad(student.shape().param_count());
    for (auto _ : state) {
        std::fill(grad.begin(), grad.end(), 0.0);
        add_policy_grad_off(task, tr, student, q, 1.0, grad);
        benchmark::DoNotOptimize(grad.data());
    }
}
BENCHMARK(bm_policy_grad_off);

void bm_box_sup(benchmark::State& state) {
    const Task& task = fixture_b();
    const Policy student = default_student(task);
    for (auto _ : state)
        benchmark::DoNotOptimize(box_sup_mm(task, Mode::off, student, 3.0));
}
BENCHMARK(bm_box_sup);

void bm_train_step(benchmark::State& state) {
    const Task& task = fixture_b();
    TrainConfig cfg;
    cfg.max_steps = 1;
    cfg.eval_every = 1;
    for (auto _ : state) {
        Policy student = default_student(task);
        QFunction f1 = make_critic(task, QKind::tabular, 3.0, 16, 1);
        QFunction f2 = make_critic(task, QKind::tabular, 3.0, 16, 2);
        benchmark::DoNotOptimize(
            train_mm(task, std::move(student), std::move(f1), std::move(f2),
                     cfg));
    }
}
BENCHMARK(bm_train_step);

}  // namespace

BENCHMARK_MAIN();
