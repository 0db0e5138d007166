// End-to-end acceptance gate. Each criterion prints one [PASS]/[FAIL]
// line; the exit code is the number of failed criteria. Tolerances and
// budgets are pinned here on purpose: a change that moves any of these
// numbers should have to edit this file.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "kdlab/experiment.hpp"
#include "kdlab/fixtures.hpp"
#include "kdlab/gradients.hpp"
#include "kdlab/oracle.hpp"
#include "kdlab/serialization.hpp"
#include "kdlab/trainer.hpp"
#include "random_tasks.hpp"

using namespace kdlab;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
    bool pass = false;
    std::string detail;
};

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

// ---- criterion 1: the two population advantage identities ----------------

Outcome pdl_identities() {
    const auto t0 = Clock::now();
    const double tol = 1e-10;
    const std::size_t n_tasks = 200;
    std::size_t violations = 0;
    double worst = 0.0;
    for (std::uint64_t seed = 0; seed < n_tasks; ++seed) {
        const Task task = testing::random_task(seed);
        const Policy student = testing::random_student(task, seed + 10000);
        const double gap = exact_gap(task, student);
        const double off_err = std::abs(
            population_u_off(task, student, exact_q(task, student)) - gap);
        const double on_err = std::abs(
            population_u_on(task, student, exact_q(task, task.teacher)) - gap);
        worst = std::max({worst, off_err, on_err});
        if (off_err > tol || on_err > tol) ++violations;
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << n_tasks << " random tasks, worst identity error " << worst << ", "
      << violations << " violations, " << secs << "s (budget 60s)";
    return {violations == 0 && secs < 60.0, d.str()};
}

// ---- criterion 2: gap <= box-sup = total variation on rescaled tasks -----

Outcome bound_chain() {
    const auto t0 = Clock::now();
    const double tol = 1e-10;
    const std::size_t n_tasks = 200;
    std::size_t violations = 0;
    double worst_slack = 0.0, worst_eq = 0.0;
    for (std::uint64_t seed = 0; seed < n_tasks; ++seed) {
        const Task raw = testing::random_task(seed);
        const Task task = rescaled_unit_q(raw);
        const Policy student = testing::random_student(task, seed + 10000);
        const double gap = exact_gap(task, student);
        for (Mode mode : {Mode::off, Mode::on}) {
            const double sup = box_sup_mm(task, mode, student, 1.0);
            const double tv = exact_distance(task, Method::tv, mode, student);
            const bool ok =
                gap <= sup + tol && sup <= tv + tol && std::abs(sup - tv) <= tol;
            worst_slack = std::max(worst_slack, gap - sup);
            worst_eq = std::max(worst_eq, std::abs(sup - tv));
            if (!ok) ++violations;
        }
    }
    std::ostringstream d;
    d << n_tasks << " rescaled tasks x 2 modes, worst gap-over-sup "
      << worst_slack << ", worst |sup - tv| " << worst_eq << ", " << violations
      << " violations, " << seconds_since(t0) << "s";
    return {violations == 0, d.str()};
}

// ---- criterion 3: analytic gradients against central differences ---------

Policy random_policy(const Task& task, PolicyKind kind, RandomStream& rng) {
    Policy pol = make_student(task, kind, rng.next_u64());
    const double span = kind == PolicyKind::tabular_softmax ? 2.0 : 1.0;
    numvec w(pol.shape().param_count());
    for (double& x : w) x = rng.uniform(-span, span);
    pol.set_params(w);
    return pol;
}

QFunction random_critic(const Task& task, QKind kind, double bound,
                        RandomStream& rng) {
    QFunction f = make_critic(task, kind, bound, 8, rng.next_u64());
    numvec w(f.shape().param_count());
    for (double& x : w) x = rng.uniform(-1.0, 1.0);
    f.set_params(w);
    return f;
}

Outcome gradient_fidelity() {
    const auto t0 = Clock::now();
    const Task task = make_fixture_task("FIXTURE-B");
    const PolicyKind pkinds[] = {PolicyKind::tabular_softmax,
                                 PolicyKind::linear_softmax, PolicyKind::mlp};
    const QKind qkinds[] = {QKind::tabular, QKind::linear_head, QKind::mlp_head};
    const std::size_t n_points = 100;
    std::size_t failures = 0;
    double worst = 0.0, worst_abs = 0.0;
    for (std::size_t i = 0; i < n_points; ++i) {
        RandomStream rng = RandomStream::derived(0xACC3, i);
        const PolicyKind pk = pkinds[i % 3];
        const QKind qk = qkinds[(i / 3) % 3];
        const Policy student = random_policy(task, pk, rng);
        const QFunction f1 =
            random_critic(task, qk, i % 2 == 0 ? 1.0 : 0.0, rng);
        const QFunction f2 =
            random_critic(task, qk, i % 2 == 0 ? 0.0 : 1.5, rng);
        const double policy_tol = pk == PolicyKind::mlp ? 1e-4 : 1e-5;
        const double critic_tol = qk == QKind::mlp_head ? 1e-4 : 1e-5;
        const struct {
            PopulationObjective obj;
            double tol;
        } cases[] = {
            {PopulationObjective::loss_wrt_theta, policy_tol},
            {PopulationObjective::loss_wrt_phi1, critic_tol},
            {PopulationObjective::loss_wrt_phi2, critic_tol},
            {PopulationObjective::sft_loss, policy_tol},
        };
        for (const auto& c : cases) {
            const GradientReport rep =
                check_gradient(task, c.obj, student, f1, f2, 1e-5);
            worst = std::max(worst, rep.max_rel_err / c.tol);
            worst_abs = std::max(worst_abs, rep.max_abs_err);
            if (!rep.pass(c.tol)) ++failures;
        }
    }
    const double secs = seconds_since(t0);
    std::ostringstream d;
    d << n_points << " parameter points x 4 objectives, worst rel err at "
      << worst << "x its tolerance, worst abs err " << worst_abs << ", "
      << failures << " failures, " << secs << "s (budget 120s)";
    return {failures == 0 && secs < 120.0, d.str()};
}

// ---- criterion 4: Monte Carlo estimators inside 4 exact standard errors --

struct MomentOracle {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
};

// Exact mean and MC standard error of a per-trajectory statistic under
// the given sampling policy, by enumeration.
MomentOracle exact_moments(const Task& task, const Policy& sampler,
                           SourceTag tag, std::size_t n_mc,
                           const std::function<double(const Trajectory&)>& g) {
    double e1 = 0.0, e2 = 0.0;
    for_each_trajectory(task, sampler, tag, default_enumeration_cap,
                        [&](const Trajectory& tr, double prob) {
                            const double x = g(tr);
                            e1 += prob * x;
                            e2 += prob * x * x;
                        });
    const double var = std::max(0.0, e2 - e1 * e1);
    return {e1, std::sqrt(var / double(n_mc))};
}

struct McCheck {
    std::string name;
    double mc = 0.0;
    double exact = 0.0;
    double band = 0.0;  // 4 standard errors
    bool pass() const { return std::abs(mc - exact) <= band + 1e-12; }
};

McCheck mc_u_off(const Task& task, const Policy& student, const QFunction& f,
                 std::uint64_t seed, std::size_t n) {
    const MomentOracle om = exact_moments(
        task, task.teacher, SourceTag::teacher, n,
        [&](const Trajectory& tr) { return u_off(task, tr, f, student); });
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rng = RandomStream::derived(seed, i);
        acc += u_off(task, rollout(task, task.teacher, rng, SourceTag::teacher),
                     f, student);
    }
    return {"u_off", acc / double(n), om.mean, 4 * om.stderr_of_mean};
}

McCheck mc_u_on(const Task& task, const Policy& student, const QFunction& f,
                std::uint64_t seed, std::size_t n) {
    const MomentOracle om = exact_moments(
        task, student, SourceTag::student, n,
        [&](const Trajectory& tr) { return u_on(task, tr, f, task.teacher); });
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rng = RandomStream::derived(seed, i);
        acc += u_on(task, rollout(task, student, rng, SourceTag::student), f,
                    task.teacher);
    }
    return {"u_on", acc / double(n), om.mean, 4 * om.stderr_of_mean};
}

// Summed step distance along one trajectory's visited states.
double traj_step_distance(const Task& task, Method kind, const Policy& student,
                          const Trajectory& tr) {
    double total = 0.0;
    for (std::size_t t = 0; t < tr.actions.size(); ++t) {
        const Prefix p = tr.prefix_at(t);
        total += step_distance(kind, task.teacher.action_probs(p),
                               student.action_probs(p));
    }
    return total;
}

McCheck mc_step_distance(const Task& task, Method kind, Mode mode,
                         const Policy& student, std::uint64_t seed,
                         std::size_t n) {
    const auto stat = [&](const Trajectory& tr) {
        return traj_step_distance(task, kind, student, tr);
    };
    MomentOracle om{0.0, 0.0};
    double var_sum = 0.0;
    if (mode == Mode::off || mode == Mode::joint) {
        const MomentOracle o =
            exact_moments(task, task.teacher, SourceTag::teacher, n, stat);
        om.mean += o.mean;
        var_sum += o.stderr_of_mean * o.stderr_of_mean;
    }
    if (mode == Mode::on || mode == Mode::joint) {
        const MomentOracle o =
            exact_moments(task, student, SourceTag::student, n, stat);
        om.mean += o.mean;
        var_sum += o.stderr_of_mean * o.stderr_of_mean;
    }
    RandomStream rng(mix_seed(seed, 0xD157));
    const double mc = policy_distance(task, kind, mode, student, n, rng);
    return {to_string(kind) + "_" + to_string(mode), mc, om.mean,
            4 * std::sqrt(var_sum)};
}

McCheck mc_mm_functional(const Task& task, Mode mode, const Policy& student,
                         std::uint64_t seed, std::size_t n) {
    AdversarialBudget budget;
    budget.maximizer = MmMaximizer::closed_form_box;
    budget.bound = 1.0;
    RandomStream tmp(1);
    const MmResult sup = mm_distance(task, mode, student, budget, tmp);
    // Per-trajectory moment difference at the attaining critic.
    const auto stat = [&](const Trajectory& tr) {
        double total = 0.0;
        for (std::size_t t = 0; t < tr.actions.size(); ++t) {
            const Prefix p = tr.prefix_at(t);
            const numvec pt = task.teacher.action_probs(p);
            const numvec ps = student.action_probs(p);
            for (std::size_t y = 0; y < pt.size(); ++y)
                total += (pt[y] - ps[y]) * sup.critic.value(p, int(y));
        }
        return total;
    };
    const Policy& sampler = mode == Mode::off ? task.teacher : student;
    const SourceTag tag =
        mode == Mode::off ? SourceTag::teacher : SourceTag::student;
    const MomentOracle om = exact_moments(task, sampler, tag, n, stat);
    double acc = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream rng = RandomStream::derived(seed, i);
        acc += stat(rollout(task, sampler, rng, tag));
    }
    return {std::string("mm_") + to_string(mode), acc / double(n), sup.value,
            4 * om.stderr_of_mean};
}

Outcome estimator_consistency() {
    const auto t0 = Clock::now();
    const std::size_t n = 10000;
    const std::uint64_t seeds[] = {101, 202, 303};
    std::size_t checks = 0, failures = 0;
    std::string first_failure;
    for (const char* name : {"FIXTURE-A", "FIXTURE-B"}) {
        const Task task = make_fixture_task(name);
        const Policy student = default_student(task);
        QFunction f = QFunction::tabular(task.states, BoundMode::tanh_bounded(1.0));
        {
            RandomStream crng(mix_seed(0xC4, task.horizon));
            numvec cells(f.shape().param_count());
            for (double& c : cells) c = crng.uniform(-1.0, 1.0);
            f.set_params(cells);
        }
        for (std::uint64_t seed : seeds) {
            std::vector<McCheck> results;
            results.push_back(mc_u_off(task, student, f, mix_seed(seed, 1), n));
            results.push_back(mc_u_on(task, student, f, mix_seed(seed, 2), n));
            for (Method kind : {Method::kl, Method::rkl, Method::js, Method::tv})
                for (Mode mode : {Mode::off, Mode::on, Mode::joint})
                    results.push_back(mc_step_distance(task, kind, mode, student,
                                                       mix_seed(seed, 0x10 + int(kind) * 4 + int(mode)), n));
            for (Mode mode : {Mode::off, Mode::on})
                results.push_back(
                    mc_mm_functional(task, mode, student, mix_seed(seed, 0x40 + int(mode)), n));
            for (const McCheck& c : results) {
                ++checks;
                if (!c.pass()) {
                    ++failures;
                    if (first_failure.empty()) {
                        std::ostringstream f1;
                        f1 << name << " seed " << seed << " " << c.name << " mc "
                           << c.mc << " exact " << c.exact << " band " << c.band;
                        first_failure = f1.str();
                    }
                }
            }
        }
    }
    std::ostringstream d;
    d << checks << " estimator checks at N=" << n << ", " << failures
      << " outside 4 standard errors";
    if (!first_failure.empty()) d << "; first: " << first_failure;
    d << ", " << seconds_since(t0) << "s";
    return {failures == 0, d.str()};
}

// ---- criteria 5 and 6: training efficacy and the comparison grid ---------

TrainConfig sweep_base() {
    TrainConfig cfg;
    cfg.eta = 0.05;
    cfg.alpha = 0.1;
    cfg.k_inner = 5;
    cfg.batch_m = 16;
    cfg.max_steps = 2000;
    cfg.eval_every = 100;
    return cfg;
}

SweepSetup sweep_setup() {
    SweepSetup setup;
    setup.dataset_size = 256;
    setup.sft_pretrain_steps = 20;
    setup.sft_lr = 0.3;
    setup.sft_batch = 16;
    return setup;
}

Outcome training_efficacy() {
    const auto t0 = Clock::now();
    const Task task = make_fixture_task("FIXTURE-B");
    const std::vector<Method> methods = {Method::mm};
    const std::vector<Mode> modes = {Mode::joint};
    const std::vector<std::uint64_t> seeds = {1, 2, 3};
    const SweepResult res = compare_sweep(task, methods, modes, seeds,
                                          sweep_base(), sweep_setup());
    double mean_first = 0.0, mean_final = 0.0;
    bool mm_decreased = true;
    std::ostringstream per_seed;
    for (const SweepCell& cell : res.cells) {
        if (cell.failed) return {false, "cell failed: " + cell.error};
        const MetricsRow& first = cell.record.metrics.front();
        const MetricsRow& last = cell.record.metrics.back();
        mean_first += first.exact_gap / double(res.cells.size());
        mean_final += last.exact_gap / double(res.cells.size());
        if (!(last.d_mm_on < first.d_mm_on && last.d_mm_off < first.d_mm_off))
            mm_decreased = false;
        per_seed << " s" << cell.seed << ": gap " << first.exact_gap << "->"
                 << last.exact_gap;
    }
    const double secs = seconds_since(t0);
    const bool halved = mean_final <= 0.5 * mean_first;
    std::ostringstream d;
    d << "post-pretrain mean gap " << mean_first << ", final mean " << mean_final
      << " (need <= " << 0.5 * mean_first << ");" << per_seed.str()
      << "; adversarial distance decreased per seed: "
      << (mm_decreased ? "yes" : "no") << ", " << secs << "s (budget 600s)";
    return {halved && mm_decreased && secs < 600.0, d.str()};
}

Outcome comparison_grid() {
    const auto t0 = Clock::now();
    const Task task = make_fixture_task("FIXTURE-B");
    const std::vector<Method> methods = {Method::mm, Method::kl, Method::rkl,
                                         Method::js, Method::tv};
    const std::vector<Mode> modes = {Mode::off, Mode::on, Mode::joint};
    const std::vector<std::uint64_t> seeds = {1, 2, 3};
    const SweepResult res = compare_sweep(task, methods, modes, seeds,
                                          sweep_base(), sweep_setup());
    if (res.cells.size() != 45)
        return {false, "expected 45 cells, got " + std::to_string(res.cells.size())};
    for (const SweepCell& cell : res.cells)
        if (cell.failed) return {false, "cell failed: " + cell.error};

    double mm_joint = 0.0, best_dm = 1e300;
    std::string best_name;
    for (const SweepSummaryRow& row : res.summarize()) {
        if (row.method == Method::mm && row.mode == Mode::joint)
            mm_joint = row.mean_gap;
        if (row.method != Method::mm && row.mean_gap < best_dm) {
            best_dm = row.mean_gap;
            best_name = to_string(row.method) + "-" + to_string(row.mode);
        }
    }
    std::ostringstream d;
    d << "45 cells complete; adversarial joint mean gap " << mm_joint
      << " vs best distribution-matching cell " << best_name << " at " << best_dm
      << " (parity bar " << best_dm + 0.02 << "), " << seconds_since(t0) << "s";
    return {mm_joint <= best_dm + 0.02, d.str()};
}

// ---- criterion 7: byte-identical metrics on re-execution -----------------

Outcome rerun_determinism() {
    const auto t0 = Clock::now();
    const fs::path root =
        fs::temp_directory_path() /
        ("kdlab-acceptance-" + std::to_string(std::uint64_t(
                                   Clock::now().time_since_epoch().count())));
    std::size_t failures = 0;
    std::ostringstream detail;
    const struct {
        Method method;
        Mode mode;
    } variants[] = {{Method::mm, Mode::joint},
                    {Method::tv, Mode::on},
                    {Method::sft, Mode::off}};
    for (const auto& v : variants) {
        ExperimentConfig cfg;
        cfg.task = "FIXTURE-B";
        cfg.train.method = v.method;
        cfg.train.mode = v.mode;
        cfg.train.max_steps = 200;
        cfg.train.eval_every = 50;
        cfg.train.seed = 5;
        cfg.sft_steps = 10;
        cfg.dataset_size = 64;
        std::string paths[2];
        for (int round = 0; round < 2; ++round) {
            cfg.out_dir =
                (root / (to_string(v.method) + std::to_string(round))).string();
            std::ostringstream sink;
            if (cmd_train(cfg, sink) != 0) {
                ++failures;
                continue;
            }
            for (const auto& e : fs::directory_iterator(cfg.out_dir))
                if (e.is_directory())
                    paths[round] = (e.path() / "metrics.jsonl").string();
        }
        const bool same = !paths[0].empty() && !paths[1].empty() &&
                          read_text_file(paths[0]) == read_text_file(paths[1]);
        if (!same) ++failures;
        detail << " " << to_string(v.method) << "-" << to_string(v.mode) << ":"
               << (same ? "identical" : "DIFFERS");
    }
    std::error_code ec;
    fs::remove_all(root, ec);
    std::ostringstream d;
    d << "3 configs re-executed;" << detail.str() << ", " << seconds_since(t0)
      << "s";
    return {failures == 0, d.str()};
}

}  // namespace

int main() {
    const struct {
        const char* name;
        std::function<Outcome()> run;
    } criteria[] = {
        {"population advantage identities equal the exact gap", pdl_identities},
        {"gap <= box-sup = total-variation chain on rescaled tasks", bound_chain},
        {"analytic gradients match central finite differences", gradient_fidelity},
        {"Monte Carlo estimators stay inside 4 standard errors", estimator_consistency},
        {"adversarial training halves the pretrained gap", training_efficacy},
        {"comparison grid completes with adversarial parity", comparison_grid},
        {"re-executed runs emit byte-identical metrics", rerun_determinism},
    };
    int failures = 0;
    int index = 0;
    for (const auto& c : criteria) {
        ++index;
        Outcome outcome;
        try {
            outcome = c.run();
        } catch (const std::exception& e) {
            outcome = {false, std::string("exception: ") + e.what()};
        }
        if (!outcome.pass) ++failures;
        std::printf("[%s] %d. %s: %s\n", outcome.pass ? "PASS" : "FAIL", index,
                    c.name, outcome.detail.c_str());
        std::fflush(stdout);
    }
    return failures;
}
