#include "kdlab/trainer.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cmath>
#include <deque>

#include "kdlab/fixtures.hpp"
#include "kdlab/gradients.hpp"
#include "kdlab/oracle.hpp"

namespace kdlab {

void TrainConfig::validate() const {
    if (!(eta > 0.0) || !std::isfinite(eta))
        throw std::invalid_argument("eta must be positive");
    if (!(alpha > 0.0) || !std::isfinite(alpha))
        throw std::invalid_argument("alpha must be positive");
    if (k_inner == 0) throw std::invalid_argument("k_inner must be positive");
    if (batch_m == 0) throw std::invalid_argument("batch_m must be positive");
    // max_steps = 0 is legal: record initial metrics and return.
    if (eval_every == 0) throw std::invalid_argument("eval_every must be positive");
    if (!(convergence_tol >= 0.0))
        throw std::invalid_argument("convergence_tol must be nonnegative");
}

double TrainConfig::effective_bound(const Task& task) const {
    if (critic_bound > 0.0) return critic_bound;
    const double auto_bound = task.r_max * static_cast<double>(task.horizon);
    return auto_bound > 0.0 ? auto_bound : 1.0;
}

const MetricsRow& RunRecord::final_metrics() const {
    if (metrics.empty()) throw MissingMetricsError("run has no metrics rows");
    return metrics.back();
}

namespace {

std::string slug(const std::string& s) {
    std::string out;
    for (char c : s) {
        if (std::isalnum(static_cast<unsigned char>(c)))
            out.push_back(static_cast<char>(
                std::tolower(static_cast<unsigned char>(c))));
        else if (!out.empty() && out.back() != '-')
            out.push_back('-');
    }
    while (!out.empty() && out.back() == '-') out.pop_back();
    return out;
}

std::string make_run_id(const Task& task, const TrainConfig& cfg) {
    return slug(task.name) + "_" + to_string(cfg.method) + "_" +
           to_string(cfg.mode) + "_s" + std::to_string(cfg.seed);
}

bool enumeration_feasible(const Task& task, std::size_t cap) {
    try {
        check_enumeration_cap(task, cap);
        return true;
    } catch (const CapExceededError&) {
        return false;
    }
}

double mc_j(const Task& task, const Policy& pol, std::size_t n,
            std::uint64_t master) {
    numvec vals(n);
    for (std::size_t i = 0; i < n; ++i) {
        RandomStream stream = RandomStream::derived(master, i);
        vals[i] = trajectory_return(
            rollout(task, pol, stream, SourceTag::dataset));
    }
    return pairwise_sum(vals) / static_cast<double>(n);
}

struct Evaluator {
    const Task& task;
    const TrainConfig& cfg;
    double bound;
    bool exact;

    Evaluator(const Task& t, const TrainConfig& c)
        : task(t), cfg(c), bound(c.effective_bound(t)),
          exact(enumeration_feasible(t, c.cap)) {}

    MetricsRow row(const Policy& student, const QFunction* f1,
                   const QFunction* f2, const Dataset* data,
                   std::size_t step) const {
        MetricsRow r;
        r.step = step;
        r.seed = cfg.seed;
        if (exact) {
            r.exact_gap = exact_gap(task, student, cfg.cap);
            r.d_tv_off = exact_distance(task, Method::tv, Mode::off, student,
                                        cfg.cap);
            r.d_kl_off = exact_distance(task, Method::kl, Mode::off, student,
                                        cfg.cap);
            r.d_mm_off = box_sup_mm(task, Mode::off, student, bound, cfg.cap);
            r.d_mm_on = box_sup_mm(task, Mode::on, student, bound, cfg.cap);
            r.loss = exact_loss(student, f1, f2);
        } else {
            const std::uint64_t master = mix_seed(cfg.seed, 0xE7A1 + step);
            r.exact_gap = mc_j(task, task.teacher, cfg.eval_traj, master) -
                          mc_j(task, student, cfg.eval_traj, mix_seed(master, 1));
            RandomStream rng(mix_seed(master, 2));
            r.d_tv_off = policy_distance(task, Method::tv, Mode::off, student,
                                         cfg.eval_traj, rng);
            r.d_kl_off = policy_distance(task, Method::kl, Mode::off, student,
                                         cfg.eval_traj, rng);
            AdversarialBudget budget;
            budget.maximizer = MmMaximizer::gradient_ascent;
            budget.bound = bound;
            budget.critic_kind = QKind::linear_head;
            budget.exact_eval = false;
            budget.n_eval_traj = cfg.eval_traj;
            r.d_mm_off = mm_distance(task, Mode::off, student, budget, rng).value;
            r.d_mm_on = mm_distance(task, Mode::on, student, budget, rng).value;
            r.loss = sampled_loss(student, f1, f2, rng);
        }
        if (cfg.method == Method::sft && data) {
            // loss column for cloning runs is its own objective
            r.loss = exact ? population_sft_nll(task, student, cfg.cap)
                           : sampled_nll(student, *data);
        }
        return r;
    }

  private:
    double exact_loss(const Policy& student, const QFunction* f1,
                      const QFunction* f2) const {
        switch (cfg.method) {
            case Method::mm:
                return population_loss(task, student, *f1, *f2, cfg.cap);
            case Method::sft:
                return population_sft_nll(task, student, cfg.cap);
            default:
                return exact_distance(task, cfg.method, cfg.mode, student,
                                      cfg.cap);
        }
    }

    double sampled_loss(const Policy& student, const QFunction* f1,
                        const QFunction* f2, RandomStream& rng) const {
        if (cfg.method == Method::mm) {
            std::vector<Trajectory> batch_off, batch_on;
            for (std::size_t i = 0; i < cfg.eval_traj; ++i) {
                batch_off.push_back(
                    rollout(task, task.teacher, rng, SourceTag::teacher));
                batch_on.push_back(
                    rollout(task, student, rng, SourceTag::student));
            }
            return adversarial_loss(task, student, *f1, *f2, batch_off,
                                    batch_on);
        }
        return policy_distance(task, cfg.method, cfg.mode, student,
                               cfg.eval_traj, rng);
    }

    double sampled_nll(const Policy& student, const Dataset& data) const {
        numvec terms;
        terms.reserve(data.size() * task.horizon);
        for (const Trajectory& tr : data.trajectories)
            for (std::size_t t = 0; t < task.horizon; ++t) {
                const Prefix p = tr.prefix_at(t);
                terms.push_back(-std::log(
                    student.action_probs(p)[static_cast<std::size_t>(
                        tr.actions[t])]));
            }
        return pairwise_sum(terms) / static_cast<double>(terms.size());
    }
};

/// Shared eval cadence + convergence bookkeeping.
struct RunDriver {
    RunRecord& rec;
    const Evaluator& ev;
    const TrainConfig& cfg;
    std::deque<double> gap_window;

    void push_row(const Policy& student, const QFunction* f1,
                  const QFunction* f2, const Dataset* data, std::size_t step) {
        rec.metrics.push_back(ev.row(student, f1, f2, data, step));
        const double gap = rec.metrics.back().exact_gap;
        gap_window.push_back(gap);
        while (gap_window.size() > 3) gap_window.pop_front();
        if (gap_window.size() == 3 &&
            std::abs(gap_window[2] - gap_window[1]) < cfg.convergence_tol &&
            std::abs(gap_window[1] - gap_window[0]) < cfg.convergence_tol)
            rec.converged = true;
    }

    bool due(std::size_t step) const {
        return step % cfg.eval_every == 0 || step == cfg.max_steps;
    }
};

}  // namespace

RunRecord train_mm(const Task& task, Policy student, QFunction f1,
                   QFunction f2, const TrainConfig& cfg) {
    cfg.validate();
    if (cfg.method != Method::mm)
        throw std::invalid_argument("train_mm drives method mm");
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.run_id = make_run_id(task, cfg);
    rec.task_name = task.name;
    rec.config = cfg;

    const Evaluator ev(task, cfg);
    RunDriver driver{rec, ev, cfg, {}};
    RandomStream rng(cfg.seed);
    const double m_inv = 1.0 / static_cast<double>(cfg.batch_m);

    numvec policy_grad(student.shape().param_count());
    numvec critic_grad;
    Policy last_student = student;
    QFunction last_f1 = f1;
    QFunction last_f2 = f2;

    const bool off_side = cfg.mode != Mode::on;
    const bool on_side = cfg.mode != Mode::off;
    const auto active_objective = [&](const Policy& pol, const QFunction& c1,
                                      const QFunction& c2) {
        double v = 0.0;
        if (off_side) v += population_u_off(task, pol, c1, cfg.cap);
        if (on_side) v += population_u_on(task, pol, c2, cfg.cap);
        return v;
    };

    driver.push_row(student, &f1, &f2, nullptr, 0);
    std::size_t step = 0;
    try {
        for (step = 1; step <= cfg.max_steps; ++step) {
            const bool trace =
                cfg.record_inner_ascent && ev.exact;
            double before = 0.0;
            if (trace) before = active_objective(student, f1, f2);

            for (std::size_t k = 0; k < cfg.k_inner; ++k) {
                if (off_side) {
                    critic_grad.assign(f1.shape().param_count(), 0.0);
                    for (std::size_t i = 0; i < cfg.batch_m; ++i) {
                        const Trajectory tr =
                            rollout(task, task.teacher, rng, SourceTag::teacher);
                        add_critic_grad_off(task, tr, student, f1, m_inv,
                                            critic_grad);
                    }
                    f1.axpy_params(cfg.alpha * cfg.eta, critic_grad);
                }
                if (on_side) {
                    critic_grad.assign(f2.shape().param_count(), 0.0);
                    for (std::size_t i = 0; i < cfg.batch_m; ++i) {
                        const Trajectory tr =
                            rollout(task, student, rng, SourceTag::student);
                        add_critic_grad_on(task, tr, task.teacher, f2, m_inv,
                                           critic_grad);
                    }
                    f2.axpy_params(cfg.alpha * cfg.eta, critic_grad);
                }
            }
            if (trace)
                rec.inner_ascent.emplace_back(
                    before, active_objective(student, f1, f2));

            std::fill(policy_grad.begin(), policy_grad.end(), 0.0);
            if (on_side)
                for (std::size_t i = 0; i < cfg.batch_m; ++i) {
                    const Trajectory tr =
                        rollout(task, student, rng, SourceTag::student);
                    add_policy_grad_on(task, tr, student, task.teacher, f2,
                                       m_inv, policy_grad);
                }
            if (off_side)
                for (std::size_t i = 0; i < cfg.batch_m; ++i) {
                    const Trajectory tr =
                        rollout(task, task.teacher, rng, SourceTag::teacher);
                    add_policy_grad_off(task, tr, student, f1, -m_inv,
                                        policy_grad);
                }
            student.axpy_params(-cfg.eta, policy_grad);

            last_student = student;
            last_f1 = f1;
            last_f2 = f2;
            if (driver.due(step)) {
                driver.push_row(student, &f1, &f2, nullptr, step);
                if (rec.converged) break;
            }
        }
    } catch (const NonFiniteError& e) {
        rec.aborted = true;
        rec.abort_reason = e.what();
        student = last_student;
        f1 = last_f1;
        f2 = last_f2;
    }
    rec.steps_run = std::min(step, cfg.max_steps);
    if (rec.metrics.back().step != rec.steps_run)
        driver.push_row(student, &f1, &f2, nullptr, rec.steps_run);
    rec.student = std::move(student);
    rec.f1 = std::move(f1);
    rec.f2 = std::move(f2);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return rec;
}

RunRecord train_baseline(const Task& task, Policy student,
                         const TrainConfig& cfg) {
    cfg.validate();
    if (cfg.method == Method::mm || cfg.method == Method::sft)
        throw std::invalid_argument(
            "train_baseline drives step-wise distribution matching");
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.run_id = make_run_id(task, cfg);
    rec.task_name = task.name;
    rec.config = cfg;

    const Evaluator ev(task, cfg);
    RunDriver driver{rec, ev, cfg, {}};
    RandomStream rng(cfg.seed);
    const double m_inv = 1.0 / static_cast<double>(cfg.batch_m);

    numvec grad(student.shape().param_count());
    numvec score(student.shape().param_count());
    Policy last_student = student;

    driver.push_row(student, nullptr, nullptr, nullptr, 0);
    std::size_t step = 0;
    try {
        for (step = 1; step <= cfg.max_steps; ++step) {
            std::fill(grad.begin(), grad.end(), 0.0);
            bool skip = false;

            // Direct term at the visited states: for each state,
            // sum_y dM/dq_y * q_y * grad log q_y.
            const auto add_direct = [&](const Prefix& p) {
                const numvec q = student.action_probs(p);
                const numvec gm = step_distance_grad(
                    cfg.method, task.teacher.action_probs(p), q);
                if (!all_finite(gm)) return false;
                for (std::size_t y = 0; y < q.size(); ++y) {
                    const double coeff = m_inv * gm[y] * q[y];
                    if (coeff != 0.0)
                        student.add_log_prob_grad(p, static_cast<int>(y),
                                                  coeff, grad);
                }
                return true;
            };

            if (cfg.mode != Mode::on)
                for (std::size_t i = 0; i < cfg.batch_m && !skip; ++i) {
                    const Trajectory tr =
                        rollout(task, task.teacher, rng, SourceTag::teacher);
                    for (std::size_t t = 0; t < task.horizon && !skip; ++t)
                        skip = !add_direct(tr.prefix_at(t));
                }
            if (cfg.mode != Mode::off)
                for (std::size_t i = 0; i < cfg.batch_m && !skip; ++i) {
                    const Trajectory tr =
                        rollout(task, student, rng, SourceTag::student);
                    double dist_sum = 0.0;
                    Prefix p;
                    p.input = tr.input;
                    for (std::size_t t = 0; t < task.horizon && !skip; ++t) {
                        const double d = step_distance(
                            cfg.method, task.teacher.action_probs(p),
                            student.action_probs(p));
                        if (!std::isfinite(d)) {
                            skip = true;
                            break;
                        }
                        dist_sum += d;
                        skip = !add_direct(p);
                        p.generated.push_back(tr.actions[t]);
                    }
                    if (skip) break;
                    if (cfg.full_on_policy_gradient && dist_sum != 0.0) {
                        // REINFORCE visitation term: score(tau) * D(tau)
                        std::fill(score.begin(), score.end(), 0.0);
                        for (std::size_t t = 0; t < task.horizon; ++t)
                            student.add_log_prob_grad(tr.prefix_at(t),
                                                      tr.actions[t], 1.0, score);
                        const double w = m_inv * dist_sum;
                        for (std::size_t j = 0; j < grad.size(); ++j)
                            grad[j] += w * score[j];
                    }
                }

            if (skip) {
                ++rec.skipped_steps;
            } else {
                student.axpy_params(-cfg.eta, grad);
                last_student = student;
            }
            if (driver.due(step)) {
                driver.push_row(student, nullptr, nullptr, nullptr, step);
                if (rec.converged) break;
            }
        }
    } catch (const NonFiniteError& e) {
        rec.aborted = true;
        rec.abort_reason = e.what();
        student = last_student;
    }
    rec.steps_run = std::min(step, cfg.max_steps);
    if (rec.metrics.back().step != rec.steps_run)
        driver.push_row(student, nullptr, nullptr, nullptr, rec.steps_run);
    rec.student = std::move(student);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return rec;
}

RunRecord train_sft(const Task& task, Policy student, const Dataset& data,
                    const TrainConfig& cfg) {
    cfg.validate();
    if (cfg.method != Method::sft)
        throw std::invalid_argument("train_sft drives method sft");
    const auto start = std::chrono::steady_clock::now();
    RunRecord rec;
    rec.run_id = make_run_id(task, cfg);
    rec.task_name = task.name;
    rec.config = cfg;

    const Evaluator ev(task, cfg);
    RunDriver driver{rec, ev, cfg, {}};
    RandomStream rng(cfg.seed);

    driver.push_row(student, nullptr, nullptr, &data, 0);
    std::size_t done = 0;
    try {
        while (done < cfg.max_steps) {
            const std::size_t chunk =
                std::min(cfg.eval_every, cfg.max_steps - done);
            SftResult res = sft_train(task, data, std::move(student), cfg.eta,
                                      chunk, rng, cfg.batch_m);
            student = std::move(res.policy);
            done += chunk;
            driver.push_row(student, nullptr, nullptr, &data, done);
            if (rec.converged) break;
        }
    } catch (const NonFiniteError& e) {
        rec.aborted = true;
        rec.abort_reason = e.what();
    }
    rec.steps_run = done;
    rec.student = std::move(student);
    rec.wall_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start)
            .count();
    return rec;
}

std::vector<SweepSummaryRow> SweepResult::summarize() const {
    std::vector<SweepSummaryRow> rows;
    for (const SweepCell& cell : cells) {
        auto it = std::find_if(rows.begin(), rows.end(), [&](const auto& r) {
            return r.method == cell.method && r.mode == cell.mode;
        });
        if (it == rows.end()) {
            rows.push_back({cell.method, cell.mode, 0, 0, 0, 0, 0});
            it = rows.end() - 1;
        }
        if (cell.failed) continue;
        const MetricsRow& fin = cell.record.final_metrics();
        it->n_seeds += 1;
        it->mean_gap += fin.exact_gap;
        it->stdev_gap += fin.exact_gap * fin.exact_gap;
        it->mean_d_mm_on += fin.d_mm_on;
        it->mean_d_mm_off += fin.d_mm_off;
    }
    for (SweepSummaryRow& r : rows) {
        if (r.n_seeds == 0) continue;
        const double n = static_cast<double>(r.n_seeds);
        r.mean_gap /= n;
        r.mean_d_mm_on /= n;
        r.mean_d_mm_off /= n;
        const double var =
            std::max(0.0, r.stdev_gap / n - r.mean_gap * r.mean_gap);
        r.stdev_gap = std::sqrt(var);
    }
    return rows;
}

SweepResult compare_sweep(const Task& task, std::span<const Method> methods,
                          std::span<const Mode> modes,
                          std::span<const std::uint64_t> seeds,
                          const TrainConfig& base, const SweepSetup& setup) {
    if (methods.empty() || modes.empty() || seeds.empty())
        throw std::invalid_argument("sweep needs methods, modes and seeds");
    SweepResult result;
    for (const std::uint64_t seed : seeds) {
        RandomStream data_rng(mix_seed(seed, 0xDA7A));
        const Dataset data = generate_dataset(task, setup.dataset_size, data_rng);
        Policy start = make_student(task, setup.policy_kind, seed);
        if (setup.sft_pretrain_steps > 0) {
            RandomStream sft_rng(mix_seed(seed, 0x5F7));
            start = sft_train(task, data, std::move(start), setup.sft_lr,
                              setup.sft_pretrain_steps, sft_rng,
                              setup.sft_batch)
                        .policy;
        }
        for (const Method method : methods)
            for (const Mode mode : modes) {
                SweepCell cell;
                cell.method = method;
                cell.mode = mode;
                cell.seed = seed;
                TrainConfig cfg = base;
                cfg.method = method;
                cfg.mode = mode;
                cfg.seed = seed;
                try {
                    if (method == Method::mm) {
                        const double bound = cfg.effective_bound(task);
                        QFunction f1 = make_critic(task, cfg.critic_kind, bound,
                                                   cfg.critic_hidden,
                                                   mix_seed(seed, 0xF1));
                        QFunction f2 = make_critic(task, cfg.critic_kind, bound,
                                                   cfg.critic_hidden,
                                                   mix_seed(seed, 0xF2));
                        cell.record = train_mm(task, start, std::move(f1),
                                               std::move(f2), cfg);
                    } else if (method == Method::sft) {
                        cell.record = train_sft(task, start, data, cfg);
                    } else {
                        cell.record = train_baseline(task, start, cfg);
                    }
                } catch (const std::exception& e) {
                    cell.failed = true;
                    cell.error = e.what();
                }
                result.cells.push_back(std::move(cell));
            }
    }
    return result;
}

}  // namespace kdlab
