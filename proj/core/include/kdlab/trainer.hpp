#pragma once

#include <optional>
#include <utility>
#include <vector>

#include "kdlab/objectives.hpp"
#include "kdlab/sft.hpp"

namespace kdlab {

struct TrainConfig {
    Method method = Method::mm;
    Mode mode = Mode::joint;
    double eta = 0.05;            // policy step size
    double alpha = 0.1;           // critic step size ratio; critics move at alpha * eta
    std::size_t k_inner = 5;      // critic ascent rounds per policy step
    std::size_t batch_m = 4;      // trajectories per gradient estimate
    std::size_t max_steps = 2000;
    std::size_t eval_every = 100;
    std::uint64_t seed = 1;
    double critic_bound = 0.0;    // tanh bound; 0 picks r_max * horizon
    QKind critic_kind = QKind::tabular;
    std::size_t critic_hidden = 16;
    /// When false, on-policy distribution matching drops the visitation
    /// (score) term and differentiates only through visited states.
    bool full_on_policy_gradient = true;
    /// Stop early when the exact gap moves less than this across three
    /// consecutive evaluations.
    double convergence_tol = 1e-5;
    /// Record the population saddle objective before and after each
    /// inner critic loop (adversarial runs only; costs one exact solve
    /// per side per step).
    bool record_inner_ascent = false;
    std::size_t cap = default_enumeration_cap;
    /// Monte Carlo sizes used for metrics when the task exceeds the cap.
    std::size_t eval_traj = 2048;

    void validate() const;
    double effective_bound(const Task& task) const;
};

/// One metrics evaluation. d_mm columns are the exact supremum of the
/// moment-matching functional over the run's bounded critic box; d_tv
/// and d_kl are teacher-side expected step distances.
struct MetricsRow {
    std::size_t step = 0;
    double loss = 0.0;
    double d_mm_on = 0.0;
    double d_mm_off = 0.0;
    double exact_gap = 0.0;
    double d_tv_off = 0.0;
    double d_kl_off = 0.0;
    std::uint64_t seed = 0;
};

struct RunRecord {
    std::string run_id;
    std::string task_name;
    TrainConfig config;
    std::vector<MetricsRow> metrics;
    std::optional<Policy> student;  // last good parameters
    std::optional<QFunction> f1, f2;
    std::size_t steps_run = 0;
    std::size_t skipped_steps = 0;  // non-finite gradients (support sentinels)
    bool aborted = false;
    std::string abort_reason;
    bool converged = false;
    /// (objective before, after) per inner critic loop when recorded.
    std::vector<std::pair<double, double>> inner_ascent;
    double wall_seconds = 0.0;  // excluded from serialized metrics

    const MetricsRow& final_metrics() const;
};

/**
Alternating saddle-point training. Each outer step runs k_inner rounds
of critic ascent at step size alpha * eta (the off critic on fresh
teacher batches, the on critic on fresh student batches, per the mode),
then takes one policy descent step on fresh batches. A non-finite
update aborts the run, keeping the last finite parameters.
*/
RunRecord train_mm(const Task& task, Policy student, QFunction f1,
                   QFunction f2, const TrainConfig& cfg);

/**
Step-wise distribution matching (kl, rkl, js, tv). Off mode
differentiates the per-state distance at teacher-visited states; on
mode adds the REINFORCE visitation term unless disabled; joint sums
both. Steps whose gradients hit a support sentinel are skipped and
counted.
*/
RunRecord train_baseline(const Task& task, Policy student,
                         const TrainConfig& cfg);

/// Behavior cloning wrapped in the same record format; cfg.eta is the
/// learning rate and cfg.batch_m the batch size.
RunRecord train_sft(const Task& task, Policy student, const Dataset& data,
                    const TrainConfig& cfg);

struct SweepSetup {
    PolicyKind policy_kind = PolicyKind::tabular_softmax;
    std::size_t dataset_size = 256;
    std::size_t sft_pretrain_steps = 40;
    double sft_lr = 0.3;
    std::size_t sft_batch = 16;
};

struct SweepCell {
    Method method = Method::mm;
    Mode mode = Mode::joint;
    std::uint64_t seed = 0;
    bool failed = false;
    std::string error;
    RunRecord record;
};

struct SweepSummaryRow {
    Method method = Method::mm;
    Mode mode = Mode::joint;
    std::size_t n_seeds = 0;
    double mean_gap = 0.0;
    double stdev_gap = 0.0;
    double mean_d_mm_on = 0.0;
    double mean_d_mm_off = 0.0;
};

struct SweepResult {
    std::vector<SweepCell> cells;
    std::vector<SweepSummaryRow> summarize() const;
};

/**
Trains every (method, mode, seed) cell from a shared starting point:
per seed, one dataset is generated and one student is pretrained by
behavior cloning, then cloned into each cell. A cell that throws is
recorded as failed without stopping the sweep.
*/
SweepResult compare_sweep(const Task& task, std::span<const Method> methods,
                          std::span<const Mode> modes,
                          std::span<const std::uint64_t> seeds,
                          const TrainConfig& base, const SweepSetup& setup);

}  // namespace kdlab
