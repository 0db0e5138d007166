#pragma once

#include <iosfwd>
#include <string>
#include <vector>

#include "kdlab/trainer.hpp"

namespace kdlab {

/// Environment variable naming the default output root; "runs" if unset.
inline constexpr const char* output_root_env = "KDLAB_OUT";

std::string default_output_root();

/**
Everything a command-line invocation pins down. Round trips through
JSON, so a run directory's config.json reproduces the run.
*/
struct ExperimentConfig {
    std::string task = "FIXTURE-A";  // fixture name or path to a task file
    PolicyKind policy_kind = PolicyKind::tabular_softmax;
    TrainConfig train;
    std::string out_dir;  // empty picks default_output_root()

    // Pretraining (and the sft method itself).
    std::size_t dataset_size = 256;
    std::size_t sft_steps = 0;  // behavior-cloning steps before training
    double sft_lr = 0.3;
    std::size_t sft_batch = 16;

    // verify
    std::size_t grad_check_points = 12;  // per objective
    bool inject_gradient_fault = false;

    // sweep
    std::vector<Method> sweep_methods = {Method::mm, Method::kl, Method::rkl,
                                         Method::js, Method::tv};
    std::vector<Mode> sweep_modes = {Mode::off, Mode::on, Mode::joint};
    std::vector<std::uint64_t> sweep_seeds = {1, 2, 3};

    std::string resolved_out_dir() const;
};

std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const std::string& text);

/// Fixture name or path to a serialized task document.
Task load_task_spec(const std::string& name_or_path);

/**
Writes a run directory: config.json, metrics.jsonl (one sorted-key
object per evaluation; deterministic bytes for a given config),
policy.json, critic checkpoints for adversarial runs, and summary.json
(which carries the wall clock and is the only nondeterministic file).
Returns the directory path.
*/
std::string persist_run(const RunRecord& rec, const ExperimentConfig& cfg,
                        const std::string& root);

std::vector<MetricsRow> read_metrics_file(const std::string& path);

/// Identity checks plus gradient validation; exit code 0 iff everything
/// holds. Writes certification.json and gradient_checks.json under
/// <out>/verify-<task>/.
int cmd_verify(const ExperimentConfig& cfg, std::ostream& out);

/// One training run; persists a run directory and prints its path plus
/// the final metrics row.
int cmd_train(const ExperimentConfig& cfg, std::ostream& out);

/// Full methods x modes x seeds comparison; persists each cell's run
/// directory plus sweep_summary.json / sweep_summary.csv.
int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out);

/// What export-plot projects out of the metrics records.
enum class PlotKind { loss_curve, mm_curve, gap_curve, distance_bars };

std::string to_string(PlotKind k);
PlotKind plot_kind_from_string(const std::string& s);

/**
Projects run metrics into comma-separated tables for external plotting.
Curve kinds write one file per run directory (a single run writes
exactly csv_path; further runs insert the run id before the extension).
distance_bars groups the runs by (method, mode) and writes one row per
group with seed means and sample stdevs of the final metrics row.
*/
int cmd_export_plot(const std::vector<std::string>& run_dirs, PlotKind what,
                    const std::string& csv_path, std::ostream& out);

}  // namespace kdlab
