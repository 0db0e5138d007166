#include "kdlab/experiment.hpp"

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>
#include <utility>

#include <nlohmann/json.hpp>

#include "kdlab/fixtures.hpp"
#include "kdlab/gradients.hpp"
#include "kdlab/oracle.hpp"
#include "kdlab/serialization.hpp"

namespace kdlab {

namespace {

using nlohmann::json;
namespace fs = std::filesystem;

/// JSON has no infinities; non-finite metric values serialize as null.
json json_num(double x) {
    if (std::isfinite(x)) return x;
    return nullptr;
}

double num_or_nan(const json& j) {
    return j.is_number() ? j.get<double>()
                         : std::numeric_limits<double>::quiet_NaN();
}

json train_config_to_json_obj(const TrainConfig& t) {
    json j;
    j["method"] = to_string(t.method);
    j["mode"] = to_string(t.mode);
    j["eta"] = t.eta;
    j["alpha"] = t.alpha;
    j["k_inner"] = t.k_inner;
    j["batch_m"] = t.batch_m;
    j["max_steps"] = t.max_steps;
    j["eval_every"] = t.eval_every;
    j["seed"] = t.seed;
    j["critic_bound"] = t.critic_bound;
    j["critic_kind"] = to_string(t.critic_kind);
    j["critic_hidden"] = t.critic_hidden;
    j["full_on_policy_gradient"] = t.full_on_policy_gradient;
    j["convergence_tol"] = t.convergence_tol;
    j["record_inner_ascent"] = t.record_inner_ascent;
    j["cap"] = t.cap;
    j["eval_traj"] = t.eval_traj;
    return j;
}

TrainConfig train_config_from_json_obj(const json& j) {
    TrainConfig t;
    t.method = method_from_string(j.at("method"));
    t.mode = mode_from_string(j.at("mode"));
    t.eta = j.at("eta");
    t.alpha = j.at("alpha");
    t.k_inner = j.at("k_inner");
    t.batch_m = j.at("batch_m");
    t.max_steps = j.at("max_steps");
    t.eval_every = j.at("eval_every");
    t.seed = j.at("seed");
    t.critic_bound = j.at("critic_bound");
    t.critic_kind = q_kind_from_string(j.at("critic_kind"));
    t.critic_hidden = j.at("critic_hidden");
    t.full_on_policy_gradient = j.at("full_on_policy_gradient");
    t.convergence_tol = j.at("convergence_tol");
    t.record_inner_ascent = j.at("record_inner_ascent");
    t.cap = j.at("cap");
    t.eval_traj = j.at("eval_traj");
    return t;
}

json metrics_row_to_json_obj(const MetricsRow& r) {
    json j;
    j["step"] = r.step;
    j["loss"] = json_num(r.loss);
    j["d_mm_on"] = json_num(r.d_mm_on);
    j["d_mm_off"] = json_num(r.d_mm_off);
    j["exact_gap"] = json_num(r.exact_gap);
    j["d_tv_off"] = json_num(r.d_tv_off);
    j["d_kl_off"] = json_num(r.d_kl_off);
    j["seed"] = r.seed;
    return j;
}

MetricsRow metrics_row_from_json_obj(const json& j) {
    MetricsRow r;
    r.step = j.at("step");
    r.loss = num_or_nan(j.at("loss"));
    r.d_mm_on = num_or_nan(j.at("d_mm_on"));
    r.d_mm_off = num_or_nan(j.at("d_mm_off"));
    r.exact_gap = num_or_nan(j.at("exact_gap"));
    r.d_tv_off = num_or_nan(j.at("d_tv_off"));
    r.d_kl_off = num_or_nan(j.at("d_kl_off"));
    r.seed = j.at("seed");
    return r;
}

std::string format_metrics_line(const MetricsRow& r) {
    return metrics_row_to_json_obj(r).dump();
}

}  // namespace

std::string default_output_root() {
    if (const char* env = std::getenv(output_root_env); env && *env)
        return env;
    return "runs";
}

std::string ExperimentConfig::resolved_out_dir() const {
    return out_dir.empty() ? default_output_root() : out_dir;
}

std::string experiment_config_to_json(const ExperimentConfig& cfg) {
    json j;
    j["schema"] = "kdlab.experiment.v1";
    j["task"] = cfg.task;
    j["policy_kind"] = to_string(cfg.policy_kind);
    j["train"] = train_config_to_json_obj(cfg.train);
    j["out_dir"] = cfg.out_dir;
    j["dataset_size"] = cfg.dataset_size;
    j["sft_steps"] = cfg.sft_steps;
    j["sft_lr"] = cfg.sft_lr;
    j["sft_batch"] = cfg.sft_batch;
    j["grad_check_points"] = cfg.grad_check_points;
    j["inject_gradient_fault"] = cfg.inject_gradient_fault;
    std::vector<std::string> methods, modes;
    for (Method m : cfg.sweep_methods) methods.push_back(to_string(m));
    for (Mode m : cfg.sweep_modes) modes.push_back(to_string(m));
    j["sweep_methods"] = methods;
    j["sweep_modes"] = modes;
    j["sweep_seeds"] = cfg.sweep_seeds;
    return j.dump(2) + "\n";
}

ExperimentConfig experiment_config_from_json(const std::string& text) {
    const json j = json::parse(text);
    if (j.value("schema", "") != "kdlab.experiment.v1")
        throw std::invalid_argument("not an experiment config");
    ExperimentConfig cfg;
    cfg.task = j.at("task");
    cfg.policy_kind = policy_kind_from_string(j.at("policy_kind"));
    cfg.train = train_config_from_json_obj(j.at("train"));
    cfg.out_dir = j.at("out_dir");
    cfg.dataset_size = j.at("dataset_size");
    cfg.sft_steps = j.at("sft_steps");
    cfg.sft_lr = j.at("sft_lr");
    cfg.sft_batch = j.at("sft_batch");
    cfg.grad_check_points = j.at("grad_check_points");
    cfg.inject_gradient_fault = j.at("inject_gradient_fault");
    cfg.sweep_methods.clear();
    for (const auto& m : j.at("sweep_methods"))
        cfg.sweep_methods.push_back(method_from_string(m));
    cfg.sweep_modes.clear();
    for (const auto& m : j.at("sweep_modes"))
        cfg.sweep_modes.push_back(mode_from_string(m));
    cfg.sweep_seeds = j.at("sweep_seeds").get<std::vector<std::uint64_t>>();
    return cfg;
}

Task load_task_spec(const std::string& name_or_path) {
    if (name_or_path.rfind("FIXTURE-", 0) == 0)
        return make_fixture_task(name_or_path);
    if (!fs::exists(name_or_path))
        throw UnknownFixtureError("no such fixture or task file: " +
                                  name_or_path);
    return task_from_json(read_text_file(name_or_path));
}

std::string persist_run(const RunRecord& rec, const ExperimentConfig& cfg,
                        const std::string& root) {
    const fs::path dir = fs::path(root) / rec.run_id;
    fs::create_directories(dir);
    write_text_file((dir / "config.json").string(),
                    experiment_config_to_json(cfg));
    std::string lines;
    for (const MetricsRow& r : rec.metrics)
        lines += format_metrics_line(r) + "\n";
    write_text_file((dir / "metrics.jsonl").string(), lines);
    if (rec.student)
        write_text_file((dir / "policy.json").string(),
                        policy_to_json(*rec.student));
    if (rec.f1)
        write_text_file((dir / "critic_f1.json").string(),
                        critic_to_json(*rec.f1));
    if (rec.f2)
        write_text_file((dir / "critic_f2.json").string(),
                        critic_to_json(*rec.f2));

    json summary;
    summary["run_id"] = rec.run_id;
    summary["task"] = rec.task_name;
    summary["steps_run"] = rec.steps_run;
    summary["skipped_steps"] = rec.skipped_steps;
    summary["aborted"] = rec.aborted;
    summary["abort_reason"] = rec.abort_reason;
    summary["converged"] = rec.converged;
    summary["wall_seconds"] = rec.wall_seconds;
    summary["final"] = metrics_row_to_json_obj(rec.final_metrics());
    if (!rec.inner_ascent.empty()) {
        std::size_t improved = 0;
        for (const auto& [before, after] : rec.inner_ascent)
            if (after >= before) ++improved;
        summary["inner_ascent_windows"] = rec.inner_ascent.size();
        summary["inner_ascent_improved"] = improved;
    }
    write_text_file((dir / "summary.json").string(), summary.dump(2) + "\n");
    return dir.string();
}

std::vector<MetricsRow> read_metrics_file(const std::string& path) {
    if (!fs::exists(path))
        throw MissingMetricsError("no metrics file at " + path);
    std::istringstream in(read_text_file(path));
    std::vector<MetricsRow> rows;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        rows.push_back(metrics_row_from_json_obj(json::parse(line)));
    }
    if (rows.empty()) throw MissingMetricsError("empty metrics file " + path);
    return rows;
}

namespace {

void print_check(std::ostream& out, const CertCheck& c) {
    out << (c.pass ? "[ok]   " : "[FAIL] ") << c.name << "  lhs=" << c.lhs
        << " rhs=" << c.rhs << " tol=" << c.tol << "\n";
}

struct GradCheckRecord {
    GradientReport report;
    PolicyKind policy_kind;
    QKind critic_kind;
    double tol;
    bool pass;
};

json grad_check_to_json_obj(const GradCheckRecord& g) {
    json j;
    j["objective"] = g.report.objective;
    j["policy_kind"] = to_string(g.policy_kind);
    j["critic_kind"] = to_string(g.critic_kind);
    j["h"] = g.report.h;
    j["max_rel_err"] = json_num(g.report.max_rel_err);
    j["max_abs_err"] = json_num(g.report.max_abs_err);
    j["worst_index"] = g.report.worst_index;
    j["tol"] = g.tol;
    j["pass"] = g.pass;
    return j;
}

/// Random evaluation point: tabular logits uniform(-2, 2), weight-based
/// parameterizations uniform(-1, 1).
Policy random_policy(const Task& task, PolicyKind kind, RandomStream& rng) {
    Policy pol = make_student(task, kind, rng.next_u64());
    numvec params(pol.shape().param_count());
    const double scale = kind == PolicyKind::tabular_softmax ? 2.0 : 1.0;
    for (double& v : params) v = rng.uniform(-scale, scale);
    pol.set_params(std::move(params));
    return pol;
}

QFunction random_critic(const Task& task, QKind kind, double bound,
                        RandomStream& rng) {
    QFunction f = make_critic(task, kind, bound, 8, rng.next_u64());
    numvec params(f.shape().param_count());
    for (double& v : params) v = rng.uniform(-1.0, 1.0);
    f.set_params(std::move(params));
    return f;
}

constexpr PolicyKind policy_kinds[] = {PolicyKind::tabular_softmax,
                                       PolicyKind::linear_softmax,
                                       PolicyKind::mlp};
constexpr QKind q_kinds[] = {QKind::tabular, QKind::linear_head,
                             QKind::mlp_head};
constexpr PopulationObjective objectives[] = {
    PopulationObjective::loss_wrt_theta, PopulationObjective::loss_wrt_phi1,
    PopulationObjective::loss_wrt_phi2, PopulationObjective::sft_loss};

bool objective_wrt_policy(PopulationObjective obj) {
    return obj == PopulationObjective::loss_wrt_theta ||
           obj == PopulationObjective::sft_loss;
}

}  // namespace

int cmd_verify(const ExperimentConfig& cfg, std::ostream& out) {
    const Task task = load_task_spec(cfg.task);
    const fs::path dir =
        fs::path(cfg.resolved_out_dir()) / ("verify-" + task.name);
    fs::create_directories(dir);
    bool all_ok = true;

    const CertificationReport cert = certify(task, default_student(task),
                                             cfg.train.cap);
    out << "certification (rescale factor " << cert.rescale_factor << ")\n";
    for (const CertCheck& c : cert.checks) print_check(out, c);
    all_ok = all_ok && cert.passed;
    {
        json j;
        j["passed"] = cert.passed;
        j["task"] = cert.task_name;
        j["rescale_factor"] = cert.rescale_factor;
        json checks = json::array();
        for (const CertCheck& c : cert.checks) {
            json cj;
            cj["name"] = c.name;
            cj["lhs"] = json_num(c.lhs);
            cj["rhs"] = json_num(c.rhs);
            cj["tol"] = c.tol;
            cj["pass"] = c.pass;
            checks.push_back(cj);
        }
        j["checks"] = checks;
        write_text_file((dir / "certification.json").string(),
                        j.dump(2) + "\n");
        if (!cert.passed)
            write_text_file((dir / "violating_instance.json").string(),
                            cert.violating_instance);
    }

    out << "gradient checks (" << cfg.grad_check_points
        << " points per objective, h=1e-5)\n";
    RandomStream rng(mix_seed(cfg.train.seed, 0x6AD));
    const double bound = cfg.train.effective_bound(task);
    std::vector<GradCheckRecord> records;
    for (const PopulationObjective obj : objectives) {
        double worst = 0.0;
        bool obj_ok = true;
        for (std::size_t i = 0; i < cfg.grad_check_points; ++i) {
            const PolicyKind pk = policy_kinds[i % 3];
            const QKind qk = q_kinds[(i / 3) % 3];
            const Policy student = random_policy(task, pk, rng);
            const QFunction f1 = random_critic(task, qk, bound, rng);
            const QFunction f2 = random_critic(task, qk, bound, rng);
            const bool wrt_policy = objective_wrt_policy(obj);
            const bool differentiates_mlp =
                wrt_policy ? pk == PolicyKind::mlp : qk == QKind::mlp_head;
            const double tol = differentiates_mlp ? 1e-4 : 1e-5;
            const double fault =
                cfg.inject_gradient_fault &&
                        obj == PopulationObjective::loss_wrt_theta && i == 0
                    ? 1e-3
                    : 0.0;
            GradCheckRecord rec{
                check_gradient(task, obj, student, f1, f2, 1e-5, cfg.train.cap,
                               1e-8, fault),
                pk, qk, tol, false};
            rec.pass = rec.report.pass(tol);
            worst = std::max(worst, rec.report.max_rel_err);
            obj_ok = obj_ok && rec.pass;
            if (!rec.pass)
                out << "[FAIL] " << rec.report.objective << " point " << i
                    << " (" << to_string(pk) << "/" << to_string(qk)
                    << ") max_rel_err=" << rec.report.max_rel_err
                    << " tol=" << tol
                    << (fault != 0.0 ? " (injected fault)" : "") << "\n";
            records.push_back(std::move(rec));
        }
        out << (obj_ok ? "[ok]   " : "[FAIL] ") << to_string(obj)
            << "  worst max_rel_err=" << worst << "\n";
        all_ok = all_ok && obj_ok;
    }
    {
        json arr = json::array();
        for (const GradCheckRecord& g : records)
            arr.push_back(grad_check_to_json_obj(g));
        write_text_file((dir / "gradient_checks.json").string(),
                        arr.dump(2) + "\n");
    }
    out << (all_ok ? "verify: all checks passed\n"
                   : "verify: CHECKS FAILED\n");
    return all_ok ? 0 : 1;
}

namespace {

Policy starting_student(const Task& task, const ExperimentConfig& cfg,
                        const Dataset* data) {
    Policy student = cfg.policy_kind == PolicyKind::tabular_softmax
                         ? default_student(task)
                         : make_student(task, cfg.policy_kind, cfg.train.seed);
    if (cfg.sft_steps > 0) {
        if (!data) throw std::invalid_argument("pretraining needs a dataset");
        RandomStream rng(mix_seed(cfg.train.seed, 0x5F7));
        student = sft_train(task, *data, std::move(student), cfg.sft_lr,
                            cfg.sft_steps, rng, cfg.sft_batch)
                      .policy;
    }
    return student;
}

void print_final(std::ostream& out, const RunRecord& rec) {
    const MetricsRow& fin = rec.final_metrics();
    out << rec.run_id << ": steps=" << rec.steps_run
        << (rec.converged ? " (converged)" : "")
        << (rec.aborted ? " (ABORTED: " + rec.abort_reason + ")" : "")
        << "\n  final: loss=" << fin.loss << " exact_gap=" << fin.exact_gap
        << " d_mm_off=" << fin.d_mm_off << " d_mm_on=" << fin.d_mm_on
        << " d_tv_off=" << fin.d_tv_off << " d_kl_off=" << fin.d_kl_off
        << "\n";
    if (rec.skipped_steps > 0)
        out << "  skipped " << rec.skipped_steps
            << " steps on support sentinels\n";
}

}  // namespace

int cmd_train(const ExperimentConfig& cfg, std::ostream& out) {
    const Task task = load_task_spec(cfg.task);
    const bool needs_data =
        cfg.sft_steps > 0 || cfg.train.method == Method::sft;
    Dataset data;
    if (needs_data) {
        RandomStream rng(mix_seed(cfg.train.seed, 0xDA7A));
        data = generate_dataset(task, cfg.dataset_size, rng);
    }
    Policy student = starting_student(task, cfg, needs_data ? &data : nullptr);

    RunRecord rec;
    switch (cfg.train.method) {
        case Method::mm: {
            const double bound = cfg.train.effective_bound(task);
            QFunction f1 =
                make_critic(task, cfg.train.critic_kind, bound,
                            cfg.train.critic_hidden,
                            mix_seed(cfg.train.seed, 0xF1));
            QFunction f2 =
                make_critic(task, cfg.train.critic_kind, bound,
                            cfg.train.critic_hidden,
                            mix_seed(cfg.train.seed, 0xF2));
            rec = train_mm(task, std::move(student), std::move(f1),
                           std::move(f2), cfg.train);
            break;
        }
        case Method::sft:
            rec = train_sft(task, std::move(student), data, cfg.train);
            break;
        default:
            rec = train_baseline(task, std::move(student), cfg.train);
    }
    const std::string dir = persist_run(rec, cfg, cfg.resolved_out_dir());
    print_final(out, rec);
    out << "run directory: " << dir << "\n";
    return rec.aborted ? 1 : 0;
}

int cmd_sweep(const ExperimentConfig& cfg, std::ostream& out) {
    const Task task = load_task_spec(cfg.task);
    SweepSetup setup;
    setup.policy_kind = cfg.policy_kind;
    setup.dataset_size = cfg.dataset_size;
    if (cfg.sft_steps > 0) setup.sft_pretrain_steps = cfg.sft_steps;
    setup.sft_lr = cfg.sft_lr;
    setup.sft_batch = cfg.sft_batch;

    const SweepResult result =
        compare_sweep(task, cfg.sweep_methods, cfg.sweep_modes,
                      cfg.sweep_seeds, cfg.train, setup);

    const fs::path root =
        fs::path(cfg.resolved_out_dir()) / ("sweep-" + task.name);
    fs::create_directories(root);
    bool any_failed = false;
    for (const SweepCell& cell : result.cells) {
        if (cell.failed) {
            any_failed = true;
            out << "[FAIL] " << to_string(cell.method) << "/"
                << to_string(cell.mode) << " seed " << cell.seed << ": "
                << cell.error << "\n";
            continue;
        }
        ExperimentConfig cell_cfg = cfg;
        cell_cfg.train = cell.record.config;
        persist_run(cell.record, cell_cfg, root.string());
    }

    json summary = json::array();
    out << "method mode   n  mean_gap     stdev_gap    mean_d_mm_off\n";
    for (const SweepSummaryRow& row : result.summarize()) {
        json r;
        r["method"] = to_string(row.method);
        r["mode"] = to_string(row.mode);
        r["n_seeds"] = row.n_seeds;
        r["mean_gap"] = json_num(row.mean_gap);
        r["stdev_gap"] = json_num(row.stdev_gap);
        r["mean_d_mm_on"] = json_num(row.mean_d_mm_on);
        r["mean_d_mm_off"] = json_num(row.mean_d_mm_off);
        summary.push_back(r);
        char line[160];
        std::snprintf(line, sizeof line, "%-6s %-5s %2zu  %-11.5g  %-11.5g  %-11.5g\n",
                      to_string(row.method).c_str(), to_string(row.mode).c_str(),
                      row.n_seeds, row.mean_gap, row.stdev_gap,
                      row.mean_d_mm_off);
        out << line;
    }
    write_text_file((root / "sweep_summary.json").string(),
                    summary.dump(2) + "\n");
    std::string csv =
        "method,mode,n_seeds,mean_gap,stdev_gap,mean_d_mm_on,mean_d_mm_off\n";
    for (const auto& r : summary)
        csv += r.at("method").get<std::string>() + "," +
               r.at("mode").get<std::string>() + "," +
               std::to_string(r.at("n_seeds").get<std::size_t>()) + "," +
               r.at("mean_gap").dump() + "," + r.at("stdev_gap").dump() + "," +
               r.at("mean_d_mm_on").dump() + "," +
               r.at("mean_d_mm_off").dump() + "\n";
    write_text_file((root / "sweep_summary.csv").string(), csv);
    out << "sweep directory: " << root.string() << "\n";
    return any_failed ? 1 : 0;
}

std::string to_string(PlotKind k) {
    switch (k) {
        case PlotKind::loss_curve: return "loss_curve";
        case PlotKind::mm_curve: return "mm_curve";
        case PlotKind::gap_curve: return "gap_curve";
        case PlotKind::distance_bars: return "distance_bars";
    }
    throw std::logic_error("bad PlotKind");
}

PlotKind plot_kind_from_string(const std::string& s) {
    if (s == "loss_curve") return PlotKind::loss_curve;
    if (s == "mm_curve") return PlotKind::mm_curve;
    if (s == "gap_curve") return PlotKind::gap_curve;
    if (s == "distance_bars") return PlotKind::distance_bars;
    throw std::invalid_argument("unknown plot kind: " + s);
}

namespace {

std::string csv_num(double x) {
    return std::isfinite(x) ? json(x).dump() : std::string("nan");
}

// "out.csv" + "runA" -> "out.runA.csv"; extensionless paths just append.
std::string per_run_path(const std::string& base, const std::string& run_id) {
    fs::path p(base);
    const std::string ext = p.extension().string();
    fs::path stem = p;
    stem.replace_extension();
    return stem.string() + "." + run_id + ext;
}

ExperimentConfig load_run_config(const fs::path& dir) {
    return experiment_config_from_json(
        read_text_file((dir / "config.json").string()));
}

}  // namespace

int cmd_export_plot(const std::vector<std::string>& run_dirs, PlotKind what,
                    const std::string& csv_path, std::ostream& out) {
    if (run_dirs.empty())
        throw std::invalid_argument("export needs at least one run directory");

    if (what == PlotKind::distance_bars) {
        // Final row per run, grouped by the run's (method, mode).
        std::map<std::pair<std::string, std::string>, std::vector<MetricsRow>>
            groups;
        for (const std::string& dir : run_dirs) {
            const auto rows =
                read_metrics_file((fs::path(dir) / "metrics.jsonl").string());
            const ExperimentConfig cfg = load_run_config(dir);
            groups[{to_string(cfg.train.method), to_string(cfg.train.mode)}]
                .push_back(rows.back());
        }
        std::string csv =
            "method,mode,n,gap_mean,gap_stdev,d_mm_on_mean,d_mm_on_stdev,"
            "d_mm_off_mean,d_mm_off_stdev\n";
        const auto stats = [](const std::vector<double>& xs) {
            SampleStats st = summarize(xs);
            const double stdev =
                xs.size() > 1
                    ? st.stderr_of_mean * std::sqrt(double(xs.size()))
                    : 0.0;
            return std::pair<double, double>(st.mean, stdev);
        };
        for (const auto& [key, rows] : groups) {
            std::vector<double> gap, on, off;
            for (const MetricsRow& r : rows) {
                gap.push_back(r.exact_gap);
                on.push_back(r.d_mm_on);
                off.push_back(r.d_mm_off);
            }
            const auto [gm, gs] = stats(gap);
            const auto [onm, ons] = stats(on);
            const auto [offm, offs] = stats(off);
            csv += key.first + "," + key.second + "," +
                   std::to_string(rows.size()) + "," + csv_num(gm) + "," +
                   csv_num(gs) + "," + csv_num(onm) + "," + csv_num(ons) +
                   "," + csv_num(offm) + "," + csv_num(offs) + "\n";
        }
        write_text_file(csv_path, csv);
        out << "wrote " << csv_path << "\n";
        return 0;
    }

    for (std::size_t i = 0; i < run_dirs.size(); ++i) {
        const fs::path dir(run_dirs[i]);
        const auto rows =
            read_metrics_file((dir / "metrics.jsonl").string());
        std::string csv;
        switch (what) {
            case PlotKind::loss_curve: csv = "step,loss\n"; break;
            case PlotKind::mm_curve: csv = "step,d_mm_on,d_mm_off\n"; break;
            default: csv = "step,exact_gap\n"; break;
        }
        for (const MetricsRow& r : rows) {
            csv += std::to_string(r.step);
            switch (what) {
                case PlotKind::loss_curve:
                    csv += "," + csv_num(r.loss);
                    break;
                case PlotKind::mm_curve:
                    csv += "," + csv_num(r.d_mm_on) + "," + csv_num(r.d_mm_off);
                    break;
                default:
                    csv += "," + csv_num(r.exact_gap);
                    break;
            }
            csv += "\n";
        }
        const std::string path =
            run_dirs.size() == 1
                ? csv_path
                : per_run_path(csv_path, dir.filename().string());
        write_text_file(path, csv);
        out << "wrote " << path << "\n";
    }
    return 0;
}

}  // namespace kdlab
