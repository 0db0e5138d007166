#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "kdlab/experiment.hpp"

namespace {

using namespace kdlab;

int run(int argc, char** argv) {
    CLI::App app{
        "kdlab: a desk-scale laboratory for distilling autoregressive "
        "sequence policies, with exhaustive oracles"};
    app.require_subcommand(1);

    ExperimentConfig cfg;
    std::string method = "mm";
    std::string mode = "joint";
    std::string policy = "tabular";
    std::string critic = "tabular";
    int exit_code = 0;

    const auto add_common = [&](CLI::App* sub) {
        sub->add_option("--task", cfg.task,
                        "fixture name (FIXTURE-A, FIXTURE-B) or task file")
            ->capture_default_str();
        sub->add_option("--seed", cfg.train.seed, "master random seed")
            ->capture_default_str();
        sub->add_option("--out", cfg.out_dir,
                        "output root (default $KDLAB_OUT, else ./runs)");
        sub->add_option("--cap", cfg.train.cap,
                        "exhaustive-enumeration trajectory cap")
            ->capture_default_str();
    };
    const auto add_train_like = [&](CLI::App* sub) {
        sub->add_option("--method", method, "mm|kl|rkl|js|tv|sft")
            ->capture_default_str();
        sub->add_option("--mode", mode, "off|on|joint")->capture_default_str();
        sub->add_option("--policy", policy, "tabular|linear|mlp")
            ->capture_default_str();
        sub->add_option("--critic", critic, "tabular|linear_head|mlp_head")
            ->capture_default_str();
        sub->add_option("--steps", cfg.train.max_steps, "outer training steps")
            ->capture_default_str();
        sub->add_option("--eta", cfg.train.eta, "policy step size")
            ->capture_default_str();
        sub->add_option("--alpha", cfg.train.alpha,
                        "critic step-size ratio (critics move at alpha*eta)")
            ->capture_default_str();
        sub->add_option("--k-inner", cfg.train.k_inner,
                        "critic ascent rounds per policy step")
            ->capture_default_str();
        sub->add_option("--batch", cfg.train.batch_m,
                        "trajectories per gradient estimate")
            ->capture_default_str();
        sub->add_option("--eval-every", cfg.train.eval_every,
                        "evaluation cadence in steps")
            ->capture_default_str();
        sub->add_option("--critic-bound", cfg.train.critic_bound,
                        "tanh bound for critics (0 = r_max * horizon)")
            ->capture_default_str();
        sub->add_option("--critic-hidden", cfg.train.critic_hidden,
                        "hidden units for mlp_head critics")
            ->capture_default_str();
        sub->add_option("--eval-traj", cfg.train.eval_traj,
                        "Monte Carlo size when the task exceeds the cap")
            ->capture_default_str();
        sub->add_option("--convergence-tol", cfg.train.convergence_tol,
                        "stop when the gap moves less than this across "
                        "three evaluations")
            ->capture_default_str();
        sub->add_flag("--record-inner-ascent", cfg.train.record_inner_ascent,
                      "log the saddle objective around each inner loop");
        sub->add_flag(
            "--state-term-only",
            [&](std::int64_t) { cfg.train.full_on_policy_gradient = false; },
            "drop the visitation (score) term from on-policy matching");
        sub->add_option("--sft-steps", cfg.sft_steps,
                        "behavior-cloning pretraining steps")
            ->capture_default_str();
        sub->add_option("--sft-lr", cfg.sft_lr, "pretraining learning rate")
            ->capture_default_str();
        sub->add_option("--sft-batch", cfg.sft_batch, "pretraining batch size")
            ->capture_default_str();
        sub->add_option("--dataset", cfg.dataset_size,
                        "teacher dataset size for cloning")
            ->capture_default_str();
    };
    const auto fill_enums = [&] {
        cfg.train.method = method_from_string(method);
        cfg.train.mode = mode_from_string(mode);
        cfg.policy_kind = policy_kind_from_string(policy);
        cfg.train.critic_kind = q_kind_from_string(critic);
    };

    auto* verify = app.add_subcommand(
        "verify", "machine-check the exact identities and all gradients");
    add_common(verify);
    verify->add_option("--grad-points", cfg.grad_check_points,
                       "random points per objective")
        ->capture_default_str();
    verify->add_flag("--inject-gradient-fault", cfg.inject_gradient_fault,
                     "corrupt one analytic gradient; the checker must "
                     "catch it and exit nonzero");
    verify->callback([&] { exit_code = cmd_verify(cfg, std::cout); });

    auto* train = app.add_subcommand("train", "one training run");
    add_common(train);
    add_train_like(train);
    train->callback([&] {
        fill_enums();
        exit_code = cmd_train(cfg, std::cout);
    });

    std::vector<std::string> sweep_methods;
    std::vector<std::string> sweep_modes;
    auto* sweep = app.add_subcommand(
        "sweep", "methods x modes x seeds comparison from a shared start");
    add_common(sweep);
    add_train_like(sweep);
    sweep->add_option("--methods", sweep_methods,
                      "subset of mm,kl,rkl,js,tv (default all)");
    sweep->add_option("--modes", sweep_modes,
                      "subset of off,on,joint (default all)");
    sweep->add_option("--seeds", cfg.sweep_seeds, "seed list")
        ->capture_default_str();
    sweep->callback([&] {
        fill_enums();
        if (!sweep_methods.empty()) {
            cfg.sweep_methods.clear();
            for (const auto& m : sweep_methods)
                cfg.sweep_methods.push_back(method_from_string(m));
        }
        if (!sweep_modes.empty()) {
            cfg.sweep_modes.clear();
            for (const auto& m : sweep_modes)
                cfg.sweep_modes.push_back(mode_from_string(m));
        }
        exit_code = cmd_sweep(cfg, std::cout);
    });

    std::vector<std::string> run_dirs;
    std::string csv_path = "curves.csv";
    std::string what = "loss_curve";
    auto* exp = app.add_subcommand(
        "export-plot", "project run metrics into CSV tables for plotting");
    exp->add_option("--run", run_dirs, "run directory (repeatable)")
        ->required();
    exp->add_option("--csv", csv_path, "output CSV path")
        ->capture_default_str();
    exp->add_option("--what", what,
                    "loss_curve | mm_curve | gap_curve | distance_bars")
        ->capture_default_str();
    exp->callback([&] {
        exit_code = cmd_export_plot(run_dirs, plot_kind_from_string(what),
                                    csv_path, std::cout);
    });

    CLI11_PARSE(app, argc, argv);
    return exit_code;
}

}  // namespace

int main(int argc, char** argv) {
    try {
        return run(argc, argv);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
