#include <CLI11.hpp>
#include <fstream>
#include <functional>
#include <iostream>

#include "kp/commands.hpp"
#include "kp/errors.hpp"
#include "kp/report.hpp"

namespace {

struct Cli {
    kp::RunConfig config;
    std::string config_path;

    void load_base() {
        if (!config_path.empty()) {
            // Flags set on the command line override the file afterwards, so
            // parse order is: file first, then CLI11 writes on top.
            config = kp::load_config(config_path);
        }
    }
};

void add_instance_flags(CLI::App* cmd, kp::RunConfig& c) {
    cmd->add_option("--origins", c.origins_path, "origins.csv path");
    cmd->add_option("--sites", c.sites_path, "sites.csv path");
    cmd->add_option("--distances", c.distances_path, "distances.csv path");
    cmd->add_option("--d-max", [&c](const CLI::results_t& r) {
        c.d_max = std::stod(r.front());
        return true;
    }, "drop distance entries above this threshold (meters)");
}

void add_model_flags(CLI::App* cmd, kp::RunConfig& c) {
    cmd->add_option("--kind", c.kind, "pmedian|pcenter|kpl|kpl_sd|kpl_t|all");
    cmd->add_option("--k", c.k, "number of new facilities");
    cmd->add_option("--epsilon", c.epsilon, "inequality aversion (< 0)");
    cmd->add_option("--alpha", [&c](const CLI::results_t& r) {
        c.alpha_fixed = std::stod(r.front());
        return true;
    }, "fix the scaling parameter instead of seeding it from data");
    cmd->add_flag("--relocate-existing", c.relocate_existing,
                  "existing sites may close and count toward k");
    cmd->add_flag("--binary-assignment", c.binary_assignment,
                  "capacity constraints with binary assignment variables");
}

void add_backend_flags(CLI::App* cmd, kp::RunConfig& c) {
    cmd->add_option("--backend", c.backend, "brute_force|external");
    cmd->add_option("--command", c.command,
                    "external solver command; {model} and {solution} are substituted");
    cmd->add_option("--mip-gap", c.mip_gap, "relative MIP gap for external solves");
    cmd->add_option("--time-limit", [&c](const CLI::results_t& r) {
        c.time_limit_s = std::stod(r.front());
        return true;
    }, "time limit in seconds (advisory, passed to the solver)");
    cmd->add_option("--threads", c.threads, "enumeration worker threads (0 = auto)");
    cmd->add_option("--enumeration-cap", c.enumeration_cap,
                    "maximum number of candidate subsets to enumerate");
}

void emit(const nlohmann::json& report, const std::string& out) {
    const std::string text = report.dump(2) + "\n";
    if (out.empty()) {
        std::cout << text;
        return;
    }
    std::ofstream f(out, std::ios::binary);
    if (!f) throw kp::DataError("cannot write report to " + out);
    f << text;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Equitable facility location toolkit (Kolm-Pollak EDE)"};
    app.require_subcommand(1);
    app.set_version_flag("--version", std::string(kp::kToolName) + " " + kp::kToolVersion);

    Cli cli;
    std::string report_out;

    auto make = [&](const char* name, const char* help) {
        CLI::App* cmd = app.add_subcommand(name, help);
        cmd->add_option("--config", cli.config_path, "JSON config file (flags override it)")
            ->each([&](const std::string&) { cli.load_base(); });
        cmd->add_option("--out", report_out, "write the JSON report here instead of stdout");
        cmd->add_option("--seed", cli.config.seed, "random seed (synth)");
        return cmd;
    };

    CLI::App* score = make("score", "Kolm-Pollak statistics of a distribution or assignment");
    add_instance_flags(score, cli.config);
    score->add_option("--distribution", cli.config.distribution_path,
                      "distribution CSV (value_meters,weight)");
    score->add_option("--assignment", cli.config.assignment_path,
                      "assignment CSV (origin_id,site_id,fraction)");
    score->add_option("--nearest", cli.config.nearest, "score nearest distances: existing|all");
    score->add_option("--epsilon", [&cli](const CLI::results_t& r) {
        for (const std::string& v : r) cli.config.epsilons.push_back(std::stod(v));
        return true;
    }, "epsilon value (repeatable)")->take_all();
    score->add_option("--alpha", [&cli](const CLI::results_t& r) {
        cli.config.alpha_fixed = std::stod(r.front());
        return true;
    }, "fix alpha instead of computing it from the distribution");

    CLI::App* solve = make("solve", "build and solve one model (or kind=all comparison)");
    add_instance_flags(solve, cli.config);
    add_model_flags(solve, cli.config);
    add_backend_flags(solve, cli.config);
    solve->add_option("--penalty-plan", cli.config.penalty_plan_path,
                      "penalty plan JSON (kpl_t)");

    CLI::App* calibrate = make("calibrate", "alpha recalibration loop");
    add_instance_flags(calibrate, cli.config);
    add_model_flags(calibrate, cli.config);
    add_backend_flags(calibrate, cli.config);
    calibrate->add_option("--tol", cli.config.tol, "relative epsilon tolerance");
    calibrate->add_option("--max-iters", cli.config.max_iters, "maximum solve iterations");

    CLI::App* plan = make("penalty-plan", "anchor, scale, and linearize distance penalties");
    add_instance_flags(plan, cli.config);
    add_model_flags(plan, cli.config);
    add_backend_flags(plan, cli.config);
    plan->add_option("--penalized", cli.config.penalized_sites,
                     "penalized site ids (default: sites with a penalty cell)");
    plan->add_option("--error-budget", cli.config.error_budget,
                     "target linearization error in meters");
    plan->add_option("--width", [&cli](const CLI::results_t& r) {
        cli.config.width_override = std::stod(r.front());
        return true;
    }, "force a uniform tangent width");
    plan->add_flag("--keep-costs", cli.config.keep_costs,
                   "keep the per-site costs from sites.csv");
    plan->add_flag("--measure", cli.config.measure_errors,
                   "solve the penalized model exactly and report measured errors");

    CLI::App* exp = make("export", "write the model as LP or MPS text");
    add_instance_flags(exp, cli.config);
    add_model_flags(exp, cli.config);
    exp->add_option("--format", cli.config.format, "lp|mps");
    exp->add_option("--penalty-plan", cli.config.penalty_plan_path,
                    "penalty plan JSON (kpl_t)");

    CLI::App* synth = make("synth", "generate a deterministic synthetic instance");
    synth->add_option("--origins-count", cli.config.synth_origins, "number of origins");
    synth->add_option("--sites-count", cli.config.synth_sites, "number of sites");
    synth->add_option("--existing-count", cli.config.synth_existing, "number of existing sites");
    synth->add_option("--penalized-count", cli.config.synth_penalized,
                      "number of penalized candidate sites");
    synth->add_flag("--capacitated", cli.config.synth_capacitated, "attach capacities");
    synth->add_option("--k", cli.config.k, "facilities the instance should support");
    synth->add_option("--out-dir", cli.config.out_dir, "directory for the CSV files");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        if (e.get_exit_code() == 0) return app.exit(e);  // --help / --version
        app.exit(e);
        return 2;
    }

    try {
        cli.config.out = report_out;
        nlohmann::json report;
        if (score->parsed()) report = kp::cmd_score(cli.config);
        else if (solve->parsed()) report = kp::cmd_solve(cli.config);
        else if (calibrate->parsed()) report = kp::cmd_calibrate(cli.config);
        else if (plan->parsed()) report = kp::cmd_penalty_plan(cli.config);
        else if (exp->parsed()) {
            // --out names the model file; the report goes to stdout.
            report = kp::cmd_export(cli.config);
            std::cout << report.dump(2) << "\n";
            return 0;
        } else if (synth->parsed()) {
            report = kp::cmd_synth(cli.config);
        }
        emit(report, report_out);
        return 0;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kp::exit_code_for(e);
    }
}
