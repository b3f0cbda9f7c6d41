// Benchmark and single-problem front end.
//
//   bench run  --suite <file> --out <dir> [--projection parallel|naive|literal-gap]
//              [--cc-flag on|off] [--densify 1|10|100] [--seed-offset N] [--trials N]
//              [--deterministic] [--jobs N]
//   bench plan --problem <file> [--projection ...] [--cc-flag ...] [--seed-offset N]
//              [--deterministic] [--path-out <file>]

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>

#include <CLI11.hpp>

#include "cprrtc/bench.hpp"
#include "cprrtc/problem.hpp"

namespace fs = std::filesystem;
using namespace cprrtc;

namespace {

struct CommonFlags {
    std::string projection = "parallel";
    std::string cc_flag = "on";
    std::optional<std::uint64_t> seed_offset;
    bool deterministic = false;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
    cmd->add_option("--projection", f.projection, "Projector")
        ->check(CLI::IsMember({"parallel", "naive", "literal-gap"}));
    cmd->add_option("--cc-flag", f.cc_flag, "Shared early-termination flag")->check(CLI::IsMember({"on", "off"}));
    cmd->add_option("--seed-offset", f.seed_offset, "Base Halton seed offset");
    cmd->add_flag("--deterministic", f.deterministic, "Single-threaded reference execution");
}

int run_suite_command(const std::string& suite_path, const std::string& out_dir, const CommonFlags& common,
                      std::optional<std::size_t> densify, std::optional<std::size_t> trials, std::size_t jobs) {
    const auto suite = bench::load_suite(suite_path);
    bench::RunOptions opts;
    opts.projector = parse_projector(common.projection);
    opts.cc_flag = parse_cc_flag(common.cc_flag);
    if (densify) opts.densify = std::vector<std::size_t>{*densify};
    opts.seed_offset = common.seed_offset;
    opts.trials = trials;
    opts.deterministic = common.deterministic;
    opts.jobs = jobs;

    fs::create_directories(out_dir);
    std::ofstream records_out(fs::path(out_dir) / "records.csv");
    if (!records_out) throw std::runtime_error("cannot write to " + out_dir);
    records_out << bench::csv_header() << '\n' << std::flush;

    const auto records = bench::run_suite(suite, opts, [&](const bench::TrialRecord& r) {
        records_out << bench::to_csv_row(r) << '\n' << std::flush;
        std::cerr << r.problem_id << " " << r.densify << "x trial " << r.trial << ": " << r.status << " ("
                  << std::fixed << std::setprecision(1) << r.wall_ms << " ms)\n";
    });

    for (const auto& [group, cdf] : bench::emit_cdf(records, bench::default_group_keys())) {
        std::ofstream out(fs::path(out_dir) / ("cdf_" + group + ".csv"));
        bench::write_cdf_csv(out, cdf);
    }
    const auto summary = bench::summarize(records, bench::default_group_keys());
    {
        std::ofstream out(fs::path(out_dir) / "summary.csv");
        bench::write_summary_csv(out, summary);
    }
    bench::write_summary_csv(std::cout, summary);
    return 0;
}

int run_plan_command(const std::string& problem_path, const CommonFlags& common, const std::string& path_out) {
    PlanProblem problem = load_problem_file(problem_path);
    problem.params.projector = parse_projector(common.projection);
    problem.params.cc_flag = parse_cc_flag(common.cc_flag);
    if (common.seed_offset) problem.params.seed_offset = *common.seed_offset;
    problem.params.execution = common.deterministic ? Execution::deterministic : Execution::concurrent;

    const PlanResult result = plan(problem);
    std::cout << "status: " << to_string(result.status) << "\n"
              << "iterations: " << result.stats.iterations << "\n"
              << "wall_ms: " << std::fixed << std::setprecision(3) << result.stats.wall_ms << "\n"
              << "projection_failures: " << result.stats.projection_failures << "\n"
              << "checks_performed: " << result.stats.cc.primitive_checks_performed << "\n"
              << "checks_possible: " << result.stats.cc.primitive_checks_possible << "\n"
              << "path_nodes: " << result.path.size() << "\n";
    if (!path_out.empty() && result.solved()) {
        std::ofstream out(path_out);
        out << std::setprecision(17);
        for (const auto& seg : result.segments)
            for (std::size_t k = 0; k < seg.width(); ++k) {
                const auto& q = seg.waypoints[k];
                for (Eigen::Index i = 0; i < q.size(); ++i) out << (i ? "," : "") << q[i];
                out << '\n';
            }
    }
    return result.solved() ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Constrained bidirectional RRT-Connect benchmark harness"};
    app.require_subcommand(1);

    CommonFlags run_flags;
    std::string suite_path, out_dir;
    std::optional<std::size_t> densify, trials;
    std::size_t jobs = 1;
    auto* run = app.add_subcommand("run", "Run a benchmark suite");
    run->add_option("--suite", suite_path, "Suite file")->required()->check(CLI::ExistingFile);
    run->add_option("--out", out_dir, "Output directory")->required();
    run->add_option("--densify", densify, "Override the densification factor")
        ->check(CLI::IsMember({1, 10, 100}));
    run->add_option("--trials", trials, "Trials per problem")->check(CLI::PositiveNumber);
    run->add_option("--jobs", jobs, "Concurrent trials")->check(CLI::PositiveNumber);
    add_common(run, run_flags);

    CommonFlags plan_flags;
    std::string problem_path, path_out;
    auto* plan_cmd = app.add_subcommand("plan", "Solve one problem file; exit 0 iff solved");
    plan_cmd->add_option("--problem", problem_path, "Problem file")->required()->check(CLI::ExistingFile);
    plan_cmd->add_option("--path-out", path_out, "Write the dense solution path as CSV");
    add_common(plan_cmd, plan_flags);

    CLI11_PARSE(app, argc, argv);
    try {
        if (*run) return run_suite_command(suite_path, out_dir, run_flags, densify, trials, jobs);
        return run_plan_command(problem_path, plan_flags, path_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 2;
    }
}
