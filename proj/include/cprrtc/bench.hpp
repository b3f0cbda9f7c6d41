#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "cprrtc/planner.hpp"

namespace cprrtc::bench {

/// One suite entry, resolved lazily so that a broken file only costs its own
/// records.
struct ProblemSource {
    std::string id;
    std::string group;
    nlohmann::json doc;             // problem document, or a generator block
    std::filesystem::path base_dir;
    bool generated = false;
    std::size_t index = 0;          // position within a generator block
};

struct BenchSuite {
    std::string name;
    std::vector<ProblemSource> problems;
    std::size_t trials = 1;
    std::uint64_t seed_offset = 0;
    std::vector<std::size_t> densify{1};
    nlohmann::json params = nlohmann::json::object();
};

/// Suite document:
///   {"name", "trials", "seed_offset", "densify": [1, 10, 100],
///    "params": {...planner params...},
///    "problems": [{...problem document...} | {"file": "relative/path.json"}],
///    "generate": [{"group", "robot", "scene", "constraint", "count",
///                  "seed", "min_separation"}]}
/// Generated problems get ids "<group>-<k>" and are drawn deterministically
/// from `seed` when the suite runs.
BenchSuite load_suite(const std::string& path);
BenchSuite parse_suite(const nlohmann::json& doc, const std::filesystem::path& base_dir);

struct RunOptions {
    std::optional<Projector> projector;          // default: parallel
    std::optional<CcFlag> cc_flag;               // default: on
    std::optional<std::vector<std::size_t>> densify;  // default: suite's list
    std::optional<std::uint64_t> seed_offset;    // default: suite's value
    std::optional<std::size_t> trials;           // default: suite's value
    bool deterministic = false;
    std::size_t jobs = 1;                        // concurrent trials
    std::optional<std::size_t> max_problems;     // truncate the suite
};

struct TrialRecord {
    std::string problem_id;
    std::string group;
    std::string projector;
    std::string cc_flag;
    std::size_t densify = 1;
    std::size_t trial = 0;
    std::uint64_t seed_offset = 0;
    std::string status;  // Solved | TimedOut | IterLimit | Error
    double wall_ms = 0.0;
    std::size_t iterations = 0;
    std::size_t projection_failures = 0;
    std::size_t collision_rejections = 0;
    std::uint64_t checks_performed = 0;
    std::uint64_t checks_possible = 0;
    std::size_t path_nodes = 0;
    std::string note;

    bool solved() const { return status == "Solved"; }
    /// Equality ignoring wall-clock time.
    bool same_outcome(const TrialRecord& other) const;
};

/// A fully resolved planning instance of the suite, before trials.
struct Instance {
    std::string id;
    std::string group;
    std::size_t densify = 1;
    std::optional<PlanProblem> problem;  // empty when loading failed
    std::string error;
};

/// Expands the suite into instances (problem x densify factor).
std::vector<Instance> expand_suite(const BenchSuite& suite, const RunOptions& options);

/// Plans one trial. The returned result is exposed for re-validation.
TrialRecord run_trial(const Instance& instance, std::size_t trial, const RunOptions& options,
                      std::uint64_t base_seed_offset, PlanResult* result = nullptr);

/// One record per (instance, trial) in suite order. `sink` receives records
/// in that order as soon as each is available.
std::vector<TrialRecord> run_suite(const BenchSuite& suite, const RunOptions& options,
                                   const std::function<void(const TrialRecord&)>& sink = {});

std::string csv_header();
std::string to_csv_row(const TrialRecord& r);
void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records);
std::vector<TrialRecord> parse_records_csv(std::istream& in);

enum class GroupKey { group, projector, cc_flag, densify };
std::string group_name(const TrialRecord& r, const std::vector<GroupKey>& keys);
const std::vector<GroupKey>& default_group_keys();

struct CdfPoint {
    double time_ms;
    double fraction_solved;
};

/// Per group: solved wall times ascending against the cumulative fraction of
/// *all* trials in the group, so unsolved trials cap the curve below 1.
std::map<std::string, std::vector<CdfPoint>> emit_cdf(const std::vector<TrialRecord>& records,
                                                      const std::vector<GroupKey>& keys);
void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf);

struct GroupSummary {
    std::string group;
    std::size_t trials = 0;
    std::size_t solved = 0;
    double success_rate = 0.0;
    std::optional<double> mean_ms;
    std::optional<double> median_ms;
    std::size_t colliding_trials = 0;
    /// Mean over colliding trials of 1 - performed / possible.
    std::optional<double> checks_saved;
};

std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records, const std::vector<GroupKey>& keys);
void write_summary_csv(std::ostream& out, const std::vector<GroupSummary>& summary);

}  // namespace cprrtc::bench
