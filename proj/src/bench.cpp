#include "cprrtc/bench.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <mutex>
#include <ostream>
#include <random>
#include <sstream>
#include <thread>

#include "cprrtc/errors.hpp"
#include "cprrtc/problem.hpp"
#include "json_util.hpp"

namespace cprrtc::bench {

using detail::json;

bool TrialRecord::same_outcome(const TrialRecord& o) const {
    return problem_id == o.problem_id && group == o.group && projector == o.projector &&
           cc_flag == o.cc_flag && densify == o.densify && trial == o.trial && seed_offset == o.seed_offset &&
           status == o.status && iterations == o.iterations && projection_failures == o.projection_failures &&
           collision_rejections == o.collision_rejections && checks_performed == o.checks_performed &&
           checks_possible == o.checks_possible && path_nodes == o.path_nodes && note == o.note;
}

BenchSuite parse_suite(const json& doc, const std::filesystem::path& base_dir) {
    if (!doc.is_object()) throw parse_error("$", "suite document must be an object");
    BenchSuite suite;
    if (auto it = doc.find("name"); it != doc.end() && it->is_string()) suite.name = it->get<std::string>();
    if (auto it = doc.find("trials"); it != doc.end()) {
        const auto t = detail::as_integer(*it, "$.trials");
        if (t < 1) throw validation_error("trials: must be >= 1");
        suite.trials = static_cast<std::size_t>(t);
    }
    if (auto it = doc.find("seed_offset"); it != doc.end()) {
        const auto s = detail::as_integer(*it, "$.seed_offset");
        if (s < 0) throw validation_error("seed_offset: must be >= 0");
        suite.seed_offset = static_cast<std::uint64_t>(s);
    }
    if (auto it = doc.find("densify"); it != doc.end()) {
        if (!it->is_array() || it->empty()) throw parse_error("$.densify", "expected a non-empty array");
        suite.densify.clear();
        for (std::size_t i = 0; i < it->size(); ++i) {
            const auto k = detail::as_integer((*it)[i], "$.densify[" + std::to_string(i) + "]");
            if (k < 1) throw validation_error("densify: factors must be >= 1");
            suite.densify.push_back(static_cast<std::size_t>(k));
        }
    }
    if (auto it = doc.find("params"); it != doc.end()) {
        PlannerParams probe;
        apply_planner_params(*it, probe);
        suite.params = *it;
    }
    if (auto it = doc.find("problems"); it != doc.end()) {
        if (!it->is_array()) throw parse_error("$.problems", "expected an array");
        for (std::size_t i = 0; i < it->size(); ++i) {
            const json& entry = (*it)[i];
            ProblemSource src;
            src.base_dir = base_dir;
            if (entry.contains("file")) {
                const std::filesystem::path file = base_dir / entry["file"].get<std::string>();
                std::ifstream in(file);
                if (in) {
                    try {
                        src.doc = detail::parse_document(in);
                    } catch (const parse_error& e) {
                        src.doc = json{{"__error", e.what()}};
                    }
                } else {
                    src.doc = json{{"__error", "cannot open problem file " + file.string()}};
                }
                src.base_dir = file.parent_path();
                src.id = src.doc.value("id", file.stem().string());
            } else {
                src.doc = entry;
                src.id = entry.value("id", "problem-" + std::to_string(i));
            }
            src.group = src.doc.value("group", src.id);
            suite.problems.push_back(std::move(src));
        }
    }
    if (auto it = doc.find("generate"); it != doc.end()) {
        if (!it->is_array()) throw parse_error("$.generate", "expected an array");
        for (std::size_t g = 0; g < it->size(); ++g) {
            const json& block = (*it)[g];
            const std::string path = "$.generate[" + std::to_string(g) + "]";
            const std::string group = detail::require(block, "group", path).get<std::string>();
            const auto count = detail::as_integer(detail::require(block, "count", path), path + ".count");
            for (long long k = 0; k < count; ++k) {
                ProblemSource src;
                src.id = group + "-" + std::to_string(k);
                src.group = group;
                src.doc = block;
                src.base_dir = base_dir;
                src.generated = true;
                src.index = static_cast<std::size_t>(k);
                suite.problems.push_back(std::move(src));
            }
        }
    }
    return suite;
}

BenchSuite load_suite(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open suite file " + path);
    const json doc = detail::parse_document(in);
    return parse_suite(doc, std::filesystem::path(path).parent_path());
}

namespace {

PlanProblem resolve_generated(const ProblemSource& src) {
    const json& block = src.doc;
    const std::string path = "$.generate";
    PlanProblem p;
    p.id = src.id;
    p.model = load_robot_file((src.base_dir / detail::require(block, "robot", path).get<std::string>()).string());
    p.scene = load_scene_file((src.base_dir / detail::require(block, "scene", path).get<std::string>()).string());
    p.constraint = parse_constraint(detail::require(block, "constraint", path), path + ".constraint");
    const auto seed = static_cast<std::uint64_t>(block.value("seed", 0));
    const double min_sep = block.value("min_separation", 0.0);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(src.index)};
    std::mt19937_64 rng(seq);
    p.start = sample_valid_configuration(p.model, p.scene, p.constraint, rng);
    for (int attempt = 0;; ++attempt) {
        p.goal = sample_valid_configuration(p.model, p.scene, p.constraint, rng);
        if ((p.goal - p.start).norm() >= min_sep) break;
        if (attempt > 1000) throw std::runtime_error("cannot draw a goal " + std::to_string(min_sep) + " away");
    }
    return p;
}

PlanProblem resolve(const ProblemSource& src, const json& suite_params) {
    if (src.doc.contains("__error")) throw std::runtime_error(src.doc["__error"].get<std::string>());
    PlanProblem p;
    if (src.generated) {
        p = resolve_generated(src);
    } else {
        p = parse_problem(src.doc, src.base_dir);
        if (p.id.empty()) p.id = src.id;
    }
    // Suite-wide params first, then the problem's own block wins.
    PlannerParams params;
    apply_planner_params(suite_params, params);
    if (auto it = src.doc.find("params"); it != src.doc.end()) apply_planner_params(*it, params);
    p.params = params;
    validate_problem(p);
    return p;
}

}  // namespace

std::vector<Instance> expand_suite(const BenchSuite& suite, const RunOptions& options) {
    const auto& factors = options.densify ? *options.densify : suite.densify;
    std::vector<Instance> out;
    std::size_t count = suite.problems.size();
    if (options.max_problems) count = std::min(count, *options.max_problems);
    for (std::size_t i = 0; i < count; ++i) {
        const auto& src = suite.problems[i];
        std::optional<PlanProblem> base;
        std::string error;
        try {
            base = resolve(src, suite.params);
        } catch (const std::exception& e) {
            error = e.what();
        }
        for (std::size_t k : factors) {
            Instance inst;
            inst.id = src.id;
            inst.group = src.group;
            inst.densify = k;
            inst.error = error;
            if (base) {
                inst.problem = *base;
                inst.problem->scene = subdivide_scene(base->scene, k);
            }
            out.push_back(std::move(inst));
        }
    }
    return out;
}

TrialRecord run_trial(const Instance& instance, std::size_t trial, const RunOptions& options,
                      std::uint64_t base_seed_offset, PlanResult* result_out) {
    TrialRecord rec;
    rec.problem_id = instance.id;
    rec.group = instance.group;
    rec.projector = std::string(to_string(options.projector.value_or(Projector::parallel)));
    rec.cc_flag = std::string(to_string(options.cc_flag.value_or(CcFlag::on)));
    rec.densify = instance.densify;
    rec.trial = trial;
    rec.seed_offset = trial_seed_offset(base_seed_offset, trial);
    if (!instance.problem) {
        rec.status = "Error";
        rec.note = instance.error;
        return rec;
    }
    PlanProblem problem = *instance.problem;
    problem.params.projector = options.projector.value_or(Projector::parallel);
    problem.params.cc_flag = options.cc_flag.value_or(CcFlag::on);
    problem.params.seed_offset = rec.seed_offset;
    problem.params.execution = options.deterministic ? Execution::deterministic : Execution::concurrent;
    // A wall-clock budget would make outcomes depend on machine load.
    if (options.deterministic) problem.params.time_budget_ms = std::numeric_limits<double>::infinity();

    try {
        validate_problem(problem);
        ConstrainedRrtConnect planner(problem);
        const auto t0 = std::chrono::steady_clock::now();
        PlanResult result = planner.solve();
        rec.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
        rec.status = std::string(to_string(result.status));
        rec.iterations = result.stats.iterations;
        rec.projection_failures = result.stats.projection_failures;
        rec.collision_rejections = result.stats.collision_rejections;
        rec.checks_performed = result.stats.cc.primitive_checks_performed;
        rec.checks_possible = result.stats.cc.primitive_checks_possible;
        rec.path_nodes = result.path.size();
        if (result_out) *result_out = std::move(result);
    } catch (const std::exception& e) {
        rec.status = "Error";
        rec.note = e.what();
    }
    return rec;
}

std::vector<TrialRecord> run_suite(const BenchSuite& suite, const RunOptions& options,
                                   const std::function<void(const TrialRecord&)>& sink) {
    const auto instances = expand_suite(suite, options);
    const std::size_t trials = options.trials.value_or(suite.trials);
    const std::uint64_t base_seed = options.seed_offset.value_or(suite.seed_offset);
    const std::size_t total = instances.size() * trials;

    std::vector<std::optional<TrialRecord>> slots(total);
    std::mutex mutex;
    std::size_t next_emit = 0;
    std::atomic<std::size_t> next_job{0};

    auto work = [&] {
        for (;;) {
            const std::size_t job = next_job.fetch_add(1);
            if (job >= total) return;
            TrialRecord rec = run_trial(instances[job / trials], job % trials, options, base_seed);
            std::lock_guard lock(mutex);
            slots[job] = std::move(rec);
            while (next_emit < total && slots[next_emit]) {
                if (sink) sink(*slots[next_emit]);
                ++next_emit;
            }
        }
    };

    const std::size_t jobs = std::max<std::size_t>(1, std::min(options.jobs, total));
    std::vector<std::thread> pool;
    for (std::size_t i = 1; i < jobs; ++i) pool.emplace_back(work);
    work();
    for (auto& t : pool) t.join();

    std::vector<TrialRecord> out;
    out.reserve(total);
    for (auto& s : slots) out.push_back(std::move(*s));
    return out;
}

// CSV ---------------------------------------------------------------------

namespace {

// Quotes fields that need it. Line breaks become spaces so that every
// record stays on one line.
std::string sanitize(std::string s) {
    for (char& c : s)
        if (c == '\n' || c == '\r') c = ' ';
    if (s.find_first_of(",\"") == std::string::npos) return s;
    std::string quoted = "\"";
    for (char c : s) {
        if (c == '"') quoted += '"';
        quoted += c;
    }
    return quoted + '"';
}

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> out(1);
    bool quoted = false;
    for (std::size_t i = 0; i < line.size(); ++i) {
        const char c = line[i];
        if (quoted) {
            if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
                out.back() += '"';
                ++i;
            } else if (c == '"') {
                quoted = false;
            } else {
                out.back() += c;
            }
        } else if (c == '"') {
            quoted = true;
        } else if (c == ',') {
            out.emplace_back();
        } else {
            out.back() += c;
        }
    }
    return out;
}

template <class T>
T parse_unsigned(const std::string& s, const char* column) {
    T v{};
    const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc{} || ptr != s.data() + s.size())
        throw parse_error(column, "expected an unsigned integer, got '" + s + "'");
    return v;
}

}  // namespace

std::string csv_header() {
    return "problem_id,group,projector,cc_flag,densify,trial,seed_offset,status,wall_ms,iterations,"
           "projection_failures,collision_rejections,checks_performed,checks_possible,path_nodes,note";
}

std::string to_csv_row(const TrialRecord& r) {
    std::ostringstream os;
    os << sanitize(r.problem_id) << ',' << sanitize(r.group) << ',' << r.projector << ',' << r.cc_flag << ','
       << r.densify << ',' << r.trial << ',' << r.seed_offset << ',' << r.status << ',' << std::fixed
       << std::setprecision(3) << r.wall_ms << ',' << r.iterations << ',' << r.projection_failures << ','
       << r.collision_rejections << ',' << r.checks_performed << ',' << r.checks_possible << ',' << r.path_nodes
       << ',' << sanitize(r.note);
    return os.str();
}

void write_records_csv(std::ostream& out, const std::vector<TrialRecord>& records) {
    out << csv_header() << '\n';
    for (const auto& r : records) out << to_csv_row(r) << '\n';
}

std::vector<TrialRecord> parse_records_csv(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line != csv_header()) throw parse_error("line 1", "unexpected CSV header");
    std::vector<TrialRecord> out;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        const auto f = split_csv_line(line);
        if (f.size() != 16) throw parse_error("line " + std::to_string(line_no), "expected 16 fields");
        TrialRecord r;
        r.problem_id = f[0];
        r.group = f[1];
        r.projector = f[2];
        r.cc_flag = f[3];
        r.densify = parse_unsigned<std::size_t>(f[4], "densify");
        r.trial = parse_unsigned<std::size_t>(f[5], "trial");
        r.seed_offset = parse_unsigned<std::uint64_t>(f[6], "seed_offset");
        r.status = f[7];
        r.wall_ms = std::stod(f[8]);
        r.iterations = parse_unsigned<std::size_t>(f[9], "iterations");
        r.projection_failures = parse_unsigned<std::size_t>(f[10], "projection_failures");
        r.collision_rejections = parse_unsigned<std::size_t>(f[11], "collision_rejections");
        r.checks_performed = parse_unsigned<std::uint64_t>(f[12], "checks_performed");
        r.checks_possible = parse_unsigned<std::uint64_t>(f[13], "checks_possible");
        r.path_nodes = parse_unsigned<std::size_t>(f[14], "path_nodes");
        r.note = f[15];
        out.push_back(std::move(r));
    }
    return out;
}

// Aggregates --------------------------------------------------------------

const std::vector<GroupKey>& default_group_keys() {
    static const std::vector<GroupKey> keys{GroupKey::group, GroupKey::densify, GroupKey::projector,
                                            GroupKey::cc_flag};
    return keys;
}

std::string group_name(const TrialRecord& r, const std::vector<GroupKey>& keys) {
    std::string name;
    for (GroupKey k : keys) {
        if (!name.empty()) name += '_';
        switch (k) {
            case GroupKey::group: name += r.group; break;
            case GroupKey::projector: name += r.projector; break;
            case GroupKey::cc_flag: name += "cc" + r.cc_flag; break;
            case GroupKey::densify: name += std::to_string(r.densify) + "x"; break;
        }
    }
    return name.empty() ? "all" : name;
}

std::map<std::string, std::vector<CdfPoint>> emit_cdf(const std::vector<TrialRecord>& records,
                                                      const std::vector<GroupKey>& keys) {
    std::map<std::string, std::pair<std::size_t, std::vector<double>>> groups;
    for (const auto& r : records) {
        auto& g = groups[group_name(r, keys)];
        ++g.first;
        if (r.solved()) g.second.push_back(r.wall_ms);
    }
    std::map<std::string, std::vector<CdfPoint>> out;
    for (auto& [name, g] : groups) {
        auto& [total, times] = g;
        std::sort(times.begin(), times.end());
        auto& curve = out[name];
        for (std::size_t i = 0; i < times.size(); ++i)
            curve.push_back(CdfPoint{times[i], static_cast<double>(i + 1) / static_cast<double>(total)});
    }
    return out;
}

void write_cdf_csv(std::ostream& out, const std::vector<CdfPoint>& cdf) {
    out << "time_ms,fraction_solved\n";
    for (const auto& p : cdf) out << std::fixed << std::setprecision(3) << p.time_ms << ','
                                  << std::setprecision(6) << p.fraction_solved << '\n';
}

std::vector<GroupSummary> summarize(const std::vector<TrialRecord>& records, const std::vector<GroupKey>& keys) {
    std::map<std::string, std::vector<const TrialRecord*>> groups;
    for (const auto& r : records) groups[group_name(r, keys)].push_back(&r);
    std::vector<GroupSummary> out;
    for (const auto& [name, members] : groups) {
        GroupSummary s;
        s.group = name;
        s.trials = members.size();
        std::vector<double> times;
        double saved = 0.0;
        for (const auto* r : members) {
            if (r->solved()) times.push_back(r->wall_ms);
            if (r->collision_rejections > 0 && r->checks_possible > 0) {
                ++s.colliding_trials;
                saved += 1.0 - static_cast<double>(r->checks_performed) / static_cast<double>(r->checks_possible);
            }
        }
        s.solved = times.size();
        s.success_rate = s.trials ? static_cast<double>(s.solved) / static_cast<double>(s.trials) : 0.0;
        if (!times.empty()) {
            std::sort(times.begin(), times.end());
            double sum = 0.0;
            for (double t : times) sum += t;
            s.mean_ms = sum / static_cast<double>(times.size());
            const std::size_t m = times.size() / 2;
            s.median_ms = times.size() % 2 ? times[m] : 0.5 * (times[m - 1] + times[m]);
        }
        if (s.colliding_trials > 0) s.checks_saved = saved / static_cast<double>(s.colliding_trials);
        out.push_back(std::move(s));
    }
    return out;
}

void write_summary_csv(std::ostream& out, const std::vector<GroupSummary>& summary) {
    auto opt = [](const std::optional<double>& v, int precision) {
        if (!v) return std::string{};
        std::ostringstream os;
        os << std::fixed << std::setprecision(precision) << *v;
        return os.str();
    };
    out << "group,trials,solved,success_rate,mean_ms,median_ms,colliding_trials,checks_saved\n";
    for (const auto& s : summary)
        out << s.group << ',' << s.trials << ',' << s.solved << ',' << opt(s.success_rate, 4) << ','
            << opt(s.mean_ms, 3) << ',' << opt(s.median_ms, 3) << ',' << s.colliding_trials << ','
            << opt(s.checks_saved, 4) << '\n';
}

}  // namespace cprrtc::bench
