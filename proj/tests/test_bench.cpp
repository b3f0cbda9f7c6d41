#include <doctest.h>

#include <random>
#include <sstream>

#include "cprrtc/bench.hpp"
#include "cprrtc/errors.hpp"
#include "oracles.hpp"

using namespace cprrtc;
using namespace cprrtc::bench;
using nlohmann::json;

namespace {

const std::filesystem::path kSuiteDir = oracle::data_path("suites");

BenchSuite suite_from(const std::string& text) { return parse_suite(json::parse(text, nullptr, true, true), kSuiteDir); }

const char* kTrivial = R"({
  "name": "trivial", "trials": 1,
  "problems": [{"file": "../problems/trivial.json"}]
})";

const char* kSmall = R"({
  "name": "small", "trials": 2, "densify": [1, 10, 100],
  "params": {"max_iterations": 100},
  "problems": [{"file": "../problems/arm7_table_plane.json"}],
  "generate": [{"group": "shelf", "robot": "../robots/arm7.json", "scene": "../scenes/shelf_tall.json",
                "constraint": {"kind": "plane", "normal": [0, 0, 1], "offset": 0.4},
                "count": 2, "seed": 5, "min_separation": 1.0}]
})";

TrialRecord record(const std::string& group, bool solved, double ms) {
    TrialRecord r;
    r.problem_id = group + "-p";
    r.group = group;
    r.projector = "parallel";
    r.cc_flag = "on";
    r.status = solved ? "Solved" : "IterLimit";
    r.wall_ms = ms;
    return r;
}

std::vector<std::string> bodies_without_wall(const std::vector<TrialRecord>& records) {
    std::vector<std::string> rows;
    for (auto r : records) {
        r.wall_ms = 0.0;
        rows.push_back(to_csv_row(r));
    }
    return rows;
}

}  // namespace

TEST_CASE("trivial suite gives one solved record") {
    RunOptions opts;
    opts.deterministic = true;
    const auto records = run_suite(suite_from(kTrivial), opts);
    REQUIRE(records.size() == 1);
    CHECK(records[0].status == "Solved");
    CHECK(records[0].problem_id == "trivial");
    CHECK(records[0].wall_ms >= 0.0);
    CHECK(records[0].wall_ms < 100.0);
    CHECK(records[0].path_nodes == 1);
}

TEST_CASE("repeated runs give identical records") {
    RunOptions opts;
    opts.deterministic = true;
    opts.densify = std::vector<std::size_t>{1};
    const auto suite = suite_from(kSmall);
    const auto a = run_suite(suite, opts);
    const auto b = run_suite(suite, opts);
    REQUIRE(a.size() == 6);
    CHECK(bodies_without_wall(a) == bodies_without_wall(b));
}

TEST_CASE("parallel jobs keep suite order and outcomes") {
    RunOptions opts;
    opts.deterministic = true;
    opts.densify = std::vector<std::size_t>{1};
    const auto suite = suite_from(kSmall);
    const auto serial = run_suite(suite, opts);
    opts.jobs = 3;
    std::vector<std::string> streamed;
    const auto parallel = run_suite(suite, opts, [&](const TrialRecord& r) { streamed.push_back(r.problem_id); });
    CHECK(bodies_without_wall(serial) == bodies_without_wall(parallel));
    REQUIRE(streamed.size() == serial.size());
    for (std::size_t i = 0; i < serial.size(); ++i) CHECK(streamed[i] == serial[i].problem_id);
}

TEST_CASE("trials are reseeded from the base offset") {
    RunOptions opts;
    opts.deterministic = true;
    opts.densify = std::vector<std::size_t>{1};
    opts.seed_offset = 7;
    const auto records = run_suite(suite_from(kSmall), opts);
    CHECK(records[0].seed_offset == 7);
    CHECK(records[1].seed_offset == 10007);
    CHECK(records[1].trial == 1);
}

TEST_CASE("densification matrix grows possible checks") {
    RunOptions opts;
    opts.deterministic = true;
    opts.trials = 1;
    const auto records = run_suite(suite_from(kSmall), opts);
    REQUIRE(records.size() == 9);
    std::map<std::size_t, double> mean;
    for (const auto& r : records) mean[r.densify] += static_cast<double>(r.checks_possible) / 3.0;
    CHECK(mean[1] > 0.0);
    CHECK(mean[1] <= mean[10]);
    CHECK(mean[10] <= mean[100]);
    for (std::size_t i = 0; i < records.size(); i += 3) {
        CHECK(records[i].status == records[i + 1].status);
        CHECK(records[i].status == records[i + 2].status);
    }
}

TEST_CASE("densified variants occupy the same space") {
    RunOptions opts;
    const auto instances = expand_suite(suite_from(kSmall), opts);
    REQUIRE(instances.size() == 9);
    std::mt19937_64 rng(71);
    for (std::size_t i = 0; i < instances.size(); i += 3) {
        const Scene& base = instances[i].problem->scene;
        CHECK(instances[i + 1].problem->scene.boxes.size() == 10 * base.boxes.size());
        CHECK(instances[i + 2].problem->scene.boxes.size() == 100 * base.boxes.size());
        for (int k = 0; k < 20000; ++k) {
            const Vec3 p = oracle::random_vec(rng, -0.2, 1.2);
            auto inside = [&](const Scene& s) {
                for (const auto& b : s.boxes)
                    if (b.contains(p)) return true;
                return false;
            };
            REQUIRE(inside(base) == inside(instances[i + 1].problem->scene));
            REQUIRE(inside(base) == inside(instances[i + 2].problem->scene));
        }
    }
}

TEST_CASE("broken problem files become error records") {
    const auto suite = suite_from(R"({
      "problems": [{"file": "../problems/missing.json"}, {"file": "../problems/trivial.json"}]
    })");
    RunOptions opts;
    opts.deterministic = true;
    const auto records = run_suite(suite, opts);
    REQUIRE(records.size() == 2);
    CHECK(records[0].status == "Error");
    CHECK(records[0].note.find("missing.json") != std::string::npos);
    CHECK(records[1].status == "Solved");
}

TEST_CASE("suite documents are validated") {
    CHECK_THROWS_AS(suite_from(R"({"trials": 0})"), validation_error);
    CHECK_THROWS_AS(suite_from(R"({"densify": [0]})"), validation_error);
    CHECK_THROWS(suite_from(R"({"params": {"step_size": -1}})"));
}

TEST_CASE("csv round trip") {
    std::vector<TrialRecord> records;
    std::mt19937_64 rng(72);
    for (int i = 0; i < 50; ++i) {
        TrialRecord r = record("g" + std::to_string(i % 3), i % 4 != 0, 0.001 * static_cast<double>(rng() % 100000));
        r.densify = i % 2 ? 10 : 1;
        r.trial = static_cast<std::size_t>(i);
        r.seed_offset = rng();
        r.iterations = rng() % 1000;
        r.checks_performed = rng();
        r.checks_possible = r.checks_performed + rng() % 100;
        r.note = i == 3 ? "bad, \"quoted\" note" : "";
        records.push_back(r);
    }
    std::ostringstream out;
    write_records_csv(out, records);
    std::istringstream in(out.str());
    const auto back = parse_records_csv(in);
    REQUIRE(back.size() == records.size());
    for (std::size_t i = 0; i < records.size(); ++i) {
        CHECK(back[i].same_outcome(records[i]));
        CHECK(std::abs(back[i].wall_ms - records[i].wall_ms) < 1e-9);
    }
    CHECK(out.str().rfind(csv_header(), 0) == 0);
}

TEST_CASE("cdf of a single solved trial") {
    const auto cdf = emit_cdf({record("a", true, 5.0)}, {GroupKey::group});
    REQUIRE(cdf.at("a").size() == 1);
    CHECK(cdf.at("a")[0].time_ms == 5.0);
    CHECK(cdf.at("a")[0].fraction_solved == 1.0);
}

TEST_CASE("cdf is capped by unsolved trials") {
    const auto cdf = emit_cdf({record("a", true, 5.0), record("a", false, 10000.0)}, {GroupKey::group});
    REQUIRE(cdf.at("a").size() == 1);
    CHECK(cdf.at("a").back().fraction_solved == 0.5);
}

TEST_CASE("group without solutions has an empty curve") {
    const auto cdf = emit_cdf({record("a", false, 1.0), record("b", true, 2.0)}, {GroupKey::group});
    REQUIRE(cdf.count("a") == 1);
    CHECK(cdf.at("a").empty());
}

TEST_CASE("cdf is monotone and bounded") {
    std::mt19937_64 rng(73);
    std::vector<TrialRecord> records;
    for (int i = 0; i < 500; ++i)
        records.push_back(record("g" + std::to_string(i % 4), rng() % 3 != 0, static_cast<double>(rng() % 10000) / 7.0));
    for (const auto& [name, curve] : emit_cdf(records, {GroupKey::group})) {
        for (std::size_t i = 0; i < curve.size(); ++i) {
            CHECK(curve[i].fraction_solved <= 1.0);
            CHECK(curve[i].fraction_solved > 0.0);
            if (i > 0) {
                CHECK(curve[i].time_ms >= curve[i - 1].time_ms);
                CHECK(curve[i].fraction_solved > curve[i - 1].fraction_solved);
            }
        }
    }
}

TEST_CASE("summary of an all solved group") {
    const auto s = summarize({record("a", true, 1.0), record("a", true, 3.0), record("a", true, 8.0)}, {GroupKey::group});
    REQUIRE(s.size() == 1);
    CHECK(s[0].trials == 3);
    CHECK(s[0].success_rate == 1.0);
    CHECK(*s[0].mean_ms == 4.0);
    CHECK(*s[0].median_ms == 3.0);
}

TEST_CASE("summary of an unsolved group") {
    const auto s = summarize({record("a", false, 1.0), record("a", false, 2.0)}, {GroupKey::group});
    CHECK(s[0].success_rate == 0.0);
    CHECK_FALSE(s[0].mean_ms);
    CHECK_FALSE(s[0].median_ms);
}

TEST_CASE("checks saved averages over colliding trials") {
    auto a = record("a", true, 1.0);
    a.collision_rejections = 2;
    a.checks_performed = 25;
    a.checks_possible = 100;
    auto b = record("a", true, 1.0);
    b.collision_rejections = 1;
    b.checks_performed = 50;
    b.checks_possible = 100;
    auto c = record("a", true, 1.0);
    c.checks_performed = 100;
    c.checks_possible = 100;
    const auto s = summarize({a, b, c}, {GroupKey::group});
    CHECK(s[0].colliding_trials == 2);
    CHECK(*s[0].checks_saved == doctest::Approx(0.625));
}

TEST_CASE("group names") {
    auto r = record("shelf", true, 1.0);
    r.densify = 10;
    CHECK(group_name(r, default_group_keys()) == "shelf_10x_parallel_ccon");
    CHECK(group_name(r, {}) == "all");
}
