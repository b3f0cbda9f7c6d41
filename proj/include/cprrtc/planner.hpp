#pragma once

#include <chrono>
#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cprrtc/constraints.hpp"
#include "cprrtc/geometry.hpp"
#include "cprrtc/kinematics.hpp"
#include "cprrtc/projection.hpp"
#include "cprrtc/sampling.hpp"
#include "cprrtc/validation.hpp"
#include "cprrtc/worker_team.hpp"

namespace cprrtc {

struct PlannerParams {
    double step_size = 0.5;          // rad, joint-space Euclidean
    std::size_t width = 32;          // waypoints per motion segment
    ProjectionParams projection;
    Projector projector = Projector::parallel;
    CcFlag cc_flag = CcFlag::on;
    std::size_t max_iterations = 10000;
    double time_budget_ms = 10000.0;
    double connect_tolerance = 0.0;  // 0 selects step_size / 10
    std::uint64_t seed_offset = 0;
    Execution execution = Execution::deterministic;
    std::size_t team_size = 0;        // 0 selects hardware concurrency
    std::size_t extensions_per_iteration = 1;
    std::size_t max_connect_steps = 1000;
    // Minimum endpoint-distance decrease per connect step; negative selects step_size / 100,
    // zero keeps only the strict-decrease rule.
    double connect_min_progress = -1.0;

    double resolved_connect_tolerance() const {
        return connect_tolerance > 0.0 ? connect_tolerance : step_size / 10.0;
    }
    double resolved_connect_min_progress() const {
        return connect_min_progress >= 0.0 ? connect_min_progress : step_size / 100.0;
    }
};

void validate_planner_params(const PlannerParams& params);

struct PlanProblem {
    std::string id;
    RobotModel model;
    Scene scene;
    ConstraintSpec constraint;
    Configuration start;
    Configuration goal;
    PlannerParams params;
};

/// Throws validation_error if start or goal is malformed, outside limits,
/// off the constraint manifold, or in collision.
void validate_problem(const PlanProblem& problem);

enum class TreeRoot { start, goal };

struct TreeNode {
    Configuration q;
    std::size_t parent = 0;
    /// Interpolation target of the edge that produced this node: projecting
    /// interpolate_segment(parent.q, edge_target) reproduces the edge and ends at q.
    Configuration edge_target;
};

/// Append-only tree; the root is its own parent.
class Tree {
public:
    Tree(Configuration root, TreeRoot kind);

    std::size_t size() const { return nodes_.size(); }
    const TreeNode& operator[](std::size_t i) const { return nodes_[i]; }
    TreeRoot root_kind() const { return kind_; }
    std::size_t add(Configuration q, std::size_t parent, Configuration edge_target);
    const std::vector<TreeNode>& nodes() const { return nodes_; }

private:
    std::vector<TreeNode> nodes_;
    TreeRoot kind_;
};

/// Lowest-index node at minimum Euclidean distance to q.
std::size_t nearest(const Tree& tree, const Configuration& q);

/// q_rand if it is within `step` of q_near, else the point `step` along the
/// way. Returns q_near when the two coincide.
Configuration steer(const Configuration& q_near, const Configuration& q_rand, double step);

/// Root-to-meet of the start tree followed by meet-to-root of the goal tree;
/// the meeting configuration appears once when both meets are identical.
std::vector<Configuration> extract_path(const Tree& start_tree, const Tree& goal_tree,
                                        std::size_t meet_start, std::size_t meet_goal);

/// How to regenerate the motion between path[i] and path[i + 1]: project
/// interpolate_segment(from, target). The projected segment runs from
/// path[i] to path[i + 1], or the other way round when `reversed`.
struct EdgeRecipe {
    Configuration from;
    Configuration target;
    bool reversed = false;
};

enum class PlanStatus { solved, timed_out, iteration_limit };
std::string_view to_string(PlanStatus s);

struct PlanStats {
    std::size_t iterations = 0;
    std::size_t extend_attempts = 0;
    std::size_t connect_steps = 0;
    std::size_t projection_failures = 0;
    std::size_t collision_rejections = 0;
    std::size_t start_tree_nodes = 0;
    std::size_t goal_tree_nodes = 0;
    ValidationReport cc;
    double wall_ms = 0.0;
};

struct PlanResult {
    PlanStatus status = PlanStatus::iteration_limit;
    std::vector<Configuration> path;
    std::vector<EdgeRecipe> edges;       // path.size() - 1 entries
    std::vector<MotionSegment> segments; // derived edges, oriented along the path
    PlanStats stats;

    bool solved() const { return status == PlanStatus::solved; }
};

struct ExtendOutcome {
    enum class Kind { added, rejected } kind = Kind::rejected;
    std::size_t node = 0;
};

struct ConnectOutcome {
    enum class Kind { reached, advanced, trapped } kind = Kind::trapped;
    std::size_t last_node = 0;  // last node of the connecting tree
    std::size_t added = 0;      // nodes appended during this call
    /// Reached through a straight chord from last_node to the target rather
    /// than by landing on it exactly.
    bool via_chord = false;
    /// Endpoint distances to the target after each accepted segment.
    std::vector<double> distances;
};

/// Constrained bidirectional RRT-Connect. Each tree extension interpolates a
/// fixed-width segment, projects it onto the constraint manifold and
/// validates it; the other tree then connects greedily to the new node.
class ConstrainedRrtConnect {
public:
    using ProjectorFn = std::function<ProjectionOutcome(const MotionSegment&)>;

    explicit ConstrainedRrtConnect(const PlanProblem& problem);
    ~ConstrainedRrtConnect();

    PlanResult solve();

    ExtendOutcome extend(Tree& tree, const Configuration& q_rand);
    ConnectOutcome connect(Tree& tree, const Configuration& q_target);

    /// Replaces the projector, e.g. with a stub in tests.
    void set_projector(ProjectorFn fn) { projector_override_ = std::move(fn); }

    /// Projection with the configured projector and worker team.
    ProjectionOutcome project(const MotionSegment& seg, bool use_team = true) const;
    ValidationReport validate(const MotionSegment& seg, bool use_team = true) const;

    const Tree& start_tree() const { return start_tree_; }
    const Tree& goal_tree() const { return goal_tree_; }
    Tree& start_tree() { return start_tree_; }
    Tree& goal_tree() { return goal_tree_; }
    const PlanStats& stats() const { return stats_; }

private:
    struct Candidate;
    std::optional<Candidate> attempt_extend(const Tree& tree, const Configuration& q_rand,
                                            PlanStats& stats, bool use_team = true) const;
    bool chord_connects(const Configuration& from, const Configuration& to);
    PlanResult make_solution(const Tree& connecting, std::size_t connect_node, const Tree& target_tree,
                             std::size_t target_node, bool via_chord);
    bool out_of_time() const;

    const PlanProblem& problem_;
    Tree start_tree_;
    Tree goal_tree_;
    HaltonSampler sampler_;
    std::unique_ptr<WorkerTeam> team_;
    ProjectorFn projector_override_;
    PlanStats stats_;
    std::chrono::steady_clock::time_point started_;
};

/// Convenience wrapper: validate the problem and solve it.
PlanResult plan(const PlanProblem& problem);

/// Regenerates the motion for one path edge with the problem's projector.
/// Returns nullopt when projection does not succeed.
std::optional<MotionSegment> derive_edge(const PlanProblem& problem, const EdgeRecipe& edge);

}  // namespace cprrtc
