#include "cprrtc/planner.hpp"

#include <algorithm>
#include <cmath>
#include <future>
#include <stdexcept>

#include "cprrtc/errors.hpp"

namespace cprrtc {

void validate_planner_params(const PlannerParams& p) {
    if (!(p.step_size > 0.0)) throw std::invalid_argument("step_size must be positive");
    if (p.width < 2) throw std::invalid_argument("segment width must be >= 2");
    if (p.max_iterations < 1) throw std::invalid_argument("max_iterations must be >= 1");
    if (!(p.time_budget_ms > 0.0)) throw std::invalid_argument("time_budget_ms must be positive");
    if (p.connect_tolerance < 0.0) throw std::invalid_argument("connect_tolerance must be >= 0");
    if (p.extensions_per_iteration < 1) throw std::invalid_argument("extensions_per_iteration must be >= 1");
    validate_projection_params(p.projection);
}

void validate_problem(const PlanProblem& problem) {
    validate_planner_params(problem.params);
    validate_constraint(problem.constraint);
    const auto& model = problem.model;
    for (const auto& [label, q] : {std::pair{"start", &problem.start}, std::pair{"goal", &problem.goal}}) {
        if (static_cast<std::size_t>(q->size()) != model.dof())
            throw validation_error(std::string(label) + ": expected " + std::to_string(model.dof()) +
                                   " joint values, got " + std::to_string(q->size()));
        if (!model.within_limits(*q)) throw validation_error(std::string(label) + ": outside joint limits");
        const double err = task_error(problem.constraint, model, *q).norm();
        if (!(err < problem.constraint.tau_task))
            throw validation_error(std::string(label) + ": violates the task constraint (error " +
                                   std::to_string(err) + ")");
        if (!validate_configuration(*q, problem.scene, model))
            throw validation_error(std::string(label) + ": in collision");
    }
}

Tree::Tree(Configuration root, TreeRoot kind) : kind_(kind) {
    nodes_.push_back(TreeNode{root, 0, root});
}

std::size_t Tree::add(Configuration q, std::size_t parent, Configuration edge_target) {
    if (parent >= nodes_.size()) throw std::out_of_range("parent index out of range");
    nodes_.push_back(TreeNode{std::move(q), parent, std::move(edge_target)});
    return nodes_.size() - 1;
}

std::size_t nearest(const Tree& tree, const Configuration& q) {
    std::size_t best = 0;
    double best_d = (tree[0].q - q).squaredNorm();
    for (std::size_t i = 1; i < tree.size(); ++i) {
        const double d = (tree[i].q - q).squaredNorm();
        if (d < best_d) {
            best_d = d;
            best = i;
        }
    }
    return best;
}

Configuration steer(const Configuration& q_near, const Configuration& q_rand, double step) {
    if (q_near.size() != q_rand.size()) throw dimension_error("steer endpoints differ in dimension");
    const Configuration delta = q_rand - q_near;
    const double dist = delta.norm();
    if (dist <= step) return q_rand;
    return q_near + (step / dist) * delta;
}

std::vector<Configuration> extract_path(const Tree& start_tree, const Tree& goal_tree,
                                        std::size_t meet_start, std::size_t meet_goal) {
    if (meet_start >= start_tree.size() || meet_goal >= goal_tree.size())
        throw std::out_of_range("meeting node index out of range");
    std::vector<Configuration> path;
    for (std::size_t i = meet_start;; i = start_tree[i].parent) {
        path.push_back(start_tree[i].q);
        if (start_tree[i].parent == i) break;
    }
    std::reverse(path.begin(), path.end());
    std::size_t i = meet_goal;
    if ((goal_tree[i].q.array() == path.back().array()).all()) {
        if (goal_tree[i].parent == i) return path;
        i = goal_tree[i].parent;
    }
    for (;; i = goal_tree[i].parent) {
        path.push_back(goal_tree[i].q);
        if (goal_tree[i].parent == i) break;
    }
    return path;
}

std::string_view to_string(PlanStatus s) {
    switch (s) {
        case PlanStatus::solved: return "Solved";
        case PlanStatus::timed_out: return "TimedOut";
        case PlanStatus::iteration_limit: return "IterLimit";
    }
    return "?";
}

namespace {

bool same(const Configuration& a, const Configuration& b) { return (a.array() == b.array()).all(); }

}  // namespace

struct ConstrainedRrtConnect::Candidate {
    std::size_t parent;
    Configuration q_end;
    Configuration target;
};

ConstrainedRrtConnect::ConstrainedRrtConnect(const PlanProblem& problem)
    : problem_(problem),
      start_tree_(problem.start, TreeRoot::start),
      goal_tree_(problem.goal, TreeRoot::goal),
      sampler_(problem.model.dof(), problem.params.seed_offset),
      started_(std::chrono::steady_clock::now()) {
    if (problem.params.execution == Execution::concurrent) {
        const std::size_t n = problem.params.team_size > 0
                                  ? problem.params.team_size
                                  : std::max<std::size_t>(1, std::thread::hardware_concurrency());
        team_ = std::make_unique<WorkerTeam>(n);
    }
}

ConstrainedRrtConnect::~ConstrainedRrtConnect() = default;

ProjectionOutcome ConstrainedRrtConnect::project(const MotionSegment& seg, bool use_team) const {
    if (projector_override_) return projector_override_(seg);
    ProjectionOptions opts;
    if (use_team && team_) {
        opts.execution = Execution::concurrent;
        opts.team = team_.get();
    }
    return project_segment(problem_.params.projector, seg, problem_.constraint, problem_.model,
                           problem_.params.projection, opts);
}

ValidationReport ConstrainedRrtConnect::validate(const MotionSegment& seg, bool use_team) const {
    ValidationOptions opts;
    if (use_team && team_) {
        opts.execution = Execution::concurrent;
        opts.team = team_.get();
    }
    return validate_motion(seg, problem_.scene, problem_.model, problem_.params.cc_flag, opts);
}

bool ConstrainedRrtConnect::out_of_time() const {
    const auto elapsed = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started_);
    return elapsed.count() > problem_.params.time_budget_ms;
}

std::optional<ConstrainedRrtConnect::Candidate> ConstrainedRrtConnect::attempt_extend(
    const Tree& tree, const Configuration& q_rand, PlanStats& stats, bool use_team) const {
    ++stats.extend_attempts;
    const std::size_t near = nearest(tree, q_rand);
    const Configuration& q_near = tree[near].q;
    Configuration q_steer = steer(q_near, q_rand, problem_.params.step_size);
    if (same(q_steer, q_near)) return std::nullopt;

    const auto projected = project(interpolate_segment(q_near, q_steer, problem_.params.width), use_team);
    if (!projected.ok()) {
        ++stats.projection_failures;
        return std::nullopt;
    }
    const auto report = validate(projected.segment, use_team);
    stats.cc += report;
    if (!report.valid) {
        ++stats.collision_rejections;
        return std::nullopt;
    }
    return Candidate{near, projected.segment.back(), std::move(q_steer)};
}

ExtendOutcome ConstrainedRrtConnect::extend(Tree& tree, const Configuration& q_rand) {
    auto cand = attempt_extend(tree, q_rand, stats_);
    if (!cand) return {};
    return {ExtendOutcome::Kind::added, tree.add(std::move(cand->q_end), cand->parent, std::move(cand->target))};
}

bool ConstrainedRrtConnect::chord_connects(const Configuration& from, const Configuration& to) {
    const MotionSegment chord = interpolate_segment(from, to, problem_.params.width);
    const auto projected = project(chord);
    if (!projected.ok() || !(projected.segment == chord)) return false;
    const auto report = validate(chord);
    stats_.cc += report;
    return report.valid;
}

ConnectOutcome ConstrainedRrtConnect::connect(Tree& tree, const Configuration& q_target) {
    ConnectOutcome out;
    std::size_t cur = nearest(tree, q_target);
    double dist = (tree[cur].q - q_target).norm();
    const double tolerance = problem_.params.resolved_connect_tolerance();
    const double min_progress = problem_.params.resolved_connect_min_progress();

    for (std::size_t step = 0; step < problem_.params.max_connect_steps; ++step) {
        out.last_node = cur;
        if (dist == 0.0) {
            out.kind = ConnectOutcome::Kind::reached;
            return out;
        }
        if (dist <= tolerance && chord_connects(tree[cur].q, q_target)) {
            out.kind = ConnectOutcome::Kind::reached;
            out.via_chord = true;
            return out;
        }
        if (out_of_time()) break;

        ++stats_.connect_steps;
        Configuration q_steer = steer(tree[cur].q, q_target, problem_.params.step_size);
        const auto projected = project(interpolate_segment(tree[cur].q, q_steer, problem_.params.width));
        if (!projected.ok()) {
            ++stats_.projection_failures;
            break;
        }
        const auto report = validate(projected.segment);
        stats_.cc += report;
        if (!report.valid) {
            ++stats_.collision_rejections;
            break;
        }
        const double next_dist = (projected.segment.back() - q_target).norm();
        if (!(next_dist < dist)) break;
        if (dist - next_dist < min_progress && next_dist > tolerance) break;
        cur = tree.add(projected.segment.back(), cur, std::move(q_steer));
        ++out.added;
        out.distances.push_back(next_dist);
        out.kind = ConnectOutcome::Kind::advanced;
        dist = next_dist;
    }
    out.last_node = cur;
    if (out.kind != ConnectOutcome::Kind::reached) out.kind = out.added > 0 ? ConnectOutcome::Kind::advanced
                                                                           : ConnectOutcome::Kind::trapped;
    return out;
}

PlanResult ConstrainedRrtConnect::make_solution(const Tree& connecting, std::size_t connect_node,
                                                const Tree& target_tree, std::size_t target_node,
                                                bool via_chord) {
    const bool connecting_is_start = connecting.root_kind() == TreeRoot::start;
    const Tree& st = connecting_is_start ? connecting : target_tree;
    const Tree& gt = connecting_is_start ? target_tree : connecting;
    const std::size_t meet_s = connecting_is_start ? connect_node : target_node;
    const std::size_t meet_g = connecting_is_start ? target_node : connect_node;

    PlanResult result;
    result.status = PlanStatus::solved;
    result.path = extract_path(st, gt, meet_s, meet_g);

    // Edge recipes mirror extract_path's traversal.
    std::vector<std::size_t> start_chain;
    for (std::size_t i = meet_s;; i = st[i].parent) {
        start_chain.push_back(i);
        if (st[i].parent == i) break;
    }
    std::reverse(start_chain.begin(), start_chain.end());
    for (std::size_t k = 1; k < start_chain.size(); ++k) {
        const auto& child = st[start_chain[k]];
        result.edges.push_back(EdgeRecipe{st[child.parent].q, child.edge_target, false});
    }
    std::size_t g = meet_g;
    if (via_chord) {
        if (connecting_is_start)
            result.edges.push_back(EdgeRecipe{st[meet_s].q, gt[meet_g].q, false});
        else
            result.edges.push_back(EdgeRecipe{gt[meet_g].q, st[meet_s].q, true});
    } else if (!same(gt[g].q, st[meet_s].q)) {
        throw std::logic_error("exact meeting expected without a chord");
    }
    for (; gt[g].parent != g; g = gt[g].parent)
        result.edges.push_back(EdgeRecipe{gt[gt[g].parent].q, gt[g].edge_target, true});

    for (const auto& e : result.edges) {
        auto projected = project(interpolate_segment(e.from, e.target, problem_.params.width));
        if (!projected.ok()) throw std::logic_error("stored edge no longer projects");
        if (e.reversed) std::reverse(projected.segment.waypoints.begin(), projected.segment.waypoints.end());
        result.segments.push_back(std::move(projected.segment));
    }
    return result;
}

PlanResult ConstrainedRrtConnect::solve() {
    started_ = std::chrono::steady_clock::now();
    const auto& params = problem_.params;
    auto finish = [&](PlanResult r) {
        stats_.start_tree_nodes = start_tree_.size();
        stats_.goal_tree_nodes = goal_tree_.size();
        stats_.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - started_).count();
        r.stats = stats_;
        return r;
    };

    if (same(problem_.start, problem_.goal)) {
        PlanResult r;
        r.status = PlanStatus::solved;
        r.path = {problem_.start};
        return finish(std::move(r));
    }

    const Eigen::VectorXd lower = problem_.model.lower_limits();
    const Eigen::VectorXd upper = problem_.model.upper_limits();
    Tree* a = &start_tree_;
    Tree* b = &goal_tree_;

    for (std::size_t iter = 0; iter < params.max_iterations; ++iter) {
        if (out_of_time()) {
            PlanResult r;
            r.status = PlanStatus::timed_out;
            return finish(std::move(r));
        }
        ++stats_.iterations;

        std::optional<std::size_t> added;
        if (params.extensions_per_iteration == 1) {
            const auto ext = extend(*a, sampler_.next(lower, upper));
            if (ext.kind == ExtendOutcome::Kind::added) added = ext.node;
        } else {
            // Several attempts against the same tree snapshot; the lowest
            // successful index is committed.
            const std::size_t k = params.extensions_per_iteration;
            std::vector<Configuration> samples;
            for (std::size_t i = 0; i < k; ++i) samples.push_back(sampler_.next(lower, upper));
            std::vector<PlanStats> local(k);
            std::vector<std::optional<Candidate>> cands(k);
            if (params.execution == Execution::concurrent) {
                // The shared team serves one job at a time, so attempts run
                // their own projection and validation single-threaded.
                std::vector<std::future<std::optional<Candidate>>> futures;
                for (std::size_t i = 0; i < k; ++i)
                    futures.push_back(std::async(std::launch::async, [&, i] {
                        return attempt_extend(*a, samples[i], local[i], false);
                    }));
                for (std::size_t i = 0; i < k; ++i) cands[i] = futures[i].get();
            } else {
                for (std::size_t i = 0; i < k; ++i) cands[i] = attempt_extend(*a, samples[i], local[i]);
            }
            for (const auto& s : local) {
                stats_.extend_attempts += s.extend_attempts;
                stats_.projection_failures += s.projection_failures;
                stats_.collision_rejections += s.collision_rejections;
                stats_.cc += s.cc;
            }
            for (auto& c : cands)
                if (c) {
                    added = a->add(std::move(c->q_end), c->parent, std::move(c->target));
                    break;
                }
        }

        if (added) {
            const Configuration target = (*a)[*added].q;
            const auto con = connect(*b, target);
            if (con.kind == ConnectOutcome::Kind::reached)
                return finish(make_solution(*b, con.last_node, *a, *added, con.via_chord));
        }
        std::swap(a, b);
    }
    PlanResult r;
    r.status = PlanStatus::iteration_limit;
    return finish(std::move(r));
}

PlanResult plan(const PlanProblem& problem) {
    validate_problem(problem);
    ConstrainedRrtConnect planner(problem);
    return planner.solve();
}

std::optional<MotionSegment> derive_edge(const PlanProblem& problem, const EdgeRecipe& edge) {
    auto out = project_segment(problem.params.projector,
                               interpolate_segment(edge.from, edge.target, problem.params.width),
                               problem.constraint, problem.model, problem.params.projection);
    if (!out.ok()) return std::nullopt;
    if (edge.reversed) std::reverse(out.segment.waypoints.begin(), out.segment.waypoints.end());
    return out.segment;
}

}  // namespace cprrtc
