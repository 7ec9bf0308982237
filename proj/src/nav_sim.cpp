#include "metactl/nav_sim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <queue>

#include "metactl/error.hpp"

namespace metactl::nav {

// ---------------------------------------------------------------------------
// Path

double Path::length() const {
    double total = 0.0;
    for (std::size_t i = 1; i < points.size(); ++i) total += distance(points[i - 1], points[i]);
    return total;
}

Vec2 Path::point_at(double s) const {
    if (points.empty()) return {};
    if (s <= 0.0) return points.front();
    for (std::size_t i = 1; i < points.size(); ++i) {
        const double seg = distance(points[i - 1], points[i]);
        if (s <= seg && seg > 0.0) return points[i - 1] + (points[i] - points[i - 1]) * (s / seg);
        s -= seg;
    }
    return points.back();
}

// ---------------------------------------------------------------------------
// Planning

namespace {

constexpr double kSqrt2 = 1.4142135623730951;

struct PlanGrid {
    const OccupancyGrid& grid;
    std::vector<std::uint8_t> allowed;  // 1 = clear, 2 = escape zone

    bool ok(Cell c) const { return grid.in_bounds(c) && allowed[grid.index(c)] != 0; }
};

PlanGrid build_allowed(const OccupancyGrid& grid, const ClearanceMap& clearance, Cell start, double r,
                       const PlanOptions& options) {
    PlanGrid pg{grid, std::vector<std::uint8_t>(static_cast<std::size_t>(grid.width()) * grid.height(), 0)};
    const double need = r - 1e-9;
    for (int y = 0; y < grid.height(); ++y) {
        for (int x = 0; x < grid.width(); ++x) {
            const Cell c{x, y};
            if (!grid.occupied(c) && clearance.at(c) >= need) pg.allowed[grid.index(c)] = 1;
        }
    }
    if (!options.allow_escape || !grid.in_bounds(start) || grid.occupied(start) || pg.ok(start)) return pg;

    // Flood the inflated cells around the start that are no closer to an
    // obstacle than the start itself, up to a bounded reach.
    const double reach = r + 0.5;
    const double floor = clearance.at(start) - 1e-9;
    const Vec2 origin = grid.center_of(start);
    std::vector<Cell> stack{start};
    pg.allowed[grid.index(start)] = 2;
    while (!stack.empty()) {
        const Cell c = stack.back();
        stack.pop_back();
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                const Cell n{c.x + dx, c.y + dy};
                if ((dx == 0 && dy == 0) || !grid.in_bounds(n) || grid.occupied(n)) continue;
                auto& slot = pg.allowed[grid.index(n)];
                if (slot != 0 || clearance.at(n) < floor || distance(grid.center_of(n), origin) > reach) continue;
                slot = 2;
                stack.push_back(n);
            }
        }
    }
    return pg;
}

bool line_of_sight(const PlanGrid& pg, Vec2 a, Vec2 b) {
    const double len = distance(a, b);
    const int samples = static_cast<int>(std::ceil(len / (pg.grid.resolution() * 0.25))) + 1;
    for (int i = 0; i <= samples; ++i) {
        const Vec2 p = a + (b - a) * (static_cast<double>(i) / samples);
        if (!pg.ok(pg.grid.cell_of(p))) return false;
    }
    return true;
}

}  // namespace

PlanResult plan_path(const OccupancyGrid& grid, const ClearanceMap& clearance, Vec2 start, Vec2 goal,
                     double inflation_radius, const PlanOptions& options) {
    PlanResult result;
    const Cell s = grid.cell_of(start);
    const Cell g = grid.cell_of(goal);
    const PlanGrid pg = build_allowed(grid, clearance, s, inflation_radius, options);
    if (!pg.ok(s) || !pg.ok(g)) return result;

    const std::size_t n = static_cast<std::size_t>(grid.width()) * grid.height();
    constexpr double inf = std::numeric_limits<double>::infinity();
    std::vector<double> cost(n, inf);
    std::vector<std::int32_t> parent(n, -1);
    std::vector<std::uint8_t> closed(n, 0);

    auto heuristic = [&](Cell c) {
        const int dx = std::abs(c.x - g.x);
        const int dy = std::abs(c.y - g.y);
        return (std::max(dx, dy) - std::min(dx, dy) + kSqrt2 * std::min(dx, dy)) * grid.resolution();
    };
    using Entry = std::pair<double, std::int32_t>;  // (f, index), ties on the smaller index
    std::priority_queue<Entry, std::vector<Entry>, std::greater<>> open;

    const auto si = static_cast<std::int32_t>(grid.index(s));
    const auto gi = static_cast<std::int32_t>(grid.index(g));
    cost[si] = 0.0;
    open.push({heuristic(s), si});
    while (!open.empty()) {
        const auto [f, idx] = open.top();
        open.pop();
        if (closed[idx]) continue;
        closed[idx] = 1;
        if (idx == gi) break;
        const Cell c{idx % grid.width(), idx / grid.width()};
        for (int dy = -1; dy <= 1; ++dy) {
            for (int dx = -1; dx <= 1; ++dx) {
                if (dx == 0 && dy == 0) continue;
                const Cell nb{c.x + dx, c.y + dy};
                if (!pg.ok(nb)) continue;
                if (dx != 0 && dy != 0 && (!pg.ok({c.x + dx, c.y}) || !pg.ok({c.x, c.y + dy}))) continue;
                const auto ni = static_cast<std::int32_t>(grid.index(nb));
                if (closed[ni]) continue;
                const double step = (dx != 0 && dy != 0 ? kSqrt2 : 1.0) * grid.resolution();
                const double candidate = cost[idx] + step;
                if (candidate < cost[ni]) {
                    cost[ni] = candidate;
                    parent[ni] = idx;
                    open.push({candidate + heuristic(nb), ni});
                }
            }
        }
    }
    if (!closed[gi]) return result;

    for (std::int32_t i = gi; i != -1; i = parent[i]) result.cells.push_back({i % grid.width(), i / grid.width()});
    std::reverse(result.cells.begin(), result.cells.end());
    result.grid_length = cost[gi];

    // String pulling over cell centers, anchored at the exact endpoints.
    std::vector<Vec2> raw;
    raw.reserve(result.cells.size() + 2);
    raw.push_back(start);
    for (std::size_t i = 1; i + 1 < result.cells.size(); ++i) raw.push_back(grid.center_of(result.cells[i]));
    raw.push_back(goal);

    Path& path = result.path;
    path.points.push_back(raw.front());
    std::size_t anchor = 0;
    while (anchor + 1 < raw.size()) {
        std::size_t next = anchor + 1;
        for (std::size_t j = anchor + 2; j < raw.size(); ++j) {
            if (!line_of_sight(pg, raw[anchor], raw[j])) break;
            next = j;
        }
        path.points.push_back(raw[next]);
        anchor = next;
    }
    if (path.points.size() == 1) path.points.push_back(goal);
    result.status = PlanStatus::ok;
    return result;
}

PlanResult plan_path(const OccupancyGrid& grid, Vec2 start, Vec2 goal, double inflation_radius) {
    const ClearanceMap clearance(grid, inflation_radius + 2.0 * grid.resolution());
    return plan_path(grid, clearance, start, goal, inflation_radius);
}

// ---------------------------------------------------------------------------
// Control

NavConfig NavConfig::from(const NavDesignParams& p) {
    NavConfig c;
    c.max_vel = p.max_vel;
    c.accel_lim = p.accel_lim;
    c.inflation_radius = p.inflation_radius;
    return c;
}

namespace {

/// Arc length of the closest point on the path, searched in a window starting
/// slightly behind `hint`.
double project(const Path& path, Vec2 p, double hint) {
    const double lo = hint - 0.1;
    const double hi = hint + 2.0;
    double best_s = std::max(0.0, hint);
    double best_d = std::numeric_limits<double>::infinity();
    double s0 = 0.0;
    for (std::size_t i = 1; i < path.points.size(); ++i) {
        const Vec2 a = path.points[i - 1];
        const Vec2 b = path.points[i];
        const double seg = distance(a, b);
        if (s0 + seg >= lo && s0 <= hi && seg > 0.0) {
            const Vec2 ab = b - a;
            const Vec2 ap = p - a;
            double t = (ap.x * ab.x + ap.y * ab.y) / (seg * seg);
            t = std::clamp(t, std::max(0.0, (lo - s0) / seg), std::min(1.0, (hi - s0) / seg));
            const double d = distance(a + ab * t, p);
            if (d < best_d) {
                best_d = d;
                best_s = s0 + t * seg;
            }
        }
        s0 += seg;
        if (s0 > hi) break;
    }
    return best_s;
}

}  // namespace

ControlOutput control(const RobotState& robot, const Path& path, const NavConfig& cfg, double dt,
                      double progress_hint, const ControlParams& params) {
    ControlOutput out;
    double target_speed = 0.0;
    double alpha = 0.0;
    bool tracking = false;
    bool goal_braking = false;
    if (!path.empty()) {
        const double total = path.length();
        out.progress = project(path, robot.position, progress_hint);
        const Vec2 goal = path.points.back();
        const double to_goal = distance(robot.position, goal);
        if (to_goal > params.goal_tolerance) {
            tracking = true;
            const Vec2 target = path.point_at(out.progress + params.lookahead);
            const Vec2 d = target - robot.position;
            alpha = wrap_angle(std::atan2(d.y, d.x) - robot.heading);
            const double heading_scale = std::clamp((std::cos(alpha) - 0.5) / 0.5, 0.0, 1.0);
            const double remaining = std::max(total - out.progress, to_goal);
            const double stop_limit = std::sqrt(2.0 * cfg.accel_lim * remaining);
            target_speed = std::min(cfg.max_vel * heading_scale, stop_limit);
            goal_braking = stop_limit < robot.speed;
        } else {
            goal_braking = true;
        }
    }
    const double max_up = cfg.accel_lim * dt;
    const double max_down = (goal_braking ? cfg.accel_lim : std::min(cfg.accel_lim, params.comfort_decel)) * dt;
    const double next = std::max(0.0, robot.speed + std::clamp(target_speed - robot.speed, -max_down, max_up));
    out.commanded_speed = next;
    out.commanded_accel = (next - robot.speed) / dt;
    if (tracking) {
        // Pure-pursuit curvature; behind the robot, turn in place at full rate.
        const double pursuit = 2.0 * std::max(next, 0.25) * std::sin(alpha) / params.lookahead;
        const double rate = std::cos(alpha) < 0.0 ? std::copysign(params.max_turn_rate, alpha) : pursuit;
        out.turn_rate = std::clamp(rate, -params.max_turn_rate, params.max_turn_rate);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Observers

double braking_distance(double speed, double accel_lim, double horizon) {
    const double v = std::abs(speed);
    return v * horizon + v * v / (2.0 * accel_lim);
}

double safety_value(double clearance, double speed, double accel_lim, double horizon) {
    if (speed == 0.0) return 1.0;
    const double d = braking_distance(speed, accel_lim, horizon);
    if (clearance >= d) return 1.0;
    return std::clamp(clearance / d, 0.0, 1.0);
}

double obstacle_clearance(const OccupancyGrid& known, const RobotState& robot, double range,
                          const SafetyParams& params) {
    const double reach = range + params.footprint_radius;
    const double tan_half = std::tan(params.half_angle);
    const Vec2 h{std::cos(robot.heading), std::sin(robot.heading)};
    const Cell c = known.cell_of(robot.position);
    const int w = static_cast<int>(std::ceil(reach / known.resolution())) + 1;
    double best = std::numeric_limits<double>::infinity();
    for (int dy = -w; dy <= w; ++dy) {
        for (int dx = -w; dx <= w; ++dx) {
            const Cell n{c.x + dx, c.y + dy};
            if (!known.in_bounds(n) || !known.occupied(n)) continue;
            const Vec2 d = known.center_of(n) - robot.position;
            const double dist = d.norm();
            if (dist > reach) continue;
            // Inside the footprint swept forward and widening at +-half_angle.
            const double ahead = d.x * h.x + d.y * h.y;
            const double side = std::abs(d.x * h.y - d.y * h.x);
            if (dist > params.footprint_radius && (ahead < 0.0 || side > params.footprint_radius + ahead * tan_half)) {
                continue;
            }
            best = std::min(best, std::max(0.0, dist - params.footprint_radius));
        }
    }
    return best;
}

double observe_safety(const OccupancyGrid& known, const RobotState& robot, const NavConfig& cfg,
                      const SafetyParams& params) {
    if (robot.speed == 0.0) return 1.0;
    const double d = braking_distance(robot.speed, cfg.accel_lim, params.horizon);
    const double p = obstacle_clearance(known, robot, d, params);
    return safety_value(p, robot.speed, cfg.accel_lim, params.horizon);
}

double observe_energy(const RobotState& robot, const NavConfig& cfg, double power_increase,
                      const PowerModel& power) {
    return power.normalized(power.power_load(robot.speed, robot.accel, cfg.controller_frequency, power_increase));
}

// ---------------------------------------------------------------------------
// Simulation

std::string_view to_string(Clutter c) {
    switch (c) {
        case Clutter::none: return "none";
        case Clutter::low: return "low";
        case Clutter::medium: return "medium";
        case Clutter::high: return "high";
    }
    return "?";
}

std::optional<Clutter> clutter_from_string(std::string_view s) {
    for (Clutter c : {Clutter::none, Clutter::low, Clutter::medium, Clutter::high}) {
        if (to_string(c) == s) return c;
    }
    return std::nullopt;
}

std::string_view to_string(MissionOutcome o) {
    switch (o) {
        case MissionOutcome::running: return "running";
        case MissionOutcome::complete: return "complete";
        case MissionOutcome::collision: return "collision";
        case MissionOutcome::no_path: return "no_path";
        case MissionOutcome::timeout: return "timeout";
    }
    return "?";
}

std::optional<MissionOutcome> outcome_from_string(std::string_view s) {
    for (MissionOutcome o : {MissionOutcome::running, MissionOutcome::complete, MissionOutcome::collision,
                             MissionOutcome::no_path, MissionOutcome::timeout}) {
        if (to_string(o) == s) return o;
    }
    return std::nullopt;
}

namespace {

constexpr double kClearanceRange = 1.5;  // m, above every inflation radius in use

}  // namespace

NavSimulator::NavSimulator(NavWorldSetup world, NavConfig cfg, ContingencySpec contingency, std::uint64_t seed,
                           SimParams params)
    : world_(std::move(world)),
      cfg_(cfg),
      contingency_(contingency),
      params_(params),
      known_(world_.grid),
      physical_(world_.grid),
      clearance_(world_.grid, kClearanceRange) {
    robot_.position = world_.start;

    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> onset(params_.power_onset_min, params_.power_onset_max);
    power_onset_ = onset(rng);

    const PlanResult initial = plan_path(known_, clearance_, world_.start, world_.goal, cfg_.inflation_radius,
                                         PlanOptions{true});
    if (initial.status != PlanStatus::ok) {
        outcome_ = MissionOutcome::no_path;
        return;
    }
    path_ = initial.path;
    initial_path_ = initial.path;
    const Vec2 first = path_.point_at(0.5) - world_.start;
    robot_.heading = std::atan2(first.y, first.x);
    place_obstacles(rng);
}

void NavSimulator::place_obstacles(std::mt19937_64& rng) {
    std::vector<double> stations;
    const double len = initial_path_.length();
    switch (contingency_.clutter) {
        case Clutter::none: break;
        case Clutter::low: stations = {0.5 * len}; break;
        case Clutter::medium: stations = {0.25 * len, 0.75 * len}; break;
        case Clutter::high:
            stations = {0.5 * len - params_.cluster_spacing, 0.5 * len, 0.5 * len + params_.cluster_spacing};
            break;
    }
    std::uniform_real_distribution<double> along(-params_.placement_jitter, params_.placement_jitter);
    std::uniform_real_distribution<double> across(-params_.lateral_jitter, params_.lateral_jitter);
    for (double s : stations) {
        const double ds = along(rng);
        const double dl = across(rng);
        const double at = std::clamp(s + ds, 0.0, len);
        const Vec2 p = initial_path_.point_at(at);
        const Vec2 ahead = initial_path_.point_at(std::min(len, at + 0.05));
        const Vec2 behind = initial_path_.point_at(std::max(0.0, at - 0.05));
        Vec2 t = ahead - behind;
        const double tn = t.norm();
        t = tn > 0.0 ? t * (1.0 / tn) : Vec2{1.0, 0.0};
        const Vec2 normal{-t.y, t.x};
        UnexpectedObstacle o;
        o.center = p + normal * dl;
        o.radius = params_.obstacle_radius;
        obstacles_.push_back(o);
    }
}

double NavSimulator::power_increase_now() const {
    return clock_ >= power_onset_ ? contingency_.power_increase : 0.0;
}

void NavSimulator::spawn_and_sense() {
    for (auto& o : obstacles_) {
        const double d = distance(o.center, robot_.position);
        if (!o.spawned && d <= params_.spawn_distance) {
            o.spawned = true;
            o.spawn_time = clock_;
            for (const Cell c : physical_.disc_cells(o.center, o.radius)) physical_.set_occupied(c, true);
        }
        if (o.spawned && !o.sensed && d <= params_.sensor_radius) {
            o.sensed = true;
            const auto cells = known_.disc_cells(o.center, o.radius);
            for (const Cell c : cells) known_.set_occupied(c, true);
            clearance_.add_occupied(cells);
            grid_dirty_ = true;
        }
    }
}

bool NavSimulator::replan() {
    grid_dirty_ = false;
    ++replans_;
    PlanResult r = plan_path(known_, clearance_, robot_.position, world_.goal, cfg_.inflation_radius,
                             PlanOptions{true});
    if (r.status != PlanStatus::ok) return false;
    path_ = std::move(r.path);
    progress_ = 0.0;
    return true;
}

bool NavSimulator::collides() const {
    const double fp = params_.safety.footprint_radius;
    for (const Cell c : physical_.disc_cells(robot_.position, fp)) {
        if (physical_.occupied(c)) return true;
    }
    // The map border counts as a wall.
    const Vec2 lo = physical_.origin();
    const Vec2 hi = lo + Vec2{physical_.width() * physical_.resolution(), physical_.height() * physical_.resolution()};
    const Vec2 p = robot_.position;
    return p.x < lo.x || p.y < lo.y || p.x >= hi.x || p.y >= hi.y;
}

StepResult NavSimulator::step() {
    StepResult out;
    if (outcome_ != MissionOutcome::running) return out;
    if (pending_cfg_) {
        // A new inflation radius re-inflates the costmap; the planner picks it
        // up at its next cycle.
        if (pending_cfg_->inflation_radius != cfg_.inflation_radius) grid_dirty_ = true;
        cfg_ = *pending_cfg_;
        pending_cfg_.reset();
    }

    const double dt = params_.dt;
    const long planner_steps = std::max(1L, std::lround(1.0 / (cfg_.planner_frequency * dt)));
    const long observer_steps = std::max(1L, std::lround(1.0 / (params_.observer_rate * dt)));

    spawn_and_sense();
    if (step_index_ % planner_steps == 0 && grid_dirty_ && !replan()) {
        outcome_ = MissionOutcome::no_path;
        return out;
    }

    const ControlOutput u = control(robot_, path_, cfg_, dt, progress_, params_.control);
    progress_ = u.progress;
    robot_.accel = u.commanded_accel;
    robot_.speed = u.commanded_speed;
    robot_.position = robot_.position + Vec2{std::cos(robot_.heading), std::sin(robot_.heading)} * (robot_.speed * dt);
    robot_.heading = wrap_angle(robot_.heading + u.turn_rate * dt);
    clock_ += dt;
    ++step_index_;

    out.safety = observe_safety(known_, robot_, cfg_, params_.safety);
    out.energy = observe_energy(robot_, cfg_, power_increase_now(), params_.power);
    if (step_index_ % observer_steps == 0) {
        out.diagnostics.push_back(qa_reading(clock_, "safety", out.safety));
        out.diagnostics.push_back(qa_reading(clock_, "energy", out.energy));
    }

    if (collides()) {
        outcome_ = MissionOutcome::collision;
    } else if (distance(robot_.position, world_.goal) <= params_.control.goal_tolerance) {
        outcome_ = MissionOutcome::complete;
    }
    return out;
}

void NavSimulator::apply_configuration(std::string_view design_name) {
    const auto p = decode_nav_design(design_name);
    if (!p) throw Error(ErrorCode::unknown_design, "not a navigation design: " + std::string(design_name));
    NavConfig next = NavConfig::from(*p);
    next.controller_frequency = cfg_.controller_frequency;
    next.planner_frequency = cfg_.planner_frequency;
    pending_cfg_ = next;
}

}  // namespace metactl::nav
