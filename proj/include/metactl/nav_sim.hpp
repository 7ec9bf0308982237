#pragma once

// Deterministic 2D kinematic simulation of the navigation case: occupancy grid
// world, grid path planning with obstacle inflation, pure-pursuit control,
// safety and energy observers, and contingency injection.

#include <cmath>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "metactl/mapek.hpp"
#include "metactl/nav_design.hpp"

namespace metactl::nav {

struct Vec2 {
    double x = 0.0;
    double y = 0.0;

    Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
    Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
    Vec2 operator*(double s) const { return {x * s, y * s}; }
    double norm() const { return std::hypot(x, y); }
    bool operator==(const Vec2&) const = default;
};

inline double distance(Vec2 a, Vec2 b) { return (a - b).norm(); }

/// Wraps an angle to (-pi, pi].
double wrap_angle(double a);

struct Cell {
    int x = 0;
    int y = 0;
    bool operator==(const Cell&) const = default;
};

// ---------------------------------------------------------------------------
// Grid

/// Row-major occupancy grid. Cell (0,0) covers [origin, origin + resolution).
///
/// Text format: header `width height resolution origin_x origin_y` (width and
/// height in cells), then `height` rows of `#` (occupied) / `.` (free). The
/// first row is the top of the map (largest y).
class OccupancyGrid {
public:
    OccupancyGrid() = default;
    OccupancyGrid(int width, int height, double resolution, Vec2 origin);

    int width() const noexcept { return width_; }
    int height() const noexcept { return height_; }
    double resolution() const noexcept { return resolution_; }
    Vec2 origin() const noexcept { return origin_; }

    bool in_bounds(Cell c) const { return c.x >= 0 && c.y >= 0 && c.x < width_ && c.y < height_; }
    /// Out-of-bounds cells count as occupied.
    bool occupied(Cell c) const { return !in_bounds(c) || cells_[index(c)] != 0; }
    void set_occupied(Cell c, bool occupied);
    /// Marks every cell whose center lies inside the axis-aligned box.
    void fill_box(Vec2 lo, Vec2 hi);
    /// Cells whose centers lie within `radius` of `center`.
    std::vector<Cell> disc_cells(Vec2 center, double radius) const;

    Cell cell_of(Vec2 p) const;
    Vec2 center_of(Cell c) const;
    std::size_t index(Cell c) const { return static_cast<std::size_t>(c.y) * width_ + c.x; }
    std::size_t occupied_count() const;

    static OccupancyGrid parse(std::istream& in);  // throws INVALID_ARGUMENT
    static OccupancyGrid load(const std::string& path);
    std::string to_text() const;

    bool operator==(const OccupancyGrid&) const = default;

private:
    int width_ = 0;
    int height_ = 0;
    double resolution_ = 0.1;
    Vec2 origin_;
    std::vector<std::uint8_t> cells_;
};

/// Distance from each cell center to the nearest occupied cell center, exact
/// up to `max_range` and saturated beyond it.
class ClearanceMap {
public:
    ClearanceMap(const OccupancyGrid& grid, double max_range);

    /// Incremental update after cells became occupied.
    void add_occupied(std::span<const Cell> cells);
    double at(Cell c) const;
    double max_range() const noexcept { return max_range_; }

private:
    int width_;
    int height_;
    double resolution_;
    double max_range_;
    int window_;
    std::vector<float> dist_;
};

// ---------------------------------------------------------------------------
// Planning

struct Path {
    std::vector<Vec2> points;

    double length() const;
    bool empty() const { return points.size() < 2; }
    /// Point at arc length `s` (clamped to the path).
    Vec2 point_at(double s) const;
};

enum class PlanStatus { ok, no_path };

struct PlanResult {
    PlanStatus status = PlanStatus::no_path;
    Path path;                // smoothed polyline from start to goal
    std::vector<Cell> cells;  // raw 8-connected cell path
    double grid_length = 0.0; // length of the raw cell path, m
};

struct PlanOptions {
    /// When the start lies inside the inflation zone, allow leaving it through
    /// inflated (never occupied) cells at a penalty instead of failing.
    bool allow_escape = false;
};

/// Shortest 8-connected path whose cells keep at least `inflation_radius`
/// clearance from occupied cells, then string-pulled into a polyline.
/// Diagonal moves may not cut the corner of a blocked cell.
PlanResult plan_path(const OccupancyGrid& grid, const ClearanceMap& clearance, Vec2 start, Vec2 goal,
                     double inflation_radius, const PlanOptions& options = {});
PlanResult plan_path(const OccupancyGrid& grid, Vec2 start, Vec2 goal, double inflation_radius);

// ---------------------------------------------------------------------------
// Control and observers

struct NavConfig {
    double max_vel = 0.5;
    double accel_lim = 6.0;
    double inflation_radius = 0.65;
    double controller_frequency = 20.0;
    double planner_frequency = 4.0;

    static NavConfig from(const NavDesignParams& p);
    NavDesignParams design_params() const { return {max_vel, accel_lim, inflation_radius}; }
    bool operator==(const NavConfig&) const = default;
};

struct RobotState {
    Vec2 position;
    double heading = 0.0;  // rad
    double speed = 0.0;    // m/s, never negative
    double accel = 0.0;    // m/s^2 realized over the last step
};

struct ControlParams {
    double lookahead = 0.5;       // m
    double max_turn_rate = 1.5;   // rad/s
    double goal_tolerance = 0.3;  // m
    double comfort_decel = 0.8;   // m/s^2, slowing down for anything but the goal
};

struct ControlOutput {
    double commanded_speed = 0.0;
    double commanded_accel = 0.0;
    double turn_rate = 0.0;
    double progress = 0.0;  // arc length of the robot's projection on the path
};

/// Pure pursuit toward the point `lookahead` ahead of the robot's projection on
/// the path. Speed tracks max_vel, scaled down by heading error and by the
/// distance left to the goal. Speed rises by at most accel_lim per second and
/// falls by at most comfort_decel, or accel_lim when braking for the goal.
/// `progress_hint` keeps the projection from jumping backwards.
ControlOutput control(const RobotState& robot, const Path& path, const NavConfig& cfg, double dt,
                      double progress_hint = 0.0, const ControlParams& params = {});

struct SafetyParams {
    double horizon = 1.0;           // s, reaction time in the stopping distance
    double half_angle = M_PI / 6;   // cone around the heading
    double footprint_radius = 0.4;  // m; distances are measured from the footprint edge
    double threshold = 0.4;         // QA value below which safety is violated
};

/// v*horizon + v^2 / (2*accel_lim)
double braking_distance(double speed, double accel_lim, double horizon = 1.0);

/// 1 when stationary or `clearance >= d_break`, else clearance / d_break.
double safety_value(double clearance, double speed, double accel_lim, double horizon = 1.0);

/// Distance from the footprint edge to the nearest occupied cell in the
/// direction of travel, or +inf when none lies within `range`. A cell is in
/// the direction of travel when it is ahead of the robot and its lateral offset
/// is at most footprint_radius + ahead * tan(half_angle): the footprint swept
/// forward, widening at the cone angle. Cells touching the footprint always count.
double obstacle_clearance(const OccupancyGrid& known, const RobotState& robot, double range,
                          const SafetyParams& params = {});

double observe_safety(const OccupancyGrid& known, const RobotState& robot, const NavConfig& cfg,
                      const SafetyParams& params = {});

double observe_energy(const RobotState& robot, const NavConfig& cfg, double power_increase,
                      const PowerModel& power = {});

// ---------------------------------------------------------------------------
// Simulation

enum class Clutter { none, low, medium, high };
std::string_view to_string(Clutter c);
std::optional<Clutter> clutter_from_string(std::string_view s);

struct ContingencySpec {
    Clutter clutter = Clutter::none;
    double power_increase = 0.0;  // fraction, e.g. 0.5 for +50%

    bool operator==(const ContingencySpec&) const = default;
};

struct UnexpectedObstacle {
    Vec2 center;
    double radius = 0.3;
    bool spawned = false;
    bool sensed = false;
    double spawn_time = -1.0;
};

struct SimParams {
    double dt = 0.05;                 // s
    double observer_rate = 10.0;      // Hz
    double sensor_radius = 3.0;       // m
    double spawn_distance = 4.0;      // m, obstacle appears when the robot is this close
    double obstacle_radius = 0.3;     // m
    double cluster_spacing = 1.5;     // m along the path between high-clutter obstacles
    double placement_jitter = 0.3;    // m along the path
    double lateral_jitter = 0.15;     // m across the path
    double power_onset_min = 2.0;     // s
    double power_onset_max = 10.0;    // s
    ControlParams control;
    SafetyParams safety;
    PowerModel power;
};

struct NavWorldSetup {
    OccupancyGrid grid;
    Vec2 start{-4.5, -7.0};
    Vec2 goal{8.5, 7.0};
};

enum class MissionOutcome { running, complete, collision, no_path, timeout };
std::string_view to_string(MissionOutcome o);
std::optional<MissionOutcome> outcome_from_string(std::string_view s);

struct StepResult {
    std::vector<Diagnostic> diagnostics;  // observer output emitted this step
    double safety = 1.0;
    double energy = 0.0;
};

class NavSimulator {
public:
    /// Plans the initial path and lays out the unexpected obstacles on it.
    /// A world with no initial path starts in the `no_path` outcome.
    NavSimulator(NavWorldSetup world, NavConfig cfg, ContingencySpec contingency, std::uint64_t seed,
                 SimParams params = {});

    /// Advances by one step of `params.dt`. No-op once the mission has ended.
    StepResult step();

    /// Swaps the configuration at the next control step; the path is kept.
    /// Throws `UNKNOWN_DESIGN` (configuration unchanged) for an undecodable name.
    void apply_configuration(std::string_view design_name);

    double clock() const noexcept { return clock_; }
    MissionOutcome outcome() const noexcept { return outcome_; }
    const RobotState& robot() const noexcept { return robot_; }
    const NavConfig& config() const noexcept { return pending_cfg_ ? *pending_cfg_ : cfg_; }
    const NavConfig& active_config() const noexcept { return cfg_; }
    const Path& path() const noexcept { return path_; }
    const Path& initial_path() const noexcept { return initial_path_; }
    const std::vector<UnexpectedObstacle>& obstacles() const noexcept { return obstacles_; }
    const OccupancyGrid& known_grid() const noexcept { return known_; }
    double power_increase_now() const;
    double power_onset() const noexcept { return power_onset_; }
    const SimParams& params() const noexcept { return params_; }
    int replans() const noexcept { return replans_; }

private:
    void place_obstacles(std::mt19937_64& rng);
    void spawn_and_sense();
    bool replan();
    bool collides() const;

    NavWorldSetup world_;
    NavConfig cfg_;
    std::optional<NavConfig> pending_cfg_;
    ContingencySpec contingency_;
    SimParams params_;

    OccupancyGrid known_;     // static map plus sensed obstacles
    OccupancyGrid physical_;  // static map plus spawned obstacles
    ClearanceMap clearance_;
    std::vector<UnexpectedObstacle> obstacles_;
    Path path_;
    Path initial_path_;
    double progress_ = 0.0;
    bool grid_dirty_ = false;

    RobotState robot_;
    double clock_ = 0.0;
    long step_index_ = 0;
    double power_onset_ = 0.0;
    MissionOutcome outcome_ = MissionOutcome::running;
    int replans_ = 0;
};

}  // namespace metactl::nav
