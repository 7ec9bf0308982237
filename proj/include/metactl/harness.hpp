#pragma once

// Experiment harness: the seven initial configurations, lockstep missions with
// and without the adaptation loop, the base-vs-mros matrix, its summaries and
// the pyramid failure scenarios.

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "metactl/mapek.hpp"
#include "metactl/nav_sim.hpp"
#include "metactl/tomasys.hpp"

namespace metactl::harness {

struct InitialConfig {
    std::string id;                     // C1..C7
    double controller_frequency = 20.0; // as listed; the simulator runs at 20 Hz
    NavDesignParams params;
};

/// C1..C7. C6 is repaired to (cf 25, v 0.5, r 0.8); C4 and C5 are identical
/// as listed. accel_lim is not listed and is fixed at 6.
const std::vector<InitialConfig>& initial_configs();
const InitialConfig* find_config(std::string_view id);
extern const std::vector<std::string> kSummaryNotes;

enum class Mode { base, mros };
std::string_view to_string(Mode m);
std::optional<Mode> mode_from_string(std::string_view s);

struct TestCase {
    std::string config = "C4";
    nav::ContingencySpec contingency;
    Mode mode = Mode::base;
    std::uint64_t seed = 1;
};

struct MissionMetrics {
    nav::MissionOutcome outcome = nav::MissionOutcome::running;
    double mission_time = 0.0;   // s
    double t_safety_viol = 0.0;  // s with safety below its threshold
    double t_energy_viol = 0.0;  // s with energy above its threshold
    int reconfig_count = 0;
    std::vector<ReconfigurationCommand> commands;
};

/// Everything a mission needs besides the test case.
struct Environment {
    ArchitectureModel nav_model;
    nav::NavWorldSetup world;
    nav::SimParams sim;
    LoopConfig loop;
    double timeout = 600.0;       // s simulated
    double safety_threshold = 0.4;
    double energy_threshold = 0.7;
};

/// Generated 27-design navigation model plus `factory.grid` from `models_dir`.
Environment default_environment(const std::string& models_dir);

/// Optional per-mission logs; null streams are skipped.
struct MissionLogs {
    std::ostream* diagnostics = nullptr;  // JSONL
    std::ostream* commands = nullptr;     // JSONL
    std::ostream* trajectory = nullptr;   // CSV t,x,y,v,safety,energy,design
};

/// Steps the simulator at dt and, in mros mode, ticks the adaptation loop at
/// every multiple of the loop period, all on the calling thread.
MissionMetrics run_mission(const Environment& env, const TestCase& tc, const MissionLogs& logs = {});

// ---------------------------------------------------------------------------
// Matrix

struct MatrixSpec {
    std::vector<std::string> configs = {"C1", "C2", "C3", "C4", "C5", "C6", "C7"};
    std::vector<nav::Clutter> clutter = {nav::Clutter::none, nav::Clutter::low, nav::Clutter::medium,
                                         nav::Clutter::high};
    std::vector<int> power_percent = {10, 30, 50};
    int seeds = 1;
    std::uint64_t first_seed = 1;
    std::vector<Mode> modes = {Mode::base, Mode::mros};
};

extern const char* const kCsvHeader;

std::vector<TestCase> expand(const MatrixSpec& spec);
std::string csv_row(const TestCase& tc, const MissionMetrics& m);
/// `config,clutter,power,seed,mode` of a test case or of a CSV row.
std::string row_key(const TestCase& tc);
std::string row_key(std::string_view csv_line);

struct MatrixRunStats {
    int executed = 0;
    int skipped = 0;
};

/// Runs every case of `spec` whose key is not in `done`, appending rows to
/// `out` in case order. Workers run cases in parallel; writes are serialized.
MatrixRunStats run_matrix(const Environment& env, const MatrixSpec& spec, std::ostream& out,
                          const std::set<std::string>& done = {}, unsigned workers = 0);

/// Appends to `csv_path`, writing the header if the file is new and skipping
/// cases already present.
MatrixRunStats run_matrix_file(const Environment& env, const MatrixSpec& spec, const std::string& csv_path,
                               unsigned workers = 0);

// ---------------------------------------------------------------------------
// Summaries

struct CsvRow {
    std::string config;
    std::string clutter;
    int power = 0;
    std::uint64_t seed = 0;
    Mode mode = Mode::base;
    nav::MissionOutcome outcome = nav::MissionOutcome::complete;
    double mission_time = 0.0;
    double t_safety_viol = 0.0;
    double t_energy_viol = 0.0;
    int reconfig_count = 0;
};

/// Throws `MALFORMED_CSV` on a bad header, a bad row or no rows at all.
std::vector<CsvRow> read_csv(std::istream& in);

/// Mean of one metric per group and mode.
struct SummaryTable {
    std::string name;    // file stem of the plot data
    std::string title;
    std::string group;   // column header of the grouping key
    std::vector<std::string> keys;
    std::map<std::string, std::map<Mode, double>> mean;
    std::map<std::string, std::map<Mode, int>> count;
};

struct Summary {
    SummaryTable safety;        // t_safety_viol by clutter
    SummaryTable energy;        // t_energy_viol by power
    SummaryTable mission_time;  // mission_time by config
    std::map<Mode, double> overall_mission_time;
    std::map<Mode, int> incomplete;
};

Summary summarize(const std::vector<CsvRow>& rows);
std::string format_summary(const Summary& s);
/// One CSV per table (`<name>.csv`) in `dir`; returns the paths written.
std::vector<std::string> write_plot_data(const Summary& s, const std::string& dir);

// ---------------------------------------------------------------------------
// Pyramid scenarios

struct ScenarioReport {
    std::string name;
    bool passed = false;
    std::string detail;
    std::vector<ReconfigurationCommand> commands;
    std::vector<std::string> unresolvable;
};

struct PyramidReport {
    std::vector<ScenarioReport> scenarios;
    bool passed() const;
};

/// Tag-detector failure at t=2, right-arm failure at t=5, and both arms
/// failing, each against a fresh knowledge base over `model`.
PyramidReport run_pyramid_scenarios(const ArchitectureModel& model);
std::string format_report(const PyramidReport& r);

}  // namespace metactl::harness
