#include "metactl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <condition_variable>
#include <filesystem>
#include <fstream>
#include <mutex>
#include <sstream>
#include <thread>

#include "metactl/error.hpp"
#include "metactl/knowledge_base.hpp"
#include "metactl/model_dsl.hpp"
#include "metactl/numeric_format.hpp"
#include "metactl/reasoner.hpp"
#include "metactl/records.hpp"

namespace metactl::harness {

const std::vector<InitialConfig>& initial_configs() {
    static const std::vector<InitialConfig> configs = {
        {"C1", 15, {0.3, 6, 0.8}},  {"C2", 15, {0.75, 6, 0.5}}, {"C3", 20, {0.3, 6, 0.8}},
        {"C4", 20, {0.5, 6, 0.65}}, {"C5", 20, {0.5, 6, 0.65}}, {"C6", 25, {0.5, 6, 0.8}},
        {"C7", 25, {0.75, 6, 0.5}},
    };
    return configs;
}

const InitialConfig* find_config(std::string_view id) {
    for (const auto& c : initial_configs()) {
        if (c.id == id) return &c;
    }
    return nullptr;
}

const std::vector<std::string> kSummaryNotes = {
    "C6 is listed as (cf 25, max_vel 6, inflation 9); run as (cf 25, max_vel 0.5, inflation 0.8).",
    "C4 and C5 are identical as listed; both are run.",
};

std::string_view to_string(Mode m) { return m == Mode::base ? "base" : "mros"; }

std::optional<Mode> mode_from_string(std::string_view s) {
    if (s == "base") return Mode::base;
    if (s == "mros") return Mode::mros;
    return std::nullopt;
}

Environment default_environment(const std::string& models_dir) {
    Environment env;
    env.nav_model = generate_nav_model(NavParameterSpace::standard());
    env.world.grid = nav::OccupancyGrid::load((std::filesystem::path(models_dir) / "factory.grid").string());
    return env;
}

// ---------------------------------------------------------------------------
// Missions

namespace {

class SimExecutor final : public Executor {
public:
    explicit SimExecutor(nav::NavSimulator& sim) : sim_(sim) {}

    ExecutionResult apply(const ReconfigurationCommand& command) override {
        try {
            sim_.apply_configuration(command.to_design());
            return ExecutionResult::ack;
        } catch (const Error&) {
            return ExecutionResult::failure;
        }
    }

private:
    nav::NavSimulator& sim_;
};

}  // namespace

MissionMetrics run_mission(const Environment& env, const TestCase& tc, const MissionLogs& logs) {
    const InitialConfig* initial = find_config(tc.config);
    if (initial == nullptr) throw Error(ErrorCode::invalid_argument, "unknown initial configuration " + tc.config);

    nav::NavConfig cfg = nav::NavConfig::from(initial->params);
    nav::NavSimulator sim(env.world, cfg, tc.contingency, tc.seed, env.sim);
    SimExecutor executor(sim);

    std::optional<AdaptationLoop> loop;
    if (tc.mode == Mode::mros) {
        KnowledgeBase kb(env.nav_model, {{"o_nav", nav_design_name(initial->params)}}, 0.0);
        loop.emplace(std::move(kb), executor, env.loop);
    }

    const double dt = env.sim.dt;
    const long steps_per_tick = std::max(1L, std::lround(env.loop.period / dt));
    const long max_steps = std::lround(env.timeout / dt);

    MissionMetrics m;
    if (logs.trajectory) *logs.trajectory << "t,x,y,v,safety,energy,design\n";
    long steps = 0;
    while (sim.outcome() == nav::MissionOutcome::running && steps < max_steps) {
        const nav::StepResult r = sim.step();
        ++steps;
        if (r.safety < env.safety_threshold) m.t_safety_viol += dt;
        if (r.energy > env.energy_threshold) m.t_energy_viol += dt;

        if (logs.diagnostics) {
            for (const auto& d : r.diagnostics) *logs.diagnostics << to_record(d) << '\n';
        }
        if (logs.trajectory) {
            const auto& robot = sim.robot();
            *logs.trajectory << format_fixed(sim.clock(), 2) << ',' << format_fixed(robot.position.x, 4) << ','
                             << format_fixed(robot.position.y, 4) << ',' << format_fixed(robot.speed, 4) << ','
                             << format_fixed(r.safety, 4) << ',' << format_fixed(r.energy, 4) << ','
                             << nav_design_name(sim.active_config().design_params()) << '\n';
        }
        if (!loop) continue;
        loop->queue().push(r.diagnostics);
        if (steps % steps_per_tick == 0 && sim.outcome() == nav::MissionOutcome::running) {
            const double now = static_cast<double>(steps / steps_per_tick) * env.loop.period;
            LoopReport report = loop->tick(now);
            for (auto& c : report.commands) {
                if (logs.commands) *logs.commands << to_record(c) << '\n';
                m.commands.push_back(std::move(c));
            }
        }
    }
    m.outcome = sim.outcome() == nav::MissionOutcome::running ? nav::MissionOutcome::timeout : sim.outcome();
    m.mission_time = steps * dt;
    m.reconfig_count = static_cast<int>(m.commands.size());
    return m;
}

// ---------------------------------------------------------------------------
// Matrix

const char* const kCsvHeader =
    "config,clutter,power,seed,mode,outcome,mission_time,t_safety_viol,t_energy_viol,reconfig_count";

std::vector<TestCase> expand(const MatrixSpec& spec) {
    std::vector<TestCase> cases;
    for (const auto& config : spec.configs) {
        for (const auto clutter : spec.clutter) {
            for (const int power : spec.power_percent) {
                for (int i = 0; i < spec.seeds; ++i) {
                    for (const Mode mode : spec.modes) {
                        TestCase tc;
                        tc.config = config;
                        tc.contingency = {clutter, power / 100.0};
                        tc.mode = mode;
                        tc.seed = spec.first_seed + static_cast<std::uint64_t>(i);
                        cases.push_back(tc);
                    }
                }
            }
        }
    }
    return cases;
}

namespace {

int power_percent(const TestCase& tc) { return static_cast<int>(std::lround(tc.contingency.power_increase * 100.0)); }

std::vector<std::string> split(std::string_view line, char sep) {
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t pos = line.find(sep, start);
        out.emplace_back(line.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
        if (pos == std::string_view::npos) break;
        start = pos + 1;
    }
    return out;
}

}  // namespace

std::string row_key(const TestCase& tc) {
    return tc.config + ',' + std::string(nav::to_string(tc.contingency.clutter)) + ',' +
           std::to_string(power_percent(tc)) + ',' + std::to_string(tc.seed) + ',' + std::string(to_string(tc.mode));
}

std::string row_key(std::string_view csv_line) {
    const auto fields = split(csv_line, ',');
    if (fields.size() < 5) return {};
    return fields[0] + ',' + fields[1] + ',' + fields[2] + ',' + fields[3] + ',' + fields[4];
}

std::string csv_row(const TestCase& tc, const MissionMetrics& m) {
    return row_key(tc) + ',' + std::string(nav::to_string(m.outcome)) + ',' + format_fixed(m.mission_time, 2) + ',' +
           format_fixed(m.t_safety_viol, 2) + ',' + format_fixed(m.t_energy_viol, 2) + ',' +
           std::to_string(m.reconfig_count);
}

MatrixRunStats run_matrix(const Environment& env, const MatrixSpec& spec, std::ostream& out,
                          const std::set<std::string>& done, unsigned workers) {
    std::vector<TestCase> todo;
    MatrixRunStats stats;
    for (auto& tc : expand(spec)) {
        if (done.count(row_key(tc))) {
            ++stats.skipped;
        } else {
            todo.push_back(std::move(tc));
        }
    }
    if (workers == 0) workers = std::max(1u, std::thread::hardware_concurrency());
    workers = std::min<unsigned>(workers, std::max<std::size_t>(1, todo.size()));

    std::vector<std::optional<std::string>> rows(todo.size());
    std::atomic<std::size_t> next{0};
    std::mutex write_mutex;
    std::size_t flushed = 0;
    std::exception_ptr failure;

    auto work = [&] {
        while (true) {
            const std::size_t i = next.fetch_add(1);
            if (i >= todo.size()) return;
            std::string row;
            try {
                row = csv_row(todo[i], run_mission(env, todo[i]));
            } catch (...) {
                std::lock_guard lock(write_mutex);
                if (!failure) failure = std::current_exception();
                return;
            }
            std::lock_guard lock(write_mutex);
            rows[i] = std::move(row);
            while (flushed < rows.size() && rows[flushed]) {
                out << *rows[flushed] << '\n';
                rows[flushed].reset();
                ++flushed;
            }
            out.flush();
        }
    };
    if (workers <= 1) {
        work();
    } else {
        std::vector<std::jthread> pool;
        for (unsigned w = 0; w < workers; ++w) pool.emplace_back(work);
    }
    if (failure) std::rethrow_exception(failure);
    stats.executed = static_cast<int>(flushed);
    return stats;
}

MatrixRunStats run_matrix_file(const Environment& env, const MatrixSpec& spec, const std::string& csv_path,
                               unsigned workers) {
    std::set<std::string> done;
    bool need_header = true;
    bool need_newline = false;
    if (std::ifstream in(csv_path); in) {
        std::string line;
        bool first = true;
        while (std::getline(in, line)) {
            if (!line.empty() && line.back() == '\r') line.pop_back();
            if (line.empty()) continue;
            if (first) {
                if (line != kCsvHeader) {
                    throw Error(ErrorCode::malformed_csv, csv_path + ": unexpected header '" + line + "'");
                }
                need_header = false;
                first = false;
                continue;
            }
            if (split(line, ',').size() == 10) done.insert(row_key(line));
        }
        in.clear();
        in.seekg(0, std::ios::end);
        if (in.tellg() > 0) {
            in.seekg(-1, std::ios::end);
            need_newline = in.get() != '\n';
        }
    }
    std::ofstream out(csv_path, std::ios::app);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + csv_path);
    if (need_newline) out << '\n';
    if (need_header) out << kCsvHeader << '\n';
    return run_matrix(env, spec, out, done, workers);
}

// ---------------------------------------------------------------------------
// Summaries

std::vector<CsvRow> read_csv(std::istream& in) {
    std::string line;
    int line_no = 0;
    auto fail = [&](const std::string& why) {
        throw Error(ErrorCode::malformed_csv, "line " + std::to_string(line_no) + ": " + why);
    };
    bool header = false;
    std::vector<CsvRow> rows;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        if (!header) {
            if (line != kCsvHeader) fail("unexpected header");
            header = true;
            continue;
        }
        const auto f = split(line, ',');
        if (f.size() != 10) fail("expected 10 fields, got " + std::to_string(f.size()));
        CsvRow r;
        r.config = f[0];
        if (!nav::clutter_from_string(f[1])) fail("bad clutter '" + f[1] + "'");
        r.clutter = f[1];
        const auto power = parse_number(f[2]);
        const auto seed = parse_number(f[3]);
        const auto mode = mode_from_string(f[4]);
        const auto outcome = nav::outcome_from_string(f[5]);
        const auto mt = parse_number(f[6]);
        const auto ts = parse_number(f[7]);
        const auto te = parse_number(f[8]);
        const auto rc = parse_number(f[9]);
        if (!power || !seed || !mode || !outcome || !mt || !ts || !te || !rc) fail("bad field value");
        if (*mt < 0 || *ts < 0 || *te < 0 || *rc < 0 || *seed < 0) fail("negative metric");
        r.power = static_cast<int>(*power);
        r.seed = static_cast<std::uint64_t>(*seed);
        r.mode = *mode;
        r.outcome = *outcome;
        r.mission_time = *mt;
        r.t_safety_viol = *ts;
        r.t_energy_viol = *te;
        r.reconfig_count = static_cast<int>(*rc);
        rows.push_back(std::move(r));
    }
    if (!header) throw Error(ErrorCode::malformed_csv, "empty CSV");
    if (rows.empty()) throw Error(ErrorCode::malformed_csv, "no data rows");
    return rows;
}

namespace {

struct Accumulator {
    std::map<std::string, std::map<Mode, std::pair<double, int>>> sums;
    std::vector<std::string> order;

    void add(const std::string& key, Mode mode, double value) {
        if (!sums.count(key)) order.push_back(key);
        auto& s = sums[key][mode];
        s.first += value;
        ++s.second;
    }

    void fill(SummaryTable& t, const std::vector<std::string>& preferred) const {
        for (const auto& k : preferred) {
            if (sums.count(k)) t.keys.push_back(k);
        }
        for (const auto& k : order) {
            if (std::find(t.keys.begin(), t.keys.end(), k) == t.keys.end()) t.keys.push_back(k);
        }
        for (const auto& [key, modes] : sums) {
            for (const auto& [mode, s] : modes) {
                t.mean[key][mode] = s.first / s.second;
                t.count[key][mode] = s.second;
            }
        }
    }
};

}  // namespace

Summary summarize(const std::vector<CsvRow>& rows) {
    Summary s;
    s.safety = {"safety_by_clutter", "Mean time under the safety threshold (s)", "clutter", {}, {}, {}};
    s.energy = {"energy_by_power", "Mean time above the energy threshold (s)", "power_%", {}, {}, {}};
    s.mission_time = {"mission_time_by_config", "Mean mission time (s)", "config", {}, {}, {}};

    Accumulator safety, energy, mission;
    std::map<Mode, std::pair<double, int>> overall;
    for (const auto& r : rows) {
        safety.add(r.clutter, r.mode, r.t_safety_viol);
        energy.add(std::to_string(r.power), r.mode, r.t_energy_viol);
        mission.add(r.config, r.mode, r.mission_time);
        overall[r.mode].first += r.mission_time;
        ++overall[r.mode].second;
        s.incomplete[r.mode] += r.outcome != nav::MissionOutcome::complete;
    }
    safety.fill(s.safety, {"none", "low", "medium", "high"});
    std::vector<std::string> powers;
    for (const auto& [k, _] : energy.sums) powers.push_back(k);
    std::sort(powers.begin(), powers.end(), [](const std::string& a, const std::string& b) {
        return std::stoi(a) < std::stoi(b);
    });
    energy.fill(s.energy, powers);
    mission.fill(s.mission_time, {"C1", "C2", "C3", "C4", "C5", "C6", "C7"});
    for (const auto& [mode, sum] : overall) s.overall_mission_time[mode] = sum.first / sum.second;
    return s;
}

namespace {

std::string cell(const SummaryTable& t, const std::string& key, Mode mode) {
    auto it = t.mean.find(key);
    if (it == t.mean.end() || !it->second.count(mode)) return "-";
    return format_fixed(it->second.at(mode), 2);
}

std::string pad(std::string s, std::size_t width) {
    if (s.size() < width) s.insert(0, width - s.size(), ' ');
    return s;
}

}  // namespace

std::string format_summary(const Summary& s) {
    std::ostringstream out;
    for (const auto& note : kSummaryNotes) out << "# " << note << '\n';
    for (const SummaryTable* t : {&s.safety, &s.energy, &s.mission_time}) {
        out << '\n' << t->title << '\n';
        out << pad(t->group, 10) << pad("base", 10) << pad("mros", 10) << '\n';
        for (const auto& k : t->keys) {
            out << pad(k, 10) << pad(cell(*t, k, Mode::base), 10) << pad(cell(*t, k, Mode::mros), 10) << '\n';
        }
    }
    out << '\n' << pad("overall", 10);
    for (Mode m : {Mode::base, Mode::mros}) {
        auto it = s.overall_mission_time.find(m);
        out << pad(it == s.overall_mission_time.end() ? "-" : format_fixed(it->second, 2), 10);
    }
    out << '\n';
    for (Mode m : {Mode::base, Mode::mros}) {
        auto it = s.incomplete.find(m);
        if (it != s.incomplete.end() && it->second > 0) {
            out << to_string(m) << ": " << it->second << " run(s) did not complete\n";
        }
    }
    return out.str();
}

std::vector<std::string> write_plot_data(const Summary& s, const std::string& dir) {
    std::filesystem::create_directories(dir);
    std::vector<std::string> written;
    for (const SummaryTable* t : {&s.safety, &s.energy, &s.mission_time}) {
        const auto path = (std::filesystem::path(dir) / (t->name + ".csv")).string();
        std::ofstream out(path);
        if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + path);
        for (const auto& note : kSummaryNotes) out << "# " << note << '\n';
        out << t->group << ",base,mros\n";
        for (const auto& k : t->keys) out << k << ',' << cell(*t, k, Mode::base) << ',' << cell(*t, k, Mode::mros) << '\n';
        written.push_back(path);
    }
    return written;
}

// ---------------------------------------------------------------------------
// Pyramid scenarios

namespace {

class RecordingExecutor final : public Executor {
public:
    ExecutionResult apply(const ReconfigurationCommand&) override { return ExecutionResult::ack; }
};

struct Injection {
    double time;
    std::vector<std::string> failed_components;
};

/// Ticks once per second from t=1 to t=horizon, injecting the failures just
/// before the tick at their time.
ScenarioReport run_scenario(const ArchitectureModel& model, std::string name, const Injection& injection,
                            double horizon = 10.0) {
    ScenarioReport report;
    report.name = std::move(name);
    KnowledgeBase kb(model, {{"o_build", "dual_arm"}, {"o_detect_tag", "tag_detect_normal"}}, 0.0);
    RecordingExecutor executor;
    AdaptationLoop loop(std::move(kb), executor);
    std::vector<double> command_ticks;
    for (double t = 1.0; t <= horizon; t += 1.0) {
        if (t == injection.time) {
            for (const auto& c : injection.failed_components) loop.queue().push(component_status(t, c, false));
        }
        LoopReport r = loop.tick(t);
        for (auto& c : r.commands) {
            command_ticks.push_back(t);
            report.commands.push_back(std::move(c));
        }
        for (auto& o : r.unresolvable) {
            if (std::find(report.unresolvable.begin(), report.unresolvable.end(), o) == report.unresolvable.end()) {
                report.unresolvable.push_back(o);
            }
        }
        for (const auto& e : r.errors) report.detail += "error: " + e + "\n";
    }
    // Final analysis so objective status reflects the last executed command.
    infer(loop.knowledge());
    report.detail += "o_build " + std::string(to_string(objective_status(loop.knowledge(), "o_build"))) +
                     ", o_detect_tag " + std::string(to_string(objective_status(loop.knowledge(), "o_detect_tag")));
    if (!command_ticks.empty()) {
        report.detail += ", first command " + format_number(command_ticks.front() - injection.time) +
                         " s after injection";
    }
    return report;
}

bool single_command(const ScenarioReport& r, const std::string& objective, const std::string& to, double inject,
                    double period = 1.0) {
    return r.commands.size() == 1 && r.commands[0].objective() == objective && r.commands[0].to_design() == to &&
           r.commands[0].timestamp() >= inject && r.commands[0].timestamp() <= inject + period;
}

}  // namespace

bool PyramidReport::passed() const {
    return !scenarios.empty() &&
           std::all_of(scenarios.begin(), scenarios.end(), [](const ScenarioReport& s) { return s.passed; });
}

PyramidReport run_pyramid_scenarios(const ArchitectureModel& model) {
    PyramidReport report;

    ScenarioReport s1 = run_scenario(model, "scenario 1: tag not detected", {2.0, {"tag_detector_normal"}});
    s1.passed = single_command(s1, "o_detect_tag", "tag_detect_lowlight", 2.0) && s1.unresolvable.empty() &&
                s1.detail.find("o_detect_tag ok") != std::string::npos;
    report.scenarios.push_back(std::move(s1));

    ScenarioReport s2 = run_scenario(model, "scenario 2: single arm", {5.0, {"arm_right"}});
    s2.passed = single_command(s2, "o_build", "single_arm_with_move", 5.0) && s2.unresolvable.empty() &&
                s2.detail.find("o_build ok") != std::string::npos;
    report.scenarios.push_back(std::move(s2));

    ScenarioReport s3 = run_scenario(model, "both arms failed", {5.0, {"arm_left", "arm_right"}});
    s3.passed = s3.commands.empty() &&
                std::find(s3.unresolvable.begin(), s3.unresolvable.end(), "o_build") != s3.unresolvable.end();
    report.scenarios.push_back(std::move(s3));
    return report;
}

std::string format_report(const PyramidReport& r) {
    std::ostringstream out;
    for (const auto& s : r.scenarios) {
        out << (s.passed ? "PASS " : "FAIL ") << s.name << '\n';
        for (const auto& c : s.commands) out << "  command " << to_record(c) << '\n';
        for (const auto& o : s.unresolvable) out << "  unresolvable " << o << '\n';
        out << "  " << s.detail << '\n';
    }
    return out.str();
}

}  // namespace metactl::harness
