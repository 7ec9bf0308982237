// metactl: command-line front end for models, missions, experiments and
// knowledge-base snapshots.

#include <CLI11.hpp>

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "metactl/error.hpp"
#include "metactl/harness.hpp"
#include "metactl/knowledge_base.hpp"
#include "metactl/model_dsl.hpp"
#include "metactl/numeric_format.hpp"
#include "metactl/reasoner.hpp"
#include "metactl/records.hpp"

#ifndef METACTL_MODELS_DIR
#define METACTL_MODELS_DIR "models"
#endif

namespace fs = std::filesystem;
using namespace metactl;

namespace {

constexpr int kOk = 0;
constexpr int kFailure = 1;
constexpr int kUsage = 2;

void print_diagnostics(const std::string& file, const std::vector<ParseDiagnostic>& diags) {
    for (const auto& d : diags) std::cout << file << ':' << to_string(d) << '\n';
}

int cmd_validate(const std::string& file, bool werror) {
    const ParseResult r = parse_model_file(file);
    print_diagnostics(file, r.diagnostics);
    if (!r.ok() || has_errors(r.diagnostics)) return kFailure;
    const bool warned = !r.diagnostics.empty();
    if (!warned) {
        std::cout << file << ": ok (" << r.model->designs.size() << " designs, " << r.model->objectives.size()
                  << " objectives)\n";
    }
    return warned && werror ? kFailure : kOk;
}

int cmd_generate(const std::string& out_path) {
    const std::string text = print_model(generate_nav_model(NavParameterSpace::standard()));
    if (out_path.empty()) {
        std::cout << text;
        return kOk;
    }
    std::ofstream out(out_path);
    if (!out) throw Error(ErrorCode::invalid_argument, "cannot write " + out_path);
    out << text;
    return kOk;
}

struct MissionArgs {
    std::string config = "C4";
    std::string clutter = "none";
    int power = 0;
    std::string mode = "base";
    std::uint64_t seed = 1;
    std::string log_dir;
};

int cmd_mission(const std::string& models, const MissionArgs& a) {
    harness::TestCase tc;
    tc.config = a.config;
    tc.contingency = {*nav::clutter_from_string(a.clutter), a.power / 100.0};
    tc.mode = *harness::mode_from_string(a.mode);
    tc.seed = a.seed;
    const harness::Environment env = harness::default_environment(models);

    std::ofstream diag, cmds, traj;
    harness::MissionLogs logs;
    if (!a.log_dir.empty()) {
        fs::create_directories(a.log_dir);
        diag.open(fs::path(a.log_dir) / "diagnostics.jsonl");
        cmds.open(fs::path(a.log_dir) / "commands.jsonl");
        traj.open(fs::path(a.log_dir) / "trajectory.csv");
        logs = {&diag, &cmds, &traj};
    }
    const harness::MissionMetrics m = harness::run_mission(env, tc, logs);
    std::cout << "outcome         " << nav::to_string(m.outcome) << '\n'
              << "mission_time    " << format_fixed(m.mission_time, 2) << " s\n"
              << "t_safety_viol   " << format_fixed(m.t_safety_viol, 2) << " s\n"
              << "t_energy_viol   " << format_fixed(m.t_energy_viol, 2) << " s\n"
              << "reconfig_count  " << m.reconfig_count << '\n';
    for (const auto& c : m.commands) std::cout << "  " << to_record(c) << '\n';
    return kOk;
}

struct MatrixArgs {
    int seeds = 1;
    std::uint64_t first_seed = 1;
    std::string out = "runs.csv";
    std::vector<std::string> configs;
    std::vector<std::string> clutter;
    std::vector<int> power;
    std::vector<std::string> modes;
    unsigned workers = 0;
};

int cmd_matrix(const std::string& models, const MatrixArgs& a) {
    harness::MatrixSpec spec;
    spec.seeds = a.seeds;
    spec.first_seed = a.first_seed;
    if (!a.configs.empty()) spec.configs = a.configs;
    if (!a.clutter.empty()) {
        spec.clutter.clear();
        for (const auto& c : a.clutter) spec.clutter.push_back(*nav::clutter_from_string(c));
    }
    if (!a.power.empty()) spec.power_percent = a.power;
    if (!a.modes.empty()) {
        spec.modes.clear();
        for (const auto& m : a.modes) spec.modes.push_back(*harness::mode_from_string(m));
    }
    const harness::Environment env = harness::default_environment(models);
    const auto stats = harness::run_matrix_file(env, spec, a.out, a.workers);
    std::cout << a.out << ": " << stats.executed << " row(s) written, " << stats.skipped << " already present\n";
    return kOk;
}

int cmd_summarize(const std::string& csv, const std::string& plot_dir) {
    std::ifstream in(csv);
    if (!in) throw Error(ErrorCode::invalid_argument, "cannot open " + csv);
    const harness::Summary s = harness::summarize(harness::read_csv(in));
    std::cout << harness::format_summary(s);
    if (!plot_dir.empty()) {
        for (const auto& p : harness::write_plot_data(s, plot_dir)) std::cout << "wrote " << p << '\n';
    }
    return kOk;
}

ArchitectureModel load_model(const std::string& path) {
    const ParseResult r = parse_model_file(path);
    if (!r.ok() || has_errors(r.diagnostics)) {
        print_diagnostics(path, r.diagnostics);
        throw Error(ErrorCode::invalid_argument, "model " + path + " is invalid");
    }
    return *r.model;
}

int cmd_pyramid(const std::string& model_path) {
    const harness::PyramidReport report = harness::run_pyramid_scenarios(load_model(model_path));
    std::cout << harness::format_report(report);
    return report.passed() ? kOk : kFailure;
}

int cmd_reason(const std::string& snapshot_path) {
    std::ifstream in(snapshot_path);
    if (!in) throw Error(ErrorCode::invalid_argument, "cannot open " + snapshot_path);
    const KbSnapshot snap = read_snapshot(in);
    fs::path model_path(snap.model_path);
    if (model_path.is_relative()) model_path = fs::path(snapshot_path).parent_path() / model_path;

    KnowledgeBase kb(load_model(model_path.string()), snap.groundings, 0.0);
    for (const auto& d : snap.diagnostics) {
        if (const auto* c = std::get_if<ComponentStatusReport>(&d.payload)) {
            kb.record_component_status(c->name, c->ok);
        } else {
            const auto& q = std::get<QAReading>(d.payload);
            kb.assert_measurement({q.qa_type, q.value, d.timestamp});
        }
    }
    const InferenceReport report = infer(kb);
    std::cout << "iterations " << report.iterations << '\n';
    std::cout << format_trace(report);
    std::cout << "derived";
    for (const auto& f : report.derived) std::cout << ' ' << to_string(f);
    std::cout << '\n';
    for (const auto& o : kb.model().objectives) {
        std::cout << "objective " << o.id << ' ' << to_string(objective_status(kb, o.id)) << '\n';
    }
    return kOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Metacontrol for a simulated mobile robot"};
    app.require_subcommand(1);
    std::string models = METACTL_MODELS_DIR;
    app.add_option("--models", models, "Directory with factory.grid and the example models")->check(CLI::ExistingDirectory);

    std::string validate_file;
    bool werror = false;
    auto* validate_cmd = app.add_subcommand("validate", "Parse and check an .archmodel file");
    validate_cmd->add_option("file", validate_file)->required();
    validate_cmd->add_flag("--werror", werror, "Treat warnings as failures");

    std::string gen_out;
    auto* gen_cmd = app.add_subcommand("generate-nav-model", "Print the 27-design navigation model");
    gen_cmd->add_option("--out", gen_out, "Write to a file instead of stdout");

    MissionArgs mission;
    auto* mission_cmd = app.add_subcommand("mission", "Run one navigation mission");
    mission_cmd->add_option("--config", mission.config)->check(CLI::IsMember({"C1", "C2", "C3", "C4", "C5", "C6", "C7"}));
    mission_cmd->add_option("--clutter", mission.clutter)->check(CLI::IsMember({"none", "low", "medium", "high"}));
    mission_cmd->add_option("--power", mission.power, "Power increase in percent")->check(CLI::Range(0, 100));
    mission_cmd->add_option("--mode", mission.mode)->check(CLI::IsMember({"base", "mros"}));
    mission_cmd->add_option("--seed", mission.seed)->envname("METACTL_SEED");
    mission_cmd->add_option("--log-dir", mission.log_dir, "Write diagnostics, commands and trajectory here");

    MatrixArgs matrix;
    auto* matrix_cmd = app.add_subcommand("matrix", "Run the base vs mros experiment matrix");
    matrix_cmd->add_option("--seeds", matrix.seeds, "Seeds per cell")->check(CLI::PositiveNumber);
    matrix_cmd->add_option("--first-seed", matrix.first_seed)->envname("METACTL_SEED");
    matrix_cmd->add_option("--out", matrix.out, "CSV file, appended and resumed");
    matrix_cmd->add_option("--configs", matrix.configs)->check(CLI::IsMember({"C1", "C2", "C3", "C4", "C5", "C6", "C7"}));
    matrix_cmd->add_option("--clutter", matrix.clutter)->check(CLI::IsMember({"none", "low", "medium", "high"}));
    matrix_cmd->add_option("--power", matrix.power)->check(CLI::Range(0, 100));
    matrix_cmd->add_option("--modes", matrix.modes)->check(CLI::IsMember({"base", "mros"}));
    matrix_cmd->add_option("--workers", matrix.workers, "Parallel workers (default: one per core)");

    std::string summarize_csv, plot_dir;
    auto* summarize_cmd = app.add_subcommand("summarize", "Aggregate a matrix CSV");
    summarize_cmd->add_option("csv", summarize_csv)->required();
    summarize_cmd->add_option("--plot-dir", plot_dir, "Write one CSV per table here");

    std::string pyramid_model;
    auto* pyramid_cmd = app.add_subcommand("pyramid", "Run the manipulator failure scenarios");
    pyramid_cmd->add_option("--model", pyramid_model, "Defaults to pyramid.archmodel in the models directory");

    std::string snapshot;
    auto* reason_cmd = app.add_subcommand("reason", "Run the reasoner on a knowledge-base snapshot");
    reason_cmd->add_option("snapshot", snapshot)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        app.exit(e);
        return kUsage;
    }

    try {
        if (*validate_cmd) return cmd_validate(validate_file, werror);
        if (*gen_cmd) return cmd_generate(gen_out);
        if (*mission_cmd) return cmd_mission(models, mission);
        if (*matrix_cmd) return cmd_matrix(models, matrix);
        if (*summarize_cmd) return cmd_summarize(summarize_csv, plot_dir);
        if (*pyramid_cmd) {
            return cmd_pyramid(pyramid_model.empty() ? (fs::path(models) / "pyramid.archmodel").string() : pyramid_model);
        }
        if (*reason_cmd) return cmd_reason(snapshot);
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kFailure;
    }
    return kUsage;
}
