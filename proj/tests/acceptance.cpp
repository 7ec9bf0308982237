// Acceptance gate: runs every acceptance criterion at its stated tolerance and
// prints one PASS/FAIL line per criterion. Exit status is the number of
// failed criteria.

#include <chrono>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>

#include "metactl/harness.hpp"
#include "metactl/model_dsl.hpp"
#include "metactl/numeric_format.hpp"
#include "metactl/reasoner.hpp"
#include "support.hpp"

using namespace metactl;
using namespace metactl::harness;

namespace {

struct Outcome {
    bool ok = false;
    std::string detail;
};

struct Criterion {
    int id;
    std::string name;
    double budget_s;
    std::function<Outcome()> run;
};

const Environment& env() {
    static const Environment e = default_environment(testsupport::models_dir());
    return e;
}

std::string fixed(double v, int digits = 2) { return format_fixed(v, digits); }

Summary run_and_summarize(const MatrixSpec& spec, std::vector<CsvRow>* rows_out = nullptr) {
    std::ostringstream csv;
    csv << kCsvHeader << '\n';
    run_matrix(env(), spec, csv);
    std::istringstream in(csv.str());
    auto rows = read_csv(in);
    if (rows_out) *rows_out = rows;
    return summarize(rows);
}

// 1 -----------------------------------------------------------------------

Outcome reasoner_oracle() {
    std::mt19937_64 rng(20240601);
    int mismatches = 0, derived_total = 0;
    for (int model_i = 0; model_i < 100; ++model_i) {
        const auto m = testsupport::random_model(rng);
        KnowledgeBase kb(m, testsupport::random_groundings(m, rng));
        testsupport::inject_random_facts(kb, rng);
        const std::set<Fact> oracle = testsupport::oracle_closure(kb);
        std::array<RuleId, 4> order{RuleId::R1, RuleId::R2, RuleId::R3, RuleId::R4};
        for (int k = 0; k < 10; ++k) {
            std::shuffle(order.begin(), order.end(), rng);
            InferenceOptions opts;
            opts.rule_order = order;
            opts.shuffle_seed = rng();
            const auto report = infer(kb, opts);
            if (kb.negative_facts() != oracle) ++mismatches;
            derived_total += static_cast<int>(report.derived.size());
        }
    }
    return {mismatches == 0, "100 models x 10 orderings, " + std::to_string(mismatches) + " mismatches, " +
                                 std::to_string(derived_total) + " derived facts checked"};
}

// 2 -----------------------------------------------------------------------

Outcome planner_oracle() {
    std::mt19937_64 rng(7031);
    const auto model = generate_nav_model(NavParameterSpace::standard());
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int mismatches = 0, selected = 0;
    for (int i = 0; i < 200; ++i) {
        KnowledgeBase kb(model, {{"o_nav", model.designs[rng() % model.designs.size()].name}});
        if (rng() % 4) kb.assert_measurement({"safety", std::round(unit(rng) * 1000) / 1000, 1.0});
        if (rng() % 4) kb.assert_measurement({"energy", std::round(unit(rng) * 1000) / 1000, 1.0});
        if (rng() % 10 == 0) kb.assert_fact(component_error("nav_stack"));
        for (const auto& c : model.components) {
            if (c.name != "nav_stack" && rng() % 5 == 0) kb.assert_fact(component_error(c.name));
        }
        infer(kb);
        const auto got = plan(kb, "o_nav");
        if (got != testsupport::oracle_plan(kb, "o_nav")) ++mismatches;
        selected += got.has_value();
    }
    return {mismatches == 0, "200 states, " + std::to_string(mismatches) + " mismatches (" +
                                 std::to_string(selected) + " with a selected design)"};
}

// 3 -----------------------------------------------------------------------

Outcome pyramid() {
    const auto parsed = parse_model_file(testsupport::models_dir() + "/pyramid.archmodel");
    if (!parsed.ok()) return {false, "pyramid model does not parse"};
    const PyramidReport r = run_pyramid_scenarios(*parsed.model);
    bool ok = r.passed() && r.scenarios.size() == 3;
    if (ok) {
        const auto& s1 = r.scenarios[0];
        const auto& s2 = r.scenarios[1];
        const auto& s3 = r.scenarios[2];
        ok = s1.commands.size() == 1 && s1.commands[0].to_design() == "tag_detect_lowlight" &&
             s1.commands[0].timestamp() == 2.0 && s2.commands.size() == 1 &&
             s2.commands[0].to_design() == "single_arm_with_move" && s2.commands[0].timestamp() == 5.0 &&
             s3.commands.empty() && s3.unresolvable == std::vector<std::string>{"o_build"};
    }
    std::string detail;
    for (const auto& s : r.scenarios) {
        detail += (detail.empty() ? "" : "; ") + s.name + ": " + std::to_string(s.commands.size()) + " command(s)";
        if (!s.commands.empty()) detail += " -> " + s.commands.back().to_design();
        if (!s.unresolvable.empty()) detail += ", unresolvable";
    }
    return {ok, detail};
}

// 4 -----------------------------------------------------------------------

Outcome safety_management() {
    MatrixSpec spec;
    spec.power_percent = {10};
    spec.seeds = 10;
    const Summary s = run_and_summarize(spec);
    bool ok = true;
    std::string detail;
    for (const auto& level : s.safety.keys) {
        const double b = s.safety.mean.at(level).at(Mode::base);
        const double m = s.safety.mean.at(level).at(Mode::mros);
        ok = ok && m < b;
        detail += level + " " + fixed(b) + "/" + fixed(m) + " ";
    }
    const double hb = s.safety.mean.at("high").at(Mode::base);
    const double hm = s.safety.mean.at("high").at(Mode::mros);
    ok = ok && hm <= 0.5 * hb;
    detail += "(base/mros s); high ratio " + fixed(hb > 0 ? hm / hb : 0.0, 3);
    return {ok, detail};
}

// 5 -----------------------------------------------------------------------

Outcome energy_management() {
    MatrixSpec spec;
    spec.clutter = {nav::Clutter::none};
    spec.seeds = 10;
    const Summary s = run_and_summarize(spec);
    bool ok = true;
    std::string detail;
    for (const char* level : {"10", "30", "50"}) {
        const double b = s.energy.mean.at(level).at(Mode::base);
        const double m = s.energy.mean.at(level).at(Mode::mros);
        ok = ok && m <= b;
        detail += std::string(level) + "% " + fixed(b) + "/" + fixed(m) + " ";
    }
    const double b50 = s.energy.mean.at("50").at(Mode::base);
    const double m50 = s.energy.mean.at("50").at(Mode::mros);
    ok = ok && m50 <= 0.5 * b50;
    detail += "(base/mros s); 50% ratio " + fixed(b50 > 0 ? m50 / b50 : 0.0, 3);
    return {ok, detail};
}

// 6 -----------------------------------------------------------------------

Outcome mission_time_overhead() {
    std::vector<CsvRow> rows;
    const Summary s = run_and_summarize(MatrixSpec{}, &rows);
    const double b = s.overall_mission_time.at(Mode::base);
    const double m = s.overall_mission_time.at(Mode::mros);
    const int incomplete = s.incomplete.at(Mode::base) + s.incomplete.at(Mode::mros);
    const bool ok = rows.size() == 168 && incomplete == 0 && m <= 1.20 * b;
    return {ok, std::to_string(rows.size()) + " runs, base " + fixed(b) + " s, mros " + fixed(m) + " s, ratio " +
                    fixed(m / b, 3) + ", " + std::to_string(incomplete) + " incomplete"};
}

// 7 -----------------------------------------------------------------------

Outcome determinism() {
    MatrixSpec spec;
    spec.configs = {"C2", "C6"};
    spec.clutter = {nav::Clutter::medium, nav::Clutter::high};
    spec.power_percent = {30, 50};
    spec.first_seed = 17;
    std::ostringstream a, b, c;
    run_matrix(env(), spec, a, {}, 1);
    run_matrix(env(), spec, b, {}, 1);
    run_matrix(env(), spec, c, {}, 4);
    int identical = 0;
    for (const auto& tc : expand(spec)) identical += csv_row(tc, run_mission(env(), tc)) == csv_row(tc, run_mission(env(), tc));
    const bool ok = a.str() == b.str() && a.str() == c.str() && identical == static_cast<int>(expand(spec).size());
    return {ok, std::to_string(expand(spec).size()) + " cells rerun, " + std::to_string(identical) +
                    " identical; sequential and parallel matrices " + (a.str() == c.str() ? "match" : "differ")};
}

// 8 -----------------------------------------------------------------------

Outcome model_tooling() {
    std::vector<std::string> problems;
    for (const char* file : {"pyramid.archmodel", "navigation.archmodel"}) {
        const auto parsed = parse_model_file(testsupport::models_dir() + "/" + file);
        if (!parsed.ok()) {
            problems.push_back(std::string(file) + " does not parse");
            continue;
        }
        const std::string once = print_model(*parsed.model);
        const auto again = parse_model(once);
        if (!again.ok() || !(*again.model == *parsed.model) || print_model(*again.model) != once) {
            problems.push_back(std::string(file) + " round trip");
        }
    }

    const auto space = NavParameterSpace::standard();
    const auto nav = generate_nav_model(space);
    if (nav.designs.size() != 27) problems.push_back("generator produced " + std::to_string(nav.designs.size()));
    auto est = [&](double v, double a, double r, const char* qa) {
        return *nav.find_design(nav_design_name({v, a, r}))->estimate(qa);
    };
    for (double v : space.max_vel) {
        for (double a : space.accel_lim) {
            for (double r : space.inflation_radius) {
                for (double r2 : space.inflation_radius) {
                    if (r2 > r && est(v, a, r2, "safety") < est(v, a, r, "safety")) problems.push_back("safety in r");
                }
                for (double v2 : space.max_vel) {
                    if (v2 > v && est(v2, a, r, "safety") > est(v, a, r, "safety")) problems.push_back("safety in v");
                    if (v2 > v && est(v2, a, r, "energy") < est(v, a, r, "energy")) problems.push_back("energy in v");
                }
            }
        }
    }

    const auto fixture = parse_model_file(testsupport::fixtures_dir() + "/unsatisfiable.archmodel");
    bool flagged = false;
    for (const auto& d : fixture.diagnostics) {
        flagged |= d.severity == Severity::warning && d.message.find("statically unsatisfiable NFR") != std::string::npos;
    }
    if (!flagged) problems.push_back("unsatisfiable fixture not flagged");

    std::string detail = "2 shipped models round-trip, 27 designs monotone, fixture flagged";
    if (!problems.empty()) {
        detail = "";
        for (const auto& p : problems) detail += (detail.empty() ? "" : "; ") + p;
    }
    return {problems.empty(), detail};
}

}  // namespace

int main() {
    const std::vector<Criterion> criteria = {
        {1, "reasoner confluence and oracle equivalence", 10, reasoner_oracle},
        {2, "planner oracle equivalence", 5, planner_oracle},
        {3, "pyramid scenarios", 5, pyramid},
        {4, "safety management", 180, safety_management},
        {5, "energy management", 180, energy_management},
        {6, "mission-time overhead", 600, mission_time_overhead},
        {7, "determinism", 60, determinism},
        {8, "model tooling", 5, model_tooling},
    };
    int failed = 0;
    for (const auto& c : criteria) {
        const auto t0 = std::chrono::steady_clock::now();
        Outcome o;
        try {
            o = c.run();
        } catch (const std::exception& e) {
            o = {false, std::string("exception: ") + e.what()};
        }
        const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
        const bool in_time = secs < c.budget_s;
        const bool pass = o.ok && in_time;
        failed += !pass;
        std::cout << (pass ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << o.detail << " ("
                  << fixed(secs) << " s of " << fixed(c.budget_s, 0) << " s" << (in_time ? "" : ", over budget")
                  << ")" << std::endl;
    }
    std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
    return failed;
}
