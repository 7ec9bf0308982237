#include <doctest.h>

#include <random>

#include "metactl/error.hpp"
#include "metactl/model_dsl.hpp"
#include "metactl/nav_design.hpp"
#include "support.hpp"

using namespace metactl;

namespace {

const char* kMinimal = R"(system tiny {
  qa_type safety higher_better;
  component base;
  function f_move;
  design d_slow realizes f_move {
    requires base;
    qa safety = 0.8;
    utility = 0.5;
  }
  objective o_move : f_move {
    require safety >= 0.5;
  }
}
)";

bool mentions(const ParseResult& r, const std::string& needle) {
    for (const auto& d : r.diagnostics) {
        if (d.message.find(needle) != std::string::npos) return true;
    }
    return false;
}

std::string replace(std::string s, const std::string& from, const std::string& to) {
    const auto pos = s.find(from);
    REQUIRE(pos != std::string::npos);
    return s.replace(pos, from.size(), to);
}

}  // namespace

TEST_CASE("minimal model parses") {
    const auto r = parse_model(kMinimal);
    REQUIRE(r.ok());
    CHECK(r.diagnostics.empty());
    CHECK(r.model->name == "tiny");
    CHECK(r.model->designs.size() == 1);
    const auto& d = r.model->designs[0];
    CHECK(d.realizes == "f_move");
    CHECK(d.required_components == std::vector<std::string>{"base"});
    CHECK(*d.estimate("safety") == 0.8);
    CHECK(d.utility == 0.5);
    REQUIRE(r.model->objectives[0].nfrs.size() == 1);
    CHECK(r.model->objectives[0].nfrs[0].comparator == Comparator::ge);
    CHECK(r.model->objectives[0].nfrs[0].threshold == 0.5);
}

TEST_CASE("dangling component reference names the component and line") {
    const auto r = parse_model(replace(kMinimal, "requires base;", "requires base, gripper;"));
    CHECK_FALSE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].severity == Severity::error);
    CHECK(r.diagnostics[0].line == 5);
    CHECK(r.diagnostics[0].message.find("'gripper'") != std::string::npos);
}

TEST_CASE("semantic errors") {
    SUBCASE("duplicate design") {
        const std::string dup = replace(kMinimal, "  objective",
                                        "  design d_slow realizes f_move { requires base; qa safety = 0.1; "
                                        "utility = 0.1; }\n  objective");
        const auto r = parse_model(dup);
        CHECK_FALSE(r.ok());
        CHECK(mentions(r, "duplicate design 'd_slow'"));
    }
    SUBCASE("comparator against polarity") {
        const auto r = parse_model(replace(kMinimal, "safety >= 0.5", "safety <= 0.5"));
        CHECK_FALSE(r.ok());
        CHECK(mentions(r, "comparator '<='"));
    }
    SUBCASE("estimate outside the unit interval") {
        const auto r = parse_model(replace(kMinimal, "qa safety = 0.8", "qa safety = 1.2"));
        CHECK_FALSE(r.ok());
        CHECK(mentions(r, "outside [0,1]"));
    }
    SUBCASE("threshold outside the unit interval") {
        CHECK_FALSE(parse_model(replace(kMinimal, ">= 0.5", ">= -0.5")).ok());
    }
    SUBCASE("undeclared function") {
        const auto r = parse_model(replace(kMinimal, "realizes f_move", "realizes f_fly"));
        CHECK(mentions(r, "'f_fly'"));
    }
    SUBCASE("missing estimate for a required qa") {
        const auto r = parse_model(replace(kMinimal, "qa safety = 0.8;", ""));
        CHECK(mentions(r, "no estimate for 'safety'"));
    }
}

TEST_CASE("syntax errors are positioned") {
    struct Case {
        std::string text;
        int line;
    };
    const std::vector<Case> cases = {
        {replace(kMinimal, "component base;", "component base"), 4},
        {replace(kMinimal, "higher_better", "bigger_better"), 2},
        {replace(kMinimal, "utility = 0.5;", "utility = abc;"), 8},
        {replace(kMinimal, ">= 0.5", "> 0.5"), 11},
        {std::string(kMinimal) + "trailing", 14},
        {"", 1},
    };
    for (const auto& c : cases) {
        const auto r = parse_model(c.text);
        CHECK_FALSE(r.ok());
        REQUIRE(r.diagnostics.size() == 1);
        CHECK(r.diagnostics[0].line == c.line);
        CHECK(r.diagnostics[0].column >= 1);
        CHECK(to_string(r.diagnostics[0]).find(std::to_string(c.line) + ":") == 0);
    }
}

TEST_CASE("comments are ignored") {
    const auto r = parse_model("// header\n" + replace(kMinimal, "component base;", "component base; // the base"));
    CHECK(r.ok());
}

TEST_CASE("shipped pyramid model") {
    const auto r = parse_model_file(testsupport::models_dir() + "/pyramid.archmodel");
    REQUIRE(r.ok());
    CHECK(r.diagnostics.empty());
    const auto& m = *r.model;
    CHECK(m.functions.size() == 2);
    CHECK(m.designs.size() >= 4);
    for (const char* d : {"dual_arm", "single_arm_with_move", "tag_detect_normal", "tag_detect_lowlight"}) {
        CHECK(m.find_design(d) != nullptr);
    }
    CHECK(m.find_design("dual_arm")->realizes == m.find_design("single_arm_with_move")->realizes);
    CHECK(m.find_design("tag_detect_normal")->realizes == m.find_design("tag_detect_lowlight")->realizes);
}

TEST_CASE("round trips") {
    auto check_round_trip = [](const ArchitectureModel& m) {
        const std::string once = print_model(m);
        const auto back = parse_model(once);
        REQUIRE(back.ok());
        CHECK(*back.model == m);
        CHECK(print_model(*back.model) == once);
    };
    SUBCASE("pyramid") {
        const auto r = parse_model_file(testsupport::models_dir() + "/pyramid.archmodel");
        REQUIRE(r.ok());
        check_round_trip(*r.model);
    }
    SUBCASE("generated navigation model") {
        check_round_trip(generate_nav_model(NavParameterSpace::standard()));
    }
    SUBCASE("shipped navigation model equals the generator output") {
        const auto r = parse_model_file(testsupport::models_dir() + "/navigation.archmodel");
        REQUIRE(r.ok());
        CHECK(*r.model == generate_nav_model(NavParameterSpace::standard()));
    }
    SUBCASE("random models") {
        std::mt19937_64 rng(17);
        for (int i = 0; i < 100; ++i) {
            auto m = testsupport::random_model(rng);
            if (has_errors(validate(m))) continue;
            check_round_trip(m);
        }
    }
}

TEST_CASE("generator cardinality") {
    const auto m = generate_nav_model(NavParameterSpace::standard());
    CHECK(m.designs.size() == 27);
    CHECK(m.components.size() == 28);
    CHECK(m.functions.size() == 1);
    REQUIRE(m.objectives.size() == 1);
    CHECK(m.objectives[0].id == "o_nav");
    CHECK(validate(m).empty());
    for (const auto& d : m.designs) {
        CHECK(d.required_components.size() == 2);
        CHECK(d.required_components[0] == "nav_stack");
        CHECK(decode_nav_design(d.name).has_value());
    }
    CHECK(m.find_design("f_nav_v0.3_a3.6_r0.8") != nullptr);

    NavParameterSpace single = NavParameterSpace::standard();
    single.max_vel = {0.5};
    single.accel_lim = {6};
    single.inflation_radius = {0.65};
    const auto one = generate_nav_model(single);
    REQUIRE(one.designs.size() == 1);
    CHECK(one.designs[0].name == "f_nav_v0.5_a6_r0.65");

    single.max_vel = {0.5, 0.3};
    CHECK_THROWS_AS(generate_nav_model(single), Error);
    single.max_vel = {};
    CHECK_THROWS_AS(generate_nav_model(single), Error);
}

TEST_CASE("generated estimates by hand") {
    const auto m = generate_nav_model(NavParameterSpace::standard());
    auto est = [&](const char* name, const char* qa) { return *m.find_design(name)->estimate(qa); };
    // cruise load (20 + 30 v + 0.2*20) / 80
    CHECK(est("f_nav_v0.3_a6_r0.65", "energy") == doctest::Approx(33.0 / 80.0));
    CHECK(est("f_nav_v0.5_a6_r0.65", "energy") == doctest::Approx(39.0 / 80.0));
    CHECK(est("f_nav_v0.75_a6_r0.65", "energy") == doctest::Approx(46.5 / 80.0));
    // 0.30 + 0.40 (r - 0.5)/0.3 + 0.30 (0.75 - v)/0.45
    CHECK(est("f_nav_v0.75_a3.6_r0.5", "safety") == doctest::Approx(0.30));
    CHECK(est("f_nav_v0.3_a9_r0.8", "safety") == doctest::Approx(1.0));
    CHECK(est("f_nav_v0.5_a6_r0.65", "safety") == doctest::Approx(0.30 + 0.20 + 0.30 * 0.25 / 0.45));
    CHECK(est("f_nav_v0.5_a6_r0.65", "performance") == doctest::Approx(0.5 / 0.75));
    CHECK(m.find_design("f_nav_v0.75_a9_r0.8")->utility == 1.0);
}

TEST_CASE("generator monotonicity") {
    const auto space = NavParameterSpace::standard();
    const auto m = generate_nav_model(space);
    auto est = [&](double v, double a, double r, const char* qa) {
        return *m.find_design(nav_design_name({v, a, r}))->estimate(qa);
    };
    for (double a : space.accel_lim) {
        for (double v : space.max_vel) {
            for (std::size_t i = 1; i < space.inflation_radius.size(); ++i) {
                CHECK(est(v, a, space.inflation_radius[i], "safety") >= est(v, a, space.inflation_radius[i - 1], "safety"));
            }
        }
        for (double r : space.inflation_radius) {
            for (std::size_t i = 1; i < space.max_vel.size(); ++i) {
                CHECK(est(space.max_vel[i], a, r, "safety") <= est(space.max_vel[i - 1], a, r, "safety"));
                CHECK(est(space.max_vel[i], a, r, "energy") >= est(space.max_vel[i - 1], a, r, "energy"));
            }
            CHECK(est(0.3, a, r, "energy") < est(0.75, a, r, "energy"));
        }
    }
}

TEST_CASE("design names encode and decode") {
    CHECK(nav_design_name({0.3, 3.6, 0.8}) == "f_nav_v0.3_a3.6_r0.8");
    CHECK(nav_design_name({0.75, 9, 0.5}) == "f_nav_v0.75_a9_r0.5");
    const auto p = decode_nav_design("f_nav_v0.75_a9_r0.5");
    REQUIRE(p);
    CHECK(*p == NavDesignParams{0.75, 9, 0.5});
    CHECK_FALSE(decode_nav_design("dual_arm"));
    CHECK_FALSE(decode_nav_design("f_nav_v0.75_a9"));
    CHECK_FALSE(decode_nav_design("f_nav_vx_a9_r0.5"));
}

TEST_CASE("statically unsatisfiable objective is a warning") {
    const auto r = parse_model_file(testsupport::fixtures_dir() + "/unsatisfiable.archmodel");
    REQUIRE(r.ok());
    REQUIRE(r.diagnostics.size() == 1);
    CHECK(r.diagnostics[0].severity == Severity::warning);
    CHECK(r.diagnostics[0].message.find("statically unsatisfiable NFR") == 0);
    CHECK_FALSE(has_errors(r.diagnostics));
}

TEST_CASE("missing file is an error diagnostic") {
    const auto r = parse_model_file(testsupport::fixtures_dir() + "/does_not_exist.archmodel");
    CHECK_FALSE(r.ok());
    CHECK(has_errors(r.diagnostics));
}

TEST_CASE("fuzz: every failure carries a positioned diagnostic") {
    std::mt19937_64 rng(31);
    const std::string base = kMinimal;
    const std::string alphabet = "{};:,=<>./ \n_abcxyz0123456789";
    int failures = 0;
    for (int i = 0; i < 3000; ++i) {
        std::string s = base;
        const int edits = 1 + static_cast<int>(rng() % 4);
        for (int e = 0; e < edits; ++e) {
            const std::size_t pos = rng() % s.size();
            switch (rng() % 3) {
                case 0: s.erase(pos, 1 + rng() % 6); break;
                case 1: s.insert(pos, 1, alphabet[rng() % alphabet.size()]); break;
                default: s[pos] = alphabet[rng() % alphabet.size()]; break;
            }
            if (s.empty()) s = " ";
        }
        const auto r = parse_model(s);
        if (r.ok()) {
            CHECK_FALSE(has_errors(r.diagnostics));
            continue;
        }
        ++failures;
        REQUIRE_FALSE(r.diagnostics.empty());
        for (const auto& d : r.diagnostics) {
            if (d.severity == Severity::error) CHECK(d.line >= 1);
        }
    }
    CHECK(failures > 1000);
}
