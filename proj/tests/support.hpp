#pragma once

// Shared test helpers: random models and knowledge-base states, and
// brute-force oracles written independently of the library code.

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "metactl/knowledge_base.hpp"
#include "metactl/tomasys.hpp"

namespace testsupport {

using namespace metactl;

inline std::string models_dir() { return METACTL_MODELS_DIR; }
inline std::string fixtures_dir() { return METACTL_FIXTURES_DIR; }

/// Random well-formed model: up to 4 components, up to 3 designs, up to 2
/// objectives, two QA types of opposite polarity.
inline ArchitectureModel random_model(std::mt19937_64& rng) {
    auto pick = [&](int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng); };
    auto unit = [&] { return std::round(std::uniform_real_distribution<double>(0.0, 1.0)(rng) * 100.0) / 100.0; };

    ArchitectureModel m;
    m.name = "random";
    m.qa_types = {{"q_hi", Polarity::higher_better, {}}, {"q_lo", Polarity::lower_better, {}}};
    const int n_components = pick(1, 4);
    for (int i = 0; i < n_components; ++i) m.components.push_back({"c" + std::to_string(i), {}});
    const int n_functions = pick(1, 2);
    for (int i = 0; i < n_functions; ++i) m.functions.push_back({"f" + std::to_string(i), {}});

    const int n_designs = pick(n_functions, 3);
    for (int i = 0; i < n_designs; ++i) {
        FunctionDesign d;
        d.name = "d" + std::to_string(i);
        d.realizes = m.functions[i < n_functions ? i : pick(0, n_functions - 1)].name;
        for (const auto& c : m.components) {
            if (pick(0, 1) == 1) d.required_components.push_back(c.name);
        }
        if (d.required_components.empty()) d.required_components.push_back(m.components[pick(0, n_components - 1)].name);
        d.qa_estimates = {{"q_hi", unit(), {}}, {"q_lo", unit(), {}}};
        d.utility = unit();
        m.designs.push_back(std::move(d));
    }

    const int n_objectives = pick(1, 2);
    for (int i = 0; i < n_objectives; ++i) {
        Objective o;
        o.id = "o" + std::to_string(i);
        o.function = m.functions[pick(0, n_functions - 1)].name;
        if (pick(0, 1)) o.nfrs.push_back({"q_hi", Comparator::ge, unit(), {}});
        if (pick(0, 1)) o.nfrs.push_back({"q_lo", Comparator::le, unit(), {}});
        m.objectives.push_back(std::move(o));
    }
    return m;
}

/// A design realizing each objective's function, chosen at random.
inline std::map<std::string, std::string> random_groundings(const ArchitectureModel& m, std::mt19937_64& rng) {
    std::map<std::string, std::string> g;
    for (const auto& o : m.objectives) {
        std::vector<std::string> options;
        for (const auto& d : m.designs) {
            if (d.realizes == o.function) options.push_back(d.name);
        }
        g[o.id] = options[std::uniform_int_distribution<std::size_t>(0, options.size() - 1)(rng)];
    }
    return g;
}

/// Random component errors, measurements and occasional directly asserted
/// facts of the derived kinds.
inline void inject_random_facts(KnowledgeBase& kb, std::mt19937_64& rng) {
    const ArchitectureModel& m = kb.model();
    std::bernoulli_distribution coin(0.35);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    for (const auto& c : m.components) {
        if (coin(rng)) kb.assert_fact(component_error(c.name));
    }
    for (const auto& q : m.qa_types) {
        if (coin(rng) || coin(rng)) kb.assert_measurement({q.name, std::round(unit(rng) * 100.0) / 100.0, 1.0});
    }
    std::bernoulli_distribution rare(0.1);
    for (const auto& d : m.designs) {
        if (rare(rng)) kb.assert_fact(design_unrealisable(d.name));
    }
    for (const auto& o : m.objectives) {
        if (rare(rng)) kb.assert_fact(grounding_in_error(o.id));
        if (rare(rng)) kb.assert_fact(objective_in_error(o.id));
    }
}

/// Exhaustive rule instantiation: enumerate every variable assignment of every
/// rule over the model's entities and add conclusions until nothing changes.
inline std::set<Fact> oracle_closure(const KnowledgeBase& kb) {
    const ArchitectureModel& m = kb.model();
    std::set<Fact> facts = kb.asserted_facts();
    auto has = [&](FactKind k, const std::string& s) { return facts.count(Fact{k, s}) > 0; };
    bool changed = true;
    while (changed) {
        changed = false;
        std::set<Fact> next = facts;
        // R1 over (c, d)
        for (const auto& c : m.components) {
            for (const auto& d : m.designs) {
                const bool req = std::find(d.required_components.begin(), d.required_components.end(), c.name) !=
                                 d.required_components.end();
                if (has(FactKind::component_error, c.name) && req) next.insert({FactKind::design_unrealisable, d.name});
            }
        }
        for (const auto& o : m.objectives) {
            const FunctionGrounding* g = kb.grounding(o.id);
            // R2 over (o, d)
            for (const auto& d : m.designs) {
                if (g && g->design == d.name && has(FactKind::design_unrealisable, d.name)) {
                    next.insert({FactKind::grounding_in_error, o.id});
                }
            }
            // R3 over (o, nfr)
            for (const auto& nfr : o.nfrs) {
                const auto meas = kb.measurement(nfr.qa_type);
                if (!g || !meas) continue;
                const bool ok = nfr.comparator == Comparator::ge ? meas->value >= nfr.threshold
                                                                 : meas->value <= nfr.threshold;
                if (!ok) {
                    next.insert({FactKind::grounding_in_error, o.id});
                    next.insert({FactKind::objective_in_error, o.id});
                }
            }
            // R4 over o
            if (has(FactKind::grounding_in_error, o.id)) next.insert({FactKind::objective_in_error, o.id});
        }
        if (next != facts) {
            facts = std::move(next);
            changed = true;
        }
    }
    return facts;
}

/// Planner reference: every realisable alternative whose calibrated prediction
/// meets all NFRs, sorted by descending utility then name; the first wins.
inline std::optional<std::string> oracle_plan(const KnowledgeBase& kb, const std::string& objective) {
    const ArchitectureModel& m = kb.model();
    const Objective* o = m.find_objective(objective);
    if (!o) return std::nullopt;
    const FunctionGrounding* g = kb.grounding(objective);
    const FunctionDesign* cur = g ? m.find_design(g->design) : nullptr;

    auto errored = [&](const FunctionDesign& d) {
        if (kb.asserted_facts().count(Fact{FactKind::design_unrealisable, d.name})) return true;
        for (const auto& c : d.required_components) {
            if (kb.asserted_facts().count(Fact{FactKind::component_error, c})) return true;
        }
        return false;
    };

    std::vector<const FunctionDesign*> feasible;
    for (const auto& d : m.designs) {
        if (d.realizes != o->function || (cur && d.name == cur->name) || errored(d)) continue;
        bool ok = true;
        for (const auto& nfr : o->nfrs) {
            double est = -1.0;
            for (const auto& e : d.qa_estimates) {
                if (e.qa_type == nfr.qa_type) est = e.value;
            }
            if (est < 0.0) {
                ok = false;
                break;
            }
            double scale = 1.0;
            const auto meas = kb.measurement(nfr.qa_type);
            if (cur && meas) {
                double cur_est = 0.0;
                for (const auto& e : cur->qa_estimates) {
                    if (e.qa_type == nfr.qa_type) cur_est = e.value;
                }
                if (cur_est > 0.0) {
                    const double ratio = meas->value / cur_est;
                    scale = nfr.comparator == Comparator::ge ? (ratio < 1.0 ? ratio : 1.0) : (ratio > 1.0 ? ratio : 1.0);
                }
            }
            const double predicted = std::min(1.0, std::max(0.0, est * scale));
            ok = nfr.comparator == Comparator::ge ? predicted >= nfr.threshold : predicted <= nfr.threshold;
            if (!ok) break;
        }
        if (ok) feasible.push_back(&d);
    }
    if (feasible.empty()) return std::nullopt;
    std::sort(feasible.begin(), feasible.end(), [](const FunctionDesign* a, const FunctionDesign* b) {
        if (a->utility != b->utility) return a->utility > b->utility;
        return a->name < b->name;
    });
    return feasible.front()->name;
}

}  // namespace testsupport
