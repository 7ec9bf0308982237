#pragma once

#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "metactl/tomasys.hpp"

namespace metactl {

enum class GroundingStatus { ok, in_error };

/// Runtime binding of an objective to the design currently realizing it.
struct FunctionGrounding {
    std::string objective;
    std::string design;
    double since = 0.0;

    bool operator==(const FunctionGrounding&) const = default;
};

/// Query pattern: a fact kind with an optional subject (nullopt is a wildcard).
struct FactPattern {
    FactKind kind;
    std::optional<std::string> subject;
};

/// Closed-world runtime model. Only negative facts are stored; an entity that
/// no fact mentions is healthy. Facts are split into those asserted by the
/// monitor and those derived by the reasoner; the reasoner recomputes the
/// derived set from scratch on every run.
///
/// Owned by a single writer (the adaptation loop). Copyable and movable so it
/// can be handed between threads, never shared.
class KnowledgeBase {
public:
    /// Throws `GROUNDING_MISMATCH` when a design does not realize its
    /// objective's function and `UNKNOWN_ENTITY` for undeclared names.
    KnowledgeBase(ArchitectureModel model,
                  const std::map<std::string, std::string>& initial_groundings,
                  double now = 0.0);

    const ArchitectureModel& model() const noexcept { return model_; }

    // -- assertion --------------------------------------------------------

    /// Idempotent. Throws `UNKNOWN_ENTITY` when the subject is undeclared.
    void assert_fact(const Fact& fact);
    /// Keeps the newest value per QA type; an older timestamp is ignored.
    void assert_measurement(const QAValue& value);
    /// Removes the fact from both the asserted and derived sets; no-op if absent.
    void retract(const Fact& fact);

    /// Monitor report for a component: error asserts `component_error`, ok
    /// retracts it. Either way the component stops being `unknown`.
    void record_component_status(std::string_view component, bool ok);

    // -- queries ----------------------------------------------------------

    /// Asserted and derived facts matching `pattern`, ordered by subject.
    std::vector<Fact> query(const FactPattern& pattern) const;
    bool holds(const Fact& fact) const;
    std::set<Fact> negative_facts() const;
    const std::set<Fact>& asserted_facts() const noexcept { return asserted_; }
    const std::set<Fact>& derived_facts() const noexcept { return derived_; }

    ComponentState component_state(std::string_view component) const;
    bool design_realisable(std::string_view design) const;
    bool objective_fulfilled(std::string_view objective) const;

    std::optional<QAValue> measurement(std::string_view qa_type) const;
    const std::map<std::string, QAValue, std::less<>>& measurements() const noexcept {
        return measurements_;
    }

    const FunctionGrounding* grounding(std::string_view objective) const;
    const std::map<std::string, FunctionGrounding, std::less<>>& groundings() const noexcept {
        return groundings_;
    }
    GroundingStatus grounding_status(std::string_view objective) const;

    // -- mutation by the adaptation loop ----------------------------------

    /// Rebinds an objective. Same errors as the constructor.
    void set_grounding(std::string_view objective, std::string_view design, double now);

    /// Replaces an objective's NFRs at runtime (changing mission requirements).
    /// Throws `UNKNOWN_ENTITY` or `INVALID_ARGUMENT` on a polarity mismatch.
    void set_nfrs(std::string_view objective, std::vector<NFR> nfrs);

    void set_unresolvable(std::string_view objective, bool unresolvable);
    bool unresolvable(std::string_view objective) const;

    /// Installs a freshly computed derived set; clears the stale flag.
    void install_derived(std::set<Fact> derived);
    /// True when anything was asserted or retracted since the last inference.
    bool stale() const noexcept { return stale_; }

private:
    void check_subject(const Fact& fact) const;
    void check_grounding(std::string_view objective, std::string_view design) const;

    ArchitectureModel model_;
    std::set<Fact> asserted_;
    std::set<Fact> derived_;
    std::set<std::string, std::less<>> reported_components_;
    std::map<std::string, QAValue, std::less<>> measurements_;
    std::map<std::string, FunctionGrounding, std::less<>> groundings_;
    std::set<std::string, std::less<>> unresolvable_;
    bool stale_ = false;
};

}  // namespace metactl
