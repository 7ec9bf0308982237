#pragma once

// Managing subsystem: Monitor -> Analyze -> Plan -> Execute over the knowledge
// base, driven by an external clock.

#include <atomic>
#include <chrono>
#include <deque>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <string>
#include <thread>
#include <variant>
#include <vector>

#include "metactl/knowledge_base.hpp"
#include "metactl/reasoner.hpp"

namespace metactl {

struct ComponentStatusReport {
    std::string name;
    bool ok = true;

    bool operator==(const ComponentStatusReport&) const = default;
};

struct QAReading {
    std::string qa_type;
    double value = 0.0;

    bool operator==(const QAReading&) const = default;
};

/// Monitor -> loop message.
struct Diagnostic {
    double timestamp = 0.0;
    std::variant<ComponentStatusReport, QAReading> payload;

    bool operator==(const Diagnostic&) const = default;
};

Diagnostic component_status(double t, std::string name, bool ok);
Diagnostic qa_reading(double t, std::string qa_type, double value);

/// Request to rebind an objective to another design. `from` may be empty when
/// the objective had no grounding.
class ReconfigurationCommand {
public:
    /// Throws `INVALID_COMMAND` when `to` is empty or equals `from`.
    ReconfigurationCommand(double timestamp, std::string objective, std::string from, std::string to);

    double timestamp() const noexcept { return timestamp_; }
    const std::string& objective() const noexcept { return objective_; }
    const std::string& from_design() const noexcept { return from_; }
    const std::string& to_design() const noexcept { return to_; }

    bool operator==(const ReconfigurationCommand&) const = default;

private:
    double timestamp_;
    std::string objective_;
    std::string from_;
    std::string to_;
};

enum class ExecutionResult { ack, failure, timeout };
std::string_view to_string(ExecutionResult r);

/// Enforces a configuration on the managed system.
class Executor {
public:
    virtual ~Executor() = default;
    virtual ExecutionResult apply(const ReconfigurationCommand& command) = 0;
};

/// Many-producer single-consumer queue of diagnostics. Producers only hold the
/// lock for one push.
class DiagnosticQueue {
public:
    void push(Diagnostic d);
    void push(std::vector<Diagnostic> batch);
    /// Everything queued so far, in arrival order.
    std::vector<Diagnostic> drain();
    std::size_t size() const;

private:
    mutable std::mutex mutex_;
    std::vector<Diagnostic> items_;
};

// ---------------------------------------------------------------------------
// Stages

struct IngestResult {
    int ingested = 0;
    int rejected = 0;
    bool component_status_changed = false;
    std::vector<std::string> errors;
};

/// Applies a batch in timestamp order (stable for equal timestamps). Unknown
/// entities and out-of-range values are skipped and counted.
IngestResult ingest(KnowledgeBase& kb, std::vector<Diagnostic> batch);

/// Runs the reasoner; returns the objectives in error, sorted.
std::vector<std::string> analyze(KnowledgeBase& kb, InferenceReport* report = nullptr);

/// Best alternative design for an objective: realisable, different from the
/// current one and predicted to meet every NFR, maximizing utility with ties
/// going to the lexicographically smallest name.
///
/// Predictions start from the design-time estimates. When the latest
/// measurement of a QA is worse than the current design's estimate, every
/// candidate's estimate for that QA is scaled by the same ratio; the observed
/// context can only make candidates look worse, never better.
std::optional<std::string> plan(const KnowledgeBase& kb, std::string_view objective);

/// Hands the command to the executor. On ack the grounding moves to the new
/// design and the objective's error facts are retracted until the next
/// analysis. Throws `INVALID_COMMAND` when the target does not realize the
/// objective's function; executor exceptions count as failures.
ExecutionResult execute(KnowledgeBase& kb, const ReconfigurationCommand& command, Executor& executor);

// ---------------------------------------------------------------------------
// Loop

struct LoopConfig {
    double period = 1.0;  // s
    int max_retries = 3;  // failed executions before an objective is unresolvable
};

struct ExecutionFailure {
    ReconfigurationCommand command;
    ExecutionResult result;

    bool operator==(const ExecutionFailure&) const = default;
};

struct LoopReport {
    double tick_time = 0.0;
    int ingested = 0;
    int rejected = 0;
    std::vector<std::string> objectives_in_error;
    std::vector<ReconfigurationCommand> commands;  // acknowledged, at most one per objective
    std::vector<ExecutionFailure> failures;
    std::vector<std::string> unresolvable;
    std::vector<std::string> errors;

    bool operator==(const LoopReport&) const = default;
};

class AdaptationLoop {
public:
    AdaptationLoop(KnowledgeBase kb, Executor& executor, LoopConfig config = {});

    DiagnosticQueue& queue() noexcept { return queue_; }
    const KnowledgeBase& knowledge() const noexcept { return kb_; }
    KnowledgeBase& knowledge() noexcept { return kb_; }
    const LoopConfig& config() const noexcept { return config_; }
    std::optional<double> last_tick() const noexcept { return last_tick_; }

    /// One M-A-P-E pass. Throws `INVALID_ARGUMENT` if called before a full
    /// period has elapsed since the previous tick; stage errors are reported.
    LoopReport tick(double now);

private:
    KnowledgeBase kb_;
    Executor& executor_;
    LoopConfig config_;
    DiagnosticQueue queue_;
    std::optional<double> last_tick_;
    std::map<std::string, int, std::less<>> failed_attempts_;
    std::set<std::string, std::less<>> exhausted_;
};

/// Drives an AdaptationLoop from wall-clock time on a background thread.
/// Loop time is seconds since `start()`.
class FreeRunningLoop {
public:
    using Sink = std::function<void(const LoopReport&)>;

    FreeRunningLoop(AdaptationLoop& loop, Sink sink);
    ~FreeRunningLoop();

    FreeRunningLoop(const FreeRunningLoop&) = delete;
    FreeRunningLoop& operator=(const FreeRunningLoop&) = delete;

    void start();
    void stop();
    bool running() const noexcept { return worker_.joinable(); }

private:
    AdaptationLoop& loop_;
    Sink sink_;
    std::jthread worker_;
};

}  // namespace metactl
