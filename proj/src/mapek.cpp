#include "metactl/mapek.hpp"

#include <algorithm>
#include <cmath>
#include <condition_variable>

#include "metactl/error.hpp"

namespace metactl {

Diagnostic component_status(double t, std::string name, bool ok) {
    return {t, ComponentStatusReport{std::move(name), ok}};
}

Diagnostic qa_reading(double t, std::string qa_type, double value) {
    return {t, QAReading{std::move(qa_type), value}};
}

ReconfigurationCommand::ReconfigurationCommand(double timestamp, std::string objective,
                                               std::string from, std::string to)
    : timestamp_(timestamp), objective_(std::move(objective)), from_(std::move(from)), to_(std::move(to)) {
    if (to_.empty()) throw Error(ErrorCode::invalid_command, "missing target design");
    if (to_ == from_) throw Error(ErrorCode::invalid_command, "target equals current design " + to_);
}

std::string_view to_string(ExecutionResult r) {
    switch (r) {
        case ExecutionResult::ack: return "ack";
        case ExecutionResult::failure: return "failure";
        case ExecutionResult::timeout: return "EXECUTOR_TIMEOUT";
    }
    return "?";
}

void DiagnosticQueue::push(Diagnostic d) {
    std::lock_guard lock(mutex_);
    items_.push_back(std::move(d));
}

void DiagnosticQueue::push(std::vector<Diagnostic> batch) {
    std::lock_guard lock(mutex_);
    for (auto& d : batch) items_.push_back(std::move(d));
}

std::vector<Diagnostic> DiagnosticQueue::drain() {
    std::lock_guard lock(mutex_);
    std::vector<Diagnostic> out;
    out.swap(items_);
    return out;
}

std::size_t DiagnosticQueue::size() const {
    std::lock_guard lock(mutex_);
    return items_.size();
}

// ---------------------------------------------------------------------------

IngestResult ingest(KnowledgeBase& kb, std::vector<Diagnostic> batch) {
    std::stable_sort(batch.begin(), batch.end(),
                     [](const Diagnostic& a, const Diagnostic& b) { return a.timestamp < b.timestamp; });
    IngestResult result;
    for (const auto& d : batch) {
        try {
            if (const auto* c = std::get_if<ComponentStatusReport>(&d.payload)) {
                const bool was_error = kb.component_state(c->name) == ComponentState::error;
                kb.record_component_status(c->name, c->ok);
                if (was_error == c->ok) result.component_status_changed = true;
            } else {
                const auto& q = std::get<QAReading>(d.payload);
                kb.assert_measurement({q.qa_type, q.value, d.timestamp});
            }
            ++result.ingested;
        } catch (const Error& e) {
            ++result.rejected;
            result.errors.emplace_back(e.what());
        }
    }
    return result;
}

std::vector<std::string> analyze(KnowledgeBase& kb, InferenceReport* report) {
    InferenceReport r = infer(kb);
    if (report) *report = r;
    std::vector<std::string> out;
    for (const auto& f : kb.query({FactKind::objective_in_error, std::nullopt})) out.push_back(f.subject);
    return out;
}

namespace {

/// Ratio by which the observed context degrades the estimate of one QA,
/// relative to the design that produced the measurement. 1 means no evidence.
double context_factor(const KnowledgeBase& kb, const NFR& nfr, const FunctionDesign* current) {
    if (current == nullptr) return 1.0;
    const auto measured = kb.measurement(nfr.qa_type);
    const auto estimated = current->estimate(nfr.qa_type);
    if (!measured || !estimated || *estimated <= 0.0) return 1.0;
    const double ratio = measured->value / *estimated;
    return nfr.comparator == Comparator::ge ? std::min(1.0, ratio) : std::max(1.0, ratio);
}

}  // namespace

std::optional<std::string> plan(const KnowledgeBase& kb, std::string_view objective) {
    const ArchitectureModel& m = kb.model();
    const Objective* o = m.find_objective(objective);
    if (o == nullptr) return std::nullopt;

    const FunctionGrounding* g = kb.grounding(objective);
    const FunctionDesign* current = g ? m.find_design(g->design) : nullptr;

    std::vector<double> factors;
    factors.reserve(o->nfrs.size());
    for (const auto& nfr : o->nfrs) factors.push_back(context_factor(kb, nfr, current));

    const FunctionDesign* best = nullptr;
    for (const FunctionDesign* d : m.designs_for(o->function)) {
        if (d == current || !kb.design_realisable(d->name)) continue;
        bool feasible = true;
        for (std::size_t i = 0; i < o->nfrs.size() && feasible; ++i) {
            const NFR& nfr = o->nfrs[i];
            const auto est = d->estimate(nfr.qa_type);
            if (!est) {
                feasible = false;
                break;
            }
            const double predicted = std::clamp(*est * factors[i], 0.0, 1.0);
            feasible = satisfies(predicted, nfr.comparator, nfr.threshold);
        }
        if (!feasible) continue;
        if (best == nullptr || d->utility > best->utility ||
            (d->utility == best->utility && d->name < best->name)) {
            best = d;
        }
    }
    if (best == nullptr) return std::nullopt;
    return best->name;
}

ExecutionResult execute(KnowledgeBase& kb, const ReconfigurationCommand& command, Executor& executor) {
    const ArchitectureModel& m = kb.model();
    const Objective* o = m.find_objective(command.objective());
    if (o == nullptr) throw Error(ErrorCode::invalid_command, "unknown objective " + command.objective());
    const FunctionDesign* d = m.find_design(command.to_design());
    if (d == nullptr || d->realizes != o->function) {
        throw Error(ErrorCode::invalid_command,
                    command.to_design() + " does not realize " + o->function);
    }

    ExecutionResult result;
    try {
        result = executor.apply(command);
    } catch (const std::exception&) {
        result = ExecutionResult::failure;
    }
    if (result != ExecutionResult::ack) return result;

    kb.set_grounding(command.objective(), command.to_design(), command.timestamp());
    kb.retract(grounding_in_error(command.objective()));
    kb.retract(objective_in_error(command.objective()));
    return result;
}

// ---------------------------------------------------------------------------

AdaptationLoop::AdaptationLoop(KnowledgeBase kb, Executor& executor, LoopConfig config)
    : kb_(std::move(kb)), executor_(executor), config_(config) {
    if (!(config_.period > 0.0)) throw Error(ErrorCode::invalid_argument, "loop period must be positive");
}

LoopReport AdaptationLoop::tick(double now) {
    constexpr double clock_slack = 1e-9;
    if (last_tick_ && now + clock_slack < *last_tick_ + config_.period) {
        throw Error(ErrorCode::invalid_argument, "tick before the loop period elapsed");
    }
    last_tick_ = now;

    LoopReport report;
    report.tick_time = now;

    // Monitor
    IngestResult ingested = ingest(kb_, queue_.drain());
    report.ingested = ingested.ingested;
    report.rejected = ingested.rejected;
    report.errors = std::move(ingested.errors);
    if (ingested.component_status_changed) {
        failed_attempts_.clear();
        exhausted_.clear();
    }

    // Analyze
    report.objectives_in_error = analyze(kb_);
    for (const auto& o : kb_.model().objectives) {
        if (kb_.objective_fulfilled(o.id)) {
            kb_.set_unresolvable(o.id, false);
            failed_attempts_.erase(o.id);
            exhausted_.erase(o.id);
        }
    }

    // Plan + Execute, one command per objective.
    for (const auto& objective : report.objectives_in_error) {
        if (exhausted_.count(objective)) {
            report.unresolvable.push_back(objective);
            continue;
        }
        const auto target = plan(kb_, objective);
        if (!target) {
            kb_.set_unresolvable(objective, true);
            report.unresolvable.push_back(objective);
            continue;
        }
        kb_.set_unresolvable(objective, false);

        const FunctionGrounding* g = kb_.grounding(objective);
        try {
            ReconfigurationCommand cmd(now, objective, g ? g->design : std::string{}, *target);
            const ExecutionResult result = execute(kb_, cmd, executor_);
            if (result == ExecutionResult::ack) {
                failed_attempts_.erase(objective);
                report.commands.push_back(std::move(cmd));
                continue;
            }
            report.failures.push_back({cmd, result});
            if (++failed_attempts_[objective] >= config_.max_retries) {
                exhausted_.insert(objective);
                kb_.set_unresolvable(objective, true);
                report.unresolvable.push_back(objective);
            }
        } catch (const Error& e) {
            report.errors.emplace_back(e.what());
        }
    }
    return report;
}

// ---------------------------------------------------------------------------

FreeRunningLoop::FreeRunningLoop(AdaptationLoop& loop, Sink sink) : loop_(loop), sink_(std::move(sink)) {}

FreeRunningLoop::~FreeRunningLoop() { stop(); }

void FreeRunningLoop::start() {
    if (worker_.joinable()) return;
    worker_ = std::jthread([this](std::stop_token stop) {
        using clock = std::chrono::steady_clock;
        const auto origin = clock::now();
        const double period = loop_.config().period;
        auto at = [&](double seconds) {
            return origin + std::chrono::duration_cast<clock::duration>(std::chrono::duration<double>(seconds));
        };
        std::mutex m;
        std::condition_variable_any wake;
        double due = period;
        while (!stop.stop_requested()) {
            {
                std::unique_lock lock(m);
                wake.wait_until(lock, stop, at(due), [] { return false; });
            }
            if (stop.stop_requested()) break;
            const double now = std::chrono::duration<double>(clock::now() - origin).count();
            if (now < due) continue;
            const LoopReport report = loop_.tick(now);
            if (sink_) sink_(report);
            due = now + period;
        }
    });
}

void FreeRunningLoop::stop() {
    if (!worker_.joinable()) return;
    worker_.request_stop();
    worker_.join();
}

}  // namespace metactl
