#pragma once

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "json.hpp"

#include "maavi/model.hpp"

namespace maavi {

enum class InitMode { Validate, AutoShift, Unchecked };
enum class Termination { PolicyStableAndConverged, MaxIters };

/// What one iteration did: a full T step, an agent-by-agent sweep, or a T_mu step.
enum class StepKind { Greedy, Improve, Evaluate, EvaluateRestricted };

std::string to_string(InitMode mode);
std::string to_string(Termination t);
std::string to_string(StepKind s);
InitMode parse_init_mode(const std::string& s);

struct SweepTrace;

/// Passed to RunOptions::observer after every iteration.
struct IterationEvent {
    std::size_t k = 0;
    StepKind step = StepKind::Improve;
    const ValueFunction& value_before;
    const Policy& policy_before;
    const ValueFunction& value_after;
    const Policy& policy_after;
    /// Present for improvement steps.
    const SweepTrace* trace = nullptr;
    /// States updated by this iteration; empty means all states.
    const std::vector<bool>& active;
};

struct RunOptions {
    std::size_t max_iters = 10000;
    double epsilon = kDefaultEpsilon;
    /// Permutation of 0..m-1; empty means identity.
    std::vector<std::size_t> agent_order;
    InitMode init_mode = InitMode::Validate;
    /// Keep J^k and mu^k for every k in the report.
    bool keep_history = false;
    std::function<void(const IterationEvent&)> observer;
};

struct IterationRecord {
    std::size_t k = 0;
    StepKind step = StepKind::Improve;
    /// ||J^{k+1} - J^k|| in the model's weighted norm.
    double residual = 0.0;
    bool policy_changed = false;
    std::uint64_t h_evals = 0;
    std::uint64_t h_evals_total = 0;
    /// Active partition block for async runs.
    std::optional<std::size_t> block;
};

/// One logical-processor action in a simulated asynchronous run.
struct ProcessorEvent {
    std::size_t time = 0;
    std::size_t processor = 0;
    StepKind action = StepKind::Improve;
    std::vector<StateId> states;
};

struct RunReport {
    std::string algorithm;
    std::vector<std::size_t> agent_order;
    std::vector<IterationRecord> iterations;
    Policy final_policy;
    ValueFunction final_value;
    /// First k with mu^j = final_policy for all j >= k; only set on converged runs.
    std::optional<std::size_t> stabilization_index;
    Termination termination = Termination::MaxIters;
    double initial_shift = 0.0;
    std::vector<std::string> warnings;
    std::vector<ValueFunction> value_history;
    std::vector<Policy> policy_history;
    std::vector<ProcessorEvent> events;

    bool converged() const { return termination == Termination::PolicyStableAndConverged; }
    std::uint64_t h_evals_total() const { return iterations.empty() ? 0 : iterations.back().h_evals_total; }
};

nlohmann::json report_to_json(const Model& model, const RunReport& report);
nlohmann::json event_to_json(const ProcessorEvent& e);

/// Writes one JSON object per line.
void write_event_log(const std::vector<ProcessorEvent>& events, std::ostream& out);

} // namespace maavi
