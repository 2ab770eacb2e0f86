#pragma once

#include <string>

#include "maavi/abstract_dp.hpp"
#include "maavi/multiagent_vi.hpp"
#include "maavi/run_report.hpp"

namespace maavi::detail {

// Holds the current (J, mu) of a run and appends one IterationRecord per step.
class RunRecorder {
public:
    RunRecorder(const Model& model, const RunOptions& opts, std::string algorithm, ValueFunction J0, Policy mu0,
                std::vector<std::size_t> order)
        : model_(model), opts_(opts), value_(std::move(J0)), policy_(std::move(mu0)) {
        report_.algorithm = std::move(algorithm);
        report_.agent_order = std::move(order);
        if (opts_.keep_history) {
            report_.value_history.push_back(value_);
            report_.policy_history.push_back(policy_);
        }
    }

    const ValueFunction& value() const { return value_; }
    const Policy& policy() const { return policy_; }
    std::size_t iteration() const { return report_.iterations.size(); }
    RunReport& report() { return report_; }

    const IterationRecord& step(StepKind kind, ValueFunction next, Policy next_policy, std::uint64_t h_evals,
                                const SweepTrace* trace, const std::vector<bool>& active,
                                std::optional<std::size_t> block = std::nullopt) {
        IterationRecord rec;
        rec.k = report_.iterations.size();
        rec.step = kind;
        rec.residual = weighted_sup_distance(next, value_, model_.weights());
        rec.policy_changed = next_policy != policy_;
        rec.h_evals = h_evals;
        rec.h_evals_total = h_evals + (report_.iterations.empty() ? 0 : report_.iterations.back().h_evals_total);
        rec.block = block;
        if (opts_.observer)
            opts_.observer(IterationEvent{rec.k, kind, value_, policy_, next, next_policy, trace, active});
        value_ = std::move(next);
        policy_ = std::move(next_policy);
        if (opts_.keep_history) {
            report_.value_history.push_back(value_);
            report_.policy_history.push_back(policy_);
        }
        report_.iterations.push_back(rec);
        return report_.iterations.back();
    }

    RunReport finish(Termination termination) {
        report_.termination = termination;
        report_.final_value = value_;
        report_.final_policy = policy_;
        if (termination == Termination::PolicyStableAndConverged) {
            std::size_t kbar = 0;
            for (const auto& rec : report_.iterations) {
                if (rec.policy_changed)
                    kbar = rec.k + 1;
            }
            report_.stabilization_index = kbar;
        }
        return std::move(report_);
    }

private:
    const Model& model_;
    const RunOptions& opts_;
    ValueFunction value_;
    Policy policy_;
    RunReport report_;
};

} // namespace maavi::detail
