#include "maavi/optimistic_pi.hpp"

#include <algorithm>
#include <deque>

#include "run_recorder.hpp"

namespace maavi {

Schedule Schedule::every_q(std::size_t q, std::size_t horizon) {
    if (q == 0)
        throw ValidationError("schedule: q must be at least 1");
    if (horizon == 0)
        throw ValidationError("schedule: horizon must be at least 1");
    Schedule s;
    s.kind_ = Kind::EveryQ;
    s.q_ = q;
    s.horizon_ = horizon;
    return s;
}

Schedule Schedule::explicit_set(std::set<std::size_t> iterations, std::size_t horizon) {
    if (horizon == 0)
        throw ValidationError("schedule: horizon must be at least 1");
    if (iterations.empty() || *iterations.begin() >= horizon)
        throw ValidationError("schedule: improvement set K has no iteration below the horizon");
    Schedule s;
    s.kind_ = Kind::ExplicitSet;
    s.horizon_ = horizon;
    s.set_ = std::move(iterations);
    return s;
}

bool Schedule::improves_at(std::size_t k) const {
    if (kind_ == Kind::EveryQ)
        return k % q_ == 0;
    return set_.count(k) > 0;
}

std::vector<std::size_t> Schedule::improvement_iterations() const {
    std::vector<std::size_t> out;
    if (kind_ == Kind::EveryQ) {
        for (std::size_t k = 0; k < horizon_; k += q_)
            out.push_back(k);
    } else {
        for (std::size_t k : set_) {
            if (k < horizon_)
                out.push_back(k);
        }
    }
    return out;
}

StatePartitionSchedule::StatePartitionSchedule(std::size_t num_states, std::vector<std::vector<StateId>> blocks,
                                               std::vector<std::size_t> activation)
    : num_states_(num_states), blocks_(std::move(blocks)), activation_(std::move(activation)) {
    if (blocks_.empty())
        throw ValidationError("partition: at least one block is required");
    std::vector<int> owner(num_states_, -1);
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (blocks_[b].empty())
            throw ValidationError("partition: block " + std::to_string(b) + " is empty");
        for (StateId x : blocks_[b]) {
            if (x >= num_states_)
                throw ValidationError("partition: state " + std::to_string(x) + " out of range");
            if (owner[x] >= 0)
                throw ValidationError("partition: state " + std::to_string(x) + " belongs to blocks " +
                                      std::to_string(owner[x]) + " and " + std::to_string(b));
            owner[x] = static_cast<int>(b);
        }
    }
    for (StateId x = 0; x < num_states_; ++x) {
        if (owner[x] < 0)
            throw ValidationError("partition: state " + std::to_string(x) + " is never activated");
    }
    if (activation_.empty()) {
        for (std::size_t b = 0; b < blocks_.size(); ++b)
            activation_.push_back(b);
    }
    std::vector<bool> seen(blocks_.size(), false);
    for (std::size_t b : activation_) {
        if (b >= blocks_.size())
            throw ValidationError("partition: activation names unknown block " + std::to_string(b));
        seen[b] = true;
    }
    for (std::size_t b = 0; b < blocks_.size(); ++b) {
        if (!seen[b])
            throw ValidationError("partition: block " + std::to_string(b) + " is never activated");
    }
}

StatePartitionSchedule StatePartitionSchedule::contiguous(std::size_t num_states, std::size_t num_blocks) {
    if (num_blocks == 0 || num_blocks > num_states)
        throw ValidationError("partition: need between 1 and " + std::to_string(num_states) + " blocks");
    std::vector<std::vector<StateId>> blocks(num_blocks);
    for (std::size_t b = 0; b < num_blocks; ++b) {
        for (StateId x = b * num_states / num_blocks; x < (b + 1) * num_states / num_blocks; ++x)
            blocks[b].push_back(x);
    }
    return StatePartitionSchedule(num_states, std::move(blocks));
}

std::vector<bool> StatePartitionSchedule::mask(std::size_t b) const {
    std::vector<bool> m(num_states_, false);
    for (StateId x : blocks_[b])
        m[x] = true;
    return m;
}

RunReport optimistic_pi_run(const Model& model, std::span<const double> J0, const Policy& mu0,
                            const Schedule& schedule, const RunOptions& opts) {
    if (!(opts.epsilon > 0.0))
        throw ValidationError("epsilon must be positive");
    const auto order = resolve_agent_order(model, opts.agent_order);
    InitialValue init = ensure_initial_condition(model, J0, mu0, opts.init_mode);
    const double threshold = residual_threshold(opts.epsilon, model.contraction_modulus());

    detail::RunRecorder rec(model, opts, "opi", std::move(init.value), mu0, order);
    rec.report().initial_shift = init.shift;
    rec.report().warnings = std::move(init.warnings);
    const std::vector<bool> all;
    for (std::size_t k = 0; k < opts.max_iters; ++k) {
        if (schedule.improves_at(k)) {
            SweepTrace trace = agent_sweep(model, rec.value(), rec.policy(), order);
            ValueFunction next = trace.output_value();
            Policy next_policy = trace.output_policy();
            const auto& r = rec.step(StepKind::Improve, std::move(next), std::move(next_policy), trace.h_evals,
                                     &trace, all);
            if (!r.policy_changed && r.residual <= threshold)
                return rec.finish(Termination::PolicyStableAndConverged);
        } else {
            ValueFunction next = apply_T_mu(model, rec.policy(), rec.value());
            rec.step(StepKind::Evaluate, std::move(next), rec.policy(), model.num_states(), nullptr, all);
        }
    }
    return rec.finish(Termination::MaxIters);
}

RunReport async_opi_run(const Model& model, std::span<const double> J0, const Policy& mu0,
                        const Schedule& schedule, const StatePartitionSchedule& partition,
                        const RunOptions& opts, const AsyncOptions& async) {
    if (!(opts.epsilon > 0.0))
        throw ValidationError("epsilon must be positive");
    if (opts.init_mode == InitMode::Unchecked && !async.force)
        throw UnsupportedModeError(
            "asynchronous policy iteration requires T_mu0 J0 <= J0 even for discounted models; "
            "use validate or auto-shift, or force the unchecked start");
    const std::size_t n = model.num_states();
    for (const auto& block : partition.blocks()) {
        for (StateId x : block) {
            if (x >= n)
                throw ValidationError("partition does not match the model's state count");
        }
    }
    if (partition.mask(0).size() != n)
        throw ValidationError("partition does not match the model's state count");

    const auto order = resolve_agent_order(model, opts.agent_order);
    InitialValue init = ensure_initial_condition(model, J0, mu0, opts.init_mode);
    const double threshold = residual_threshold(opts.epsilon, model.contraction_modulus());
    std::vector<std::vector<bool>> masks;
    for (std::size_t b = 0; b < partition.num_blocks(); ++b)
        masks.push_back(partition.mask(b));

    detail::RunRecorder rec(model, opts, "async_opi", std::move(init.value), mu0, order);
    rec.report().initial_shift = init.shift;
    rec.report().warnings = std::move(init.warnings);
    auto& events = rec.report().events;
    const std::vector<bool> all;

    std::size_t improvements = 0;
    std::size_t stable_streak = 0;
    std::deque<std::size_t> recent;  // iteration indices of the last num_blocks improvement steps
    for (std::size_t k = 0; k < opts.max_iters; ++k) {
        if (schedule.improves_at(k)) {
            const std::size_t b = partition.block_for_improvement(improvements++);
            events.push_back({k, b, StepKind::Improve, partition.block(b)});
            SweepTrace trace = agent_sweep(model, rec.value(), rec.policy(), order, masks[b]);
            ValueFunction next = trace.output_value();
            Policy next_policy = trace.output_policy();
            const auto& r = rec.step(StepKind::Improve, std::move(next), std::move(next_policy), trace.h_evals,
                                     &trace, masks[b], b);
            stable_streak = r.policy_changed ? 0 : stable_streak + 1;
            recent.push_back(k);
            if (recent.size() > partition.num_blocks())
                recent.pop_front();
            if (stable_streak >= partition.num_blocks()) {
                const auto& its = rec.report().iterations;
                double worst = 0.0;
                for (std::size_t j = recent.front(); j <= k; ++j)
                    worst = std::max(worst, its[j].residual);
                if (worst <= threshold)
                    return rec.finish(Termination::PolicyStableAndConverged);
            }
        } else if (async.restrict_eval) {
            const std::size_t b = partition.block_for_improvement(improvements == 0 ? 0 : improvements - 1);
            events.push_back({k, b, StepKind::EvaluateRestricted, partition.block(b)});
            ValueFunction next = rec.value();
            for (StateId x : partition.block(b))
                next[x] = model.eval_h(x, rec.policy()[x], rec.value());
            rec.step(StepKind::EvaluateRestricted, std::move(next), rec.policy(), partition.block(b).size(),
                     nullptr, masks[b], b);
        } else {
            for (std::size_t b = 0; b < partition.num_blocks(); ++b)
                events.push_back({k, b, StepKind::Evaluate, partition.block(b)});
            ValueFunction next = apply_T_mu(model, rec.policy(), rec.value());
            rec.step(StepKind::Evaluate, std::move(next), rec.policy(), n, nullptr, all);
        }
    }
    return rec.finish(Termination::MaxIters);
}

} // namespace maavi
