#include "maavi/multiagent_vi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "maavi/problem_models.hpp"
#include "run_recorder.hpp"

namespace maavi {

namespace {

void require_length(const Model& model, std::span<const double> J) {
    if (J.size() != model.num_states())
        throw ValidationError("value function has " + std::to_string(J.size()) + " entries, model has " +
                              std::to_string(model.num_states()) + " states");
}

void require_options(const RunOptions& opts) {
    if (!(opts.epsilon > 0.0))
        throw ValidationError("epsilon must be positive");
}

} // namespace

std::vector<std::size_t> resolve_agent_order(const Model& model, std::span<const std::size_t> order) {
    const std::size_t m = model.num_agents();
    std::vector<std::size_t> out(order.begin(), order.end());
    if (out.empty()) {
        out.resize(m);
        for (std::size_t i = 0; i < m; ++i)
            out[i] = i;
        return out;
    }
    std::vector<std::size_t> sorted = out;
    std::sort(sorted.begin(), sorted.end());
    bool ok = sorted.size() == m;
    for (std::size_t i = 0; ok && i < m; ++i)
        ok = sorted[i] == i;
    if (!ok)
        throw ValidationError("agent order must be a permutation of 0.." + std::to_string(m - 1));
    return out;
}

double residual_threshold(double epsilon, double alpha) {
    if (!(alpha < 1.0))
        throw ValidationError("contraction modulus must be below 1, got " + std::to_string(alpha));
    if (alpha <= 0.0)
        return std::numeric_limits<double>::infinity();
    return epsilon * (1.0 - alpha) / alpha;
}

SweepTrace agent_sweep(const Model& model, std::span<const double> J, const Policy& mu,
                       std::span<const std::size_t> order, const std::vector<bool>& active) {
    model.require_feasible(mu);
    require_length(model, J);
    const std::size_t n = model.num_states();
    if (!active.empty() && active.size() != n)
        throw ValidationError("active state mask has the wrong length");
    const auto agents = resolve_agent_order(model, order);

    SweepTrace trace;
    trace.input_value.assign(J.begin(), J.end());
    trace.input_policy = mu;
    trace.active = active;

    const ValueFunction* prev = &trace.input_value;
    const Policy* current = &trace.input_policy;
    std::vector<double> q;
    for (std::size_t agent : agents) {
        SweepStep step{agent, *prev, *current};
        for (StateId x = 0; x < n; ++x) {
            if (!active.empty() && !active[x])
                continue;
            const std::size_t incumbent = (*current)[x];
            const auto set = component_constraint_set(model, x, agent, incumbent);
            const auto& cands = set.control_indices;
            q.resize(cands.size());
            double best = std::numeric_limits<double>::infinity();
            double incumbent_q = 0.0;
            for (std::size_t i = 0; i < cands.size(); ++i) {
                q[i] = model.eval_h(x, cands[i], *prev);
                best = std::min(best, q[i]);
                if (cands[i] == incumbent)
                    incumbent_q = q[i];
            }
            trace.h_evals += cands.size();
            std::size_t pick = incumbent;
            double pick_q = incumbent_q;
            if (incumbent_q > best + kCompareTol) {
                std::size_t i = 0;
                while (q[i] > best + kCompareTol)
                    ++i;
                pick = cands[i];
                pick_q = q[i];
            }
            step.value[x] = pick_q;
            step.policy[x] = pick;
        }
        trace.chain.push_back(std::move(step));
        prev = &trace.chain.back().value;
        current = &trace.chain.back().policy;
    }
    return trace;
}

InitialValue ensure_initial_condition(const Model& model, std::span<const double> J0, const Policy& mu0,
                                      InitMode mode) {
    require_length(model, J0);
    model.require_feasible(mu0);
    InitialValue out;
    out.value.assign(J0.begin(), J0.end());

    if (mode == InitMode::Unchecked) {
        out.warnings.push_back(
            "initial condition T_mu0 J0 <= J0 not checked: convergence is not guaranteed without it "
            "(Williams-Baird counterexamples for asynchronous policy iteration)");
        return out;
    }
    if (mode == InitMode::AutoShift && !model.discount())
        throw UnsupportedModeError("auto-shift needs a discounted model; use validate mode with a suitable J0");

    const ValueFunction TJ = apply_T_mu(model, mu0, J0);
    StateId worst = 0;
    double excess = -std::numeric_limits<double>::infinity();
    for (StateId x = 0; x < TJ.size(); ++x) {
        if (TJ[x] - J0[x] > excess) {
            excess = TJ[x] - J0[x];
            worst = x;
        }
    }
    if (excess <= kCompareTol)
        return out;
    if (mode == InitMode::Validate)
        throw InitialConditionError(worst, excess);

    // T_mu(J + c) = T_mu J + alpha c <= J + c  iff  c >= (T_mu J - J) / (1 - alpha).
    const double alpha = *model.discount();
    out.shift = excess / (1.0 - alpha);
    for (auto& v : out.value)
        v += out.shift;
    return out;
}

RunReport multiagent_vi_run(const Model& model, std::span<const double> J0, const Policy& mu0,
                            const RunOptions& opts) {
    require_options(opts);
    const auto order = resolve_agent_order(model, opts.agent_order);
    InitialValue init = ensure_initial_condition(model, J0, mu0, opts.init_mode);
    const double threshold = residual_threshold(opts.epsilon, model.contraction_modulus());

    detail::RunRecorder rec(model, opts, "mavi", std::move(init.value), mu0, order);
    rec.report().initial_shift = init.shift;
    rec.report().warnings = std::move(init.warnings);
    const std::vector<bool> all;
    for (std::size_t k = 0; k < opts.max_iters; ++k) {
        SweepTrace trace = agent_sweep(model, rec.value(), rec.policy(), order);
        ValueFunction next = trace.output_value();
        Policy next_policy = trace.output_policy();
        const auto& r = rec.step(StepKind::Improve, std::move(next), std::move(next_policy), trace.h_evals, &trace,
                                 all);
        if (!r.policy_changed && r.residual <= threshold)
            return rec.finish(Termination::PolicyStableAndConverged);
    }
    return rec.finish(Termination::MaxIters);
}

RunReport standard_vi_run(const Model& model, std::span<const double> J0, const Policy& mu0,
                          const RunOptions& opts) {
    require_options(opts);
    require_length(model, J0);
    model.require_feasible(mu0);
    const double threshold = residual_threshold(opts.epsilon, model.contraction_modulus());
    detail::RunRecorder rec(model, opts, "vi", ValueFunction(J0.begin(), J0.end()), mu0, {});
    const std::vector<bool> all;
    for (std::size_t k = 0; k < opts.max_iters; ++k) {
        GreedyResult g = apply_T(model, rec.value());
        const auto& r = rec.step(StepKind::Greedy, std::move(g.value), std::move(g.policy), g.h_evals, nullptr, all);
        if (!r.policy_changed && r.residual <= threshold)
            return rec.finish(Termination::PolicyStableAndConverged);
    }
    return rec.finish(Termination::MaxIters);
}

PropertyReport monotone_chain_check(const SweepTrace& trace, const Model& model) {
    PropertyReport report;
    const std::size_t n = model.num_states();
    const ValueFunction& J = trace.input_value;
    const ValueFunction TmuJ = apply_T_mu(model, trace.input_policy, J);

    auto link = [&](const ValueFunction& lower, const ValueFunction& upper, const std::string& name,
                    const std::vector<bool>* only = nullptr) {
        for (StateId x = 0; x < n; ++x) {
            if (only && !(*only)[x])
                continue;
            ++report.samples_checked;
            if (lower[x] > upper[x] + kCompareTol)
                report.add({x, name, lower[x] - upper[x]});
        }
    };

    link(TmuJ, J, "precondition T_mu J <= J");
    if (!report.passed) {
        report.notes.push_back("input pair violates T_mu J <= J; monotone chain not checked");
        return report;
    }
    if (trace.chain.empty())
        return report;

    if (trace.active.empty()) {
        link(trace.chain.front().value, TmuJ, "J_hat_1 <= T_mu J");
    } else {
        std::vector<bool> inactive(n);
        for (StateId x = 0; x < n; ++x)
            inactive[x] = !trace.active[x];
        link(trace.chain.front().value, TmuJ, "J_hat_1 <= T_mu J", &trace.active);
        link(trace.chain.front().value, J, "J_hat_1 <= J (inactive state)", &inactive);
    }
    for (std::size_t l = 1; l < trace.chain.size(); ++l)
        link(trace.chain[l].value, trace.chain[l - 1].value,
             "J_hat_" + std::to_string(l + 1) + " <= J_hat_" + std::to_string(l));
    const ValueFunction leftmost = apply_T_mu(model, trace.output_policy(), trace.output_value());
    link(leftmost, trace.output_value(), "T_mu~ J~ <= J~");
    return report;
}

} // namespace maavi
