#pragma once

#include <span>
#include <vector>

#include "maavi/abstract_dp.hpp"
#include "maavi/run_report.hpp"

namespace maavi {

/// Result of sub-step l of a sweep: J-hat_l and the policy with components 1..l updated.
struct SweepStep {
    std::size_t agent = 0;
    ValueFunction value;
    Policy policy;
};

/// Intermediate chain of one agent-by-agent sweep from (J, mu) to (J-tilde, mu-tilde).
struct SweepTrace {
    ValueFunction input_value;
    Policy input_policy;
    std::vector<SweepStep> chain;
    std::uint64_t h_evals = 0;
    /// States the sweep updated; empty means all states.
    std::vector<bool> active;

    const ValueFunction& output_value() const { return chain.empty() ? input_value : chain.back().value; }
    const Policy& output_policy() const { return chain.empty() ? input_policy : chain.back().policy; }
};

/// Identity permutation when `order` is empty; otherwise validates it as a permutation of 0..m-1.
std::vector<std::size_t> resolve_agent_order(const Model& model, std::span<const std::size_t> order);

/**
One agent-by-agent sweep. For each agent l in `order`, every state minimizes
H(x, ., J-hat_{l-1}) over the component constraint set built from the current
partially updated tuple, so all states at sub-step l read the same J-hat_{l-1}.

Ties within kCompareTol keep the incumbent component if it is among the
minimizers, otherwise take the smallest index in U(x). The recorded value is H
at the chosen control.

When `active` is nonempty only states with active[x] set are updated; the
others keep J(x) and mu(x) through every sub-step.
*/
SweepTrace agent_sweep(const Model& model, std::span<const double> J, const Policy& mu,
                       std::span<const std::size_t> order = {}, const std::vector<bool>& active = {});

struct InitialValue {
    ValueFunction value;
    double shift = 0.0;
    std::vector<std::string> warnings;
};

/**
Establishes T_{mu0} J0 <= J0. Validate mode checks it (InitialConditionError
otherwise); auto-shift adds the smallest constant that makes it hold, which
requires a discounted model; unchecked passes J0 through with a warning.
*/
InitialValue ensure_initial_condition(const Model& model, std::span<const double> J0, const Policy& mu0,
                                      InitMode mode);

/// Agent-by-agent value iteration from (J0, mu0).
RunReport multiagent_vi_run(const Model& model, std::span<const double> J0, const Policy& mu0,
                            const RunOptions& opts);

/// Standard value iteration J <- TJ with greedy policies. Ignores opts.init_mode.
RunReport standard_vi_run(const Model& model, std::span<const double> J0, const Policy& mu0,
                          const RunOptions& opts);

/**
Verifies T_mu-tilde J-tilde <= J-tilde = J-hat_m <= ... <= J-hat_1 <= T_mu J <= J
componentwise within kCompareTol. When the input pair violates T_mu J <= J the
precondition is reported and the chain is not checked. For partial sweeps the
link J-hat_1 <= T_mu J is replaced by J-hat_1 <= J at states left untouched.
*/
PropertyReport monotone_chain_check(const SweepTrace& trace, const Model& model);

/// Residual threshold epsilon (1 - alpha) / alpha that certifies ||J - J_mu|| <= epsilon.
double residual_threshold(double epsilon, double alpha);

} // namespace maavi
