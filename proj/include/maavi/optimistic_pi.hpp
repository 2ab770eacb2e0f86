#pragma once

#include <set>
#include <vector>

#include "maavi/multiagent_vi.hpp"

namespace maavi {

/// Iterations K at which a policy improvement sweep runs; all others are T_mu steps.
class Schedule {
public:
    enum class Kind { EveryQ, ExplicitSet };

    /// K = {0, q, 2q, ...}.
    static Schedule every_q(std::size_t q, std::size_t horizon);
    /// K = the listed iterations; must contain at least one iteration below the horizon.
    static Schedule explicit_set(std::set<std::size_t> iterations, std::size_t horizon);

    Kind kind() const { return kind_; }
    std::size_t q() const { return q_; }
    std::size_t horizon() const { return horizon_; }
    bool improves_at(std::size_t k) const;
    /// Elements of K below the horizon.
    std::vector<std::size_t> improvement_iterations() const;

private:
    Schedule() = default;
    Kind kind_ = Kind::EveryQ;
    std::size_t q_ = 1;
    std::size_t horizon_ = 0;
    std::set<std::size_t> set_;
};

/**
Disjoint blocks covering the states, one per logical processor, and the cyclic
order in which improvement steps activate them.
*/
class StatePartitionSchedule {
public:
    /// Validates disjointness, coverage and that the activation order visits every block.
    StatePartitionSchedule(std::size_t num_states, std::vector<std::vector<StateId>> blocks,
                           std::vector<std::size_t> activation = {});

    /// Contiguous blocks of near-equal size, activated round-robin.
    static StatePartitionSchedule contiguous(std::size_t num_states, std::size_t num_blocks);

    std::size_t num_blocks() const { return blocks_.size(); }
    const std::vector<StateId>& block(std::size_t b) const { return blocks_[b]; }
    const std::vector<std::vector<StateId>>& blocks() const { return blocks_; }
    const std::vector<std::size_t>& activation() const { return activation_; }

    /// Block activated by the j-th improvement step (j counts from 0).
    std::size_t block_for_improvement(std::size_t j) const { return activation_[j % activation_.size()]; }
    std::vector<bool> mask(std::size_t b) const;

private:
    std::size_t num_states_;
    std::vector<std::vector<StateId>> blocks_;
    std::vector<std::size_t> activation_;
};

struct AsyncOptions {
    /// Apply evaluation steps only to the most recently activated block.
    bool restrict_eval = false;
    /// Allow unchecked initial conditions.
    bool force = false;
};

/**
Multiagent optimistic PI: an agent-by-agent sweep at k in K and J <- T_mu J
otherwise. Terminates at an improvement step that leaves the policy unchanged
with residual below epsilon (1 - alpha) / alpha.
*/
RunReport optimistic_pi_run(const Model& model, std::span<const double> J0, const Policy& mu0,
                            const Schedule& schedule, const RunOptions& opts);

/**
Asynchronous optimistic PI on a simulated multi-processor timeline. At k in K
only the activated block is improved and every other state keeps J and mu
bit-for-bit. Evaluation steps update all states unless restrict_eval is set.
Terminates once the last num_blocks improvement steps changed no policy
component and every residual since the first of them is below the threshold.
The event log in the report lists every processor action.
*/
RunReport async_opi_run(const Model& model, std::span<const double> J0, const Policy& mu0,
                        const Schedule& schedule, const StatePartitionSchedule& partition,
                        const RunOptions& opts, const AsyncOptions& async = {});

} // namespace maavi
