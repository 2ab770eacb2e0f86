#include "maavi/abstract_dp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "random.hpp"

namespace maavi {

namespace {

void require_length(const Model& model, std::span<const double> J) {
    if (J.size() != model.num_states())
        throw ValidationError("value function has " + std::to_string(J.size()) + " entries, model has " +
                              std::to_string(model.num_states()) + " states");
}

ValueFunction random_value(detail::Rng& rng, const Model& model, const std::vector<bool>& pinned) {
    ValueFunction J(model.num_states());
    const auto& v = model.weights();
    for (StateId x = 0; x < J.size(); ++x)
        J[x] = pinned[x] ? 0.0 : rng.uniform(-1.0, 1.0) * v[x];
    return J;
}

Policy random_policy(detail::Rng& rng, const Model& model) {
    Policy mu(std::vector<std::size_t>(model.num_states()));
    for (StateId x = 0; x < model.num_states(); ++x)
        mu[x] = rng.below(model.controls(x).size());
    return mu;
}

} // namespace

ValueFunction apply_T_mu(const Model& model, const Policy& mu, std::span<const double> J) {
    model.require_feasible(mu);
    require_length(model, J);
    ValueFunction out(model.num_states());
    for (StateId x = 0; x < out.size(); ++x)
        out[x] = model.eval_h(x, mu[x], J);
    return out;
}

GreedyResult apply_T(const Model& model, std::span<const double> J) {
    require_length(model, J);
    const std::size_t n = model.num_states();
    GreedyResult res;
    res.value.resize(n);
    res.policy.choice.resize(n);
    std::vector<double> q;
    for (StateId x = 0; x < n; ++x) {
        const std::size_t count = model.controls(x).size();
        q.resize(count);
        double best = std::numeric_limits<double>::infinity();
        for (std::size_t c = 0; c < count; ++c) {
            q[c] = model.eval_h(x, c, J);
            best = std::min(best, q[c]);
        }
        res.h_evals += count;
        std::size_t pick = 0;
        while (q[pick] > best + kCompareTol)
            ++pick;
        res.value[x] = best;
        res.policy[x] = pick;
    }
    return res;
}

std::vector<std::pair<ControlTuple, double>> compute_q_factors(const Model& model, StateId x,
                                                               std::span<const double> J) {
    require_length(model, J);
    if (x >= model.num_states())
        throw ValidationError("state " + std::to_string(x) + " out of range");
    std::vector<std::pair<ControlTuple, double>> out;
    auto list = model.controls(x);
    out.reserve(list.size());
    for (std::size_t c = 0; c < list.size(); ++c)
        out.emplace_back(list[c], model.eval_h(x, c, J));
    return out;
}

double weighted_sup_norm(std::span<const double> J, const WeightVector& v) {
    if (J.size() != v.size())
        throw ValidationError("norm: value function and weights differ in length");
    double norm = 0.0;
    for (std::size_t x = 0; x < J.size(); ++x)
        norm = std::max(norm, std::abs(J[x]) / v[x]);
    return norm;
}

double weighted_sup_distance(std::span<const double> J, std::span<const double> Jp, const WeightVector& v) {
    if (J.size() != Jp.size() || J.size() != v.size())
        throw ValidationError("norm: value functions and weights differ in length");
    double norm = 0.0;
    for (std::size_t x = 0; x < J.size(); ++x)
        norm = std::max(norm, std::abs(J[x] - Jp[x]) / v[x]);
    return norm;
}

bool leq(std::span<const double> J, std::span<const double> Jp, double tol) {
    for (std::size_t x = 0; x < J.size(); ++x) {
        if (J[x] > Jp[x] + tol)
            return false;
    }
    return true;
}

PropertyReport check_monotonicity(const Model& model, std::uint64_t trials, std::uint64_t seed) {
    if (trials == 0)
        throw ValidationError("check_monotonicity: trials must be at least 1");
    detail::Rng rng(seed);
    const std::vector<bool> none(model.num_states(), false);
    PropertyReport report;
    for (std::uint64_t t = 0; t < trials; ++t) {
        ValueFunction J = random_value(rng, model, none);
        ValueFunction Jp = J;
        for (StateId y = 0; y < Jp.size(); ++y) {
            if (rng.coin(0.5))
                Jp[y] += rng.uniform() * model.weights()[y];
        }
        for (StateId x = 0; x < model.num_states(); ++x) {
            for (std::size_t c = 0; c < model.controls(x).size(); ++c) {
                double lo = model.eval_h(x, c, J);
                double hi = model.eval_h(x, c, Jp);
                ++report.samples_checked;
                if (lo > hi + kCompareTol)
                    report.add({x, "H(x,u,J) > H(x,u,J') with J <= J', u = " + to_string(model.control(x, c)),
                                lo - hi});
            }
        }
    }
    return report;
}

PropertyReport check_contraction(const Model& model, const ContractionCheckOptions& opts) {
    if (opts.trials == 0)
        throw ValidationError("check_contraction: trials must be at least 1");
    const std::size_t n = model.num_states();
    std::vector<bool> pinned(n, false);
    for (StateId x : opts.pinned_states) {
        if (x >= n)
            throw ValidationError("pinned state out of range");
        pinned[x] = true;
    }
    const double alpha = model.contraction_modulus();
    const auto& v = model.weights();
    detail::Rng rng(opts.seed);
    PropertyReport report;
    std::uint64_t skipped = 0;

    auto trial = [&](const Policy& mu, std::uint64_t t) {
        ValueFunction J = random_value(rng, model, pinned);
        ValueFunction Jp;
        if (t % 4 == 0) {
            // Aligned shift along v: the direction where the weighted bound is tightest.
            double c = rng.uniform(0.1, 2.0);
            Jp = J;
            for (StateId x = 0; x < n; ++x)
                Jp[x] = pinned[x] ? 0.0 : J[x] + c * v[x];
        } else {
            Jp = random_value(rng, model, pinned);
        }
        double den = weighted_sup_distance(J, Jp, v);
        ++report.samples_checked;
        if (den == 0.0) {
            ++skipped;
            return;
        }
        ValueFunction TJ = apply_T_mu(model, mu, J);
        ValueFunction TJp = apply_T_mu(model, mu, Jp);
        double num = weighted_sup_distance(TJ, TJp, v);
        double ratio = num / den;
        report.worst_ratio = std::max(report.worst_ratio, ratio);
        if (num > alpha * den + kCompareTol) {
            StateId arg = 0;
            double worst = -1.0;
            for (StateId x = 0; x < n; ++x) {
                double r = std::abs(TJ[x] - TJp[x]) / v[x];
                if (r > worst) {
                    worst = r;
                    arg = x;
                }
            }
            report.add({arg, "contraction ratio exceeds modulus " + std::to_string(alpha), ratio});
        }
    };

    if (opts.exhaustive_policies) {
        std::uint64_t count = policy_count(model);
        if (count > opts.policy_cap)
            throw PolicyCapError(count, opts.policy_cap);
        std::uint64_t t = 0;
        for (PolicyEnumerator it(model); !it.done(); it.next()) {
            for (std::uint64_t i = 0; i < opts.trials; ++i)
                trial(it.current(), t++);
        }
    } else {
        for (std::uint64_t t = 0; t < opts.trials; ++t)
            trial(random_policy(rng, model), t);
    }
    if (skipped > 0)
        report.notes.push_back("skipped " + std::to_string(skipped) + " degenerate pairs with J = J'");
    return report;
}

PropertyReport check_contraction(const Model& model, std::uint64_t trials, std::uint64_t seed) {
    ContractionCheckOptions opts;
    opts.trials = trials;
    opts.seed = seed;
    return check_contraction(model, opts);
}

} // namespace maavi
