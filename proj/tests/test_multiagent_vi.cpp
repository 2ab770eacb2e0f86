#include "doctest.h"

#include <array>

#include "support.hpp"

#include "maavi/multiagent_vi.hpp"
#include "maavi/oracles.hpp"

using namespace maavi;
using testing::make_mdp;

namespace {

ValueFunction shifted(const ValueFunction& J, double c) {
    ValueFunction out = J;
    for (auto& v : out)
        v += c;
    return out;
}

RunOptions auto_shift(double epsilon = 1e-9) {
    RunOptions opts;
    opts.init_mode = InitMode::AutoShift;
    opts.epsilon = epsilon;
    return opts;
}

} // namespace

TEST_CASE("agent_sweep with one agent equals apply_T") {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
        const auto model = testing::generated(seed % 2 ? GeneratorKind::Cartesian : GeneratorKind::RandomGeneral, 5, 1,
                                              4, 0.9, seed);
        ValueFunction J(5);
        for (StateId x = 0; x < 5; ++x)
            J[x] = std::cos(seed + 2.0 * x) * 10.0;
        const auto trace = agent_sweep(model, J, first_control_policy(model));
        const auto g = apply_T(model, J);
        REQUIRE(trace.chain.size() == 1);
        CHECK(trace.output_value() == g.value);
        CHECK(trace.output_policy() == g.policy);
    }
}

TEST_CASE("agent_sweep on simplex sets keeps the policy and applies T_mu once per agent") {
    const auto model = testing::generated(GeneratorKind::SimplexCoupled, 4, 3, 2, 0.9, 6);
    const Policy mu({2, 0, 1, 1});
    const ValueFunction J{3.0, -1.0, 0.5, 2.0};
    const auto trace = agent_sweep(model, J, mu);
    CHECK(trace.output_policy() == mu);
    ValueFunction expect = J;
    for (int l = 0; l < 3; ++l)
        expect = apply_T_mu(model, mu, expect);
    CHECK(trace.output_value() == expect);
    CHECK(trace.h_evals == 4 * 3);
}

TEST_CASE("agent_sweep on T1 matches a step-by-step hand execution") {
    const auto model = testing::load_t1();
    const auto raw = testing::read_raw(testing::data_path("t1.json"));
    auto h = [&](StateId x, std::size_t c, const ValueFunction& J) {
        return raw.p[x][c][0] * (raw.g[x][c][0] + raw.alpha * J[0]) +
               raw.p[x][c][1] * (raw.g[x][c][1] + raw.alpha * J[1]);
    };
    // Controls of T1: index 0 = (0,0), 1 = (0,1), 2 = (1,0), 3 = (1,1).
    const Policy mu0({0, 0});
    const auto init = ensure_initial_condition(model, ValueFunction(2, 0.0), mu0, InitMode::AutoShift);
    const double c = std::max(h(0, 0, {0, 0}), h(1, 0, {0, 0})) / (1.0 - raw.alpha);
    CHECK(init.shift == doctest::Approx(c).epsilon(1e-14));
    const ValueFunction J0{c, c};

    // Agent 0 chooses between (0,0) and (1,0), reading J0.
    const double s0_a = h(0, 0, J0), s0_b = h(0, 2, J0);
    const double s1_a = h(1, 0, J0), s1_b = h(1, 2, J0);
    const ValueFunction J1{std::min(s0_a, s0_b), std::min(s1_a, s1_b)};
    const int first0 = s0_b < s0_a ? 1 : 0;
    const int first1 = s1_b < s1_a ? 1 : 0;

    // Agent 1 chooses the second slot with the first slot fixed, reading J1.
    const std::size_t base0 = first0 ? 2 : 0, base1 = first1 ? 2 : 0;
    const double t0_a = h(0, base0, J1), t0_b = h(0, base0 + 1, J1);
    const double t1_a = h(1, base1, J1), t1_b = h(1, base1 + 1, J1);
    const ValueFunction J2{std::min(t0_a, t0_b), std::min(t1_a, t1_b)};
    const Policy mu2({t0_b < t0_a ? base0 + 1 : base0, t1_b < t1_a ? base1 + 1 : base1});

    const auto trace = agent_sweep(model, init.value, mu0);
    REQUIRE(trace.chain.size() == 2);
    for (StateId x = 0; x < 2; ++x) {
        CHECK(trace.chain[0].value[x] == doctest::Approx(J1[x]).epsilon(1e-14));
        CHECK(trace.chain[1].value[x] == doctest::Approx(J2[x]).epsilon(1e-14));
    }
    CHECK(trace.chain[0].policy == Policy({base0, base1}));
    CHECK(trace.chain[1].policy == mu2);
    CHECK(trace.h_evals == 8);
}

TEST_CASE("agent_sweep counts n s m evaluations on Cartesian models") {
    const auto model = testing::generated(GeneratorKind::Cartesian, 4, 4, 3, 0.9, 2);
    const auto trace = agent_sweep(model, ValueFunction(4, 0.0), first_control_policy(model));
    CHECK(trace.h_evals == 4 * 3 * 4);
}

TEST_CASE("agent_sweep counts evaluations as the sum of component constraint set sizes") {
    const auto model = testing::generated(GeneratorKind::RandomGeneral, 4, 3, 3, 0.9, 12);
    const Policy mu = first_control_policy(model);
    const auto trace = agent_sweep(model, ValueFunction(4, 1.0), mu);
    std::uint64_t expect = 0;
    // The reference tuple of each sub-step is the previous policy in the chain.
    const Policy* prev = &trace.input_policy;
    for (const auto& step : trace.chain) {
        for (StateId x = 0; x < 4; ++x)
            expect += component_constraint_set(model, x, step.agent, (*prev)[x]).admissible.size();
        prev = &step.policy;
    }
    CHECK(trace.h_evals == expect);
}

TEST_CASE("agent_sweep keeps every intermediate tuple feasible and honours the agent order") {
    const auto model = testing::generated(GeneratorKind::RandomGeneral, 4, 3, 3, 0.9, 3);
    const std::vector<std::size_t> order{2, 0, 1};
    const auto trace = agent_sweep(model, ValueFunction(4, 0.0), first_control_policy(model), order);
    REQUIRE(trace.chain.size() == 3);
    for (std::size_t i = 0; i < 3; ++i) {
        CHECK(trace.chain[i].agent == order[i]);
        CHECK_NOTHROW(model.require_feasible(trace.chain[i].policy));
    }
    CHECK_THROWS_AS(agent_sweep(model, ValueFunction(4, 0.0), first_control_policy(model),
                                std::vector<std::size_t>{0, 0, 1}),
                    ValidationError);
    CHECK_THROWS_AS(agent_sweep(model, ValueFunction(4, 0.0), Policy({99, 0, 0, 0})), FeasibilityError);
}

TEST_CASE("agent_sweep leaves inactive states untouched") {
    const auto model = testing::generated(GeneratorKind::Cartesian, 5, 2, 3, 0.9, 4);
    const ValueFunction J{1.0, 2.0, 3.0, 4.0, 5.0};
    const Policy mu({1, 2, 3, 4, 5});
    const std::vector<bool> active{true, false, true, false, false};
    const auto trace = agent_sweep(model, J, mu, {}, active);
    for (const auto& step : trace.chain) {
        for (StateId x : {1, 3, 4}) {
            CHECK(step.value[x] == J[x]);
            CHECK(step.policy[x] == mu[x]);
        }
    }
    // The first sub-step reads J everywhere, so active states match a full sweep there.
    const auto full = agent_sweep(model, J, mu);
    for (StateId x : {0, 2}) {
        CHECK(trace.chain[0].value[x] == full.chain[0].value[x]);
        CHECK(trace.chain[0].policy[x] == full.chain[0].policy[x]);
    }
    CHECK(trace.h_evals == 2 * 2 * 3);
}

TEST_CASE("ensure_initial_condition") {
    const auto model = testing::load_t1();
    const Policy mu0({0, 0});

    // Already satisfied: unchanged.
    const ValueFunction big{100.0, 100.0};
    auto r = ensure_initial_condition(model, big, mu0, InitMode::Validate);
    CHECK(r.value == big);
    CHECK(r.shift == 0.0);
    r = ensure_initial_condition(model, big, mu0, InitMode::AutoShift);
    CHECK(r.shift == 0.0);

    // Auto-shift from zero restores T_mu J <= J.
    r = ensure_initial_condition(model, ValueFunction(2, 0.0), mu0, InitMode::AutoShift);
    CHECK(r.shift > 0.0);
    CHECK(leq(apply_T_mu(model, mu0, r.value), r.value));
    // The shift is the smallest: the condition is tight at some state.
    const auto T = apply_T_mu(model, mu0, r.value);
    CHECK(std::max(r.value[0] - T[0], r.value[1] - T[1]) >= 0.0);
    CHECK(std::min(r.value[0] - T[0], r.value[1] - T[1]) <= 1e-12);

    // Validate mode names a violating state.
    try {
        ensure_initial_condition(model, ValueFunction(2, 0.0), mu0, InitMode::Validate);
        FAIL("expected InitialConditionError");
    } catch (const InitialConditionError& e) {
        CHECK(e.excess() > 0.0);
        CHECK(e.state() == 1);
    }

    // Unchecked passes through with a warning.
    r = ensure_initial_condition(model, ValueFunction(2, 0.0), mu0, InitMode::Unchecked);
    CHECK(r.value == ValueFunction(2, 0.0));
    REQUIRE(r.warnings.size() == 1);
    CHECK(r.warnings[0].find("Williams-Baird") != std::string::npos);

    // Auto-shift needs a discount factor.
    const auto ssp = testing::generated(GeneratorKind::RandomSsp, 3, 2, 2, 0.9, 1);
    CHECK_THROWS_AS(ensure_initial_condition(ssp, ValueFunction(3, 0.0), first_control_policy(ssp),
                                             InitMode::AutoShift),
                    UnsupportedModeError);
    CHECK_NOTHROW(ensure_initial_condition(ssp, upper_bound_start(ssp), first_control_policy(ssp), InitMode::Validate));
}

TEST_CASE("multiagent_vi_run on a zero-cost model stops at once with the initial policy") {
    const auto model = testing::zero_cost_model(3, 2, 3);
    const Policy mu0({4, 1, 8});
    const auto r = multiagent_vi_run(model, ValueFunction(3, 0.0), mu0, RunOptions{});
    CHECK(r.converged());
    CHECK(r.iterations.size() == 1);
    CHECK(r.final_policy == mu0);
    CHECK(r.final_value == ValueFunction(3, 0.0));
    CHECK(r.stabilization_index == 0u);
}

TEST_CASE("multiagent_vi_run on T1 reaches an agent-by-agent optimal policy") {
    const auto model = testing::load_t1();
    const auto r = multiagent_vi_run(model, ValueFunction(2, 0.0), first_control_policy(model), auto_shift());
    CHECK(r.converged());
    CHECK(r.algorithm == "mavi");
    CHECK(r.final_policy == Policy({0, 3}));
    CHECK(is_agent_by_agent_optimal(model, r.final_policy).optimal);
    CHECK(weighted_sup_distance(r.final_value, policy_cost(model, r.final_policy), model.weights()) <= 1e-9);
    // Limit differs from the global optimum on this instance.
    CHECK(r.final_value[0] > 1.3201217639616996 + 0.5);
    for (std::size_t i = 0; i < r.iterations.size(); ++i) {
        CHECK(r.iterations[i].k == i);
        CHECK(r.iterations[i].h_evals == 8);
        CHECK(r.iterations[i].h_evals_total == 8 * (i + 1));
    }
}

TEST_CASE("multiagent_vi_run on simplex models keeps mu0 and converges to its cost") {
    const auto model = testing::generated(GeneratorKind::SimplexCoupled, 4, 3, 2, 0.9, 5);
    const Policy mu0({1, 2, 0, 1});
    const auto r = multiagent_vi_run(model, ValueFunction(4, 0.0), mu0, auto_shift());
    CHECK(r.converged());
    CHECK(r.final_policy == mu0);
    CHECK(r.stabilization_index == 0u);
    CHECK(testing::max_abs_diff(r.final_value, policy_cost(model, mu0)) <= 1e-8);
}

TEST_CASE("multiagent_vi_run respects the iteration limit and epsilon") {
    const auto model = testing::load_t1();
    RunOptions opts = auto_shift();
    opts.max_iters = 3;
    const auto r = multiagent_vi_run(model, ValueFunction(2, 0.0), first_control_policy(model), opts);
    CHECK(r.termination == Termination::MaxIters);
    CHECK(r.iterations.size() == 3);
    CHECK_FALSE(r.stabilization_index);
    opts.epsilon = 0.0;
    CHECK_THROWS_AS(multiagent_vi_run(model, ValueFunction(2, 0.0), first_control_policy(model), opts),
                    ValidationError);
    opts = RunOptions{};
    CHECK_THROWS_AS(multiagent_vi_run(model, ValueFunction(2, 0.0), first_control_policy(model), opts),
                    InitialConditionError);
}

TEST_CASE("residual_threshold") {
    CHECK(residual_threshold(1e-9, 0.5) == doctest::Approx(1e-9));
    CHECK(residual_threshold(1e-6, 0.9) == doctest::Approx(1e-6 * 0.1 / 0.9));
    CHECK(std::isinf(residual_threshold(1e-9, 0.0)));
    CHECK_THROWS_AS(residual_threshold(1e-9, 1.0), ValidationError);
}

TEST_CASE("monotone_chain_check") {
    const auto model = testing::load_t1();
    const Policy mu0 = first_control_policy(model);
    const auto init = ensure_initial_condition(model, ValueFunction(2, 0.0), mu0, InitMode::AutoShift);
    const auto trace = agent_sweep(model, init.value, mu0);
    const auto ok = monotone_chain_check(trace, model);
    CHECK(ok.passed);
    CHECK(ok.samples_checked == 2 * 4);

    // One agent: the chain is T J <= T_mu J <= J, plus the leftmost link.
    const auto single = testing::generated(GeneratorKind::Cartesian, 3, 1, 3, 0.9, 1);
    const auto mu = first_control_policy(single);
    const auto start = ensure_initial_condition(single, ValueFunction(3, 0.0), mu, InitMode::AutoShift);
    const auto t1 = agent_sweep(single, start.value, mu);
    const auto r1 = monotone_chain_check(t1, single);
    CHECK(r1.passed);
    CHECK(r1.samples_checked == 3 * 3);
    CHECK(leq(t1.output_value(), apply_T_mu(single, mu, start.value)));

    // Violated precondition: reported, chain skipped.
    const auto bad = agent_sweep(model, ValueFunction(2, 0.0), mu0);
    const auto r = monotone_chain_check(bad, model);
    CHECK_FALSE(r.passed);
    REQUIRE(r.notes.size() == 1);
    CHECK(r.notes[0].find("not checked") != std::string::npos);
    for (const auto& v : r.violations)
        CHECK(v.detail.find("precondition") != std::string::npos);
}

TEST_CASE("runs on random instances: monotone chain, nonincreasing iterates, geometric tail") {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
        const auto kind = std::array{GeneratorKind::RandomGeneral, GeneratorKind::Cartesian,
                                     GeneratorKind::SimplexCoupled}[seed % 3];
        const auto model = testing::generated(kind, 4, 3, kind == GeneratorKind::SimplexCoupled ? 2 : 3, 0.9, seed);
        RunOptions opts = auto_shift();
        opts.keep_history = true;
        bool chains_ok = true;
        opts.observer = [&](const IterationEvent& e) {
            REQUIRE(e.trace != nullptr);
            chains_ok = chains_ok && monotone_chain_check(*e.trace, model).passed;
        };
        const auto r = multiagent_vi_run(model, ValueFunction(4, 0.0), first_control_policy(model), opts);
        REQUIRE(r.converged());
        CHECK(chains_ok);
        CHECK(is_agent_by_agent_optimal(model, r.final_policy).optimal);
        const auto Jbar = policy_cost(model, r.final_policy);
        CHECK(weighted_sup_distance(r.final_value, Jbar, model.weights()) <= 1e-9);
        REQUIRE(r.value_history.size() == r.iterations.size() + 1);
        for (std::size_t k = 0; k + 1 < r.value_history.size(); ++k)
            CHECK(leq(r.value_history[k + 1], r.value_history[k]));
        const std::size_t kbar = *r.stabilization_index;
        for (std::size_t k = kbar; k < r.policy_history.size(); ++k)
            CHECK(r.policy_history[k] == r.final_policy);
        for (std::size_t k = kbar; k + 1 < r.value_history.size(); ++k) {
            CHECK(weighted_sup_distance(r.value_history[k + 1], Jbar, model.weights()) <=
                  0.9 * weighted_sup_distance(r.value_history[k], Jbar, model.weights()) + 1e-10);
        }
        for (std::size_t k = kbar; k < r.iterations.size(); ++k)
            CHECK_FALSE(r.iterations[k].policy_changed);
    }
}

TEST_CASE("one-agent multiagent VI reproduces standard VI") {
    for (std::uint64_t seed = 0; seed < 8; ++seed) {
        const auto model = testing::generated(GeneratorKind::Cartesian, 5, 1, 4, 0.85, seed);
        const ValueFunction J0(5, 200.0);
        RunOptions opts;
        opts.keep_history = true;
        opts.max_iters = 60;
        const auto a = multiagent_vi_run(model, J0, first_control_policy(model), opts);
        const auto b = standard_vi_run(model, J0, first_control_policy(model), opts);
        const std::size_t steps = std::min(a.value_history.size(), b.value_history.size());
        for (std::size_t k = 1; k < steps; ++k)
            CHECK(a.value_history[k] == b.value_history[k]);
    }
}

TEST_CASE("shifting the start shifts the iterates by alpha^(m k) c") {
    for (std::uint64_t seed = 0; seed < 5; ++seed) {
        const auto model = testing::generated(GeneratorKind::Cartesian, 4, 2, 3, 0.8, seed);
        const Policy mu0 = first_control_policy(model);
        const auto start = ensure_initial_condition(model, ValueFunction(4, 0.0), mu0, InitMode::AutoShift);
        RunOptions opts;
        opts.keep_history = true;
        const auto a = multiagent_vi_run(model, start.value, mu0, opts);
        const auto b = multiagent_vi_run(model, shifted(start.value, 10.0), mu0, opts);
        const std::size_t steps = std::min(a.value_history.size(), b.value_history.size());
        for (std::size_t k = 0; k < steps; ++k) {
            CHECK(a.policy_history[k] == b.policy_history[k]);
            const double expect = std::pow(0.8, 2.0 * k) * 10.0;
            for (StateId x = 0; x < 4; ++x)
                CHECK(std::abs(b.value_history[k][x] - a.value_history[k][x] - expect) <= 1e-9);
        }
    }
}

TEST_CASE("standard_vi_run counts n times the number of controls per iteration") {
    const auto model = testing::generated(GeneratorKind::Cartesian, 4, 4, 3, 0.9, 1);
    RunOptions opts;
    opts.max_iters = 2;
    const auto r = standard_vi_run(model, ValueFunction(4, 0.0), first_control_policy(model), opts);
    for (const auto& it : r.iterations) {
        CHECK(it.step == StepKind::Greedy);
        CHECK(it.h_evals == 324);
    }
}

TEST_CASE("multiagent VI on an SSP model from an upper bound") {
    const auto model = testing::generated(GeneratorKind::RandomSsp, 4, 2, 2, 0.9, 3);
    const auto r = multiagent_vi_run(model, upper_bound_start(model), first_control_policy(model), RunOptions{});
    CHECK(r.converged());
    CHECK(is_agent_by_agent_optimal(model, r.final_policy).optimal);
    CHECK(weighted_sup_distance(r.final_value, policy_cost(model, r.final_policy), model.weights()) <= 1e-9);
}

TEST_CASE("run report JSON") {
    const auto model = testing::load_t1();
    const auto r = multiagent_vi_run(model, ValueFunction(2, 0.0), first_control_policy(model), auto_shift());
    const auto j = report_to_json(model, r);
    CHECK(j["algorithm"] == "mavi");
    CHECK(j["termination"] == "policy_stable_and_converged");
    CHECK(j["iterations"].size() == r.iterations.size());
    CHECK(j["final_policy"] == nlohmann::json::parse("[0, 3]"));
    CHECK(j["final_controls"] == nlohmann::json::parse("[[0, 0], [1, 1]]"));
    CHECK(j["stabilization_index"] == *r.stabilization_index);
    CHECK(j["agent_order"] == nlohmann::json::parse("[0, 1]"));
}
