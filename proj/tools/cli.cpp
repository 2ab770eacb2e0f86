#include "cli.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "maavi/generators.hpp"
#include "maavi/optimistic_pi.hpp"
#include "maavi/oracles.hpp"
#include "maavi/problem_io.hpp"
#include "random.hpp"

namespace maavi::cli {

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitMaxIters = 2;
constexpr std::uint64_t kSolveOracleLimit = 100000;

std::string fmt(double v) {
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
    std::string out;
    for (std::size_t i = 0; i < parts.size(); ++i)
        out += (i ? sep : "") + parts[i];
    return out;
}

std::string values_text(const ValueFunction& J) {
    std::vector<std::string> parts;
    for (double v : J)
        parts.push_back(fmt(v));
    return "[" + join(parts, ", ") + "]";
}

std::string controls_text(const Model& model, const Policy& mu) {
    std::vector<std::string> parts;
    for (StateId x = 0; x < mu.size(); ++x)
        parts.push_back(to_string(model.control(x, mu[x])));
    return "[" + join(parts, ", ") + "]";
}

void write_file(const std::string& path, const std::string& text) {
    std::ofstream f(path, std::ios::binary);
    if (!f)
        throw Error("cannot write " + path);
    f << text;
    if (!f)
        throw Error("failed writing " + path);
}

struct GenerateArgs {
    std::string kind = "cartesian";
    GeneratorSpec spec;
    std::string output;
};

struct RunArgs {
    std::string input;
    double tol = kDefaultEpsilon;
    std::size_t max_iters = 10000;
    std::vector<std::size_t> order;
    std::size_t q = 5;
    std::string schedule = "every-q";
    std::vector<std::size_t> k_set;
    std::size_t blocks = 2;
    std::vector<std::size_t> activation;
    std::string init = "validate";
    std::uint64_t seed = 0;
    bool restrict_eval = false;
    bool force = false;
    bool renormalize = false;
    std::string j0 = "zero";
    std::string mu0 = "first";
};

struct SolveArgs {
    RunArgs run;
    std::string algo = "mavi";
    std::string report;
    std::string events;
};

struct CompareArgs {
    RunArgs run;
    std::vector<std::string> algos{"vi", "mavi", "opi", "async_opi"};
    bool no_oracle = false;
    std::string output;
};

struct CheckArgs {
    std::string input;
    std::string policy;
    bool oracle = false;
    bool renormalize = false;
};

struct OracleArgs {
    std::string input;
    std::string output;
    bool renormalize = false;
};

void add_run_options(CLI::App* cmd, RunArgs& a) {
    cmd->add_option("--input", a.input, "Problem file (JSON)")->required();
    cmd->add_option("--tol", a.tol, "Convergence tolerance epsilon")->check(CLI::PositiveNumber);
    cmd->add_option("--max-iters", a.max_iters, "Iteration limit");
    cmd->add_option("--order", a.order, "Agent order, a permutation of 0..m-1")->delimiter(',');
    cmd->add_option("--q", a.q, "Improvement spacing for every-q schedules")->check(CLI::PositiveNumber);
    cmd->add_option("--schedule", a.schedule, "Improvement schedule")->check(CLI::IsMember({"every-q", "explicit"}));
    cmd->add_option("--k-set", a.k_set, "Improvement iterations for explicit schedules")->delimiter(',');
    cmd->add_option("--blocks", a.blocks, "Number of contiguous state blocks (async_opi)");
    cmd->add_option("--activation", a.activation, "Block activation order (async_opi)")->delimiter(',');
    cmd->add_option("--init", a.init, "Initial condition handling")
        ->check(CLI::IsMember({"validate", "auto-shift", "unchecked"}));
    cmd->add_option("--seed", a.seed, "Seed for --mu0 random");
    cmd->add_flag("--restrict-eval", a.restrict_eval, "Evaluate only the active block (async_opi)");
    cmd->add_flag("--force", a.force, "Allow an unchecked initial condition in async_opi");
    cmd->add_flag("--renormalize", a.renormalize, "Rescale probability rows instead of rejecting them");
    cmd->add_option("--j0", a.j0, "Starting values: zero, or an upper bound on every policy cost")
        ->check(CLI::IsMember({"zero", "upper"}));
    cmd->add_option("--mu0", a.mu0, "Starting policy: first feasible tuple, or random by --seed")
        ->check(CLI::IsMember({"first", "random"}));
}

TabularMdp load(const std::string& path, bool renormalize) {
    LoadOptions lo;
    lo.renormalize = renormalize;
    lo.policy_cap = policy_cap_from_env();
    return load_problem(path, lo);
}

Policy starting_policy(const Model& model, const RunArgs& a) {
    if (a.mu0 == "first")
        return first_control_policy(model);
    detail::Rng rng(a.seed);
    Policy mu(std::vector<std::size_t>(model.num_states()));
    for (StateId x = 0; x < model.num_states(); ++x)
        mu[x] = rng.below(model.controls(x).size());
    return mu;
}

ValueFunction starting_value(const TabularMdp& model, const RunArgs& a) {
    if (a.j0 == "upper")
        return upper_bound_start(model);
    return ValueFunction(model.num_states(), 0.0);
}

Schedule make_schedule(const RunArgs& a) {
    if (a.schedule == "explicit")
        return Schedule::explicit_set({a.k_set.begin(), a.k_set.end()}, a.max_iters);
    return Schedule::every_q(a.q, a.max_iters);
}

RunReport run_algorithm(const TabularMdp& model, const std::string& algo, const RunArgs& a) {
    RunOptions opts;
    opts.max_iters = a.max_iters;
    opts.epsilon = a.tol;
    opts.agent_order = a.order;
    opts.init_mode = parse_init_mode(a.init);
    const ValueFunction J0 = starting_value(model, a);
    const Policy mu0 = starting_policy(model, a);
    if (algo == "vi")
        return standard_vi_run(model, J0, mu0, opts);
    if (algo == "mavi")
        return multiagent_vi_run(model, J0, mu0, opts);
    if (algo == "opi")
        return optimistic_pi_run(model, J0, mu0, make_schedule(a), opts);
    if (algo == "async_opi") {
        const std::size_t blocks = std::min(a.blocks, model.num_states());
        std::vector<std::vector<StateId>> parts = StatePartitionSchedule::contiguous(model.num_states(), blocks).blocks();
        StatePartitionSchedule partition(model.num_states(), std::move(parts), a.activation);
        return async_opi_run(model, J0, mu0, make_schedule(a), partition, opts, {a.restrict_eval, a.force});
    }
    throw ValidationError("unknown algorithm '" + algo + "'");
}

int exit_code(const RunReport& r) { return r.converged() ? kExitOk : kExitMaxIters; }

int do_generate(const GenerateArgs& g, std::ostream& out) {
    GeneratorSpec spec = g.spec;
    spec.kind = parse_generator_kind(g.kind);
    const TabularMdp model = generate(spec);
    const std::string text = problem_to_json(model).dump(2) + "\n";
    if (g.output.empty())
        out << text;
    else
        write_file(g.output, text);
    return kExitOk;
}

// Whether distinct policies have distinct costs, when enumeration is cheap enough.
std::optional<bool> distinct_policy_costs(const Model& model) {
    const std::uint64_t cap = std::min<std::uint64_t>(policy_cap_from_env(), kSolveOracleLimit);
    if (policy_count(model) > cap)
        return std::nullopt;
    return brute_force_optimal(model, cap).uniqueness_holds;
}

std::string tristate(const std::optional<bool>& b) { return b ? (*b ? "true" : "false") : "unknown"; }

int do_solve(const SolveArgs& s, std::ostream& out) {
    const TabularMdp model = load(s.run.input, s.run.renormalize);
    const RunReport r = run_algorithm(model, s.algo, s.run);
    const auto distinct = distinct_policy_costs(model);
    if (!s.report.empty()) {
        auto doc = report_to_json(model, r);
        doc["distinct_policy_costs"] = distinct ? nlohmann::json(*distinct) : nlohmann::json(nullptr);
        write_file(s.report, doc.dump(2) + "\n");
    }
    if (!s.events.empty()) {
        std::ostringstream log;
        write_event_log(r.events, log);
        write_file(s.events, log.str());
    }
    out << "algorithm: " << r.algorithm << "\n";
    out << "termination: " << to_string(r.termination) << "\n";
    out << "iterations: " << r.iterations.size() << "\n";
    out << "h_evals: " << r.h_evals_total() << "\n";
    out << "initial_shift: " << fmt(r.initial_shift) << "\n";
    out << "stabilization_index: "
        << (r.stabilization_index ? std::to_string(*r.stabilization_index) : std::string("none")) << "\n";
    out << "final_policy: " << controls_text(model, r.final_policy) << "\n";
    out << "final_value: " << values_text(r.final_value) << "\n";
    out << "distinct_policy_costs: " << tristate(distinct) << "\n";
    for (const auto& w : r.warnings)
        out << "warning: " << w << "\n";
    return exit_code(r);
}

int do_compare(const CompareArgs& c, std::ostream& out) {
    const TabularMdp model = load(c.run.input, c.run.renormalize);
    std::optional<OracleReport> oracle;
    if (!c.no_oracle)
        oracle = brute_force_optimal(model, policy_cap_from_env());

    std::ostringstream csv;
    csv << "algorithm,iterations,h_evals,converged,aba_optimal,globally_optimal,gap_to_optimal,wall_ms\n";
    for (const auto& algo : c.algos) {
        const auto start = std::chrono::steady_clock::now();
        const RunReport r = run_algorithm(model, algo, c.run);
        const double ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        const AbaCheck aba = is_agent_by_agent_optimal(model, r.final_policy);
        std::string global = "", gap = "";
        if (oracle) {
            double d_policy = 0.0, d_final = 0.0;
            for (StateId x = 0; x < model.num_states(); ++x) {
                d_policy = std::max(d_policy, std::abs(aba.policy_value[x] - oracle->optimal_value[x]));
                d_final = std::max(d_final, std::abs(r.final_value[x] - oracle->optimal_value[x]));
            }
            global = d_policy <= kOracleTol ? "true" : "false";
            gap = fmt(d_final);
        }
        csv << algo << ',' << r.iterations.size() << ',' << r.h_evals_total() << ','
            << (r.converged() ? "true" : "false") << ',' << (aba.optimal ? "true" : "false") << ',' << global << ','
            << gap << ',' << fmt(ms) << '\n';
    }
    if (c.output.empty())
        out << csv.str();
    else
        write_file(c.output, csv.str());
    return kExitOk;
}

int do_check(const CheckArgs& c, std::ostream& out) {
    const TabularMdp model = load(c.input, c.renormalize);
    const Policy mu = load_policy(model, c.policy);
    const AbaCheck aba = is_agent_by_agent_optimal(model, mu);
    out << "policy: " << controls_text(model, mu) << "\n";
    out << "policy_value: " << values_text(aba.policy_value) << "\n";
    out << "aba_optimal: " << (aba.optimal ? "true" : "false") << "\n";
    for (const auto& w : aba.witnesses) {
        out << "witness: state=" << w.state << " agent=" << w.agent << " component=" << w.deviating_component
            << " control=" << to_string(model.control(w.state, w.control)) << " improvement=" << fmt(w.improvement)
            << "\n";
    }
    if (c.oracle) {
        const OracleReport report = brute_force_optimal(model, policy_cap_from_env());
        double d = 0.0;
        for (StateId x = 0; x < model.num_states(); ++x)
            d = std::max(d, std::abs(aba.policy_value[x] - report.optimal_value[x]));
        out << "globally_optimal: " << (d <= kOracleTol ? "true" : "false") << "\n";
        out << "gap_to_optimal: " << fmt(d) << "\n";
        out << "distinct_policy_costs: " << (report.uniqueness_holds ? "true" : "false") << "\n";
    }
    return kExitOk;
}

int do_oracle(const OracleArgs& o, std::ostream& out) {
    const TabularMdp model = load(o.input, o.renormalize);
    const std::string text = oracle_report_to_json(brute_force_optimal(model, policy_cap_from_env())).dump(2) + "\n";
    if (o.output.empty())
        out << text;
    else
        write_file(o.output, text);
    return kExitOk;
}

} // namespace

int run(int argc, char** argv, std::ostream& out, std::ostream& err) {
    CLI::App app{"Multiagent value and policy iteration solver"};
    app.name("maavi");
    app.require_subcommand(1);

    GenerateArgs gen;
    auto* generate_cmd = app.add_subcommand("generate", "Write a seeded random problem file");
    generate_cmd->add_option("--kind", gen.kind, "Instance family")
        ->check(CLI::IsMember({"random_general", "cartesian", "simplex_coupled", "random_ssp"}));
    generate_cmd->add_option("--n", gen.spec.n, "Number of states");
    generate_cmd->add_option("--m", gen.spec.m, "Number of agents");
    generate_cmd->add_option("--s", gen.spec.s, "Alphabet size per component");
    generate_cmd->add_option("--density", gen.spec.density, "Successors per state and control (0 = all)");
    generate_cmd->add_option("--cost-lo", gen.spec.cost_lo, "Lowest stage cost");
    generate_cmd->add_option("--cost-hi", gen.spec.cost_hi, "Highest stage cost");
    generate_cmd->add_option("--alpha", gen.spec.alpha, "Discount factor");
    generate_cmd->add_option("--seed", gen.spec.seed, "Random seed");
    generate_cmd->add_option("--output,-o", gen.output, "Output path (default stdout)");

    SolveArgs solve;
    auto* solve_cmd = app.add_subcommand("solve", "Run one algorithm on a problem file");
    add_run_options(solve_cmd, solve.run);
    solve_cmd->add_option("--algo", solve.algo, "Algorithm")->check(CLI::IsMember({"vi", "mavi", "opi", "async_opi"}));
    solve_cmd->add_option("--report", solve.report, "Write the JSON run report here");
    solve_cmd->add_option("--events", solve.events, "Write the processor event log (JSON lines) here");

    CompareArgs cmp;
    auto* compare_cmd = app.add_subcommand("compare", "Run several algorithms and write a CSV table");
    add_run_options(compare_cmd, cmp.run);
    compare_cmd->add_option("--algos", cmp.algos, "Algorithms to run")
        ->delimiter(',')
        ->check(CLI::IsMember({"vi", "mavi", "opi", "async_opi"}));
    compare_cmd->add_flag("--no-oracle", cmp.no_oracle, "Skip brute-force optimality columns");
    compare_cmd->add_option("--output,-o", cmp.output, "CSV path (default stdout)");

    CheckArgs chk;
    auto* check_cmd = app.add_subcommand("check", "Check a policy for agent-by-agent optimality");
    check_cmd->add_option("--input", chk.input, "Problem file (JSON)")->required();
    check_cmd->add_option("--policy", chk.policy, "Policy file (JSON)")->required();
    check_cmd->add_flag("--oracle", chk.oracle, "Also compare with the brute-force optimum");
    check_cmd->add_flag("--renormalize", chk.renormalize, "Rescale probability rows instead of rejecting them");

    OracleArgs orc;
    auto* oracle_cmd = app.add_subcommand("oracle", "Enumerate all policies and dump the optimum as JSON");
    oracle_cmd->add_option("--input", orc.input, "Problem file (JSON)")->required();
    oracle_cmd->add_option("--output,-o", orc.output, "Output path (default stdout)");
    oracle_cmd->add_flag("--renormalize", orc.renormalize, "Rescale probability rows instead of rejecting them");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? kExitOk : kExitError;
    }

    try {
        if (*generate_cmd)
            return do_generate(gen, out);
        if (*solve_cmd)
            return do_solve(solve, out);
        if (*compare_cmd)
            return do_compare(cmp, out);
        if (*check_cmd)
            return do_check(chk, out);
        return do_oracle(orc, out);
    } catch (const ModelValidationError& e) {
        err << "error: " << e.what() << "\n";
        for (const auto& v : e.report().violations)
            err << "  state " << v.state << ": " << v.detail << "\n";
        return kExitError;
    } catch (const std::exception& e) {
        err << "error: " << e.what() << "\n";
        return kExitError;
    }
}

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<std::string> storage;
    storage.reserve(args.size() + 1);
    storage.emplace_back("maavi");
    storage.insert(storage.end(), args.begin(), args.end());
    std::vector<char*> argv;
    for (auto& s : storage)
        argv.push_back(s.data());
    return run(static_cast<int>(argv.size()), argv.data(), out, err);
}

} // namespace maavi::cli
