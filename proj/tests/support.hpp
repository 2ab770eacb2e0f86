#pragma once

// Test-side reference computations. These deliberately avoid the library's
// evaluation and enumeration code so that they can serve as oracles.

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "json.hpp"

#include "maavi/generators.hpp"
#include "maavi/problem_io.hpp"
#include "maavi/problem_models.hpp"

namespace testing {

using maavi::ControlTuple;
using maavi::Policy;
using maavi::StateId;
using maavi::TabularMdp;
using maavi::ValueFunction;

inline std::string data_path(const std::string& name) { return std::string(MAAVI_DATA_DIR) + "/" + name; }

inline TabularMdp load_t1() { return maavi::load_problem(data_path("t1.json")); }

/// Raw arrays of a discounted problem file, read without the library.
struct RawMdp {
    std::size_t n = 0;
    double alpha = 0.0;
    std::vector<std::vector<ControlTuple>> controls;
    std::vector<std::vector<std::vector<double>>> p;  // p[x][c][y]
    std::vector<std::vector<std::vector<double>>> g;  // g[x][c][y]
};

inline RawMdp read_raw(const std::string& path) {
    std::ifstream f(path);
    const auto d = nlohmann::json::parse(f);
    RawMdp r;
    r.n = d["num_states"];
    r.alpha = d["discount"];
    r.controls = d["controls"].get<std::vector<std::vector<ControlTuple>>>();
    r.p.resize(r.n);
    r.g.resize(r.n);
    for (std::size_t x = 0; x < r.n; ++x) {
        for (std::size_t c = 0; c < r.controls[x].size(); ++c) {
            std::vector<double> prow(r.n, 0.0), grow(r.n, 0.0);
            for (const auto& e : d["transitions"][x][c])
                prow[e[0].get<std::size_t>()] = e[1].get<double>();
            for (const auto& e : d["costs"][x][c])
                grow[e[0].get<std::size_t>()] = e[1].get<double>();
            r.p[x].push_back(prow);
            r.g[x].push_back(grow);
        }
    }
    return r;
}

/// sum_y p (g + alpha J) straight from the table, pinning an SSP destination at zero.
inline double ref_h(const TabularMdp& model, StateId x, std::size_t c, const ValueFunction& J) {
    const auto& d = model.data();
    const bool ssp = d.kind == maavi::ProblemKind::Ssp;
    if (ssp && x == *d.destination)
        return 0.0;
    const double alpha = ssp ? 1.0 : d.discount;
    double sum = 0.0;
    for (const auto& e : d.rows[x][c]) {
        const double next = (ssp && e.next == *d.destination) ? 0.0 : J[e.next];
        sum += e.prob * (e.cost + alpha * next);
    }
    return sum;
}

/// J_mu by fixed-point iteration of T_mu until the iterate stops moving.
inline ValueFunction ref_policy_cost(const TabularMdp& model, const Policy& mu) {
    const std::size_t n = model.num_states();
    ValueFunction J(n, 0.0);
    for (int it = 0; it < 1'000'000; ++it) {
        ValueFunction next(n);
        double delta = 0.0;
        for (StateId x = 0; x < n; ++x) {
            next[x] = ref_h(model, x, mu[x], J);
            delta = std::max(delta, std::abs(next[x] - J[x]));
        }
        J = std::move(next);
        if (delta <= 1e-14 * (1.0 + std::abs(J[0])))
            break;
    }
    return J;
}

/// Every policy, produced by recursion rather than the library's enumerator.
inline std::vector<Policy> all_policies(const maavi::Model& model) {
    std::vector<Policy> out;
    std::vector<std::size_t> cur(model.num_states());
    auto rec = [&](auto&& self, std::size_t x) -> void {
        if (x == model.num_states()) {
            out.emplace_back(cur);
            return;
        }
        for (std::size_t c = 0; c < model.controls(x).size(); ++c) {
            cur[x] = c;
            self(self, x + 1);
        }
    };
    rec(rec, 0);
    return out;
}

inline ValueFunction ref_optimum(const TabularMdp& model) {
    ValueFunction best(model.num_states(), std::numeric_limits<double>::infinity());
    for (const auto& mu : all_policies(model)) {
        const auto J = ref_policy_cost(model, mu);
        for (std::size_t x = 0; x < J.size(); ++x)
            best[x] = std::min(best[x], J[x]);
    }
    return best;
}

inline double max_abs_diff(const ValueFunction& a, const ValueFunction& b) {
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i)
        d = std::max(d, std::abs(a[i] - b[i]));
    return d;
}

/// Single-agent or multi-agent model where every transition and cost is zero-cost self-looping.
inline TabularMdp zero_cost_model(std::size_t n, std::size_t m, std::size_t s, double alpha = 0.9) {
    maavi::GeneratorSpec spec;
    spec.kind = maavi::GeneratorKind::Cartesian;
    spec.n = n;
    spec.m = m;
    spec.s = s;
    spec.alpha = alpha;
    spec.cost_lo = 0.0;
    spec.cost_hi = 0.0;
    spec.seed = 1;
    return maavi::generate(spec);
}

/// Discounted model from explicit per-state controls and (next, prob, cost) rows.
inline TabularMdp make_mdp(std::size_t m, double alpha, std::vector<std::vector<ControlTuple>> controls,
                           std::vector<std::vector<std::vector<TabularMdp::Entry>>> rows) {
    TabularMdp::Data d;
    d.kind = maavi::ProblemKind::Discounted;
    d.num_agents = m;
    d.discount = alpha;
    d.controls = std::move(controls);
    d.rows = std::move(rows);
    return TabularMdp(std::move(d));
}

inline TabularMdp generated(maavi::GeneratorKind kind, std::size_t n, std::size_t m, std::size_t s, double alpha,
                            std::uint64_t seed) {
    maavi::GeneratorSpec spec;
    spec.kind = kind;
    spec.n = n;
    spec.m = m;
    spec.s = s;
    spec.alpha = alpha;
    spec.seed = seed;
    return maavi::generate(spec);
}

} // namespace testing
