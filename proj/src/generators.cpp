#include "maavi/generators.hpp"

#include <algorithm>
#include <numeric>

#include "random.hpp"

namespace maavi {

namespace {

std::vector<ControlTuple> product(std::size_t m, std::size_t s) {
    std::vector<ControlTuple> out;
    ControlTuple u(m, 0);
    for (;;) {
        out.push_back(u);
        std::size_t i = m;
        for (; i > 0; --i) {
            if (static_cast<std::size_t>(++u[i - 1]) < s)
                break;
            u[i - 1] = 0;
        }
        if (i == 0)
            return out;
    }
}

std::vector<StateId> pick_distinct(detail::Rng& rng, std::vector<StateId> pool, std::size_t k) {
    k = std::min(k, pool.size());
    for (std::size_t i = 0; i < k; ++i)
        std::swap(pool[i], pool[i + rng.below(pool.size() - i)]);
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
}

// Random row over `targets` carrying total probability `mass`.
std::vector<TabularMdp::Entry> random_row(detail::Rng& rng, const std::vector<StateId>& targets, double mass,
                                          double lo, double hi) {
    std::vector<double> w(targets.size());
    double sum = 0.0;
    for (auto& wi : w) {
        wi = rng.uniform(0.05, 1.0);
        sum += wi;
    }
    std::vector<TabularMdp::Entry> row;
    for (std::size_t i = 0; i < targets.size(); ++i)
        row.push_back({targets[i], mass * w[i] / sum, rng.uniform(lo, hi)});
    return row;
}

} // namespace

std::string to_string(GeneratorKind kind) {
    switch (kind) {
    case GeneratorKind::RandomGeneral: return "random_general";
    case GeneratorKind::Cartesian: return "cartesian";
    case GeneratorKind::SimplexCoupled: return "simplex_coupled";
    case GeneratorKind::RandomSsp: return "random_ssp";
    }
    return "?";
}

GeneratorKind parse_generator_kind(const std::string& s) {
    for (auto k : {GeneratorKind::RandomGeneral, GeneratorKind::Cartesian, GeneratorKind::SimplexCoupled,
                   GeneratorKind::RandomSsp}) {
        if (s == to_string(k))
            return k;
    }
    throw ValidationError("unknown generator kind '" + s + "'");
}

TabularMdp generate(const GeneratorSpec& spec) {
    if (spec.n == 0 || spec.m == 0 || spec.s == 0)
        throw ValidationError("generator: n, m and s must be at least 1");
    if (spec.kind == GeneratorKind::SimplexCoupled && spec.s != 2)
        throw ValidationError("generator: simplex_coupled instances use the alphabet {0,1}, so s must be 2");
    if (spec.cost_lo > spec.cost_hi)
        throw ValidationError("generator: cost range is empty");
    if (spec.kind != GeneratorKind::RandomSsp && !(spec.alpha > 0.0 && spec.alpha < 1.0))
        throw ValidationError("generator: discount must lie in (0, 1)");
    if (spec.kind == GeneratorKind::RandomSsp && spec.n < 2)
        throw ValidationError("generator: random_ssp needs at least 2 states");

    detail::Rng rng(spec.seed);
    const std::size_t n = spec.n;
    const std::size_t fan = spec.density == 0 ? n : std::min(spec.density, n);
    std::vector<StateId> all(n);
    std::iota(all.begin(), all.end(), 0);

    TabularMdp::Data data;
    data.num_agents = spec.m;
    data.discount = spec.alpha;
    data.controls.resize(n);
    data.rows.resize(n);

    const auto full = product(spec.m, spec.s);
    for (StateId x = 0; x < n; ++x) {
        switch (spec.kind) {
        case GeneratorKind::Cartesian:
        case GeneratorKind::RandomSsp:
            data.controls[x] = full;
            break;
        case GeneratorKind::RandomGeneral:
            for (const auto& u : full) {
                if (rng.coin(0.5))
                    data.controls[x].push_back(u);
            }
            if (data.controls[x].empty())
                data.controls[x].push_back(full[rng.below(full.size())]);
            break;
        case GeneratorKind::SimplexCoupled:
            for (std::size_t l = 0; l < spec.m; ++l) {
                ControlTuple u(spec.m, 0);
                u[l] = 1;
                data.controls[x].push_back(u);
            }
            break;
        }
    }

    if (spec.kind == GeneratorKind::RandomSsp) {
        const StateId dest = n - 1;
        data.kind = ProblemKind::Ssp;
        data.destination = dest;
        const std::vector<StateId> live(all.begin(), all.end() - 1);
        for (StateId x = 0; x < n; ++x) {
            for (std::size_t c = 0; c < data.controls[x].size(); ++c) {
                if (x == dest) {
                    data.rows[x].push_back({{dest, 1.0, 0.0}});
                    continue;
                }
                const double to_dest = rng.uniform(0.2, 0.5);
                auto targets = pick_distinct(rng, live, std::max<std::size_t>(fan, 2) - 1);
                auto row = random_row(rng, targets, 1.0 - to_dest, spec.cost_lo, spec.cost_hi);
                row.push_back({dest, to_dest, rng.uniform(spec.cost_lo, spec.cost_hi)});
                data.rows[x].push_back(std::move(row));
            }
        }
    } else {
        data.kind = ProblemKind::Discounted;
        for (StateId x = 0; x < n; ++x) {
            for (std::size_t c = 0; c < data.controls[x].size(); ++c) {
                auto targets = pick_distinct(rng, all, fan);
                data.rows[x].push_back(random_row(rng, targets, 1.0, spec.cost_lo, spec.cost_hi));
            }
        }
    }

    TabularMdp model(std::move(data));
    PropertyReport report = validate_model(model);
    if (!report.passed)
        throw Error("generator produced an invalid model: " + report.violations.front().detail);
    if (model.kind() == ProblemKind::Ssp) {
        SspWeights w = ssp_weights(model);
        model.attach_ssp_weights(std::move(w.weights), w.modulus);
    }
    return model;
}

ValueFunction upper_bound_start(const TabularMdp& model) {
    double c = 0.0;
    for (StateId x = 0; x < model.num_states(); ++x) {
        for (std::size_t u = 0; u < model.controls(x).size(); ++u)
            c = std::max(c, model.expected_cost(x, u));
    }
    const std::size_t n = model.num_states();
    if (auto alpha = model.discount())
        return ValueFunction(n, c / (1.0 - *alpha));
    ValueFunction J(n);
    for (StateId x = 0; x < n; ++x)
        J[x] = c * model.weights()[x];
    return J;
}

} // namespace maavi
