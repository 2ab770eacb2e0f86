#pragma once

#include <string>

#include "maavi/problem_models.hpp"

namespace maavi {

enum class GeneratorKind { RandomGeneral, Cartesian, SimplexCoupled, RandomSsp };

std::string to_string(GeneratorKind kind);
GeneratorKind parse_generator_kind(const std::string& s);

struct GeneratorSpec {
    GeneratorKind kind = GeneratorKind::Cartesian;
    std::size_t n = 2;
    std::size_t m = 2;
    /// Per-component alphabet size; simplex instances require 2.
    std::size_t s = 2;
    /// Successors per (x, u); 0 means all states.
    std::size_t density = 0;
    double cost_lo = 0.0;
    double cost_hi = 10.0;
    double alpha = 0.9;
    std::uint64_t seed = 0;
};

/**
Deterministic instance generator.

- random_general: each tuple of {0..s-1}^m is kept independently with
  probability 1/2 (at least one per state).
- cartesian: the full product {0..s-1}^m at every state.
- simplex_coupled: the m one-hot tuples, i.e. the product {0,1}^m intersected
  with u_1 + ... + u_m = 1.
- random_ssp: full product controls, destination n-1, and every non-destination
  row sends probability at least 0.2 to the destination, so every policy is
  proper.
*/
TabularMdp generate(const GeneratorSpec& spec);

/// J with T_mu J <= J for every policy: c/(1-alpha) for discounted models, c v for SSP.
ValueFunction upper_bound_start(const TabularMdp& model);

} // namespace maavi
