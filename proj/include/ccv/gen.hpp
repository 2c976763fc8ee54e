#pragma once

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ccv/ct.hpp"
#include "ccv/syntax.hpp"

namespace ccv {

// Random terms with exactly `size` nodes, uniform over tree shapes of that size.
// Leaves pick uniformly among the binders in scope and a small pool of free names.
Term gen_term(std::uint64_t seed, std::size_t size);
CtTerm gen_ct(std::uint64_t seed, std::size_t size);

// Uniform double in [0,1) from a 64-bit engine, identical on every platform.
double unit_draw(std::mt19937_64& rng);
std::size_t index_draw(std::mt19937_64& rng, std::size_t n);

}  // namespace ccv
