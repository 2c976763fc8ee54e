#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ccv/cps.hpp"
#include "ccv/ct.hpp"
#include "ccv/rewrite.hpp"
#include "ccv/stypes.hpp"
#include "ccv/target.hpp"
#include "ccv/ttypes.hpp"

namespace ccv::testing {

// Runs body(i) for i in [0, n); OpenMP fan-out unless serial. body must not throw.
void for_seeds(std::size_t n, bool serial, const std::function<void(std::size_t)>& body);
// True when CCV_SERIAL is set in the environment.
bool serial_from_env();

// Uniformly chosen redex at each step; stops early at a normal form.
Expr random_walk(const Expr& m, std::size_t len, std::mt19937_64& rng, std::vector<RedexSite>* sites = nullptr);
CtTerm random_ct_walk(const CtTerm& t, std::size_t len, std::mt19937_64& rng);

// Uniformly chosen target βη step at each step.
struct TargetWalk {
  TExpr end;
  std::vector<TargetStepRef> steps;
};
TargetWalk random_target_walk(const TExpr& t, std::size_t len, std::mt19937_64& rng);

// Random source types of union category with depth at most max_depth.
SPtr random_type(std::mt19937_64& rng, int max_depth);
// A type built from the components of t with some dropped and some added.
SPtr perturb_type(const SPtr& t, std::mt19937_64& rng, int max_depth);

// Subtyping by saturating the inference rules with reflexivity and transitivity
// over all component types and sub-multisets of a and b.
bool subtype_by_saturation(const SPtr& a, const SPtr& b);

// f:ω→℧, z:S ⊢ Y f z : T with Y the η-expanded fixed-point combinator.
SDeriv fixed_point_derivation(const SPtr& s, const SPtr& t);

// Same environments (ω entries ignored) and same type.
bool same_target_judgement(const TDeriv& a, const TDeriv& b);
// As above but the subjects may differ.
bool same_target_context(const TDeriv& a, const TDeriv& b);
bool same_source_judgement(const SDeriv& a, const SDeriv& b);

// A target term with a typing, and the β-path from it to a typed (head) normal form.
struct TypedPath {
  std::vector<TExpr> terms;   // terms[0] the start, terms.back() the normal form
  std::vector<Path> redexes;  // redexes[i] contracted in terms[i]
  std::vector<TDeriv> derivs;  // derivs[i] types terms[i]
};
// cps of a random term, β-reduced and typed; empty on failure.
TypedPath typed_target_path(std::uint64_t seed, std::size_t size, std::size_t fuel);

}  // namespace ccv::testing
