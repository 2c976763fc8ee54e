#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccv/syntax.hpp"

namespace ccv {

// Source types: R ::= α | S→T ; S ::= ⋂R ; T ::= ⋃S ; plus ⊥⊥ for jumps.
// A raw type is also a singleton intersection, an intersection a singleton union.
enum class SKind { Atom, Arrow, Cap, Cup, Bot };

struct SType;
using SPtr = std::shared_ptr<const SType>;

struct SType {
  SKind kind;
  std::string atom;
  SPtr dom, cod;            // Arrow
  std::vector<SPtr> items;  // Cap (raw types) / Cup (subsidiary types)
};

class CategoryMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

SPtr s_atom(std::string a);
SPtr s_arrow(SPtr dom, SPtr cod);
SPtr s_cap(std::vector<SPtr> raws);
SPtr s_cup(std::vector<SPtr> subs);
SPtr s_bot();
SPtr s_omega();  // empty intersection
SPtr s_mho();    // empty union ℧

// Components under the singleton embedding.
std::vector<SPtr> caps_of(const SPtr& s);  // raw types of a subsidiary type
std::vector<SPtr> cups_of(const SPtr& t);  // subsidiary types of a type
bool is_subsidiary(const SPtr& t);         // a single union component

// Normal key: equal keys iff equal modulo AC of ∩/∪ and singletons.
std::string s_key(const SPtr& t);
bool s_equal(const SPtr& a, const SPtr& b);
std::string s_to_sexpr(const SPtr& t);
std::string s_to_pretty(const SPtr& t);
SPtr s_parse(const std::string& text);
bool s_has_omega_or_mho(const SPtr& t);
std::size_t s_depth(const SPtr& t);

// The mapping characterization of ≤.
bool subtype(const SPtr& a, const SPtr& b);

// ---------------------------------------------------------------- derivations

using SEnv = std::map<std::string, SPtr>;  // missing x means ω, missing k means ℧

struct SDeriv {
  std::string rule;  // var lam app let mu jmp jlet sub
  SEnv gamma, delta;
  Expr subject;
  SPtr type;
  std::vector<SDeriv> premises;
  SPtr binder;  // on family premises of lam/let/jlet: the type given to the bound variable
};

enum class CheckMode { Full, Restricted };

struct CheckResult {
  bool ok = true;
  std::string rule;
  Path position;  // premise indices from the root
  std::string message;
};

CheckResult check_derivation(const SDeriv& d, CheckMode mode);

// Γ lookups with the implicit ω/℧ defaults; entries equal to ω/℧ are dropped.
SPtr env_x(const SEnv& g, const std::string& x);
SPtr env_k(const SEnv& d, const std::string& k);
SEnv normalize_gamma(const SEnv& g);
SEnv normalize_delta(const SEnv& d);

// Recomputes every environment top-down from the binder types, given the root ones.
// Variable and jumper nodes whose types no longer match get an inheritance step.
void assign_envs(SDeriv& d, const SEnv& gamma, const SEnv& delta);

// Pushes inheritance onto values (restricted system) keeping the bottom judgement.
SDeriv to_restricted(const SDeriv& d);

// Value V typed at each S_i gives V typed at ⋂S_i.
SDeriv value_intersection(const Expr& v, const std::vector<SDeriv>& ds);

bool uses_omega_inside(const SDeriv& d);
bool judgement_free_of_omega_mho(const SDeriv& d);

std::string sderiv_json(const SDeriv& d);
SDeriv sderiv_from_json(const std::string& text);

// Shorthand node builders (environments are filled in by assign_envs).
SDeriv sd_node(std::string rule, Expr subject, SPtr type, std::vector<SDeriv> premises = {});
SDeriv sd_sub(SDeriv premise, SPtr type);  // no node if the types already agree

// ---------------------------------------------------------------- bounded inference

struct Budget {
  int atoms = 1;
  int depth = 2;
  int cap_width = 1;
  int cup_width = 1;
  std::size_t steps = 200000;
};

struct Judgement {
  SEnv gamma, delta;
  Expr subject;
  SPtr type;
};

struct Inferred {
  Judgement judgement;
  SDeriv derivation;
};

std::optional<Inferred> infer_bounded(const Term& m, const Budget& b);
// Checks a given goal type within the budget's universe for free variables.
std::optional<SDeriv> derive_bounded(const SEnv& gamma, const Expr& m, const SPtr& type, const SEnv& delta,
                                     const Budget& b);

// All raw/subsidiary/union types of the budget universe, in tie-break order.
struct Universe {
  std::vector<SPtr> raws, subs, types;
};
Universe make_universe(const Budget& b);

}  // namespace ccv
