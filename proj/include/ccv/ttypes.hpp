#pragma once

#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccv/stypes.hpp"
#include "ccv/target.hpp"

namespace ccv {

// Strict target types: σ ::= α | σ̲→τ ; σ̲ ::= ⋂σ ; κ ::= ¬σ̲ ; κ̲ ::= ⋂κ ; τ ::= ¬κ̲ ; plus ⊥⊥.
enum class TCat { Sigma, SigmaBar, Kappa, KappaBar, Tau, Bot };
enum class TKind { Atom, Arrow, Cap, Neg, Bot };

struct TType;
using TyPtr = std::shared_ptr<const TType>;

struct TType {
  TKind kind;
  TCat cat;
  std::string atom;
  TyPtr a, b;               // Arrow: domain σ̲, codomain τ ; Neg: body in a
  std::vector<TyPtr> items;  // Cap
};

const char* tcat_name(TCat c);

TyPtr ty_atom(std::string a);
TyPtr ty_arrow(TyPtr dom, TyPtr cod);
TyPtr ty_sbar(std::vector<TyPtr> sigmas);
TyPtr ty_kappa(TyPtr sbar);
TyPtr ty_kbar(std::vector<TyPtr> kappas);
TyPtr ty_tau(TyPtr kbar);
TyPtr ty_bot();

// Components of σ̲ or κ̲ (a single σ or κ counts as a singleton).
std::vector<TyPtr> ty_caps(const TyPtr& t);
// σ̲ or κ̲ view of a single component or intersection.
TCat bar_of(TCat c);

std::string ty_key(const TyPtr& t);
bool ty_equal(const TyPtr& a, const TyPtr& b);
std::string ty_to_sexpr(const TyPtr& t);
std::string ty_to_pretty(const TyPtr& t);
// The category disambiguates (neg (cap)) and friends.
TyPtr ty_parse(const std::string& text, TCat expected);
bool ty_has_omega(const TyPtr& t);

bool t_subtype(const TyPtr& a, const TyPtr& b);

// Type translations and their inverse.
TyPtr type_star(const SPtr& s);      // raw → σ, subsidiary → σ̲
TyPtr type_plus(const SPtr& t);      // union → κ̲
TyPtr type_brackets(const SPtr& t);  // [[T]] = ¬T⁺
SPtr uncps_type(const TyPtr& t);

// ---------------------------------------------------------------- derivations

using TEnv = std::map<std::string, TyPtr>;  // Π : x ↦ σ̲ , Θ : k ↦ κ̲ ; missing means ω

struct TDeriv {
  std::string rule;  // lamk wapp kapp tapp wvar wlam kvar klam sub_tau sub_kappa sub_sigma
  TEnv pi, theta;
  TExpr subject;
  TyPtr type;
  std::vector<TDeriv> premises;
};

struct TCheckResult {
  bool ok = true;
  std::string rule;
  Path position;
  std::string message;
};

TCheckResult t_check_derivation(const TDeriv& d);

TyPtr tenv_get(const TEnv& e, const std::string& n, TCat bar);
TDeriv td_node(std::string rule, TExpr subject, TyPtr type, std::vector<TDeriv> premises = {});
// Inheritance node of the right flavour, or the premise itself if the types agree.
TDeriv td_sub(TDeriv premise, TyPtr type);
void t_assign_envs(TDeriv& d, const TEnv& pi, const TEnv& theta);

bool t_judgement_has_omega(const TDeriv& d);
std::string tderiv_json(const TDeriv& d);

class NotNormal : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class OccurrenceTrackingFailure : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sort-T input: β-normal (allow_omega=false) or head normal (allow_omega=true).
TDeriv t_infer_normal(const TExpr& t, bool allow_omega);

// d types the contractum of the β-redex at pos in `before`; the result types `before`.
TDeriv t_subject_expand(const TDeriv& d, const TExpr& before, const Path& pos);
// d types `d.subject`; the result types its β-contractum at pos (same judgement).
TDeriv t_subject_reduce(const TDeriv& d, const Path& pos);

}  // namespace ccv
