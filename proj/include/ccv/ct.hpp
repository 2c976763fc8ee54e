#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "ccv/rewrite.hpp"
#include "ccv/syntax.hpp"

namespace ccv {

// Call-by-value catch/throw terms: x | λx.M | MN | <M>x:=N | εk.M | ↑k M.
enum class CtTag : std::uint8_t { Var, Lam, App, Where, Catch, ThrowUp };

struct CtNode;
using CtTerm = std::shared_ptr<const CtNode>;

struct CtNode {
  CtTag tag;
  std::string name;  // variable, binder, catch binder, or throw tag
  CtTerm a;          // Lam body, App fn, Where body, Catch body, ThrowUp body
  CtTerm b;          // App arg, Where bound
};

CtTerm ct_var(std::string x);
CtTerm ct_lam(std::string x, CtTerm body);
CtTerm ct_app(CtTerm f, CtTerm arg);
CtTerm ct_where(CtTerm body, std::string x, CtTerm bound);
CtTerm ct_catch(std::string k, CtTerm body);
CtTerm ct_throw(std::string k, CtTerm body);

inline bool ct_is_value(const CtTerm& t) { return t->tag == CtTag::Var || t->tag == CtTag::Lam; }

// (catch k M) for εk.M and (throw k M) for ↑k M; the rest as for λμ terms.
CtTerm ct_parse(const std::string& text);
std::string ct_to_sexpr(const CtTerm& t);
std::string ct_to_pretty(const CtTerm& t);
std::string ct_alpha_key(const CtTerm& t);
bool ct_alpha_equal(const CtTerm& a, const CtTerm& b);
std::size_t ct_size(const CtTerm& t);
FreeVars ct_free_vars(const CtTerm& t);

// Child positions: Lam 0, App 0=fn 1=arg, Where 0=body 1=bound, Catch 0, ThrowUp 0.
CtTerm ct_subterm_at(const CtTerm& t, const Path& p);

// Let-associativity, ε/let and ↑/let interchange, left to right.
CtTerm ct_canonicalize(const CtTerm& t);
bool ct_struct_equal(const CtTerm& a, const CtTerm& b);

enum class CtRule : std::uint8_t {
  ad1,
  ad2,
  beta_lambda,
  beta_let,
  eta_lambda,
  eta_let,
  catch_dummy,  // εδ.M → M
  catch_throw,  // εk.↑k M → εk.M
  let_throw,    // <M>x:=↑k N → ↑k N
  throw_throw,  // ↑l ↑k N → ↑k N
  let_catch,    // <M>x:=εk.N → εk.<M>x:=N{↑k□ ↦ ↑k<M>x:=□}
  throw_catch,  // ↑l εk.M → ↑l M{l/k}
  catch_catch,  // εl.εk.M → εl.M{l/k}
};
const char* ct_rule_name(CtRule r);

struct CtSite {
  Path path;
  CtRule rule;
  std::optional<int> capture_extent;  // let_throw / let_catch under a let spine

  bool operator==(const CtSite&) const = default;
};

// t must be canonical.
std::vector<CtSite> ct_redexes(const CtTerm& t);
CtTerm ct_step(const CtTerm& t, const CtSite& site);

// Normal form for catch_dummy and catch_throw.
CtTerm ct_vertical_nf(const CtTerm& t);

// Translation into CCV λμ with administrative-normal applications, and the inverse.
Term ct_to_mu(const CtTerm& t);
CtTerm mu_inverse(const Expr& e);

struct CtNormalizeOutcome {
  bool normal = false;
  CtTerm term;
  std::size_t steps = 0;  // λμ steps taken
};
CtNormalizeOutcome ct_normalize(const CtTerm& t, std::size_t fuel);
Equality ct_equal(const CtTerm& a, const CtTerm& b, std::size_t fuel);

// Breadth-first search for a ct_step path from `from` to something struct-equal to `to`.
std::optional<std::vector<CtSite>> ct_reaches(const CtTerm& from, const CtTerm& to, std::size_t state_cap = 5000,
                                              std::size_t max_depth = 16);
bool ct_replay(const CtTerm& from, const std::vector<CtSite>& steps, const CtTerm& expected);

// Encodings of other control calculi.
enum class Encoding { CallCc, SatoCatch, SatoThrow, Tapply, Handle, Inl, Inr };
using CtArg = std::variant<CtTerm, std::string>;

class ArityMismatch : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// CallCc(M) ; SatoCatch(k, M) ; SatoThrow(k, M) ; Tapply(M, k) ; Handle(k, M, x, N) ; Inl(M) ; Inr(M)
CtTerm encode(Encoding which, const std::vector<CtArg>& args);

}  // namespace ccv
