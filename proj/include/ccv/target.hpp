#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "ccv/syntax.hpp"

namespace ccv {

// Four-sorted CPS target: T ::= λk.Q | WW ; Q ::= KW | TK ; W ::= x | λx.T ; K ::= k | λx.Q
enum class TTag : std::uint8_t { TLamK, WApp, KApp, TApp, WVar, WLam, KVar, KLam };
enum class Sort : std::uint8_t { T, Q, W, K };

struct TNode;
using TExpr = std::shared_ptr<const TNode>;

struct TNode {
  TTag tag;
  std::string name;  // variable or binder
  TExpr a;           // TLamK/WLam/KLam body; WApp/KApp/TApp function
  TExpr b;           // WApp/KApp/TApp argument
};

class IllSorted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

Sort sort_of(const TExpr& t);
const char* sort_name(Sort s);

TExpr t_lamk(std::string k, TExpr q);
TExpr t_wapp(TExpr w1, TExpr w2);
TExpr t_kapp(TExpr k, TExpr w);
TExpr t_tapp(TExpr t, TExpr k);
TExpr t_wvar(std::string x);
TExpr t_wlam(std::string x, TExpr t);
TExpr t_kvar(std::string k);
TExpr t_klam(std::string x, TExpr q);
TExpr t_with_children(const TExpr& e, TExpr a, TExpr b);

TExpr t_parse(const std::string& text);
std::string t_to_sexpr(const TExpr& t);
std::string t_to_pretty(const TExpr& t);
std::string t_alpha_key(const TExpr& t);
bool t_alpha_equal(const TExpr& a, const TExpr& b);
std::size_t t_size(const TExpr& t);

FreeVars t_free_vars(const TExpr& t);
bool t_occurs_w(const std::string& x, const TExpr& t);
bool t_occurs_k(const std::string& k, const TExpr& t);
void t_collect_names(const TExpr& t, std::unordered_set<std::string>& out);
void avoid_target(Fresh& fresh, const TExpr& t);

// Capture-avoiding t{w/x} and t{kont/k}.
TExpr t_subst_w(const TExpr& t, const std::string& x, const TExpr& w, Fresh& fresh);
TExpr t_subst_k(const TExpr& t, const std::string& k, const TExpr& kont, Fresh& fresh);

TExpr t_subterm_at(const TExpr& t, const Path& p);
TExpr t_replace_at(const TExpr& t, const Path& p, const TExpr& repl);

enum class TRule : std::uint8_t { Beta, Eta };
const char* t_rule_name(TRule r);

struct TStep {
  Path pos;
  TRule rule;
  TExpr result;  // whole term after the step
};

// Every one-step βη reduct, preorder (leftmost-outermost first).
std::vector<TStep> t_step(const TExpr& t);
std::optional<TStep> t_leftmost_step(const TExpr& t, Fresh& fresh);
// Non-duplicating redexes (η, or β whose variable occurs at most once) first, then leftmost.
std::optional<TStep> t_affine_first_step(const TExpr& t, Fresh& fresh);
// Contracts the redex at pos; nullopt if there is none of that kind.
std::optional<TExpr> t_contract(const TExpr& t, const Path& pos, TRule rule, Fresh& fresh);

bool t_is_beta_normal(const TExpr& t);  // β-normal grammar
bool t_is_normal(const TExpr& t);       // β-normal and η-normal
bool t_is_head_normal(const TExpr& t);  // head normal grammar, sort T

struct TargetOutcome {
  enum class Kind { Normal, HeadNormal, FuelExhausted } kind;
  TExpr term;
  std::size_t steps = 0;
  std::vector<TStep> trace;  // filled only when recording
};

TargetOutcome t_normalize(const TExpr& t, std::size_t fuel, bool record = false);
// Same with β only (no η); used where η would lose typings.
TargetOutcome t_normalize_beta(const TExpr& t, std::size_t fuel, bool record = false);

// One head-reduction step on a sort-T term, if the head is a redex.
std::optional<TStep> t_head_step(const TExpr& t, Fresh& fresh);

struct SolveResult {
  bool solvable = false;
  TExpr term;
  std::size_t steps = 0;
  std::vector<TStep> trace;
};
SolveResult solvable(const TExpr& t, std::size_t fuel, bool record = false);

}  // namespace ccv
