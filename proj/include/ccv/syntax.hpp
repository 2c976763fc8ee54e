#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

namespace ccv {

// Terms and jumps share one node type; the smart constructors below refuse
// ill-sorted trees, so a jump can never sit where a term is expected.
enum class Tag : std::uint8_t { Var, Lam, App, Where, Mu, Throw, JWhere };

struct Node;
using Expr = std::shared_ptr<const Node>;
using Term = Expr;
using Jump = Expr;

struct Node {
  Tag tag;
  std::string name;  // variable, binder, or continuation variable
  Expr a;            // Lam body, App fn, Where body, Mu body, Throw body, JWhere body
  Expr b;            // App arg, Where bound, JWhere bound
};

class SortError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class NonValueSubstitution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

inline bool is_jump(const Expr& e) { return e->tag == Tag::Throw || e->tag == Tag::JWhere; }
inline bool is_term(const Expr& e) { return !is_jump(e); }
inline bool is_value(const Expr& e) { return e->tag == Tag::Var || e->tag == Tag::Lam; }

Term var(std::string x);
Term lam(std::string x, Term body);
Term app(Term f, Term arg);
Term where(Term body, std::string x, Term bound);
Term mu(std::string k, Jump body);
Jump jmp(std::string k, Term body);
Jump jwhere(Jump body, std::string x, Term bound);

enum class ValueTag { Value, NonValue };
ValueTag classify(const Term& t);

struct FreeVars {
  std::set<std::string> ordinary;
  std::set<std::string> continuation;
};
FreeVars free_vars(const Expr& e);
bool occurs_free(const std::string& x, const Expr& e);
bool occurs_free_cvar(const std::string& k, const Expr& e);

// Every name (free or bound, both namespaces) appearing in e.
void collect_names(const Expr& e, std::unordered_set<std::string>& out);

std::size_t size(const Expr& e);

// Fresh names z0, z1, ... skipping anything registered as taken.
class Fresh {
 public:
  Fresh() = default;
  explicit Fresh(const Expr& e) { avoid(e); }
  void avoid(const Expr& e) { collect_names(e, taken_); }
  void avoid(const std::string& n) { taken_.insert(n); }
  std::string next();
  std::size_t issued() const { return counter_; }

 private:
  std::unordered_set<std::string> taken_;
  std::size_t counter_ = 0;
};

// S-expression syntax: x | (lam x M) | (app M N) | (bind L x M) | (mu k J) | (jmp k M)
// plus (jbind J x M) for a let around a jump.
Term parse_term(const std::string& text);
Jump parse_jump(const std::string& text);
Expr parse_expr(const std::string& text);  // either sort
std::string to_sexpr(const Expr& e);
// Human notation with <L>x:=M for lets; never parsed back.
std::string to_pretty(const Expr& e);

// Binder-name-independent key: equal keys iff alpha-equivalent trees.
std::string alpha_key(const Expr& e);
bool alpha_equal(const Expr& a, const Expr& b);

// Applies the three equality axioms left to right until fixpoint.
Expr canonicalize(const Expr& e);
Expr canonicalize(const Expr& e, Fresh& fresh);
bool is_canonical(const Expr& e);
bool struct_equal(const Expr& a, const Expr& b);
// Identical trees, names included.
bool syntactic_equal(const Expr& a, const Expr& b);

// Capture-avoiding {v/x}; v must be a value.
Expr subst_value(const Expr& e, const std::string& x, const Term& v);
Expr subst_value(const Expr& e, const std::string& x, const Term& v, Fresh& fresh);

// Renames ordinary variable x to y (y a variable, so always allowed).
Expr rename_var(const Expr& e, const std::string& x, const std::string& y, Fresh& fresh);

// Structural substitution for continuation variable k.
struct JumpContext {
  std::string cvar;    // the jumper kept in front, [cvar](<M>x:=Q)
  std::string binder;  // x
  Term bound;          // M
};
Expr subst_jump_context(const Expr& e, const std::string& k, const JumpContext& ctx);
Expr subst_jump_context(const Expr& e, const std::string& k, const JumpContext& ctx, Fresh& fresh);
// J{l/k}
Expr rename_cvar(const Expr& e, const std::string& k, const std::string& l);
Expr rename_cvar(const Expr& e, const std::string& k, const std::string& l, Fresh& fresh);

// Child positions: App 0=fn 1=arg, Lam 0, Where 0=body 1=bound, Mu 0, Throw 0, JWhere 0=body 1=bound.
using Path = std::vector<int>;
Expr subterm_at(const Expr& e, const Path& p);
Expr replace_at(const Expr& e, const Path& p, const Expr& repl);
Expr with_children(const Expr& e, Expr a, Expr b);

// Gives every binder a name distinct from all other binders and free names.
Expr uniquify_binders(const Expr& e, Fresh& fresh);

}  // namespace ccv
