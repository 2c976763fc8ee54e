#include <doctest.h>

#include <deque>
#include <set>

#include "ccv/gen.hpp"
#include "ccv/sexpr.hpp"
#include "ccv/syntax.hpp"
#include "support.hpp"

using namespace ccv;

namespace {

Term T(const char* s) { return parse_term(s); }

// Every term reachable from e by one use of an equality axiom in either direction.
std::vector<Expr> axiom_neighbours(const Expr& e) {
  std::vector<Expr> out;
  if (!e) return out;
  if (e->tag == Tag::Where) {
    const Expr& l = e->a;
    const Expr& n = e->b;
    if (n->tag == Tag::Where && !occurs_free(n->name, l))
      out.push_back(where(where(l, e->name, n->a), n->name, n->b));
    if (l->tag == Tag::Where && !occurs_free(e->name, l->a) && !occurs_free(l->name, n))
      out.push_back(where(l->a, l->name, where(l->b, e->name, n)));
    if (l->tag == Tag::Mu && !occurs_free_cvar(l->name, n)) out.push_back(mu(l->name, jwhere(l->a, e->name, n)));
  }
  if (e->tag == Tag::Mu && e->a->tag == Tag::JWhere && !occurs_free_cvar(e->name, e->a->b))
    out.push_back(where(mu(e->name, e->a->a), e->a->name, e->a->b));
  if (e->tag == Tag::JWhere && e->a->tag == Tag::Throw)
    out.push_back(jmp(e->a->name, where(e->a->a, e->name, e->b)));
  if (e->tag == Tag::Throw && e->a->tag == Tag::Where)
    out.push_back(jwhere(jmp(e->name, e->a->a), e->a->name, e->a->b));
  for (const Expr& c : axiom_neighbours(e->a)) out.push_back(with_children(e, c, e->b));
  for (const Expr& c : axiom_neighbours(e->b)) out.push_back(with_children(e, e->a, c));
  return out;
}

bool axiom_closure_reaches(const Expr& from, const Expr& to, int depth) {
  std::set<std::string> seen{alpha_key(from)};
  std::deque<std::pair<Expr, int>> q{{from, 0}};
  std::string goal = alpha_key(to);
  while (!q.empty()) {
    auto [cur, d] = q.front();
    q.pop_front();
    if (alpha_key(cur) == goal) return true;
    if (d == depth) continue;
    for (const auto& nx : axiom_neighbours(cur))
      if (seen.insert(alpha_key(nx)).second) q.push_back({nx, d + 1});
  }
  return false;
}

// J{l/k} by a plain walk that tracks shadowing μ binders.
Expr naive_rename(const Expr& e, const std::string& k, const std::string& l, std::set<std::string> shadow = {}) {
  if (!e) return e;
  if (e->tag == Tag::Mu) {
    auto inner = shadow;
    inner.insert(e->name);
    return mu(e->name, naive_rename(e->a, k, l, inner));
  }
  if (e->tag == Tag::Throw) {
    std::string tag = e->name == k && !shadow.count(k) ? l : e->name;
    return jmp(tag, naive_rename(e->a, k, l, shadow));
  }
  return with_children(e, naive_rename(e->a, k, l, shadow), naive_rename(e->b, k, l, shadow));
}

}  // namespace

TEST_SUITE("core_syntax") {
  TEST_CASE("free variables") {
    auto fv = free_vars(where(var("x"), "x", var("y")));
    CHECK(fv.ordinary == std::set<std::string>{"y"});
    CHECK(fv.continuation.empty());
    CHECK(free_vars(T("(lam x x)")).ordinary.empty());
    auto m = free_vars(T("(mu k (jmp k x))"));
    CHECK(m.ordinary == std::set<std::string>{"x"});
    CHECK(m.continuation.empty());
  }

  TEST_CASE("canonicalize applies the axioms left to right") {
    Term hoisted = canonicalize(T("(bind (mu k (jmp k (app a b))) x (app c d))"));
    CHECK(hoisted->tag == Tag::Mu);
    CHECK(struct_equal(hoisted, mu("k", jwhere(jmp("k", T("(app a b)")), "x", T("(app c d)")))));
    CHECK(alpha_equal(canonicalize(T("(bind (app x a) x (bind (app y b) y (app c d)))")),
                      T("(bind (bind (app x a) x (app y b)) y (app c d))")));
    CHECK(syntactic_equal(canonicalize(var("x")), var("x")));
  }

  TEST_CASE("jumper outside let is canonical") {
    Jump a = jwhere(jmp("k", T("(app a b)")), "x", T("(app c d)"));
    Jump b = jmp("k", where(T("(app a b)"), "x", T("(app c d)")));
    CHECK(struct_equal(a, b));
    CHECK(syntactic_equal(canonicalize(a), b));
  }

  TEST_CASE("struct_equal examples") {
    CHECK(struct_equal(T("(lam x x)"), T("(lam y y)")));
    // y is free in xy on the left and bound by the outer let on the right.
    Term a = T("(bind (app x y) x (bind (app a b) y (app c d)))");
    Term b = T("(bind (bind (app x y) x (app a b)) y (app c d))");
    CHECK_FALSE(struct_equal(a, b));
    CHECK_FALSE(axiom_closure_reaches(a, b, 6));
    Term c = T("(bind (app x z) x (bind (app a b) y (app c d)))");
    Term d = T("(bind (bind (app x z) x (app a b)) y (app c d))");
    CHECK(struct_equal(c, d));
    CHECK(axiom_closure_reaches(c, d, 6));
  }

  TEST_CASE("struct_equal agrees with the axiom closure") {
    for (std::uint64_t s = 0; s < 150; ++s) {
      Term t = gen_term(s, 1 + s % 12);
      std::mt19937_64 rng(s);
      Expr u = t;
      for (int i = 0; i < 3; ++i) {
        auto ns = axiom_neighbours(u);
        if (ns.empty()) break;
        u = ns[index_draw(rng, ns.size())];
      }
      CHECK(struct_equal(t, u));
    }
  }

  TEST_CASE("subst_value") {
    Term v = T("(lam w w)");
    CHECK(alpha_equal(subst_value(var("x"), "x", v), v));
    CHECK(alpha_equal(subst_value(T("(lam x x)"), "x", v), T("(lam x x)")));
    CHECK_THROWS_AS(subst_value(var("x"), "x", T("(app a b)")), NonValueSubstitution);
    // the inner binder y is renamed away from the substituted y
    Term e = T("(bind (app x y) y (app x w))");
    CHECK(alpha_equal(subst_value(e, "x", var("y")), T("(bind (app y z) z (app y w))")));
  }

  TEST_CASE("subst_jump_context") {
    JumpContext ctx{"k", "x", T("(app a x)")};
    CHECK(alpha_equal(subst_jump_context(jmp("k", var("y")), "k", ctx), jmp("k", T("(bind (app a x) x y)"))));
    Term shadowed = T("(mu k (jmp k v))");
    CHECK(syntactic_equal(subst_jump_context(shadowed, "k", ctx), shadowed));
    Jump j = parse_jump("(jmp k (mu k (jmp k w)))");
    CHECK(alpha_equal(rename_cvar(j, "k", "l"), parse_jump("(jmp l (mu k (jmp k w)))")));
    CHECK(alpha_equal(rename_cvar(j, "k", "l"), naive_rename(j, "k", "l")));
  }

  TEST_CASE("rename_cvar agrees with a plain walk") {
    for (std::uint64_t s = 0; s < 200; ++s) {
      Term t = gen_term(s, 1 + s % 20);
      CHECK(alpha_equal(rename_cvar(t, "q", "r"), naive_rename(t, "q", "r")));
    }
  }

  TEST_CASE("classify") {
    CHECK(classify(var("x")) == ValueTag::Value);
    CHECK(classify(T("(lam x x)")) == ValueTag::Value);
    CHECK(classify(T("(app x y)")) == ValueTag::NonValue);
    CHECK(classify(T("(mu k (jmp k x))")) == ValueTag::NonValue);
  }

  TEST_CASE("parser keeps the sorts apart") {
    CHECK_THROWS_AS(parse_term("(lam x (jmp k x))"), ParseError);
    CHECK_THROWS_AS(parse_term("(mu k x)"), ParseError);
    CHECK_THROWS_AS(parse_jump("x"), ParseError);
    CHECK_THROWS_AS(parse_term("(app x"), ParseError);
    CHECK_THROWS_AS(jmp("k", jmp("k", var("x"))), SortError);
  }

  TEST_CASE("properties over random terms") {
    const std::size_t n = 300;
    std::vector<std::string> failures(n);
    ccv::testing::for_seeds(n, ccv::testing::serial_from_env(), [&](std::size_t i) {
      Term t = gen_term(i, 1 + i % 25);
      Term c = canonicalize(t);
      std::string& f = failures[i];
      if (!syntactic_equal(canonicalize(c), c)) f += "idempotent ";
      auto a = free_vars(t), b = free_vars(c);
      if (a.ordinary != b.ordinary || a.continuation != b.continuation) f += "free_vars ";
      if (!syntactic_equal(parse_expr(to_sexpr(t)), t)) f += "round-trip ";
      Term v = T("(lam w (app w b))");
      if (!struct_equal(subst_value(c, "a", v), canonicalize(subst_value(t, "a", v)))) f += "subst-commutes ";
      Term there = subst_value(t, "a", var("zz"));
      if (!struct_equal(subst_value(there, "zz", var("a")), t)) f += "rename-back ";
      Term u = gen_term(i + 100000, 1 + i % 25);
      if (struct_equal(t, u) != struct_equal(u, t)) f += "symmetric ";
      if (!struct_equal(t, c)) f += "reflexive ";
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(failures[i].empty(), "seed ", i, ": ", failures[i]);
  }

  TEST_CASE("struct_equal is transitive along axiom chains") {
    for (std::uint64_t s = 0; s < 100; ++s) {
      std::mt19937_64 rng(s);
      Term a = gen_term(s, 1 + s % 25);
      auto walk = [&](Expr e) {
        for (int i = 0; i < 2; ++i) {
          auto ns = axiom_neighbours(e);
          if (ns.empty()) break;
          e = ns[index_draw(rng, ns.size())];
        }
        return e;
      };
      Expr b = walk(a), c = walk(b);
      CHECK_MESSAGE(struct_equal(a, b), to_sexpr(a), " ~ ", to_sexpr(b));
      CHECK_MESSAGE(struct_equal(b, c), to_sexpr(b), " ~ ", to_sexpr(c));
      CHECK(struct_equal(a, c));
    }
  }
}
