#include <doctest.h>

#include <algorithm>
#include <deque>
#include <set>

#include "ccv/corpus.hpp"
#include "ccv/cps.hpp"
#include "ccv/gen.hpp"
#include "ccv/machine.hpp"
#include "ccv/rewrite.hpp"
#include "ccv/sexpr.hpp"
#include "support.hpp"

using namespace ccv;
using ccv::testing::for_seeds;
using ccv::testing::serial_from_env;

namespace {

Term T(const char* s) { return parse_term(s); }
RawTerm R(const char* s) { return raw_from(parse_term(s)); }

// Closes a generated term: free a, b, c get the identity and q is caught at the top.
Term closed(const Term& m) {
  Term id = T("(lam i i)");
  Term body = lam("a", lam("b", lam("c", mu("q", jmp("q", m)))));
  return app(app(app(body, id), id), id);
}

// Terms reachable by administrative source steps, at most `depth` of them.
std::set<std::string> admin_reach(const Expr& from, int depth) {
  Fresh fresh(from);
  std::set<std::string> seen{alpha_key(canonicalize(from))};
  std::deque<std::pair<Expr, int>> q{{from, 0}};
  while (!q.empty() && seen.size() < 3000) {
    auto [cur, d] = q.front();
    q.pop_front();
    if (d == depth) continue;
    for (const auto& s : redexes(cur)) {
      if (!is_administrative(s.rule)) continue;
      Expr nx = step_unchecked(cur, s, fresh);
      if (seen.insert(alpha_key(canonicalize(nx))).second) q.push_back({nx, d + 1});
    }
  }
  return seen;
}

std::size_t exercised(const std::vector<int>& res) {
  return std::count_if(res.begin(), res.end(), [](int r) { return r >= 0; });
}

}  // namespace

TEST_SUITE("cbv_machine") {
  TEST_CASE("decompose") {
    auto d = decompose(R("(app (lam x x) (app y z))"));
    REQUIRE(d.ctx.size() == 2);
    CHECK(d.ctx[0].kind == FrameKind::ValueFn);
    CHECK(d.ctx[1].kind == FrameKind::ArgPending);
    CHECK(alpha_equal(d.focus, var("y")));
    CHECK(alpha_equal(plug(d.ctx, d.focus), T("(app (lam x x) (app y z))")));

    auto v = decompose(R("(lam x x)"));
    CHECK(v.ctx.empty());
    CHECK(alpha_equal(v.focus, T("(lam x x)")));

    auto l = decompose(R("(bind (app a b) x (mu k (jmp k c)))"));
    REQUIRE(l.ctx.size() == 1);
    CHECK(l.ctx[0].kind == FrameKind::LetBound);
    CHECK(l.ctx[0].name == "x");
    CHECK(l.focus->tag == Tag::Mu);
  }

  TEST_CASE("e_step rules") {
    auto b = e_step(R("(app w (app (lam x (app x x)) y))"));
    REQUIRE(b);
    CHECK(b->rule == "beta_lambda");
    CHECK(alpha_equal(project(b->term), T("(app w (bind (app x x) x y))")));
    auto l = e_step(R("(app w (bind (app x x) x y))"));
    REQUIRE(l);
    CHECK(l->rule == "beta_let");
    CHECK(alpha_equal(project(l->term), T("(app w (app y y))")));
    CHECK_FALSE(e_step(R("(app w (app x y))")));
  }

  TEST_CASE("e_step under a top-level jump") {
    auto c = e_step(R("(mu k (jmp l (mu m (jmp m x))))"));
    REQUIRE(c);
    CHECK(alpha_equal(project(c->term), T("(mu k (jmp l x))")));
    auto r = e_step(R("(mu k (jmp l (app (lam x x) y)))"));
    REQUIRE(r);
    CHECK(r->rule == "beta_lambda");
    CHECK(alpha_equal(project(r->term), T("(mu k (jmp l (bind x x y)))")));
    // the let keeps [l] and μm apart
    RawTerm apart{mu("k", jmp("l", where(T("(mu m (jmp m a))"), "y", T("(app x w)"))))};
    CHECK_FALSE(e_step(apart));
  }

  TEST_CASE("evaluate") {
    auto id = evaluate(R("(lam x x)"), 10);
    CHECK(id.kind == EvalOutcome::Kind::Finished);
    CHECK(id.steps == 0);

    Term yfz = parse_term("(app (app " + y_eta() + " f) z)");
    auto t = evaluate(embed(yfz), 100000);
    CHECK(t.kind == EvalOutcome::Kind::Stalled);
    CHECK(is_e_normal(t.term));
    Expr e = project(t.term);
    // f(λv.D D v)z
    REQUIRE(e->tag == Tag::App);
    REQUIRE(e->a->tag == Tag::App);
    CHECK(alpha_equal(e->a->a, var("f")));
    CHECK(e->a->b->tag == Tag::Lam);
    CHECK(alpha_equal(e->b, var("z")));

    Term yplain = parse_term("(app (app " + y_plain() + " f) z)");
    auto d = evaluate(embed(yplain), 3000);
    CHECK(d.kind == EvalOutcome::Kind::FuelExhausted);
    auto longer = evaluate(embed(yplain), 6000);
    CHECK(size(project(longer.term)) > size(project(d.term)));
  }

  TEST_CASE("corpus replays are deterministic") {
    for (const char* name : {"multitasking", "y-terminating", "y-divergent"}) {
      auto e = corpus_entry(name);
      REQUIRE(e);
      auto a = replay(*e, 3000), b = replay(*e, 3000);
      CHECK_MESSAGE(a.ok, name);
      CHECK(a.lines == b.lines);
    }
  }

  TEST_CASE("trace line") {
    auto s = e_step(R("(app (lam x x) y)"));
    REQUIRE(s);
    CHECK(machine_trace_line(1, *s) == R"j({"step":1,"rule":"beta_lambda","term":"(bind x x y)"})j");
  }

  TEST_CASE("decompose and plug round trip") {
    for (std::uint64_t s = 0; s < 300; ++s) {
      Term m = gen_term(5000 + s, 1 + s % 25);
      if (is_jump(m)) continue;
      RawTerm r = embed(m);
      auto d = decompose(r);
      CHECK(syntactic_equal(plug(d.ctx, d.focus), r.e));
      CHECK((is_value(d.focus) || d.focus->tag == Tag::Mu || d.focus->tag == Tag::App));
      CHECK(struct_equal(project(r), m));
    }
  }

  TEST_CASE("closed terms never stall") {
    const std::size_t n = 300;
    std::vector<int> res(n, -1);
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      auto o = evaluate(embed(closed(gen_term(6000 + i, 1 + i % 20))), 5000);
      res[i] = o.kind != EvalOutcome::Kind::Stalled;
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(res[i] != 0, "seed ", i);
    CHECK(exercised(res) >= n / 5);
  }

  TEST_CASE("E-normal forms are almost head normal") {
    const std::size_t n = 300;
    std::vector<int> res(n, -1);
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      auto o = evaluate(embed(gen_term(6500 + i, 1 + i % 20)), 5000);
      if (!terminates(o)) return;
      auto s = solvable(cps(project(o.term)), 1);
      res[i] = s.solvable && s.steps <= 1;
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(res[i] != 0, "seed ", i);
    CHECK(exercised(res) >= n / 5);
  }

  TEST_CASE("head normal targets invert to E-normal terms") {
    for (std::uint64_t s = 0; s < 200; ++s) {
      TExpr t = cps(canonicalize(gen_term(6800 + s, 1 + s % 20)));
      auto h = solvable(t, 2000);
      if (!h.solvable) continue;
      CHECK_MESSAGE(is_e_normal(raw_from(inverse_term(h.term))), "seed ", s);
    }
  }

  TEST_CASE("evaluation is stable under equal terms") {
    const std::size_t n = 200;
    std::vector<int> res(n, -1);
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      std::mt19937_64 rng(7100 + i);
      Term a = canonicalize(gen_term(7100 + i, 1 + i % 18));
      auto oa = evaluate(embed(a), 5000);
      if (!terminates(oa)) return;
      Expr b = ccv::testing::random_walk(a, 1 + index_draw(rng, 4), rng);
      auto ob = evaluate(embed(b), 20000);
      res[i] = terminates(ob) && ccv_equal(project(oa.term), project(ob.term), 5000) != Equality::NotEqual;
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(res[i] != 0, "seed ", i);
    CHECK(exercised(res) >= n / 5);
  }

  TEST_CASE("administrative steps can be postponed") {
    const std::size_t n = 150;
    std::vector<int> res(n, -1);
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      Term m = canonicalize(gen_term(7400 + i, 1 + i % 15));
      Fresh fresh(m);
      std::vector<RedexSite> ad;
      for (const auto& s : redexes(m))
        if (is_administrative(s.rule)) ad.push_back(s);
      if (ad.empty()) return;
      Expr m1 = step_unchecked(m, ad[i % ad.size()], fresh);
      auto o1 = evaluate(embed(m1), 2000);
      if (!terminates(o1)) return;
      std::string goal = alpha_key(canonicalize(project(o1.term)));
      // some E-reduct of m reaches n1 by administrative steps alone
      auto o = evaluate(embed(m), 2000, true);
      std::vector<Expr> path{m};
      for (const auto& s : o.trace) path.push_back(project(s.term));
      bool found = false;
      for (const auto& p : path)
        if (admin_reach(p, 6).count(goal)) {
          found = true;
          break;
        }
      res[i] = found;
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(res[i] != 0, "seed ", i);
    CHECK(exercised(res) >= n / 5);
  }
}
