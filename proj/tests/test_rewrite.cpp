#include <doctest.h>

#include <deque>
#include <set>

#include "ccv/corpus.hpp"
#include "ccv/gen.hpp"
#include "ccv/rewrite.hpp"
#include "support.hpp"

using namespace ccv;
using ccv::testing::for_seeds;
using ccv::testing::serial_from_env;

namespace {

Term T(const char* s) { return parse_term(s); }
const char* kOmega = "(app (lam x (app x x)) (lam x (app x x)))";

std::vector<std::string> rule_names(const NormalizeOutcome& o) {
  std::vector<std::string> out;
  for (const auto& r : o.trace) out.push_back(rule_name(r.site.rule));
  return out;
}

// All terms reachable in at most `depth` steps using rules accepted by keep.
template <class Keep>
std::set<std::string> reach(const Expr& from, int depth, Keep keep, std::size_t cap = 4000) {
  Fresh fresh(from);
  std::set<std::string> seen{alpha_key(from)};
  std::deque<std::pair<Expr, int>> q{{from, 0}};
  while (!q.empty() && seen.size() < cap) {
    auto [cur, d] = q.front();
    q.pop_front();
    if (d == depth) continue;
    for (const auto& s : redexes(cur)) {
      if (!keep(s.rule)) continue;
      Expr nx = step_unchecked(cur, s, fresh);
      if (seen.insert(alpha_key(nx)).second) q.push_back({nx, d + 1});
    }
  }
  return seen;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a)
    if (b.count(x)) return true;
  return false;
}

bool has_mu(const Expr& e) {
  if (!e) return false;
  if (e->tag == Tag::Mu || e->tag == Tag::Throw) return true;
  return has_mu(e->a) || has_mu(e->b);
}

}  // namespace

TEST_SUITE("rewrite_engine") {
  TEST_CASE("redexes") {
    Term t = canonicalize(T("(bind (app a b) x (bind (app c d) y (mu k (jmp k (app e y0)))))"));
    std::vector<int> extents;
    for (const auto& s : redexes(t))
      if (s.rule == Rule::beta_mu) extents.push_back(*s.capture_extent);
    CHECK(extents.size() == 2);
    CHECK(redexes(var("x")).empty());
    auto rs = redexes(T("(app (lam x x) (app y y))"));
    REQUIRE(rs.size() == 1);
    CHECK(rs[0].rule == Rule::ad2);
    CHECK(rs[0].path.empty());
  }

  TEST_CASE("step") {
    Term t = T("(app (lam x x) (app y y))");
    Term s1 = step(t, redexes(t)[0]);
    CHECK(alpha_equal(s1, T("(bind (app (lam x x) z) z (app y y))")));
    Term let = T("(bind (app x x) x (lam w w))");
    auto rs = redexes(let);
    REQUIRE(!rs.empty());
    CHECK(rs[0].rule == Rule::beta_let);
    CHECK(alpha_equal(step(let, rs[0]), T("(app (lam w w) (lam w w))")));
    Term em = T("(mu k (jmp k (app a b)))");
    auto es = redexes(em);
    REQUIRE(es.size() == 1);
    CHECK(es[0].rule == Rule::eta_mu);
    CHECK(alpha_equal(step(em, es[0]), T("(app a b)")));
    CHECK_THROWS_AS(step(var("x"), RedexSite{{}, Rule::beta_lambda, std::nullopt}), StaleSite);
  }

  TEST_CASE("vertical_nf") {
    CHECK(alpha_equal(vertical_nf(T("(mu k (jmp k x))")), var("x")));
    Term nested = T("(mu k (jmp k (mu l (jmp l x))))");
    CHECK(alpha_equal(vertical_nf(nested), var("x")));
    // every order of vertical steps ends at x
    auto all = reach(nested, 5, [](Rule r) { return r == Rule::eta_mu; });
    std::set<std::string> ends;
    for (const auto& k : all)
      if (k == alpha_key(var("x"))) ends.insert(k);
    CHECK(ends.size() == 1);
    CHECK(syntactic_equal(vertical_nf(T("(lam x x)")), T("(lam x x)")));
  }

  TEST_CASE("quasi-normal and normal") {
    Term n = T("(app x (lam y y))");
    CHECK(is_quasi_normal(n));
    CHECK(is_normal(n));
    Term eta = T("(lam x (app y x))");
    CHECK(is_quasi_normal(eta));
    CHECK_FALSE(is_normal(eta));
    Term beta = T("(app (lam x x) y)");
    CHECK_FALSE(is_quasi_normal(beta));
    CHECK_FALSE(is_normal(beta));
  }

  TEST_CASE("normalize") {
    auto o = normalize(T("(app (lam x x) (app y y))"), 100, Strategy::Direct, true);
    CHECK(o.normal);
    CHECK(rule_names(o) == std::vector<std::string>{"ad2", "beta_lambda", "beta_let", "eta_let"});
    CHECK(alpha_equal(o.term, T("(app y y)")));
    auto c = normalize(T("(app (lam x x) (app y y))"), 100, Strategy::ViaCps);
    CHECK(c.normal);
    CHECK(alpha_equal(c.term, T("(app y y)")));
    CHECK_FALSE(normalize(T(kOmega), 100).normal);
    CHECK_FALSE(normalize(T(kOmega), 100, Strategy::ViaCps).normal);
  }

  TEST_CASE("Yfz keeps unfolding under the binder v") {
    // The E-normal form f(λv.D D v)z still contains the redex D D v, so no normal form exists.
    Term yfz = parse_term("(app (app " + y_eta() + " f) z)");
    CHECK_FALSE(normalize(yfz, 2000).normal);
    CHECK_FALSE(normalize(yfz, 2000, Strategy::ViaCps).normal);
  }

  TEST_CASE("ccv_equal") {
    CHECK(ccv_equal(T("(app (lam x x) (app y y))"), T("(app y y)"), 1000) == Equality::Equal);
    CHECK(ccv_equal(var("x"), var("y"), 1000) == Equality::NotEqual);
    CHECK(ccv_equal(T(kOmega), var("x"), 50) == Equality::Unknown);
  }

  TEST_CASE("trace lines") {
    auto o = normalize(T("(app (lam x x) (app y y))"), 100, Strategy::Direct, true);
    REQUIRE(o.trace.size() == 4);
    CHECK(trace_line(o.trace[1]) ==
          R"j({"step":2,"rule":"beta_lambda","path":[0],"capture_extent":null,"term":"(bind (bind x x z0) z0 (app y y))"})j");
  }

  TEST_CASE("critical pairs join within two steps") {
    auto any = [](Rule r) { return !is_administrative(r); };
    for (const char* src : {"(bind (app a b) x (mu k (jmp k (app c d))))", "(mu l (jmp l2 (mu k (jmp k (app c d)))))",
                            "(mu k (jmp k (mu l (jmp m (app c d)))))", "(bind x x (mu k (jmp k (app c x))))"}) {
      Term t = canonicalize(T(src));
      Fresh fresh(t);
      auto rs = redexes(t);
      for (std::size_t i = 0; i < rs.size(); ++i)
        for (std::size_t j = i + 1; j < rs.size(); ++j) {
          if (is_administrative(rs[i].rule) || is_administrative(rs[j].rule)) continue;
          Expr a = step_unchecked(t, rs[i], fresh);
          Expr b = step_unchecked(t, rs[j], fresh);
          CHECK_MESSAGE(intersects(reach(a, 2, any), reach(b, 2, any)), src);
        }
    }
  }

  TEST_CASE("vertical and practical reductions commute") {
    const std::size_t n = 120;
    std::vector<int> res(n, 0);  // 1 joined, 2 unknown, 0 failed
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      std::mt19937_64 rng(31 + i);
      Term t = canonicalize(gen_term(300 + i, 3 + i % 15));
      Fresh fresh(t);
      Expr a = t, b = t;
      for (int k = 0; k < 2; ++k) {
        std::vector<RedexSite> v;
        for (auto& s : redexes(a))
          if (s.rule == Rule::eta_mu) v.push_back(s);
        if (!v.empty()) a = step_unchecked(a, v[index_draw(rng, v.size())], fresh);
      }
      for (int k = 0; k < 2; ++k) {
        std::vector<RedexSite> p;
        for (auto& s : redexes(b))
          if (is_practical(s.rule)) p.push_back(s);
        if (!p.empty()) b = step_unchecked(b, p[index_draw(rng, p.size())], fresh);
      }
      auto from_a = reach(a, 4, [](Rule r) { return is_practical(r); }, 3000);
      auto from_b = reach(b, 6, [](Rule r) { return r == Rule::eta_mu; });
      res[i] = intersects(from_a, from_b) ? 1 : from_a.size() >= 3000 ? 2 : 0;
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(res[i] != 0, "seed ", i);
  }

  TEST_CASE("Church-Rosser on random peaks") {
    const std::size_t n = 120;
    std::vector<int> res(n, 0);
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      std::mt19937_64 rng(77 + i);
      Term t = canonicalize(gen_term(600 + i, 1 + i % 20));
      Expr a = ccv::testing::random_walk(t, index_draw(rng, 7), rng);
      Expr b = ccv::testing::random_walk(t, index_draw(rng, 7), rng);
      auto na = normalize(a, 5000, Strategy::ViaCps), nb = normalize(b, 5000, Strategy::ViaCps);
      res[i] = !na.normal || !nb.normal ? 2 : struct_equal(na.term, nb.term) ? 1 : 0;
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(res[i] != 0, "seed ", i);
  }

  TEST_CASE("mu-free terms stay mu-free") {
    for (std::uint64_t s = 0; s < 300; ++s) {
      Term t = canonicalize(gen_term(900 + s, 1 + s % 20));
      if (has_mu(t)) continue;
      std::mt19937_64 rng(s);
      CHECK_FALSE(has_mu(ccv::testing::random_walk(t, 8, rng)));
    }
  }

  TEST_CASE("Direct and ViaCps agree") {
    const std::size_t n = 200;
    std::vector<int> res(n, 1);
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      Term t = canonicalize(gen_term(1200 + i, 1 + i % 25));
      auto d = normalize(t, 5000), c = normalize(t, 5000, Strategy::ViaCps);
      if (d.normal && c.normal) res[i] = struct_equal(d.term, c.term) && is_normal(d.term) && is_normal(c.term);
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(res[i], "seed ", i);
  }
}
