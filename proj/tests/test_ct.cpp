#include <doctest.h>

#include "ccv/ct.hpp"
#include "ccv/gen.hpp"
#include "ccv/rewrite.hpp"
#include "support.hpp"

using namespace ccv;
using ccv::testing::for_seeds;
using ccv::testing::serial_from_env;

namespace {

CtTerm C(const char* s) { return ct_parse(s); }

std::optional<CtSite> find_rule(const CtTerm& t, CtRule r) {
  for (const auto& s : ct_redexes(t))
    if (s.rule == r) return s;
  return std::nullopt;
}

bool reaches(const CtTerm& from, const CtTerm& to) {
  auto p = ct_reaches(from, to, 20000, 20);
  return p && !p->empty() && ct_replay(from, *p, to);
}

}  // namespace

TEST_SUITE("catch_throw") {
  TEST_CASE("ct_canonicalize") {
    CHECK(ct_alpha_equal(ct_canonicalize(C("(bind (catch k (app a b)) x (app c d))")),
                         C("(catch k (bind (app a b) x (app c d)))")));
    CHECK(ct_alpha_equal(ct_canonicalize(C("(bind (throw k (app a b)) x (app c d))")),
                         C("(throw k (bind (app a b) x (app c d)))")));
    CHECK(ct_alpha_equal(ct_canonicalize(C("x")), C("x")));
    // k occurs in the bound term, so the catch stays inside after renaming
    CtTerm t = ct_canonicalize(C("(bind (catch k (app a b)) x (throw k c))"));
    CHECK(ct_struct_equal(t, C("(bind (catch k (app a b)) x (throw k c))")));
    CHECK(ct_free_vars(t).continuation == std::set<std::string>{"k"});
  }

  TEST_CASE("ct_step") {
    CtTerm dummy = C("(catch d (app a b))");
    auto s1 = find_rule(dummy, CtRule::catch_dummy);
    REQUIRE(s1);
    CHECK(ct_alpha_equal(ct_step(dummy, *s1), C("(app a b)")));

    CtTerm lt = ct_canonicalize(C("(bind (app a x) x (throw k (app c d)))"));
    auto s2 = find_rule(lt, CtRule::let_throw);
    REQUIRE(s2);
    CHECK(ct_alpha_equal(ct_step(lt, *s2), C("(throw k (app c d))")));

    CtTerm tc = C("(throw l (catch k (app (throw k a) b)))");
    auto s3 = find_rule(tc, CtRule::throw_catch);
    REQUIRE(s3);
    CHECK(ct_struct_equal(ct_step(tc, *s3), C("(throw l (app (throw l a) b))")));

    CHECK(ct_alpha_equal(ct_vertical_nf(C("(catch k (throw k (catch d v)))")), C("v")));
  }

  TEST_CASE("translation to lambda-mu") {
    CHECK(alpha_equal(ct_to_mu(C("(throw k x)")), parse_term("(mu d (jmp k x))")));
    CHECK(alpha_equal(ct_to_mu(C("(catch k (app f x))")), parse_term("(mu k (jmp k (app f x)))")));
    CHECK(struct_equal(ct_to_mu(C("(app (app a b) (app c d))")),
                       parse_term("(bind (bind (app z w) w (app c d)) z (app a b))")));
    CtTerm inv = mu_inverse(parse_term("(mu k (jmp k (app f x)))"));
    CHECK(ct_alpha_equal(inv, C("(catch k (throw k (app f x)))")));
    // εk.↑k fx loses the throw and then the unused catch
    CHECK(ct_alpha_equal(ct_vertical_nf(inv), C("(app f x)")));
    CHECK(ct_alpha_equal(mu_inverse(parse_term("(mu d (jmp k x))")), C("(catch d (throw k x))")));
  }

  TEST_CASE("translation round trip") {
    const std::size_t n = 150;
    std::vector<int> res(n, 1);
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      CtTerm t = gen_ct(10000 + i, 1 + i % 20);
      CtTerm back = mu_inverse(ct_to_mu(t));
      res[i] = ct_struct_equal(ct_vertical_nf(ct_canonicalize(back)), ct_vertical_nf(ct_canonicalize(t))) ||
               ct_equal(back, t, 5000) == Equality::Equal;
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(res[i], "seed ", i);
  }

  TEST_CASE("encodings") {
    CtTerm cc = encode(Encoding::CallCc, {C("m")});
    REQUIRE(cc->tag == CtTag::Catch);
    const std::string k = cc->name;
    CHECK(ct_alpha_equal(cc, ct_catch(k, ct_app(C("m"), ct_lam("x", ct_throw(k, C("x")))))));

    CtTerm m = C("(app m n)");
    CHECK(reaches(encode(Encoding::Tapply, {encode(Encoding::Inl, {m}), std::string("k")}), m));
    CHECK(ct_alpha_equal(encode(Encoding::Inl, {m}), ct_lam("f", m)));
    CHECK_THROWS_AS(encode(Encoding::CallCc, {}), ArityMismatch);
    CHECK_THROWS_AS(encode(Encoding::Handle, {std::string("k"), m}), ArityMismatch);
  }

  TEST_CASE("handler block") {
    // a raise caught by the handler
    CtTerm h1 = encode(Encoding::Handle, {std::string("k"), C("(throw k v)"), std::string("x"), C("(app x x)")});
    CHECK(ct_equal(h1, C("(app v v)"), 5000) == Equality::Equal);
    // the raised value carries the let it was raised under
    CtTerm h2 = encode(Encoding::Handle,
                       {std::string("k"), C("(bind (throw k v) y (app a b))"), std::string("x"), C("(app x x)")});
    CHECK(ct_equal(h2, C("(bind (app v v) y (app a b))"), 5000) == Equality::Equal);
    // no raise: the value comes straight back
    CtTerm h0 = encode(Encoding::Handle, {std::string("k"), C("v"), std::string("x"), C("(app x x)")});
    CHECK(ct_equal(h0, C("v"), 5000) == Equality::Equal);
  }

  TEST_CASE("Sato rules are realized by contractions") {
    const std::string k = "k";
    for (CtTerm m : {C("(app m n)"), C("v")}) {
      CtTerm l = C("(app l l)");
      CHECK(reaches(ct_where(l, "x", ct_throw(k, m)), ct_throw(k, m)));
      CHECK(reaches(encode(Encoding::SatoCatch, {k, m}), encode(Encoding::Inl, {m})));
      CHECK(reaches(encode(Encoding::SatoCatch, {k, ct_throw(k, m)}), encode(Encoding::Inr, {m})));
      CHECK(reaches(encode(Encoding::Tapply, {encode(Encoding::Inl, {m}), k}), m));
      CHECK(reaches(encode(Encoding::Tapply, {encode(Encoding::Inr, {m}), k}), ct_throw(k, m)));
      CHECK(ct_equal(encode(Encoding::SatoCatch, {k, m}), encode(Encoding::Inl, {m}), 5000) == Equality::Equal);
    }
    CtTerm mk = C("(app (throw k a) (throw j b))");
    CHECK(reaches(encode(Encoding::Tapply, {encode(Encoding::SatoCatch, {k, mk}), std::string("l")}),
                  C("(app (throw l a) (throw j b))")));
  }

  TEST_CASE("call/cc law") {
    CtTerm cc = encode(Encoding::CallCc, {C("m")});
    CtTerm lhs = ct_throw("t", ct_app(C("f"), cc));
    CtTerm rhs = C("(throw t (app f (app m (lam x (throw t (app f x))))))");
    CHECK(ct_equal(lhs, rhs, 5000) == Equality::Equal);
    CHECK(ct_equal(C("(app a b)"), C("(app a b)"), 10) == Equality::Equal);
    CHECK(ct_equal(C("a"), C("b"), 100) == Equality::NotEqual);
  }

  TEST_CASE("transport completeness") {
    const std::size_t n = 120;
    std::vector<int> res(n, -1);
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      std::mt19937_64 rng(10500 + i);
      CtTerm t = ct_canonicalize(gen_ct(10500 + i, 1 + i % 10));
      Expr end = ccv::testing::random_walk(ct_to_mu(t), 1 + index_draw(rng, 3), rng);
      CtTerm goal = ct_vertical_nf(mu_inverse(end));
      auto p = ct_reaches(t, goal, 5000, 12);
      if (p) res[i] = ct_replay(t, *p, goal);
    });
    std::size_t found = 0;
    for (std::size_t i = 0; i < n; ++i) {
      CHECK_MESSAGE(res[i] != 0, "seed ", i);
      found += res[i] == 1;
    }
    CHECK(found >= n * 3 / 4);
  }

  TEST_CASE("Church-Rosser on small peaks") {
    const std::size_t n = 80;
    std::vector<int> res(n, 0);
    for_seeds(n, serial_from_env(), [&](std::size_t i) {
      std::mt19937_64 rng(10800 + i);
      CtTerm t = ct_canonicalize(gen_ct(10800 + i, 1 + i % 15));
      CtTerm a = ccv::testing::random_ct_walk(t, index_draw(rng, 6), rng);
      CtTerm b = ccv::testing::random_ct_walk(t, index_draw(rng, 6), rng);
      res[i] = ct_equal(a, b, 5000) == Equality::Equal;
    });
    for (std::size_t i = 0; i < n; ++i) CHECK_MESSAGE(res[i], "seed ", i);
  }
}
