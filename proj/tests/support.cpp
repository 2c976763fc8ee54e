#include "support.hpp"

#include <cstdlib>
#include <map>

#include "ccv/corpus.hpp"
#include "ccv/gen.hpp"

namespace ccv::testing {

void for_seeds(std::size_t n, bool serial, const std::function<void(std::size_t)>& body) {
  if (serial) {
    for (std::size_t i = 0; i < n; ++i) body(i);
    return;
  }
  const long count = static_cast<long>(n);
#pragma omp parallel for schedule(dynamic)
  for (long i = 0; i < count; ++i) body(static_cast<std::size_t>(i));
}

bool serial_from_env() { return std::getenv("CCV_SERIAL") != nullptr; }

Expr random_walk(const Expr& m, std::size_t len, std::mt19937_64& rng, std::vector<RedexSite>* sites) {
  Fresh fresh(m);
  Expr cur = m;
  for (std::size_t i = 0; i < len; ++i) {
    auto rs = redexes(cur);
    if (rs.empty()) break;
    const RedexSite& s = rs[index_draw(rng, rs.size())];
    cur = step_unchecked(cur, s, fresh);
    if (sites) sites->push_back(s);
  }
  return cur;
}

CtTerm random_ct_walk(const CtTerm& t, std::size_t len, std::mt19937_64& rng) {
  CtTerm cur = t;
  for (std::size_t i = 0; i < len; ++i) {
    auto rs = ct_redexes(cur);
    if (rs.empty()) break;
    cur = ct_step(cur, rs[index_draw(rng, rs.size())]);
  }
  return cur;
}

TargetWalk random_target_walk(const TExpr& t, std::size_t len, std::mt19937_64& rng) {
  TargetWalk w{t, {}};
  for (std::size_t i = 0; i < len; ++i) {
    auto steps = t_step(w.end);
    if (steps.empty()) break;
    const TStep& s = steps[index_draw(rng, steps.size())];
    w.steps.push_back({s.pos, s.rule});
    w.end = s.result;
  }
  return w;
}

// ---------------------------------------------------------------- types

namespace {

SPtr random_sub(std::mt19937_64& rng, int depth);
SPtr random_union(std::mt19937_64& rng, int depth);

SPtr random_raw(std::mt19937_64& rng, int depth) {
  if (depth <= 1 || index_draw(rng, 3) == 0) return s_atom(index_draw(rng, 2) ? "a" : "b");
  return s_arrow(random_sub(rng, depth - 1), random_union(rng, depth - 1));
}

SPtr random_sub(std::mt19937_64& rng, int depth) {
  std::vector<SPtr> raws(index_draw(rng, 3));
  for (auto& r : raws) r = random_raw(rng, depth);
  return s_cap(std::move(raws));
}

SPtr random_union(std::mt19937_64& rng, int depth) {
  std::vector<SPtr> subs(index_draw(rng, 3));
  for (auto& s : subs) s = random_sub(rng, depth);
  return s_cup(std::move(subs));
}

}  // namespace

SPtr random_type(std::mt19937_64& rng, int max_depth) { return random_union(rng, max_depth); }

SPtr perturb_type(const SPtr& t, std::mt19937_64& rng, int max_depth) {
  std::vector<SPtr> subs;
  for (auto& s : cups_of(t)) {
    if (index_draw(rng, 5) == 0) continue;
    std::vector<SPtr> raws;
    for (auto& r : caps_of(s))
      if (index_draw(rng, 10) >= 3) raws.push_back(r);
    subs.push_back(s_cap(std::move(raws)));
  }
  if (index_draw(rng, 2)) subs.push_back(random_sub(rng, max_depth));
  return s_cup(std::move(subs));
}

namespace {

struct Saturation {
  std::vector<SPtr> types;
  std::map<std::string, std::size_t> index;

  std::size_t add(const SPtr& t) {
    std::string k = s_key(t);
    if (auto it = index.find(k); it != index.end()) return it->second;
    std::size_t id = types.size();
    types.push_back(t);
    index.emplace(k, id);
    auto cups = cups_of(t);
    if (cups.size() != 1) {
      for (auto& c : cups) add(c);
      for (std::size_t mask = 0; mask < (std::size_t{1} << cups.size()); ++mask) {
        std::vector<SPtr> part;
        for (std::size_t i = 0; i < cups.size(); ++i)
          if (mask >> i & 1) part.push_back(cups[i]);
        add(s_cup(std::move(part)));
      }
      return id;
    }
    auto caps = caps_of(t);
    if (caps.size() != 1) {
      for (auto& c : caps) add(c);
      for (std::size_t mask = 0; mask < (std::size_t{1} << caps.size()); ++mask) {
        std::vector<SPtr> part;
        for (std::size_t i = 0; i < caps.size(); ++i)
          if (mask >> i & 1) part.push_back(caps[i]);
        add(s_cap(std::move(part)));
      }
      return id;
    }
    if (caps[0]->kind == SKind::Arrow) {
      add(caps[0]->dom);
      add(caps[0]->cod);
    }
    return id;
  }

  std::size_t id(const SPtr& t) const { return index.at(s_key(t)); }

  static std::vector<std::vector<SPtr>> sub_multisets(const std::vector<SPtr>& xs) {
    std::vector<std::vector<SPtr>> out;
    for (std::size_t mask = 0; mask < (std::size_t{1} << xs.size()); ++mask) {
      std::vector<SPtr> part;
      for (std::size_t i = 0; i < xs.size(); ++i)
        if (mask >> i & 1) part.push_back(xs[i]);
      out.push_back(std::move(part));
    }
    return out;
  }

  bool run(std::size_t a, std::size_t b) {
    const std::size_t n = types.size();
    std::vector<std::vector<char>> le(n, std::vector<char>(n, 0));
    for (std::size_t i = 0; i < n; ++i) le[i][i] = 1;

    struct Info {
      bool sub = false, arrow = false;
      std::size_t dom = 0, cod = 0;
      std::vector<std::size_t> caps, cups;
      std::vector<std::size_t> cap_parts, cup_parts;
    };
    std::vector<Info> info(n);
    for (std::size_t i = 0; i < n; ++i) {
      const SPtr& t = types[i];
      Info& f = info[i];
      for (auto& c : cups_of(t)) f.cups.push_back(id(c));
      if (f.cups.size() != 1) {
        for (auto& part : sub_multisets(cups_of(t))) f.cup_parts.push_back(id(s_cup(part)));
      } else {
        f.cup_parts.push_back(i);
      }
      f.sub = is_subsidiary(t);
      if (!f.sub) continue;
      auto caps = caps_of(t);
      for (auto& r : caps) f.caps.push_back(id(r));
      if (caps.size() != 1) {
        for (auto& part : sub_multisets(caps)) f.cap_parts.push_back(id(s_cap(part)));
      } else {
        f.cap_parts.push_back(i);
        if (caps[0]->kind == SKind::Arrow) {
          f.arrow = true;
          f.dom = id(caps[0]->dom);
          f.cod = id(caps[0]->cod);
        }
      }
    }

    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) {
          if (le[i][j]) continue;
          const Info& x = info[i];
          const Info& y = info[j];
          bool ok = false;
          if (x.arrow && y.arrow) ok = le[y.dom][x.dom] && le[x.cod][y.cod];
          if (!ok && x.sub && y.sub) {
            for (std::size_t p : x.cap_parts)
              if (p != i && le[p][j]) ok = true;
            if (!ok && y.caps.size() != 1) {
              ok = true;
              for (std::size_t r : y.caps) ok = ok && le[i][r];
            }
          }
          if (!ok)
            for (std::size_t p : y.cup_parts)
              if (p != j && le[i][p]) ok = true;
          if (!ok && x.cups.size() != 1) {
            ok = true;
            for (std::size_t c : x.cups) ok = ok && le[c][j];
          }
          if (ok) {
            le[i][j] = 1;
            changed = true;
          }
        }
      for (std::size_t k = 0; k < n; ++k)
        for (std::size_t i = 0; i < n; ++i) {
          if (!le[i][k]) continue;
          for (std::size_t j = 0; j < n; ++j)
            if (le[k][j] && !le[i][j]) {
              le[i][j] = 1;
              changed = true;
            }
        }
    }
    return le[a][b];
  }
};

}  // namespace

bool subtype_by_saturation(const SPtr& a, const SPtr& b) {
  Saturation s;
  s.add(s_omega());
  s.add(s_mho());
  std::size_t ia = s.add(a);
  std::size_t ib = s.add(b);
  return s.run(ia, ib);
}

// ---------------------------------------------------------------- fixed-point typing

SDeriv fixed_point_derivation(const SPtr& s, const SPtr& t) {
  Term m = parse_term("(app (app " + y_eta() + " f) z)");
  const Expr& yf = m->a;
  const Expr& y = yf->a;
  const Expr& yz = y->a;
  const Expr& body = yz->a;  // (D D) z
  const Expr& dd = body->a;
  const Expr& d1 = dd->a;
  const Expr& dw = d1->a;     // λw. f(λv.xxv) w
  const Expr& dbody = dw->a;  // f(λv.xxv) w
  const Expr& fl = dbody->a;  // f(λv.xxv)

  SPtr ft = s_arrow(s_omega(), s_mho());
  SPtr st = s_arrow(s, t);
  SDeriv d_fl = sd_node("app", fl, s_mho(), {sd_node("var", fl->a, ft), sd_node("lam", fl->b, s_omega())});
  SDeriv d_dbody = sd_node("app", dbody, t, {d_fl});
  SDeriv d_dw = sd_node("lam", dw, st, {d_dbody});
  SDeriv d_d1 = sd_node("lam", d1, s_arrow(s_omega(), st), {d_dw});
  SDeriv d_dd = sd_node("app", dd, st, {d_d1, sd_node("lam", dd->b, s_omega())});
  SDeriv d_body = sd_node("app", body, t, {d_dd, sd_node("var", body->b, s)});
  SDeriv d_yz = sd_node("lam", yz, st, {d_body});
  SDeriv d_y = sd_node("lam", y, s_arrow(ft, st), {d_yz});
  SDeriv d_yf = sd_node("app", yf, st, {d_y, sd_node("var", yf->b, ft)});
  SDeriv root = sd_node("app", m, t, {d_yf, sd_node("var", m->b, s)});
  assign_envs(root, {{"f", ft}, {"z", s}}, {});
  return root;
}

// ---------------------------------------------------------------- judgements

namespace {

template <class Env, class Key>
bool env_same(const Env& a, const Env& b, Key key_of) {
  std::map<std::string, std::string> ka, kb;
  for (auto& [n, t] : a) ka[n] = key_of(t);
  for (auto& [n, t] : b) kb[n] = key_of(t);
  return ka == kb;
}

}  // namespace

bool same_target_judgement(const TDeriv& a, const TDeriv& b) {
  return t_alpha_equal(a.subject, b.subject) && same_target_context(a, b);
}

bool same_target_context(const TDeriv& a, const TDeriv& b) {
  auto strip = [](const TEnv& e) {
    TEnv out;
    for (auto& [n, t] : e)
      if (!(t->kind == TKind::Cap && t->items.empty())) out[n] = t;
    return out;
  };
  return ty_equal(a.type, b.type) && env_same(strip(a.pi), strip(b.pi), ty_key) && env_same(strip(a.theta), strip(b.theta), ty_key);
}

bool same_source_judgement(const SDeriv& a, const SDeriv& b) {
  return alpha_equal(a.subject, b.subject) && s_equal(a.type, b.type) &&
         env_same(normalize_gamma(a.gamma), normalize_gamma(b.gamma), s_key) &&
         env_same(normalize_delta(a.delta), normalize_delta(b.delta), s_key);
}

TypedPath typed_target_path(std::uint64_t seed, std::size_t size, std::size_t fuel) {
  TypedPath p;
  try {
    Term m = canonicalize(gen_term(seed, size));
    TExpr img = cps(m);
    std::vector<TStep> trace;
    TExpr nf;
    bool head = false;
    auto o = t_normalize_beta(img, fuel, true);
    if (o.kind == TargetOutcome::Kind::Normal) {
      nf = o.term;
      trace = std::move(o.trace);
    } else {
      auto s = solvable(img, fuel, true);
      if (!s.solvable) return {};
      nf = s.term;
      trace = std::move(s.trace);
      head = true;
    }
    p.terms.push_back(img);
    for (auto& s : trace) {
      p.redexes.push_back(s.pos);
      p.terms.push_back(s.result);
    }
    p.derivs.resize(p.terms.size());
    p.derivs.back() = t_infer_normal(nf, head);
    for (std::size_t i = trace.size(); i-- > 0;) p.derivs[i] = t_subject_expand(p.derivs[i + 1], p.terms[i], p.redexes[i]);
  } catch (const std::exception&) {
    return {};
  }
  return p;
}

}  // namespace ccv::testing
