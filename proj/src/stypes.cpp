#include "ccv/stypes.hpp"

#include <algorithm>
#include <functional>
#include <json.hpp>
#include <unordered_map>

#include "ccv/sexpr.hpp"

namespace ccv {

namespace {

SPtr mk(SKind k, std::string atom = {}, SPtr dom = nullptr, SPtr cod = nullptr, std::vector<SPtr> items = {}) {
  return std::make_shared<const SType>(SType{k, std::move(atom), std::move(dom), std::move(cod), std::move(items)});
}

bool is_raw(const SPtr& t) { return t->kind == SKind::Atom || t->kind == SKind::Arrow; }

}  // namespace

SPtr s_atom(std::string a) { return mk(SKind::Atom, std::move(a)); }

SPtr s_arrow(SPtr dom, SPtr cod) {
  if (!is_subsidiary(dom)) throw CategoryMismatch("arrow domain must be an intersection type");
  if (cod->kind == SKind::Bot) throw CategoryMismatch("arrow codomain cannot be bbot");
  return mk(SKind::Arrow, {}, std::move(dom), std::move(cod));
}

SPtr s_cap(std::vector<SPtr> raws) {
  std::vector<SPtr> out;
  for (auto& r : raws) {
    SPtr cur = r;
    while ((cur->kind == SKind::Cap || cur->kind == SKind::Cup) && cur->items.size() == 1) cur = cur->items[0];
    if (!is_raw(cur)) throw CategoryMismatch("intersection components must be raw types");
    out.push_back(cur);
  }
  return mk(SKind::Cap, {}, nullptr, nullptr, std::move(out));
}

SPtr s_cup(std::vector<SPtr> subs) {
  std::vector<SPtr> out;
  for (auto& s : subs) {
    SPtr cur = s;
    while (cur->kind == SKind::Cup && cur->items.size() == 1) cur = cur->items[0];
    if (!is_subsidiary(cur)) throw CategoryMismatch("union components must be intersection types");
    out.push_back(cur);
  }
  return mk(SKind::Cup, {}, nullptr, nullptr, std::move(out));
}

SPtr s_bot() { return mk(SKind::Bot); }
SPtr s_omega() { return mk(SKind::Cap); }
SPtr s_mho() { return mk(SKind::Cup); }

bool is_subsidiary(const SPtr& t) {
  switch (t->kind) {
    case SKind::Atom:
    case SKind::Arrow:
    case SKind::Cap: return true;
    case SKind::Cup: return t->items.size() == 1 && is_subsidiary(t->items[0]);
    case SKind::Bot: return false;
  }
  return false;
}

std::vector<SPtr> caps_of(const SPtr& s) {
  switch (s->kind) {
    case SKind::Atom:
    case SKind::Arrow: return {s};
    case SKind::Cap: return s->items;
    case SKind::Cup:
      if (s->items.size() == 1) return caps_of(s->items[0]);
      [[fallthrough]];
    default: throw CategoryMismatch("not an intersection type: " + s_to_sexpr(s));
  }
}

std::vector<SPtr> cups_of(const SPtr& t) {
  switch (t->kind) {
    case SKind::Cup: return t->items;
    case SKind::Bot: throw CategoryMismatch("bbot has no union components");
    default: return {t};
  }
}

namespace {

std::string raw_key(const SPtr& r);

std::string sub_key(const SPtr& s) {
  auto cs = caps_of(s);
  if (cs.size() == 1) return raw_key(cs[0]);
  std::vector<std::string> ks;
  for (auto& c : cs) ks.push_back(raw_key(c));
  std::sort(ks.begin(), ks.end());
  std::string out = "[";
  for (std::size_t i = 0; i < ks.size(); ++i) out += (i ? "&" : "") + ks[i];
  return out + "]";
}

std::string raw_key(const SPtr& r) {
  if (r->kind == SKind::Atom) return r->atom;
  return "(" + sub_key(r->dom) + ">" + s_key(r->cod) + ")";
}

}  // namespace

std::string s_key(const SPtr& t) {
  if (t->kind == SKind::Bot) return "!";
  auto us = cups_of(t);
  if (us.size() == 1) return sub_key(us[0]);
  std::vector<std::string> ks;
  for (auto& u : us) ks.push_back(sub_key(u));
  std::sort(ks.begin(), ks.end());
  std::string out = "{";
  for (std::size_t i = 0; i < ks.size(); ++i) out += (i ? "|" : "") + ks[i];
  return out + "}";
}

bool s_equal(const SPtr& a, const SPtr& b) { return a == b || s_key(a) == s_key(b); }

std::string s_to_sexpr(const SPtr& t) {
  switch (t->kind) {
    case SKind::Atom: return "(atom " + t->atom + ")";
    case SKind::Arrow: return "(arr " + s_to_sexpr(t->dom) + " " + s_to_sexpr(t->cod) + ")";
    case SKind::Cap:
    case SKind::Cup: {
      std::string out = t->kind == SKind::Cap ? "(cap" : "(cup";
      for (auto& i : t->items) out += " " + s_to_sexpr(i);
      return out + ")";
    }
    case SKind::Bot: return "bbot";
  }
  return "?";
}

std::string s_to_pretty(const SPtr& t) {
  switch (t->kind) {
    case SKind::Atom: return t->atom;
    case SKind::Arrow: return "(" + s_to_pretty(t->dom) + "→" + s_to_pretty(t->cod) + ")";
    case SKind::Cap:
    case SKind::Cup: {
      if (t->items.empty()) return t->kind == SKind::Cap ? "ω" : "℧";
      if (t->items.size() == 1) return s_to_pretty(t->items[0]);
      std::string out = "(";
      for (std::size_t i = 0; i < t->items.size(); ++i)
        out += (i ? (t->kind == SKind::Cap ? "∩" : "∪") : "") + s_to_pretty(t->items[i]);
      return out + ")";
    }
    case SKind::Bot: return "⊥⊥";
  }
  return "?";
}

namespace {

SPtr type_of(const Sexp& s) {
  if (s.is_atom) {
    if (s.atom == "bbot") return s_bot();
    throw ParseError("unknown type token: " + s.atom);
  }
  if (s.head_is("atom")) {
    if (s.items.size() != 2 || !s.items[1].is_atom) throw ParseError("(atom a) expects a name");
    return s_atom(s.items[1].atom);
  }
  if (s.head_is("arr")) {
    if (s.items.size() != 3) throw ParseError("(arr S T) expects two types");
    return s_arrow(type_of(s.items[1]), type_of(s.items[2]));
  }
  if (s.head_is("cap") || s.head_is("cup")) {
    std::vector<SPtr> xs;
    for (std::size_t i = 1; i < s.items.size(); ++i) xs.push_back(type_of(s.items[i]));
    return s.head_is("cap") ? s_cap(std::move(xs)) : s_cup(std::move(xs));
  }
  throw ParseError("unknown type form: " + show_sexp(s));
}

}  // namespace

SPtr s_parse(const std::string& text) { return type_of(read_sexp(text)); }

bool s_has_omega_or_mho(const SPtr& t) {
  switch (t->kind) {
    case SKind::Atom:
    case SKind::Bot: return false;
    case SKind::Arrow: return s_has_omega_or_mho(t->dom) || s_has_omega_or_mho(t->cod);
    default:
      if (t->items.empty()) return true;
      return std::any_of(t->items.begin(), t->items.end(), [](const SPtr& i) { return s_has_omega_or_mho(i); });
  }
}

std::size_t s_depth(const SPtr& t) {
  switch (t->kind) {
    case SKind::Atom: return 1;
    case SKind::Arrow: return 1 + std::max(s_depth(t->dom), s_depth(t->cod));
    case SKind::Bot: return 0;
    default: {
      std::size_t d = 0;
      for (auto& i : t->items) d = std::max(d, s_depth(i));
      return d;
    }
  }
}

namespace {

bool le_t(const SPtr& a, const SPtr& b);

bool le_r(const SPtr& a, const SPtr& b) {
  if (a->kind == SKind::Atom || b->kind == SKind::Atom) return a->kind == b->kind && a->atom == b->atom;
  return le_t(b->dom, a->dom) && le_t(a->cod, b->cod);
}

bool le_s(const SPtr& a, const SPtr& b) {
  auto as = caps_of(a);
  for (auto& rb : caps_of(b))
    if (std::none_of(as.begin(), as.end(), [&](const SPtr& ra) { return le_r(ra, rb); })) return false;
  return true;
}

bool le_t(const SPtr& a, const SPtr& b) {
  auto bs = cups_of(b);
  for (auto& sa : cups_of(a))
    if (std::none_of(bs.begin(), bs.end(), [&](const SPtr& sb) { return le_s(sa, sb); })) return false;
  return true;
}

}  // namespace

bool subtype(const SPtr& a, const SPtr& b) {
  if (a->kind == SKind::Bot || b->kind == SKind::Bot) {
    if (a->kind == b->kind) return true;
    throw CategoryMismatch("bbot compared with a type");
  }
  return le_t(a, b);
}

// ---------------------------------------------------------------- environments

SPtr env_x(const SEnv& g, const std::string& x) {
  auto it = g.find(x);
  return it == g.end() ? s_omega() : it->second;
}

SPtr env_k(const SEnv& d, const std::string& k) {
  auto it = d.find(k);
  return it == d.end() ? s_mho() : it->second;
}

namespace {

const std::string kOmegaKey = "[]";
const std::string kMhoKey = "{}";

SEnv drop_key(const SEnv& e, const std::string& key) {
  SEnv out;
  for (auto& [n, t] : e)
    if (s_key(t) != key) out.emplace(n, t);
  return out;
}

bool env_equal(const SEnv& a, const SEnv& b, const std::string& dflt) {
  SEnv x = drop_key(a, dflt), y = drop_key(b, dflt);
  if (x.size() != y.size()) return false;
  for (auto& [n, t] : x) {
    auto it = y.find(n);
    if (it == y.end() || !s_equal(t, it->second)) return false;
  }
  return true;
}

SEnv with_entry(SEnv e, const std::string& n, const SPtr& t) {
  e[n] = t;
  return e;
}

SEnv without(SEnv e, const std::string& n) {
  e.erase(n);
  return e;
}

}  // namespace

SEnv normalize_gamma(const SEnv& g) { return drop_key(g, kOmegaKey); }
SEnv normalize_delta(const SEnv& d) { return drop_key(d, kMhoKey); }

// ---------------------------------------------------------------- checking

namespace {

// Multiset equality of key lists.
bool same_keys(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

struct Checker {
  CheckMode mode;
  CheckResult res;

  bool fail(const SDeriv& d, const Path& p, std::string msg) {
    res.ok = false;
    res.rule = d.rule;
    res.position = p;
    res.message = std::move(msg);
    return false;
  }

  bool same_envs(const SDeriv& d, const SDeriv& p) {
    return env_equal(d.gamma, p.gamma, kOmegaKey) && env_equal(d.delta, p.delta, kMhoKey);
  }

  bool premises(const SDeriv& d, const Path& p) {
    for (std::size_t i = 0; i < d.premises.size(); ++i) {
      Path q = p;
      q.push_back(static_cast<int>(i));
      if (!check(d.premises[i], q)) return false;
    }
    return true;
  }

  // Family premises for a binder x: premise i has x typed by comps[i] (multiset match).
  bool family(const SDeriv& d, const Path& p, std::size_t count, const Expr& body, const std::string& x,
              const std::vector<SPtr>& comps, const SPtr& type) {
    if (comps.size() != count) return fail(d, p, "family size does not match the bound type");
    std::vector<std::string> want, got;
    for (auto& c : comps) want.push_back(s_key(c));
    for (std::size_t i = 0; i < count; ++i) {
      const SDeriv& q = d.premises[i];
      if (!syntactic_equal(q.subject, body)) return fail(d, p, "family premise has the wrong subject");
      if (!s_equal(q.type, type)) return fail(d, p, "family premise has the wrong type");
      if (!env_equal(without(q.gamma, x), without(d.gamma, x), kOmegaKey) ||
          !env_equal(q.delta, d.delta, kMhoKey))
        return fail(d, p, "family premise environment differs outside the binder");
      got.push_back(s_key(env_x(q.gamma, x)));
    }
    if (!same_keys(want, got)) return fail(d, p, "binder types do not match the bound type");
    return true;
  }

  bool check(const SDeriv& d, const Path& p) {
    const Expr& e = d.subject;
    if (!e || !d.type) return fail(d, p, "missing subject or type");
    bool jump = is_jump(e);
    if (jump != (d.type->kind == SKind::Bot)) return fail(d, p, "jumps and only jumps have type bbot");
    if (d.rule == "var") {
      if (e->tag != Tag::Var || !d.premises.empty()) return fail(d, p, "var shape");
      if (!s_equal(d.type, env_x(d.gamma, e->name))) return fail(d, p, "type differs from the environment");
      return true;
    }
    if (d.rule == "lam") {
      if (e->tag != Tag::Lam) return fail(d, p, "lam shape");
      if (!is_subsidiary(d.type)) return fail(d, p, "lam type must be an intersection");
      auto arrows = caps_of(d.type);
      if (arrows.size() != d.premises.size()) return fail(d, p, "family size does not match the type");
      std::vector<std::string> want, got;
      for (auto& r : arrows) {
        if (r->kind != SKind::Arrow) return fail(d, p, "lam type component is not an arrow");
        want.push_back(s_key(r));
      }
      for (auto& q : d.premises) {
        if (!syntactic_equal(q.subject, e->a)) return fail(d, p, "lam premise has the wrong subject");
        if (q.type->kind == SKind::Bot) return fail(d, p, "lam premise typed bbot");
        if (!env_equal(without(q.gamma, e->name), without(d.gamma, e->name), kOmegaKey) ||
            !env_equal(q.delta, d.delta, kMhoKey))
          return fail(d, p, "lam premise environment differs outside the binder");
        got.push_back(s_key(s_arrow(env_x(q.gamma, e->name), q.type)));
      }
      if (!same_keys(want, got)) return fail(d, p, "arrows do not match the premises");
      return premises(d, p);
    }
    if (d.rule == "app") {
      if (e->tag != Tag::App || d.premises.empty()) return fail(d, p, "app shape");
      const SDeriv& f = d.premises[0];
      if (!syntactic_equal(f.subject, e->a)) return fail(d, p, "function premise has the wrong subject");
      if (f.type->kind == SKind::Bot) return fail(d, p, "function premise typed bbot");
      auto comps = cups_of(f.type);
      if (comps.size() + 1 != d.premises.size()) return fail(d, p, "one argument premise per union component");
      std::vector<std::string> want, got;
      for (auto& s : comps) {
        std::vector<SPtr> doms;
        for (auto& r : caps_of(s)) {
          if (r->kind != SKind::Arrow) return fail(d, p, "function type component is not an arrow");
          if (!s_equal(r->cod, d.type)) return fail(d, p, "arrow codomain differs from the result");
          doms.push_back(r->dom);
        }
        want.push_back(s_key(s_cup(doms)));
      }
      for (std::size_t i = 0; i < d.premises.size(); ++i) {
        const SDeriv& q = d.premises[i];
        if (!same_envs(d, q)) return fail(d, p, "app premise environment differs");
        if (i == 0) continue;
        if (!syntactic_equal(q.subject, e->b)) return fail(d, p, "argument premise has the wrong subject");
        if (q.type->kind == SKind::Bot) return fail(d, p, "argument premise typed bbot");
        got.push_back(s_key(q.type));
      }
      if (!same_keys(want, got)) return fail(d, p, "argument types do not match the function type");
      return premises(d, p);
    }
    if (d.rule == "let" || d.rule == "jlet") {
      if (e->tag != (d.rule == "let" ? Tag::Where : Tag::JWhere) || d.premises.empty())
        return fail(d, p, d.rule + " shape");
      const SDeriv& n = d.premises.back();
      if (!syntactic_equal(n.subject, e->b) || n.type->kind == SKind::Bot)
        return fail(d, p, "bound premise has the wrong subject or type");
      if (!same_envs(d, n)) return fail(d, p, "bound premise environment differs");
      if (!family(d, p, d.premises.size() - 1, e->a, e->name, cups_of(n.type), d.type)) return false;
      return premises(d, p);
    }
    if (d.rule == "mu") {
      if (e->tag != Tag::Mu || d.premises.size() != 1) return fail(d, p, "mu shape");
      const SDeriv& q = d.premises[0];
      if (!syntactic_equal(q.subject, e->a)) return fail(d, p, "mu premise has the wrong subject");
      if (!env_equal(q.gamma, d.gamma, kOmegaKey) ||
          !env_equal(q.delta, with_entry(d.delta, e->name, d.type), kMhoKey))
        return fail(d, p, "mu premise must bind the continuation at the conclusion type");
      return premises(d, p);
    }
    if (d.rule == "jmp") {
      if (e->tag != Tag::Throw || d.premises.size() != 1) return fail(d, p, "jmp shape");
      const SDeriv& q = d.premises[0];
      if (!syntactic_equal(q.subject, e->a)) return fail(d, p, "jmp premise has the wrong subject");
      if (!same_envs(d, q)) return fail(d, p, "jmp premise environment differs");
      if (!s_equal(q.type, env_k(d.delta, e->name))) return fail(d, p, "jumped term must have the continuation type");
      return premises(d, p);
    }
    if (d.rule == "sub") {
      if (d.premises.size() != 1) return fail(d, p, "sub shape");
      const SDeriv& q = d.premises[0];
      if (!syntactic_equal(q.subject, e)) return fail(d, p, "sub premise has a different subject");
      if (!same_envs(d, q)) return fail(d, p, "sub premise environment differs");
      if (jump) return fail(d, p, "no inheritance on jumps");
      if (mode == CheckMode::Restricted && (!is_value(e) || !is_subsidiary(q.type)))
        return fail(d, p, "restricted inheritance applies to values typed by intersections only");
      if (!subtype(q.type, d.type)) return fail(d, p, "premise type is not a subtype");
      return premises(d, p);
    }
    return fail(d, p, "unknown rule " + d.rule);
  }
};

}  // namespace

CheckResult check_derivation(const SDeriv& d, CheckMode mode) {
  Checker c{mode, {}};
  try {
    c.check(d, {});
  } catch (const CategoryMismatch& ex) {
    c.res.ok = false;
    c.res.message = ex.what();
  }
  return c.res;
}

// ---------------------------------------------------------------- construction helpers

SDeriv sd_node(std::string rule, Expr subject, SPtr type, std::vector<SDeriv> premises) {
  SDeriv d;
  d.rule = std::move(rule);
  d.subject = std::move(subject);
  d.type = std::move(type);
  d.premises = std::move(premises);
  return d;
}

SDeriv sd_sub(SDeriv premise, SPtr type) {
  if (s_equal(premise.type, type)) return premise;
  Expr subj = premise.subject;
  return sd_node("sub", subj, std::move(type), {std::move(premise)});
}

void assign_envs(SDeriv& d, const SEnv& gamma, const SEnv& delta) {
  d.gamma = normalize_gamma(gamma);
  d.delta = normalize_delta(delta);
  const Expr& e = d.subject;
  if (d.rule == "var") {
    SPtr g = env_x(gamma, e->name);
    if (!s_equal(g, d.type)) {
      SDeriv v = sd_node("var", e, g);
      v.gamma = d.gamma;
      v.delta = d.delta;
      d = sd_node("sub", e, d.type, {std::move(v)});
      d.gamma = d.premises[0].gamma;
      d.delta = d.premises[0].delta;
    }
    return;
  }
  if (d.rule == "lam") {
    auto arrows = caps_of(d.type);
    for (std::size_t i = 0; i < d.premises.size(); ++i) {
      SDeriv& q = d.premises[i];
      assign_envs(q, with_entry(gamma, e->name, q.binder ? q.binder : arrows[i]->dom), delta);
    }
    return;
  }
  if (d.rule == "let" || d.rule == "jlet") {
    SDeriv& n = d.premises.back();
    assign_envs(n, gamma, delta);
    auto comps = cups_of(n.type);
    for (std::size_t i = 0; i + 1 < d.premises.size(); ++i) {
      SDeriv& q = d.premises[i];
      assign_envs(q, with_entry(gamma, e->name, q.binder ? q.binder : comps[i]), delta);
    }
    return;
  }
  if (d.rule == "mu") {
    assign_envs(d.premises[0], gamma, with_entry(delta, e->name, d.type));
    return;
  }
  if (d.rule == "jmp") {
    SPtr want = env_k(delta, e->name);
    if (!s_equal(d.premises[0].type, want)) d.premises[0] = sd_sub(std::move(d.premises[0]), want);
    assign_envs(d.premises[0], gamma, delta);
    return;
  }
  for (auto& q : d.premises) assign_envs(q, gamma, delta);
}

namespace {

// Same judgement at type tp with continuation environment dp (pointwise above the original).
SDeriv restrict(const SDeriv& d, const SPtr& tp, const SEnv& dp) {
  const Expr& e = d.subject;
  if (d.rule == "sub") return restrict(d.premises[0], tp, dp);
  if (d.rule == "var") return sd_sub(sd_node("var", e, d.type), tp);
  if (d.rule == "lam") {
    std::vector<SDeriv> ps;
    std::vector<SPtr> arrows;
    for (auto& q : d.premises) {
      arrows.push_back(s_arrow(env_x(q.gamma, e->name), q.type));
      ps.push_back(restrict(q, q.type, dp));
      ps.back().binder = env_x(q.gamma, e->name);
    }
    return sd_sub(sd_node("lam", e, s_cap(arrows), std::move(ps)), tp);
  }
  if (d.rule == "app") {
    std::vector<SPtr> comps;
    for (auto& s : cups_of(d.premises[0].type)) {
      std::vector<SPtr> arrows;
      for (auto& r : caps_of(s)) arrows.push_back(s_arrow(r->dom, tp));
      comps.push_back(s_cap(arrows));
    }
    std::vector<SDeriv> ps{restrict(d.premises[0], s_cup(comps), dp)};
    for (std::size_t i = 1; i < d.premises.size(); ++i)
      ps.push_back(restrict(d.premises[i], d.premises[i].type, dp));
    return sd_node("app", e, tp, std::move(ps));
  }
  if (d.rule == "let" || d.rule == "jlet") {
    std::vector<SDeriv> ps;
    for (std::size_t i = 0; i + 1 < d.premises.size(); ++i) {
      ps.push_back(restrict(d.premises[i], tp, dp));
      ps.back().binder = env_x(d.premises[i].gamma, e->name);
    }
    const SDeriv& n = d.premises.back();
    ps.push_back(restrict(n, n.type, dp));
    return sd_node(d.rule, e, tp, std::move(ps));
  }
  if (d.rule == "mu") return sd_node("mu", e, tp, {restrict(d.premises[0], s_bot(), with_entry(dp, e->name, tp))});
  if (d.rule == "jmp") return sd_node("jmp", e, tp, {restrict(d.premises[0], env_k(dp, e->name), dp)});
  throw std::invalid_argument("unknown rule " + d.rule);
}

}  // namespace

SDeriv to_restricted(const SDeriv& d) {
  SDeriv r = restrict(d, d.type, d.delta);
  assign_envs(r, d.gamma, d.delta);
  return r;
}

SDeriv value_intersection(const Expr& v, const std::vector<SDeriv>& ds) {
  if (!is_value(v)) throw std::invalid_argument("value_intersection expects a value");
  std::vector<SPtr> parts;
  for (auto& d : ds)
    for (auto& r : caps_of(d.type)) parts.push_back(r);
  SPtr target = s_cap(parts);
  if (v->tag == Tag::Var) return sd_node("var", v, target);
  std::vector<SDeriv> fam;
  std::vector<SPtr> arrows;
  for (auto& d : ds) {
    const SDeriv* cur = &d;
    while (cur->rule == "sub") cur = &cur->premises[0];
    if (cur->rule != "lam") throw std::invalid_argument("value_intersection: not a lam derivation");
    for (std::size_t i = 0; i < cur->premises.size(); ++i) {
      fam.push_back(cur->premises[i]);
      arrows.push_back(caps_of(cur->type)[i]);
    }
  }
  return sd_sub(sd_node("lam", v, s_cap(arrows), std::move(fam)), target);
}

namespace {

bool env_has_omega(const SEnv& e) {
  return std::any_of(e.begin(), e.end(), [](const auto& kv) { return s_has_omega_or_mho(kv.second); });
}

}  // namespace

bool uses_omega_inside(const SDeriv& d) {
  if (s_has_omega_or_mho(d.type) || env_has_omega(d.gamma) || env_has_omega(d.delta)) return true;
  return std::any_of(d.premises.begin(), d.premises.end(), [](const SDeriv& q) { return uses_omega_inside(q); });
}

bool judgement_free_of_omega_mho(const SDeriv& d) {
  return !s_has_omega_or_mho(d.type) && !env_has_omega(d.gamma) && !env_has_omega(d.delta);
}

// ---------------------------------------------------------------- JSON

namespace {

using json = nlohmann::ordered_json;

json env_json(const SEnv& e) {
  json o = json::object();
  for (auto& [n, t] : e) o[n] = s_to_sexpr(t);
  return o;
}

SEnv env_from(const json& o) {
  SEnv e;
  for (auto& [n, t] : o.items()) e[n] = s_parse(t.get<std::string>());
  return e;
}

std::size_t index_count(const SDeriv& d) {
  if (d.rule == "lam") return d.premises.size();
  if (d.rule == "app" || d.rule == "let" || d.rule == "jlet") return d.premises.size() - 1;
  return 0;
}

json to_json(const SDeriv& d) {
  json o;
  o["rule"] = d.rule;
  o["indices"] = index_count(d);
  o["judgement"] = {{"gamma", env_json(d.gamma)},
                    {"term", to_sexpr(d.subject)},
                    {"type", s_to_sexpr(d.type)},
                    {"delta", env_json(d.delta)}};
  json ps = json::array();
  for (auto& q : d.premises) ps.push_back(to_json(q));
  o["premises"] = ps;
  return o;
}

SDeriv from_json(const json& o) {
  SDeriv d;
  d.rule = o.at("rule").get<std::string>();
  const json& j = o.at("judgement");
  d.gamma = env_from(j.at("gamma"));
  d.delta = env_from(j.at("delta"));
  d.subject = parse_expr(j.at("term").get<std::string>());
  d.type = s_parse(j.at("type").get<std::string>());
  for (auto& q : o.at("premises")) d.premises.push_back(from_json(q));
  bool family = d.rule == "lam" || d.rule == "let" || d.rule == "jlet";
  std::size_t n = d.rule == "lam" ? d.premises.size() : d.premises.empty() ? 0 : d.premises.size() - 1;
  for (std::size_t i = 0; family && i < n; ++i) d.premises[i].binder = env_x(d.premises[i].gamma, d.subject->name);
  return d;
}

}  // namespace

std::string sderiv_json(const SDeriv& d) { return to_json(d).dump(); }
SDeriv sderiv_from_json(const std::string& text) { return from_json(json::parse(text)); }

// ---------------------------------------------------------------- bounded inference

namespace {

std::size_t atom_count(const SPtr& t) {
  switch (t->kind) {
    case SKind::Atom: return 1;
    case SKind::Arrow: return atom_count(t->dom) + atom_count(t->cod);
    case SKind::Bot: return 0;
    default: {
      std::size_t n = 0;
      for (auto& i : t->items) n += atom_count(i);
      return n;
    }
  }
}

std::size_t width(const SPtr& t) {
  switch (t->kind) {
    case SKind::Atom:
    case SKind::Bot: return 1;
    case SKind::Arrow: return std::max(width(t->dom), width(t->cod));
    default: {
      std::size_t w = t->items.size();
      for (auto& i : t->items) w = std::max(w, width(i));
      return w;
    }
  }
}

// ω/℧-free types first, then fewer atoms, smaller depth, narrower.
void order(std::vector<SPtr>& ts) {
  auto rank = [](const SPtr& t) {
    return std::make_tuple(s_has_omega_or_mho(t), atom_count(t), s_depth(t), width(t), s_key(t));
  };
  std::stable_sort(ts.begin(), ts.end(), [&](const SPtr& a, const SPtr& b) { return rank(a) < rank(b); });
}

template <class F>
void combos(std::size_t n, std::size_t k, F&& f) {
  std::vector<std::size_t> idx;
  std::function<void(std::size_t)> go = [&](std::size_t start) {
    f(idx);
    if (idx.size() == k) return;
    for (std::size_t i = start; i < n; ++i) {
      idx.push_back(i);
      go(i + 1);
      idx.pop_back();
    }
  };
  go(0);
}

std::vector<SPtr> subs_over(const std::vector<SPtr>& raws, int w) {
  std::vector<SPtr> out;
  combos(raws.size(), static_cast<std::size_t>(w), [&](const std::vector<std::size_t>& ix) {
    std::vector<SPtr> xs;
    for (auto i : ix) xs.push_back(raws[i]);
    out.push_back(xs.size() == 1 ? xs[0] : s_cap(xs));
  });
  return out;
}

std::vector<SPtr> types_over(const std::vector<SPtr>& subs, int w) {
  std::vector<SPtr> out;
  combos(subs.size(), static_cast<std::size_t>(w), [&](const std::vector<std::size_t>& ix) {
    std::vector<SPtr> xs;
    for (auto i : ix) xs.push_back(subs[i]);
    out.push_back(xs.size() == 1 ? xs[0] : s_cup(xs));
  });
  return out;
}

}  // namespace

Universe make_universe(const Budget& b) {
  std::vector<SPtr> atoms;
  for (int i = 0; i < b.atoms; ++i) atoms.push_back(s_atom(std::string(1, static_cast<char>('a' + i))));
  std::vector<SPtr> raws = atoms;
  std::vector<SPtr> subs = subs_over(raws, b.cap_width);
  std::vector<SPtr> types = types_over(subs, b.cup_width);
  for (int d = 2; d <= b.depth; ++d) {
    raws = atoms;
    for (auto& s : subs)
      for (auto& t : types) raws.push_back(s_arrow(s, t));
    subs = subs_over(raws, b.cap_width);
    types = types_over(subs, b.cup_width);
  }
  order(raws);
  order(subs);
  order(types);
  return {raws, subs, types};
}

namespace {

struct OutOfSteps {};

struct Search {
  const Budget& b;
  Universe u;
  std::size_t steps = 0;
  std::unordered_map<std::string, std::optional<SDeriv>> memo;

  std::string env_key(const SEnv& g, const std::set<std::string>& names) {
    std::string k;
    for (auto& n : names) {
      auto it = g.find(n);
      if (it != g.end()) k += n + ":" + s_key(it->second) + ";";
    }
    return k;
  }

  std::optional<SDeriv> derive(const SEnv& g, const Expr& m, const SPtr& t, const SEnv& d) {
    if (++steps > b.steps) throw OutOfSteps{};
    FreeVars fv = free_vars(m);
    std::string key = std::to_string(reinterpret_cast<std::uintptr_t>(m.get())) + "|" + s_key(t) + "|" +
                      env_key(g, fv.ordinary) + "|" + env_key(d, fv.continuation);
    auto it = memo.find(key);
    if (it != memo.end()) return it->second;
    auto r = go(g, m, t, d);
    memo[key] = r;
    return r;
  }

  std::optional<SDeriv> go(const SEnv& g, const Expr& m, const SPtr& t, const SEnv& d) {
    switch (m->tag) {
      case Tag::Var: {
        SPtr gx = env_x(g, m->name);
        if (!subtype(gx, t)) return std::nullopt;
        return sd_sub(sd_node("var", m, gx), t);
      }
      case Tag::Lam: {
        for (auto& s : cups_of(t)) {
          std::vector<SDeriv> fam;
          bool ok = true;
          for (auto& r : caps_of(s)) {
            if (r->kind != SKind::Arrow) {
              ok = false;
              break;
            }
            auto p = derive(with_entry(g, m->name, r->dom), m->a, r->cod, d);
            if (!p) {
              ok = false;
              break;
            }
            p->binder = r->dom;
            fam.push_back(std::move(*p));
          }
          if (ok) return sd_sub(sd_node("lam", m, s.get()->kind == SKind::Cap ? s : s_cap({s}), std::move(fam)), t);
        }
        return std::nullopt;
      }
      case Tag::App: {
        // Function types ⋃_i ⋂_j (S_ij → t) with components drawn from the universe.
        std::vector<SPtr> comps;  // ⋂_j (S_ij → t)
        for (auto& s : u.subs) {
          std::vector<SPtr> arrows;
          for (auto& r : caps_of(s)) arrows.push_back(s_arrow(r, t));
          comps.push_back(s_cap(arrows));
        }
        std::vector<SPtr> cands = types_over(comps, b.cup_width);
        for (auto& ft : cands) {
          std::vector<SDeriv> ps;
          bool ok = true;
          for (auto& s : cups_of(ft)) {
            std::vector<SPtr> doms;
            for (auto& r : caps_of(s)) doms.push_back(r->dom);
            auto q = derive(g, m->b, s_cup(doms), d);
            if (!q) {
              ok = false;
              break;
            }
            ps.push_back(std::move(*q));
          }
          if (!ok) continue;
          auto f = derive(g, m->a, ft, d);
          if (!f) continue;
          ps.insert(ps.begin(), std::move(*f));
          return sd_node("app", m, t, std::move(ps));
        }
        return std::nullopt;
      }
      case Tag::Where:
      case Tag::JWhere: {
        for (auto& nt : u.types) {
          auto n = derive(g, m->b, nt, d);
          if (!n) continue;
          std::vector<SDeriv> ps;
          bool ok = true;
          for (auto& s : cups_of(nt)) {
            auto q = derive(with_entry(g, m->name, s), m->a, t, d);
            if (!q) {
              ok = false;
              break;
            }
            q->binder = s;
            ps.push_back(std::move(*q));
          }
          if (!ok) continue;
          ps.push_back(std::move(*n));
          return sd_node(m->tag == Tag::Where ? "let" : "jlet", m, t, std::move(ps));
        }
        return std::nullopt;
      }
      case Tag::Mu: {
        auto j = derive(g, m->a, s_bot(), with_entry(d, m->name, t));
        if (!j) return std::nullopt;
        return sd_node("mu", m, t, {std::move(*j)});
      }
      case Tag::Throw: {
        auto q = derive(g, m->a, env_k(d, m->name), d);
        if (!q) return std::nullopt;
        return sd_node("jmp", m, t, {std::move(*q)});
      }
    }
    return std::nullopt;
  }
};

}  // namespace

std::optional<SDeriv> derive_bounded(const SEnv& gamma, const Expr& m, const SPtr& type, const SEnv& delta,
                                     const Budget& b) {
  Search s{b, make_universe(b), 0, {}};
  try {
    auto r = s.derive(gamma, m, type, delta);
    if (r) assign_envs(*r, gamma, delta);
    return r;
  } catch (const OutOfSteps&) {
    return std::nullopt;
  }
}

std::optional<Inferred> infer_bounded(const Term& m, const Budget& b) {
  Search s{b, make_universe(b), 0, {}};
  FreeVars fv = free_vars(m);
  std::vector<std::string> xs(fv.ordinary.begin(), fv.ordinary.end());
  std::vector<std::string> ks(fv.continuation.begin(), fv.continuation.end());
  std::vector<SPtr> goals = is_jump(m) ? std::vector<SPtr>{s_bot()} : s.u.types;
  try {
    // Environments are enumerated as an odometer over the universe, most informative first.
    std::vector<std::size_t> ix(xs.size(), 0), kx(ks.size(), 0);
    for (;;) {
      SEnv g, d;
      for (std::size_t i = 0; i < xs.size(); ++i) g[xs[i]] = s.u.subs[ix[i]];
      for (std::size_t i = 0; i < ks.size(); ++i) d[ks[i]] = s.u.types[kx[i]];
      for (auto& t : goals) {
        auto r = s.derive(g, m, t, d);
        if (r) {
          assign_envs(*r, g, d);
          return Inferred{{normalize_gamma(g), normalize_delta(d), m, t}, std::move(*r)};
        }
      }
      std::size_t pos = 0;
      for (; pos < ix.size(); ++pos) {
        if (++ix[pos] < s.u.subs.size()) break;
        ix[pos] = 0;
      }
      if (pos == ix.size()) {
        std::size_t q = 0;
        for (; q < kx.size(); ++q) {
          if (++kx[q] < s.u.types.size()) break;
          kx[q] = 0;
        }
        if (q == kx.size()) return std::nullopt;
      }
    }
  } catch (const OutOfSteps&) {
    return std::nullopt;
  }
}

}  // namespace ccv
