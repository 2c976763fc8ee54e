#include "ccv/ttypes.hpp"

#include <algorithm>
#include <functional>
#include <json.hpp>

#include "ccv/sexpr.hpp"

namespace ccv {

namespace {

TyPtr mk(TKind k, TCat c, std::string atom = {}, TyPtr a = nullptr, TyPtr b = nullptr,
         std::vector<TyPtr> items = {}) {
  return std::make_shared<const TType>(TType{k, c, std::move(atom), std::move(a), std::move(b), std::move(items)});
}

bool cat_in(const TyPtr& t, TCat one, TCat bar) { return t->cat == one || t->cat == bar; }

TyPtr unwrap(const TyPtr& t) {
  if (t->kind == TKind::Cap && t->items.size() == 1) return t->items[0];
  return t;
}

}  // namespace

const char* tcat_name(TCat c) {
  switch (c) {
    case TCat::Sigma: return "sigma";
    case TCat::SigmaBar: return "sigma_bar";
    case TCat::Kappa: return "kappa";
    case TCat::KappaBar: return "kappa_bar";
    case TCat::Tau: return "tau";
    case TCat::Bot: return "bot";
  }
  return "?";
}

TyPtr ty_atom(std::string a) { return mk(TKind::Atom, TCat::Sigma, std::move(a)); }

TyPtr ty_arrow(TyPtr dom, TyPtr cod) {
  if (!cat_in(dom, TCat::Sigma, TCat::SigmaBar)) throw CategoryMismatch("arrow domain must be a sigma intersection");
  if (cod->cat != TCat::Tau) throw CategoryMismatch("arrow codomain must be a tau type");
  return mk(TKind::Arrow, TCat::Sigma, {}, std::move(dom), std::move(cod));
}

TyPtr ty_sbar(std::vector<TyPtr> sigmas) {
  for (auto& s : sigmas) {
    s = unwrap(s);
    if (s->cat != TCat::Sigma) throw CategoryMismatch("sigma intersection of non-sigma types");
  }
  return mk(TKind::Cap, TCat::SigmaBar, {}, nullptr, nullptr, std::move(sigmas));
}

TyPtr ty_kappa(TyPtr sbar) {
  if (!cat_in(sbar, TCat::Sigma, TCat::SigmaBar)) throw CategoryMismatch("kappa negates a sigma intersection");
  return mk(TKind::Neg, TCat::Kappa, {}, std::move(sbar));
}

TyPtr ty_kbar(std::vector<TyPtr> kappas) {
  for (auto& k : kappas) {
    k = unwrap(k);
    if (k->cat != TCat::Kappa) throw CategoryMismatch("kappa intersection of non-kappa types");
  }
  return mk(TKind::Cap, TCat::KappaBar, {}, nullptr, nullptr, std::move(kappas));
}

TyPtr ty_tau(TyPtr kbar) {
  if (!cat_in(kbar, TCat::Kappa, TCat::KappaBar)) throw CategoryMismatch("tau negates a kappa intersection");
  return mk(TKind::Neg, TCat::Tau, {}, std::move(kbar));
}

TyPtr ty_bot() { return mk(TKind::Bot, TCat::Bot); }

std::vector<TyPtr> ty_caps(const TyPtr& t) {
  if (t->kind == TKind::Cap) return t->items;
  if (t->cat == TCat::Sigma || t->cat == TCat::Kappa) return {t};
  throw CategoryMismatch(std::string("no intersection components in category ") + tcat_name(t->cat));
}

TCat bar_of(TCat c) {
  if (c == TCat::Sigma) return TCat::SigmaBar;
  if (c == TCat::Kappa) return TCat::KappaBar;
  return c;
}

namespace {

std::string bar_key(const TyPtr& t) {
  auto cs = ty_caps(t);
  if (cs.size() == 1) return ty_key(cs[0]);
  std::vector<std::string> ks;
  for (auto& c : cs) ks.push_back(ty_key(c));
  std::sort(ks.begin(), ks.end());
  std::string out = "[";
  for (std::size_t i = 0; i < ks.size(); ++i) out += (i ? "&" : "") + ks[i];
  return out + "]";
}

}  // namespace

std::string ty_key(const TyPtr& t) {
  switch (t->kind) {
    case TKind::Atom: return t->atom;
    case TKind::Arrow: return "(" + bar_key(t->a) + ">" + ty_key(t->b) + ")";
    case TKind::Cap: return bar_key(t);
    case TKind::Neg: return "~" + bar_key(t->a);
    case TKind::Bot: return "!";
  }
  return "?";
}

bool ty_equal(const TyPtr& a, const TyPtr& b) {
  if (a == b) return true;
  if (a->kind == TKind::Bot || b->kind == TKind::Bot) return a->kind == b->kind;
  if (bar_of(a->cat) != bar_of(b->cat)) return false;
  return ty_key(a) == ty_key(b);
}

std::string ty_to_sexpr(const TyPtr& t) {
  switch (t->kind) {
    case TKind::Atom: return "(atom " + t->atom + ")";
    case TKind::Arrow: return "(arr " + ty_to_sexpr(t->a) + " " + ty_to_sexpr(t->b) + ")";
    case TKind::Cap: {
      std::string out = "(cap";
      for (auto& i : t->items) out += " " + ty_to_sexpr(i);
      return out + ")";
    }
    case TKind::Neg: return "(neg " + ty_to_sexpr(t->a) + ")";
    case TKind::Bot: return "bbot";
  }
  return "?";
}

std::string ty_to_pretty(const TyPtr& t) {
  switch (t->kind) {
    case TKind::Atom: return t->atom;
    case TKind::Arrow: return "(" + ty_to_pretty(t->a) + "→" + ty_to_pretty(t->b) + ")";
    case TKind::Cap: {
      if (t->items.empty()) return "ω";
      if (t->items.size() == 1) return ty_to_pretty(t->items[0]);
      std::string out = "(";
      for (std::size_t i = 0; i < t->items.size(); ++i) out += (i ? "∩" : "") + ty_to_pretty(t->items[i]);
      return out + ")";
    }
    case TKind::Neg: return "¬" + ty_to_pretty(t->a);
    case TKind::Bot: return "⊥⊥";
  }
  return "?";
}

namespace {

TyPtr parse_as(const Sexp& s, TCat c) {
  auto fail = [&](const char* what) -> TyPtr {
    throw ParseError(std::string("expected ") + what + " type, got " + show_sexp(s));
  };
  switch (c) {
    case TCat::Bot:
      if (s.is_atom && s.atom == "bbot") return ty_bot();
      return fail("bbot");
    case TCat::Sigma:
      if (s.head_is("atom") && s.items.size() == 2 && s.items[1].is_atom) return ty_atom(s.items[1].atom);
      if (s.head_is("arr") && s.items.size() == 3)
        return ty_arrow(parse_as(s.items[1], TCat::SigmaBar), parse_as(s.items[2], TCat::Tau));
      if (s.head_is("cap") && s.items.size() == 2) return parse_as(s.items[1], TCat::Sigma);
      return fail("sigma");
    case TCat::Kappa:
      if (s.head_is("neg") && s.items.size() == 2) return ty_kappa(parse_as(s.items[1], TCat::SigmaBar));
      if (s.head_is("cap") && s.items.size() == 2) return parse_as(s.items[1], TCat::Kappa);
      return fail("kappa");
    case TCat::Tau:
      if (s.head_is("neg") && s.items.size() == 2) return ty_tau(parse_as(s.items[1], TCat::KappaBar));
      return fail("tau");
    case TCat::SigmaBar:
    case TCat::KappaBar: {
      TCat one = c == TCat::SigmaBar ? TCat::Sigma : TCat::Kappa;
      if (!s.head_is("cap")) return parse_as(s, one);
      std::vector<TyPtr> xs;
      for (std::size_t i = 1; i < s.items.size(); ++i) xs.push_back(parse_as(s.items[i], one));
      return c == TCat::SigmaBar ? ty_sbar(std::move(xs)) : ty_kbar(std::move(xs));
    }
  }
  return fail("known");
}

}  // namespace

TyPtr ty_parse(const std::string& text, TCat expected) { return parse_as(read_sexp(text), expected); }

bool ty_has_omega(const TyPtr& t) {
  switch (t->kind) {
    case TKind::Atom:
    case TKind::Bot: return false;
    case TKind::Arrow: return ty_has_omega(t->a) || ty_has_omega(t->b);
    case TKind::Neg: return ty_has_omega(t->a);
    case TKind::Cap:
      return t->items.empty() ||
             std::any_of(t->items.begin(), t->items.end(), [](const TyPtr& i) { return ty_has_omega(i); });
  }
  return false;
}

namespace {

bool le(const TyPtr& a, const TyPtr& b);

// ⋂ᵢaᵢ ≤ ⋂ⱼbⱼ iff every bⱼ is above some aᵢ.
bool le_bar(const TyPtr& a, const TyPtr& b) {
  auto as = ty_caps(a);
  for (auto& y : ty_caps(b))
    if (std::none_of(as.begin(), as.end(), [&](const TyPtr& x) { return le(x, y); })) return false;
  return true;
}

bool le(const TyPtr& a, const TyPtr& b) {
  if (a->kind == TKind::Cap || b->kind == TKind::Cap) return le_bar(a, b);
  if (a->kind == TKind::Atom || b->kind == TKind::Atom) return a->kind == b->kind && a->atom == b->atom;
  if (a->kind == TKind::Arrow && b->kind == TKind::Arrow) return le_bar(b->a, a->a) && le(a->b, b->b);
  if (a->kind == TKind::Neg && b->kind == TKind::Neg) return le_bar(b->a, a->a);
  return false;
}

int group(TCat c) {
  switch (c) {
    case TCat::Sigma:
    case TCat::SigmaBar: return 0;
    case TCat::Kappa:
    case TCat::KappaBar: return 1;
    case TCat::Tau: return 2;
    case TCat::Bot: return 3;
  }
  return -1;
}

}  // namespace

bool t_subtype(const TyPtr& a, const TyPtr& b) {
  if (group(a->cat) != group(b->cat))
    throw CategoryMismatch(std::string(tcat_name(a->cat)) + " compared with " + tcat_name(b->cat));
  if (a->kind == TKind::Bot) return true;
  return le(a, b);
}

// ---------------------------------------------------------------- translations

namespace {

TyPtr star_raw(const SPtr& r) {
  if (r->kind == SKind::Atom) return ty_atom(r->atom);
  return ty_arrow(type_star(r->dom), type_brackets(r->cod));
}

}  // namespace

TyPtr type_star(const SPtr& s) {
  if (s->kind == SKind::Atom || s->kind == SKind::Arrow) return star_raw(s);
  std::vector<TyPtr> xs;
  for (auto& r : caps_of(s)) xs.push_back(star_raw(r));
  return ty_sbar(std::move(xs));
}

TyPtr type_plus(const SPtr& t) {
  std::vector<TyPtr> xs;
  for (auto& s : cups_of(t)) xs.push_back(ty_kappa(type_star(s)));
  return ty_kbar(std::move(xs));
}

TyPtr type_brackets(const SPtr& t) {
  if (t->kind == SKind::Bot) return ty_bot();
  return ty_tau(type_plus(t));
}

SPtr uncps_type(const TyPtr& t) {
  switch (t->kind) {
    case TKind::Atom: return s_atom(t->atom);
    case TKind::Arrow: return s_arrow(uncps_type(t->a), uncps_type(t->b));
    case TKind::Neg: return uncps_type(t->a);
    case TKind::Bot: return s_bot();
    case TKind::Cap: {
      std::vector<SPtr> xs;
      for (auto& i : t->items) xs.push_back(uncps_type(i));
      return t->cat == TCat::SigmaBar ? s_cap(std::move(xs)) : s_cup(std::move(xs));
    }
  }
  return s_bot();
}

// ---------------------------------------------------------------- derivations

TyPtr tenv_get(const TEnv& e, const std::string& n, TCat bar) {
  auto it = e.find(n);
  if (it != e.end()) return it->second;
  return bar == TCat::SigmaBar ? ty_sbar({}) : ty_kbar({});
}

namespace {

TEnv norm_env(const TEnv& e) {
  TEnv out;
  for (auto& [n, t] : e)
    if (!ty_caps(t).empty()) out.emplace(n, t);
  return out;
}

bool tenv_equal(const TEnv& a, const TEnv& b) {
  TEnv x = norm_env(a), y = norm_env(b);
  if (x.size() != y.size()) return false;
  for (auto& [n, t] : x) {
    auto it = y.find(n);
    if (it == y.end() || ty_key(t) != ty_key(it->second)) return false;
  }
  return true;
}

TEnv with(TEnv e, const std::string& n, const TyPtr& t) {
  e[n] = t;
  return e;
}

bool t_same(const TExpr& a, const TExpr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->tag == b->tag && a->name == b->name && t_same(a->a, b->a) && t_same(a->b, b->b);
}

bool is_sub(const std::string& r) { return r.rfind("sub_", 0) == 0; }

bool same_multiset(std::vector<std::string> a, std::vector<std::string> b) {
  std::sort(a.begin(), a.end());
  std::sort(b.begin(), b.end());
  return a == b;
}

bool in_caps(const TyPtr& t, const TyPtr& bar) {
  auto k = ty_key(t);
  for (auto& c : ty_caps(bar))
    if (ty_key(c) == k) return true;
  return false;
}

struct TChecker {
  TCheckResult res;

  bool fail(const TDeriv& d, const Path& p, std::string msg) {
    res.ok = false;
    res.rule = d.rule;
    res.position = p;
    res.message = std::move(msg);
    return false;
  }

  bool premises(const TDeriv& d, const Path& p) {
    for (std::size_t i = 0; i < d.premises.size(); ++i) {
      Path q = p;
      q.push_back(static_cast<int>(i));
      if (!check(d.premises[i], q)) return false;
    }
    return true;
  }

  bool envs(const TDeriv& d, const TDeriv& q, const TEnv& pi, const TEnv& theta, const Path& p) {
    if (!tenv_equal(q.pi, pi) || !tenv_equal(q.theta, theta)) return fail(d, p, "premise environment mismatch");
    return true;
  }

  // Premises from index 1 on: subject `arg`, one per component of `bar`, matched as a multiset.
  bool args(const TDeriv& d, const Path& p, const TExpr& arg, const TyPtr& bar, TCat one) {
    std::vector<std::string> want, got;
    for (auto& c : ty_caps(bar)) want.push_back(ty_key(c));
    for (std::size_t i = 1; i < d.premises.size(); ++i) {
      const TDeriv& q = d.premises[i];
      if (!t_same(q.subject, arg)) return fail(d, p, "argument premise has the wrong subject");
      if (q.type->cat != one) return fail(d, p, "argument premise has the wrong category");
      if (!envs(d, q, d.pi, d.theta, p)) return false;
      got.push_back(ty_key(q.type));
    }
    if (!same_multiset(want, got)) return fail(d, p, "argument types do not match the intersection");
    return true;
  }

  bool check(const TDeriv& d, const Path& p) {
    const TExpr& t = d.subject;
    const std::string& r = d.rule;
    if (!t || !d.type) return fail(d, p, "missing subject or type");
    if ((sort_of(t) == Sort::Q) != (d.type->kind == TKind::Bot)) return fail(d, p, "bbot is the type of Q terms");
    auto one = [&](TTag tag, TCat cat) {
      if (t->tag != tag) return fail(d, p, r + ": wrong subject shape");
      if (d.type->cat != cat) return fail(d, p, r + ": wrong type category");
      return true;
    };
    if (r == "wvar") {
      if (!one(TTag::WVar, TCat::Sigma) || !d.premises.empty()) return false;
      if (!in_caps(d.type, tenv_get(d.pi, t->name, TCat::SigmaBar)))
        return fail(d, p, "type is not a component of the environment entry");
      return true;
    }
    if (r == "kvar") {
      if (!one(TTag::KVar, TCat::Kappa) || !d.premises.empty()) return false;
      if (!in_caps(d.type, tenv_get(d.theta, t->name, TCat::KappaBar)))
        return fail(d, p, "type is not a component of the environment entry");
      return true;
    }
    if (r == "lamk" || r == "wlam" || r == "klam") {
      TTag tag = r == "lamk" ? TTag::TLamK : r == "wlam" ? TTag::WLam : TTag::KLam;
      TCat cat = r == "lamk" ? TCat::Tau : r == "wlam" ? TCat::Sigma : TCat::Kappa;
      if (!one(tag, cat) || d.premises.size() != 1) return fail(d, p, r + " shape");
      if (r == "wlam" && d.type->kind != TKind::Arrow) return fail(d, p, "wlam type must be an arrow");
      const TDeriv& q = d.premises[0];
      if (!t_same(q.subject, t->a)) return fail(d, p, "binder premise has the wrong subject");
      TyPtr want = r == "wlam" ? d.type->b : ty_bot();
      if (!ty_equal(q.type, want)) return fail(d, p, "binder premise has the wrong type");
      const TyPtr& bound = d.type->a;
      if (r == "lamk") {
        if (!envs(d, q, d.pi, with(d.theta, t->name, bound), p)) return false;
      } else if (!envs(d, q, with(d.pi, t->name, bound), d.theta, p)) {
        return false;
      }
      return premises(d, p);
    }
    if (r == "wapp" || r == "kapp" || r == "tapp") {
      TTag tag = r == "wapp" ? TTag::WApp : r == "kapp" ? TTag::KApp : TTag::TApp;
      TCat cat = r == "wapp" ? TCat::Tau : TCat::Bot;
      if (!one(tag, cat) || d.premises.empty()) return fail(d, p, r + " shape");
      const TDeriv& f = d.premises[0];
      if (!t_same(f.subject, t->a)) return fail(d, p, "function premise has the wrong subject");
      if (!envs(d, f, d.pi, d.theta, p)) return false;
      if (r == "wapp") {
        if (f.type->kind != TKind::Arrow) return fail(d, p, "function premise must have an arrow type");
        if (!ty_equal(f.type->b, d.type)) return fail(d, p, "arrow codomain differs from the result");
        if (!args(d, p, t->b, f.type->a, TCat::Sigma)) return false;
      } else if (r == "kapp") {
        if (f.type->cat != TCat::Kappa) return fail(d, p, "continuation premise must have a kappa type");
        if (!args(d, p, t->b, f.type->a, TCat::Sigma)) return false;
      } else {
        if (f.type->cat != TCat::Tau) return fail(d, p, "term premise must have a tau type");
        if (!args(d, p, t->b, f.type->a, TCat::Kappa)) return false;
      }
      return premises(d, p);
    }
    if (is_sub(r)) {
      TCat cat = r == "sub_tau" ? TCat::Tau : r == "sub_kappa" ? TCat::Kappa : TCat::Sigma;
      if (r != "sub_tau" && r != "sub_kappa" && r != "sub_sigma") return fail(d, p, "unknown rule " + r);
      if (d.premises.size() != 1) return fail(d, p, r + " shape");
      const TDeriv& q = d.premises[0];
      if (d.type->cat != cat || q.type->cat != cat) return fail(d, p, r + ": wrong category");
      if (!t_same(q.subject, t)) return fail(d, p, "inheritance premise has a different subject");
      if (!envs(d, q, d.pi, d.theta, p)) return false;
      if (!t_subtype(q.type, d.type)) return fail(d, p, "premise type is not a subtype");
      return premises(d, p);
    }
    return fail(d, p, "unknown rule " + r);
  }
};

}  // namespace

TCheckResult t_check_derivation(const TDeriv& d) {
  TChecker c;
  try {
    c.check(d, {});
  } catch (const CategoryMismatch& ex) {
    c.res.ok = false;
    c.res.message = ex.what();
  }
  return c.res;
}

TDeriv td_node(std::string rule, TExpr subject, TyPtr type, std::vector<TDeriv> premises) {
  TDeriv d;
  d.rule = std::move(rule);
  d.subject = std::move(subject);
  d.type = std::move(type);
  d.premises = std::move(premises);
  return d;
}

TDeriv td_sub(TDeriv premise, TyPtr type) {
  if (ty_equal(premise.type, type)) return premise;
  const char* r = type->cat == TCat::Tau ? "sub_tau" : type->cat == TCat::Kappa ? "sub_kappa" : "sub_sigma";
  TExpr s = premise.subject;
  return td_node(r, s, std::move(type), {std::move(premise)});
}

void t_assign_envs(TDeriv& d, const TEnv& pi, const TEnv& theta) {
  d.pi = norm_env(pi);
  d.theta = norm_env(theta);
  const std::string& r = d.rule;
  if (r == "wlam" || r == "klam") {
    t_assign_envs(d.premises[0], with(pi, d.subject->name, d.type->a), theta);
    return;
  }
  if (r == "lamk") {
    t_assign_envs(d.premises[0], pi, with(theta, d.subject->name, d.type->a));
    return;
  }
  for (auto& q : d.premises) t_assign_envs(q, pi, theta);
}

bool t_judgement_has_omega(const TDeriv& d) {
  if (ty_has_omega(d.type)) return true;
  for (auto& [n, t] : d.pi)
    if (ty_has_omega(t)) return true;
  for (auto& [n, t] : d.theta)
    if (ty_has_omega(t)) return true;
  return false;
}

namespace {

using json = nlohmann::ordered_json;

json tenv_json(const TEnv& e) {
  json o = json::object();
  for (auto& [n, t] : e) o[n] = ty_to_sexpr(t);
  return o;
}

json tjson(const TDeriv& d) {
  json o;
  o["rule"] = d.rule;
  o["indices"] = d.premises.empty() ? 0 : (d.rule == "wapp" || d.rule == "kapp" || d.rule == "tapp")
                                               ? d.premises.size() - 1
                                               : 0;
  o["judgement"] = {{"pi", tenv_json(d.pi)},
                    {"term", t_to_sexpr(d.subject)},
                    {"type", ty_to_sexpr(d.type)},
                    {"theta", tenv_json(d.theta)}};
  json ps = json::array();
  for (auto& q : d.premises) ps.push_back(tjson(q));
  o["premises"] = ps;
  return o;
}

}  // namespace

std::string tderiv_json(const TDeriv& d) { return tjson(d).dump(); }

// ---------------------------------------------------------------- typing normal forms

namespace {

struct NormalTyper {
  bool allow_omega;
  std::map<std::string, std::vector<TyPtr>> xs, ks;
  TyPtr alpha = ty_atom("a");

  TyPtr default_sbar() { return allow_omega ? ty_sbar({}) : ty_sbar({alpha}); }
  TyPtr default_kbar() { return allow_omega ? ty_kbar({}) : ty_kbar({ty_kappa(ty_sbar({alpha}))}); }
  // τ given to a head application when nothing constrains it.
  TyPtr free_tau() { return allow_omega ? ty_tau(ty_kbar({})) : ty_tau(ty_kbar({ty_kappa(ty_sbar({alpha}))})); }

  template <class F>
  TyPtr scoped(std::map<std::string, std::vector<TyPtr>>& env, const std::string& n, F&& body, bool kbar) {
    auto saved = env.find(n) == env.end() ? std::nullopt : std::optional(env[n]);
    env.erase(n);
    body();
    TyPtr bound;
    if (env.count(n) && !env[n].empty())
      bound = kbar ? ty_kbar(env[n]) : ty_sbar(env[n]);
    else
      bound = kbar ? default_kbar() : default_sbar();
    env.erase(n);
    if (saved) env[n] = *saved;
    return bound;
  }

  TDeriv head(const TExpr& x, const TyPtr& type) {
    xs[x->name].push_back(type);
    return td_node("wvar", x, type);
  }

  TDeriv t(const TExpr& e) {
    if (e->tag == TTag::TLamK) {
      TDeriv q;
      TyPtr kb = scoped(ks, e->name, [&] { q = this->q(e->a); }, true);
      return td_node("lamk", e, ty_tau(kb), {std::move(q)});
    }
    if (e->tag == TTag::WApp && e->a->tag == TTag::WVar) {
      TyPtr tau = free_tau();
      if (allow_omega) return td_node("wapp", e, tau, {head(e->a, ty_arrow(ty_sbar({}), tau))});
      TDeriv w = this->w(e->b);
      TyPtr ft = ty_arrow(w.type, tau);
      return td_node("wapp", e, tau, {head(e->a, ft), std::move(w)});
    }
    throw NotNormal("not a normal T term: " + t_to_sexpr(e));
  }

  TDeriv q(const TExpr& e) {
    if (e->tag == TTag::KApp && e->a->tag == TTag::KVar) {
      if (allow_omega) {
        TyPtr kt = ty_kappa(ty_sbar({}));
        ks[e->a->name].push_back(kt);
        return td_node("kapp", e, ty_bot(), {td_node("kvar", e->a, kt)});
      }
      TDeriv w = this->w(e->b);
      TyPtr kt = ty_kappa(w.type);
      ks[e->a->name].push_back(kt);
      return td_node("kapp", e, ty_bot(), {td_node("kvar", e->a, kt), std::move(w)});
    }
    if (e->tag == TTag::TApp && e->a->tag == TTag::WApp && e->a->a->tag == TTag::WVar) {
      const TExpr& xw = e->a;
      if (allow_omega) {
        TyPtr tau = ty_tau(ty_kbar({}));
        TDeriv tt = td_node("wapp", xw, tau, {head(xw->a, ty_arrow(ty_sbar({}), tau))});
        return td_node("tapp", e, ty_bot(), {std::move(tt)});
      }
      TDeriv w = this->w(xw->b);
      TDeriv k = this->k(e->b);
      TyPtr tau = ty_tau(k.type);
      TDeriv tt = td_node("wapp", xw, tau, {head(xw->a, ty_arrow(w.type, tau)), std::move(w)});
      return td_node("tapp", e, ty_bot(), {std::move(tt), std::move(k)});
    }
    throw NotNormal("not a normal Q term: " + t_to_sexpr(e));
  }

  TDeriv w(const TExpr& e) {
    if (e->tag == TTag::WVar) {
      xs[e->name].push_back(alpha);
      return td_node("wvar", e, alpha);
    }
    if (e->tag == TTag::WLam) {
      TDeriv body;
      TyPtr sb = scoped(xs, e->name, [&] { body = this->t(e->a); }, false);
      TyPtr tau = body.type;
      return td_node("wlam", e, ty_arrow(sb, tau), {std::move(body)});
    }
    throw NotNormal("not a normal W term: " + t_to_sexpr(e));
  }

  TDeriv k(const TExpr& e) {
    if (e->tag == TTag::KVar) {
      TyPtr kt = ty_kappa(ty_sbar({alpha}));
      ks[e->name].push_back(kt);
      return td_node("kvar", e, kt);
    }
    if (e->tag == TTag::KLam) {
      TDeriv body;
      TyPtr sb = scoped(xs, e->name, [&] { body = this->q(e->a); }, false);
      return td_node("klam", e, ty_kappa(sb), {std::move(body)});
    }
    throw NotNormal("not a normal K term: " + t_to_sexpr(e));
  }
};

}  // namespace

TDeriv t_infer_normal(const TExpr& t, bool allow_omega) {
  if (sort_of(t) != Sort::T) throw NotNormal("t_infer_normal expects a sort-T term");
  if (allow_omega ? !t_is_head_normal(t) : !t_is_beta_normal(t))
    throw NotNormal(std::string(allow_omega ? "not head normal: " : "not beta normal: ") + t_to_sexpr(t));
  NormalTyper ty{allow_omega, {}, {}};
  TDeriv d = ty.t(t);
  TEnv pi, theta;
  for (auto& [x, ts] : ty.xs)
    if (!ts.empty()) pi[x] = ty_sbar(ts);
  for (auto& [k, ts] : ty.ks)
    if (!ts.empty()) theta[k] = ty_kbar(ts);
  t_assign_envs(d, pi, theta);
  return d;
}

// ---------------------------------------------------------------- subject expansion and reduction

namespace {

bool binds_w(const TExpr& e) { return e->tag == TTag::WLam || e->tag == TTag::KLam; }

TExpr child(const TExpr& e, int c) { return c == 0 ? e->a : e->b; }

int child_of(const std::string& rule, std::size_t premise) {
  if (rule == "wapp" || rule == "kapp" || rule == "tapp") return premise == 0 ? 0 : 1;
  return 0;
}

struct Occ {
  std::string name;
  bool cont;  // substituting a continuation variable
};

bool is_occ(const TExpr& e, const Occ& o) {
  return o.cont ? (e->tag == TTag::KVar && e->name == o.name) : (e->tag == TTag::WVar && e->name == o.name);
}

bool shadows(const TExpr& e, const Occ& o) {
  if (o.cont) return e->tag == TTag::TLamK && e->name == o.name;
  return binds_w(e) && e->name == o.name;
}

// Copies d onto the structurally identical term b.
TDeriv resubject(const TDeriv& d, const TExpr& b) {
  if (d.subject->tag != b->tag) throw OccurrenceTrackingFailure("derivation does not follow the term structure");
  TDeriv out = td_node(d.rule, b, d.type);
  for (std::size_t i = 0; i < d.premises.size(); ++i)
    out.premises.push_back(resubject(d.premises[i], is_sub(d.rule) ? b : child(b, child_of(d.rule, i))));
  return out;
}

// d types body{A/v}; returns a derivation of body, collecting the derivations typing the copies of A.
TDeriv lift(const TDeriv& d, const TExpr& body, const Occ& o, bool active, std::vector<TDeriv>& occ) {
  if (active && is_occ(body, o)) {
    occ.push_back(d);
    return td_node(o.cont ? "kvar" : "wvar", body, d.type);
  }
  if (d.subject->tag != body->tag) throw OccurrenceTrackingFailure("derivation does not follow the redex body");
  TDeriv out = td_node(d.rule, body, d.type);
  if (is_sub(d.rule)) {
    out.premises.push_back(lift(d.premises[0], body, o, active, occ));
    return out;
  }
  bool act = active && !shadows(body, o);
  for (std::size_t i = 0; i < d.premises.size(); ++i)
    out.premises.push_back(lift(d.premises[i], child(body, child_of(d.rule, i)), o, act, occ));
  return out;
}

TDeriv expand_redex(const TDeriv& d, const TExpr& redex) {
  const TExpr& fn = redex->a;
  const TExpr& arg = redex->b;
  std::vector<TDeriv> occ;
  Occ o{fn->name, redex->tag == TTag::TApp};
  bool known = (redex->tag == TTag::WApp && fn->tag == TTag::WLam) || (redex->tag == TTag::TApp && fn->tag == TTag::TLamK) ||
               (redex->tag == TTag::KApp && fn->tag == TTag::KLam);
  if (!known) throw OccurrenceTrackingFailure("no beta redex at the recorded position");
  TDeriv body = lift(d, fn->a, o, true, occ);
  std::vector<TyPtr> types;
  std::vector<TDeriv> args;
  for (auto& a : occ) {
    types.push_back(a.type);
    args.push_back(resubject(a, arg));
  }
  TDeriv f;
  if (redex->tag == TTag::WApp) f = td_node("wlam", fn, ty_arrow(ty_sbar(types), d.type), {std::move(body)});
  else if (redex->tag == TTag::TApp) f = td_node("lamk", fn, ty_tau(ty_kbar(types)), {std::move(body)});
  else f = td_node("klam", fn, ty_kappa(ty_sbar(types)), {std::move(body)});
  const char* rule = redex->tag == TTag::WApp ? "wapp" : redex->tag == TTag::TApp ? "tapp" : "kapp";
  std::vector<TDeriv> ps{std::move(f)};
  for (auto& a : args) ps.push_back(std::move(a));
  return td_node(rule, redex, d.type, std::move(ps));
}

TDeriv expand_at(const TDeriv& d, const TExpr& before, const Path& pos, std::size_t depth) {
  if (depth == pos.size()) return expand_redex(d, before);
  if (is_sub(d.rule)) return td_node(d.rule, before, d.type, {expand_at(d.premises[0], before, pos, depth)});
  if (d.subject->tag != before->tag) throw OccurrenceTrackingFailure("derivation does not follow the term");
  TDeriv out = td_node(d.rule, before, d.type);
  for (std::size_t i = 0; i < d.premises.size(); ++i) {
    int c = child_of(d.rule, i);
    if (c == pos[depth])
      out.premises.push_back(expand_at(d.premises[i], child(before, c), pos, depth + 1));
    else
      out.premises.push_back(resubject(d.premises[i], child(before, c)));
  }
  return out;
}

}  // namespace

TDeriv t_subject_expand(const TDeriv& d, const TExpr& before, const Path& pos) {
  Fresh fresh;
  avoid_target(fresh, before);
  avoid_target(fresh, d.subject);
  auto after = t_contract(before, pos, TRule::Beta, fresh);
  if (!after || !t_alpha_equal(*after, d.subject))
    throw OccurrenceTrackingFailure("step record does not match the derivation subject");
  TDeriv out = expand_at(d, before, pos, 0);
  t_assign_envs(out, d.pi, d.theta);
  return out;
}

namespace {

// Derivations of the argument at each strict type it must cover.
struct ArgTable {
  std::vector<TDeriv> given;

  TDeriv at(const TyPtr& want) const {
    for (auto& g : given)
      if (ty_equal(g.type, want)) return g;
    for (auto& g : given)
      if (t_subtype(g.type, want)) return td_sub(g, want);
    throw OccurrenceTrackingFailure("no argument derivation covers " + ty_to_sexpr(want));
  }
};

// d types body; returns a derivation of the contractum copy c = body{A/v}.
TDeriv lower(const TDeriv& d, const TExpr& c, const Occ& o, bool active, const ArgTable& args) {
  const TExpr& b = d.subject;
  if (active && !is_sub(d.rule) && is_occ(b, o)) return resubject(args.at(d.type), c);
  if (b->tag != c->tag) throw OccurrenceTrackingFailure("contractum does not follow the redex body");
  TDeriv out = td_node(d.rule, c, d.type);
  if (is_sub(d.rule)) {
    out.premises.push_back(lower(d.premises[0], c, o, active, args));
    return out;
  }
  bool act = active && !shadows(b, o);
  for (std::size_t i = 0; i < d.premises.size(); ++i)
    out.premises.push_back(lower(d.premises[i], child(c, child_of(d.rule, i)), o, act, args));
  return out;
}

TDeriv reduce_redex(const TDeriv& d, const TExpr& contractum) {
  if (is_sub(d.rule)) return td_node(d.rule, contractum, d.type, {reduce_redex(d.premises[0], contractum)});
  const TDeriv* f = &d.premises.at(0);
  while (is_sub(f->rule)) f = &f->premises[0];
  const TExpr& fn = f->subject;
  Occ o{fn->name, d.rule == "tapp"};
  ArgTable args;
  for (std::size_t i = 1; i < d.premises.size(); ++i) args.given.push_back(d.premises[i]);
  TDeriv body = lower(f->premises[0], contractum, o, true, args);
  return td_sub(std::move(body), d.type);
}

}  // namespace

TDeriv t_subject_reduce(const TDeriv& d, const Path& pos) {
  Fresh fresh;
  avoid_target(fresh, d.subject);
  auto after = t_contract(d.subject, pos, TRule::Beta, fresh);
  if (!after) throw OccurrenceTrackingFailure("no beta redex at the given position");
  // Walk to the redex, rebuilding the spine over the contracted term.
  std::function<TDeriv(const TDeriv&, const TExpr&, std::size_t)> go = [&](const TDeriv& n, const TExpr& c,
                                                                           std::size_t depth) -> TDeriv {
    if (depth == pos.size()) return reduce_redex(n, c);
    if (is_sub(n.rule)) return td_node(n.rule, c, n.type, {go(n.premises[0], c, depth)});
    TDeriv out = td_node(n.rule, c, n.type);
    for (std::size_t i = 0; i < n.premises.size(); ++i) {
      int ch = child_of(n.rule, i);
      if (ch == pos[depth])
        out.premises.push_back(go(n.premises[i], child(c, ch), depth + 1));
      else
        out.premises.push_back(resubject(n.premises[i], child(c, ch)));
    }
    return out;
  };
  TDeriv out = go(d, *after, 0);
  t_assign_envs(out, d.pi, d.theta);
  return out;
}

}  // namespace ccv
