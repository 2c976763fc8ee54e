#include "ccv/ct.hpp"

#include <deque>
#include <unordered_map>

#include "ccv/sexpr.hpp"

namespace ccv {

CtTerm ct_var(std::string x) { return std::make_shared<const CtNode>(CtNode{CtTag::Var, std::move(x), {}, {}}); }
CtTerm ct_lam(std::string x, CtTerm body) {
  return std::make_shared<const CtNode>(CtNode{CtTag::Lam, std::move(x), std::move(body), {}});
}
CtTerm ct_app(CtTerm f, CtTerm arg) {
  return std::make_shared<const CtNode>(CtNode{CtTag::App, {}, std::move(f), std::move(arg)});
}
CtTerm ct_where(CtTerm body, std::string x, CtTerm bound) {
  return std::make_shared<const CtNode>(CtNode{CtTag::Where, std::move(x), std::move(body), std::move(bound)});
}
CtTerm ct_catch(std::string k, CtTerm body) {
  return std::make_shared<const CtNode>(CtNode{CtTag::Catch, std::move(k), std::move(body), {}});
}
CtTerm ct_throw(std::string k, CtTerm body) {
  return std::make_shared<const CtNode>(CtNode{CtTag::ThrowUp, std::move(k), std::move(body), {}});
}

// ---------------------------------------------------------------- parse / print

namespace {

bool ct_keyword(const std::string& a) {
  return a == "lam" || a == "app" || a == "bind" || a == "catch" || a == "throw";
}

const std::string& name_of(const Sexp& s, const char* what) {
  if (!s.is_atom || ct_keyword(s.atom))
    throw ParseError(std::string("expected name for ") + what + ", got " + show_sexp(s));
  return s.atom;
}

CtTerm from_sexp(const Sexp& s) {
  if (s.is_atom) {
    if (ct_keyword(s.atom)) throw ParseError("keyword used as variable: " + s.atom);
    return ct_var(s.atom);
  }
  if (s.items.empty() || !s.items[0].is_atom) throw ParseError("malformed expression " + show_sexp(s));
  const std::string& h = s.items[0].atom;
  auto need = [&](std::size_t n) {
    if (s.items.size() != n) throw ParseError("wrong number of fields in " + show_sexp(s));
  };
  if (h == "lam") {
    need(3);
    return ct_lam(name_of(s.items[1], "lam"), from_sexp(s.items[2]));
  }
  if (h == "app") {
    need(3);
    return ct_app(from_sexp(s.items[1]), from_sexp(s.items[2]));
  }
  if (h == "bind") {
    need(4);
    return ct_where(from_sexp(s.items[1]), name_of(s.items[2], "bind"), from_sexp(s.items[3]));
  }
  if (h == "catch") {
    need(3);
    return ct_catch(name_of(s.items[1], "catch"), from_sexp(s.items[2]));
  }
  if (h == "throw") {
    need(3);
    return ct_throw(name_of(s.items[1], "throw"), from_sexp(s.items[2]));
  }
  throw ParseError("unknown form " + h);
}

void sexpr_rec(const CtTerm& t, std::string& out) {
  switch (t->tag) {
    case CtTag::Var: out += t->name; return;
    case CtTag::Lam:
    case CtTag::Catch:
    case CtTag::ThrowUp:
      out += t->tag == CtTag::Lam ? "(lam " : t->tag == CtTag::Catch ? "(catch " : "(throw ";
      out += t->name + " ";
      sexpr_rec(t->a, out);
      out += ")";
      return;
    case CtTag::App:
      out += "(app ";
      sexpr_rec(t->a, out);
      out += " ";
      sexpr_rec(t->b, out);
      out += ")";
      return;
    case CtTag::Where:
      out += "(bind ";
      sexpr_rec(t->a, out);
      out += " " + t->name + " ";
      sexpr_rec(t->b, out);
      out += ")";
      return;
  }
}

void pretty_rec(const CtTerm& t, std::string& out, bool atomic) {
  if (t->tag == CtTag::Var) {
    out += t->name;
    return;
  }
  if (atomic) out += "(";
  switch (t->tag) {
    case CtTag::Var: break;
    case CtTag::Lam:
      out += "λ" + t->name + ".";
      pretty_rec(t->a, out, false);
      break;
    case CtTag::Catch:
      out += "ε" + t->name + ".";
      pretty_rec(t->a, out, false);
      break;
    case CtTag::ThrowUp:
      out += "↑" + t->name + " ";
      pretty_rec(t->a, out, true);
      break;
    case CtTag::App:
      pretty_rec(t->a, out, t->a->tag != CtTag::App);
      out += " ";
      pretty_rec(t->b, out, true);
      break;
    case CtTag::Where:
      out += "⟨";
      pretty_rec(t->a, out, false);
      out += "⟩" + t->name + ":=";
      pretty_rec(t->b, out, true);
      break;
  }
  if (atomic) out += ")";
}

void key_rec(const CtTerm& t, std::vector<std::string>& xs, std::vector<std::string>& ks, std::string& out) {
  auto lookup = [](const std::vector<std::string>& st, const std::string& n, char tag) {
    for (std::size_t i = st.size(); i-- > 0;)
      if (st[i] == n) return std::string(1, tag) + std::to_string(st.size() - 1 - i);
    return "'" + n;
  };
  switch (t->tag) {
    case CtTag::Var: out += lookup(xs, t->name, '#'); return;
    case CtTag::Lam:
      out += "(L ";
      xs.push_back(t->name);
      key_rec(t->a, xs, ks, out);
      xs.pop_back();
      out += ")";
      return;
    case CtTag::App:
      out += "(A ";
      key_rec(t->a, xs, ks, out);
      out += " ";
      key_rec(t->b, xs, ks, out);
      out += ")";
      return;
    case CtTag::Where:
      out += "(W ";
      xs.push_back(t->name);
      key_rec(t->a, xs, ks, out);
      xs.pop_back();
      out += " ";
      key_rec(t->b, xs, ks, out);
      out += ")";
      return;
    case CtTag::Catch:
      out += "(E ";
      ks.push_back(t->name);
      key_rec(t->a, xs, ks, out);
      ks.pop_back();
      out += ")";
      return;
    case CtTag::ThrowUp:
      out += "(U " + lookup(ks, t->name, '%') + " ";
      key_rec(t->a, xs, ks, out);
      out += ")";
      return;
  }
}

void fv_rec(const CtTerm& t, std::vector<std::string>& xs, std::vector<std::string>& ks, FreeVars& out) {
  auto bound = [](const std::vector<std::string>& st, const std::string& n) {
    for (const auto& s : st)
      if (s == n) return true;
    return false;
  };
  switch (t->tag) {
    case CtTag::Var:
      if (!bound(xs, t->name)) out.ordinary.insert(t->name);
      return;
    case CtTag::Lam:
      xs.push_back(t->name);
      fv_rec(t->a, xs, ks, out);
      xs.pop_back();
      return;
    case CtTag::App:
      fv_rec(t->a, xs, ks, out);
      fv_rec(t->b, xs, ks, out);
      return;
    case CtTag::Where:
      fv_rec(t->b, xs, ks, out);
      xs.push_back(t->name);
      fv_rec(t->a, xs, ks, out);
      xs.pop_back();
      return;
    case CtTag::Catch:
      ks.push_back(t->name);
      fv_rec(t->a, xs, ks, out);
      ks.pop_back();
      return;
    case CtTag::ThrowUp:
      if (!bound(ks, t->name)) out.continuation.insert(t->name);
      fv_rec(t->a, xs, ks, out);
      return;
  }
}

void names_rec(const CtTerm& t, Fresh& fresh) {
  if (t->tag != CtTag::App) fresh.avoid(t->name);
  if (t->a) names_rec(t->a, fresh);
  if (t->b) names_rec(t->b, fresh);
}

}  // namespace

CtTerm ct_parse(const std::string& text) { return from_sexp(read_sexp(text)); }

std::string ct_to_sexpr(const CtTerm& t) {
  std::string out;
  sexpr_rec(t, out);
  return out;
}

std::string ct_to_pretty(const CtTerm& t) {
  std::string out;
  pretty_rec(t, out, false);
  return out;
}

std::string ct_alpha_key(const CtTerm& t) {
  std::vector<std::string> xs, ks;
  std::string out;
  key_rec(t, xs, ks, out);
  return out;
}

bool ct_alpha_equal(const CtTerm& a, const CtTerm& b) { return ct_alpha_key(a) == ct_alpha_key(b); }

std::size_t ct_size(const CtTerm& t) {
  return 1 + (t->a ? ct_size(t->a) : 0) + (t->b ? ct_size(t->b) : 0);
}

FreeVars ct_free_vars(const CtTerm& t) {
  FreeVars out;
  std::vector<std::string> xs, ks;
  fv_rec(t, xs, ks, out);
  return out;
}

CtTerm ct_subterm_at(const CtTerm& t, const Path& p) {
  CtTerm cur = t;
  for (int i : p) {
    cur = i == 0 ? cur->a : cur->b;
    if (!cur) throw std::out_of_range("path leaves the term");
  }
  return cur;
}

// ---------------------------------------------------------------- μ/jumper encoding
// εk.M is μk.[k]M and ↑k M is μδ.[k]M with δ fresh. On this shape the λμ axioms are
// exactly the catch/throw axioms, βμ covers the let rules, βjmp the stacked rules and
// ημ the dummy catch.

namespace {

Term enc(const CtTerm& t, Fresh& fresh) {
  switch (t->tag) {
    case CtTag::Var: return var(t->name);
    case CtTag::Lam: return lam(t->name, enc(t->a, fresh));
    case CtTag::App: return app(enc(t->a, fresh), enc(t->b, fresh));
    case CtTag::Where: return where(enc(t->a, fresh), t->name, enc(t->b, fresh));
    case CtTag::Catch: return mu(t->name, jmp(t->name, enc(t->a, fresh)));
    case CtTag::ThrowUp: return mu(fresh.next(), jmp(t->name, enc(t->a, fresh)));
  }
  return nullptr;
}

Fresh fresh_for(const CtTerm& t) {
  Fresh fresh;
  names_rec(t, fresh);
  return fresh;
}

CtTerm dec(const Expr& e) {
  switch (e->tag) {
    case Tag::Var: return ct_var(e->name);
    case Tag::Lam: return ct_lam(e->name, dec(e->a));
    case Tag::App: return ct_app(dec(e->a), dec(e->b));
    case Tag::Where: return ct_where(dec(e->a), e->name, dec(e->b));
    case Tag::Mu: {
      const Expr& j = e->a;
      if (j->tag != Tag::Throw) break;
      if (j->name == e->name) return ct_catch(e->name, dec(j->a));
      if (!occurs_free_cvar(e->name, j->a)) return ct_throw(j->name, dec(j->a));
      break;
    }
    default: break;
  }
  throw std::logic_error("not a catch/throw encoding: " + to_sexpr(e));
}

// Maps a path in the encoding to the catch/throw path; `at_jumper` when it ends on the [k] of a pair.
std::pair<Path, bool> ct_path(const Expr& root, const Path& p) {
  Path out;
  Expr cur = root;
  std::size_t i = 0;
  while (i < p.size()) {
    if (cur->tag == Tag::Mu) {
      if (i + 1 == p.size()) return {out, true};
      cur = cur->a->a;
      out.push_back(0);
      i += 2;
    } else {
      out.push_back(p[i]);
      cur = p[i] == 0 ? cur->a : cur->b;
      ++i;
    }
  }
  return {out, false};
}

struct Mapped {
  CtSite ct;
  RedexSite mu;
};

std::vector<Mapped> mapped_sites(const Expr& e) {
  std::vector<Mapped> out;
  for (const auto& s : redexes(e)) {
    auto [cpath, at_jumper] = ct_path(e, s.path);
    const Expr node = subterm_at(e, s.path);
    auto push = [&](CtRule r, std::optional<int> ext = std::nullopt) { out.push_back({{cpath, r, ext}, s}); };
    switch (s.rule) {
      case Rule::ad1: push(CtRule::ad1); break;
      case Rule::ad2: push(CtRule::ad2); break;
      case Rule::beta_lambda: push(CtRule::beta_lambda); break;
      case Rule::beta_let: push(CtRule::beta_let); break;
      case Rule::eta_lambda: push(CtRule::eta_lambda); break;
      case Rule::eta_let: push(CtRule::eta_let); break;
      case Rule::eta_mu: push(CtRule::catch_dummy); break;
      case Rule::beta_mu: {
        if (node->tag != Tag::Where) break;  // the derived jumper form is two catch/throw steps
        const Expr& m = node->b;
        push(m->a->name == m->name ? CtRule::let_catch : CtRule::let_throw, s.capture_extent);
        break;
      }
      case Rule::beta_jmp: {
        if (!at_jumper) break;
        Path outer_path(s.path.begin(), s.path.end() - 1);
        const Expr outer = subterm_at(e, outer_path);
        const Expr& inner = node->a;
        bool outer_catch = outer->name == node->name;
        bool inner_catch = inner->a->name == inner->name;
        if (outer_catch && inner_catch) push(CtRule::catch_catch);
        else if (outer_catch && inner->a->name == node->name) push(CtRule::catch_throw);
        else if (!outer_catch && inner_catch) push(CtRule::throw_catch);
        else if (!outer_catch) push(CtRule::throw_throw);
        break;
      }
    }
  }
  return out;
}

}  // namespace

CtTerm ct_canonicalize(const CtTerm& t) {
  Fresh fresh = fresh_for(t);
  return dec(canonicalize(enc(t, fresh), fresh));
}

bool ct_struct_equal(const CtTerm& a, const CtTerm& b) {
  return ct_alpha_key(ct_canonicalize(a)) == ct_alpha_key(ct_canonicalize(b));
}

const char* ct_rule_name(CtRule r) {
  switch (r) {
    case CtRule::ad1: return "ad1";
    case CtRule::ad2: return "ad2";
    case CtRule::beta_lambda: return "beta_lambda";
    case CtRule::beta_let: return "beta_let";
    case CtRule::eta_lambda: return "eta_lambda";
    case CtRule::eta_let: return "eta_let";
    case CtRule::catch_dummy: return "catch_dummy";
    case CtRule::catch_throw: return "catch_throw";
    case CtRule::let_throw: return "let_throw";
    case CtRule::throw_throw: return "throw_throw";
    case CtRule::let_catch: return "let_catch";
    case CtRule::throw_catch: return "throw_catch";
    case CtRule::catch_catch: return "catch_catch";
  }
  return "?";
}

std::vector<CtSite> ct_redexes(const CtTerm& t) {
  Fresh fresh = fresh_for(t);
  std::vector<CtSite> out;
  for (auto& m : mapped_sites(enc(t, fresh))) out.push_back(m.ct);
  return out;
}

CtTerm ct_step(const CtTerm& t, const CtSite& site) {
  Fresh fresh = fresh_for(t);
  Expr e = enc(t, fresh);
  for (auto& m : mapped_sites(e))
    if (m.ct == site) return dec(step_unchecked(e, m.mu, fresh));
  throw StaleSite(std::string("no ") + ct_rule_name(site.rule) + " redex at the given path");
}

CtTerm ct_vertical_nf(const CtTerm& t) {
  CtTerm cur = ct_canonicalize(t);
  for (;;) {
    std::optional<CtSite> v;
    for (const auto& s : ct_redexes(cur))
      if (s.rule == CtRule::catch_dummy || s.rule == CtRule::catch_throw) {
        v = s;
        break;
      }
    if (!v) return cur;
    cur = ct_step(cur, *v);
  }
}

// ---------------------------------------------------------------- translation

namespace {

Term tr(const CtTerm& t, Fresh& fresh) {
  switch (t->tag) {
    case CtTag::Var: return var(t->name);
    case CtTag::Lam: return lam(t->name, tr(t->a, fresh));
    case CtTag::Where: return where(tr(t->a, fresh), t->name, tr(t->b, fresh));
    case CtTag::Catch: return mu(t->name, jmp(t->name, tr(t->a, fresh)));
    case CtTag::ThrowUp: return mu(fresh.next(), jmp(t->name, tr(t->a, fresh)));
    case CtTag::App: {
      bool v1 = ct_is_value(t->a), v2 = ct_is_value(t->b);
      Term a = tr(t->a, fresh), b = tr(t->b, fresh);
      if (v1 && v2) return app(a, b);
      std::string z = fresh.next();
      if (v2) return where(app(var(z), b), z, a);
      if (v1) return where(app(a, var(z)), z, b);
      std::string w = fresh.next();
      return where(where(app(var(z), var(w)), w, b), z, a);
    }
  }
  return nullptr;
}

CtTerm inv(const Expr& e) {
  switch (e->tag) {
    case Tag::Var: return ct_var(e->name);
    case Tag::Lam: return ct_lam(e->name, inv(e->a));
    case Tag::App: return ct_app(inv(e->a), inv(e->b));
    case Tag::Where:
    case Tag::JWhere: return ct_where(inv(e->a), e->name, inv(e->b));
    case Tag::Mu: return ct_catch(e->name, inv(e->a));
    case Tag::Throw: return ct_throw(e->name, inv(e->a));
  }
  return nullptr;
}

}  // namespace

Term ct_to_mu(const CtTerm& t) {
  Fresh fresh = fresh_for(t);
  return canonicalize(tr(t, fresh), fresh);
}

CtTerm mu_inverse(const Expr& e) { return ct_canonicalize(inv(e)); }

CtNormalizeOutcome ct_normalize(const CtTerm& t, std::size_t fuel) {
  auto n = normalize(ct_to_mu(t), fuel, Strategy::Direct);
  CtNormalizeOutcome out;
  out.normal = n.normal;
  out.steps = n.steps;
  out.term = ct_vertical_nf(mu_inverse(n.term));
  return out;
}

Equality ct_equal(const CtTerm& a, const CtTerm& b, std::size_t fuel) {
  return ccv_equal(ct_to_mu(a), ct_to_mu(b), fuel);
}

std::optional<std::vector<CtSite>> ct_reaches(const CtTerm& from, const CtTerm& to, std::size_t state_cap,
                                              std::size_t max_depth) {
  struct State {
    CtTerm term;
    std::size_t parent;
    CtSite via;
    std::size_t depth;
  };
  const std::string goal = ct_alpha_key(ct_canonicalize(to));
  std::vector<State> states{{ct_canonicalize(from), 0, {}, 0}};
  std::unordered_map<std::string, std::size_t> seen{{ct_alpha_key(states[0].term), 0}};
  auto path_to = [&](std::size_t i) {
    std::vector<CtSite> p;
    for (; i != 0; i = states[i].parent) p.push_back(states[i].via);
    return std::vector<CtSite>(p.rbegin(), p.rend());
  };
  if (seen.count(goal)) return path_to(0);
  for (std::size_t i = 0; i < states.size(); ++i) {
    if (states[i].depth >= max_depth) continue;
    CtTerm cur = states[i].term;
    for (const auto& s : ct_redexes(cur)) {
      CtTerm next = ct_step(cur, s);
      std::string key = ct_alpha_key(next);
      if (seen.count(key)) continue;
      seen.emplace(key, states.size());
      states.push_back({next, i, s, states[i].depth + 1});
      if (key == goal) return path_to(states.size() - 1);
      if (states.size() >= state_cap) return std::nullopt;
    }
  }
  return std::nullopt;
}

bool ct_replay(const CtTerm& from, const std::vector<CtSite>& steps, const CtTerm& expected) {
  CtTerm cur = ct_canonicalize(from);
  try {
    for (const auto& s : steps) cur = ct_step(cur, s);
  } catch (const StaleSite&) {
    return false;
  }
  return ct_struct_equal(cur, expected);
}

// ---------------------------------------------------------------- encodings

CtTerm encode(Encoding which, const std::vector<CtArg>& args) {
  Fresh fresh;
  for (const auto& a : args) {
    if (auto t = std::get_if<CtTerm>(&a)) names_rec(*t, fresh);
    else fresh.avoid(std::get<std::string>(a));
  }
  auto term = [&](std::size_t i) {
    if (i >= args.size() || !std::holds_alternative<CtTerm>(args[i]))
      throw ArityMismatch("argument " + std::to_string(i) + " must be a term");
    return std::get<CtTerm>(args[i]);
  };
  auto name = [&](std::size_t i) {
    if (i >= args.size() || !std::holds_alternative<std::string>(args[i]))
      throw ArityMismatch("argument " + std::to_string(i) + " must be a name");
    return std::get<std::string>(args[i]);
  };
  auto arity = [&](std::size_t n) {
    if (args.size() != n)
      throw ArityMismatch("expected " + std::to_string(n) + " arguments, got " + std::to_string(args.size()));
  };
  switch (which) {
    case Encoding::CallCc: {
      arity(1);
      std::string k = fresh.next(), x = fresh.next();
      return ct_catch(k, ct_app(term(0), ct_lam(x, ct_throw(k, ct_var(x)))));
    }
    case Encoding::SatoCatch: {
      arity(2);
      std::string f = fresh.next(), g = fresh.next();
      return ct_lam(f, ct_catch(g, ct_app(ct_var(f), ct_catch(name(0), ct_throw(g, term(1))))));
    }
    case Encoding::SatoThrow: arity(2); return ct_throw(name(0), term(1));
    case Encoding::Tapply: {
      arity(2);
      std::string x = fresh.next();
      return ct_app(term(0), ct_lam(x, ct_throw(name(1), ct_var(x))));
    }
    case Encoding::Handle: {
      arity(4);
      std::string g = fresh.next();
      return ct_catch(g, ct_where(term(3), name(2), ct_catch(name(0), ct_throw(g, term(1)))));
    }
    case Encoding::Inl: arity(1); return ct_lam(fresh.next(), term(0));
    case Encoding::Inr: {
      arity(1);
      std::string f = fresh.next();
      return ct_lam(f, ct_app(ct_var(f), term(0)));
    }
  }
  return nullptr;
}

}  // namespace ccv
