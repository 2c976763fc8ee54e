#include "ccv/target.hpp"

#include "ccv/sexpr.hpp"

namespace ccv {

namespace {

TExpr tnode(TTag tag, std::string name, TExpr a, TExpr b) {
  return std::make_shared<const TNode>(TNode{tag, std::move(name), std::move(a), std::move(b)});
}

void need(const TExpr& e, Sort s, const char* where) {
  if (!e) throw IllSorted(std::string("missing subterm in ") + where);
  if (sort_of(e) != s)
    throw IllSorted(std::string(where) + " needs sort " + sort_name(s) + ", got " + sort_name(sort_of(e)));
}

}  // namespace

Sort sort_of(const TExpr& t) {
  switch (t->tag) {
    case TTag::TLamK:
    case TTag::WApp: return Sort::T;
    case TTag::KApp:
    case TTag::TApp: return Sort::Q;
    case TTag::WVar:
    case TTag::WLam: return Sort::W;
    case TTag::KVar:
    case TTag::KLam: return Sort::K;
  }
  return Sort::T;
}

const char* sort_name(Sort s) {
  switch (s) {
    case Sort::T: return "T";
    case Sort::Q: return "Q";
    case Sort::W: return "W";
    case Sort::K: return "K";
  }
  return "?";
}

TExpr t_lamk(std::string k, TExpr q) {
  need(q, Sort::Q, "tlam body");
  return tnode(TTag::TLamK, std::move(k), std::move(q), nullptr);
}
TExpr t_wapp(TExpr w1, TExpr w2) {
  need(w1, Sort::W, "wapp function");
  need(w2, Sort::W, "wapp argument");
  return tnode(TTag::WApp, "", std::move(w1), std::move(w2));
}
TExpr t_kapp(TExpr k, TExpr w) {
  need(k, Sort::K, "kapp function");
  need(w, Sort::W, "kapp argument");
  return tnode(TTag::KApp, "", std::move(k), std::move(w));
}
TExpr t_tapp(TExpr t, TExpr k) {
  need(t, Sort::T, "tapp function");
  need(k, Sort::K, "tapp argument");
  return tnode(TTag::TApp, "", std::move(t), std::move(k));
}
TExpr t_wvar(std::string x) { return tnode(TTag::WVar, std::move(x), nullptr, nullptr); }
TExpr t_wlam(std::string x, TExpr t) {
  need(t, Sort::T, "wlam body");
  return tnode(TTag::WLam, std::move(x), std::move(t), nullptr);
}
TExpr t_kvar(std::string k) { return tnode(TTag::KVar, std::move(k), nullptr, nullptr); }
TExpr t_klam(std::string x, TExpr q) {
  need(q, Sort::Q, "klam body");
  return tnode(TTag::KLam, std::move(x), std::move(q), nullptr);
}

TExpr t_with_children(const TExpr& e, TExpr a, TExpr b) {
  if (a == e->a && b == e->b) return e;
  switch (e->tag) {
    case TTag::TLamK: return t_lamk(e->name, std::move(a));
    case TTag::WApp: return t_wapp(std::move(a), std::move(b));
    case TTag::KApp: return t_kapp(std::move(a), std::move(b));
    case TTag::TApp: return t_tapp(std::move(a), std::move(b));
    case TTag::WLam: return t_wlam(e->name, std::move(a));
    case TTag::KLam: return t_klam(e->name, std::move(a));
    default: return e;
  }
}

// ---------------------------------------------------------------- syntax

namespace {

const std::string& atom(const Sexp& s) {
  if (!s.is_atom) throw ParseError("expected name, got " + show_sexp(s));
  return s.atom;
}

TExpr t_from(const Sexp& s) {
  if (s.is_atom || s.items.empty() || !s.items[0].is_atom)
    throw ParseError("malformed target term " + show_sexp(s));
  const std::string& h = s.items[0].atom;
  auto want = [&](std::size_t n) {
    if (s.items.size() != n) throw ParseError("wrong number of fields in " + show_sexp(s));
  };
  try {
    if (h == "wvar") { want(2); return t_wvar(atom(s.items[1])); }
    if (h == "kvar") { want(2); return t_kvar(atom(s.items[1])); }
    if (h == "tlam") { want(3); return t_lamk(atom(s.items[1]), t_from(s.items[2])); }
    if (h == "wlam") { want(3); return t_wlam(atom(s.items[1]), t_from(s.items[2])); }
    if (h == "klam") { want(3); return t_klam(atom(s.items[1]), t_from(s.items[2])); }
    if (h == "wapp") { want(3); return t_wapp(t_from(s.items[1]), t_from(s.items[2])); }
    if (h == "kapp") { want(3); return t_kapp(t_from(s.items[1]), t_from(s.items[2])); }
    if (h == "tapp") { want(3); return t_tapp(t_from(s.items[1]), t_from(s.items[2])); }
  } catch (const IllSorted& e) {
    throw IllSorted(std::string(e.what()) + " at " + show_sexp(s));
  }
  throw ParseError("unknown target form " + h);
}

void t_sexpr_rec(const TExpr& e, std::string& out) {
  static const char* heads[] = {"tlam", "wapp", "kapp", "tapp", "wvar", "wlam", "kvar", "klam"};
  out += "(";
  out += heads[static_cast<int>(e->tag)];
  if (!e->name.empty()) out += " " + e->name;
  if (e->a) {
    out += " ";
    t_sexpr_rec(e->a, out);
  }
  if (e->b) {
    out += " ";
    t_sexpr_rec(e->b, out);
  }
  out += ")";
}

void t_pretty_rec(const TExpr& e, std::string& out, bool atomic) {
  switch (e->tag) {
    case TTag::WVar:
    case TTag::KVar: out += e->name; return;
    case TTag::TLamK:
    case TTag::WLam:
    case TTag::KLam:
      if (atomic) out += "(";
      out += "λ" + e->name + ".";
      t_pretty_rec(e->a, out, false);
      if (atomic) out += ")";
      return;
    default:
      if (atomic) out += "(";
      t_pretty_rec(e->a, out, !(e->a->tag == TTag::WApp || e->a->tag == TTag::KApp || e->a->tag == TTag::TApp));
      out += " ";
      t_pretty_rec(e->b, out, true);
      if (atomic) out += ")";
      return;
  }
}

struct TScopes {
  std::vector<std::string> xs, ks;
  static std::string look(const std::vector<std::string>& st, const std::string& n, char c) {
    for (std::size_t i = st.size(); i-- > 0;)
      if (st[i] == n) return std::string(1, c) + std::to_string(st.size() - 1 - i);
    return "'" + n;
  }
};

void t_key_rec(const TExpr& e, TScopes& sc, std::string& out) {
  switch (e->tag) {
    case TTag::WVar: out += TScopes::look(sc.xs, e->name, '#'); return;
    case TTag::KVar: out += TScopes::look(sc.ks, e->name, '%'); return;
    case TTag::TLamK:
      out += "(t ";
      sc.ks.push_back(e->name);
      t_key_rec(e->a, sc, out);
      sc.ks.pop_back();
      out += ")";
      return;
    case TTag::WLam:
    case TTag::KLam:
      out += e->tag == TTag::WLam ? "(w " : "(k ";
      sc.xs.push_back(e->name);
      t_key_rec(e->a, sc, out);
      sc.xs.pop_back();
      out += ")";
      return;
    default:
      out += "(@";
      out += std::to_string(static_cast<int>(e->tag));
      out += " ";
      t_key_rec(e->a, sc, out);
      out += " ";
      t_key_rec(e->b, sc, out);
      out += ")";
      return;
  }
}

void t_fv_rec(const TExpr& e, std::multiset<std::string>& bx, std::multiset<std::string>& bk, FreeVars& out) {
  switch (e->tag) {
    case TTag::WVar:
      if (!bx.count(e->name)) out.ordinary.insert(e->name);
      return;
    case TTag::KVar:
      if (!bk.count(e->name)) out.continuation.insert(e->name);
      return;
    case TTag::TLamK: {
      auto it = bk.insert(e->name);
      t_fv_rec(e->a, bx, bk, out);
      bk.erase(it);
      return;
    }
    case TTag::WLam:
    case TTag::KLam: {
      auto it = bx.insert(e->name);
      t_fv_rec(e->a, bx, bk, out);
      bx.erase(it);
      return;
    }
    default:
      t_fv_rec(e->a, bx, bk, out);
      t_fv_rec(e->b, bx, bk, out);
  }
}

}  // namespace

TExpr t_parse(const std::string& text) { return t_from(read_sexp(text)); }

std::string t_to_sexpr(const TExpr& t) {
  std::string out;
  t_sexpr_rec(t, out);
  return out;
}

std::string t_to_pretty(const TExpr& t) {
  std::string out;
  t_pretty_rec(t, out, false);
  return out;
}

std::string t_alpha_key(const TExpr& t) {
  std::string out;
  TScopes sc;
  t_key_rec(t, sc, out);
  return out;
}

bool t_alpha_equal(const TExpr& a, const TExpr& b) { return t_alpha_key(a) == t_alpha_key(b); }

std::size_t t_size(const TExpr& t) { return t ? 1 + t_size(t->a) + t_size(t->b) : 0; }

FreeVars t_free_vars(const TExpr& t) {
  FreeVars out;
  std::multiset<std::string> bx, bk;
  t_fv_rec(t, bx, bk, out);
  return out;
}

bool t_occurs_w(const std::string& x, const TExpr& t) {
  switch (t->tag) {
    case TTag::WVar: return t->name == x;
    case TTag::KVar: return false;
    case TTag::TLamK: return t_occurs_w(x, t->a);
    case TTag::WLam:
    case TTag::KLam: return t->name != x && t_occurs_w(x, t->a);
    default: return t_occurs_w(x, t->a) || t_occurs_w(x, t->b);
  }
}

bool t_occurs_k(const std::string& k, const TExpr& t) {
  switch (t->tag) {
    case TTag::WVar: return false;
    case TTag::KVar: return t->name == k;
    case TTag::TLamK: return t->name != k && t_occurs_k(k, t->a);
    case TTag::WLam:
    case TTag::KLam: return t_occurs_k(k, t->a);
    default: return t_occurs_k(k, t->a) || t_occurs_k(k, t->b);
  }
}

void t_collect_names(const TExpr& t, std::unordered_set<std::string>& out) {
  if (!t) return;
  if (!t->name.empty()) out.insert(t->name);
  t_collect_names(t->a, out);
  t_collect_names(t->b, out);
}

void avoid_target(Fresh& fresh, const TExpr& t) {
  std::unordered_set<std::string> names;
  t_collect_names(t, names);
  for (const auto& n : names) fresh.avoid(n);
}

// ---------------------------------------------------------------- substitution

namespace {

// ns_k: substituting a continuation variable rather than an ordinary one
TExpr t_subst_rec(const TExpr& e, const std::string& v, bool ns_k, const TExpr& r, const FreeVars& fvr,
                  Fresh& fresh) {
  switch (e->tag) {
    case TTag::WVar: return (!ns_k && e->name == v) ? r : e;
    case TTag::KVar: return (ns_k && e->name == v) ? r : e;
    case TTag::TLamK:
    case TTag::WLam:
    case TTag::KLam: {
      bool binds_k = e->tag == TTag::TLamK;
      if (binds_k == ns_k && e->name == v) return e;
      if (ns_k ? !t_occurs_k(v, e->a) : !t_occurs_w(v, e->a)) return e;
      std::string y = e->name;
      TExpr body = e->a;
      bool clash = binds_k ? fvr.continuation.count(y) > 0 : fvr.ordinary.count(y) > 0;
      if (clash) {
        std::string y2 = fresh.next();
        TExpr rep = binds_k ? t_kvar(y2) : t_wvar(y2);
        FreeVars f2;
        (binds_k ? f2.continuation : f2.ordinary).insert(y2);
        body = t_subst_rec(body, y, binds_k, rep, f2, fresh);
        y = y2;
      }
      body = t_subst_rec(body, v, ns_k, r, fvr, fresh);
      switch (e->tag) {
        case TTag::TLamK: return t_lamk(y, body);
        case TTag::WLam: return t_wlam(y, body);
        default: return t_klam(y, body);
      }
    }
    default:
      return t_with_children(e, t_subst_rec(e->a, v, ns_k, r, fvr, fresh),
                             t_subst_rec(e->b, v, ns_k, r, fvr, fresh));
  }
}

}  // namespace

TExpr t_subst_w(const TExpr& t, const std::string& x, const TExpr& w, Fresh& fresh) {
  avoid_target(fresh, w);
  return t_subst_rec(t, x, false, w, t_free_vars(w), fresh);
}

TExpr t_subst_k(const TExpr& t, const std::string& k, const TExpr& kont, Fresh& fresh) {
  avoid_target(fresh, kont);
  return t_subst_rec(t, k, true, kont, t_free_vars(kont), fresh);
}

TExpr t_subterm_at(const TExpr& t, const Path& p) {
  TExpr cur = t;
  for (int i : p) {
    TExpr nx = i == 0 ? cur->a : cur->b;
    if (!nx) throw std::out_of_range("target path leaves the tree");
    cur = nx;
  }
  return cur;
}

namespace {
TExpr t_replace_rec(const TExpr& e, const Path& p, std::size_t d, const TExpr& repl) {
  if (d == p.size()) return repl;
  TExpr child = p[d] == 0 ? e->a : e->b;
  if (!child) throw std::out_of_range("target path leaves the tree");
  TExpr nc = t_replace_rec(child, p, d + 1, repl);
  return p[d] == 0 ? t_with_children(e, nc, e->b) : t_with_children(e, e->a, nc);
}
}  // namespace

TExpr t_replace_at(const TExpr& t, const Path& p, const TExpr& repl) { return t_replace_rec(t, p, 0, repl); }

// ---------------------------------------------------------------- reduction

const char* t_rule_name(TRule r) { return r == TRule::Beta ? "beta" : "eta"; }

namespace {

bool beta_at(const TExpr& e) {
  switch (e->tag) {
    case TTag::WApp: return e->a->tag == TTag::WLam;
    case TTag::TApp: return e->a->tag == TTag::TLamK;
    case TTag::KApp: return e->a->tag == TTag::KLam;
    default: return false;
  }
}

bool eta_at(const TExpr& e) {
  const TExpr& body = e->a;
  switch (e->tag) {
    case TTag::WLam:
      return body->tag == TTag::WApp && body->b->tag == TTag::WVar && body->b->name == e->name &&
             !t_occurs_w(e->name, body->a);
    case TTag::KLam:
      return body->tag == TTag::KApp && body->b->tag == TTag::WVar && body->b->name == e->name &&
             !t_occurs_w(e->name, body->a);
    case TTag::TLamK:
      return body->tag == TTag::TApp && body->b->tag == TTag::KVar && body->b->name == e->name &&
             !t_occurs_k(e->name, body->a);
    default: return false;
  }
}

TExpr contract_beta(const TExpr& e, Fresh& fresh) {
  const TExpr& f = e->a;
  if (f->tag == TTag::TLamK) return t_subst_k(f->a, f->name, e->b, fresh);
  return t_subst_w(f->a, f->name, e->b, fresh);
}

void collect_steps(const TExpr& root, const TExpr& e, Path& p, std::vector<TStep>& out, Fresh& fresh) {
  if (beta_at(e)) out.push_back({p, TRule::Beta, t_replace_at(root, p, contract_beta(e, fresh))});
  if (eta_at(e)) out.push_back({p, TRule::Eta, t_replace_at(root, p, e->a->a)});
  if (e->a) {
    p.push_back(0);
    collect_steps(root, e->a, p, out, fresh);
    p.pop_back();
  }
  if (e->b) {
    p.push_back(1);
    collect_steps(root, e->b, p, out, fresh);
    p.pop_back();
  }
}

bool find_leftmost(const TExpr& e, Path& p, bool allow_eta, TRule& rule) {
  if (beta_at(e)) {
    rule = TRule::Beta;
    return true;
  }
  if (allow_eta && eta_at(e)) {
    rule = TRule::Eta;
    return true;
  }
  for (int i = 0; i < 2; ++i) {
    const TExpr& c = i == 0 ? e->a : e->b;
    if (!c) continue;
    p.push_back(i);
    if (find_leftmost(c, p, allow_eta, rule)) return true;
    p.pop_back();
  }
  return false;
}

std::size_t count_free(const TExpr& e, const std::string& n, bool ns_k) {
  if (!e) return 0;
  switch (e->tag) {
    case TTag::WVar: return !ns_k && e->name == n;
    case TTag::KVar: return ns_k && e->name == n;
    case TTag::WLam:
    case TTag::KLam:
      if (!ns_k && e->name == n) return 0;
      break;
    case TTag::TLamK:
      if (ns_k && e->name == n) return 0;
      break;
    default: break;
  }
  return count_free(e->a, n, ns_k) + count_free(e->b, n, ns_k);
}

// Leftmost η-redex or β-redex whose bound variable occurs at most once.
bool find_affine(const TExpr& e, Path& p, TRule& rule) {
  if (beta_at(e) && count_free(e->a->a, e->a->name, e->a->tag == TTag::TLamK) <= 1) {
    rule = TRule::Beta;
    return true;
  }
  if (eta_at(e)) {
    rule = TRule::Eta;
    return true;
  }
  for (int i = 0; i < 2; ++i) {
    const TExpr& c = i == 0 ? e->a : e->b;
    if (!c) continue;
    p.push_back(i);
    if (find_affine(c, p, rule)) return true;
    p.pop_back();
  }
  return false;
}

std::optional<TStep> leftmost(const TExpr& t, Fresh& fresh, bool allow_eta, bool affine_first = false) {
  Path p;
  TRule r;
  bool found = affine_first && find_affine(t, p, r);
  if (!found) {
    p.clear();
    found = find_leftmost(t, p, allow_eta, r);
  }
  if (!found) return std::nullopt;
  auto res = t_contract(t, p, r, fresh);
  return TStep{p, r, *res};
}

bool t_nf(const TExpr& e);
bool q_nf(const TExpr& e);

bool w_nf(const TExpr& e) {
  if (e->tag == TTag::WVar) return true;
  return e->tag == TTag::WLam && t_nf(e->a);
}
bool k_nf(const TExpr& e) {
  if (e->tag == TTag::KVar) return true;
  return e->tag == TTag::KLam && q_nf(e->a);
}
bool t_nf(const TExpr& e) {
  if (e->tag == TTag::TLamK) return q_nf(e->a);
  return e->tag == TTag::WApp && e->a->tag == TTag::WVar && w_nf(e->b);
}
bool q_nf(const TExpr& e) {
  if (e->tag == TTag::KApp) return e->a->tag == TTag::KVar && w_nf(e->b);
  return e->tag == TTag::TApp && e->a->tag == TTag::WApp && e->a->a->tag == TTag::WVar && w_nf(e->a->b) &&
         k_nf(e->b);
}

bool has_eta(const TExpr& e) {
  if (!e) return false;
  return eta_at(e) || has_eta(e->a) || has_eta(e->b);
}

TargetOutcome run(const TExpr& t, std::size_t fuel, bool record, bool allow_eta, bool affine_first = false) {
  Fresh fresh;
  avoid_target(fresh, t);
  TargetOutcome out{TargetOutcome::Kind::FuelExhausted, t, 0, {}};
  TExpr cur = t;
  for (;;) {
    auto s = leftmost(cur, fresh, allow_eta, affine_first);
    if (!s) {
      out.kind = TargetOutcome::Kind::Normal;
      out.term = cur;
      return out;
    }
    if (out.steps >= fuel) {
      out.term = cur;
      return out;
    }
    cur = s->result;
    ++out.steps;
    if (record) out.trace.push_back(std::move(*s));
  }
}

}  // namespace

std::vector<TStep> t_step(const TExpr& t) {
  Fresh fresh;
  avoid_target(fresh, t);
  std::vector<TStep> out;
  Path p;
  collect_steps(t, t, p, out, fresh);
  return out;
}

std::optional<TExpr> t_contract(const TExpr& t, const Path& pos, TRule rule, Fresh& fresh) {
  TExpr e = t_subterm_at(t, pos);
  if (rule == TRule::Beta) {
    if (!beta_at(e)) return std::nullopt;
    avoid_target(fresh, t);
    return t_replace_at(t, pos, contract_beta(e, fresh));
  }
  if (!eta_at(e)) return std::nullopt;
  return t_replace_at(t, pos, e->a->a);
}

std::optional<TStep> t_leftmost_step(const TExpr& t, Fresh& fresh) { return leftmost(t, fresh, true); }

std::optional<TStep> t_affine_first_step(const TExpr& t, Fresh& fresh) { return leftmost(t, fresh, true, true); }

bool t_is_beta_normal(const TExpr& t) {
  switch (sort_of(t)) {
    case Sort::T: return t_nf(t);
    case Sort::Q: return q_nf(t);
    case Sort::W: return w_nf(t);
    case Sort::K: return k_nf(t);
  }
  return false;
}

bool t_is_normal(const TExpr& t) { return t_is_beta_normal(t) && !has_eta(t); }

bool t_is_head_normal(const TExpr& t) {
  if (t->tag == TTag::WApp) return t->a->tag == TTag::WVar;
  if (t->tag != TTag::TLamK) return false;
  const TExpr& q = t->a;
  if (q->tag == TTag::KApp) return q->a->tag == TTag::KVar;
  return q->a->tag == TTag::WApp && q->a->a->tag == TTag::WVar;
}

TargetOutcome t_normalize(const TExpr& t, std::size_t fuel, bool record) { return run(t, fuel, record, true); }

TargetOutcome t_normalize_beta(const TExpr& t, std::size_t fuel, bool record) {
  return run(t, fuel, record, false);
}


std::optional<TStep> t_head_step(const TExpr& t, Fresh& fresh) {
  Path p;
  if (t->tag == TTag::WApp) {
    if (t->a->tag != TTag::WLam) return std::nullopt;
  } else if (t->tag == TTag::TLamK) {
    const TExpr& q = t->a;
    if (q->tag == TTag::KApp && q->a->tag == TTag::KLam) {
      p = {0};
    } else if (q->tag == TTag::TApp && q->a->tag == TTag::TLamK) {
      p = {0};
    } else if (q->tag == TTag::TApp && q->a->tag == TTag::WApp && q->a->a->tag == TTag::WLam) {
      p = {0, 0};
    } else {
      return std::nullopt;
    }
  } else {
    return std::nullopt;
  }
  auto r = t_contract(t, p, TRule::Beta, fresh);
  return TStep{p, TRule::Beta, *r};
}

SolveResult solvable(const TExpr& t, std::size_t fuel, bool record) {
  if (sort_of(t) != Sort::T) throw IllSorted("solvable expects a sort-T term");
  Fresh fresh;
  avoid_target(fresh, t);
  SolveResult out;
  TExpr cur = t;
  for (;;) {
    if (t_is_head_normal(cur)) {
      out.solvable = true;
      out.term = cur;
      return out;
    }
    if (out.steps >= fuel) break;
    auto s = t_head_step(cur, fresh);
    if (!s) break;
    cur = s->result;
    ++out.steps;
    if (record) out.trace.push_back(std::move(*s));
  }
  out.term = cur;
  return out;
}

}  // namespace ccv
