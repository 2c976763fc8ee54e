#include "ccv/syntax.hpp"

#include <functional>
#include <map>

#include "ccv/sexpr.hpp"

namespace ccv {

namespace {

Expr node(Tag tag, std::string name, Expr a, Expr b) {
  return std::make_shared<const Node>(Node{tag, std::move(name), std::move(a), std::move(b)});
}

void need_term(const Expr& e, const char* where) {
  if (!e || !is_term(e)) throw SortError(std::string("jump in term position: ") + where);
}

void need_jump(const Expr& e, const char* where) {
  if (!e || !is_jump(e)) throw SortError(std::string("term in jump position: ") + where);
}

void need_name(const std::string& n) {
  if (n.empty()) throw SortError("empty variable name");
}

}  // namespace

Term var(std::string x) {
  need_name(x);
  return node(Tag::Var, std::move(x), nullptr, nullptr);
}

Term lam(std::string x, Term body) {
  need_name(x);
  need_term(body, "lam body");
  return node(Tag::Lam, std::move(x), std::move(body), nullptr);
}

Term app(Term f, Term arg) {
  need_term(f, "app function");
  need_term(arg, "app argument");
  return node(Tag::App, "", std::move(f), std::move(arg));
}

Term where(Term body, std::string x, Term bound) {
  need_name(x);
  need_term(body, "bind body");
  need_term(bound, "bind bound");
  return node(Tag::Where, std::move(x), std::move(body), std::move(bound));
}

Term mu(std::string k, Jump body) {
  need_name(k);
  need_jump(body, "mu body");
  return node(Tag::Mu, std::move(k), std::move(body), nullptr);
}

Jump jmp(std::string k, Term body) {
  need_name(k);
  need_term(body, "jmp body");
  return node(Tag::Throw, std::move(k), std::move(body), nullptr);
}

Jump jwhere(Jump body, std::string x, Term bound) {
  need_name(x);
  need_jump(body, "jbind body");
  need_term(bound, "jbind bound");
  return node(Tag::JWhere, std::move(x), std::move(body), std::move(bound));
}

ValueTag classify(const Term& t) { return is_value(t) ? ValueTag::Value : ValueTag::NonValue; }

Expr with_children(const Expr& e, Expr a, Expr b) {
  if (a == e->a && b == e->b) return e;
  switch (e->tag) {
    case Tag::Var: return e;
    case Tag::Lam: return lam(e->name, std::move(a));
    case Tag::App: return app(std::move(a), std::move(b));
    case Tag::Where: return where(std::move(a), e->name, std::move(b));
    case Tag::Mu: return mu(e->name, std::move(a));
    case Tag::Throw: return jmp(e->name, std::move(a));
    case Tag::JWhere: return jwhere(std::move(a), e->name, std::move(b));
  }
  return e;
}

// ---------------------------------------------------------------- free vars

namespace {

void fv_rec(const Expr& e, std::multiset<std::string>& bx, std::multiset<std::string>& bk, FreeVars& out) {
  switch (e->tag) {
    case Tag::Var:
      if (!bx.count(e->name)) out.ordinary.insert(e->name);
      return;
    case Tag::Lam: {
      auto it = bx.insert(e->name);
      fv_rec(e->a, bx, bk, out);
      bx.erase(it);
      return;
    }
    case Tag::App:
      fv_rec(e->a, bx, bk, out);
      fv_rec(e->b, bx, bk, out);
      return;
    case Tag::Where:
    case Tag::JWhere: {
      fv_rec(e->b, bx, bk, out);
      auto it = bx.insert(e->name);
      fv_rec(e->a, bx, bk, out);
      bx.erase(it);
      return;
    }
    case Tag::Mu: {
      auto it = bk.insert(e->name);
      fv_rec(e->a, bx, bk, out);
      bk.erase(it);
      return;
    }
    case Tag::Throw:
      if (!bk.count(e->name)) out.continuation.insert(e->name);
      fv_rec(e->a, bx, bk, out);
      return;
  }
}

}  // namespace

FreeVars free_vars(const Expr& e) {
  FreeVars out;
  std::multiset<std::string> bx, bk;
  fv_rec(e, bx, bk, out);
  return out;
}

bool occurs_free(const std::string& x, const Expr& e) {
  switch (e->tag) {
    case Tag::Var: return e->name == x;
    case Tag::Lam: return e->name != x && occurs_free(x, e->a);
    case Tag::App: return occurs_free(x, e->a) || occurs_free(x, e->b);
    case Tag::Where:
    case Tag::JWhere: return occurs_free(x, e->b) || (e->name != x && occurs_free(x, e->a));
    case Tag::Mu:
    case Tag::Throw: return occurs_free(x, e->a);
  }
  return false;
}

bool occurs_free_cvar(const std::string& k, const Expr& e) {
  switch (e->tag) {
    case Tag::Var: return false;
    case Tag::Lam: return occurs_free_cvar(k, e->a);
    case Tag::App:
    case Tag::Where:
    case Tag::JWhere: return occurs_free_cvar(k, e->a) || occurs_free_cvar(k, e->b);
    case Tag::Mu: return e->name != k && occurs_free_cvar(k, e->a);
    case Tag::Throw: return e->name == k || occurs_free_cvar(k, e->a);
  }
  return false;
}

void collect_names(const Expr& e, std::unordered_set<std::string>& out) {
  if (!e) return;
  if (!e->name.empty()) out.insert(e->name);
  collect_names(e->a, out);
  collect_names(e->b, out);
}

std::size_t size(const Expr& e) {
  if (!e) return 0;
  return 1 + size(e->a) + size(e->b);
}

std::string Fresh::next() {
  for (;;) {
    std::string n = "z" + std::to_string(counter_++);
    if (taken_.insert(n).second) return n;
  }
}

// ---------------------------------------------------------------- parse / print

namespace {

const std::string& atom_of(const Sexp& s, const char* what) {
  if (!s.is_atom) throw ParseError(std::string("expected name for ") + what + ", got " + show_sexp(s));
  return s.atom;
}

void arity(const Sexp& s, std::size_t n) {
  if (s.items.size() != n)
    throw ParseError("wrong number of fields in " + show_sexp(s));
}

bool is_keyword(const std::string& a) {
  return a == "lam" || a == "app" || a == "bind" || a == "mu" || a == "jmp" || a == "jbind";
}

Expr from_sexp(const Sexp& s, bool want_jump);

Term term_of(const Sexp& s) { return from_sexp(s, false); }
Jump jump_of(const Sexp& s) { return from_sexp(s, true); }

Expr from_sexp(const Sexp& s, bool want_jump) {
  if (s.is_atom) {
    if (want_jump) throw ParseError("expected a jump, got variable " + s.atom);
    if (is_keyword(s.atom)) throw ParseError("keyword used as variable: " + s.atom);
    return var(s.atom);
  }
  if (s.items.empty() || !s.items[0].is_atom) throw ParseError("malformed expression " + show_sexp(s));
  const std::string& h = s.items[0].atom;
  bool jump_form = (h == "jmp" || h == "jbind");
  if (jump_form != want_jump) {
    throw ParseError(want_jump ? "expected a jump, got " + show_sexp(s)
                               : "jump in term position: " + show_sexp(s));
  }
  if (h == "lam") {
    arity(s, 3);
    return lam(atom_of(s.items[1], "lam"), term_of(s.items[2]));
  }
  if (h == "app") {
    arity(s, 3);
    return app(term_of(s.items[1]), term_of(s.items[2]));
  }
  if (h == "bind") {
    arity(s, 4);
    return where(term_of(s.items[1]), atom_of(s.items[2], "bind"), term_of(s.items[3]));
  }
  if (h == "mu") {
    arity(s, 3);
    return mu(atom_of(s.items[1], "mu"), jump_of(s.items[2]));
  }
  if (h == "jmp") {
    arity(s, 3);
    return jmp(atom_of(s.items[1], "jmp"), term_of(s.items[2]));
  }
  if (h == "jbind") {
    arity(s, 4);
    return jwhere(jump_of(s.items[1]), atom_of(s.items[2], "jbind"), term_of(s.items[3]));
  }
  throw ParseError("unknown form " + h);
}

void sexpr_rec(const Expr& e, std::string& out) {
  switch (e->tag) {
    case Tag::Var: out += e->name; return;
    case Tag::Lam:
      out += "(lam " + e->name + " ";
      sexpr_rec(e->a, out);
      out += ")";
      return;
    case Tag::App:
      out += "(app ";
      sexpr_rec(e->a, out);
      out += " ";
      sexpr_rec(e->b, out);
      out += ")";
      return;
    case Tag::Where:
    case Tag::JWhere:
      out += e->tag == Tag::Where ? "(bind " : "(jbind ";
      sexpr_rec(e->a, out);
      out += " " + e->name + " ";
      sexpr_rec(e->b, out);
      out += ")";
      return;
    case Tag::Mu:
      out += "(mu " + e->name + " ";
      sexpr_rec(e->a, out);
      out += ")";
      return;
    case Tag::Throw:
      out += "(jmp " + e->name + " ";
      sexpr_rec(e->a, out);
      out += ")";
      return;
  }
}

void pretty_rec(const Expr& e, std::string& out, bool atomic) {
  switch (e->tag) {
    case Tag::Var: out += e->name; return;
    case Tag::Lam:
      if (atomic) out += "(";
      out += "λ" + e->name + ".";
      pretty_rec(e->a, out, false);
      if (atomic) out += ")";
      return;
    case Tag::App:
      if (atomic) out += "(";
      pretty_rec(e->a, out, e->a->tag != Tag::App);
      out += " ";
      pretty_rec(e->b, out, true);
      if (atomic) out += ")";
      return;
    case Tag::Where:
    case Tag::JWhere:
      if (atomic) out += "(";
      out += "⟨";
      pretty_rec(e->a, out, false);
      out += "⟩" + e->name + ":=";
      pretty_rec(e->b, out, true);
      if (atomic) out += ")";
      return;
    case Tag::Mu:
      if (atomic) out += "(";
      out += "μ" + e->name + ".";
      pretty_rec(e->a, out, false);
      if (atomic) out += ")";
      return;
    case Tag::Throw:
      out += "[" + e->name + "]";
      pretty_rec(e->a, out, true);
      return;
  }
}

}  // namespace

Term parse_term(const std::string& text) { return term_of(read_sexp(text)); }
Jump parse_jump(const std::string& text) { return jump_of(read_sexp(text)); }

Expr parse_expr(const std::string& text) {
  Sexp s = read_sexp(text);
  bool j = s.head_is("jmp") || s.head_is("jbind");
  return from_sexp(s, j);
}

std::string to_sexpr(const Expr& e) {
  std::string out;
  sexpr_rec(e, out);
  return out;
}

std::string to_pretty(const Expr& e) {
  std::string out;
  pretty_rec(e, out, false);
  return out;
}

// ---------------------------------------------------------------- alpha

namespace {

struct Scopes {
  std::vector<std::string> xs, ks;

  static std::string lookup(const std::vector<std::string>& st, const std::string& n, char tag) {
    for (std::size_t i = st.size(); i-- > 0;)
      if (st[i] == n) return std::string(1, tag) + std::to_string(st.size() - 1 - i);
    return "'" + n;
  }
};

void key_rec(const Expr& e, Scopes& sc, std::string& out) {
  switch (e->tag) {
    case Tag::Var: out += Scopes::lookup(sc.xs, e->name, '#'); return;
    case Tag::Lam:
      out += "(L ";
      sc.xs.push_back(e->name);
      key_rec(e->a, sc, out);
      sc.xs.pop_back();
      out += ")";
      return;
    case Tag::App:
      out += "(A ";
      key_rec(e->a, sc, out);
      out += " ";
      key_rec(e->b, sc, out);
      out += ")";
      return;
    case Tag::Where:
    case Tag::JWhere:
      out += e->tag == Tag::Where ? "(W " : "(JW ";
      sc.xs.push_back(e->name);
      key_rec(e->a, sc, out);
      sc.xs.pop_back();
      out += " ";
      key_rec(e->b, sc, out);
      out += ")";
      return;
    case Tag::Mu:
      out += "(M ";
      sc.ks.push_back(e->name);
      key_rec(e->a, sc, out);
      sc.ks.pop_back();
      out += ")";
      return;
    case Tag::Throw:
      out += "(T " + Scopes::lookup(sc.ks, e->name, '%') + " ";
      key_rec(e->a, sc, out);
      out += ")";
      return;
  }
}

}  // namespace

std::string alpha_key(const Expr& e) {
  std::string out;
  Scopes sc;
  key_rec(e, sc, out);
  return out;
}

bool alpha_equal(const Expr& a, const Expr& b) { return alpha_key(a) == alpha_key(b); }

// ---------------------------------------------------------------- substitution

namespace {

bool in_fv(const FreeVars& fv, const std::string& x) { return fv.ordinary.count(x) > 0; }
bool in_fvk(const FreeVars& fv, const std::string& k) { return fv.continuation.count(k) > 0; }

Expr subst_rec(const Expr& e, const std::string& x, const Term& v, const FreeVars& fvv, Fresh& fresh) {
  switch (e->tag) {
    case Tag::Var: return e->name == x ? v : e;
    case Tag::App: return with_children(e, subst_rec(e->a, x, v, fvv, fresh), subst_rec(e->b, x, v, fvv, fresh));
    case Tag::Throw: return with_children(e, subst_rec(e->a, x, v, fvv, fresh), nullptr);
    case Tag::Lam:
    case Tag::Where:
    case Tag::JWhere: {
      Expr bound = e->b ? subst_rec(e->b, x, v, fvv, fresh) : nullptr;
      if (e->name == x || !occurs_free(x, e->a)) return with_children(e, e->a, bound);
      std::string y = e->name;
      Expr body = e->a;
      if (in_fv(fvv, y)) {
        std::string y2 = fresh.next();
        body = subst_rec(body, y, var(y2), FreeVars{{y2}, {}}, fresh);
        y = y2;
      }
      body = subst_rec(body, x, v, fvv, fresh);
      switch (e->tag) {
        case Tag::Lam: return lam(y, body);
        case Tag::Where: return where(body, y, bound);
        default: return jwhere(body, y, bound);
      }
    }
    case Tag::Mu: {
      if (!occurs_free(x, e->a)) return e;
      std::string k = e->name;
      Expr body = e->a;
      if (in_fvk(fvv, k)) {
        std::string k2 = fresh.next();
        body = rename_cvar(body, k, k2, fresh);
        k = k2;
      }
      return mu(k, subst_rec(body, x, v, fvv, fresh));
    }
  }
  return e;
}

// Structural substitution [k]Q -> [c]<M>x:=Q (frame present) or [c]Q (frame absent).
struct StructCtx {
  std::string k;
  std::string c;
  const JumpContext* frame;
  FreeVars fvm;  // free vars of the inserted frame, minus its own binder
};

Expr struct_rec(const Expr& e, const StructCtx& s, Fresh& fresh) {
  switch (e->tag) {
    case Tag::Var: return e;
    case Tag::App: return with_children(e, struct_rec(e->a, s, fresh), struct_rec(e->b, s, fresh));
    case Tag::Throw: {
      Expr q = struct_rec(e->a, s, fresh);
      if (e->name != s.k) return with_children(e, q, nullptr);
      if (s.frame) return jmp(s.c, where(s.frame->bound, s.frame->binder, q));
      return jmp(s.c, q);
    }
    case Tag::Lam:
    case Tag::Where:
    case Tag::JWhere: {
      Expr bound = e->b ? struct_rec(e->b, s, fresh) : nullptr;
      if (!occurs_free_cvar(s.k, e->a)) return with_children(e, e->a, bound);
      std::string y = e->name;
      Expr body = e->a;
      if (in_fv(s.fvm, y)) {
        std::string y2 = fresh.next();
        body = subst_rec(body, y, var(y2), FreeVars{{y2}, {}}, fresh);
        y = y2;
      }
      body = struct_rec(body, s, fresh);
      switch (e->tag) {
        case Tag::Lam: return lam(y, body);
        case Tag::Where: return where(body, y, bound);
        default: return jwhere(body, y, bound);
      }
    }
    case Tag::Mu: {
      if (e->name == s.k || !occurs_free_cvar(s.k, e->a)) return e;
      std::string m = e->name;
      Expr body = e->a;
      if (m == s.c || in_fvk(s.fvm, m)) {
        std::string m2 = fresh.next();
        StructCtx r{m, m2, nullptr, {}};
        body = struct_rec(body, r, fresh);
        m = m2;
      }
      return mu(m, struct_rec(body, s, fresh));
    }
  }
  return e;
}

}  // namespace

Expr subst_value(const Expr& e, const std::string& x, const Term& v, Fresh& fresh) {
  if (!is_value(v)) throw NonValueSubstitution("substituting non-value " + to_sexpr(v) + " for " + x);
  fresh.avoid(v);
  return subst_rec(e, x, v, free_vars(v), fresh);
}

Expr subst_value(const Expr& e, const std::string& x, const Term& v) {
  Fresh fresh(e);
  return subst_value(e, x, v, fresh);
}

Expr rename_var(const Expr& e, const std::string& x, const std::string& y, Fresh& fresh) {
  if (x == y) return e;
  fresh.avoid(y);
  return subst_rec(e, x, var(y), FreeVars{{y}, {}}, fresh);
}

Expr subst_jump_context(const Expr& e, const std::string& k, const JumpContext& ctx, Fresh& fresh) {
  fresh.avoid(ctx.bound);
  fresh.avoid(ctx.cvar);
  StructCtx s{k, ctx.cvar, &ctx, free_vars(ctx.bound)};
  s.fvm.ordinary.erase(ctx.binder);
  return struct_rec(e, s, fresh);
}

Expr subst_jump_context(const Expr& e, const std::string& k, const JumpContext& ctx) {
  Fresh fresh(e);
  return subst_jump_context(e, k, ctx, fresh);
}

Expr rename_cvar(const Expr& e, const std::string& k, const std::string& l, Fresh& fresh) {
  if (k == l) return e;
  fresh.avoid(l);
  StructCtx s{k, l, nullptr, {}};
  return struct_rec(e, s, fresh);
}

Expr rename_cvar(const Expr& e, const std::string& k, const std::string& l) {
  Fresh fresh(e);
  return rename_cvar(e, k, l, fresh);
}

// ---------------------------------------------------------------- canonical form

namespace {

Expr canon_where(const Term& l, const std::string& x, const Term& m, Fresh& fresh);

Expr canon_jwhere(const Jump& j, const std::string& x, const Term& m, Fresh& fresh) {
  if (j->tag == Tag::Throw) return jmp(j->name, canon_where(j->a, x, m, fresh));
  // <(<J0>y:=N)>x:=M: push the inner let into the jumper first.
  return canon_jwhere(canon_jwhere(j->a, j->name, j->b, fresh), x, m, fresh);
}

Expr canon_where(const Term& l, const std::string& x, const Term& m, Fresh& fresh) {
  if (m->tag == Tag::Where) {
    std::string y = m->name;
    Term m1 = m->a;
    if (y != x && occurs_free(y, l)) {
      std::string y2 = fresh.next();
      m1 = rename_var(m1, y, y2, fresh);
      y = y2;
    }
    return canon_where(canon_where(l, x, m1, fresh), y, m->b, fresh);
  }
  // L x:=μk.[l](A y:=P) with k∉P: the let leaves the μ and joins the chain, so
  // both orders of the first two axioms meet.
  if (m->tag == Tag::Mu && m->a->tag == Tag::Throw && m->a->a->tag == Tag::Where &&
      !occurs_free_cvar(m->name, m->a->a->b)) {
    const Expr& w = m->a->a;
    std::string y = w->name;
    Term a = w->a;
    if (y != x && occurs_free(y, l)) {
      std::string y2 = fresh.next();
      a = rename_var(a, y, y2, fresh);
      y = y2;
    }
    return canon_where(canon_where(l, x, mu(m->name, jmp(m->a->name, a)), fresh), y, w->b, fresh);
  }
  if (l->tag == Tag::Mu) {
    std::string k = l->name;
    Jump j = l->a;
    if (occurs_free_cvar(k, m)) {
      std::string k2 = fresh.next();
      j = rename_cvar(j, k, k2, fresh);
      k = k2;
    }
    return mu(k, canon_jwhere(j, x, m, fresh));
  }
  return where(l, x, m);
}

Expr canon_rec(const Expr& e, Fresh& fresh) {
  switch (e->tag) {
    case Tag::Var: return e;
    case Tag::Lam:
    case Tag::App:
    case Tag::Mu:
    case Tag::Throw:
      return with_children(e, canon_rec(e->a, fresh), e->b ? canon_rec(e->b, fresh) : nullptr);
    case Tag::Where: return canon_where(canon_rec(e->a, fresh), e->name, canon_rec(e->b, fresh), fresh);
    case Tag::JWhere: return canon_jwhere(canon_rec(e->a, fresh), e->name, canon_rec(e->b, fresh), fresh);
  }
  return e;
}

}  // namespace

Expr canonicalize(const Expr& e, Fresh& fresh) {
  fresh.avoid(e);
  return canon_rec(e, fresh);
}

Expr canonicalize(const Expr& e) {
  Fresh fresh(e);
  return canon_rec(e, fresh);
}

bool is_canonical(const Expr& e) {
  switch (e->tag) {
    case Tag::Var: return true;
    case Tag::JWhere: return false;
    case Tag::Where:
      if (e->b->tag == Tag::Where || e->a->tag == Tag::Mu) return false;
      if (e->b->tag == Tag::Mu && e->b->a->tag == Tag::Throw && e->b->a->a->tag == Tag::Where &&
          !occurs_free_cvar(e->b->name, e->b->a->a->b))
        return false;
      return is_canonical(e->a) && is_canonical(e->b);
    default:
      return is_canonical(e->a) && (!e->b || is_canonical(e->b));
  }
}

bool syntactic_equal(const Expr& a, const Expr& b) {
  if (a == b) return true;
  if (!a || !b) return false;
  return a->tag == b->tag && a->name == b->name && syntactic_equal(a->a, b->a) && syntactic_equal(a->b, b->b);
}

bool struct_equal(const Expr& a, const Expr& b) {
  if (is_jump(a) != is_jump(b)) return false;
  return alpha_key(canonicalize(a)) == alpha_key(canonicalize(b));
}

// ---------------------------------------------------------------- paths

Expr subterm_at(const Expr& e, const Path& p) {
  Expr cur = e;
  for (int i : p) {
    Expr next = i == 0 ? cur->a : cur->b;
    if (!next) throw std::out_of_range("path leaves the tree");
    cur = next;
  }
  return cur;
}

namespace {
Expr replace_rec(const Expr& e, const Path& p, std::size_t d, const Expr& repl) {
  if (d == p.size()) return repl;
  if (p[d] == 0) {
    if (!e->a) throw std::out_of_range("path leaves the tree");
    return with_children(e, replace_rec(e->a, p, d + 1, repl), e->b);
  }
  if (!e->b) throw std::out_of_range("path leaves the tree");
  return with_children(e, e->a, replace_rec(e->b, p, d + 1, repl));
}
}  // namespace

Expr replace_at(const Expr& e, const Path& p, const Expr& repl) { return replace_rec(e, p, 0, repl); }

// ---------------------------------------------------------------- binder hygiene

namespace {

Expr uniq_rec(const Expr& e, std::map<std::string, std::string>& mx, std::map<std::string, std::string>& mk,
              std::unordered_set<std::string>& seen, Fresh& fresh) {
  auto bind_name = [&](const std::string& n) {
    std::string out = seen.count(n) ? fresh.next() : n;
    seen.insert(out);
    return out;
  };
  auto lookup = [](std::map<std::string, std::string>& m, const std::string& n) {
    auto it = m.find(n);
    return it == m.end() ? n : it->second;
  };
  switch (e->tag) {
    case Tag::Var: {
      std::string n = lookup(mx, e->name);
      return n == e->name ? e : var(n);
    }
    case Tag::App: return app(uniq_rec(e->a, mx, mk, seen, fresh), uniq_rec(e->b, mx, mk, seen, fresh));
    case Tag::Throw: return jmp(lookup(mk, e->name), uniq_rec(e->a, mx, mk, seen, fresh));
    case Tag::Lam:
    case Tag::Where:
    case Tag::JWhere: {
      Expr bound = e->b ? uniq_rec(e->b, mx, mk, seen, fresh) : nullptr;
      std::string n = bind_name(e->name);
      auto saved = mx.find(e->name) == mx.end() ? std::optional<std::string>() : std::optional(mx[e->name]);
      mx[e->name] = n;
      Expr body = uniq_rec(e->a, mx, mk, seen, fresh);
      if (saved) mx[e->name] = *saved; else mx.erase(e->name);
      if (e->tag == Tag::Lam) return lam(n, body);
      if (e->tag == Tag::Where) return where(body, n, bound);
      return jwhere(body, n, bound);
    }
    case Tag::Mu: {
      std::string n = bind_name(e->name);
      auto saved = mk.find(e->name) == mk.end() ? std::optional<std::string>() : std::optional(mk[e->name]);
      mk[e->name] = n;
      Expr body = uniq_rec(e->a, mx, mk, seen, fresh);
      if (saved) mk[e->name] = *saved; else mk.erase(e->name);
      return mu(n, body);
    }
  }
  return e;
}

}  // namespace

Expr uniquify_binders(const Expr& e, Fresh& fresh) {
  fresh.avoid(e);
  FreeVars fv = free_vars(e);
  std::unordered_set<std::string> seen(fv.ordinary.begin(), fv.ordinary.end());
  seen.insert(fv.continuation.begin(), fv.continuation.end());
  std::map<std::string, std::string> mx, mk;
  return uniq_rec(e, mx, mk, seen, fresh);
}

}  // namespace ccv
