#include "ccv/rewrite.hpp"

#include <json.hpp>

namespace ccv {

const char* rule_name(Rule r) {
  switch (r) {
    case Rule::ad1: return "ad1";
    case Rule::ad2: return "ad2";
    case Rule::beta_lambda: return "beta_lambda";
    case Rule::beta_let: return "beta_let";
    case Rule::beta_mu: return "beta_mu";
    case Rule::beta_jmp: return "beta_jmp";
    case Rule::eta_lambda: return "eta_lambda";
    case Rule::eta_let: return "eta_let";
    case Rule::eta_mu: return "eta_mu";
  }
  return "?";
}

std::optional<Rule> rule_from_name(const std::string& s) {
  for (int i = 0; i <= static_cast<int>(Rule::eta_mu); ++i)
    if (s == rule_name(static_cast<Rule>(i))) return static_cast<Rule>(i);
  return std::nullopt;
}

namespace {

// Let spine of a Where body: frames[0] is the outermost let.
struct Spine {
  Term base;  // L0
  std::vector<std::pair<std::string, Term>> frames;
};

Spine spine_of(const Term& body) {
  Spine s;
  std::vector<std::pair<std::string, Term>> rev;
  Term cur = body;
  while (cur->tag == Tag::Where) {
    rev.emplace_back(cur->name, cur->b);
    cur = cur->a;
  }
  s.base = cur;
  s.frames = std::move(rev);
  return s;
}

// Rebuild lets frames[from..] (innermost first order reversed) around base.
// frames are outermost first; the spine body E_j uses frames[size-j .. size-1].
Term wrap(Term base, const std::vector<std::pair<std::string, Term>>& frames, std::size_t outer_begin,
          std::size_t outer_end) {
  // frames[outer_begin..outer_end) are applied, innermost (largest index) first
  for (std::size_t i = outer_end; i-- > outer_begin;) base = where(base, frames[i].first, frames[i].second);
  return base;
}

// For e = Where(E, xn, μk.J) with E having n-1 lets, the valid extents.
std::vector<int> mu_extents(const Expr& e) {
  Spine sp = spine_of(e->a);
  int m = static_cast<int>(sp.frames.size());  // n-1
  std::vector<int> out{m};
  // Lets in source order: x_1 innermost ... x_m outermost; x_{m+1} = e->name.
  // frames[i] holds x_{m-i}.
  auto xname = [&](int j) { return j == m + 1 ? e->name : sp.frames[m - j].first; };
  auto mval = [&](int j) { return sp.frames[m - j].second; };
  for (int ext = m - 1; ext >= 0; --ext) {
    int d = m - ext;  // 1..m
    // E_{d-1}: base wrapped with x_1..x_{d-1}
    Term ed1 = sp.base;
    for (int j = 1; j <= d - 1; ++j) ed1 = where(ed1, xname(j), mval(j));
    bool ok = true;
    for (int j = d + 1; j <= m + 1 && ok; ++j) {
      const std::string& xj = xname(j);
      if (xj == xname(d) || occurs_free(xj, ed1)) ok = false;
    }
    if (ok) out.push_back(ext);
  }
  return out;
}

bool eta_let_adjacent(const Expr& e) {
  // <<A>x1:=y>y:=N
  const Expr& in = e->a;
  if (in->tag != Tag::Where || in->b->tag != Tag::Var || in->b->name != e->name) return false;
  return in->name == e->name || !occurs_free(e->name, in->a);
}

void sites_at(const Expr& e, const Path& p, std::vector<RedexSite>& out) {
  switch (e->tag) {
    case Tag::Var:
    case Tag::JWhere: return;
    case Tag::App:
      if (!is_value(e->a)) out.push_back({p, Rule::ad1, std::nullopt});
      else if (!is_value(e->b)) out.push_back({p, Rule::ad2, std::nullopt});
      else if (e->a->tag == Tag::Lam) out.push_back({p, Rule::beta_lambda, std::nullopt});
      return;
    case Tag::Where:
      if (is_value(e->b)) out.push_back({p, Rule::beta_let, std::nullopt});
      if (e->b->tag == Tag::Mu)
        for (int ext : mu_extents(e)) out.push_back({p, Rule::beta_mu, ext});
      if ((e->a->tag == Tag::Var && e->a->name == e->name) || eta_let_adjacent(e))
        out.push_back({p, Rule::eta_let, std::nullopt});
      return;
    case Tag::Throw: {
      const Expr& b = e->a;
      if (b->tag == Tag::Where && b->b->tag == Tag::Mu)
        out.push_back({p, Rule::beta_mu, static_cast<int>(spine_of(b->a).frames.size()) + 1});
      if (b->tag == Tag::Mu) out.push_back({p, Rule::beta_jmp, std::nullopt});
      return;
    }
    case Tag::Lam: {
      const Expr& b = e->a;
      if (b->tag == Tag::App && is_value(b->a) && b->b->tag == Tag::Var && b->b->name == e->name &&
          !occurs_free(e->name, b->a))
        out.push_back({p, Rule::eta_lambda, std::nullopt});
      return;
    }
    case Tag::Mu: {
      const Expr& b = e->a;
      if (b->tag == Tag::Throw && b->name == e->name && !occurs_free_cvar(e->name, b->a))
        out.push_back({p, Rule::eta_mu, std::nullopt});
      return;
    }
  }
}

void collect(const Expr& e, Path& p, std::vector<RedexSite>& out) {
  sites_at(e, p, out);
  if (e->a) {
    p.push_back(0);
    collect(e->a, p, out);
    p.pop_back();
  }
  if (e->b) {
    p.push_back(1);
    collect(e->b, p, out);
    p.pop_back();
  }
}

// μk.J{[k]□ ↦ [k]<bound>x:=□}, renaming k away from the frame.
Term capture(const std::string& k, const Jump& j, const std::string& x, const Term& bound, Fresh& fresh) {
  std::string kk = k;
  Jump body = j;
  if (occurs_free_cvar(k, bound)) {
    kk = fresh.next();
    body = rename_cvar(body, k, kk, fresh);
  }
  return mu(kk, subst_jump_context(body, kk, JumpContext{kk, x, bound}, fresh));
}

Expr contract(const Expr& e, const RedexSite& site, Fresh& fresh) {
  switch (site.rule) {
    case Rule::ad1: {
      std::string z = fresh.next();
      return where(app(var(z), e->b), z, e->a);
    }
    case Rule::ad2: {
      std::string z = fresh.next();
      return where(app(e->a, var(z)), z, e->b);
    }
    case Rule::beta_lambda: return where(e->a->a, e->a->name, e->b);
    case Rule::beta_let: return subst_value(e->a, e->name, e->b, fresh);
    case Rule::beta_jmp: return rename_cvar(e->a->a, e->a->name, e->name, fresh);
    case Rule::eta_lambda: return e->a->a;
    case Rule::eta_let:
      if (e->a->tag == Tag::Var) return e->b;
      return where(e->a->a, e->a->name, e->b);
    case Rule::eta_mu: return e->a->a;
    case Rule::beta_mu: {
      int ext = *site.capture_extent;
      if (e->tag == Tag::Throw) {
        const Expr& w = e->a;
        const Expr& m = w->b;
        return subst_jump_context(m->a, m->name, JumpContext{e->name, w->name, w->a}, fresh);
      }
      const Expr& m = e->b;
      Spine sp = spine_of(e->a);
      int mm = static_cast<int>(sp.frames.size());
      if (ext == mm) return capture(m->name, m->a, e->name, e->a, fresh);
      int d = mm - ext;
      // frames[i] holds x_{mm-i}; x_j lives at index mm-j.
      Term ed1 = wrap(sp.base, sp.frames, static_cast<std::size_t>(mm - d + 1), sp.frames.size());
      Term b = sp.frames[mm - d].second;
      b = wrap(b, sp.frames, 0, static_cast<std::size_t>(mm - d));
      Term inner = capture(m->name, m->a, e->name, b, fresh);
      return where(ed1, sp.frames[mm - d].first, inner);
    }
  }
  return e;
}

bool b_class(const Expr& e);
bool m_class(const Expr& e);

bool v_class(const Expr& e) { return e->tag == Tag::Var || (e->tag == Tag::Lam && m_class(e->a)); }
bool n_class(const Expr& e) { return e->tag == Tag::App && e->a->tag == Tag::Var && v_class(e->b); }
bool b_class(const Expr& e) {
  if (e->tag == Tag::Where) return b_class(e->a) && n_class(e->b);
  return v_class(e) || n_class(e);
}
bool h_class(const Expr& e) { return e->tag == Tag::Throw && b_class(e->a); }
bool m_class(const Expr& e) { return (e->tag == Tag::Mu && h_class(e->a)) || b_class(e); }

}  // namespace

std::vector<RedexSite> redexes(const Expr& t) {
  std::vector<RedexSite> out;
  Path p;
  collect(t, p, out);
  return out;
}

Expr step_unchecked(const Expr& t, const RedexSite& site, Fresh& fresh) {
  fresh.avoid(t);
  Expr e = subterm_at(t, site.path);
  return canonicalize(replace_at(t, site.path, contract(e, site, fresh)), fresh);
}

Expr step(const Expr& t, const RedexSite& site, Fresh& fresh) {
  bool found = false;
  for (const auto& s : redexes(t))
    if (s == site) found = true;
  if (!found) throw StaleSite(std::string("no ") + rule_name(site.rule) + " redex at the given path");
  return step_unchecked(t, site, fresh);
}

Expr step(const Expr& t, const RedexSite& site) {
  Fresh fresh(t);
  return step(t, site, fresh);
}

Expr vertical_nf(const Expr& t, Fresh& fresh, std::vector<RedexSite>* steps) {
  fresh.avoid(t);
  Expr cur = canonicalize(t, fresh);
  for (;;) {
    std::optional<RedexSite> v;
    for (const auto& s : redexes(cur))
      if (s.rule == Rule::eta_mu) {
        v = s;
        break;
      }
    if (!v) return cur;
    if (steps) steps->push_back(*v);
    cur = step_unchecked(cur, *v, fresh);
  }
}

Expr vertical_nf(const Expr& t) {
  Fresh fresh(t);
  return vertical_nf(t, fresh);
}

bool is_quasi_normal(const Expr& t) { return is_jump(t) ? h_class(t) : m_class(t); }

bool is_normal(const Expr& t) { return is_quasi_normal(t) && redexes(t).empty(); }

std::optional<RedexSite> choose_direct(const std::vector<RedexSite>& sites) {
  for (const auto& s : sites)
    if (!is_eta(s.rule)) return s;
  if (!sites.empty()) return sites.front();
  return std::nullopt;
}

std::string trace_line(const TraceRecord& r) {
  nlohmann::ordered_json j;
  j["step"] = r.step;
  j["rule"] = rule_name(r.site.rule);
  j["path"] = r.site.path;
  if (r.site.capture_extent)
    j["capture_extent"] = *r.site.capture_extent;
  else
    j["capture_extent"] = nullptr;
  j["term"] = to_sexpr(r.term);
  return j.dump();
}

const char* equality_name(Equality e) {
  switch (e) {
    case Equality::Equal: return "Equal";
    case Equality::NotEqual: return "NotEqual";
    case Equality::Unknown: return "Unknown";
  }
  return "?";
}

NormalizeOutcome normalize_direct(const Expr& t, std::size_t fuel, bool record, Fresh& fresh) {
  NormalizeOutcome out;
  Expr cur = canonicalize(t, fresh);
  for (;;) {
    auto site = choose_direct(redexes(cur));
    if (!site) {
      out.normal = true;
      out.term = cur;
      return out;
    }
    if (out.steps >= fuel) {
      out.term = cur;
      return out;
    }
    cur = step_unchecked(cur, *site, fresh);
    ++out.steps;
    if (record) out.trace.push_back({out.steps, *site, cur});
  }
}

}  // namespace ccv
