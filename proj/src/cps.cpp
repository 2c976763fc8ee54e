#include "ccv/cps.hpp"

#include <deque>
#include <json.hpp>
#include <unordered_map>
#include <unordered_set>

namespace ccv {

// ---------------------------------------------------------------- translation

TExpr value_star(const Term& v, Fresh& fresh) {
  if (v->tag == Tag::Var) return t_wvar(v->name);
  if (v->tag != Tag::Lam) throw SortError("value_star on a non-value");
  std::string k = fresh.next();
  return t_wlam(v->name, t_lamk(k, colon(v->a, t_kvar(k), fresh)));
}

TExpr colon(const Term& m, const TExpr& k, Fresh& fresh) {
  switch (m->tag) {
    case Tag::Var:
    case Tag::Lam: return t_kapp(k, value_star(m, fresh));
    case Tag::App: {
      const Term& f = m->a;
      const Term& a = m->b;
      if (is_value(f) && is_value(a)) return t_tapp(t_wapp(value_star(f, fresh), value_star(a, fresh)), k);
      if (is_value(f)) {
        std::string y = fresh.next();
        return colon(a, t_klam(y, t_tapp(t_wapp(value_star(f, fresh), t_wvar(y)), k)), fresh);
      }
      if (is_value(a)) {
        std::string x = fresh.next();
        return colon(f, t_klam(x, t_tapp(t_wapp(t_wvar(x), value_star(a, fresh)), k)), fresh);
      }
      std::string x = fresh.next();
      std::string y = fresh.next();
      TExpr inner = colon(a, t_klam(y, t_tapp(t_wapp(t_wvar(x), t_wvar(y)), k)), fresh);
      return colon(f, t_klam(x, inner), fresh);
    }
    case Tag::Where: {
      std::string x = m->name;
      Term l = m->a;
      if (t_occurs_w(x, k)) {
        std::string z = fresh.next();
        l = rename_var(l, x, z, fresh);
        x = z;
      }
      return colon(m->b, t_klam(x, colon(l, k, fresh)), fresh);
    }
    case Tag::Mu: return t_tapp(t_lamk(m->name, colon_jump(m->a, fresh)), k);
    default: throw SortError("colon on a jump");
  }
}

TExpr colon_jump(const Jump& j, Fresh& fresh) {
  if (j->tag == Tag::Throw) return colon(j->a, t_kvar(j->name), fresh);
  if (j->tag == Tag::JWhere) return colon(j->b, t_klam(j->name, colon_jump(j->a, fresh)), fresh);
  throw SortError("colon_jump on a term");
}

TExpr cps(const Term& m, Fresh& fresh) {
  fresh.avoid(m);
  Term c = canonicalize(m, fresh);
  std::string k = fresh.next();
  return t_lamk(k, colon(c, t_kvar(k), fresh));
}

TExpr cps(const Term& m) {
  Fresh fresh(m);
  return cps(m, fresh);
}

// ---------------------------------------------------------------- inverse

Jump plug_cont(const TExpr& k, const Term& m) {
  if (k->tag == TTag::KVar) return jmp(k->name, m);
  if (k->tag == TTag::KLam) return jwhere(inverse_jump(k->a), k->name, m);
  throw IllSorted("plug_cont expects sort K");
}

Term inverse_term(const TExpr& t) {
  switch (t->tag) {
    case TTag::TLamK: return mu(t->name, inverse_jump(t->a));
    case TTag::WApp: return app(inverse_term(t->a), inverse_term(t->b));
    case TTag::WVar: return var(t->name);
    case TTag::WLam: return lam(t->name, inverse_term(t->a));
    default: throw IllSorted("inverse_term expects sort T or W");
  }
}

Jump inverse_jump(const TExpr& q) {
  if (q->tag == TTag::KApp) return plug_cont(q->a, inverse_term(q->b));
  if (q->tag == TTag::TApp) return plug_cont(q->b, inverse_term(q->a));
  throw IllSorted("inverse_jump expects sort Q");
}

InverseImage inverse(const TExpr& t) {
  Sort s = sort_of(t);
  switch (s) {
    case Sort::T:
    case Sort::W: return {inverse_term(t), s};
    case Sort::Q: return {inverse_jump(t), s};
    case Sort::K: return {plug_cont(t, var(kHole)), s};
  }
  return {nullptr, s};
}

Expr uncps(const TExpr& t) {
  InverseImage im = inverse(t);
  if (im.sort_origin == Sort::K) throw IllSorted("uncps of a continuation leaves a hole");
  return canonicalize(im.term);
}

// ---------------------------------------------------------------- dagger

namespace {

Expr dagger_rec(const Expr& m, Fresh& fresh) {
  switch (m->tag) {
    case Tag::Var: return m;
    case Tag::App: {
      Term f = dagger_rec(m->a, fresh);
      Term a = dagger_rec(m->b, fresh);
      bool fv = is_value(m->a), av = is_value(m->b);
      if (fv && av) return app(f, a);
      if (fv) {
        std::string y = fresh.next();
        return where(app(f, var(y)), y, a);
      }
      if (av) {
        std::string x = fresh.next();
        return where(app(var(x), a), x, f);
      }
      std::string x = fresh.next();
      std::string y = fresh.next();
      return where(where(app(var(x), var(y)), y, a), x, f);
    }
    default:
      return with_children(m, dagger_rec(m->a, fresh), m->b ? dagger_rec(m->b, fresh) : nullptr);
  }
}

}  // namespace

Term dagger(const Term& m, Fresh& fresh) {
  fresh.avoid(m);
  return canonicalize(dagger_rec(canonicalize(m, fresh), fresh), fresh);
}

Term dagger(const Term& m) {
  Fresh fresh(m);
  return dagger(m, fresh);
}

std::vector<RedexSite> administrative_steps(const Term& m, Expr* end) {
  Fresh fresh(m);
  Expr cur = canonicalize(m, fresh);
  std::vector<RedexSite> out;
  for (;;) {
    std::optional<RedexSite> ad;
    for (const auto& s : redexes(cur))
      if (is_administrative(s.rule)) {
        ad = s;
        break;
      }
    if (!ad) break;
    out.push_back(*ad);
    cur = step_unchecked(cur, *ad, fresh);
  }
  if (end) *end = cur;
  return out;
}

namespace {

void mu_binders(const Expr& e, std::unordered_set<std::string>& out) {
  if (!e) return;
  if (e->tag == Tag::Mu) out.insert(e->name);
  mu_binders(e->a, out);
  mu_binders(e->b, out);
}

}  // namespace

bool vertical_reaches(const Expr& from, const Expr& to, std::size_t state_cap) {
  Fresh fresh(from);
  fresh.avoid(to);
  std::string goal = alpha_key(canonicalize(to));
  Expr start = canonicalize(from, fresh);

  // Cheap attempt first: contract the ημ redexes whose binder the target does not use.
  std::unordered_set<std::string> keep;
  mu_binders(to, keep);
  for (Expr cur = start;;) {
    std::optional<RedexSite> pick;
    for (const auto& s : redexes(cur))
      if (s.rule == Rule::eta_mu && !keep.count(subterm_at(cur, s.path)->name)) {
        pick = s;
        break;
      }
    if (!pick) {
      if (alpha_key(cur) == goal) return true;
      break;
    }
    cur = step_unchecked(cur, *pick, fresh);
  }

  std::deque<Expr> queue{start};
  std::unordered_set<std::string> seen{alpha_key(start)};
  while (!queue.empty()) {
    Expr cur = queue.front();
    queue.pop_front();
    if (alpha_key(cur) == goal) return true;
    for (const auto& s : redexes(cur)) {
      if (s.rule != Rule::eta_mu) continue;
      Expr nx = step_unchecked(cur, s, fresh);
      if (seen.insert(alpha_key(nx)).second) {
        if (seen.size() > state_cap) return false;
        queue.push_back(nx);
      }
    }
  }
  return false;
}

bool replay_certificate(const Expr& start, const std::vector<RedexSite>& steps, const Expr& expected) {
  try {
    Fresh fresh(start);
    fresh.avoid(expected);
    Expr cur = canonicalize(start, fresh);
    for (const auto& s : steps) cur = step(cur, s, fresh);
    return struct_equal(cur, expected);
  } catch (const StaleSite&) {
    return false;
  }
}

// ---------------------------------------------------------------- transport

namespace {

struct SearchNode {
  Expr term;
  int parent;
  std::vector<RedexSite> steps;  // from parent to this node
};

// Practical steps interleaved with vertical normalization, from `from` to a term
// alpha-equal to `goal`.
std::vector<RedexSite> search(const Expr& from, const Expr& goal, std::size_t cap, std::size_t max_depth,
                              Fresh& fresh) {
  std::string gk = alpha_key(goal);
  if (alpha_key(from) == gk) return {};
  std::vector<SearchNode> nodes{{from, -1, {}}};
  std::vector<int> depth{0};
  std::unordered_set<std::string> seen{alpha_key(from)};
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    if (static_cast<std::size_t>(depth[i]) >= max_depth) continue;
    Expr cur = nodes[i].term;
    for (const auto& s : redexes(cur)) {
      if (is_administrative(s.rule)) continue;
      std::vector<RedexSite> path{s};
      Expr nx = step_unchecked(cur, s, fresh);
      std::vector<RedexSite> vsteps;
      nx = vertical_nf(nx, fresh, &vsteps);
      path.insert(path.end(), vsteps.begin(), vsteps.end());
      std::string key = alpha_key(nx);
      if (!seen.insert(key).second) continue;
      nodes.push_back({nx, static_cast<int>(i), path});
      depth.push_back(depth[i] + 1);
      if (key == gk) {
        std::vector<RedexSite> out;
        for (int n = static_cast<int>(nodes.size()) - 1; n > 0; n = nodes[n].parent)
          out.insert(out.begin(), nodes[n].steps.begin(), nodes[n].steps.end());
        return out;
      }
      if (nodes.size() > cap) throw CertificateSearchExhausted("source search exceeded its state budget");
    }
  }
  throw CertificateSearchExhausted("no source reduction found for a target step");
}

}  // namespace

TransportResult complete_transport(const Term& m, const std::vector<TargetStepRef>& target_path, std::size_t fuel) {
  TransportResult out;
  out.target_steps = target_path;
  Fresh fresh(m);
  TExpr t = cps(m, fresh);
  std::vector<TExpr> targets{t};
  for (const auto& st : target_path) {
    std::optional<TExpr> nx;
    try {
      nx = t_contract(targets.back(), st.pos, st.rule, fresh);
    } catch (const std::out_of_range&) {
    }
    if (!nx) throw PathInvalid("target path has no redex at a listed position");
    targets.push_back(*nx);
  }

  Expr cur;
  out.source_steps = administrative_steps(m, &cur);
  fresh.avoid(cur);
  std::vector<RedexSite> vs;
  cur = vertical_nf(cur, fresh, &vs);
  out.source_steps.insert(out.source_steps.end(), vs.begin(), vs.end());

  for (std::size_t i = 1; i < targets.size(); ++i) {
    Expr goal = vertical_nf(uncps(targets[i]), fresh);
    auto seg = search(cur, goal, fuel, 6, fresh);
    for (const auto& s : seg) cur = step_unchecked(cur, s, fresh);
    out.source_steps.insert(out.source_steps.end(), seg.begin(), seg.end());
  }
  out.result = cur;
  out.verified = replay_certificate(m, out.source_steps, cur) &&
                 struct_equal(cur, vertical_nf(uncps(targets.back())));
  return out;
}

std::string transport_json(const TransportResult& r) {
  nlohmann::ordered_json j;
  j["result"] = to_sexpr(r.result);
  j["verified"] = r.verified;
  auto src = nlohmann::ordered_json::array();
  for (const auto& s : r.source_steps) {
    nlohmann::ordered_json e;
    e["rule"] = rule_name(s.rule);
    e["path"] = s.path;
    e["capture_extent"] = s.capture_extent ? nlohmann::ordered_json(*s.capture_extent) : nlohmann::ordered_json();
    src.push_back(e);
  }
  auto tgt = nlohmann::ordered_json::array();
  for (const auto& s : r.target_steps) {
    nlohmann::ordered_json e;
    e["rule"] = t_rule_name(s.rule);
    e["path"] = s.pos;
    tgt.push_back(e);
  }
  j["source_steps"] = src;
  j["target_steps"] = tgt;
  return j.dump();
}

// ---------------------------------------------------------------- normalization via the target

NormalizeOutcome normalize(const Expr& t, std::size_t fuel, Strategy s, bool record) {
  Fresh fresh(t);
  if (s == Strategy::Direct) return normalize_direct(t, fuel, record, fresh);
  Expr c = canonicalize(t, fresh);
  TExpr img;
  if (is_jump(c)) {
    img = colon_jump(c, fresh);
  } else {
    std::string k = fresh.next();
    img = t_lamk(k, colon(c, t_kvar(k), fresh));
  }
  TargetOutcome to = t_normalize(img, fuel);
  NormalizeOutcome out;
  out.steps = to.steps;
  Expr back = canonicalize(is_jump(c) ? inverse_jump(to.term) : inverse_term(to.term), fresh);
  if (to.kind != TargetOutcome::Kind::Normal) {
    out.term = back;
    return out;
  }
  back = vertical_nf(back, fresh);
  NormalizeOutcome rest = normalize_direct(back, fuel > to.steps ? fuel - to.steps : 0, record, fresh);
  rest.steps += out.steps;
  return rest;
}

Equality ccv_equal(const Term& a, const Term& b, std::size_t fuel) {
  // Both sides are reduced in lockstep; a shared reduct proves equality even without
  // normal forms. The leftmost pass decides normalizable pairs, the affine-first pass
  // contracts redexes inside values before they are copied.
  struct Walk {
    TExpr cur;
    Fresh fresh;
    std::unordered_set<std::string> seen;
    bool normal = false;
  };
  const TExpr ta = cps(a), tb = cps(b);
  for (bool affine : {false, true}) {
    Walk wa{ta, {}, {t_alpha_key(ta)}}, wb{tb, {}, {t_alpha_key(tb)}};
    avoid_target(wa.fresh, ta);
    avoid_target(wb.fresh, tb);
    if (wa.seen.count(t_alpha_key(tb))) return Equality::Equal;
    auto advance = [&](Walk& w, const Walk& other) {
      if (w.normal) return false;
      auto s = affine ? t_affine_first_step(w.cur, w.fresh) : t_leftmost_step(w.cur, w.fresh);
      if (!s) {
        w.normal = true;
        return false;
      }
      w.cur = s->result;
      std::string key = t_alpha_key(w.cur);
      w.seen.insert(key);
      return other.seen.count(key) > 0;
    };
    for (std::size_t i = 0; i < fuel && !(wa.normal && wb.normal); ++i)
      if (advance(wa, wb) || advance(wb, wa)) return Equality::Equal;
    if (!affine && wa.normal && wb.normal) return Equality::NotEqual;
  }
  return Equality::Unknown;
}

}  // namespace ccv
