#include "ccv/semtype.hpp"

#include "ccv/cps.hpp"

namespace ccv {

const char* semantic_status_name(SemanticTyping::Status s) {
  switch (s) {
    case SemanticTyping::Status::Ok: return "Ok";
    case SemanticTyping::Status::FuelExhausted: return "FuelExhausted";
    case SemanticTyping::Status::Failed: return "Failed";
  }
  return "?";
}

namespace {

class TransportError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

const TDeriv& peel(const TDeriv& d) {
  const TDeriv* cur = &d;
  while (cur->rule.rfind("sub_", 0) == 0) cur = &cur->premises.at(0);
  return *cur;
}

const TDeriv& expect(const TDeriv& d, const char* rule) {
  const TDeriv& n = peel(d);
  if (n.rule != rule) throw TransportError(std::string("expected a ") + rule + " node, found " + n.rule);
  return n;
}

// A source derivation of M at ⋃ᵢκᵢ⁻¹ where κᵢ are the types given to the continuation.
struct Piece {
  SDeriv d;
  std::vector<const TDeriv*> ks;
};

SPtr union_of(const std::vector<const TDeriv*>& ks) {
  std::vector<SPtr> xs;
  for (auto* k : ks) xs.push_back(uncps_type(k->type));
  return s_cup(std::move(xs));
}

Piece finish(SDeriv d, std::vector<const TDeriv*> ks) {
  SPtr u = union_of(ks);
  return {sd_sub(std::move(d), u), std::move(ks)};
}

SDeriv with_binder(SDeriv d, SPtr b) {
  d.binder = std::move(b);
  return d;
}

Piece trans(const Term& m, const TDeriv& dq);
SDeriv trans_jump(const Jump& j, const TDeriv& dq);

SDeriv term_of(const Term& m, const TDeriv& dt) {
  const TDeriv& n = expect(dt, "lamk");
  Piece p = trans(m, n.premises.at(0));
  return sd_sub(std::move(p.d), uncps_type(dt.type));
}

SDeriv value_of(const Term& v, const TDeriv& dw) {
  SPtr want = uncps_type(dw.type);
  if (v->tag == Tag::Var) return sd_node("var", v, want);
  const TDeriv& n = expect(dw, "wlam");
  SPtr dom = uncps_type(n.type->a);
  SDeriv body = term_of(v->a, n.premises.at(0));
  SPtr arrow = s_arrow(dom, body.type);
  SDeriv l = sd_node("lam", v, s_cap({arrow}), {with_binder(std::move(body), dom)});
  return sd_sub(std::move(l), want);
}

SDeriv value_at(const Term& v, const TDeriv& app, std::size_t from) {
  std::vector<SDeriv> parts;
  for (std::size_t i = from; i < app.premises.size(); ++i) parts.push_back(value_of(v, app.premises[i]));
  return value_intersection(v, parts);
}

// The (x W) K tail of a continuation λy.(x W)K or λy.(W y)K: returns the wapp node and collects K typings.
const TDeriv& tail(const TDeriv& kd, std::vector<const TDeriv*>& ks) {
  const TDeriv& kl = expect(kd, "klam");
  const TDeriv& q = kl.premises.at(0);
  if (q.rule != "tapp") throw TransportError("continuation body is not an application to K");
  for (std::size_t i = 1; i < q.premises.size(); ++i) ks.push_back(&q.premises[i]);
  return expect(q.premises.at(0), "wapp");
}

Piece trans(const Term& m, const TDeriv& dq) {
  switch (m->tag) {
    case Tag::Var:
    case Tag::Lam: {
      if (dq.rule != "kapp") throw TransportError("value clause expects K W");
      return finish(value_at(m, dq, 1), {&dq.premises.at(0)});
    }
    case Tag::App: {
      const Term& f = m->a;
      const Term& a = m->b;
      if (is_value(f) && is_value(a)) {
        if (dq.rule != "tapp") throw TransportError("application clause expects T K");
        std::vector<const TDeriv*> ks;
        for (std::size_t i = 1; i < dq.premises.size(); ++i) ks.push_back(&dq.premises[i]);
        const TDeriv& w = expect(dq.premises.at(0), "wapp");
        SDeriv fd = value_of(f, w.premises.at(0));
        SDeriv ad = value_at(a, w, 1);
        SDeriv ap = sd_node("app", m, uncps_type(w.type), {std::move(fd), std::move(ad)});
        return finish(std::move(ap), std::move(ks));
      }
      if (is_value(f)) {
        Piece inner = trans(a, dq);
        std::vector<const TDeriv*> ks;
        std::vector<const TDeriv*> fns;
        for (auto* kd : inner.ks) fns.push_back(&tail(*kd, ks).premises.at(0));
        SPtr u = union_of(ks);
        std::vector<SDeriv> parts;
        for (std::size_t i = 0; i < fns.size(); ++i)
          parts.push_back(sd_sub(value_of(f, *fns[i]), s_arrow(uncps_type(inner.ks[i]->type), u)));
        SDeriv fd = value_intersection(f, parts);
        SDeriv ap = sd_node("app", m, u, {std::move(fd), std::move(inner.d)});
        return finish(std::move(ap), std::move(ks));
      }
      if (is_value(a)) {
        Piece inner = trans(f, dq);
        std::vector<const TDeriv*> ks;
        std::vector<const TDeriv*> ws;
        for (auto* kd : inner.ks) ws.push_back(&tail(*kd, ks));
        SPtr u = union_of(ks);
        std::vector<SPtr> comps;
        std::vector<SDeriv> args;
        for (auto* w : ws) {
          SPtr dom = uncps_type(w->premises.at(0).type->a);
          comps.push_back(s_cap({s_arrow(dom, u)}));
          args.push_back(value_at(a, *w, 1));
        }
        std::vector<SDeriv> ps{sd_sub(std::move(inner.d), s_cup(comps))};
        for (auto& x : args) ps.push_back(std::move(x));
        return finish(sd_node("app", m, u, std::move(ps)), std::move(ks));
      }
      Piece outer = trans(f, dq);
      std::vector<const TDeriv*> ks;
      std::vector<Piece> inners;
      for (auto* kd : outer.ks) {
        const TDeriv& kl = expect(*kd, "klam");
        inners.push_back(trans(a, kl.premises.at(0)));
      }
      for (auto& in : inners)
        for (auto* kd : in.ks) tail(*kd, ks);
      SPtr u = union_of(ks);
      std::vector<SPtr> comps;
      for (auto& in : inners) {
        std::vector<SPtr> arrows;
        for (auto* kd : in.ks) arrows.push_back(s_arrow(uncps_type(kd->type), u));
        comps.push_back(s_cap(arrows));
      }
      std::vector<SDeriv> ps{sd_sub(std::move(outer.d), s_cup(comps))};
      for (auto& in : inners) ps.push_back(std::move(in.d));
      return finish(sd_node("app", m, u, std::move(ps)), std::move(ks));
    }
    case Tag::Where: {
      Piece inner = trans(m->b, dq);
      std::vector<const TDeriv*> ks;
      std::vector<Piece> bodies;
      for (auto* kd : inner.ks) {
        const TDeriv& kl = expect(*kd, "klam");
        if (kl.subject->name != m->name) throw TransportError("let binder was renamed by the translation");
        bodies.push_back(trans(m->a, kl.premises.at(0)));
        for (auto* k : bodies.back().ks) ks.push_back(k);
      }
      SPtr u = union_of(ks);
      std::vector<SDeriv> ps;
      for (std::size_t i = 0; i < bodies.size(); ++i)
        ps.push_back(with_binder(sd_sub(std::move(bodies[i].d), u), uncps_type(inner.ks[i]->type)));
      ps.push_back(std::move(inner.d));
      return finish(sd_node("let", m, u, std::move(ps)), std::move(ks));
    }
    case Tag::Mu: {
      if (dq.rule != "tapp") throw TransportError("mu clause expects T K");
      std::vector<const TDeriv*> ks;
      for (std::size_t i = 1; i < dq.premises.size(); ++i) ks.push_back(&dq.premises[i]);
      const TDeriv& lk = expect(dq.premises.at(0), "lamk");
      SPtr u = union_of(ks);
      SDeriv j = trans_jump(m->a, lk.premises.at(0));
      return finish(sd_node("mu", m, u, {std::move(j)}), std::move(ks));
    }
    default: throw TransportError("jump in term position");
  }
}

SDeriv trans_jump(const Jump& j, const TDeriv& dq) {
  if (j->tag == Tag::Throw) {
    Piece p = trans(j->a, dq);
    return sd_node("jmp", j, s_bot(), {std::move(p.d)});
  }
  Piece inner = trans(j->b, dq);
  std::vector<SDeriv> ps;
  for (auto* kd : inner.ks) {
    const TDeriv& kl = expect(*kd, "klam");
    ps.push_back(with_binder(trans_jump(j->a, kl.premises.at(0)), uncps_type(kd->type)));
  }
  ps.push_back(std::move(inner.d));
  return sd_node("jlet", j, s_bot(), std::move(ps));
}

// Copies a derivation onto a term of the same shape (binder names may differ).
SDeriv resubject(const SDeriv& d, const Expr& e) {
  if (d.subject->tag != e->tag) throw TransportError("renamed term has a different shape");
  SDeriv out = d;
  out.subject = e;
  const std::string& r = d.rule;
  for (std::size_t i = 0; i < d.premises.size(); ++i) {
    Expr c;
    if (r == "sub") c = e;
    else if (r == "app") c = i == 0 ? e->a : e->b;
    else if (r == "let" || r == "jlet") c = i + 1 == d.premises.size() ? e->b : e->a;
    else c = e->a;
    out.premises[i] = resubject(d.premises[i], c);
  }
  return out;
}

}  // namespace

SDeriv transport_derivation(const Term& m, const TDeriv& d) {
  SEnv gamma, delta;
  for (auto& [x, t] : d.pi) gamma[x] = uncps_type(t);
  for (auto& [k, t] : d.theta) delta[k] = uncps_type(t);
  SDeriv out = term_of(m, d);
  assign_envs(out, gamma, delta);
  return out;
}

SemanticTyping type_via_semantics(const Term& m, std::size_t fuel, bool allow_omega) {
  SemanticTyping r;
  Term m0 = canonicalize(m);
  Fresh fresh(m0);
  Term mu = uniquify_binders(m0, fresh);
  TExpr img = cps(mu, fresh);

  std::vector<TStep> trace;
  TExpr nf;
  bool head = false;
  auto o = t_normalize_beta(img, fuel, true);
  if (o.kind == TargetOutcome::Kind::Normal) {
    nf = o.term;
    trace = std::move(o.trace);
  } else if (allow_omega) {
    // No normal form in reach: a head normal form still gives a typing, with ω inside.
    auto s = solvable(img, fuel, true);
    if (!s.solvable) {
      r.status = SemanticTyping::Status::FuelExhausted;
      r.stage = 1;
      r.message = "no head normal form within fuel";
      return r;
    }
    nf = s.term;
    trace = std::move(s.trace);
    head = true;
  } else {
    r.status = SemanticTyping::Status::FuelExhausted;
    r.stage = 1;
    r.message = "no beta normal form within fuel";
    return r;
  }
  r.target_steps = trace.size();
  try {
    r.stage = 2;
    TDeriv d = t_infer_normal(nf, head);
    r.stage = 3;
    for (std::size_t i = trace.size(); i-- > 0;) {
      const TExpr& before = i == 0 ? img : trace[i - 1].result;
      d = t_subject_expand(d, before, trace[i].pos);
    }
    r.target = d;
    r.stage = 4;
    SDeriv sd = transport_derivation(mu, d);
    sd = resubject(sd, m0);
    SEnv gamma = sd.gamma, delta = sd.delta;
    assign_envs(sd, gamma, delta);
    r.stage = 5;
    CheckResult c = check_derivation(sd, CheckMode::Full);
    if (!c.ok) {
      r.message = "derivation rejected at " + c.rule + ": " + c.message;
      return r;
    }
    r.status = SemanticTyping::Status::Ok;
    r.judgement = {sd.gamma, sd.delta, m0, sd.type};
    r.derivation = std::move(sd);
  } catch (const std::exception& ex) {
    r.status = SemanticTyping::Status::Failed;
    r.message = ex.what();
  }
  return r;
}

}  // namespace ccv
