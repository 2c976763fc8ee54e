#include "ccv/machine.hpp"

#include <json.hpp>

namespace ccv {

namespace {

Expr push_jlets(const Expr& e);

// <J>x:=M with J already in jumper form becomes [k](<L>x:=M).
Expr jlet(const Expr& j, const std::string& x, const Expr& m) {
  return jmp(j->name, where(j->a, x, m));
}

Expr push_jlets(const Expr& e) {
  switch (e->tag) {
    case Tag::Var: return e;
    case Tag::JWhere: return jlet(push_jlets(e->a), e->name, push_jlets(e->b));
    default: return with_children(e, push_jlets(e->a), e->b ? push_jlets(e->b) : nullptr);
  }
}

}  // namespace

RawTerm raw_from(const Expr& e) { return {push_jlets(e)}; }
RawTerm embed(const Expr& t) { return {canonicalize(t)}; }
Expr project(const RawTerm& r) { return canonicalize(r.e); }

Expr plug(const EvalContext& ctx, const Expr& focus) {
  Expr cur = focus;
  for (std::size_t i = ctx.size(); i-- > 0;) {
    const Frame& f = ctx[i];
    switch (f.kind) {
      case FrameKind::ValueFn: cur = app(f.other, cur); break;
      case FrameKind::ArgPending: cur = app(cur, f.other); break;
      case FrameKind::LetBound: cur = where(f.other, f.name, cur); break;
    }
  }
  return cur;
}

Decomposition decompose(const RawTerm& t) {
  if (is_jump(t.e)) throw SortError("decompose expects a term");
  Decomposition d;
  Expr cur = t.e;
  for (;;) {
    if (cur->tag == Tag::App) {
      if (is_value(cur->a) && !is_value(cur->b)) {
        d.ctx.push_back({FrameKind::ValueFn, cur->a, ""});
        cur = cur->b;
      } else {
        d.ctx.push_back({FrameKind::ArgPending, cur->b, ""});
        cur = cur->a;
      }
    } else if (cur->tag == Tag::Where) {
      d.ctx.push_back({FrameKind::LetBound, cur->a, cur->name});
      cur = cur->b;
    } else {
      d.focus = cur;
      return d;
    }
  }
}

namespace {

struct Hit {
  std::string rule;
  Expr term;
};

std::optional<Hit> e0(const Expr& t, Fresh& fresh) {
  switch (t->tag) {
    case Tag::App: {
      const Expr& f = t->a;
      const Expr& a = t->b;
      if (f->tag == Tag::Mu) {
        std::string z = fresh.next();
        return Hit{"ad1", where(app(var(z), a), z, f)};
      }
      if (!is_value(f)) {
        auto h = e0(f, fresh);
        if (h) h->term = app(h->term, a);
        return h;
      }
      if (a->tag == Tag::Mu) {
        std::string z = fresh.next();
        return Hit{"ad2", where(app(f, var(z)), z, a)};
      }
      if (!is_value(a)) {
        auto h = e0(a, fresh);
        if (h) h->term = app(f, h->term);
        return h;
      }
      if (f->tag == Tag::Lam) return Hit{"beta_lambda", where(f->a, f->name, a)};
      return std::nullopt;  // xV stalls
    }
    case Tag::Where: {
      const Expr& b = t->b;
      if (is_value(b)) return Hit{"beta_let", subst_value(t->a, t->name, b, fresh)};
      if (b->tag == Tag::Mu) {
        std::string k = b->name;
        Expr j = b->a;
        if (occurs_free_cvar(k, t->a)) {
          std::string k2 = fresh.next();
          j = rename_cvar(j, k, k2, fresh);
          k = k2;
        }
        return Hit{"beta_mu", mu(k, subst_jump_context(j, k, JumpContext{k, t->name, t->a}, fresh))};
      }
      auto h = e0(b, fresh);
      if (h) h->term = where(t->a, t->name, h->term);
      return h;
    }
    default: return std::nullopt;
  }
}

}  // namespace

std::optional<MachineStep> e0_step(const RawTerm& t, Fresh& fresh) {
  fresh.avoid(t.e);
  auto h = e0(t.e, fresh);
  if (!h) return std::nullopt;
  return MachineStep{h->rule, {h->term}};
}

std::optional<MachineStep> e0_step(const RawTerm& t) {
  Fresh fresh(t.e);
  return e0_step(t, fresh);
}

std::optional<MachineStep> e_step(const RawTerm& t, Fresh& fresh) {
  const Expr& e = t.e;
  if (e->tag == Tag::Mu && e->a->tag == Tag::Throw) {
    const Expr& l = e->a;
    if (l->a->tag == Tag::Mu) {
      fresh.avoid(e);
      const Expr& m = l->a;
      return MachineStep{"beta_jmp", {mu(e->name, rename_cvar(m->a, m->name, l->name, fresh))}};
    }
    auto s = e0_step({l->a}, fresh);
    if (!s) return std::nullopt;
    return MachineStep{s->rule, {mu(e->name, jmp(l->name, s->term.e))}};
  }
  return e0_step(t, fresh);
}

std::optional<MachineStep> e_step(const RawTerm& t) {
  Fresh fresh(t.e);
  return e_step(t, fresh);
}

const char* outcome_name(EvalOutcome::Kind k) {
  switch (k) {
    case EvalOutcome::Kind::Finished: return "Finished";
    case EvalOutcome::Kind::Stalled: return "Stalled";
    case EvalOutcome::Kind::FuelExhausted: return "FuelExhausted";
  }
  return "?";
}

EvalOutcome evaluate(const RawTerm& t, std::size_t fuel, bool record) {
  Fresh fresh(t.e);
  EvalOutcome out{EvalOutcome::Kind::FuelExhausted, t, 0, {}};
  RawTerm cur = raw_from(t.e);
  for (;;) {
    auto s = e_step(cur, fresh);
    if (!s) {
      const Expr& e = cur.e;
      bool fin = is_value(e) || (e->tag == Tag::Mu && e->a->tag == Tag::Throw && is_value(e->a->a));
      out.kind = fin ? EvalOutcome::Kind::Finished : EvalOutcome::Kind::Stalled;
      out.term = cur;
      return out;
    }
    if (out.steps >= fuel) {
      out.term = cur;
      return out;
    }
    cur = s->term;
    ++out.steps;
    if (record) out.trace.push_back(std::move(*s));
  }
}

bool terminates(const EvalOutcome& o) { return o.kind != EvalOutcome::Kind::FuelExhausted; }

bool is_e_normal(const RawTerm& t) { return !e_step(t).has_value(); }

std::string machine_trace_line(std::size_t step, const MachineStep& s) {
  nlohmann::ordered_json j;
  j["step"] = step;
  j["rule"] = s.rule;
  j["term"] = to_sexpr(project(s.term));
  return j.dump();
}

}  // namespace ccv
