#include "ccv/corpus.hpp"

#include <json.hpp>

#include "ccv/machine.hpp"
#include "ccv/rewrite.hpp"
#include "ccv/stypes.hpp"

namespace ccv {

namespace {

const char* const kDEta = "(lam x (lam w (app (app f (lam v (app (app x x) v))) w)))";
const char* const kDPlain = "(lam x (app f (app x x)))";

std::string multitask(const std::string& m, const std::string& q, const std::string& r, const std::string& n) {
  // [τ̂] M ▷^q_r N as μd.[tau]<M>q:=λr.μd.[tau]N
  return "(mu d (jmp tau (bind " + m + " " + q + " (lam " + r + " (mu d (jmp tau " + n + "))))))";
}

std::string felleisen_c(const std::string& q) {
  return "(mu k (jmp tau (app " + q + " (lam x (mu d (jmp k x))))))";
}

nlohmann::ordered_json verdict(const std::string& check, const std::string& result) {
  nlohmann::ordered_json j;
  j["check"] = check;
  j["result"] = result;
  return j;
}

}  // namespace

std::string y_combinator(const std::string& d_body) {
  return "(lam f (lam z (app (app " + d_body + " " + d_body + ") z)))";
}
std::string y_eta() { return y_combinator(kDEta); }
std::string y_plain() { return y_combinator(kDPlain); }

const std::vector<CorpusEntry>& corpus() {
  static const std::vector<CorpusEntry> entries = {
      {"identity-chain", "(app (lam x x) (app y y))", "normalizes by ad2 beta_lambda beta_let eta_let to (app y y)"},
      {"fixed-point", "(app " + y_eta() + " F)",
       "YF equals (lam x (app (app F (app Y F)) x)) and equals Y(lam y (lam x (app (app F y) x)))"},
      {"multitasking", multitask("(bind (app a q) q " + felleisen_c("q") + ")", "q", "r", "(app b r)"),
       "evaluation halts at an E-normal form equal to the switched configuration"},
      {"y-terminating", "(app (app " + y_eta() + " f) z)",
       "evaluation halts at an E-normal form equal to f(λv.D_f D_f v)z"},
      {"y-divergent", "(app (app " + y_plain() + " f) z)", "evaluation exhausts fuel with growing terms"},
      {"callcc", "(mu k (jmp k (app m (lam x (mu d (jmp k x))))))",
       "m:(a→℧)→b gives type b∪a in both the full and the restricted system"},
  };
  return entries;
}

std::optional<CorpusEntry> corpus_entry(const std::string& name) {
  for (const auto& e : corpus())
    if (e.name == name) return e;
  return std::nullopt;
}

CorpusReport replay(const CorpusEntry& e, std::size_t fuel) {
  CorpusReport rep;
  Term m = parse_term(e.source);
  auto eq_line = [&](const std::string& check, const Term& a, const Term& b) {
    Equality r = ccv_equal(a, b, fuel);
    rep.lines.push_back(verdict(check, equality_name(r)).dump());
    return r == Equality::Equal;
  };
  auto run_machine = [&](std::size_t f) {
    EvalOutcome o = evaluate(raw_from(m), f, true);
    for (std::size_t i = 0; i < o.trace.size(); ++i) rep.lines.push_back(machine_trace_line(i + 1, o.trace[i]));
    rep.lines.push_back(verdict("outcome", outcome_name(o.kind)).dump());
    return o;
  };

  if (e.name == "identity-chain") {
    auto n = normalize(m, fuel, Strategy::Direct, true);
    std::vector<std::string> rules;
    for (const auto& r : n.trace) {
      rep.lines.push_back(trace_line(r));
      rules.push_back(rule_name(r.site.rule));
    }
    rep.ok = n.normal && rules == std::vector<std::string>{"ad2", "beta_lambda", "beta_let", "eta_let"} &&
             alpha_equal(n.term, parse_term("(app y y)"));
  } else if (e.name == "fixed-point") {
    std::string y = y_eta();
    bool a = eq_line("fixed-point law", m,
                     parse_term("(lam x0 (app (app F (app " + y + " F)) x0))"));
    bool b = eq_line("stability law", m,
                     parse_term("(app " + y + " (lam y0 (lam x0 (app (app F y0) x0))))"));
    rep.ok = a && b;
  } else if (e.name == "multitasking") {
    EvalOutcome o = run_machine(fuel);
    Term switched = parse_term(multitask("(app b r)", "r", "q", "(app a q)"));
    bool eq = eq_line("switched", project(o.term), switched);
    rep.ok = terminates(o) && eq;
  } else if (e.name == "y-terminating") {
    EvalOutcome o = run_machine(fuel);
    std::string d = kDEta;
    Term expect = parse_term("(app (app f (lam v (app (app " + d + " " + d + ") v))) z)");
    bool eq = eq_line("E-normal form", project(o.term), expect);
    rep.ok = terminates(o) && is_e_normal(o.term) && eq;
  } else if (e.name == "y-divergent") {
    EvalOutcome o = evaluate(raw_from(m), fuel, true);
    std::size_t n = o.trace.size();
    std::vector<std::size_t> sizes;
    for (std::size_t at : {n / 3, 2 * n / 3, n}) {
      if (at == 0) continue;
      std::size_t s = size(project(o.trace[at - 1].term));
      sizes.push_back(s);
      nlohmann::ordered_json j;
      j["step"] = at;
      j["size"] = s;
      rep.lines.push_back(j.dump());
    }
    rep.lines.push_back(verdict("outcome", outcome_name(o.kind)).dump());
    rep.ok = o.kind == EvalOutcome::Kind::FuelExhausted && sizes.size() == 3 && sizes[0] < sizes[1] &&
             sizes[1] < sizes[2];
  } else if (e.name == "callcc") {
    SEnv gamma{{"m", s_parse("(arr (arr (atom a) (cup)) (atom b))")}};
    Budget b;
    b.cup_width = 2;
    SPtr goal = s_parse("(cup (atom b) (atom a))");
    auto d = derive_bounded(gamma, m, goal, {}, b);
    bool ok = d.has_value();
    if (d) {
      rep.lines.push_back(sderiv_json(*d));
      auto full = check_derivation(*d, CheckMode::Full);
      auto restricted = check_derivation(*d, CheckMode::Restricted);
      rep.lines.push_back(verdict("full", full.ok ? "ok" : full.message).dump());
      rep.lines.push_back(verdict("restricted", restricted.ok ? "ok" : restricted.message).dump());
      ok = full.ok && restricted.ok;
    }
    rep.lines.push_back(verdict("derivation", d ? "found" : "not found").dump());
    rep.ok = ok;
  }
  return rep;
}

}  // namespace ccv
