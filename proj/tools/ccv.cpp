#include <CLI11.hpp>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <iterator>
#include <json.hpp>
#include <sstream>

#include "ccv/corpus.hpp"
#include "ccv/cps.hpp"
#include "ccv/ct.hpp"
#include "ccv/gen.hpp"
#include "ccv/machine.hpp"
#include "ccv/semtype.hpp"
#include "ccv/sexpr.hpp"
#include "ccv/stypes.hpp"

using namespace ccv;

namespace {

constexpr int kOk = 0;
constexpr int kUnknown = 1;
constexpr int kInputError = 2;

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::size_t default_fuel() {
  if (const char* env = std::getenv("CCV_DEFAULT_FUEL")) {
    try {
      return std::stoul(env);
    } catch (const std::exception&) {
      throw InputError(std::string("CCV_DEFAULT_FUEL is not a number: ") + env);
    }
  }
  return 10000;
}

std::string read_input(const std::string& arg) {
  if (!arg.empty() && arg != "-") return arg;
  return std::string(std::istreambuf_iterator<char>(std::cin), {});
}

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot read " + path);
  return std::string(std::istreambuf_iterator<char>(in), {});
}

struct TraceSink {
  std::ofstream out;
  explicit TraceSink(const std::string& path) {
    if (path.empty()) return;
    out.open(path);
    if (!out) throw InputError("cannot write " + path);
  }
  bool on() const { return out.is_open(); }
  void line(const std::string& s) {
    if (on()) out << s << "\n";
  }
};

Budget parse_budget(const std::string& text) {
  Budget b;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    auto eq = item.find('=');
    if (eq == std::string::npos) throw InputError("budget entry without '=': " + item);
    std::string key = item.substr(0, eq);
    int v = 0;
    try {
      v = std::stoi(item.substr(eq + 1));
    } catch (const std::exception&) {
      throw InputError("budget value is not a number: " + item);
    }
    if (v < 0) throw InputError("negative budget: " + item);
    if (key == "atoms") b.atoms = v;
    else if (key == "depth") b.depth = v;
    else if (key == "width") b.cap_width = b.cup_width = v;
    else if (key == "steps") b.steps = static_cast<std::size_t>(v);
    else throw InputError("unknown budget key " + key);
  }
  return b;
}

std::string env_pretty(const SEnv& e) {
  std::string out;
  for (const auto& [n, t] : e) out += (out.empty() ? "" : ", ") + n + ":" + s_to_pretty(t);
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"CCV lambda-mu toolkit"};
  app.require_subcommand(1);
  std::size_t fuel = 0;
  std::string input, trace_path;

  auto add_term = [&](CLI::App* c, const char* what = "S-expression (default: stdin)") {
    c->add_option("input", input, what);
  };
  auto add_fuel = [&](CLI::App* c) { c->add_option("--fuel", fuel, "step bound (default CCV_DEFAULT_FUEL or 10000)"); };

  auto* parse = app.add_subcommand("parse", "parse and print a term or jump");
  add_term(parse);
  bool pretty = false;
  parse->add_flag("--pretty", pretty, "also print the <L>x:=M notation");

  auto* norm = app.add_subcommand("normalize", "normal form by the rewrite rules");
  add_term(norm);
  add_fuel(norm);
  std::string via = "direct";
  norm->add_option("--via", via, "direct or cps")->check(CLI::IsMember({"direct", "cps"}));
  norm->add_option("--trace", trace_path, "JSON lines of the rewrite steps");

  auto* eval = app.add_subcommand("eval", "call-by-value evaluation");
  add_term(eval);
  add_fuel(eval);
  bool raw = false;
  eval->add_flag("--raw", raw, "keep the input bracketing instead of the canonical one");
  eval->add_option("--trace", trace_path, "JSON lines of the machine steps");

  auto* cpsc = app.add_subcommand("cps", "CPS image of a term");
  add_term(cpsc);

  auto* uncpsc = app.add_subcommand("uncps", "inverse CPS of a target term");
  add_term(uncpsc, "target S-expression (default: stdin)");

  auto* equal = app.add_subcommand("equal", "decide =ccv between two terms");
  std::string lhs, rhs;
  equal->add_option("lhs", lhs)->required();
  equal->add_option("rhs", rhs)->required();
  add_fuel(equal);

  auto* typecheck = app.add_subcommand("typecheck", "check a typing derivation");
  std::string deriv_path, mode = "full";
  typecheck->add_option("--derivation", deriv_path, "derivation JSON file")->required();
  typecheck->add_option("--mode", mode, "full or restricted")->check(CLI::IsMember({"full", "restricted"}));

  auto* infer = app.add_subcommand("infer", "find a typing");
  add_term(infer);
  add_fuel(infer);
  std::string budget_text, infer_via;
  bool no_omega = false;
  infer->add_option("--budget", budget_text, "atoms=A,depth=D,width=W");
  infer->add_option("--via", infer_via, "semantics")->check(CLI::IsMember({"semantics"}));
  infer->add_flag("--no-omega", no_omega, "with --via semantics: require a normal form");

  auto* ct2mu = app.add_subcommand("ct2mu", "catch/throw term to CCV lambda-mu");
  add_term(ct2mu);
  auto* mu2ct = app.add_subcommand("mu2ct", "CCV lambda-mu expression to catch/throw");
  add_term(mu2ct);
  auto* cteval = app.add_subcommand("ct-eval", "normal form of a catch/throw term");
  add_term(cteval);
  add_fuel(cteval);

  auto* gen = app.add_subcommand("gen", "random term");
  std::uint64_t seed = 0;
  std::size_t gsize = 1;
  bool gen_ct_flag = false;
  gen->add_option("--seed", seed);
  gen->add_option("--size", gsize)->check(CLI::PositiveNumber);
  gen->add_flag("--ct", gen_ct_flag, "catch/throw term");

  auto* corp = app.add_subcommand("corpus", "replay a stored example");
  std::string cname;
  bool list = false;
  corp->add_option("--name", cname);
  corp->add_flag("--list", list);
  add_fuel(corp);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kInputError;
  }

  try {
    if (fuel == 0) fuel = default_fuel();

    if (*parse) {
      Expr e = parse_expr(read_input(input));
      std::cout << to_sexpr(e) << "\n";
      if (pretty) std::cout << to_pretty(e) << "\n";
      return kOk;
    }
    if (*norm) {
      Expr e = parse_expr(read_input(input));
      TraceSink sink(trace_path);
      auto out = normalize(e, fuel, via == "cps" ? Strategy::ViaCps : Strategy::Direct, sink.on());
      for (const auto& r : out.trace) sink.line(trace_line(r));
      std::cout << to_sexpr(out.term) << "\n";
      if (!out.normal) {
        std::cout << "FuelExhausted\n";
        return kUnknown;
      }
      return kOk;
    }
    if (*eval) {
      Expr e = parse_expr(read_input(input));
      TraceSink sink(trace_path);
      auto out = evaluate(raw ? raw_from(e) : embed(e), fuel, sink.on());
      for (std::size_t i = 0; i < out.trace.size(); ++i) sink.line(machine_trace_line(i + 1, out.trace[i]));
      std::cout << outcome_name(out.kind) << " " << to_sexpr(project(out.term)) << "\n";
      return out.kind == EvalOutcome::Kind::FuelExhausted ? kUnknown : kOk;
    }
    if (*cpsc) {
      std::cout << t_to_sexpr(cps(parse_term(read_input(input)))) << "\n";
      return kOk;
    }
    if (*uncpsc) {
      TExpr t = t_parse(read_input(input));
      if (sort_of(t) == Sort::K) throw InputError("uncps needs a T, W or Q term");
      std::cout << to_sexpr(uncps(t)) << "\n";
      return kOk;
    }
    if (*equal) {
      Equality r = ccv_equal(parse_term(lhs), parse_term(rhs), fuel);
      std::cout << equality_name(r) << "\n";
      return r == Equality::Unknown ? kUnknown : kOk;
    }
    if (*typecheck) {
      SDeriv d = sderiv_from_json(read_file(deriv_path));
      auto r = check_derivation(d, mode == "full" ? CheckMode::Full : CheckMode::Restricted);
      if (r.ok) {
        std::cout << "ok\n";
        return kOk;
      }
      nlohmann::json pos = r.position;
      std::cout << "invalid at " << pos.dump() << " (" << r.rule << "): " << r.message << "\n";
      return kInputError;
    }
    if (*infer) {
      Term m = parse_term(read_input(input));
      if (infer_via == "semantics") {
        auto r = type_via_semantics(m, fuel, !no_omega);
        if (r.status != SemanticTyping::Status::Ok) {
          std::cout << semantic_status_name(r.status) << " at stage " << r.stage << ": " << r.message << "\n";
          return r.status == SemanticTyping::Status::FuelExhausted ? kUnknown : kInputError;
        }
        std::cout << env_pretty(r.judgement.gamma) << " ⊢ " << to_pretty(m) << " : "
                  << s_to_pretty(r.judgement.type) << " | " << env_pretty(r.judgement.delta) << "\n";
        std::cout << sderiv_json(r.derivation) << "\n";
        return kOk;
      }
      Budget b = budget_text.empty() ? Budget{} : parse_budget(budget_text);
      auto r = infer_bounded(m, b);
      if (!r) {
        std::cout << "Unknown: no typing within the budget\n";
        return kUnknown;
      }
      std::cout << env_pretty(r->judgement.gamma) << " ⊢ " << to_pretty(m) << " : "
                << s_to_pretty(r->judgement.type) << " | " << env_pretty(r->judgement.delta) << "\n";
      std::cout << sderiv_json(r->derivation) << "\n";
      return kOk;
    }
    if (*ct2mu) {
      std::cout << to_sexpr(ct_to_mu(ct_parse(read_input(input)))) << "\n";
      return kOk;
    }
    if (*mu2ct) {
      std::cout << ct_to_sexpr(mu_inverse(parse_expr(read_input(input)))) << "\n";
      return kOk;
    }
    if (*cteval) {
      auto r = ct_normalize(ct_parse(read_input(input)), fuel);
      std::cout << ct_to_sexpr(r.term) << "\n";
      if (!r.normal) {
        std::cout << "FuelExhausted\n";
        return kUnknown;
      }
      return kOk;
    }
    if (*gen) {
      std::cout << (gen_ct_flag ? ct_to_sexpr(gen_ct(seed, gsize)) : to_sexpr(gen_term(seed, gsize))) << "\n";
      return kOk;
    }
    if (*corp) {
      if (list) {
        for (const auto& e : corpus()) std::cout << e.name << "\t" << e.expected << "\n";
        return kOk;
      }
      auto e = corpus_entry(cname);
      if (!e) throw InputError("no corpus entry named '" + cname + "'");
      auto rep = replay(*e, fuel);
      for (const auto& l : rep.lines) std::cout << l << "\n";
      return rep.ok ? kOk : kUnknown;
    }
  } catch (const InputError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  } catch (const ParseError& e) {
    std::cerr << "parse error: " << e.what() << "\n";
    return kInputError;
  } catch (const SortError& e) {
    std::cerr << "sort error: " << e.what() << "\n";
    return kInputError;
  } catch (const CategoryMismatch& e) {
    std::cerr << "type error: " << e.what() << "\n";
    return kInputError;
  } catch (const nlohmann::json::exception& e) {
    std::cerr << "bad JSON: " << e.what() << "\n";
    return kInputError;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kInputError;
  }
  return kInputError;
}
