#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "ccv/syntax.hpp"

namespace ccv {

enum class Rule : std::uint8_t { ad1, ad2, beta_lambda, beta_let, beta_mu, beta_jmp, eta_lambda, eta_let, eta_mu };

const char* rule_name(Rule r);
std::optional<Rule> rule_from_name(const std::string& s);
inline bool is_administrative(Rule r) { return r == Rule::ad1 || r == Rule::ad2; }
inline bool is_practical(Rule r) { return !is_administrative(r); }
inline bool is_vertical(Rule r) { return r == Rule::eta_mu; }
inline bool is_eta(Rule r) { return r == Rule::eta_lambda || r == Rule::eta_let || r == Rule::eta_mu; }

// capture_extent is set only for beta_mu. For a let spine <..<<L0>x1:=M1>..>x(n-1):=M(n-1)
// around <E>xn:=μk.J it counts the captured lets: n-1 is full capture of the term context,
// smaller values leave an outer part of the spine outside μ, and n marks the derived jump
// rule taken at the enclosing jumper [l].
struct RedexSite {
  Path path;
  Rule rule;
  std::optional<int> capture_extent;

  bool operator==(const RedexSite&) const = default;
};

class StaleSite : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Sites of a canonical term or jump, preorder, rules in enum order at each node,
// beta_mu extents from largest to smallest.
std::vector<RedexSite> redexes(const Expr& t);

// Contracts a site of canonical t; result is canonical.
Expr step(const Expr& t, const RedexSite& site);
Expr step(const Expr& t, const RedexSite& site, Fresh& fresh);
// As step but without re-validating the site (caller got it from redexes(t)).
Expr step_unchecked(const Expr& t, const RedexSite& site, Fresh& fresh);

Expr vertical_nf(const Expr& t);
Expr vertical_nf(const Expr& t, Fresh& fresh, std::vector<RedexSite>* steps = nullptr);

bool is_quasi_normal(const Expr& t);
bool is_normal(const Expr& t);

// Leftmost-outermost, non-η rules first.
std::optional<RedexSite> choose_direct(const std::vector<RedexSite>& sites);

struct TraceRecord {
  std::size_t step;
  RedexSite site;
  Expr term;
};
std::string trace_line(const TraceRecord& r);

enum class Strategy { Direct, ViaCps };

struct NormalizeOutcome {
  bool normal = false;  // false means fuel ran out
  Expr term;
  std::size_t steps = 0;
  std::vector<TraceRecord> trace;
};

NormalizeOutcome normalize(const Expr& t, std::size_t fuel, Strategy s = Strategy::Direct, bool record = false);
NormalizeOutcome normalize_direct(const Expr& t, std::size_t fuel, bool record, Fresh& fresh);

enum class Equality { Equal, NotEqual, Unknown };
const char* equality_name(Equality e);
Equality ccv_equal(const Term& a, const Term& b, std::size_t fuel);

}  // namespace ccv
