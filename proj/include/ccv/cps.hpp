#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "ccv/rewrite.hpp"
#include "ccv/syntax.hpp"
#include "ccv/target.hpp"

namespace ccv {

// [[M]] = λk.⌜M⌝[k]; the input is canonicalized first (μ hoisted outermost).
TExpr cps(const Term& m);
TExpr cps(const Term& m, Fresh& fresh);
TExpr colon(const Term& m, const TExpr& k, Fresh& fresh);
TExpr colon_jump(const Jump& j, Fresh& fresh);
TExpr value_star(const Term& v, Fresh& fresh);

// Name used for the hole of a K-sort inverse image.
inline const char* kHole = "□";

struct InverseImage {
  Expr term;  // for sort K a jump containing the hole variable once
  Sort sort_origin;
};

InverseImage inverse(const TExpr& t);
Term inverse_term(const TExpr& t);  // sort T or W
Jump inverse_jump(const TExpr& q);  // sort Q
// Fills the hole of K⁻¹ with m.
Jump plug_cont(const TExpr& k, const Term& m);
// canonicalize(inverse(t)) for sort T/W/Q inputs.
Expr uncps(const TExpr& t);

Term dagger(const Term& m);
Term dagger(const Term& m, Fresh& fresh);

// Exhaustive leftmost ad1/ad2 contraction; *end receives the reached term.
std::vector<RedexSite> administrative_steps(const Term& m, Expr* end);

// Breadth-first search over eta_mu steps from `from` for a term struct_equal to `to`.
bool vertical_reaches(const Expr& from, const Expr& to, std::size_t state_cap = 2000);

// Replays steps with step() (which validates each site) and compares the end point.
bool replay_certificate(const Expr& start, const std::vector<RedexSite>& steps, const Expr& expected);

struct TargetStepRef {
  Path pos;
  TRule rule;
};

class PathInvalid : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};
class CertificateSearchExhausted : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct TransportResult {
  Term result;                       // vertical_nf(inverse(N))
  std::vector<RedexSite> source_steps;
  std::vector<TargetStepRef> target_steps;
  bool verified = false;             // certificate replayed successfully
};

TransportResult complete_transport(const Term& m, const std::vector<TargetStepRef>& target_path,
                                   std::size_t fuel = 1000);
std::string transport_json(const TransportResult& r);

}  // namespace ccv
