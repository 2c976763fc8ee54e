#pragma once

#include <string>

#include "ccv/stypes.hpp"
#include "ccv/ttypes.hpp"

namespace ccv {

// Typing through the CPS: reduce [[m]], type the (head) normal form, expand the
// typing back along the reduction, then read it back to a source derivation of m.
struct SemanticTyping {
  enum class Status { Ok, FuelExhausted, Failed } status = Status::Failed;
  int stage = 0;  // 1 reduce, 2 type normal form, 3 expand, 4 transport, 5 check
  std::string message;
  Judgement judgement;
  SDeriv derivation;
  TDeriv target;  // typing of [[m]]
  std::size_t target_steps = 0;
};

const char* semantic_status_name(SemanticTyping::Status s);

// A β-normal form of [[m]] gives an ω-free typing; with allow_omega the head normal
// form is used when no normal form is reached within fuel.
SemanticTyping type_via_semantics(const Term& m, std::size_t fuel, bool allow_omega = true);

// Source derivation of m from a target derivation of [[m]] (m must be canonical with
// distinct binders, and t_subject the exact cps image used).
SDeriv transport_derivation(const Term& m, const TDeriv& d);

}  // namespace ccv
