#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace ccv {

class ParseError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

struct Sexp {
  bool is_atom = false;
  std::string atom;
  std::vector<Sexp> items;

  bool is_list() const { return !is_atom; }
  bool head_is(const char* h) const {
    return !is_atom && !items.empty() && items[0].is_atom && items[0].atom == h;
  }
};

// Reads exactly one S-expression; trailing non-space input is an error.
Sexp read_sexp(const std::string& text);
std::string show_sexp(const Sexp& s);

}  // namespace ccv
