#include "ccv/sexpr.hpp"

#include <cctype>

namespace ccv {

namespace {

struct Reader {
  const std::string& s;
  std::size_t i = 0;

  void skip() {
    while (i < s.size()) {
      if (std::isspace(static_cast<unsigned char>(s[i]))) {
        ++i;
      } else if (s[i] == ';') {
        while (i < s.size() && s[i] != '\n') ++i;
      } else {
        break;
      }
    }
  }

  Sexp read() {
    skip();
    if (i >= s.size()) throw ParseError("unexpected end of input");
    if (s[i] == ')') throw ParseError("unexpected ')' at offset " + std::to_string(i));
    if (s[i] == '(') {
      ++i;
      Sexp out;
      for (;;) {
        skip();
        if (i >= s.size()) throw ParseError("missing ')'");
        if (s[i] == ')') {
          ++i;
          return out;
        }
        out.items.push_back(read());
      }
    }
    std::size_t start = i;
    while (i < s.size() && s[i] != '(' && s[i] != ')' && s[i] != ';' &&
           !std::isspace(static_cast<unsigned char>(s[i])))
      ++i;
    Sexp out;
    out.is_atom = true;
    out.atom = s.substr(start, i - start);
    return out;
  }
};

}  // namespace

Sexp read_sexp(const std::string& text) {
  Reader r{text};
  Sexp out = r.read();
  r.skip();
  if (r.i != text.size()) throw ParseError("trailing input at offset " + std::to_string(r.i));
  return out;
}

std::string show_sexp(const Sexp& s) {
  if (s.is_atom) return s.atom;
  std::string out = "(";
  for (std::size_t k = 0; k < s.items.size(); ++k) {
    if (k) out += ' ';
    out += show_sexp(s.items[k]);
  }
  return out + ")";
}

}  // namespace ccv
