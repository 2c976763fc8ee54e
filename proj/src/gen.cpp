#include "ccv/gen.hpp"

#include <array>

namespace ccv {

double unit_draw(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t index_draw(std::mt19937_64& rng, std::size_t n) {
  return static_cast<std::size_t>(unit_draw(rng) * static_cast<double>(n)) % n;
}

namespace {

const std::array<const char*, 3> kFreeVars{"a", "b", "c"};
const char* const kFreeCvar = "q";

// Shape counts: t[n] terms and j[n] jumps of n nodes (ct: c[n] terms).
struct Counts {
  std::vector<long double> t, j, c;

  explicit Counts(std::size_t n) : t(n + 1, 0), j(n + 1, 0), c(n + 1, 0) {
    for (std::size_t s = 1; s <= n; ++s) {
      if (s == 1) {
        t[s] = c[s] = 1;
        continue;
      }
      long double pairs = 0, cpairs = 0;
      for (std::size_t i = 1; i + 1 < s; ++i) {
        pairs += t[i] * t[s - 1 - i];
        cpairs += c[i] * c[s - 1 - i];
      }
      j[s] = t[s - 1];
      t[s] = t[s - 1] + 2 * pairs + j[s - 1];
      c[s] = 3 * c[s - 1] + 2 * cpairs;
    }
  }
};

struct Gen {
  std::mt19937_64 rng;
  Counts counts;
  std::vector<std::string> xs, ks;
  std::size_t next_x = 0, next_k = 0;

  Gen(std::uint64_t seed, std::size_t n) : rng(seed), counts(n) {}

  std::string pick_var() {
    std::size_t i = index_draw(rng, xs.size() + kFreeVars.size());
    return i < xs.size() ? xs[i] : kFreeVars[i - xs.size()];
  }
  std::string pick_cvar() {
    std::size_t i = index_draw(rng, ks.size() + 1);
    return i < ks.size() ? ks[i] : kFreeCvar;
  }

  // Splits s-1 nodes into two children proportionally to the shape counts.
  std::size_t split(std::size_t s, const std::vector<long double>& cnt) {
    long double total = 0;
    for (std::size_t i = 1; i + 1 < s; ++i) total += cnt[i] * cnt[s - 1 - i];
    long double r = unit_draw(rng) * total;
    for (std::size_t i = 1; i + 1 < s; ++i) {
      r -= cnt[i] * cnt[s - 1 - i];
      if (r < 0) return i;
    }
    return s - 2;
  }

  Term term(std::size_t s) {
    if (s == 1) return var(pick_var());
    long double pairs = 0;
    for (std::size_t i = 1; i + 1 < s; ++i) pairs += counts.t[i] * counts.t[s - 1 - i];
    long double r = unit_draw(rng) * counts.t[s];
    if ((r -= counts.t[s - 1]) < 0) {
      std::string x = "x" + std::to_string(next_x++);
      xs.push_back(x);
      Term body = term(s - 1);
      xs.pop_back();
      return lam(x, body);
    }
    if ((r -= pairs) < 0) {
      std::size_t i = split(s, counts.t);
      Term f = term(i);
      return app(f, term(s - 1 - i));
    }
    if ((r -= pairs) < 0) {
      std::size_t i = split(s, counts.t);
      Term bound = term(s - 1 - i);
      std::string x = "x" + std::to_string(next_x++);
      xs.push_back(x);
      Term body = term(i);
      xs.pop_back();
      return where(body, x, bound);
    }
    std::string k = "k" + std::to_string(next_k++);
    ks.push_back(k);
    std::string target = pick_cvar();
    Term inner = term(s - 2);
    ks.pop_back();
    return mu(k, jmp(target, inner));
  }

  CtTerm ct(std::size_t s) {
    if (s == 1) return ct_var(pick_var());
    long double pairs = 0;
    for (std::size_t i = 1; i + 1 < s; ++i) pairs += counts.c[i] * counts.c[s - 1 - i];
    long double r = unit_draw(rng) * counts.c[s];
    if ((r -= counts.c[s - 1]) < 0) {
      std::string x = "x" + std::to_string(next_x++);
      xs.push_back(x);
      CtTerm body = ct(s - 1);
      xs.pop_back();
      return ct_lam(x, body);
    }
    if ((r -= pairs) < 0) {
      std::size_t i = split(s, counts.c);
      CtTerm f = ct(i);
      return ct_app(f, ct(s - 1 - i));
    }
    if ((r -= pairs) < 0) {
      std::size_t i = split(s, counts.c);
      CtTerm bound = ct(s - 1 - i);
      std::string x = "x" + std::to_string(next_x++);
      xs.push_back(x);
      CtTerm body = ct(i);
      xs.pop_back();
      return ct_where(body, x, bound);
    }
    if ((r -= counts.c[s - 1]) < 0) {
      std::string k = "k" + std::to_string(next_k++);
      ks.push_back(k);
      CtTerm body = ct(s - 1);
      ks.pop_back();
      return ct_catch(k, body);
    }
    std::string target = pick_cvar();
    return ct_throw(target, ct(s - 1));
  }
};

}  // namespace

Term gen_term(std::uint64_t seed, std::size_t size) {
  Gen g(seed, size < 1 ? 1 : size);
  return g.term(size < 1 ? 1 : size);
}

CtTerm gen_ct(std::uint64_t seed, std::size_t size) {
  Gen g(seed, size < 1 ? 1 : size);
  return g.ct(size < 1 ? 1 : size);
}

}  // namespace ccv
