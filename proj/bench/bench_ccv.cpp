#include <benchmark/benchmark.h>

#include "ccv/corpus.hpp"
#include "ccv/cps.hpp"
#include "ccv/gen.hpp"
#include "ccv/machine.hpp"
#include "ccv/rewrite.hpp"
#include "ccv/semtype.hpp"

using namespace ccv;

namespace {

std::vector<Term> sample(std::size_t size) {
  std::vector<Term> out;
  for (std::uint64_t s = 0; s < 64; ++s) out.push_back(canonicalize(gen_term(s, size)));
  return out;
}

void BM_normalize_direct(benchmark::State& st) {
  auto terms = sample(st.range(0));
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(normalize(terms[i++ % terms.size()], 2000));
}

void BM_normalize_via_cps(benchmark::State& st) {
  auto terms = sample(st.range(0));
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(normalize(terms[i++ % terms.size()], 2000, Strategy::ViaCps));
}

void BM_cps(benchmark::State& st) {
  auto terms = sample(st.range(0));
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(cps(terms[i++ % terms.size()]));
}

void BM_evaluate(benchmark::State& st) {
  auto terms = sample(st.range(0));
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(evaluate(embed(terms[i++ % terms.size()]), 2000));
}

void BM_type_via_semantics(benchmark::State& st) {
  auto terms = sample(st.range(0));
  std::size_t i = 0;
  for (auto _ : st) benchmark::DoNotOptimize(type_via_semantics(terms[i++ % terms.size()], 2000));
}

void BM_fixed_point_law(benchmark::State& st) {
  Term yf = parse_term("(app " + y_eta() + " f)");
  Term rhs = parse_term("(lam x (app (app f (app " + y_eta() + " f)) x))");
  for (auto _ : st) benchmark::DoNotOptimize(ccv_equal(yf, rhs, 5000));
}

}  // namespace

BENCHMARK(BM_normalize_direct)->Arg(10)->Arg(20);
BENCHMARK(BM_normalize_via_cps)->Arg(10)->Arg(20);
BENCHMARK(BM_cps)->Arg(10)->Arg(20);
BENCHMARK(BM_evaluate)->Arg(10)->Arg(20);
BENCHMARK(BM_type_via_semantics)->Arg(10)->Arg(20);
BENCHMARK(BM_fixed_point_law);

BENCHMARK_MAIN();
