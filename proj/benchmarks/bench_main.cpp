#include <benchmark/benchmark.h>

#include "ipwkit/design.hpp"
#include "ipwkit/estimator.hpp"
#include "ipwkit/propensity.hpp"
#include "ipwkit/synth.hpp"

namespace {

ipwkit::ImputedCorpus make_corpus(std::size_t n, int k) {
  const auto data = ipwkit::generate(ipwkit::GeneratorConfig::null_config(n, k), 7);
  std::vector<std::string> scheme;
  for (int t = 0; t < k; ++t) scheme.push_back("T" + std::to_string(t + 1));
  return ipwkit::impute_missing(ipwkit::resolve_multilabel(data.corpus, scheme, 7));
}

void BM_FitMultinomial(benchmark::State& state) {
  const auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)),
                                  static_cast<int>(state.range(1)));
  const auto design = ipwkit::expand_interactions(ipwkit::standardize(corpus));
  for (auto _ : state) {
    auto p = ipwkit::estimate_propensities(design, corpus.labeled.labels,
                                           corpus.labeled.num_treatments());
    benchmark::DoNotOptimize(p.scores.data());
  }
}
BENCHMARK(BM_FitMultinomial)->Args({2000, 3})->Args({10000, 5})->Unit(benchmark::kMillisecond);

void BM_IpwEstimates(benchmark::State& state) {
  const auto corpus = make_corpus(static_cast<std::size_t>(state.range(0)), 4);
  const auto design = ipwkit::expand_interactions(ipwkit::standardize(corpus));
  const auto p = ipwkit::clip_scores(
      ipwkit::estimate_propensities(design, corpus.labeled.labels, 4));
  const auto y = corpus.outcome();
  for (auto _ : state) {
    const auto w = ipwkit::ipw_weights(p, corpus.labeled.labels);
    auto est = ipwkit::ipw_estimates(y, w, corpus.labeled.labels, 4);
    benchmark::DoNotOptimize(est.categories.data());
  }
}
BENCHMARK(BM_IpwEstimates)->Arg(10000)->Arg(100000);

}  // namespace
BENCHMARK_MAIN();
