#include <benchmark/benchmark.h>

#include <string>

#include "sqlfuzz/features.hpp"
#include "sqlfuzz/lexer.hpp"
#include "sqlfuzz/models.hpp"
#include "sqlfuzz/mutations.hpp"
#include "sqlfuzz/rng.hpp"

namespace {

const std::string kPayload =
    "SELECT name, pw FROM users WHERE name='admin' OR 1=1 /*x*/ AND pw LIKE 'a%' -- tail";

void BM_Lex(benchmark::State& state) {
    for (auto _ : state) benchmark::DoNotOptimize(sqlfuzz::lex(kPayload));
    state.SetBytesProcessed(state.iterations() * kPayload.size());
}
BENCHMARK(BM_Lex);

void BM_TokenHistogram(benchmark::State& state) {
    auto vocab = sqlfuzz::TokenVocabulary::standard();
    for (auto _ : state)
        benchmark::DoNotOptimize(sqlfuzz::extract_token_histogram(kPayload, vocab));
}
BENCHMARK(BM_TokenHistogram);

void BM_GraphFeatures(benchmark::State& state) {
    auto vocab = sqlfuzz::TokenVocabulary::standard();
    sqlfuzz::GraphVariant v{sqlfuzz::Directedness::Directed,
                            sqlfuzz::Weighting::Proportional};
    for (auto _ : state)
        benchmark::DoNotOptimize(sqlfuzz::extract_graph(kPayload, v, vocab));
}
BENCHMARK(BM_GraphFeatures);

void BM_RandomMutation(benchmark::State& state) {
    sqlfuzz::Rng rng(1);
    for (auto _ : state)
        benchmark::DoNotOptimize(sqlfuzz::random_mutation(kPayload, rng));
}
BENCHMARK(BM_RandomMutation);

void BM_StubClassify(benchmark::State& state) {
    auto model = sqlfuzz::make_stub("stub:lenparity");
    for (auto _ : state) benchmark::DoNotOptimize(model->classify(kPayload));
}
BENCHMARK(BM_StubClassify);

}  // namespace

BENCHMARK_MAIN();
