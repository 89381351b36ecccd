#include <benchmark/benchmark.h>

#include <random>
#include <string>

#include "editodds/quality.hpp"

namespace {

std::u32string random_text(std::mt19937_64& rng, int len) {
    static const std::u32string alphabet = U"abcdefgh éü漢字";
    std::uniform_int_distribution<size_t> pick(0, alphabet.size() - 1);
    std::u32string out;
    out.reserve(static_cast<size_t>(len));
    for (int i = 0; i < len; ++i) out.push_back(alphabet[pick(rng)]);
    return out;
}

void bm_levenshtein_random(benchmark::State& state) {
    std::mt19937_64 rng(1);
    const int len = static_cast<int>(state.range(0));
    const std::u32string a = random_text(rng, len);
    const std::u32string b = random_text(rng, len);
    for (auto _ : state) {
        benchmark::DoNotOptimize(editodds::levenshtein(a, b));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_levenshtein_random)->Range(8, 2048)->Complexity(benchmark::oNSquared);

// Edits usually touch a small region; the common-prefix/suffix trim should
// make the cost scale with the changed span, not the document.
void bm_levenshtein_local_edit(benchmark::State& state) {
    std::mt19937_64 rng(2);
    const int len = static_cast<int>(state.range(0));
    const std::u32string base = random_text(rng, len);
    std::u32string edited = base;
    edited.insert(edited.size() / 2, U"patch");
    for (auto _ : state) {
        benchmark::DoNotOptimize(editodds::levenshtein(base, edited));
    }
    state.SetComplexityN(state.range(0));
}
BENCHMARK(bm_levenshtein_local_edit)->Range(8, 65536)->Complexity(benchmark::oN);

void bm_decode_utf8(benchmark::State& state) {
    std::mt19937_64 rng(3);
    const std::u32string text = random_text(rng, static_cast<int>(state.range(0)));
    std::string utf8;
    for (char32_t cp : text) {
        if (cp < 0x80) {
            utf8.push_back(static_cast<char>(cp));
        } else {
            utf8 += "\xC3\xA9";  // é, any multi-byte stand-in
        }
    }
    for (auto _ : state) {
        benchmark::DoNotOptimize(editodds::decode_utf8(utf8));
    }
}
BENCHMARK(bm_decode_utf8)->Range(64, 65536);

}  // namespace

BENCHMARK_MAIN();
