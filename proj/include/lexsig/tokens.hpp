#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace lexsig {

using Token = std::string;
using TokenSeq = std::vector<Token>;

// Stable 16-hex-digit id of a token sequence (FNV-1a 64 over tokens, each
// terminated by a 0x1f unit separator). Used as `context_id` in score files.
std::string context_id(std::span<const Token> tokens);

std::string join_tokens(std::span<const Token> tokens, std::string_view sep = " ");

// Whitespace tokenization.
TokenSeq split_tokens(std::string_view line);

bool starts_with(std::string_view token, std::string_view prefix);

// Uniform integer in [0, n) from raw mt19937_64 output by rejection, so
// sampled indices are identical across standard library implementations.
std::uint64_t uniform_index(std::mt19937_64& rng, std::uint64_t n);

// Partial Fisher-Yates: the first k entries of the result are a uniform
// sample without replacement from [0, n).
std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t k, std::uint64_t seed);

// Full deterministic permutation of [0, n).
std::vector<std::size_t> shuffled_indices(std::size_t n, std::uint64_t seed);

}  // namespace lexsig
