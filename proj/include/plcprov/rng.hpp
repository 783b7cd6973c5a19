#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace plcprov {

uint64_t fnv1a64(std::string_view data);
uint64_t fnv1a64(uint64_t h, std::string_view data);

// splitmix64 finalizer; decorrelates nearby inputs.
uint64_t mix64(uint64_t x);

// Uniform double in [0, 1) from the top 53 bits. Bit-exact everywhere
// because mt19937_64 output is fully specified by the standard.
double unit_interval(std::mt19937_64& engine);

// Approximate standard Gaussian via Irwin-Hall (sum of 12 uniforms - 6),
// which only uses adds and so is bit-exact across platforms. Each
// (seed, key, tick) triple has its own stream; adding a new key never
// perturbs any other stream.
double gauss_draw(uint64_t seed, std::string_view key, uint64_t tick);

}  // namespace plcprov
