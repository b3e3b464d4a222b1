#pragma once

#include <array>
#include <cstdint>
#include <span>

#include "trustboot/bytes.hpp"

namespace trustboot {

// Deterministic byte source: SHA-256 in counter mode over a 64-bit seed.
// Every random value in a scenario (keys, nonces, DH secrets, ephemeral
// envelope material) is drawn from one instance so that equal seeds give
// byte-identical transcripts. Not a secure RNG; this is a simulator.
class Rng {
public:
    explicit Rng(uint64_t seed) : seed_(seed) {}

    void fill(std::span<uint8_t> out);
    Bytes bytes(size_t n);

    template <size_t N>
    std::array<uint8_t, N> array() {
        std::array<uint8_t, N> a{};
        fill(a);
        return a;
    }

    uint64_t next_u64();
    // Uniform in [0, bound) via rejection sampling; bound > 0.
    uint64_t below(uint64_t bound);

private:
    void refill();

    uint64_t seed_;
    uint64_t counter_ = 0;
    std::array<uint8_t, 32> block_{};
    size_t used_ = 32;  // forces refill on first use
};

}  // namespace trustboot
