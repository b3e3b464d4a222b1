#include "trustboot/rng.hpp"

#include <openssl/evp.h>

#include <cstring>
#include <stdexcept>

namespace trustboot {

void Rng::refill() {
    uint8_t input[16];
    for (int i = 0; i < 8; ++i) {
        input[i] = static_cast<uint8_t>(seed_ >> (56 - 8 * i));
        input[8 + i] = static_cast<uint8_t>(counter_ >> (56 - 8 * i));
    }
    unsigned int len = 0;
    if (EVP_Digest(input, sizeof input, block_.data(), &len, EVP_sha256(), nullptr) != 1 ||
        len != block_.size()) {
        throw std::runtime_error("rng: digest failed");
    }
    ++counter_;
    used_ = 0;
}

void Rng::fill(std::span<uint8_t> out) {
    size_t done = 0;
    while (done < out.size()) {
        if (used_ == block_.size()) refill();
        size_t take = std::min(out.size() - done, block_.size() - used_);
        std::memcpy(out.data() + done, block_.data() + used_, take);
        used_ += take;
        done += take;
    }
}

Bytes Rng::bytes(size_t n) {
    Bytes out(n);
    fill(out);
    return out;
}

uint64_t Rng::next_u64() {
    uint8_t b[8];
    fill(b);
    uint64_t v = 0;
    for (int i = 0; i < 8; ++i) v = v << 8 | b[i];
    return v;
}

uint64_t Rng::below(uint64_t bound) {
    // Rejection sampling over the largest multiple of bound below 2^64.
    uint64_t limit = UINT64_MAX - UINT64_MAX % bound;
    for (;;) {
        uint64_t v = next_u64();
        if (v < limit) return v % bound;
    }
}

}  // namespace trustboot
