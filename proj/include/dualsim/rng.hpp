#pragma once

// Counter-based random number generator (Philox 4x32-10). A generator is
// addressed by (seed, stream): trajectory r of a run uses stream r, so
// parallel Monte Carlo is bitwise reproducible regardless of thread count.

#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>

namespace dualsim {

class CounterRng {
public:
    CounterRng(std::uint64_t seed, std::uint64_t stream) : seed_(seed), stream_(stream) {}

    std::uint64_t next_u64() {
        if (idx_ >= 4) refill();
        const std::uint64_t lo = block_[idx_++];
        const std::uint64_t hi = block_[idx_++];
        return lo | (hi << 32);
    }

    // uniform in [0,1) with 53 random bits
    double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

    // uniform in (0,1], safe as a log argument
    double uniform_pos() { return 1.0 - uniform(); }

    double exponential(double rate) {
        if (rate <= 0.0) throw std::invalid_argument("exponential: rate must be positive");
        return -std::log(uniform_pos()) / rate;
    }

    // index in [0,n) with probability weights[i]/total
    std::size_t categorical(const double* weights, std::size_t n, double total) {
        double u = uniform() * total;
        for (std::size_t i = 0; i + 1 < n; ++i) {
            u -= weights[i];
            if (u < 0.0) return i;
        }
        return n - 1;
    }

    // inversion by multiplication; means above 30 are split into halves so
    // exp(-mean) stays in range
    std::uint64_t poisson(double mean) {
        if (mean < 0.0) throw std::invalid_argument("poisson: mean must be nonnegative");
        if (mean == 0.0) return 0;
        if (mean > 30.0) return poisson(mean / 2) + poisson(mean - mean / 2);
        const double l = std::exp(-mean);
        std::uint64_t k = 0;
        double prod = uniform_pos();
        while (prod > l) {
            prod *= uniform_pos();
            ++k;
        }
        return k;
    }

private:
    static std::uint32_t mulhi(std::uint32_t a, std::uint32_t b) {
        return static_cast<std::uint32_t>((static_cast<std::uint64_t>(a) * b) >> 32);
    }

    void refill() {
        std::uint32_t c0 = static_cast<std::uint32_t>(counter_);
        std::uint32_t c1 = static_cast<std::uint32_t>(counter_ >> 32);
        std::uint32_t c2 = static_cast<std::uint32_t>(stream_);
        std::uint32_t c3 = static_cast<std::uint32_t>(stream_ >> 32);
        std::uint32_t k0 = static_cast<std::uint32_t>(seed_);
        std::uint32_t k1 = static_cast<std::uint32_t>(seed_ >> 32);
        for (int round = 0; round < 10; ++round) {
            const std::uint32_t hi0 = mulhi(0xD2511F53u, c0);
            const std::uint32_t lo0 = 0xD2511F53u * c0;
            const std::uint32_t hi1 = mulhi(0xCD9E8D57u, c2);
            const std::uint32_t lo1 = 0xCD9E8D57u * c2;
            const std::uint32_t n0 = hi1 ^ c1 ^ k0;
            const std::uint32_t n1 = lo1;
            const std::uint32_t n2 = hi0 ^ c3 ^ k1;
            const std::uint32_t n3 = lo0;
            c0 = n0;
            c1 = n1;
            c2 = n2;
            c3 = n3;
            k0 += 0x9E3779B9u;
            k1 += 0xBB67AE85u;
        }
        block_ = {c0, c1, c2, c3};
        ++counter_;
        idx_ = 0;
    }

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int idx_ = 4;
};

}  // namespace dualsim
