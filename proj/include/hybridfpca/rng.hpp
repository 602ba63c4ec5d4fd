#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <vector>

namespace hybridfpca {

/// Philox4x32-10 block function. Exposed for known-answer tests.
std::array<std::uint32_t, 4> philox4x32_10(std::array<std::uint32_t, 4> counter,
                                           std::array<std::uint32_t, 2> key);

/// Counter-based generator. A (seed, stream) pair addresses a disjoint
/// region of counter space: the stream id occupies the upper 64 counter
/// bits and the draw index the lower 64, so two streams never share an
/// input block.
class Rng {
public:
    Rng(std::uint64_t seed, std::uint64_t stream);

    std::uint64_t next_u64();
    /// Uniform on [0, 1) with 53 bits.
    double uniform();
    double normal();
    double normal(double mean, double sd) { return mean + sd * normal(); }
    /// Uniform integer in [0, bound) by rejection; bound > 0.
    std::uint64_t below(std::uint64_t bound);

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            const auto j = static_cast<std::size_t>(below(i));
            std::swap(items[i - 1], items[j]);
        }
    }

    [[nodiscard]] std::uint64_t seed() const { return seed_; }
    [[nodiscard]] std::uint64_t stream() const { return stream_; }

private:
    void refill();

    std::uint64_t seed_;
    std::uint64_t stream_;
    std::uint64_t counter_ = 0;
    std::array<std::uint32_t, 4> block_{};
    int used_ = 4;
    bool has_spare_ = false;
    double spare_ = 0.0;
};

/// Packs (cell, replicate, purpose) into a stream id; fields are bounded so
/// distinct triples give distinct ids.
std::uint64_t stream_id(std::uint32_t cell, std::uint32_t replicate, std::uint32_t purpose);

/// Random permutation of 0..n-1 followed by a prefix split.
struct Split {
    std::vector<int> train;
    std::vector<int> test;
};
Split train_test_split(int n, double train_fraction, Rng& rng);

}  // namespace hybridfpca
