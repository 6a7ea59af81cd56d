#pragma once

#include <cstddef>
#include <cstdint>
#include <random>
#include <span>
#include <string_view>
#include <utility>

namespace hfrisk {

/// Mixes a seed with a stage tag. All randomness in a pipeline run is derived
/// from one master seed through this function, so any stage can be reproduced
/// in isolation.
std::uint64_t derive_seed(std::uint64_t seed, std::string_view tag) noexcept;
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t index) noexcept;

/// Portable random stream. The standard distributions are implementation
/// defined, so draws are built directly on the mt19937_64 bit stream, whose
/// output sequence is fixed by the standard.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t bits() { return engine_(); }

    /// Uniform on [0, 1) with 53 bits of resolution.
    double uniform();

    /// Uniform on the open interval (0, 1).
    double uniform_open();

    /// Uniform integer in [0, n). Requires n > 0.
    std::size_t index(std::size_t n);

    double normal();

    bool bernoulli(double p) { return uniform() < p; }

    template <typename T>
    void shuffle(std::span<T> items) {
        for (std::size_t i = items.size(); i > 1; --i) {
            std::swap(items[i - 1], items[index(i)]);
        }
    }

private:
    std::mt19937_64 engine_;
    double spare_normal_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace hfrisk
