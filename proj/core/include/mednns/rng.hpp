#pragma once

#include <cstdint>
#include <string>
#include <vector>

namespace mednns {

// Deterministic PRNG: xoshiro256++ seeded through splitmix64. The integer
// stream is bit-identical across platforms for a given seed; derived floats
// rely only on IEEE-754 arithmetic plus sqrt/log/cos.
//
// Streams for distinct purposes are derived with fork(), which mixes a
// purpose tag into the seed so that e.g. weight init and data sampling
// never share a stream.
class Rng {
public:
    explicit Rng(std::uint64_t seed);

    std::uint64_t next_u64();

    // Uniform in [0, 1).
    double uniform();
    double uniform(double lo, double hi);
    // Uniform integer in [0, n).
    std::uint64_t uniform_index(std::uint64_t n);
    // Standard normal via Box-Muller (both values consumed in order).
    double normal();
    double normal(double mean, double stddev);

    std::vector<float> normal_vec(std::size_t n, float mean = 0.0f, float stddev = 1.0f);

    template <typename T>
    void shuffle(std::vector<T>& v) {
        for (std::size_t i = v.size(); i > 1; --i) {
            std::size_t j = static_cast<std::size_t>(uniform_index(i));
            std::swap(v[i - 1], v[j]);
        }
    }

    // Independent child stream for a named purpose.
    Rng fork(std::uint64_t purpose) const;

private:
    std::uint64_t state_[4];
    std::uint64_t seed_;
    bool have_cached_normal_ = false;
    double cached_normal_ = 0.0;
};

std::uint64_t splitmix64(std::uint64_t& state);

// FNV-1a 64-bit, used for fingerprints and purpose tags.
std::uint64_t fnv1a64(const void* data, std::size_t len);
std::uint64_t fnv1a64(const std::string& s);

}  // namespace mednns
