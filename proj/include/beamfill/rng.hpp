#pragma once

#include <cstdint>
#include <random>
#include <span>
#include <string_view>

namespace beamfill {

// Deterministic random stream used everywhere randomness is needed.
//
// The engine is std::mt19937_64, whose output sequence is pinned by the
// standard, so identical seeds reproduce identical streams on every
// platform. Distributions are implemented here by hand (the standard
// library ones are not bit-portable):
//   - uniform():  (x >> 11) * 2^-53, giving a double in [0, 1)
//   - normal():   Box-Muller, cosine branch only (the sine twin is
//                 discarded so the stream has no hidden state)
//   - shuffle():  Fisher-Yates, index drawn as next_u64() % (i + 1)
class Rng {
public:
    explicit Rng(std::uint64_t seed) : eng_(seed) {}

    std::uint64_t next_u64() { return eng_(); }

    /// Uniform double in [0, 1).
    double uniform() {
        return static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    }

    /// Uniform double in [lo, hi).
    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

    /// Standard normal deviate. Consumes two engine outputs per call.
    double normal();

    /// Uniform integer in [0, n). n must be positive.
    std::size_t below(std::size_t n) { return next_u64() % n; }

    /// In-place Fisher-Yates shuffle.
    void shuffle(std::span<std::size_t> idx) {
        for (std::size_t i = idx.size(); i > 1; --i) {
            std::size_t j = below(i);
            std::swap(idx[i - 1], idx[j]);
        }
    }

private:
    std::mt19937_64 eng_;
};

/// Derives a per-purpose seed from the experiment's root seed, so one
/// global seed reproduces the whole run. Purposes in use: "synth" and
/// "corrupt" (indexed by section order), "init" and "train" (indexed by
/// estimator id); "shuffle" and "dropout" derive in turn from each
/// estimator's training seed inside the training loop.
std::uint64_t derive_seed(std::uint64_t root, std::string_view purpose,
                          std::uint64_t index = 0);

}  // namespace beamfill
