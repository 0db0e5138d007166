#pragma once

#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

namespace kdlab {

using numvec = std::vector<double>;

/// Exhaustive solvers refuse tasks with more trajectories than this.
inline constexpr std::size_t default_enumeration_cap = 1'000'000;

// Error kinds callers are expected to distinguish.
struct HorizonExceededError : std::logic_error {
    using std::logic_error::logic_error;
};
struct TokenOutOfRangeError : std::out_of_range {
    using std::out_of_range::out_of_range;
};
struct UnknownFixtureError : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};
struct CapExceededError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct RewardsMissingError : std::logic_error {
    using std::logic_error::logic_error;
};
struct NonFiniteError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct MissingMetricsError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

/**
Deterministic random stream. Raw mt19937_64 output is mapped to doubles by
hand so draws do not depend on the standard library's distribution
implementations; identical seeds give identical streams on every platform.
*/
class RandomStream {
  public:
    explicit RandomStream(std::uint64_t seed) : engine_(seed) {}

    std::uint64_t next_u64() { return engine_(); }

    /// Uniform in [0, 1) with 53-bit resolution.
    double uniform01() {
        return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    }

    double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

    /// Standard normal via Box-Muller (one fresh pair per call).
    double normal() {
        const double u1 = 1.0 - uniform01();  // (0, 1], keeps log finite
        const double u2 = uniform01();
        return std::sqrt(-2.0 * std::log(u1)) *
               std::cos(2.0 * 3.14159265358979323846 * u2);
    }

    std::size_t index_below(std::size_t n) {
        return static_cast<std::size_t>(engine_() % n);
    }

    /// Inverse-CDF draw from a probability vector (sums to ~1).
    std::size_t categorical(std::span<const double> probs);

    /// Stream for work item `index`, independent of draw order elsewhere.
    static RandomStream derived(std::uint64_t master_seed, std::uint64_t index);

  private:
    std::mt19937_64 engine_;
};

/// splitmix64 finalizer; used to derive well-separated child seeds.
std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index);

/// Pairwise summation in fixed order (deterministic, accurate reductions).
double pairwise_sum(std::span<const double> xs);

bool all_finite(std::span<const double> xs);

/// Mean and standard error of a sample; stderr is 0 for n < 2.
struct SampleStats {
    double mean = 0.0;
    double stderr_of_mean = 0.0;
    std::size_t count = 0;
};
SampleStats summarize(std::span<const double> xs);

}  // namespace kdlab
