#include "kdlab/common.hpp"

#include <algorithm>

namespace kdlab {

std::size_t RandomStream::categorical(std::span<const double> probs) {
    if (probs.empty())
        throw std::invalid_argument("categorical: empty probability vector");
    const double u = uniform01();
    double cum = 0.0;
    for (std::size_t i = 0; i < probs.size(); ++i) {
        const double p = probs[i];
        if (!(p >= 0.0) || !std::isfinite(p))
            throw NonFiniteError("categorical: invalid probability");
        cum += p;
        if (u < cum) return i;
    }
    // u landed in the rounding slack past the accumulated mass.
    return probs.size() - 1;
}

RandomStream RandomStream::derived(std::uint64_t master_seed, std::uint64_t index) {
    return RandomStream(mix_seed(master_seed, index));
}

std::uint64_t mix_seed(std::uint64_t master, std::uint64_t index) {
    std::uint64_t z = master + 0x9e3779b97f4a7c15ULL * (index + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
}

namespace {

double pairwise_sum_range(const double* xs, std::size_t n) {
    if (n <= 8) {
        double s = 0.0;
        for (std::size_t i = 0; i < n; ++i) s += xs[i];
        return s;
    }
    const std::size_t half = n / 2;
    return pairwise_sum_range(xs, half) + pairwise_sum_range(xs + half, n - half);
}

}  // namespace

double pairwise_sum(std::span<const double> xs) {
    return pairwise_sum_range(xs.data(), xs.size());
}

bool all_finite(std::span<const double> xs) {
    return std::all_of(xs.begin(), xs.end(),
                       [](double x) { return std::isfinite(x); });
}

SampleStats summarize(std::span<const double> xs) {
    SampleStats st;
    st.count = xs.size();
    if (st.count == 0) return st;
    st.mean = pairwise_sum(xs) / static_cast<double>(st.count);
    if (st.count < 2) return st;
    numvec sq(xs.size());
    for (std::size_t i = 0; i < xs.size(); ++i) {
        const double d = xs[i] - st.mean;
        sq[i] = d * d;
    }
    const double var = pairwise_sum(sq) / static_cast<double>(st.count - 1);
    st.stderr_of_mean = std::sqrt(var / static_cast<double>(st.count));
    return st;
}

}  // namespace kdlab
