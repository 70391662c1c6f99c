#include "delaykf/rng.hpp"

#include <cmath>

#include "delaykf/errors.hpp"

namespace delaykf {

namespace {

std::uint64_t fnv1a(std::string_view s) {
    std::uint64_t h = 14695981039346656037ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

std::uint64_t splitmix64(std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ull;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

}  // namespace

std::uint64_t split_seed(std::uint64_t master, std::string_view label) {
    return splitmix64(master ^ fnv1a(label));
}

double Rng::uniform(double lo, double hi) {
    if (!(lo <= hi)) throw UsageError("Rng::uniform: lo > hi");
    // 53-bit mantissa in [0,1)
    const double u = static_cast<double>(engine_() >> 11) * 0x1.0p-53;
    return lo + (hi - lo) * u;
}

double Rng::normal() {
    if (has_spare_) {
        has_spare_ = false;
        return spare_;
    }
    double u, v, s;
    do {
        u = uniform(-1.0, 1.0);
        v = uniform(-1.0, 1.0);
        s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double m = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * m;
    has_spare_ = true;
    return u * m;
}

int Rng::uniform_int(int lo, int hi) {
    if (lo > hi) throw UsageError("Rng::uniform_int: lo > hi");
    const int span = hi - lo + 1;
    int k = static_cast<int>(uniform(0.0, static_cast<double>(span)));
    if (k >= span) k = span - 1;  // guard against rounding at the right edge
    return lo + k;
}

bool Rng::bernoulli(double p) {
    return uniform(0.0, 1.0) < p;
}

}  // namespace delaykf
