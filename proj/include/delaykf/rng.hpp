#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace delaykf {

/// Derives an independent stream seed from a master seed and a component
/// label. Labels are hashed (FNV-1a) so adding new consumers never shifts
/// the streams of existing ones.
std::uint64_t split_seed(std::uint64_t master, std::string_view label);

/// Deterministic random stream. All draws consume a fixed number of engine
/// words except normal(), which is only used where stream alignment across
/// configurations is not required.
class Rng {
  public:
    explicit Rng(std::uint64_t seed) : engine_(seed) {}

    /// Uniform draw on [lo, hi). Consumes exactly one engine word.
    double uniform(double lo, double hi);

    /// Standard normal via the polar method (cached spare deviate).
    double normal();

    /// Uniform integer on {lo, ..., hi}. Consumes exactly one engine word.
    int uniform_int(int lo, int hi);

    /// True with probability p. Consumes exactly one engine word.
    bool bernoulli(double p);

    std::uint64_t next() { return engine_(); }

  private:
    std::mt19937_64 engine_;
    double spare_ = 0.0;
    bool has_spare_ = false;
};

}  // namespace delaykf
