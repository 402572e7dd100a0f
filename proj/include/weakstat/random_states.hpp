#pragma once

#include <vector>

#include "weakstat/operator_core.hpp"
#include "weakstat/rng.hpp"

namespace weakstat {

/// Seeded generator of random states and measurements for property checks.
/// Fully deterministic: every value is a function of (seed, stream) and the
/// call sequence.
class StateSampler {
  public:
    explicit StateSampler(std::uint64_t seed, std::uint64_t stream = 0)
        : rng_(seed, stream) {}

    double uniform() { return rng_.next_unit(); }
    /// Standard normal via Box-Muller.
    double normal();
    Complex complex_normal();

    KetVector random_ket(Eigen::Index dim);
    /// Ginibre construction: G G^dagger normalized to unit trace. Full rank
    /// almost surely.
    DensityMatrix random_density(Eigen::Index dim);
    /// Haar-ish unitary from QR of a Ginibre matrix with phase-fixed R.
    Matrix random_unitary(Eigen::Index dim);
    /// Complete rank-1 PVM from the columns of a random unitary.
    std::vector<Projector> random_rank1_pvm(Eigen::Index dim);
    Matrix random_hermitian(Eigen::Index dim, double scale = 1.0);
    /// Random Hermitian rescaled so its spectrum spans [0, 1].
    EffectOperator random_effect(Eigen::Index dim);

  private:
    CounterRng rng_;
};

} // namespace weakstat
