#pragma once

#include <cstdint>
#include <random>

#include "icsim/quad_core.hpp"

namespace icsim {

struct NoiseSpec {
    double sigma = 0.0;
    std::uint64_t seed = 0;
};

// Counter-based key: draws are a pure function of these fields.
struct RngKey {
    std::uint64_t seed = 0;
    std::int64_t machine = 0;
    std::int64_t round = 0;
    std::int64_t step = 0;
    std::uint64_t stream = 0;  // separates unrelated consumers sharing a seed
};

std::uint64_t key_hash(const RngKey& key);
std::mt19937_64 keyed_engine(const RngKey& key);

// Isotropic Gaussian with per-coordinate variance sigma^2 / d.
Vector gaussian_noise(int d, double sigma, const RngKey& key);

Vector stochastic_gradient(const QuadraticMachine& machine, const Vector& x,
                           const NoiseSpec& noise, const RngKey& key);
void stochastic_gradient_into(const QuadraticMachine& machine, const Vector& x,
                              const NoiseSpec& noise, const RngKey& key, Vector& out);

// Mean of M*K stochastic gradients at x; machine m, draw k uses key (seed, m, round, k).
Vector minibatch_gradient(const ProblemInstance& instance, const Vector& x, int K,
                          const NoiseSpec& noise, int round);

}  // namespace icsim
