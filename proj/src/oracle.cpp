#include "icsim/oracle.hpp"

#include <cmath>

#include "icsim/hash.hpp"

namespace icsim {

std::uint64_t key_hash(const RngKey& key) {
    std::uint64_t h = mix64(key.seed ^ 0x6a09e667f3bcc908ULL);
    h = mix64(h ^ static_cast<std::uint64_t>(key.machine));
    h = mix64(h ^ static_cast<std::uint64_t>(key.round));
    h = mix64(h ^ static_cast<std::uint64_t>(key.step));
    h = mix64(h ^ key.stream);
    return h;
}

std::mt19937_64 keyed_engine(const RngKey& key) {
    std::uint64_t h = key_hash(key);
    std::seed_seq seq{static_cast<std::uint32_t>(h), static_cast<std::uint32_t>(h >> 32),
                      static_cast<std::uint32_t>(mix64(h)),
                      static_cast<std::uint32_t>(mix64(h) >> 32)};
    return std::mt19937_64(seq);
}

Vector gaussian_noise(int d, double sigma, const RngKey& key) {
    Vector xi(d);
    if (sigma == 0.0) {
        xi.setZero();
        return xi;
    }
    auto eng = keyed_engine(key);
    std::normal_distribution<double> n(0.0, sigma / std::sqrt(static_cast<double>(d)));
    for (int i = 0; i < d; ++i) xi(i) = n(eng);
    return xi;
}

void stochastic_gradient_into(const QuadraticMachine& machine, const Vector& x,
                              const NoiseSpec& noise, const RngKey& key, Vector& out) {
    machine.gradient_into(x, out);
    if (noise.sigma > 0.0) out += gaussian_noise(machine.dim(), noise.sigma, key);
}

Vector stochastic_gradient(const QuadraticMachine& machine, const Vector& x,
                           const NoiseSpec& noise, const RngKey& key) {
    Vector g(machine.dim());
    stochastic_gradient_into(machine, x, noise, key, g);
    return g;
}

Vector minibatch_gradient(const ProblemInstance& instance, const Vector& x, int K,
                          const NoiseSpec& noise, int round) {
    if (K < 1) throw DomainError("minibatch_gradient needs K >= 1");
    const int M = instance.num_machines();
    Vector sum = Vector::Zero(instance.dim());
    Vector g(instance.dim());
    for (int m = 0; m < M; ++m) {
        for (int k = 0; k < K; ++k) {
            stochastic_gradient_into(instance.machine(m), x, noise,
                                     RngKey{noise.seed, m, round, k}, g);
            sum += g;
        }
    }
    return sum / static_cast<double>(M * K);
}

}  // namespace icsim
