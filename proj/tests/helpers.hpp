#pragma once

#include <cmath>
#include <random>
#include <vector>

#include "refute/data.hpp"

namespace testutil {

inline refute::Sample random_sample(std::mt19937_64& rng, std::size_t n) {
    std::normal_distribution<double> norm(0.0, 1.0);
    std::bernoulli_distribution coin(0.5);
    refute::Sample s;
    for (std::size_t i = 0; i < n; ++i) {
        int z = coin(rng);
        int d = std::bernoulli_distribution(z ? 0.7 : 0.3)(rng);
        s.y.push_back(norm(rng) + d);
        s.d.push_back(d);
        s.z.push_back(z);
    }
    s.z[0] = 1;
    s.z[1] = 0;
    return s;
}

// Population with finitely many support points, written out as a sample whose row counts are
// proportional to the cell probabilities; the empirical frequencies are then exact.
struct Atom {
    double y;
    int d;
    int z;
    int count;
};

inline refute::Sample replicate(const std::vector<Atom>& atoms) {
    refute::Sample s;
    for (const auto& a : atoms)
        for (int k = 0; k < a.count; ++k) {
            s.y.push_back(a.y);
            s.d.push_back(a.d);
            s.z.push_back(a.z);
        }
    return s;
}

inline double normal_pdf(double x, double mu, double sd) {
    const double u = (x - mu) / sd;
    return std::exp(-0.5 * u * u) / (sd * std::sqrt(2.0 * M_PI));
}

// composite Simpson rule, k even
template <class F>
double simpson(F f, double a, double b, int k = 4000) {
    const double h = (b - a) / k;
    double s = f(a) + f(b);
    for (int i = 1; i < k; ++i) s += f(a + i * h) * (i % 2 ? 4.0 : 2.0);
    return s * h / 3.0;
}

}  // namespace testutil
