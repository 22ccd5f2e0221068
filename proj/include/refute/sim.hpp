#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "refute/data.hpp"
#include "refute/density.hpp"

namespace refute {

struct Gaussian {
    double weight;  // mass of this component in its (d, z) sub-density
    double mean;
    double sd;
};

// Observed-variable design: sub-densities of (Y, D=d) given Z=z as Gaussian mixtures.
struct SimDesign {
    std::string name;
    double prZ1 = 0.6;
    std::array<std::vector<Gaussian>, 4> cells;  // index 2*d + z
    double band_lo = -2.5;
    double band_hi = 7.0;
    TailSpec tails;

    const std::vector<Gaussian>& cell(int d, int z) const { return cells[2 * d + z]; }
    std::vector<Gaussian>& cell(int d, int z) { return cells[2 * d + z]; }
    double sub_density(int d, int z, double y) const;
    double cell_mass(int d, int z) const;
    // f(y,1) = p(y,1) - q(y,1), f(y,0) = q(y,0) - p(y,0)
    double diff(int d, double y) const;
    // throws ConfigError unless each z-arm integrates to 1 (quadrature, 1e-6)
    void validate() const;
    SimDesign swapped() const;  // exchange the roles of d=1 and d=0

    // {"name", "prZ1", "band": [lo, hi], "tails": TailSpec text,
    //  "cells": {"d1z1": [[weight, mean, sd], ...], "d0z1": ..., "d1z0": ..., "d0z0": ...}}
    static SimDesign from_json(const json& j);
    json to_json() const;
};

SimDesign builtin_design(const std::string& name);  // "normal-mix", "gap-below"
// "builtin:NAME" or a path to a JSON design file
SimDesign load_design(const std::string& spec);

Sample draw_sample(const SimDesign& design, std::size_t n, std::uint64_t seed);

struct PopulationLate {
    double late = 0.0;
    double mass1 = 0.0;
    double mass0 = 0.0;
    double numer1 = 0.0;
    double numer0 = 0.0;
    double delta() const { return mass1 - mass0; }
};

// Quadrature of the identified LATE with sets {f(y,d) >= threshold} (threshold 0 = population sets).
PopulationLate true_identified_late(const SimDesign& design, double threshold = 0.0);

enum class CiKind { KnownTail, Union };

struct CoverageConfig {
    std::size_t n = 1000;
    std::size_t m = 1000;
    Rule bandwidth = rules::fixed(0.4);
    Rule trimming = rules::rate_trimming(0.2);
    double alpha = 0.05;
    CiKind kind = CiKind::KnownTail;
    Kernel kernel;
    std::uint64_t seed = 1;
    unsigned threads = 0;
};

// Coverage grid settings: "n1000-b0.2-h0.4", "n5000-b0.12-h0.2", "n5000-b0.135-h0.2"
CoverageConfig coverage_preset(const std::string& name);

struct Replication {
    bool ok = false;
    double estimate = 0.0;
    double se = 0.0;
    double lo = 0.0;
    double hi = 0.0;
    bool covered = false;
    std::string error;
};

struct CoverageResult {
    double truth = 0.0;
    double coverage = 0.0;  // covered / successful replications
    std::size_t covered = 0;
    std::size_t successful = 0;
    std::size_t failed = 0;
    double mean_estimate = 0.0;
    double mc_sd = 0.0;      // sd of the estimates across replications
    double mean_se = 0.0;
    std::vector<Replication> reps;
    json to_json(bool with_reps = false) const;
    void write_csv(const std::string& path) const;
};

CoverageResult run_coverage(const SimDesign& design, const CoverageConfig& cfg);
// truth supplied by the caller
CoverageResult run_coverage(const SimDesign& design, const CoverageConfig& cfg, double truth);

}  // namespace refute
