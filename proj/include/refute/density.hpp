#pragma once

#include <functional>
#include <string>
#include <vector>

#include "refute/data.hpp"

namespace refute {

enum class KernelShape { Epanechnikov, Triangular };

struct Kernel {
    KernelShape shape = KernelShape::Epanechnikov;
    double A = 1.0;  // support half-width

    double operator()(double u) const;
    double max_value() const;
    std::string name() const;
    static Kernel parse(const std::string& name);
};

struct DensityEstimate {
    std::vector<double> grid;
    std::vector<double> f1;  // p_h(y,1) - q_h(y,1)
    std::vector<double> f0;  // q_h(y,0) - p_h(y,0)
    double h = 0.0;

    const std::vector<double>& f(int d) const { return d == 1 ? f1 : f0; }
    // linear interpolation on the grid, 0 outside
    double at(int d, double y) const;
    void write_csv(const std::string& path) const;
};

std::vector<double> linspace(double lo, double hi, std::size_t k);
// 512 points on [M_l - A h, M_u + A h]
std::vector<double> default_grid(double band_lo, double band_hi, const Kernel& k, double h,
                                 std::size_t points = 512);

// Kernel sub-density of cell (D=d, Z=z) at y, normalised by #(Z=z).
double cell_density(const EmpiricalPQ& emp, const Kernel& k, double h, int d, int z, double y);

DensityEstimate estimate_density_diff(const EmpiricalPQ& emp, const Kernel& k, double h,
                                      std::vector<double> grid);
DensityEstimate estimate_density_diff(const Sample& s, const Kernel& k, double h,
                                      std::vector<double> grid);

double sup_deviation(const DensityEstimate& est, int d, const std::function<double(double)>& ref);

}  // namespace refute
