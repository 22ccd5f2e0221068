#include "refute/density.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "refute/errors.hpp"

namespace refute {

double Kernel::operator()(double u) const {
    double t = u / A;
    if (t < -1.0 || t > 1.0) return 0.0;
    switch (shape) {
        case KernelShape::Epanechnikov: return 0.75 * (1.0 - t * t) / A;
        case KernelShape::Triangular: return (1.0 - std::abs(t)) / A;
    }
    return 0.0;
}

double Kernel::max_value() const {
    return shape == KernelShape::Epanechnikov ? 0.75 / A : 1.0 / A;
}

std::string Kernel::name() const {
    return shape == KernelShape::Epanechnikov ? "epanechnikov" : "triangular";
}

Kernel Kernel::parse(const std::string& name) {
    if (name == "epanechnikov") return {KernelShape::Epanechnikov, 1.0};
    if (name == "triangular") return {KernelShape::Triangular, 1.0};
    throw ConfigError("unknown kernel '" + name + "'");
}

double DensityEstimate::at(int d, double y) const {
    const auto& f = this->f(d);
    if (grid.empty() || y < grid.front() || y > grid.back()) return 0.0;
    auto it = std::upper_bound(grid.begin(), grid.end(), y);
    if (it == grid.end()) return f.back();
    std::size_t j = static_cast<std::size_t>(it - grid.begin());
    double w = (y - grid[j - 1]) / (grid[j] - grid[j - 1]);
    return (1.0 - w) * f[j - 1] + w * f[j];
}

void DensityEstimate::write_csv(const std::string& path) const {
    std::ofstream out(path);
    if (!out) throw DataError("cannot write " + path);
    out.precision(17);
    out << "y,f1,f0\n";
    for (std::size_t j = 0; j < grid.size(); ++j) out << grid[j] << ',' << f1[j] << ',' << f0[j] << '\n';
}

std::vector<double> linspace(double lo, double hi, std::size_t k) {
    std::vector<double> g(k);
    if (k == 1) {
        g[0] = lo;
        return g;
    }
    for (std::size_t j = 0; j < k; ++j) g[j] = lo + (hi - lo) * static_cast<double>(j) / (k - 1);
    return g;
}

std::vector<double> default_grid(double band_lo, double band_hi, const Kernel& k, double h,
                                 std::size_t points) {
    return linspace(band_lo - k.A * h, band_hi + k.A * h, points);
}

double cell_density(const EmpiricalPQ& emp, const Kernel& k, double h, int d, int z, double y) {
    const auto& c = emp.cell(d, z);
    auto lo = std::lower_bound(c.begin(), c.end(), y - k.A * h);
    auto hi = std::upper_bound(c.begin(), c.end(), y + k.A * h);
    double s = 0.0;
    for (auto it = lo; it != hi; ++it) s += k((*it - y) / h);
    return s / (h * static_cast<double>(emp.nZ(z)));
}

DensityEstimate estimate_density_diff(const EmpiricalPQ& emp, const Kernel& k, double h,
                                      std::vector<double> grid) {
    if (!(h > 0.0)) throw ConfigError("bandwidth must be positive");
    if (grid.empty()) throw ConfigError("evaluation grid is empty");
    DensityEstimate est;
    est.h = h;
    est.grid = std::move(grid);
    est.f1.resize(est.grid.size());
    est.f0.resize(est.grid.size());
    for (std::size_t j = 0; j < est.grid.size(); ++j) {
        double y = est.grid[j];
        est.f1[j] = cell_density(emp, k, h, 1, 1, y) - cell_density(emp, k, h, 1, 0, y);
        est.f0[j] = cell_density(emp, k, h, 0, 0, y) - cell_density(emp, k, h, 0, 1, y);
    }
    return est;
}

DensityEstimate estimate_density_diff(const Sample& s, const Kernel& k, double h,
                                      std::vector<double> grid) {
    return estimate_density_diff(EmpiricalPQ(s), k, h, std::move(grid));
}

double sup_deviation(const DensityEstimate& est, int d, const std::function<double(double)>& ref) {
    const auto& f = est.f(d);
    double m = 0.0;
    for (std::size_t j = 0; j < est.grid.size(); ++j) m = std::max(m, std::abs(f[j] - ref(est.grid[j])));
    return m;
}

}  // namespace refute
