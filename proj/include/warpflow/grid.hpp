#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace warpflow {

// 4th-order centered stencils on uniform periodic grids. All spatial
// differentiation in the library goes through these.

using Field = std::vector<double>;

struct Grid1D {
    int m = 0;
    double h = 0.0;  // 2*pi/m

    double theta(int j) const { return h * j; }
};

Grid1D make_grid_1d(int m);

// f' at every node, period m*h.
void deriv1_periodic(std::span<const double> f, std::span<double> out, double h);
// f'' at every node (direct 5-point stencil).
void deriv2_periodic(std::span<const double> f, std::span<double> out, double h);

Field deriv1_periodic(const Field& f, double h);
Field deriv2_periodic(const Field& f, double h);

// Row-major Mx x My periodic grid on [0,2pi)^2; index = i*my + j.
struct Grid2D {
    int mx = 0, my = 0;
    double hx = 0.0, hy = 0.0;

    std::size_t size() const { return static_cast<std::size_t>(mx) * my; }
    std::size_t idx(int i, int j) const { return static_cast<std::size_t>(i) * my + j; }
    double x(int i) const { return hx * i; }
    double y(int j) const { return hy * j; }
};

Grid2D make_grid_2d(int mx, int my);

void deriv_x(const Grid2D& g, std::span<const double> f, std::span<double> out);
void deriv_y(const Grid2D& g, std::span<const double> f, std::span<double> out);
void deriv_xx(const Grid2D& g, std::span<const double> f, std::span<double> out);
void deriv_yy(const Grid2D& g, std::span<const double> f, std::span<double> out);

Field deriv_x(const Grid2D& g, const Field& f);
Field deriv_y(const Grid2D& g, const Field& f);
Field deriv_xx(const Grid2D& g, const Field& f);
Field deriv_yy(const Grid2D& g, const Field& f);
Field deriv_xy(const Grid2D& g, const Field& f);

// Periodic trapezoid quadrature (spectrally accurate for smooth periodic data).
double integrate_periodic(const Field& f, double h);
double integrate_periodic_2d(const Grid2D& g, const Field& f);

}  // namespace warpflow
