#include "warpflow/grid.hpp"

#include <cassert>
#include <cmath>
#include <numbers>

namespace warpflow {

Grid1D make_grid_1d(int m) { return Grid1D{m, 2.0 * std::numbers::pi / m}; }

void deriv1_periodic(std::span<const double> f, std::span<double> out, double h) {
    const int m = static_cast<int>(f.size());
    assert(static_cast<int>(out.size()) == m && m >= 5);
    const double c = 1.0 / (12.0 * h);
    for (int j = 0; j < m; ++j) {
        const int jm2 = (j + m - 2) % m, jm1 = (j + m - 1) % m;
        const int jp1 = (j + 1) % m, jp2 = (j + 2) % m;
        out[j] = c * (-f[jp2] + 8.0 * f[jp1] - 8.0 * f[jm1] + f[jm2]);
    }
}

void deriv2_periodic(std::span<const double> f, std::span<double> out, double h) {
    const int m = static_cast<int>(f.size());
    assert(static_cast<int>(out.size()) == m && m >= 5);
    const double c = 1.0 / (12.0 * h * h);
    for (int j = 0; j < m; ++j) {
        const int jm2 = (j + m - 2) % m, jm1 = (j + m - 1) % m;
        const int jp1 = (j + 1) % m, jp2 = (j + 2) % m;
        out[j] = c * (-f[jp2] + 16.0 * f[jp1] - 30.0 * f[j] + 16.0 * f[jm1] - f[jm2]);
    }
}

Field deriv1_periodic(const Field& f, double h) {
    Field out(f.size());
    deriv1_periodic(std::span<const double>(f), std::span<double>(out), h);
    return out;
}

Field deriv2_periodic(const Field& f, double h) {
    Field out(f.size());
    deriv2_periodic(std::span<const double>(f), std::span<double>(out), h);
    return out;
}

Grid2D make_grid_2d(int mx, int my) {
    return Grid2D{mx, my, 2.0 * std::numbers::pi / mx, 2.0 * std::numbers::pi / my};
}

void deriv_x(const Grid2D& g, std::span<const double> f, std::span<double> out) {
    const double c = 1.0 / (12.0 * g.hx);
    for (int i = 0; i < g.mx; ++i) {
        const int im2 = (i + g.mx - 2) % g.mx, im1 = (i + g.mx - 1) % g.mx;
        const int ip1 = (i + 1) % g.mx, ip2 = (i + 2) % g.mx;
        for (int j = 0; j < g.my; ++j) {
            out[g.idx(i, j)] = c * (-f[g.idx(ip2, j)] + 8.0 * f[g.idx(ip1, j)] -
                                    8.0 * f[g.idx(im1, j)] + f[g.idx(im2, j)]);
        }
    }
}

void deriv_y(const Grid2D& g, std::span<const double> f, std::span<double> out) {
    const double c = 1.0 / (12.0 * g.hy);
    for (int i = 0; i < g.mx; ++i) {
        for (int j = 0; j < g.my; ++j) {
            const int jm2 = (j + g.my - 2) % g.my, jm1 = (j + g.my - 1) % g.my;
            const int jp1 = (j + 1) % g.my, jp2 = (j + 2) % g.my;
            out[g.idx(i, j)] = c * (-f[g.idx(i, jp2)] + 8.0 * f[g.idx(i, jp1)] -
                                    8.0 * f[g.idx(i, jm1)] + f[g.idx(i, jm2)]);
        }
    }
}

void deriv_xx(const Grid2D& g, std::span<const double> f, std::span<double> out) {
    const double c = 1.0 / (12.0 * g.hx * g.hx);
    for (int i = 0; i < g.mx; ++i) {
        const int im2 = (i + g.mx - 2) % g.mx, im1 = (i + g.mx - 1) % g.mx;
        const int ip1 = (i + 1) % g.mx, ip2 = (i + 2) % g.mx;
        for (int j = 0; j < g.my; ++j) {
            out[g.idx(i, j)] =
                c * (-f[g.idx(ip2, j)] + 16.0 * f[g.idx(ip1, j)] - 30.0 * f[g.idx(i, j)] +
                     16.0 * f[g.idx(im1, j)] - f[g.idx(im2, j)]);
        }
    }
}

void deriv_yy(const Grid2D& g, std::span<const double> f, std::span<double> out) {
    const double c = 1.0 / (12.0 * g.hy * g.hy);
    for (int i = 0; i < g.mx; ++i) {
        for (int j = 0; j < g.my; ++j) {
            const int jm2 = (j + g.my - 2) % g.my, jm1 = (j + g.my - 1) % g.my;
            const int jp1 = (j + 1) % g.my, jp2 = (j + 2) % g.my;
            out[g.idx(i, j)] =
                c * (-f[g.idx(i, jp2)] + 16.0 * f[g.idx(i, jp1)] - 30.0 * f[g.idx(i, j)] +
                     16.0 * f[g.idx(i, jm1)] - f[g.idx(i, jm2)]);
        }
    }
}

Field deriv_x(const Grid2D& g, const Field& f) {
    Field out(f.size());
    deriv_x(g, f, out);
    return out;
}
Field deriv_y(const Grid2D& g, const Field& f) {
    Field out(f.size());
    deriv_y(g, f, out);
    return out;
}
Field deriv_xx(const Grid2D& g, const Field& f) {
    Field out(f.size());
    deriv_xx(g, f, out);
    return out;
}
Field deriv_yy(const Grid2D& g, const Field& f) {
    Field out(f.size());
    deriv_yy(g, f, out);
    return out;
}
Field deriv_xy(const Grid2D& g, const Field& f) {
    Field fx(f.size()), out(f.size());
    deriv_x(g, f, fx);
    deriv_y(g, fx, out);
    return out;
}

double integrate_periodic(const Field& f, double h) {
    double s = 0.0;
    for (double x : f) s += x;
    return s * h;
}

double integrate_periodic_2d(const Grid2D& g, const Field& f) {
    double s = 0.0;
    for (double x : f) s += x;
    return s * g.hx * g.hy;
}

}  // namespace warpflow
