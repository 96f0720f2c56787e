#pragma once

// Shared helpers for the test suites: smooth manufactured fields on the
// straightened strip and admissible vorticity / curl-image generators.

#include "vws/divcurl.hpp"
#include "vws/geometry.hpp"

#include <cmath>
#include <functional>
#include <random>

namespace vws::testutil {

inline SurfaceField sample(const Grid& g, const std::function<double(double)>& f) {
    SurfaceField s(g.nx());
    for (int i = 0; i < g.nx(); ++i) s[i] = f(g.x(i));
    return s;
}

inline VolumeField sample2(const Grid& g, const std::function<double(double, double)>& f) {
    VolumeField v(g);
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix) v.at(ix, iz) = f(g.x(ix), g.z(iz));
    return v;
}

// trig polynomial in x (mean-zero unless include_mean), polynomial in z
inline VolumeField smooth_volume(const Grid& g, std::mt19937& rng, int kmax = 4, int zdeg = 4,
                                 bool include_mean = false) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    VolumeField f(g);
    for (int k = include_mean ? 0 : 1; k <= kmax; ++k) {
        double a = U(rng), b = U(rng);
        std::vector<double> pc(zdeg + 1);
        for (auto& c : pc) c = U(rng);
        for (int iz = 0; iz < g.nz(); ++iz) {
            double z = g.z(iz);
            double pz = 0.0, zp = 1.0;
            for (int d = 0; d <= zdeg; ++d) {
                pz += pc[d] * zp;
                zp *= z;
            }
            for (int ix = 0; ix < g.nx(); ++ix) {
                double kx = k * 2.0 * M_PI / g.Lx() * g.x(ix);
                f.at(ix, iz) += (a * std::cos(kx) + b * std::sin(kx)) * pz;
            }
        }
    }
    return f;
}

inline SurfaceField smooth_surface(const Grid& g, std::mt19937& rng, int kmax = 4,
                                   double amplitude = 1.0) {
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    SurfaceField f(g.nx());
    for (int k = 1; k <= kmax; ++k) {
        double a = amplitude * U(rng) / k, b = amplitude * U(rng) / k;
        for (int i = 0; i < g.nx(); ++i) {
            double kx = k * 2.0 * M_PI / g.Lx() * g.x(i);
            f[i] += a * std::cos(kx) + b * std::sin(kx);
        }
    }
    return f;
}

// Divergence-free manufactured velocity in the (V, w) storage convention:
// U^mu := scaled_curl(W) with W_2(z=-1)=0, then the tangential-mean kernel
// modes (uniform currents) are removed so the field is reconstructible.
struct ManufacturedVelocity {
    VectorVolumeField U;       // storage convention (Vx, Vy, w)
    VectorVolumeField omega;   // (1/mu) scaled_curl U^mu, discrete
    SurfaceField psi;          // mean-zero potential trace data
};

inline ManufacturedVelocity manufactured_velocity(const GeometryCache& G, std::mt19937& rng,
                                                  int kmax = 3, int zdeg = 4) {
    const Grid& g = G.g();
    const double smu = std::sqrt(G.mu);

    VectorVolumeField W;
    W.x = smooth_volume(g, rng, kmax, zdeg, true);
    W.y = smooth_volume(g, rng, kmax, zdeg, true);
    W.z = smooth_volume(g, rng, kmax, zdeg, true);
    // W_2 must vanish at the bottom so that w(z=-1)=0
    for (int iz = 0; iz < g.nz(); ++iz) {
        double zp = 1.0 + g.z(iz);
        for (int ix = 0; ix < g.nx(); ++ix) W.y.at(ix, iz) *= zp;
    }

    VectorVolumeField Umu = scaled_curl(W, G);
    ManufacturedVelocity out;
    out.U.x = (1.0 / smu) * Umu.x;
    out.U.y = (1.0 / smu) * Umu.y;
    out.U.z = Umu.z;

    // remove the uniform-current kernel modes (torus zero-mode sector)
    TangentialTrace tt = tangential_trace(out.U, G);
    double mx = mean(g, tt.x), my = mean(g, tt.y);
    for (auto& v : out.U.x.v) v -= mx;
    for (auto& v : out.U.y.v) v -= my;

    VectorVolumeField Umu2;
    Umu2.x = smu * out.U.x;
    Umu2.y = smu * out.U.y;
    Umu2.z = out.U.z;
    out.omega = (1.0 / G.mu) * scaled_curl(Umu2, G);

    TangentialTrace tpar = tangential_trace(out.U, G);
    out.psi = inv_dx(g, tpar.x, 1e-10);
    return out;
}

// Admissible vorticity field: image of (1/sqrt(mu)) scaled_curl on a smooth
// potential with bottom-flat transverse component (bottom flux exactly zero).
inline VectorVolumeField admissible_vorticity(const GeometryCache& G, std::mt19937& rng,
                                              int kmax = 3, int zdeg = 3) {
    return manufactured_velocity(G, rng, kmax, zdeg).omega;
}

// Field with all bottom traces zero and zero tangential-x surface condition,
// suitable as a curl_inverse target: B = (-dz^s Gf, B2, sqrt(mu) dx^s Gf)
// with Gf(-1)=0, dz Gf(-1)=0, conormal(Gf)|surf = 0 and B2(-1)=0, mean-zero
// surface trace.
inline VectorVolumeField curl_image_potential(const GeometryCache& G, std::mt19937& rng,
                                              int kmax = 3) {
    const Grid& g = G.g();
    const double smu = std::sqrt(G.mu);
    const double mu = G.mu;

    // base stream with vanishing value and slope at the bottom
    VolumeField G0 = smooth_volume(g, rng, kmax, 3, true);
    for (int iz = 0; iz < g.nz(); ++iz) {
        double zp = 1.0 + g.z(iz);
        for (int ix = 0; ix < g.nx(); ++ix) G0.at(ix, iz) *= zp * zp;
    }

    // conormal defect at the surface: p2 = -mu sx ux + (1+mu sx^2)/h uz
    VolumeField ux = dx(g, G0), uz = dz(g, G0);
    SurfaceField d(g.nx());
    for (int ix = 0; ix < g.nx(); ++ix) {
        double sx = G.dxsigma.at(ix, 0), h = G.h[ix];
        d[ix] = -mu * sx * ux.at(ix, 0) + (1.0 + mu * sx * sx) / h * uz.at(ix, 0);
    }
    // corrector m(z) u(x) with m = z(1+z)^2: m(0)=0, m'(0)=1, m(-1)=m'(-1)=0
    SurfaceField u(g.nx());
    for (int ix = 0; ix < g.nx(); ++ix) {
        double sx = G.dxsigma.at(ix, 0);
        u[ix] = d[ix] * G.h[ix] / (1.0 + mu * sx * sx);
    }
    VolumeField Gs = G0;
    for (int iz = 0; iz < g.nz(); ++iz) {
        double z = g.z(iz), m = z * (1.0 + z) * (1.0 + z);
        for (int ix = 0; ix < g.nx(); ++ix) Gs.at(ix, iz) -= m * u[ix];
    }

    VectorVolumeField B(g);
    VolumeField Gz = sigma_derivative(Gs, Axis::Z, G);
    VolumeField Gx = sigma_derivative(Gs, Axis::X, G);
    for (size_t i = 0; i < B.x.v.size(); ++i) {
        B.x.v[i] = -Gz.v[i];
        B.z.v[i] = smu * Gx.v[i];
    }
    // transverse component with zero bottom value and mean-zero surface trace
    B.y = smooth_volume(g, rng, kmax, 3, false);
    for (int iz = 0; iz < g.nz(); ++iz) {
        double zp = 1.0 + g.z(iz);
        for (int ix = 0; ix < g.nx(); ++ix) B.y.at(ix, iz) *= zp;
    }
    return B;
}

}  // namespace vws::testutil
