#include "vws/geometry.hpp"

#include <cmath>

namespace vws {

GeometryCache build_geometry(std::shared_ptr<const Grid> grid, const SurfaceField& zeta,
                             double eps, double mu, double h_min) {
    if (!(eps > 0.0) || !(mu > 0.0)) throw ConfigError("build_geometry: eps, mu must be positive");
    if (!finite(zeta)) throw NonFiniteField("build_geometry: zeta not finite");
    const Grid& g = *grid;

    GeometryCache G;
    G.grid = std::move(grid);
    G.eps = eps;
    G.mu = mu;
    G.h_min = h_min;
    G.zeta = zeta;
    G.dxzeta = dx(g, zeta);
    G.h = SurfaceField(g.nx());
    G.min_h = std::numeric_limits<double>::max();
    for (int i = 0; i < g.nx(); ++i) {
        G.h[i] = 1.0 + eps * zeta[i];
        G.min_h = std::min(G.min_h, G.h[i]);
    }
    if (G.min_h < h_min)
        throw DepthVanishes("build_geometry: min(1+eps*zeta) = " + std::to_string(G.min_h) +
                            " < h_min = " + std::to_string(h_min));

    G.sigma = VolumeField(g);
    G.dxsigma = VolumeField(g);
    G.dzsigma = VolumeField(g);
    for (int iz = 0; iz < g.nz(); ++iz) {
        const double zp1 = 1.0 + g.z(iz);
        for (int ix = 0; ix < g.nx(); ++ix) {
            G.sigma.at(ix, iz) = eps * zp1 * zeta[ix];
            G.dxsigma.at(ix, iz) = eps * zp1 * G.dxzeta[ix];
            G.dzsigma.at(ix, iz) = eps * zeta[ix];
        }
    }
    G.Nmu_x = (-eps * std::sqrt(mu)) * G.dxzeta;
    return G;
}

VolumeField sigma_derivative(const VolumeField& F, Axis axis, const GeometryCache& G) {
    const Grid& g = G.g();
    VolumeField dzF = dz(g, F);
    if (axis == Axis::Z) {
        for (int iz = 0; iz < g.nz(); ++iz)
            for (int ix = 0; ix < g.nx(); ++ix) dzF.at(ix, iz) /= G.h[ix];
        return dzF;
    }
    VolumeField out = dx(g, F);
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix)
            out.at(ix, iz) -= G.dxsigma.at(ix, iz) / G.h[ix] * dzF.at(ix, iz);
    return out;
}

VolumeField sigma_derivative_t(const VolumeField& dtF, const VolumeField& F,
                               const VolumeField& dtsigma, const GeometryCache& G) {
    const Grid& g = G.g();
    VolumeField dzF = dz(g, F);
    VolumeField out = dtF;
    for (int iz = 0; iz < g.nz(); ++iz)
        for (int ix = 0; ix < g.nx(); ++ix)
            out.at(ix, iz) -= dtsigma.at(ix, iz) / G.h[ix] * dzF.at(ix, iz);
    return out;
}

VectorVolumeField scaled_grad(const VolumeField& F, const GeometryCache& G) {
    const double smu = std::sqrt(G.mu);
    VectorVolumeField out;
    out.x = smu * sigma_derivative(F, Axis::X, G);
    out.y = VolumeField(F.nx, F.nz);
    out.z = sigma_derivative(F, Axis::Z, G);
    return out;
}

VolumeField scaled_div(const VectorVolumeField& U, const GeometryCache& G) {
    const double smu = std::sqrt(G.mu);
    VolumeField out = smu * sigma_derivative(U.x, Axis::X, G);
    VolumeField dzw = sigma_derivative(U.z, Axis::Z, G);
    for (size_t i = 0; i < out.v.size(); ++i) out.v[i] += dzw.v[i];
    return out;
}

VectorVolumeField scaled_curl(const VectorVolumeField& U, const GeometryCache& G) {
    const double smu = std::sqrt(G.mu);
    VectorVolumeField out;
    out.x = -1.0 * sigma_derivative(U.y, Axis::Z, G);
    out.y = sigma_derivative(U.x, Axis::Z, G) - smu * sigma_derivative(U.z, Axis::X, G);
    out.z = smu * sigma_derivative(U.y, Axis::X, G);
    return out;
}

SurfaceField trace(const VolumeField& F, Where where) {
    return row(F, where == Where::Surface ? 0 : F.nz - 1);
}

TangentialTrace tangential_trace(const VectorVolumeField& U, const GeometryCache& G) {
    TangentialTrace t;
    SurfaceField ws = trace(U.z, Where::Surface);
    t.x = trace(U.x, Where::Surface) + G.eps * (ws * G.dxzeta);
    t.y = trace(U.y, Where::Surface);
    return t;
}

SurfaceField good_unknown(const Grid& g, const SurfaceField& psi, const SurfaceField& zeta,
                          const SurfaceField& w_surf, int alpha, double eps) {
    if (alpha < 1) throw ConfigError("good_unknown: alpha must be >= 1");
    return dx_n(g, psi, alpha) - eps * (w_surf * dx_n(g, zeta, alpha));
}

VolumeField resample_straightened(const VolumeField& F, const Grid& g,
                                  const SurfaceField& zeta_old, const SurfaceField& zeta_new,
                                  double eps) {
    const int nx = g.nx(), nz = g.nz();
    VolumeField out(nx, nz);
    const auto& C = g.Cz();
    std::vector<double> col(nz), a(nz);
    for (int ix = 0; ix < nx; ++ix) {
        for (int iz = 0; iz < nz; ++iz) col[iz] = F.at(ix, iz);
        for (int k = 0; k < nz; ++k) {
            double s = 0.0;
            for (int j = 0; j < nz; ++j) s += C[static_cast<size_t>(k) * nz + j] * col[j];
            a[k] = s;
        }
        const double zo = zeta_old[ix], zn = zeta_new[ix];
        for (int iz = 0; iz < nz; ++iz) {
            double Z = g.z(iz) + eps * (1.0 + g.z(iz)) * zn;  // physical height
            double zhat = (Z - eps * zo) / (1.0 + eps * zo);
            out.at(ix, iz) = Grid::cheb_eval(a, zhat);
        }
    }
    return out;
}

VectorVolumeField resample_straightened(const VectorVolumeField& F, const Grid& g,
                                        const SurfaceField& zeta_old,
                                        const SurfaceField& zeta_new, double eps) {
    VectorVolumeField out;
    out.x = resample_straightened(F.x, g, zeta_old, zeta_new, eps);
    out.y = resample_straightened(F.y, g, zeta_old, zeta_new, eps);
    out.z = resample_straightened(F.z, g, zeta_old, zeta_new, eps);
    return out;
}

double integral_weighted(const VolumeField& F, const GeometryCache& G) {
    const Grid& g = G.g();
    double total = 0.0;
    const auto& w = g.zw();
    for (int iz = 0; iz < g.nz(); ++iz) {
        double rowsum = 0.0;
        for (int ix = 0; ix < g.nx(); ++ix) rowsum += F.at(ix, iz) * G.h[ix];
        total += w[iz] * rowsum;
    }
    return total * g.dx();
}

}  // namespace vws
