#pragma once

// The straightening diffeomorphism sigma = eps*(1+z)*zeta, sigma-derivatives,
// scaled gradients/divergence/curl, traces and good-unknown assembly on the
// dimensionless strip [0,Lx) x [-1,0].

#include "vws/spectral.hpp"

namespace vws {

struct GeometryCache {
    std::shared_ptr<const Grid> grid;
    double eps = 0.0;
    double mu = 0.0;
    double h_min = 0.0;

    SurfaceField zeta;
    SurfaceField dxzeta;
    SurfaceField h;        // 1 + eps*zeta
    VolumeField sigma;     // eps*(1+z)*zeta
    VolumeField dxsigma;   // eps*(1+z)*dx zeta
    VolumeField dzsigma;   // eps*zeta, constant in z
    SurfaceField Nmu_x;    // -eps*sqrt(mu)*dx zeta   (surface normal; z-component is 1)
    double min_h = 0.0;

    const Grid& g() const { return *grid; }
};

GeometryCache build_geometry(std::shared_ptr<const Grid> grid, const SurfaceField& zeta,
                             double eps, double mu, double h_min);

enum class Axis { X, Z };

// chain-rule derivatives: dx^sigma F = dx F - (dx sigma / (1+dz sigma)) dz F,
// dz^sigma F = dz F / (1+dz sigma)
VolumeField sigma_derivative(const VolumeField& F, Axis axis, const GeometryCache& G);
// time branch with caller-supplied dt sigma: dt^sigma F = dtF - (dtsigma/(1+dzsigma)) dz F
VolumeField sigma_derivative_t(const VolumeField& dtF, const VolumeField& F,
                               const VolumeField& dtsigma, const GeometryCache& G);

// scaled gradient (sqrt(mu) dx^sigma, 0, dz^sigma) F
VectorVolumeField scaled_grad(const VolumeField& F, const GeometryCache& G);
// scaled divergence sqrt(mu) dx^sigma Ux + dz^sigma Uz
VolumeField scaled_div(const VectorVolumeField& U, const GeometryCache& G);
// scaled curl (-dz^sigma Uy, dz^sigma Ux - sqrt(mu) dx^sigma Uz, sqrt(mu) dx^sigma Uy)
VectorVolumeField scaled_curl(const VectorVolumeField& U, const GeometryCache& G);

enum class Where { Surface, Bottom };
SurfaceField trace(const VolumeField& F, Where where);

// U_par for a velocity-convention field (V_x, V_y, w):
// (V_x|surf + eps*w|surf*dx zeta, V_y|surf)
struct TangentialTrace {
    SurfaceField x, y;
};
TangentialTrace tangential_trace(const VectorVolumeField& U, const GeometryCache& G);

// good unknown psi_(alpha) = dx^alpha psi - eps * w_surf * dx^alpha zeta
SurfaceField good_unknown(const Grid& g, const SurfaceField& psi, const SurfaceField& zeta,
                          const SurfaceField& w_surf, int alpha, double eps);

// volume quadrature with the Jacobian weight (1 + dz sigma)
double integral_weighted(const VolumeField& F, const GeometryCache& G);

// re-express a straightened field on the strip of a different surface: the
// value at physical height z + eps(1+z)zeta_new is looked up in the old
// straightening (column-wise Chebyshev interpolation)
VolumeField resample_straightened(const VolumeField& F, const Grid& g,
                                  const SurfaceField& zeta_old, const SurfaceField& zeta_new,
                                  double eps);
VectorVolumeField resample_straightened(const VectorVolumeField& F, const Grid& g,
                                        const SurfaceField& zeta_old,
                                        const SurfaceField& zeta_new, double eps);

}  // namespace vws
