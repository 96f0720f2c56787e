#pragma once

// Reconstruction of the divergence-free velocity from (zeta, psi, omega):
// the central div-curl boundary value problem on the straightened strip,
// plus the curl inverse and the projection onto sigma-divergence-free fields.

#include "vws/geometry.hpp"

#include <memory>

namespace vws {

struct SolveStats {
    int iterations = 0;
    double residual = 0.0;
};

struct DivCurlOptions {
    double krylov_tol = 1e-11;
    int max_iter = 400;
    double tol_div = 1e-8;    // relative sigma-divergence admissibility
    double tol_mean = 1e-12;  // zero-mode tolerance (relative to field scale)
};

// Variable-coefficient solver for div(P grad u) = f on the strip, with
// P = [[mu*h, -mu*sx], [-mu*sx, (1+mu*sx^2)/h]] (sx = dx sigma, h = 1+dz sigma).
// Preconditioned by the exact flat-surface per-Fourier-mode solve.
class EllipticSolver {
  public:
    enum class TopBC { Dirichlet, Conormal };
    enum class BottomBC { Neumann, Dirichlet };

    EllipticSolver(std::shared_ptr<const Grid> grid, double mu, TopBC top, BottomBC bottom);
    ~EllipticSolver();
    EllipticSolver(EllipticSolver&&) noexcept;
    EllipticSolver(const EllipticSolver&) = delete;
    EllipticSolver& operator=(const EllipticSolver&) = delete;

    // f is the interior right-hand side; g_top / g_bot the boundary data rows.
    VolumeField solve(const GeometryCache& G, const VolumeField& f, const SurfaceField& g_top,
                      const SurfaceField& g_bot, double tol, int max_iter,
                      const VolumeField* guess = nullptr, SolveStats* stats = nullptr) const;

    VolumeField apply_operator(const GeometryCache& G, const VolumeField& u) const;

  private:
    struct Impl;
    std::unique_ptr<Impl> impl_;
};

struct DivCurlWorkspace {
    std::shared_ptr<const Grid> grid;
    double mu;
    EllipticSolver potential;  // Dirichlet top, conormal-Neumann bottom
    EllipticSolver stream;     // oblique (conormal) top, Dirichlet bottom
    EllipticSolver dirichlet;  // Dirichlet top and bottom (gauge corrections)

    DivCurlWorkspace(std::shared_ptr<const Grid> g, double mu_);
};

struct ResidualReport {
    double curl = 0.0;               // max |scaled_curl U^mu - mu omega|
    double div = 0.0;                // max |scaled_div U^mu|
    double surface_identity = 0.0;   // max |omega_s . N^mu - dx Vy_s|
    double bottom_identity = 0.0;    // max |omega_b . N_b - dx Vy_b|
    double bottom_w = 0.0;           // max |w(z=-1)|
    double transverse_defect = 0.0;  // max |dx^sigma Vy - omega_3|
    SolveStats potential_stats, stream_stats;
};

struct DivCurlSolution {
    VectorVolumeField U;      // velocity storage convention (V_x, V_y, w)
    VolumeField phi;          // scalar potential of the irrotational part
    VectorVolumeField U_rot;  // rotational part, same storage convention
    VolumeField A2;           // streamfunction of the in-plane rotational part
    SurfaceField tpsi;        // tilde psi
    SurfaceField Vx_s, Vy_s, w_s;  // surface traces
    SurfaceField Vx_b, Vy_b, w_b;  // bottom traces
    SurfaceField Upar_x, Upar_y;   // tangential trace U_par
    ResidualReport resid;
};

// surface trace of omega dotted with N^mu = (-eps*sqrt(mu)*dx zeta, 0, 1)
SurfaceField omega_dot_Nmu_surface(const VectorVolumeField& omega, const GeometryCache& G);
// bottom trace of omega dotted with N_b = e_z
SurfaceField omega_dot_Nb_bottom(const VectorVolumeField& omega);

// relative sigma-divergence residual of a vector field
double divergence_residual(const VectorVolumeField& omega, const GeometryCache& G);

// solution of Delta tpsi = omega_s . N^mu (mean-zero)
SurfaceField solve_tilde_psi(const VectorVolumeField& omega, const GeometryCache& G,
                             double tol_mean = 1e-12);

// potential part: div(P grad phi) = 0, phi|surf = psi, conormal-zero bottom
VolumeField solve_potential(const DivCurlWorkspace& ws, const GeometryCache& G,
                            const SurfaceField& psi, double tol, SolveStats* stats = nullptr,
                            const VolumeField* guess = nullptr);

// rotational part for given vorticity and surface data tpsi
struct RotationalPart {
    VectorVolumeField U_rot;
    VolumeField A2;
    double transverse_defect = 0.0;
    SolveStats stats;
};
RotationalPart solve_rotational(const DivCurlWorkspace& ws, const GeometryCache& G,
                                const VectorVolumeField& omega, const SurfaceField& tpsi,
                                double tol, const VolumeField* guess = nullptr);

DivCurlSolution reconstruct_velocity(const DivCurlWorkspace& ws, const GeometryCache& G,
                                     const SurfaceField& psi, const VectorVolumeField& omega,
                                     const DivCurlOptions& opts = {},
                                     const DivCurlSolution* warm = nullptr);

// (1/mu) U^mu_surf . N^mu = -eps dx(zeta) Vx_s + w_s / mu
SurfaceField generalized_DN(const DivCurlSolution& sol, const GeometryCache& G);

// right inverse of scaled_curl on admissible fields (scaled_div C = 0,
// C_3(z=-1) = 0): returns B with scaled_curl B = C, scaled_div B = 0, B_b = 0.
struct CurlInverse {
    VectorVolumeField B;
    SurfaceField tpsi;
    double curl_residual = 0.0;
    double bottom_trace = 0.0;
    SolveStats stats;
};
CurlInverse curl_inverse(const DivCurlWorkspace& ws, const GeometryCache& G,
                         const VectorVolumeField& C, const DivCurlOptions& opts = {});

// curl inverse in the gradient gauge: same curl and divergence, but the
// bottom tangential trace is removed (harmonic in-plane correction plus
// zero-mode shifts) so that the field pairs exactly as a variational
// derivative on the periodic strip
CurlInverse curl_inverse_gradient_gauge(const DivCurlWorkspace& ws, const GeometryCache& G,
                                        const VectorVolumeField& C,
                                        const DivCurlOptions& opts = {});

// projection onto sigma-divergence-free fields: omega - scaled_grad(phi)
VectorVolumeField project_div_free(const DivCurlWorkspace& ws, const GeometryCache& G,
                                   const VectorVolumeField& omega, const DivCurlOptions& opts = {},
                                   SolveStats* stats = nullptr);

// potential and kinetic energy of a reconstructed state:
// E_pot = 1/2 int zeta^2 dx,  E_kin = 1/(2 mu) int |U^mu|^2 (1+dz sigma) dz dx
struct EnergyParts {
    double potential = 0.0;
    double kinetic = 0.0;
    double total() const { return potential + kinetic; }
};
EnergyParts energy_parts(const DivCurlSolution& sol, const GeometryCache& G);

}  // namespace vws
