#pragma once

// Discrete function spaces on the periodic-x / Chebyshev-z strip, Fourier
// multipliers, Hodge projectors, vertical harmonic extensions and filtering.

#include <complex>
#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace vws {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

struct Error : std::runtime_error {
    explicit Error(const std::string& msg) : std::runtime_error(msg) {}
};
struct MeanNotZero : Error {
    explicit MeanNotZero(const std::string& msg) : Error(msg) {}
};
struct NonFiniteSymbol : Error {
    explicit NonFiniteSymbol(const std::string& msg) : Error(msg) {}
};
struct NonFiniteField : Error {
    explicit NonFiniteField(const std::string& msg) : Error(msg) {}
};
struct DepthVanishes : Error {
    explicit DepthVanishes(const std::string& msg) : Error(msg) {}
};
struct KrylovNoConvergence : Error {
    KrylovNoConvergence(const std::string& msg, int iters, double resid)
        : Error(msg), iterations(iters), residual(resid) {}
    int iterations;
    double residual;
};
struct NotDivergenceFree : Error {
    explicit NotDivergenceFree(const std::string& msg) : Error(msg) {}
};
struct BottomFluxNotZero : Error {
    explicit BottomFluxNotZero(const std::string& msg) : Error(msg) {}
};
struct RayleighTaylorViolated : Error {
    explicit RayleighTaylorViolated(const std::string& msg) : Error(msg) {}
};
struct InadmissibleDirection : Error {
    explicit InadmissibleDirection(const std::string& msg) : Error(msg) {}
};
struct ConfigError : Error {
    explicit ConfigError(const std::string& msg) : Error(msg) {}
};

// ---------------------------------------------------------------------------
// Grid: uniform periodic x-grid of nx points, Chebyshev-Gauss-Lobatto z-grid
// of nz nodes on [-1,0] with z(0) = 0 (surface) and z(nz-1) = -1 (bottom).
// ---------------------------------------------------------------------------

class Grid {
  public:
    Grid(int nx, int nz, double Lx);

    int nx() const { return nx_; }
    int nz() const { return nz_; }
    double Lx() const { return Lx_; }
    double dx() const { return Lx_ / nx_; }

    double x(int i) const { return Lx_ * i / nx_; }
    double z(int m) const { return z_[m]; }
    const std::vector<double>& zs() const { return z_; }

    // wavenumber of half-spectrum index j = 0 .. nx/2
    double k(int j) const { return 2.0 * M_PI * j / Lx_; }
    int nk() const { return nx_ / 2 + 1; }
    double kmax() const { return k(nx_ / 2); }

    // dense Chebyshev differentiation matrix for d/dz on [-1,0], row-major nz*nz
    const std::vector<double>& Dz() const { return Dz_; }
    // Clenshaw-Curtis weights for integral over z in [-1,0]
    const std::vector<double>& zw() const { return zw_; }
    // antiderivative matrix Az (row-major nz*nz): (Az f)(z) = int_0^z f dz',
    // exact for polynomial interpolants
    const std::vector<double>& Az() const { return Az_; }
    // Chebyshev analysis matrix: coefficients a_k = sum_j Cz[k*nz+j] f(z_j)
    const std::vector<double>& Cz() const { return Cz_; }
    // evaluate the interpolant with coefficients a at an arbitrary z in [-1,0]
    static double cheb_eval(const std::vector<double>& a, double z);

    // minimum collocation spacing in z (near the boundaries)
    double dz_min() const { return dz_min_; }

  private:
    int nx_;
    int nz_;
    double Lx_;
    std::vector<double> z_;
    std::vector<double> Dz_;
    std::vector<double> zw_;
    std::vector<double> Az_;
    std::vector<double> Cz_;
    double dz_min_;
};

// ---------------------------------------------------------------------------
// Fields
// ---------------------------------------------------------------------------

struct SurfaceField {
    std::vector<double> v;

    SurfaceField() = default;
    explicit SurfaceField(int nx, double fill = 0.0) : v(nx, fill) {}
    int size() const { return static_cast<int>(v.size()); }
    double& operator[](int i) { return v[i]; }
    double operator[](int i) const { return v[i]; }
};

// values stored x-fastest: v[iz*nx + ix]
struct VolumeField {
    int nx = 0, nz = 0;
    std::vector<double> v;

    VolumeField() = default;
    VolumeField(int nx_, int nz_, double fill = 0.0)
        : nx(nx_), nz(nz_), v(static_cast<size_t>(nx_) * nz_, fill) {}
    explicit VolumeField(const Grid& g, double fill = 0.0) : VolumeField(g.nx(), g.nz(), fill) {}
    double& at(int ix, int iz) { return v[static_cast<size_t>(iz) * nx + ix]; }
    double at(int ix, int iz) const { return v[static_cast<size_t>(iz) * nx + ix]; }
};

struct VectorVolumeField {
    VolumeField x, y, z;

    VectorVolumeField() = default;
    explicit VectorVolumeField(const Grid& g) : x(g), y(g), z(g) {}
};

// ---------------------------------------------------------------------------
// Elementwise helpers
// ---------------------------------------------------------------------------

SurfaceField operator+(const SurfaceField& a, const SurfaceField& b);
SurfaceField operator-(const SurfaceField& a, const SurfaceField& b);
SurfaceField operator*(double a, const SurfaceField& b);
SurfaceField operator*(const SurfaceField& a, const SurfaceField& b);
VolumeField operator+(const VolumeField& a, const VolumeField& b);
VolumeField operator-(const VolumeField& a, const VolumeField& b);
VolumeField operator*(double a, const VolumeField& b);
VolumeField operator*(const VolumeField& a, const VolumeField& b);
VectorVolumeField operator+(const VectorVolumeField& a, const VectorVolumeField& b);
VectorVolumeField operator-(const VectorVolumeField& a, const VectorVolumeField& b);
VectorVolumeField operator*(double a, const VectorVolumeField& b);

void axpy(double a, const SurfaceField& x, SurfaceField& y);
void axpy(double a, const VolumeField& x, VolumeField& y);
void axpy(double a, const VectorVolumeField& x, VectorVolumeField& y);

double max_abs(const SurfaceField& f);
double max_abs(const VolumeField& f);
double max_abs(const VectorVolumeField& f);
bool finite(const SurfaceField& f);
bool finite(const VolumeField& f);

// ---------------------------------------------------------------------------
// Fourier transforms in x (normalized so that f(x) = sum_j c_j e^{i k_j x})
// ---------------------------------------------------------------------------

std::vector<Complex> spectrum(const Grid& g, const SurfaceField& f);
SurfaceField from_spectrum(const Grid& g, const std::vector<Complex>& c);

double mean(const Grid& g, const SurfaceField& f);
// trapezoid quadrature on the periodic grid (exact for trig polynomials)
double integral_x(const Grid& g, const SurfaceField& f);
double l2_norm_x(const Grid& g, const SurfaceField& f);      // sqrt(int f^2 dx)
double inner_x(const Grid& g, const SurfaceField& a, const SurfaceField& b);

// Fourier multiplier m(k) applied mode-wise.  Symbols are functions of the
// signed wavenumber; they may be complex (e.g. ik).  If `singular`, the input
// must be mean-zero up to tol_mean * scale and the output zero mode is 0.
// At the Nyquist mode only the real part of the symbol is applied.
SurfaceField apply_multiplier(const Grid& g, const SurfaceField& f,
                              const std::function<Complex(double)>& symbol,
                              bool singular = false, double tol_mean = 1e-12);
VolumeField apply_multiplier(const Grid& g, const VolumeField& f,
                             const std::function<Complex(double)>& symbol,
                             bool singular = false, double tol_mean = 1e-12);

SurfaceField dx(const Grid& g, const SurfaceField& f);
VolumeField dx(const Grid& g, const VolumeField& f);
SurfaceField dx_n(const Grid& g, const SurfaceField& f, int order);
// inverse derivative: mean-zero antiderivative in x (zero mode dropped)
SurfaceField inv_dx(const Grid& g, const SurfaceField& f, double tol_mean = 1e-12);
// inverse Laplacian in x (d=1): multiplier -1/k^2, zero mode dropped
SurfaceField inv_laplace(const Grid& g, const SurfaceField& f, double tol_mean = 1e-12);

// P multiplier |k| / (1+sqrt(mu)|k|)^{1/2} weighting surface norms
SurfaceField p_multiplier(const Grid& g, const SurfaceField& f, double mu);
// H_0^{-1/2} weight (1+sqrt(mu)|k|)^{1/2} / |k| on mean-zero fields
SurfaceField h0m_weight(const Grid& g, const SurfaceField& f, double mu,
                        double tol_mean = 1e-12);

// Hodge decomposition of a horizontal pair (d=1): gradient part, orthogonal
// part and the constant remainder (mean_x, mean_y).
struct HodgeParts {
    SurfaceField grad_x, grad_y;
    SurfaceField orth_x, orth_y;
    double mean_x = 0.0, mean_y = 0.0;
};
HodgeParts hodge_project(const Grid& g, const SurfaceField& fx, const SurfaceField& fy);

// ---------------------------------------------------------------------------
// Vertical harmonic extensions: multiplier families evaluated at each level
// ---------------------------------------------------------------------------

enum class ExtensionKind {
    CoshNeumannBottom,  // cosh((z+1) sqrt(mu)|k|) / cosh(sqrt(mu)|k|)
    SinhZeroBottom      // sinh((z+1) sqrt(mu)|k|) / sinh(sqrt(mu)|k|), mean-zero input
};
VolumeField harmonic_extension(const Grid& g, const SurfaceField& v, ExtensionKind kind,
                               double mu, double tol_mean = 1e-12);

// ---------------------------------------------------------------------------
// Dealiasing: 2/3-rule truncation plus exponential filter exp(-alpha (|k|/kmax)^p)
// ---------------------------------------------------------------------------

struct FilterSpec {
    bool enabled = true;
    double alpha = 36.0;
    double p = 16.0;
};
SurfaceField dealias(const Grid& g, const SurfaceField& f, const FilterSpec& spec = {});
VolumeField dealias(const Grid& g, const VolumeField& f, const FilterSpec& spec = {});
VectorVolumeField dealias(const Grid& g, const VectorVolumeField& f, const FilterSpec& spec = {});

// ---------------------------------------------------------------------------
// Chebyshev operations in z
// ---------------------------------------------------------------------------

VolumeField dz(const Grid& g, const VolumeField& f);
// (z-antiderivative from the surface): F(x,z) = int_0^z f(x,z') dz'
VolumeField z_antiderivative_from_surface(const Grid& g, const VolumeField& f);
// Clenshaw-Curtis integral over z, per x: returns int_{-1}^0 f dz
SurfaceField z_integral(const Grid& g, const VolumeField& f);

SurfaceField row(const VolumeField& f, int iz);
void set_row(VolumeField& f, int iz, const SurfaceField& s);

// flat-strip volume quadrature int_S f dz dx (no Jacobian weight)
double integral_volume(const Grid& g, const VolumeField& f);

// Sobolev-type surface norm: |f|_{H^N}^2 = sum_{m<=N} |d^m f|_2^2
double sobolev_sq_x(const Grid& g, const SurfaceField& f, int N);

}  // namespace vws
