#include "vws/spectral.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <map>
#include <mutex>

namespace vws {

// ---------------------------------------------------------------------------
// Grid construction
// ---------------------------------------------------------------------------

namespace {

// Chebyshev-Gauss-Lobatto differentiation matrix on [-1,1], nodes
// s_j = cos(pi j / N) in descending order (Trefethen, Spectral Methods in
// MATLAB, cheb.m).
std::vector<double> cheb_matrix(int n) {
    const int N = n - 1;
    std::vector<double> D(static_cast<size_t>(n) * n, 0.0);
    if (N == 0) return D;
    std::vector<double> s(n), c(n);
    for (int j = 0; j <= N; ++j) {
        s[j] = std::cos(M_PI * j / N);
        c[j] = (j == 0 || j == N) ? 2.0 : 1.0;
        if (j % 2 == 1) c[j] = -c[j];
    }
    for (int i = 0; i <= N; ++i) {
        double rowsum = 0.0;
        for (int j = 0; j <= N; ++j) {
            if (i != j) {
                double d = (c[i] / c[j]) / (s[i] - s[j]);
                D[static_cast<size_t>(i) * n + j] = d;
                rowsum += d;
            }
        }
        // negative-sum trick for the diagonal
        D[static_cast<size_t>(i) * n + i] = -rowsum;
    }
    return D;
}

// Clenshaw-Curtis weights on [-1,1] for the CGL nodes above.
std::vector<double> cc_weights(int n) {
    const int N = n - 1;
    std::vector<double> w(n, 0.0);
    if (N == 0) {
        w[0] = 2.0;
        return w;
    }
    for (int j = 0; j <= N; ++j) {
        double theta = M_PI * j / N;
        double sum = 0.0;
        for (int m = 1; m <= N / 2; ++m) {
            double b = (2 * m == N) ? 1.0 : 2.0;
            sum += b * std::cos(2.0 * m * theta) / (4.0 * m * m - 1.0);
        }
        double wj = 1.0 - sum;
        double cj = (j == 0 || j == N) ? 1.0 : 2.0;
        w[j] = cj * wj / N;
    }
    return w;
}

}  // namespace

double Grid::cheb_eval(const std::vector<double>& a, double z) {
    // Clenshaw recurrence on s = 2z + 1
    const double sarg = 2.0 * z + 1.0;
    double b1 = 0.0, b2 = 0.0;
    for (int k = static_cast<int>(a.size()) - 1; k >= 1; --k) {
        double b0 = 2.0 * sarg * b1 - b2 + a[k];
        b2 = b1;
        b1 = b0;
    }
    return sarg * b1 - b2 + a[0];
}

Grid::Grid(int nx, int nz, double Lx) : nx_(nx), nz_(nz), Lx_(Lx) {
    if (nx < 8 || nx % 2 != 0) throw ConfigError("Grid: nx must be even and >= 8");
    if (nz < 5) throw ConfigError("Grid: nz must be >= 5");
    if (!(Lx > 0.0)) throw ConfigError("Grid: Lx must be positive");

    const int N = nz - 1;
    z_.resize(nz);
    for (int j = 0; j <= N; ++j) z_[j] = 0.5 * (std::cos(M_PI * j / N) - 1.0);
    z_[0] = 0.0;
    z_[N] = -1.0;

    // d/dz = 2 d/ds under z = (s-1)/2
    Dz_ = cheb_matrix(nz);
    for (auto& d : Dz_) d *= 2.0;

    // integral over [-1,0] in z = half the [-1,1] weights
    zw_ = cc_weights(nz);
    for (auto& w : zw_) w *= 0.5;

    // Antiderivative matrix: spectral integration through Chebyshev
    // coefficients.  For each cardinal basis column e_j, compute
    // (int_0^z e_j dz') at all nodes.
    Az_.assign(static_cast<size_t>(nz) * nz, 0.0);
    // coefficient analysis matrix: a_k = (2/(N c_k)) sum_j'' v_j cos(pi k j/N)
    Cz_.resize(static_cast<size_t>(nz) * nz);
    for (int kk = 0; kk <= N; ++kk) {
        double ck = (kk == 0 || kk == N) ? 2.0 : 1.0;
        for (int j = 0; j <= N; ++j) {
            double cj = (j == 0 || j == N) ? 2.0 : 1.0;
            Cz_[static_cast<size_t>(kk) * nz + j] =
                (2.0 / (N * ck * cj)) * std::cos(M_PI * kk * j / N);
        }
    }
    const std::vector<double>& C = Cz_;
    std::vector<double> a(nz), b(nz + 1);
    for (int col = 0; col < nz; ++col) {
        for (int kk = 0; kk < nz; ++kk) a[kk] = C[static_cast<size_t>(kk) * nz + col];
        // antiderivative coefficients in s on [-1,1]
        std::fill(b.begin(), b.end(), 0.0);
        for (int kk = 1; kk <= N; ++kk) {
            double am1 = a[kk - 1] * ((kk - 1 == 0) ? 2.0 : 1.0);
            double ap1 = (kk + 1 <= N) ? a[kk + 1] : 0.0;
            b[kk] = (am1 - ap1) / (2.0 * kk);
        }
        // z-antiderivative = s-antiderivative / 2; fix constant so F(z=0)=0
        double surf = 0.0;
        for (int kk = 1; kk <= N; ++kk) surf += b[kk];
        for (int row_i = 0; row_i < nz; ++row_i) {
            double si = std::cos(M_PI * row_i / N);
            // Chebyshev evaluation via recurrence
            double Tm1 = 1.0, T0 = si, val = 0.0;
            for (int kk = 1; kk <= N; ++kk) {
                double Tk = (kk == 1) ? si : 2.0 * si * T0 - Tm1;
                if (kk > 1) {
                    Tm1 = T0;
                    T0 = Tk;
                }
                val += b[kk] * Tk;
            }
            Az_[static_cast<size_t>(row_i) * nz + col] = 0.5 * (val - surf);
        }
    }

    dz_min_ = 1.0;
    for (int m = 0; m + 1 < nz; ++m) dz_min_ = std::min(dz_min_, z_[m] - z_[m + 1]);
}

// ---------------------------------------------------------------------------
// Elementwise helpers
// ---------------------------------------------------------------------------

namespace {
template <class F>
F binary_op(const F& a, const F& b, double sign) {
    F r = a;
    for (size_t i = 0; i < r.v.size(); ++i) r.v[i] += sign * b.v[i];
    return r;
}
}  // namespace

SurfaceField operator+(const SurfaceField& a, const SurfaceField& b) { return binary_op(a, b, 1.0); }
SurfaceField operator-(const SurfaceField& a, const SurfaceField& b) { return binary_op(a, b, -1.0); }
SurfaceField operator*(double a, const SurfaceField& b) {
    SurfaceField r = b;
    for (auto& x : r.v) x *= a;
    return r;
}
SurfaceField operator*(const SurfaceField& a, const SurfaceField& b) {
    SurfaceField r = a;
    for (size_t i = 0; i < r.v.size(); ++i) r.v[i] *= b.v[i];
    return r;
}
VolumeField operator+(const VolumeField& a, const VolumeField& b) { return binary_op(a, b, 1.0); }
VolumeField operator-(const VolumeField& a, const VolumeField& b) { return binary_op(a, b, -1.0); }
VolumeField operator*(double a, const VolumeField& b) {
    VolumeField r = b;
    for (auto& x : r.v) x *= a;
    return r;
}
VolumeField operator*(const VolumeField& a, const VolumeField& b) {
    VolumeField r = a;
    for (size_t i = 0; i < r.v.size(); ++i) r.v[i] *= b.v[i];
    return r;
}
VectorVolumeField operator+(const VectorVolumeField& a, const VectorVolumeField& b) {
    VectorVolumeField r;
    r.x = a.x + b.x;
    r.y = a.y + b.y;
    r.z = a.z + b.z;
    return r;
}
VectorVolumeField operator-(const VectorVolumeField& a, const VectorVolumeField& b) {
    VectorVolumeField r;
    r.x = a.x - b.x;
    r.y = a.y - b.y;
    r.z = a.z - b.z;
    return r;
}
VectorVolumeField operator*(double a, const VectorVolumeField& b) {
    VectorVolumeField r;
    r.x = a * b.x;
    r.y = a * b.y;
    r.z = a * b.z;
    return r;
}

void axpy(double a, const SurfaceField& x, SurfaceField& y) {
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}
void axpy(double a, const VolumeField& x, VolumeField& y) {
    for (size_t i = 0; i < y.v.size(); ++i) y.v[i] += a * x.v[i];
}
void axpy(double a, const VectorVolumeField& x, VectorVolumeField& y) {
    axpy(a, x.x, y.x);
    axpy(a, x.y, y.y);
    axpy(a, x.z, y.z);
}

double max_abs(const SurfaceField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}
double max_abs(const VolumeField& f) {
    double m = 0.0;
    for (double x : f.v) m = std::max(m, std::abs(x));
    return m;
}
double max_abs(const VectorVolumeField& f) {
    return std::max({max_abs(f.x), max_abs(f.y), max_abs(f.z)});
}
bool finite(const SurfaceField& f) {
    for (double x : f.v)
        if (!std::isfinite(x)) return false;
    return true;
}
bool finite(const VolumeField& f) {
    for (double x : f.v)
        if (!std::isfinite(x)) return false;
    return true;
}

// ---------------------------------------------------------------------------
// FFT plumbing.  Plans are cached per thread and per size; plan creation is
// serialized (the FFTW planner is not thread-safe).
// ---------------------------------------------------------------------------

namespace {

std::mutex planner_mutex;

struct PlanSet {
    int nx = 0;
    double* rbuf = nullptr;
    fftw_complex* cbuf = nullptr;
    fftw_plan fwd = nullptr;
    fftw_plan bwd = nullptr;

    explicit PlanSet(int n) : nx(n) {
        std::lock_guard<std::mutex> lock(planner_mutex);
        rbuf = fftw_alloc_real(n);
        cbuf = fftw_alloc_complex(n / 2 + 1);
        fwd = fftw_plan_dft_r2c_1d(n, rbuf, cbuf, FFTW_ESTIMATE);
        bwd = fftw_plan_dft_c2r_1d(n, cbuf, rbuf, FFTW_ESTIMATE);
    }
    ~PlanSet() {
        std::lock_guard<std::mutex> lock(planner_mutex);
        fftw_destroy_plan(fwd);
        fftw_destroy_plan(bwd);
        fftw_free(rbuf);
        fftw_free(cbuf);
    }
    PlanSet(const PlanSet&) = delete;
    PlanSet& operator=(const PlanSet&) = delete;
};

PlanSet& plans_for(int nx) {
    thread_local std::map<int, std::unique_ptr<PlanSet>> cache;
    auto it = cache.find(nx);
    if (it == cache.end()) it = cache.emplace(nx, std::make_unique<PlanSet>(nx)).first;
    return *it->second;
}

void forward(const Grid& g, const double* data, std::vector<Complex>& out) {
    PlanSet& p = plans_for(g.nx());
    std::memcpy(p.rbuf, data, sizeof(double) * g.nx());
    fftw_execute(p.fwd);
    const int nk = g.nk();
    out.resize(nk);
    const double scale = 1.0 / g.nx();
    for (int j = 0; j < nk; ++j) out[j] = Complex(p.cbuf[j][0] * scale, p.cbuf[j][1] * scale);
}

void backward(const Grid& g, const std::vector<Complex>& c, double* data) {
    PlanSet& p = plans_for(g.nx());
    const int nk = g.nk();
    for (int j = 0; j < nk; ++j) {
        p.cbuf[j][0] = c[j].real();
        p.cbuf[j][1] = c[j].imag();
    }
    fftw_execute(p.bwd);
    std::memcpy(data, p.rbuf, sizeof(double) * g.nx());
}

}  // namespace

std::vector<Complex> spectrum(const Grid& g, const SurfaceField& f) {
    std::vector<Complex> c;
    forward(g, f.v.data(), c);
    return c;
}

SurfaceField from_spectrum(const Grid& g, const std::vector<Complex>& c) {
    SurfaceField f(g.nx());
    backward(g, c, f.v.data());
    return f;
}

double mean(const Grid& g, const SurfaceField& f) {
    double s = 0.0;
    for (double x : f.v) s += x;
    return s / g.nx();
}

double integral_x(const Grid& g, const SurfaceField& f) { return mean(g, f) * g.Lx(); }

double inner_x(const Grid& g, const SurfaceField& a, const SurfaceField& b) {
    double s = 0.0;
    for (int i = 0; i < g.nx(); ++i) s += a[i] * b[i];
    return s * g.dx();
}

double l2_norm_x(const Grid& g, const SurfaceField& f) { return std::sqrt(inner_x(g, f, f)); }

// ---------------------------------------------------------------------------
// Multipliers
// ---------------------------------------------------------------------------

namespace {

void apply_symbol_spectrum(const Grid& g, std::vector<Complex>& c,
                           const std::function<Complex(double)>& symbol, bool singular,
                           double tol_mean, double scale) {
    const int nk = g.nk();
    if (singular) {
        if (std::abs(c[0]) > tol_mean * std::max(1.0, scale))
            throw MeanNotZero("singular multiplier applied to non-mean-zero field (|mean| = " +
                              std::to_string(std::abs(c[0])) + ")");
        c[0] = 0.0;
    } else {
        Complex m0 = symbol(0.0);
        if (!std::isfinite(m0.real()) || !std::isfinite(m0.imag()))
            throw NonFiniteSymbol("symbol not finite at k = 0");
        c[0] *= m0;
    }
    for (int j = 1; j < nk; ++j) {
        Complex m = symbol(g.k(j));
        if (!std::isfinite(m.real()) || !std::isfinite(m.imag()))
            throw NonFiniteSymbol("symbol not finite at k = " + std::to_string(g.k(j)));
        // Nyquist: keep the mode real for real fields
        if (j == g.nx() / 2) m = Complex(m.real(), 0.0);
        c[j] *= m;
    }
}

}  // namespace

SurfaceField apply_multiplier(const Grid& g, const SurfaceField& f,
                              const std::function<Complex(double)>& symbol, bool singular,
                              double tol_mean) {
    auto c = spectrum(g, f);
    apply_symbol_spectrum(g, c, symbol, singular, tol_mean, max_abs(f));
    return from_spectrum(g, c);
}

VolumeField apply_multiplier(const Grid& g, const VolumeField& f,
                             const std::function<Complex(double)>& symbol, bool singular,
                             double tol_mean) {
    VolumeField out(f.nx, f.nz);
    std::vector<Complex> c;
    const double scale = max_abs(f);
    for (int iz = 0; iz < f.nz; ++iz) {
        forward(g, &f.v[static_cast<size_t>(iz) * f.nx], c);
        apply_symbol_spectrum(g, c, symbol, singular, tol_mean, scale);
        backward(g, c, &out.v[static_cast<size_t>(iz) * f.nx]);
    }
    return out;
}

SurfaceField dx(const Grid& g, const SurfaceField& f) {
    return apply_multiplier(g, f, [](double k) { return Complex(0.0, k); });
}

VolumeField dx(const Grid& g, const VolumeField& f) {
    return apply_multiplier(g, f, [](double k) { return Complex(0.0, k); });
}

SurfaceField dx_n(const Grid& g, const SurfaceField& f, int order) {
    auto c = spectrum(g, f);
    const int nk = g.nk();
    for (int j = 0; j < nk; ++j) {
        Complex ik(0.0, g.k(j));
        Complex m = std::pow(ik, order);
        if (j == g.nx() / 2) m = Complex(m.real(), 0.0);
        c[j] *= m;
    }
    return from_spectrum(g, c);
}

SurfaceField inv_dx(const Grid& g, const SurfaceField& f, double tol_mean) {
    return apply_multiplier(
        g, f, [](double k) { return Complex(0.0, -1.0 / k); }, true, tol_mean);
}

SurfaceField inv_laplace(const Grid& g, const SurfaceField& f, double tol_mean) {
    return apply_multiplier(
        g, f, [](double k) { return Complex(-1.0 / (k * k), 0.0); }, true, tol_mean);
}

SurfaceField p_multiplier(const Grid& g, const SurfaceField& f, double mu) {
    const double smu = std::sqrt(mu);
    return apply_multiplier(g, f, [smu](double k) {
        double ak = std::abs(k);
        return Complex(ak / std::sqrt(1.0 + smu * ak), 0.0);
    });
}

SurfaceField h0m_weight(const Grid& g, const SurfaceField& f, double mu, double tol_mean) {
    const double smu = std::sqrt(mu);
    return apply_multiplier(
        g, f,
        [smu](double k) {
            double ak = std::abs(k);
            return Complex(std::sqrt(1.0 + smu * ak) / ak, 0.0);
        },
        true, tol_mean);
}

HodgeParts hodge_project(const Grid& g, const SurfaceField& fx, const SurfaceField& fy) {
    if (!finite(fx) || !finite(fy)) throw NonFiniteField("hodge_project: non-finite input");
    HodgeParts parts;
    parts.mean_x = mean(g, fx);
    parts.mean_y = mean(g, fy);
    parts.grad_x = fx;
    for (auto& v : parts.grad_x.v) v -= parts.mean_x;
    parts.grad_y = SurfaceField(g.nx());
    parts.orth_x = SurfaceField(g.nx());
    parts.orth_y = fy;
    for (auto& v : parts.orth_y.v) v -= parts.mean_y;
    return parts;
}

// ---------------------------------------------------------------------------
// Harmonic extensions
// ---------------------------------------------------------------------------

VolumeField harmonic_extension(const Grid& g, const SurfaceField& v, ExtensionKind kind,
                               double mu, double tol_mean) {
    if (!(mu > 0.0)) throw ConfigError("harmonic_extension: mu must be positive");
    auto c = spectrum(g, v);
    const double smu = std::sqrt(mu);
    const int nk = g.nk();
    VolumeField out(g);
    std::vector<Complex> level(nk);
    if (kind == ExtensionKind::SinhZeroBottom) {
        if (std::abs(c[0]) > tol_mean * std::max(1.0, max_abs(v)))
            throw MeanNotZero("sinh extension requires a mean-zero trace");
        c[0] = 0.0;
    }
    for (int iz = 0; iz < g.nz(); ++iz) {
        const double zp1 = g.z(iz) + 1.0;
        for (int j = 0; j < nk; ++j) {
            double s = smu * g.k(j);
            double f;
            if (kind == ExtensionKind::CoshNeumannBottom) {
                // cosh(s(z+1))/cosh(s), evaluated in exponential form
                f = (j == 0) ? 1.0
                             : std::exp(s * (zp1 - 1.0)) * (1.0 + std::exp(-2.0 * s * zp1)) /
                                   (1.0 + std::exp(-2.0 * s));
            } else {
                f = (j == 0) ? 0.0
                             : std::exp(s * (zp1 - 1.0)) * (1.0 - std::exp(-2.0 * s * zp1)) /
                                   (1.0 - std::exp(-2.0 * s));
            }
            level[j] = c[j] * f;
        }
        backward(g, level, &out.v[static_cast<size_t>(iz) * g.nx()]);
    }
    return out;
}

// ---------------------------------------------------------------------------
// Dealiasing
// ---------------------------------------------------------------------------

namespace {
void dealias_spectrum(const Grid& g, std::vector<Complex>& c, const FilterSpec& spec) {
    const int nk = g.nk();
    const int cutoff = g.nx() / 3;
    const double kmax = g.kmax();
    for (int j = 0; j < nk; ++j) {
        if (j > cutoff) {
            c[j] = 0.0;
        } else if (spec.alpha > 0.0) {
            double r = g.k(j) / kmax;
            c[j] *= std::exp(-spec.alpha * std::pow(r, spec.p));
        }
    }
}
}  // namespace

SurfaceField dealias(const Grid& g, const SurfaceField& f, const FilterSpec& spec) {
    if (!spec.enabled) return f;
    auto c = spectrum(g, f);
    dealias_spectrum(g, c, spec);
    return from_spectrum(g, c);
}

VolumeField dealias(const Grid& g, const VolumeField& f, const FilterSpec& spec) {
    if (!spec.enabled) return f;
    VolumeField out(f.nx, f.nz);
    std::vector<Complex> c;
    for (int iz = 0; iz < f.nz; ++iz) {
        forward(g, &f.v[static_cast<size_t>(iz) * f.nx], c);
        dealias_spectrum(g, c, spec);
        backward(g, c, &out.v[static_cast<size_t>(iz) * f.nx]);
    }
    return out;
}

VectorVolumeField dealias(const Grid& g, const VectorVolumeField& f, const FilterSpec& spec) {
    VectorVolumeField out;
    out.x = dealias(g, f.x, spec);
    out.y = dealias(g, f.y, spec);
    out.z = dealias(g, f.z, spec);
    return out;
}

// ---------------------------------------------------------------------------
// Chebyshev operations
// ---------------------------------------------------------------------------

VolumeField dz(const Grid& g, const VolumeField& f) {
    const int nx = f.nx, nz = f.nz;
    VolumeField out(nx, nz);
    const auto& D = g.Dz();
    for (int i = 0; i < nz; ++i) {
        for (int m = 0; m < nz; ++m) {
            const double d = D[static_cast<size_t>(i) * nz + m];
            if (d == 0.0) continue;
            const double* src = &f.v[static_cast<size_t>(m) * nx];
            double* dst = &out.v[static_cast<size_t>(i) * nx];
            for (int ix = 0; ix < nx; ++ix) dst[ix] += d * src[ix];
        }
    }
    return out;
}

VolumeField z_antiderivative_from_surface(const Grid& g, const VolumeField& f) {
    const int nx = f.nx, nz = f.nz;
    VolumeField out(nx, nz);
    const auto& A = g.Az();
    for (int i = 0; i < nz; ++i) {
        for (int m = 0; m < nz; ++m) {
            const double a = A[static_cast<size_t>(i) * nz + m];
            if (a == 0.0) continue;
            const double* src = &f.v[static_cast<size_t>(m) * nx];
            double* dst = &out.v[static_cast<size_t>(i) * nx];
            for (int ix = 0; ix < nx; ++ix) dst[ix] += a * src[ix];
        }
    }
    return out;
}

SurfaceField z_integral(const Grid& g, const VolumeField& f) {
    SurfaceField out(f.nx);
    const auto& w = g.zw();
    for (int m = 0; m < f.nz; ++m) {
        const double* src = &f.v[static_cast<size_t>(m) * f.nx];
        for (int ix = 0; ix < f.nx; ++ix) out[ix] += w[m] * src[ix];
    }
    return out;
}

SurfaceField row(const VolumeField& f, int iz) {
    SurfaceField s(f.nx);
    std::memcpy(s.v.data(), &f.v[static_cast<size_t>(iz) * f.nx], sizeof(double) * f.nx);
    return s;
}

void set_row(VolumeField& f, int iz, const SurfaceField& s) {
    std::memcpy(&f.v[static_cast<size_t>(iz) * f.nx], s.v.data(), sizeof(double) * f.nx);
}

double integral_volume(const Grid& g, const VolumeField& f) {
    double total = 0.0;
    const auto& w = g.zw();
    for (int m = 0; m < f.nz; ++m) {
        double rowsum = 0.0;
        const double* src = &f.v[static_cast<size_t>(m) * f.nx];
        for (int ix = 0; ix < f.nx; ++ix) rowsum += src[ix];
        total += w[m] * rowsum;
    }
    return total * g.dx();
}

double sobolev_sq_x(const Grid& g, const SurfaceField& f, int N) {
    auto c = spectrum(g, f);
    const int nk = g.nk();
    double total = 0.0;
    for (int j = 0; j < nk; ++j) {
        double k2 = g.k(j) * g.k(j);
        double msum = 0.0, kp = 1.0;
        for (int m = 0; m <= N; ++m) {
            msum += kp;
            kp *= k2;
        }
        double weight = (j == 0 || j == g.nx() / 2) ? 1.0 : 2.0;
        total += weight * msum * std::norm(c[j]);
    }
    return total * g.Lx();
}

}  // namespace vws
