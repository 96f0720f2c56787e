#include "vws/io_cli.hpp"

#include "json.hpp"

#include <cstdint>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <future>
#include <random>

namespace vws {

using nlohmann::json;

RunConfig RunConfig::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path);
    json j;
    try {
        in >> j;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config parse error: ") + e.what());
    }

    RunConfig cfg;
    try {
        auto get = [&](const char* key, auto def) {
            using T = decltype(def);
            return j.contains(key) ? j.at(key).get<T>() : def;
        };
        cfg.scenario = get("scenario", std::string("rest"));
        cfg.params.eps = get("eps", 1.0);
        cfg.params.mu = get("mu", 1.0);
        cfg.params.Lx = get("Lx", 2.0 * M_PI);
        cfg.params.nx = get("nx", 64);
        cfg.params.nz = get("nz", 32);
        cfg.params.dt = get("dt", 0.0);
        cfg.params.cfl = get("cfl", 0.5);
        cfg.params.filter.enabled = get("filter_enabled", true);
        cfg.params.filter.alpha = get("filter_alpha", 36.0);
        cfg.params.filter.p = get("filter_p", 16.0);
        cfg.params.tol_div = get("tol_div", 1e-8);
        cfg.params.tol_mean = get("tol_mean", 1e-12);
        cfg.params.krylov_tol = get("krylov_tol", 1e-11);
        cfg.params.h_min = get("h_min", 0.05);
        cfg.params.a_min = get("a_min", 0.1);
        cfg.params.N_energy = get("N_energy", 3);
        cfg.params.clean_every = get("clean_every", 1);
        cfg.T = get("T", 1.0);
        cfg.amplitude = get("amplitude", 0.05);
        cfg.mode = get("mode", 1);
        cfg.strength = get("strength", 0.5);
        cfg.profile = get("profile", std::string("constant"));
        cfg.out_every = get("out_every", 10);
        cfg.out_dir = get("out_dir", std::string("out"));
        cfg.seed = get("seed", 1234u);
        cfg.threads = get("threads", 1);
        if (j.contains("mu_list")) cfg.mu_list = j.at("mu_list").get<std::vector<double>>();
    } catch (const ConfigError&) {
        throw;
    } catch (const std::exception& e) {
        throw ConfigError(std::string("config field error: ") + e.what());
    }

    cfg.params.validate();
    if (cfg.scenario != "rest" && cfg.scenario != "standing_wave" &&
        cfg.scenario != "shear_vorticity" && cfg.scenario != "manufactured")
        throw ConfigError("unknown scenario: " + cfg.scenario);
    if (cfg.profile != "constant" && cfg.profile != "linear")
        throw ConfigError("unknown shear profile: " + cfg.profile);
    if (!(cfg.T > 0.0)) throw ConfigError("T must be positive");
    if (cfg.out_every < 1) throw ConfigError("out_every must be >= 1");
    return cfg;
}

State initial_state(const RunConfig& cfg, const Stepper& st) {
    const Grid& g = *st.grid();
    State s;
    s.zeta = SurfaceField(g.nx());
    s.psi = SurfaceField(g.nx());
    s.omega = VectorVolumeField(g);

    if (cfg.scenario == "rest") return s;

    if (cfg.scenario == "standing_wave") {
        for (int i = 0; i < g.nx(); ++i)
            s.zeta[i] = cfg.amplitude * std::cos(cfg.mode * 2.0 * M_PI / g.Lx() * g.x(i));
        return s;
    }

    if (cfg.scenario == "shear_vorticity") {
        for (int i = 0; i < g.nx(); ++i)
            s.zeta[i] = cfg.amplitude * std::cos(cfg.mode * 2.0 * M_PI / g.Lx() * g.x(i));
        for (int iz = 0; iz < g.nz(); ++iz) {
            double f = (cfg.profile == "constant") ? 1.0 : (1.0 + g.z(iz));
            for (int ix = 0; ix < g.nx(); ++ix) s.omega.x.at(ix, iz) = cfg.strength * f;
        }
        // supplied in straightened coordinates; projected once before t = 0
        GeometryCache G = st.geometry(s.zeta);
        s.omega = project_div_free(st.workspace(), G, s.omega, st.params().divcurl_options());
        return s;
    }

    // manufactured: seeded smooth admissible state
    std::mt19937 rng(cfg.seed);
    std::uniform_real_distribution<double> U(-1.0, 1.0);
    for (int k = 1; k <= 3; ++k) {
        double a = U(rng), b = U(rng), c = U(rng), d = U(rng);
        for (int i = 0; i < g.nx(); ++i) {
            double kx = k * 2.0 * M_PI / g.Lx() * g.x(i);
            s.zeta[i] += cfg.amplitude * (a * std::cos(kx) + b * std::sin(kx)) / k;
            s.psi[i] += cfg.amplitude * (c * std::cos(kx) + d * std::sin(kx)) / k;
        }
    }
    for (int iz = 0; iz < g.nz(); ++iz) {
        double zp = 1.0 + g.z(iz);
        double pz = zp * (1.0 + 0.5 * g.z(iz));
        for (int ix = 0; ix < g.nx(); ++ix) {
            double x = g.x(ix);
            s.omega.x.at(ix, iz) = cfg.strength * (1.0 + 0.3 * std::cos(x)) * pz;
            s.omega.y.at(ix, iz) = cfg.strength * 0.5 * std::sin(x) * zp;
        }
    }
    GeometryCache G = st.geometry(s.zeta);
    s.omega = project_div_free(st.workspace(), G, s.omega, st.params().divcurl_options());
    return s;
}

// ---------------------------------------------------------------------------
// snapshots
// ---------------------------------------------------------------------------

namespace {
void put_u32(std::ofstream& out, uint32_t v) { out.write(reinterpret_cast<char*>(&v), 4); }
void put_f64(std::ofstream& out, double v) { out.write(reinterpret_cast<char*>(&v), 8); }
uint32_t get_u32(std::ifstream& in) {
    uint32_t v;
    in.read(reinterpret_cast<char*>(&v), 4);
    return v;
}
double get_f64(std::ifstream& in) {
    double v;
    in.read(reinterpret_cast<char*>(&v), 8);
    return v;
}
}  // namespace

void write_snapshot(const std::string& path, const State& s, const Params& p) {
    static_assert(std::endian::native == std::endian::little, "snapshot format is little-endian");
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error("cannot open snapshot for writing: " + path);
    out.write("VWS1", 4);
    put_u32(out, 1u);
    put_u32(out, static_cast<uint32_t>(p.nx));
    put_u32(out, static_cast<uint32_t>(p.nz));
    put_f64(out, s.t);
    put_f64(out, p.eps);
    put_f64(out, p.mu);
    put_f64(out, p.Lx);
    auto put_arr = [&](const std::vector<double>& v) {
        out.write(reinterpret_cast<const char*>(v.data()),
                  static_cast<std::streamsize>(v.size() * 8));
    };
    put_arr(s.zeta.v);
    put_arr(s.psi.v);
    put_arr(s.omega.x.v);
    put_arr(s.omega.y.v);
    put_arr(s.omega.z.v);
}

Snapshot read_snapshot(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open snapshot: " + path);
    char magic[4];
    in.read(magic, 4);
    if (std::memcmp(magic, "VWS1", 4) != 0) throw Error("bad snapshot magic");
    uint32_t version = get_u32(in);
    if (version != 1u) throw Error("unsupported snapshot version");
    Snapshot snap;
    snap.nx = static_cast<int>(get_u32(in));
    snap.nz = static_cast<int>(get_u32(in));
    snap.state.t = get_f64(in);
    snap.eps = get_f64(in);
    snap.mu = get_f64(in);
    snap.Lx = get_f64(in);
    auto get_arr = [&](std::vector<double>& v, size_t n) {
        v.resize(n);
        in.read(reinterpret_cast<char*>(v.data()), static_cast<std::streamsize>(n * 8));
    };
    size_t nx = snap.nx, nz = snap.nz;
    get_arr(snap.state.zeta.v, nx);
    get_arr(snap.state.psi.v, nx);
    snap.state.omega.x.nx = snap.nx;
    snap.state.omega.x.nz = snap.nz;
    snap.state.omega.y = snap.state.omega.z = snap.state.omega.x;
    get_arr(snap.state.omega.x.v, nx * nz);
    get_arr(snap.state.omega.y.v, nx * nz);
    get_arr(snap.state.omega.z.v, nx * nz);
    if (!in) throw Error("snapshot truncated");
    return snap;
}

// ---------------------------------------------------------------------------
// dispersion measurement
// ---------------------------------------------------------------------------

DispersionResult measure_dispersion(double mu, int k, int nx, int nz, double Lx) {
    Params p;
    p.eps = 1.0;
    p.mu = mu;
    p.Lx = Lx;
    p.nx = nx;
    p.nz = nz;
    Stepper st(p);
    const Grid& g = *st.grid();

    const double kk = k * 2.0 * M_PI / Lx;
    const double smu = std::sqrt(mu);
    DispersionResult res;
    res.omega_exact = std::sqrt(kk * std::tanh(smu * kk) / smu);

    const double delta = 1e-8;
    State s;
    s.zeta = SurfaceField(g.nx());
    s.psi = SurfaceField(g.nx());
    s.omega = VectorVolumeField(g);
    for (int i = 0; i < g.nx(); ++i) s.zeta[i] = delta * std::cos(kk * g.x(i));

    const double period = 2.0 * M_PI / res.omega_exact;
    const double dt = period / 64.0;
    const double T = 6.5 * period;

    std::vector<double> ts, amps;
    auto record = [&](const State& q) {
        double a = 0.0;
        for (int i = 0; i < g.nx(); ++i) a += q.zeta[i] * std::cos(kk * g.x(i));
        ts.push_back(q.t);
        amps.push_back(2.0 * a / g.nx());
    };
    record(s);
    int steps = static_cast<int>(std::ceil(T / dt));
    for (int n = 0; n < steps; ++n) {
        s = st.step(s, dt, false);
        record(s);
    }

    // upward zero crossings by cubic interpolation of the recorded series
    std::vector<double> crossings;
    for (size_t n = 1; n + 2 < ts.size(); ++n) {
        if (amps[n] < 0.0 && amps[n + 1] >= 0.0) {
            // cubic through points n-1..n+2, Newton refinement from the secant
            double t0 = ts[n], dtl = ts[n + 1] - ts[n];
            double ym1 = amps[n - 1], y0 = amps[n], y1 = amps[n + 1], y2 = amps[n + 2];
            double x = y0 / (y0 - y1);  // secant in [0,1]
            for (int it = 0; it < 20; ++it) {
                // Lagrange cubic on nodes -1,0,1,2
                double f = -ym1 * x * (x - 1) * (x - 2) / 6.0 +
                           y0 * (x + 1) * (x - 1) * (x - 2) / 2.0 -
                           y1 * (x + 1) * x * (x - 2) / 2.0 + y2 * (x + 1) * x * (x - 1) / 6.0;
                double fp = -ym1 * ((x - 1) * (x - 2) + x * (x - 2) + x * (x - 1)) / 6.0 +
                            y0 * ((x - 1) * (x - 2) + (x + 1) * (x - 2) + (x + 1) * (x - 1)) / 2.0 -
                            y1 * (x * (x - 2) + (x + 1) * (x - 2) + (x + 1) * x) / 2.0 +
                            y2 * (x * (x - 1) + (x + 1) * (x - 1) + (x + 1) * x) / 6.0;
                double step_n = f / fp;
                x -= step_n;
                if (std::abs(step_n) < 1e-14) break;
            }
            crossings.push_back(t0 + x * dtl);
        }
    }
    if (crossings.size() < 3) throw Error("dispersion: not enough oscillations recorded");
    double periods = crossings.back() - crossings.front();
    res.omega_measured = 2.0 * M_PI * (crossings.size() - 1) / periods;
    res.rel_error = std::abs(res.omega_measured - res.omega_exact) / res.omega_exact;
    return res;
}

// ---------------------------------------------------------------------------
// commands
// ---------------------------------------------------------------------------

namespace {

void write_csv_header(std::FILE* f, const char* cols) { std::fprintf(f, "%s\n", cols); }

struct DiagRow {
    double t, H, E_pot, E_kin, calE_N, min_h, min_a, div_omega_max, mass;
};

void write_diag_row(std::FILE* f, const DiagRow& r) {
    std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.t, r.H, r.E_pot,
                 r.E_kin, r.calE_N, r.min_h, r.min_a, r.div_omega_max, r.mass);
}

}  // namespace

int cmd_simulate(const std::string& config_path, const std::string& out_override) {
    RunConfig cfg;
    try {
        cfg = RunConfig::load(config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    if (!out_override.empty()) cfg.out_dir = out_override;

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);

    Stepper st(cfg.params);
    const Grid& g = *st.grid();
    State s;
    try {
        s = initial_state(cfg, st);
    } catch (const Error& e) {
        std::fprintf(stderr, "initial state error: %s\n", e.what());
        return 2;
    }

    std::string diag_path = cfg.out_dir + "/diagnostics.csv";
    std::FILE* diag = std::fopen(diag_path.c_str(), "w");
    if (!diag) {
        std::fprintf(stderr, "cannot open %s\n", diag_path.c_str());
        return 2;
    }
    write_csv_header(diag, "t,H,E_pot,E_kin,calE_N,min_h,min_a,div_omega_max,mass");

    SurfaceField prev_ws;
    double prev_t = 0.0;
    int snap_index = 0;
    auto emit = [&](const State& q, double min_a) {
        GeometryCache G = st.geometry(q.zeta);
        DivCurlSolution sol = st.reconstruct(q);
        EnergyReport er = st.energy(q, G, sol);
        DiagRow row{q.t,      er.H,     er.E_pot,     er.E_kin,
                    er.total, er.min_h, min_a,        er.div_omega,
                    integral_x(g, q.zeta)};
        write_diag_row(diag, row);
        char buf[64];
        std::snprintf(buf, sizeof(buf), "/snapshot_%05d.bin", snap_index++);
        write_snapshot(cfg.out_dir + buf, q, cfg.params);
        return sol;
    };

    int exit_code = 0;
    try {
        DivCurlSolution sol0 = st.reconstruct(s);
        prev_ws = sol0.w_s;
        prev_t = s.t;
        emit(s, 1.0);
        int n = 0;
        State last_good = s;
        while (s.t < cfg.T - 1e-12) {
            double dt = 0.0;
            if (cfg.params.dt > 0.0) dt = cfg.params.dt;
            if (dt > 0.0 && s.t + dt > cfg.T) dt = cfg.T - s.t;
            State next = st.step(s, dt, (n + 1) % cfg.params.clean_every == 0);
            ++n;

            DivCurlSolution sol = st.reconstruct(next);
            SurfaceField a =
                rayleigh_taylor(g, sol.w_s, prev_ws, sol.Vx_s, next.t - prev_t, cfg.params.eps);
            double min_a = min_value(a);
            prev_ws = sol.w_s;
            prev_t = next.t;
            last_good = s;
            s = next;

            if (n % cfg.out_every == 0 || s.t >= cfg.T - 1e-12) emit(s, min_a);
            if (min_a < cfg.params.a_min)
                throw RayleighTaylorViolated("min Rayleigh-Taylor coefficient " +
                                             std::to_string(min_a) + " fell below a_min");
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure at t = %.6g: %s\n", s.t, e.what());
        write_snapshot(cfg.out_dir + std::string("/last_good.bin"), s, cfg.params);
        exit_code = 3;
    }
    std::fclose(diag);
    return exit_code;
}

int cmd_divcurl_check(const std::string& config_path) {
    RunConfig cfg;
    try {
        cfg = RunConfig::load(config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    std::printf("# manufactured div-curl solutions, eps=%.3g mu=%.3g\n", cfg.params.eps,
                cfg.params.mu);
    std::printf("%8s %8s %14s %14s %14s\n", "nx", "nz", "err_Vx", "err_Vy", "err_w");
    int resolutions[3][2] = {{32, 16}, {48, 24}, {64, 32}};
    try {
        for (auto& r : resolutions) {
            Params p = cfg.params;
            p.nx = r[0];
            p.nz = r[1];
            Stepper st(p);
            const Grid& g = *st.grid();
            SurfaceField zeta(g.nx());
            for (int i = 0; i < g.nx(); ++i)
                zeta[i] = cfg.amplitude * std::cos(2.0 * M_PI / g.Lx() * g.x(i));
            GeometryCache G = build_geometry(st.grid(), zeta, p.eps, p.mu, p.h_min);

            // fixed analytic vector potential with a rough vertical profile
            const double q = 9.0;
            VectorVolumeField W(g);
            for (int iz = 0; iz < g.nz(); ++iz) {
                double zp = 1.0 + g.z(iz);
                double pz = std::sin(q * zp), pz2 = std::cos(q * zp) - std::cos(q);
                for (int ix = 0; ix < g.nx(); ++ix) {
                    double x = g.x(ix);
                    W.x.at(ix, iz) = (std::cos(x) + 0.4 * std::sin(3 * x)) * pz2;
                    W.y.at(ix, iz) = (std::sin(2 * x) + 0.5 * std::cos(x)) * zp * pz;
                    W.z.at(ix, iz) = (std::cos(2 * x) - 0.3 * std::sin(x)) * pz2;
                }
            }
            const double smu = std::sqrt(p.mu);
            VectorVolumeField Umu = scaled_curl(W, G);
            VectorVolumeField U;
            U.x = (1.0 / smu) * Umu.x;
            U.y = (1.0 / smu) * Umu.y;
            U.z = Umu.z;
            TangentialTrace tt = tangential_trace(U, G);
            double mx = mean(g, tt.x), my = mean(g, tt.y);
            for (auto& v : U.x.v) v -= mx;
            for (auto& v : U.y.v) v -= my;
            VectorVolumeField Umu2;
            Umu2.x = smu * U.x;
            Umu2.y = smu * U.y;
            Umu2.z = U.z;
            VectorVolumeField omega = (1.0 / p.mu) * scaled_curl(Umu2, G);
            TangentialTrace tpar = tangential_trace(U, G);
            SurfaceField psi = inv_dx(g, tpar.x, 1e-8);

            DivCurlOptions opts = p.divcurl_options();
            opts.tol_div = 1e-5;
            DivCurlWorkspace ws(st.grid(), p.mu);
            DivCurlSolution sol = reconstruct_velocity(ws, G, psi, omega, opts);
            std::printf("%8d %8d %14.5e %14.5e %14.5e\n", p.nx, p.nz, max_abs(sol.U.x - U.x),
                        max_abs(sol.U.y - U.y), max_abs(sol.U.z - U.z));
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
    return 0;
}

int cmd_dispersion(const std::string& config_path) {
    RunConfig cfg;
    try {
        cfg = RunConfig::load(config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    try {
        DispersionResult r =
            measure_dispersion(cfg.params.mu, cfg.mode, cfg.params.nx, cfg.params.nz,
                               cfg.params.Lx);
        std::printf("mu=%.6g k=%d omega_measured=%.12g omega_exact=%.12g rel_error=%.3e\n",
                    cfg.params.mu, cfg.mode, r.omega_measured, r.omega_exact, r.rel_error);
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
    return 0;
}

int cmd_justify(const std::string& config_path, const std::string& out_override, int threads) {
    RunConfig cfg;
    try {
        cfg = RunConfig::load(config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }
    if (!out_override.empty()) cfg.out_dir = out_override;
    if (threads > 0) cfg.threads = threads;

    JustificationSetup setup;
    setup.T = cfg.T;
    setup.amplitude = cfg.amplitude;
    setup.shear = cfg.strength;
    setup.nx = cfg.params.nx;
    setup.nz = cfg.params.nz;
    setup.Lx = cfg.params.Lx;
    setup.cfl = cfg.params.cfl;

    std::vector<JustificationRow> table(cfg.mu_list.size());
    try {
        if (cfg.threads > 1) {
            std::vector<std::future<JustificationRow>> futs;
            for (double mu : cfg.mu_list)
                futs.push_back(std::async(std::launch::async, [mu, &setup] {
                    return justification_harness({mu}, setup).front();
                }));
            for (size_t i = 0; i < futs.size(); ++i) table[i] = futs[i].get();
        } else {
            table = justification_harness(cfg.mu_list, setup);
        }
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }

    std::error_code ec;
    std::filesystem::create_directories(cfg.out_dir, ec);
    std::string path = cfg.out_dir + "/justification.csv";
    std::FILE* f = std::fopen(path.c_str(), "w");
    if (!f) {
        std::fprintf(stderr, "cannot open %s\n", path.c_str());
        return 2;
    }
    write_csv_header(f, "mu,err_zeta,err_vbar,err_usurf_uncorrected,err_usurf_corrected,runtime_s");
    for (const auto& r : table)
        std::fprintf(f, "%.17g,%.17g,%.17g,%.17g,%.17g,%.17g\n", r.mu, r.err_zeta, r.err_vbar,
                     r.err_usurf_uncorrected, r.err_usurf_corrected, r.runtime_s);
    std::fclose(f);

    std::printf("%10s %12s %12s %12s %12s %12s\n", "mu", "err_zeta", "err_vbar", "err_unc",
                "err_cor", "self_err");
    for (const auto& r : table)
        std::printf("%10.4g %12.4e %12.4e %12.4e %12.4e %12.4e\n", r.mu, r.err_zeta, r.err_vbar,
                    r.err_usurf_uncorrected, r.err_usurf_corrected, r.self_error);
    // fitted slopes between consecutive mu (log-log)
    for (size_t i = 0; i + 1 < table.size(); ++i) {
        double lmu = std::log(table[i].mu / table[i + 1].mu);
        std::printf("slope[%zu] zeta=%.3f vbar=%.3f unc=%.3f cor=%.3f structV=%.3f\n", i,
                    std::log(table[i].err_zeta / table[i + 1].err_zeta) / lmu,
                    std::log(table[i].err_vbar / table[i + 1].err_vbar) / lmu,
                    std::log(table[i].err_usurf_uncorrected / table[i + 1].err_usurf_uncorrected) /
                        lmu,
                    std::log(table[i].err_usurf_corrected / table[i + 1].err_usurf_corrected) / lmu,
                    std::log(table[i].structure_v / table[i + 1].structure_v) / lmu);
    }
    return 0;
}

int cmd_hamiltonian(const std::string& config_path) {
    RunConfig cfg;
    try {
        cfg = RunConfig::load(config_path);
    } catch (const ConfigError& e) {
        std::fprintf(stderr, "config error: %s\n", e.what());
        return 2;
    }

    bool all_pass = true;
    auto report = [&](const char* name, bool ok, double value) {
        std::printf("%-28s %-5s (%.3e)\n", name, ok ? "PASS" : "FAIL", value);
        all_pass = all_pass && ok;
    };

    try {
        Params p = cfg.params;
        Stepper st(p);
        const Grid& g = *st.grid();
        std::mt19937 rng(cfg.seed);
        std::uniform_real_distribution<double> U(-1.0, 1.0);

        // seeded smooth state
        RunConfig mcfg = cfg;
        mcfg.scenario = "manufactured";
        State s = initial_state(mcfg, st);

        Functional H = make_total_energy(st);
        Functional mass = make_mass(st);

        // fd check
        Direction dir;
        dir.dzeta = SurfaceField(g.nx());
        dir.dpsi = SurfaceField(g.nx());
        for (int k = 1; k <= 3; ++k) {
            double a = U(rng), b = U(rng);
            for (int i = 0; i < g.nx(); ++i) {
                double kx = k * 2.0 * M_PI / g.Lx() * g.x(i);
                dir.dzeta[i] += a * std::cos(kx) / k;
                dir.dpsi[i] += b * std::sin(kx) / k;
            }
        }
        {
            GeometryCache G = st.geometry(s.zeta);
            VolumeField Vy(g);
            for (int iz = 0; iz < g.nz(); ++iz) {
                double zp = 1.0 + g.z(iz);
                for (int ix = 0; ix < g.nx(); ++ix)
                    Vy.at(ix, iz) = std::sin(g.x(ix)) * zp * (1.0 + 0.3 * g.z(iz));
            }
            dir.domega = VectorVolumeField(g);
            dir.domega.x = (-1.0 / std::sqrt(p.mu)) * sigma_derivative(Vy, Axis::Z, G);
            dir.domega.z = sigma_derivative(Vy, Axis::X, G);
            for (int iz = 0; iz < g.nz(); ++iz)
                for (int ix = 0; ix < g.nx(); ++ix)
                    dir.domega.y.at(ix, iz) = std::cos(g.x(ix)) * (1.0 + g.z(iz));
        }
        FdReport fr = fd_check(H, st, s, dir, {1e-3, 3e-4, 1e-4, 1e-5, 1e-6});
        report("fd_check(total_energy)", fr.min_rel_error < 1e-6, fr.min_rel_error);

        // bracket antisymmetry
        double worst = 0.0;
        for (int trial = 0; trial < 10; ++trial) {
            SurfaceField phiA(g.nx()), phiB(g.nx());
            for (int i = 0; i < g.nx(); ++i) {
                phiA[i] = std::cos((trial % 3 + 1) * g.x(i));
                phiB[i] = std::sin((trial % 2 + 1) * g.x(i));
            }
            Functional A = make_linear_observable(st, phiA, "A");
            Functional B = (trial % 2 == 0) ? make_linear_observable(st, phiB, "B") : H;
            double ab = poisson_bracket(A, B, st, s);
            double ba = poisson_bracket(B, A, st, s);
            worst = std::max(worst, std::abs(ab + ba) / std::max({std::abs(ab), std::abs(ba), 1.0}));
        }
        report("bracket antisymmetry", worst < 1e-11, worst);

        // J consistency
        JConsistency jc = j_consistency(st, s);
        double jworst = std::max({jc.zeta_row, jc.psi_row, jc.omega_row});
        report("rhs == J grad H", jworst < 1e-8, jworst);

        // trajectory consistency
        SurfaceField phi(g.nx());
        for (int i = 0; i < g.nx(); ++i) phi[i] = std::cos(g.x(i));
        Functional F = make_linear_observable(st, phi, "obs");
        std::vector<State> traj{s};
        State q = s;
        for (int n = 0; n < 16; ++n) {
            q = st.step(q, 0.01, true);
            traj.push_back(q);
        }
        TrajectoryConsistency tc = hamiltonian_consistency(traj, F, st);
        report("dF/dt == {F,H}", tc.max_rel_mismatch < 1e-3, tc.max_rel_mismatch);
    } catch (const Error& e) {
        std::fprintf(stderr, "numerical failure: %s\n", e.what());
        return 3;
    }
    return all_pass ? 0 : 3;
}

}  // namespace vws
