#include "igs/simulation.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <sstream>

#include <json.hpp>

namespace igs {

using nlohmann::json;

void RunConfig::validate() const {
    model.validate();
    if (n < p + 1) throw std::invalid_argument("RunConfig: need n >= p+1");
    if (radius <= 0.0) throw std::invalid_argument("RunConfig: radius must be positive");
    if (max_steps < 1) throw std::invalid_argument("RunConfig: max_steps must be >= 1");
    if (h0 <= 0.0 || h_min <= 0.0 || h_max < h_min)
        throw std::invalid_argument("RunConfig: bad step-size bounds");
    if (quadrature_order < 1)
        throw std::invalid_argument("RunConfig: bad quadrature order");
}

RunConfig config_from_json(const std::string& json_text) {
    const json j = json::parse(json_text);
    RunConfig cfg;

    if (j.contains("geometry")) {
        const auto& g = j["geometry"];
        cfg.radius = g.value("radius", cfg.radius);
        cfg.n = g.value("n", cfg.n);
        cfg.p = g.value("p", cfg.p);
    }
    if (j.contains("model")) {
        const auto& m = j["model"];
        cfg.model.F = m.value("F", cfg.model.F);
        cfg.model.H = m.value("H", cfg.model.H);
        cfg.model.K = m.value("K", cfg.model.K);
        cfg.model.d1 = m.value("d1", cfg.model.d1);
        cfg.model.d2 = m.value("d2", cfg.model.d2);
    }
    if (j.contains("time")) {
        const auto& t = j["time"];
        cfg.h0 = t.value("h0", cfg.h0);
        cfg.max_steps = t.value("max_steps", cfg.max_steps);
        cfg.t_end = t.value("t_end", cfg.t_end);
        cfg.h_min = t.value("h_min", cfg.h_min);
        cfg.h_max = t.value("h_max", cfg.h_max);
        if (t.contains("pid")) {
            const auto& p = t["pid"];
            cfg.pid.kP = p.value("kP", cfg.pid.kP);
            cfg.pid.kI = p.value("kI", cfg.pid.kI);
            cfg.pid.kD = p.value("kD", cfg.pid.kD);
            cfg.pid.tau = p.value("tau", cfg.pid.tau);
        }
    }
    if (j.contains("refinement")) {
        const auto& r = j["refinement"];
        cfg.refine_enabled = r.value("enabled", cfg.refine_enabled);
        cfg.k_cell = r.value("k_cell", cfg.k_cell);
        cfg.k_curve = r.value("k_curve", cfg.k_curve);
        cfg.refine_cadence = r.value("cadence", cfg.refine_cadence);
        cfg.max_depth = r.value("max_depth", cfg.max_depth);
    }
    cfg.positivity = j.value("positivity", cfg.positivity);
    if (j.contains("solver")) {
        const auto& s = j["solver"];
        cfg.cg_tol = s.value("cg_tol", cfg.cg_tol);
        cfg.projection_tol = s.value("projection_tol", cfg.projection_tol);
        cfg.quadrature_order = s.value("quadrature_order", cfg.quadrature_order);
    }
    if (j.contains("output")) {
        const auto& o = j["output"];
        cfg.out_dir = o.value("dir", cfg.out_dir);
        cfg.snapshot_cadence = o.value("snapshot_cadence", cfg.snapshot_cadence);
        cfg.mesh_samples = o.value("mesh_samples", cfg.mesh_samples);
    }
    if (j.contains("initial_condition")) {
        const auto& ic = j["initial_condition"];
        cfg.u_amplitude = ic.value("u_amplitude", cfg.u_amplitude);
        cfg.v_amplitude = ic.value("v_amplitude", cfg.v_amplitude);
        if (ic.contains("widths")) {
            for (int k = 0; k < 3; ++k) cfg.gaussian_widths[k] = ic["widths"].at(k);
        }
        if (ic.contains("gaussians")) {
            cfg.gaussians.clear();
            for (const auto& g : ic["gaussians"]) {
                GaussianSpec spec;
                spec.theta = g.value("theta", 0.0);
                spec.phi = g.value("phi", 0.0);
                spec.amplitude = g.value("amplitude", 1.0);
                cfg.gaussians.push_back(spec);
            }
        }
    }
    cfg.validate();
    return cfg;
}

std::string config_to_json(const RunConfig& cfg) {
    json j;
    j["geometry"] = {{"radius", cfg.radius}, {"n", cfg.n}, {"p", cfg.p}};
    j["model"] = {{"F", cfg.model.F}, {"H", cfg.model.H}, {"K", cfg.model.K},
                  {"d1", cfg.model.d1}, {"d2", cfg.model.d2}};
    j["time"] = {{"h0", cfg.h0}, {"max_steps", cfg.max_steps}, {"t_end", cfg.t_end},
                 {"h_min", cfg.h_min}, {"h_max", cfg.h_max},
                 {"pid", {{"kP", cfg.pid.kP}, {"kI", cfg.pid.kI},
                          {"kD", cfg.pid.kD}, {"tau", cfg.pid.tau}}}};
    j["refinement"] = {{"enabled", cfg.refine_enabled}, {"k_cell", cfg.k_cell},
                       {"k_curve", cfg.k_curve}, {"cadence", cfg.refine_cadence},
                       {"max_depth", cfg.max_depth}};
    j["positivity"] = cfg.positivity;
    j["solver"] = {{"cg_tol", cfg.cg_tol}, {"projection_tol", cfg.projection_tol},
                   {"quadrature_order", cfg.quadrature_order}};
    j["output"] = {{"dir", cfg.out_dir}, {"snapshot_cadence", cfg.snapshot_cadence},
                   {"mesh_samples", cfg.mesh_samples}};
    json gaussians = json::array();
    for (const auto& g : cfg.gaussians)
        gaussians.push_back({{"theta", g.theta}, {"phi", g.phi}, {"amplitude", g.amplitude}});
    j["initial_condition"] = {
        {"u_amplitude", cfg.u_amplitude}, {"v_amplitude", cfg.v_amplitude},
        {"widths", {cfg.gaussian_widths[0], cfg.gaussian_widths[1], cfg.gaussian_widths[2]}},
        {"gaussians", gaussians}};
    return j.dump(2);
}

RunConfig preset_config(const std::string& name) {
    RunConfig cfg; // desk defaults: (n,p) = (12,2)
    if (name == "desk") {
        return cfg;
    }
    if (name == "paper-healthy" || name == "paper-polymicrogyria") {
        cfg.n = 28; // third-order basis with 24 internal knots
        cfg.p = 3;
        cfg.max_steps = 1650;
        if (name == "paper-polymicrogyria") cfg.model.F = 0.0285;
        return cfg;
    }
    throw std::invalid_argument("unknown preset '" + name + "'");
}

Vec3 sphere_map(int face, double xi, double eta, double R) {
    return cube_to_sphere(face_point(face, xi, eta), R);
}

double initial_bump(const RunConfig& cfg, const Vec3& x) {
    double sum = 0.0;
    for (const auto& g : cfg.gaussians) {
        const Vec3 c = cfg.radius * Vec3(std::sin(g.theta) * std::cos(g.phi),
                                         std::sin(g.theta) * std::sin(g.phi),
                                         std::cos(g.theta));
        double expo = 0.0;
        for (int k = 0; k < 3; ++k) {
            const double r = (x[k] - c[k]) / cfg.gaussian_widths[k];
            expo += r * r;
        }
        sum += g.amplitude * std::exp(-expo);
    }
    return sum;
}

SimulationState build_initial_condition(const RunConfig& cfg) {
    cfg.validate();
    SimulationState state(cfg);
    const QuadratureRule q = QuadratureRule::gauss(cfg.quadrature_order);

    auto sphere = [&](int f, double xi, double eta) {
        return sphere_map(f, xi, eta, cfg.radius);
    };
    state.e = l2_project_vec3(state.basis, sphere, ProjectionMeasure::Parametric, nullptr,
                              q, cfg.projection_tol);
    state.e_prev = state.e;

    auto u0 = [&](int f, double xi, double eta) {
        return 1.0 - cfg.u_amplitude * initial_bump(cfg, sphere(f, xi, eta));
    };
    auto v0 = [&](int f, double xi, double eta) {
        return cfg.v_amplitude * initial_bump(cfg, sphere(f, xi, eta));
    };
    state.c = l2_project(state.basis, u0, ProjectionMeasure::Parametric, nullptr, q,
                         cfg.projection_tol);
    state.d = l2_project(state.basis, v0, ProjectionMeasure::Parametric, nullptr, q,
                         cfg.projection_tol);

    state.h = cfg.h0;
    state.h_prev = cfg.h0;

    if (cfg.p >= 2) {
        const MappingOperator map = state.mapping();
        state.baselines = compute_baselines(compute_indicators(state.basis, map, q));
    }
    return state;
}

namespace {

double a_norm(const SpMat& A, const Eigen::VectorXd& x) {
    return std::sqrt(std::max(0.0, x.dot(A * x)));
}

std::string snapshot_path(const RunConfig& cfg, int step) {
    std::ostringstream os;
    os << cfg.out_dir << "/surface_" << std::setw(6) << std::setfill('0') << step
       << ".vtk";
    return os.str();
}

} // namespace

RunResult run_simulation(SimulationState& state) {
    const RunConfig& cfg = state.config;
    const QuadratureRule q = QuadratureRule::gauss(cfg.quadrature_order);
    const bool writing = !cfg.out_dir.empty();
    if (writing) std::filesystem::create_directories(cfg.out_dir);

    RunResult result;
    result.termination = "max_steps";
    if (writing && state.step == 0) export_surface(state, cfg.mesh_samples, snapshot_path(cfg, 0));

    const int first_step = state.step;
    try {
        while (state.step < cfg.max_steps) {
            if (cfg.t_end > 0.0 && state.t >= cfg.t_end) {
                result.termination = "t_end";
                break;
            }
            const MappingOperator map = state.mapping();
            const MappingOperator map_prev = state.mapping_prev();

            AssemblyStats stats;
            AssembledSystem sys = assemble(state.basis, map, map_prev, state.h_prev,
                                           state.c, state.d, q, &stats);
            if (state.initial_min_sqrt_g == 0.0)
                state.initial_min_sqrt_g = stats.min_sqrt_g;

            if (stats.min_sqrt_g < 1e-3 * state.initial_min_sqrt_g) {
                result.termination = "degenerate";
                break;
            }
            if (stats.min_normal_dot_prev < 0.0) {
                result.termination = "normal-flip";
                break;
            }

            // Coercivity gate with step rejection.
            CoercivityReport coerc = coercivity_check(stats.min_rate, cfg.model, state.h);
            int retries = 0;
            while (!coerc.pass && retries < 5) {
                state.h *= 0.5;
                coerc = coercivity_check(stats.min_rate, cfg.model, state.h);
                ++retries;
            }
            if (!coerc.pass)
                throw NumericalFailure("coercivity condition violated after 5 step halvings");

            ConcentrationStep conc = step_concentrations(sys, cfg.model, state.h, state.c,
                                                         state.d, cfg.positivity, cfg.cg_tol);
            Eigen::MatrixX3d e_new = update_geometry(sys.A, state.basis, map, conc.d_new,
                                                     state.h, cfg.model, q, cfg.cg_tol);

            // PID error of the accepted step, in the mass-matrix norm.
            const double nu = a_norm(sys.A, conc.c_new);
            const double nv = a_norm(sys.A, conc.d_new);
            const double eu = a_norm(sys.A, conc.c_new - state.c) /
                              std::max(cfg.pid.tau * nu, 1e-300);
            const double ev = a_norm(sys.A, conc.d_new - state.d) /
                              std::max(cfg.pid.tau * nv, 1e-300);
            const double err = std::max(eu, ev);

            // Accept.
            state.e_prev = state.e;
            state.e = std::move(e_new);
            state.c = std::move(conc.c_new);
            state.d = std::move(conc.d_new);
            state.h_prev = state.h;
            state.t += state.h;
            state.step += 1;
            state.err_km2 = state.err_km1;
            state.err_km1 = state.err_k;
            state.err_k = err;

            // Log.
            const MappingOperator new_map = state.mapping();
            const FieldStats su = field_surface_stats(state.basis, new_map, state.c, q);
            const FieldStats sv = field_surface_stats(state.basis, new_map, state.d, q);
            RunLogRecord rec;
            rec.k = state.step;
            rec.t = state.t;
            rec.h = state.h;
            rec.e_k = err;
            rec.norm_u = nu;
            rec.norm_v = nv;
            rec.min_u = su.min;
            rec.min_v = sv.min;
            rec.area = su.area;
            rec.dofs = state.basis.num_dofs();
            rec.cg_iterations = conc.cg_iterations;
            rec.coercivity_margin = std::min(coerc.margin_u, coerc.margin_v);
            result.log.push_back(rec);
            result.v_variance.push_back(sv.variance);
            result.min_u.push_back(su.min);
            result.min_v.push_back(sv.min);
            result.max_v.push_back(sv.max);
            result.max_kkt = std::max(result.max_kkt, conc.kkt_residual);

            // Next step size. The first accepted step keeps h (history still
            // warming up).
            if (state.step > first_step + 1)
                state.h = pid_select(state.h, state.err_k, state.err_km1, state.err_km2,
                                     cfg.pid, cfg.h_min, cfg.h_max);

            // Cadenced local refinement (needs curvature, hence p >= 2).
            if (cfg.refine_enabled && cfg.p >= 2 &&
                state.step % cfg.refine_cadence == 0) {
                const MappingOperator m = state.mapping();
                const RefinementIndicators ind = compute_indicators(state.basis, m, q);
                std::vector<int> marked =
                    mark(ind, state.baselines, cfg.k_cell, cfg.k_curve);
                // Functions already at the depth cap stay as they are.
                std::erase_if(marked, [&](int i) {
                    return state.basis.flat_dofs()[i].level >= cfg.max_depth;
                });
                if (!marked.empty()) {
                    const Eigen::SparseMatrix<double> R = state.basis.refine(marked);
                    // .eval(): sparse-dense products do not guard against the
                    // destination aliasing an operand.
                    state.c = (R * state.c).eval();
                    state.d = (R * state.d).eval();
                    state.e = (R * state.e).eval();
                    state.e_prev = (R * state.e_prev).eval();
                    ++result.refinement_events;
                }
            }

            if (writing && state.step % cfg.snapshot_cadence == 0)
                export_surface(state, cfg.mesh_samples, snapshot_path(cfg, state.step));
        }
    } catch (const std::exception&) {
        if (writing) save_checkpoint(state, cfg.out_dir + "/abort.ckpt");
        throw;
    }

    if (writing) {
        export_surface(state, cfg.mesh_samples, snapshot_path(cfg, state.step));
        write_run_log_csv(result.log, cfg.out_dir + "/run_log.csv");
        save_checkpoint(state, cfg.out_dir + "/final.ckpt");
    }
    return result;
}

std::vector<Table1Entry> table1_harness(double radius) {
    std::vector<Table1Entry> table;
    const QuadratureRule q = QuadratureRule::gauss(6);
    for (int n : {5, 10, 20}) {
        for (int p : {1, 2, 3}) {
            HierarchicalBasis basis(n, p, 0);
            auto sphere = [&](int f, double xi, double eta) {
                return sphere_map(f, xi, eta, radius);
            };
            const Eigen::MatrixX3d coeffs = l2_project_vec3(
                basis, sphere, ProjectionMeasure::Parametric, nullptr, q, 1e-13);
            // Error norm over faces parameterized on [-1,1]^2; internally each
            // face lives on [0,1]^2, which scales the L2 norm by 2.
            table.push_back({n, p, 2.0 * l2_mismatch_vec3(basis, sphere, coeffs, q)});
        }
    }
    return table;
}

void export_surface(const SimulationState& state, int samples, const std::string& path) {
    const int m = samples;
    if (m < 2) throw std::invalid_argument("export_surface: need at least 2 samples");
    const MappingOperator map = state.mapping();

    // Deduplicate shared-edge vertices by lattice key.
    std::map<std::array<int, 3>, int> key_to_vertex;
    std::vector<Vec3> points;
    std::vector<double> u_vals, v_vals, curv_vals;
    std::vector<std::array<int, 4>> quads;
    std::vector<std::vector<int>> grid(kNumFaces, std::vector<int>(m * m, -1));

    ActiveEval ev;
    for (int f = 0; f < kNumFaces; ++f) {
        for (int j = 0; j < m; ++j) {
            for (int i = 0; i < m; ++i) {
                const auto key = face_lattice_key(f, i, j, m);
                auto it = key_to_vertex.find(key);
                if (it != key_to_vertex.end()) {
                    grid[f][j * m + i] = it->second;
                    continue;
                }
                const double xi = static_cast<double>(i) / (m - 1);
                const double eta = static_cast<double>(j) / (m - 1);
                state.basis.evaluate(f, xi, eta, 0, ev);
                Vec3 pos = Vec3::Zero();
                double u = 0.0, v = 0.0;
                for (size_t k = 0; k < ev.dofs.size(); ++k) {
                    pos += ev.val[k] * state.e.row(ev.dofs[k]).transpose();
                    u += state.c[ev.dofs[k]] * ev.val[k];
                    v += state.d[ev.dofs[k]] * ev.val[k];
                }
                double curv = 0.0;
                const bool on_edge = (i == 0 || i == m - 1 || j == 0 || j == m - 1);
                if (!on_edge && state.basis.degree() >= 2) {
                    const CurvatureData cd = curvature_at(map, f, xi, eta);
                    curv = cd.kappa1 * cd.kappa1 + cd.kappa2 * cd.kappa2;
                }
                const int id = static_cast<int>(points.size());
                key_to_vertex.emplace(key, id);
                grid[f][j * m + i] = id;
                points.push_back(pos);
                u_vals.push_back(u);
                v_vals.push_back(v);
                curv_vals.push_back(curv);
            }
        }
        for (int j = 0; j + 1 < m; ++j)
            for (int i = 0; i + 1 < m; ++i)
                quads.push_back({grid[f][j * m + i], grid[f][j * m + i + 1],
                                 grid[f][(j + 1) * m + i + 1], grid[f][(j + 1) * m + i]});
    }

    std::ofstream os(path);
    if (!os) throw std::runtime_error("export_surface: cannot open " + path);
    os << "# vtk DataFile Version 3.0\n";
    os << "evolving surface, step " << state.step << "\n";
    os << "ASCII\nDATASET UNSTRUCTURED_GRID\n";
    os << std::setprecision(15);
    os << "POINTS " << points.size() << " double\n";
    for (const Vec3& pt : points) os << pt.x() << " " << pt.y() << " " << pt.z() << "\n";
    os << "CELLS " << quads.size() << " " << 5 * quads.size() << "\n";
    for (const auto& qd : quads)
        os << "4 " << qd[0] << " " << qd[1] << " " << qd[2] << " " << qd[3] << "\n";
    os << "CELL_TYPES " << quads.size() << "\n";
    for (size_t k = 0; k < quads.size(); ++k) os << "9\n";
    os << "POINT_DATA " << points.size() << "\n";
    auto write_scalars = [&](const char* name, const std::vector<double>& vals) {
        os << "SCALARS " << name << " double 1\nLOOKUP_TABLE default\n";
        for (double v : vals) os << v << "\n";
    };
    write_scalars("u", u_vals);
    write_scalars("v", v_vals);
    write_scalars("curvature", curv_vals);
    if (!os) throw std::runtime_error("export_surface: write failed for " + path);
}

namespace {

constexpr uint64_t kCheckpointMagic = 0x4947534348505431ull; // "IGSCHPT1"

uint64_t fnv1a(const std::string& s) {
    uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    return h;
}

template <class T>
void write_pod(std::ostream& os, const T& v) {
    os.write(reinterpret_cast<const char*>(&v), sizeof(T));
}
template <class T>
void read_pod(std::istream& is, T& v) {
    is.read(reinterpret_cast<char*>(&v), sizeof(T));
}

void write_vector(std::ostream& os, const Eigen::VectorXd& v) {
    const int64_t n = v.size();
    write_pod(os, n);
    os.write(reinterpret_cast<const char*>(v.data()), n * sizeof(double));
}
Eigen::VectorXd read_vector(std::istream& is) {
    int64_t n = 0;
    read_pod(is, n);
    Eigen::VectorXd v(n);
    is.read(reinterpret_cast<char*>(v.data()), n * sizeof(double));
    return v;
}

} // namespace

void save_checkpoint(const SimulationState& state, const std::string& path) {
    std::ofstream os(path, std::ios::binary);
    if (!os) throw std::runtime_error("save_checkpoint: cannot open " + path);
    write_pod(os, kCheckpointMagic);
    const std::string cfg = config_to_json(state.config);
    write_pod(os, fnv1a(cfg));
    const int64_t len = static_cast<int64_t>(cfg.size());
    write_pod(os, len);
    os.write(cfg.data(), len);

    write_pod(os, static_cast<int64_t>(state.step));
    write_pod(os, state.t);
    write_pod(os, state.h);
    write_pod(os, state.h_prev);
    write_pod(os, state.err_k);
    write_pod(os, state.err_km1);
    write_pod(os, state.err_km2);
    write_pod(os, state.baselines.mu_cell);
    write_pod(os, state.baselines.mu_curve);
    write_pod(os, state.initial_min_sqrt_g);

    const auto& active = state.basis.active_sets();
    write_pod(os, static_cast<int64_t>(active.size()));
    for (const auto& level : active) {
        write_pod(os, static_cast<int64_t>(level.size()));
        for (int g : level) write_pod(os, static_cast<int64_t>(g));
    }

    write_vector(os, state.c);
    write_vector(os, state.d);
    for (int j = 0; j < 3; ++j) write_vector(os, state.e.col(j));
    for (int j = 0; j < 3; ++j) write_vector(os, state.e_prev.col(j));
    if (!os) throw std::runtime_error("save_checkpoint: write failed for " + path);
}

SimulationState load_checkpoint(const std::string& path) {
    std::ifstream is(path, std::ios::binary);
    if (!is) throw std::runtime_error("load_checkpoint: cannot open " + path);
    uint64_t magic = 0;
    read_pod(is, magic);
    if (magic != kCheckpointMagic)
        throw std::runtime_error("load_checkpoint: not a checkpoint file");
    uint64_t hash = 0;
    read_pod(is, hash);
    int64_t len = 0;
    read_pod(is, len);
    std::string cfg_text(len, '\0');
    is.read(cfg_text.data(), len);
    if (fnv1a(cfg_text) != hash)
        throw std::runtime_error("load_checkpoint: config hash mismatch");

    SimulationState state(config_from_json(cfg_text));
    int64_t step = 0;
    read_pod(is, step);
    state.step = static_cast<int>(step);
    read_pod(is, state.t);
    read_pod(is, state.h);
    read_pod(is, state.h_prev);
    read_pod(is, state.err_k);
    read_pod(is, state.err_km1);
    read_pod(is, state.err_km2);
    read_pod(is, state.baselines.mu_cell);
    read_pod(is, state.baselines.mu_curve);
    read_pod(is, state.initial_min_sqrt_g);

    int64_t num_levels = 0;
    read_pod(is, num_levels);
    std::vector<std::vector<int>> active(num_levels);
    for (auto& level : active) {
        int64_t count = 0;
        read_pod(is, count);
        level.resize(count);
        for (auto& g : level) {
            int64_t v = 0;
            read_pod(is, v);
            g = static_cast<int>(v);
        }
    }
    state.basis.set_active(active);

    state.c = read_vector(is);
    state.d = read_vector(is);
    state.e.resize(state.basis.num_dofs(), 3);
    state.e_prev.resize(state.basis.num_dofs(), 3);
    for (int j = 0; j < 3; ++j) state.e.col(j) = read_vector(is);
    for (int j = 0; j < 3; ++j) state.e_prev.col(j) = read_vector(is);
    if (!is) throw std::runtime_error("load_checkpoint: truncated file " + path);
    return state;
}

void write_run_log_csv(const std::vector<RunLogRecord>& log, const std::string& path) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("write_run_log_csv: cannot open " + path);
    os << "k,t,h,e_k,norm_u,norm_v,min_u,min_v,area,dofs,cg_iterations,coercivity_margin\n";
    os << std::setprecision(17);
    for (const auto& r : log) {
        os << r.k << "," << r.t << "," << r.h << "," << r.e_k << "," << r.norm_u << ","
           << r.norm_v << "," << r.min_u << "," << r.min_v << "," << r.area << ","
           << r.dofs << "," << r.cg_iterations << "," << r.coercivity_margin << "\n";
    }
}

} // namespace igs
