#pragma once

#include <optional>
#include <string>

#include "igs/integrator.hpp"
#include "igs/refine.hpp"

namespace igs {

struct GaussianSpec {
    double theta = 0.0, phi = 0.0; // spherical angles of the center
    double amplitude = 1.0;
};

struct RunConfig {
    // geometry
    double radius = 40.0;
    int n = 12;
    int p = 2;

    ModelParameters model;

    // time
    double h0 = 0.1;
    int max_steps = 200;
    double t_end = 0.0; // 0 disables the time cutoff
    PidGains pid;
    double h_min = 1e-4;
    double h_max = 50.0;

    // refinement
    bool refine_enabled = true;
    double k_cell = 4.0;
    double k_curve = 4.0;
    int refine_cadence = 25;
    int max_depth = 3;

    bool positivity = false;

    // solver
    double cg_tol = 1e-10;
    double projection_tol = 1e-12;
    int quadrature_order = 6;

    // output
    std::string out_dir = "out";
    int snapshot_cadence = 25;
    int mesh_samples = 20;

    // initial condition: U = 1 - 0.75 I, V = 0.5 I with I a sum of Gaussians
    // with ambient axis widths (20, 15, 15)
    std::vector<GaussianSpec> gaussians = {
        {0.0, 0.0, 1.0}, {0.3 * M_PI, 0.4 * M_PI, 1.0},
        {0.4 * M_PI, 0.7 * M_PI, 1.0}, {0.65 * M_PI, M_PI, 1.0}};
    double u_amplitude = 0.75;
    double v_amplitude = 0.5;
    double gaussian_widths[3] = {20.0, 15.0, 15.0};

    void validate() const;
};

RunConfig config_from_json(const std::string& json_text);
std::string config_to_json(const RunConfig& cfg);
RunConfig preset_config(const std::string& name); // desk | paper-healthy | paper-polymicrogyria

struct RunLogRecord {
    int k = 0;
    double t = 0.0, h = 0.0, e_k = 0.0;
    double norm_u = 0.0, norm_v = 0.0;
    double min_u = 0.0, min_v = 0.0;
    double area = 0.0;
    int dofs = 0;
    int cg_iterations = 0;
    double coercivity_margin = 0.0;
};

struct SimulationState {
    RunConfig config;
    HierarchicalBasis basis;
    Eigen::VectorXd c, d;       // concentration weights
    Eigen::MatrixX3d e, e_prev; // control nets s^k, s^{k-1}
    double h = 0.1, h_prev = 0.1;
    double err_k = 1.0, err_km1 = 1.0, err_km2 = 1.0; // PID history
    int step = 0;
    double t = 0.0;
    RefinementBaselines baselines;
    double initial_min_sqrt_g = 0.0;

    explicit SimulationState(const RunConfig& cfg)
        : config(cfg), basis(cfg.n, cfg.p, cfg.max_depth) {}

    MappingOperator mapping() const { return {&basis, e}; }
    MappingOperator mapping_prev() const { return {&basis, e_prev}; }
};

// Analytic cube-to-sphere composition of the face parameterization.
Vec3 sphere_map(int face, double xi, double eta, double R);

// Gaussian sum I(x) from the configured centers and widths.
double initial_bump(const RunConfig& cfg, const Vec3& x);

// Projected initial condition: geometry, u, v, baselines.
SimulationState build_initial_condition(const RunConfig& cfg);

struct RunResult {
    std::vector<RunLogRecord> log;
    std::vector<double> v_variance;   // per accepted step (surface-weighted)
    std::vector<double> min_u, min_v, max_v;
    double max_kkt = 0.0;             // worst QP residual (positivity runs)
    int refinement_events = 0;
    std::string termination;          // max_steps | t_end | degenerate | normal-flip
};

// Full loop: assemble -> coercivity -> solve -> grow -> log -> PID ->
// (cadenced) refinement. Writes snapshots, run log and a final checkpoint to
// config.out_dir unless out_dir is empty.
RunResult run_simulation(SimulationState& state);

// Projection errors of the cube-to-sphere map for n in {5,10,20}, p in {1,2,3}.
struct Table1Entry {
    int n, p;
    double error;
};
std::vector<Table1Entry> table1_harness(double radius = 40.0);

// Legacy-ASCII VTK quad mesh of the surface with vertex scalars u, v and
// squared-curvature (zero on patch edges). Patches are stitched by shared-edge
// vertex identification.
void export_surface(const SimulationState& state, int samples, const std::string& path);

void save_checkpoint(const SimulationState& state, const std::string& path);
SimulationState load_checkpoint(const std::string& path);

void write_run_log_csv(const std::vector<RunLogRecord>& log, const std::string& path);

} // namespace igs
