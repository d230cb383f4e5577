#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>

#include "igs/simulation.hpp"

using namespace igs;

namespace {

RunConfig small_config() {
    RunConfig cfg = preset_config("desk");
    cfg.n = 6;
    cfg.max_steps = 10;
    cfg.out_dir = ""; // no file output
    return cfg;
}

} // namespace

TEST_CASE("config JSON round trip") {
    RunConfig cfg = preset_config("desk");
    cfg.n = 9;
    cfg.model.F = 0.0285;
    cfg.h0 = 0.25;
    cfg.positivity = true;
    cfg.gaussians = {{0.1, 0.2, 0.9}, {1.0, 2.0, 1.1}};
    RunConfig back = config_from_json(config_to_json(cfg));
    CHECK(back.n == 9);
    CHECK(back.p == cfg.p);
    CHECK(back.model.F == doctest::Approx(0.0285));
    CHECK(back.h0 == doctest::Approx(0.25));
    CHECK(back.positivity);
    REQUIRE(back.gaussians.size() == 2);
    CHECK(back.gaussians[1].phi == doctest::Approx(2.0));
    CHECK(back.gaussians[1].amplitude == doctest::Approx(1.1));
    CHECK(back.out_dir == cfg.out_dir);
}

TEST_CASE("presets") {
    CHECK(preset_config("desk").n == 12);
    RunConfig healthy = preset_config("paper-healthy");
    RunConfig pmg = preset_config("paper-polymicrogyria");
    CHECK(healthy.model.F == doctest::Approx(0.04));
    CHECK(pmg.model.F == doctest::Approx(0.0285));
    CHECK(healthy.n == pmg.n);
    CHECK_THROWS(preset_config("nonsense"));
}

TEST_CASE("config validation") {
    RunConfig cfg = small_config();
    cfg.n = 1;
    CHECK_THROWS(cfg.validate());
    cfg = small_config();
    cfg.h0 = -1.0;
    CHECK_THROWS(cfg.validate());
    cfg = small_config();
    cfg.h_min = 10.0;
    cfg.h_max = 1.0;
    CHECK_THROWS(cfg.validate());
}

TEST_CASE("initial condition matches its analytic target") {
    RunConfig cfg = small_config();
    SimulationState state = build_initial_condition(cfg);
    const QuadratureRule q = QuadratureRule::gauss(cfg.quadrature_order);
    MappingOperator map = state.mapping();
    // geometry approximates the sphere of radius R
    for (double xi : {0.2, 0.5, 0.8}) {
        const Vec3 p = map.value(0, xi, 0.5);
        CHECK(p.norm() == doctest::Approx(cfg.radius).epsilon(2e-3));
    }
    // u dips where the bumps sit, stays near 1 far away
    ActiveEval ev;
    double u_min = 1.0, u_max = 0.0;
    for (int f = 0; f < kNumFaces; ++f) {
        for (int i = 0; i <= 10; ++i) {
            for (int j = 0; j <= 10; ++j) {
                state.basis.evaluate(f, i / 10.0, j / 10.0, 0, ev);
                double u = 0.0;
                for (size_t k = 0; k < ev.dofs.size(); ++k) u += state.c[ev.dofs[k]] * ev.val[k];
                u_min = std::min(u_min, u);
                u_max = std::max(u_max, u);
            }
        }
    }
    CHECK(u_min < 0.6);  // inside a bump: 1 - 0.75 I
    CHECK(u_max > 0.95); // far field
}

TEST_CASE("uniform initial state stays put") {
    RunConfig cfg = small_config();
    cfg.gaussians.clear(); // I = 0 -> (u,v) = (1,0)
    cfg.max_steps = 50;
    SimulationState state = build_initial_condition(cfg);
    RunResult res = run_simulation(state);
    CHECK(res.termination == "max_steps");
    CHECK((state.c.array() - 1.0).abs().maxCoeff() < 1e-10);
    CHECK(state.d.cwiseAbs().maxCoeff() < 1e-10);
    CHECK(res.refinement_events == 0);
}

TEST_CASE("mass conservation with F = H = K = 0") {
    RunConfig cfg = small_config();
    cfg.model.F = cfg.model.H = cfg.model.K = 0.0;
    cfg.max_steps = 50;
    cfg.refine_enabled = false;
    SimulationState state = build_initial_condition(cfg);
    const QuadratureRule q = QuadratureRule::gauss(cfg.quadrature_order);
    MappingOperator map0 = state.mapping();
    AssembledSystem sys0 = assemble(state.basis, map0, map0, 1.0, state.c, state.d, q);
    const Eigen::VectorXd ones = Eigen::VectorXd::Ones(state.basis.num_dofs());
    const double total0 = bilinear_energy(sys0.A, ones, Eigen::VectorXd(state.c + state.d));
    run_simulation(state);
    MappingOperator map1 = state.mapping();
    AssembledSystem sys1 = assemble(state.basis, map1, map1, 1.0, state.c, state.d, q);
    const double total1 = bilinear_energy(sys1.A, ones, Eigen::VectorXd(state.c + state.d));
    CHECK(std::abs(total1 - total0) / std::abs(total0) < 1e-8);
}

TEST_CASE("run log is consistent") {
    RunConfig cfg = small_config();
    SimulationState state = build_initial_condition(cfg);
    RunResult res = run_simulation(state);
    REQUIRE(res.log.size() == 10);
    double t_prev = 0.0;
    for (const RunLogRecord& r : res.log) {
        CHECK(r.h > 0.0);
        CHECK(r.t == doctest::Approx(t_prev + r.h).epsilon(1e-12));
        t_prev = r.t;
        CHECK(r.area > 0.0);
        CHECK(r.dofs == state.basis.num_dofs());
        CHECK(r.coercivity_margin > 0.0);
    }
    CHECK(res.v_variance.size() == res.log.size());
    CHECK(state.initial_min_sqrt_g > 0.0);
}

TEST_CASE("aggressive thresholds trigger in-loop refinement") {
    RunConfig cfg = small_config();
    cfg.max_steps = 12;
    cfg.refine_cadence = 5;
    cfg.k_cell = 1.01; // just above the mean: the larger half of the cells marks
    cfg.k_curve = 1.01;
    cfg.max_depth = 2;
    SimulationState state = build_initial_condition(cfg);
    const int dofs0 = state.basis.num_dofs();
    RunResult res = run_simulation(state);
    CHECK(res.termination == "max_steps");
    CHECK(res.refinement_events >= 1);
    CHECK(state.basis.num_dofs() > dofs0);
    CHECK(state.c.size() == state.basis.num_dofs());
    CHECK(state.e.rows() == state.basis.num_dofs());
    // the run stays healthy after the transfer
    for (const RunLogRecord& r : res.log) CHECK(std::isfinite(r.e_k));
}

TEST_CASE("determinism") {
    RunConfig cfg = small_config();
    SimulationState a = build_initial_condition(cfg);
    SimulationState b = build_initial_condition(cfg);
    RunResult ra = run_simulation(a);
    RunResult rb = run_simulation(b);
    REQUIRE(ra.log.size() == rb.log.size());
    CHECK((a.c - b.c).cwiseAbs().maxCoeff() == 0.0);
    CHECK((a.e - b.e).cwiseAbs().maxCoeff() == 0.0);
    for (size_t i = 0; i < ra.log.size(); ++i) {
        CHECK(ra.log[i].t == rb.log[i].t);
        CHECK(ra.log[i].e_k == rb.log[i].e_k);
        CHECK(ra.log[i].norm_u == rb.log[i].norm_u);
    }
}

TEST_CASE("checkpoint round trip resumes bitwise") {
    RunConfig cfg = small_config();
    cfg.max_steps = 5;
    SimulationState state = build_initial_condition(cfg);
    run_simulation(state);
    const std::string path = "/tmp/igs_test.ckpt";
    save_checkpoint(state, path);
    SimulationState loaded = load_checkpoint(path);
    CHECK(loaded.step == state.step);
    CHECK(loaded.t == state.t);
    CHECK((loaded.c - state.c).cwiseAbs().maxCoeff() == 0.0);
    CHECK((loaded.e - state.e).cwiseAbs().maxCoeff() == 0.0);

    // continuing both for 10 more steps gives identical trajectories
    state.config.max_steps = 15;
    loaded.config.max_steps = 15;
    run_simulation(state);
    run_simulation(loaded);
    CHECK((loaded.c - state.c).cwiseAbs().maxCoeff() < 1e-12);
    CHECK((loaded.e - state.e).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(loaded.t == doctest::Approx(state.t).epsilon(1e-14));
    std::remove(path.c_str());
}

TEST_CASE("checkpoint rejects corrupted files") {
    RunConfig cfg = small_config();
    cfg.max_steps = 2;
    SimulationState state = build_initial_condition(cfg);
    run_simulation(state);
    const std::string path = "/tmp/igs_corrupt.ckpt";
    save_checkpoint(state, path);
    // flip one byte in the payload
    std::fstream f(path, std::ios::in | std::ios::out | std::ios::binary);
    f.seekp(64);
    char b;
    f.seekg(64);
    f.read(&b, 1);
    b ^= 0x01;
    f.seekp(64);
    f.write(&b, 1);
    f.close();
    CHECK_THROWS(load_checkpoint(path));
    std::remove(path.c_str());
}

TEST_CASE("VTK export") {
    RunConfig cfg = small_config();
    SimulationState state = build_initial_condition(cfg);
    const std::string path = "/tmp/igs_test.vtk";
    const int samples = 8;
    export_surface(state, samples, path);

    std::ifstream in(path);
    REQUIRE(in.good());
    std::string line;
    std::getline(in, line);
    CHECK(line.find("# vtk DataFile") == 0);

    int n_points = 0, n_cells = 0;
    std::vector<Vec3> pts;
    std::vector<std::array<int, 4>> quads;
    std::map<std::string, int> scalar_counts;
    while (std::getline(in, line)) {
        std::istringstream ss(line);
        std::string tag;
        ss >> tag;
        if (tag == "POINTS") {
            ss >> n_points;
            for (int i = 0; i < n_points; ++i) {
                Vec3 p;
                in >> p.x() >> p.y() >> p.z();
                pts.push_back(p);
            }
        } else if (tag == "CELLS" || tag == "POLYGONS") {
            ss >> n_cells;
            for (int i = 0; i < n_cells; ++i) {
                int k;
                std::array<int, 4> q;
                in >> k >> q[0] >> q[1] >> q[2] >> q[3];
                REQUIRE(k == 4);
                quads.push_back(q);
            }
        } else if (tag == "SCALARS") {
            std::string name;
            ss >> name;
            scalar_counts[name] = 0;
            std::getline(in, line); // LOOKUP_TABLE
            for (int i = 0; i < n_points; ++i) {
                double v;
                in >> v;
                ++scalar_counts[name];
            }
        }
    }
    REQUIRE(n_points > 0);
    REQUIRE(n_cells > 0);

    // closed quad mesh: V - E + F = 2, each edge shared by exactly two quads
    std::map<std::pair<int, int>, int> edge_count;
    for (const auto& q : quads) {
        for (int s = 0; s < 4; ++s) {
            int a = q[s], b = q[(s + 1) % 4];
            if (a > b) std::swap(a, b);
            ++edge_count[{a, b}];
        }
    }
    for (const auto& [e, c] : edge_count) CHECK(c == 2);
    const int euler = n_points - static_cast<int>(edge_count.size()) + n_cells;
    CHECK(euler == 2);

    // vertices sit on the sphere approximation
    for (const Vec3& p : pts)
        CHECK(p.norm() == doctest::Approx(cfg.radius).epsilon(5e-3));

    CHECK(scalar_counts.count("u") == 1);
    CHECK(scalar_counts.count("v") == 1);
    CHECK(scalar_counts["u"] == n_points);
    std::remove(path.c_str());
}

TEST_CASE("run log CSV format") {
    std::vector<RunLogRecord> log(2);
    log[0] = {1, 0.1, 0.1, 1.0, 140.0, 10.0, 0.2, 0.0, 20106.0, 488, 12, 1.004};
    log[1] = {2, 0.2, 0.1, 0.9, 140.0, 10.0, 0.2, 0.0, 20107.0, 488, 11, 1.004};
    const std::string path = "/tmp/igs_log.csv";
    write_run_log_csv(log, path);
    std::ifstream in(path);
    std::string header;
    std::getline(in, header);
    CHECK(header ==
          "k,t,h,e_k,norm_u,norm_v,min_u,min_v,area,dofs,cg_iterations,coercivity_margin");
    int rows = 0;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty()) ++rows;
    CHECK(rows == 2);
    std::remove(path.c_str());
}
