// Command-line front end: config parsing, subcommand dispatch, CSV/SVG
// emission.  Exit codes: 0 success, 1 solver error, 2 config error,
// 3 failed certification or self-test.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>

#include "morsebif/bifurcation.hpp"
#include "morsebif/config.hpp"
#include "morsebif/csv.hpp"
#include "morsebif/spectral_perturb.hpp"
#include "morsebif/svg.hpp"

namespace {

using namespace morsebif;

constexpr int kExitOk = 0;
constexpr int kExitSolver = 1;
constexpr int kExitConfig = 2;
constexpr int kExitCertification = 3;

struct CliOverrides {
    std::string config_path;
    std::string out_dir;
    int grid = 0;
    int lambda_grid = 0;
    double tol = 0.0;
    bool refine = false;
    bool svg = false;
    long long seed = -1;
    int trials = 0;
};

RunConfig resolve_config(const CliOverrides& ov, bool config_required) {
    RunConfig cfg;
    if (!ov.config_path.empty())
        cfg = load_config_file(ov.config_path);
    else if (config_required)
        throw ConfigError("--config PATH is required for this subcommand");
    if (!ov.out_dir.empty()) cfg.out_dir = ov.out_dir;
    if (ov.grid > 0) cfg.grid = ov.grid;
    if (ov.lambda_grid > 0) cfg.lambda_grid = ov.lambda_grid;
    if (ov.tol > 0.0) cfg.tol = ov.tol;
    if (ov.refine) cfg.refine = true;
    if (ov.svg) cfg.svg = true;
    if (ov.seed >= 0) cfg.seed = static_cast<std::uint64_t>(ov.seed);
    if (ov.trials > 0) cfg.trials = ov.trials;
    if (cfg.grid < 32) throw ConfigError("grid must be >= 32");
    if (!(cfg.tol > 0.0)) throw ConfigError("tol must be > 0");
    cfg.canonical = canonical_text(cfg);
    return cfg;
}

std::ofstream open_out(const RunConfig& cfg, const std::string& name) {
    namespace fs = std::filesystem;
    fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
    fs::create_directories(dir);
    std::ofstream os(dir / name, std::ios::binary);
    if (!os) throw ConfigError("cannot open output file " + (dir / name).string());
    return os;
}

void stamp(CsvWriter& w, const RunConfig& cfg) {
    std::ostringstream hash;
    hash << std::hex << fnv1a(cfg.canonical);
    w.comment("config_hash", hash.str());
    w.comment("grid", std::to_string(cfg.grid));
    w.comment("lambda_grid", std::to_string(cfg.lambda_grid));
    w.comment("tol", format_double(cfg.tol));
}

BranchProvider make_branch(const LagrangianFamily& fam, const RunConfig& cfg) {
    if (cfg.branch == "zero") return zero_branch(fam, cfg.boundary, cfg.tau, cfg.grid);
    if (cfg.branch == "solve") {
        const int n = fam.dim();
        Vec q0 = cfg.guess_q.size() ? cfg.guess_q : Vec::Zero(n);
        Vec v0 = cfg.guess_v.size() ? cfg.guess_v : Vec::Zero(n);
        BvpOptions opt;
        opt.steps = cfg.grid;
        opt.tol = cfg.tol;
        return continuation_branch(fam, cfg.boundary, cfg.tau, {q0, v0}, opt);
    }
    throw ConfigError("branch must be \"zero\" or \"solve\"");
}

ScanOptions make_scan_options(const RunConfig& cfg) {
    ScanOptions opt;
    opt.fem_cells = cfg.grid;
    opt.locate_tol = cfg.tol;
    opt.max_refine = cfg.refine ? 4 : 2;
    return opt;
}

int cmd_el_solve(const RunConfig& cfg) {
    const LagrangianFamily fam = make_family(cfg);
    const int n = fam.dim();
    Vec q0 = cfg.guess_q.size() ? cfg.guess_q : Vec::Zero(n);
    Vec v0 = cfg.guess_v.size() ? cfg.guess_v : Vec::Zero(n);
    BvpOptions opt;
    opt.steps = cfg.grid;
    opt.tol = cfg.tol;
    const Trajectory tr = solve_bvp(fam, cfg.lambda, cfg.boundary, {q0, v0}, cfg.tau, opt);

    auto os = open_out(cfg, "trajectory.csv");
    CsvWriter w(os);
    stamp(w, cfg);
    w.comment("el_residual", format_double(tr.el_residual));
    w.comment("bc_residual", format_double(tr.bc_residual));
    w.comment("newton_iterations", std::to_string(tr.newton_iterations));
    std::vector<std::string> cols{"t"};
    for (int c = 0; c < n; ++c) cols.push_back("q" + std::to_string(c));
    for (int c = 0; c < n; ++c) cols.push_back("v" + std::to_string(c));
    w.header(cols);
    for (int i = 0; i <= tr.steps(); ++i) {
        std::vector<double> row{tr.grid(i)};
        for (int c = 0; c < n; ++c) row.push_back(tr.q[i][c]);
        for (int c = 0; c < n; ++c) row.push_back(tr.v[i][c]);
        w.row(row);
    }
    std::cout << "el-solve: " << tr.steps() << " steps, bc residual "
              << format_double(tr.bc_residual) << ", motion-equation estimate "
              << format_double(tr.el_residual) << "\n";
    return kExitOk;
}

int cmd_kernel(const RunConfig& cfg) {
    const LagrangianFamily fam = make_family(cfg);
    const BranchProvider branch = make_branch(fam, cfg);
    const Trajectory tr = branch(cfg.lambda);
    const CoefficientPath coeffs = coefficients_along(fam, cfg.lambda, tr);
    const KernelBasis kb = kernel_basis(coeffs, cfg.boundary);

    auto os = open_out(cfg, "kernel.csv");
    CsvWriter w(os);
    stamp(w, cfg);
    w.comment("nullity", std::to_string(kb.fields.size()));
    w.comment("indeterminate", std::to_string(kb.indeterminate));
    const int n = fam.dim();
    std::vector<std::string> cols{"t"};
    for (size_t f = 0; f < kb.fields.size(); ++f)
        for (int c = 0; c < n; ++c)
            cols.push_back("y" + std::to_string(f) + "_" + std::to_string(c));
    w.header(cols);
    for (int i = 0; i < tr.grid.size(); ++i) {
        std::vector<double> row{tr.grid(i)};
        for (const auto& f : kb.fields)
            for (int c = 0; c < n; ++c) row.push_back(f.y[i][c]);
        w.row(row);
    }
    std::cout << "kernel: nullity " << kb.fields.size();
    if (kb.indeterminate > 0)
        std::cout << " (indeterminate " << kb.indeterminate << " - refine grid)";
    std::cout << "\n";
    return kExitOk;
}

int cmd_index(const RunConfig& cfg) {
    const LagrangianFamily fam = make_family(cfg);
    const BranchProvider branch = make_branch(fam, cfg);
    const ScanOptions opt = make_scan_options(cfg);
    const IndexReport fem = branch_index_at(fam, branch, cfg.boundary, cfg.lambda, opt);
    std::cout << "fem:   m- = " << fem.m_minus << ", m0 = " << fem.m_null
              << " (cells " << fem.grid_size << ", tol " << format_double(fem.tolerance)
              << ")\n";

    if (std::holds_alternative<ProductSubspaces>(cfg.boundary)) {
        const Trajectory tr = branch(cfg.lambda);
        const CoefficientPath coeffs = coefficients_along(fam, cfg.lambda, tr);
        const FundamentalMatrixPath phi = fundamental_matrix(coeffs);
        const ConormalPair pair = conormal_pair(cfg.boundary, fam.dim());
        const FocalReport rep = focal_points(phi, pair);
        const int focal = index_via_focal(rep, coeffs.t_end());
        std::cout << "focal: m- = " << focal << " over " << rep.instants.size()
                  << " instants, symplectic defect "
                  << format_double(phi.symplectic_defect) << "\n";
        if (focal != fem.m_minus) {
            std::cerr << "index: fem and focal routes disagree\n";
            return kExitCertification;
        }
    }
    return kExitOk;
}

int cmd_focal(const RunConfig& cfg) {
    const LagrangianFamily fam = make_family(cfg);
    if (!std::holds_alternative<ProductSubspaces>(cfg.boundary))
        throw UnsupportedBoundary("focal: product boundary class required");
    const BranchProvider branch = make_branch(fam, cfg);
    const Trajectory tr = branch(cfg.lambda);
    const CoefficientPath coeffs = coefficients_along(fam, cfg.lambda, tr);
    const FundamentalMatrixPath phi = fundamental_matrix(coeffs);
    const ConormalPair pair = conormal_pair(cfg.boundary, fam.dim());
    const FocalReport rep = focal_points(phi, pair);

    auto os = open_out(cfg, "focal.csv");
    CsvWriter w(os);
    stamp(w, cfg);
    w.comment("symplectic_defect", format_double(phi.symplectic_defect));
    w.header({"s", "multiplicity"});
    for (const auto& inst : rep.instants)
        w.row({inst.s, static_cast<double>(inst.multiplicity)});

    if (cfg.svg) {
        StepSeries cum;
        cum.label = "cumulative index";
        cum.x.push_back(0.0);
        cum.y.push_back(0.0);
        int total = 0;
        for (const auto& inst : rep.instants) {
            cum.x.push_back(inst.s);
            total += inst.multiplicity;
            cum.y.push_back(total);
        }
        cum.x.push_back(coeffs.t_end());
        cum.y.push_back(total);
        namespace fs = std::filesystem;
        fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
        write_step_svg((dir / "focal.svg").string(), {cum}, "focal index staircase", "s",
                       "index");
    }
    std::cout << "focal: " << rep.instants.size() << " instants, total multiplicity "
              << rep.cumulative_at(coeffs.t_end() + 1.0) << "\n";
    return kExitOk;
}

int cmd_scan(const RunConfig& cfg) {
    const LagrangianFamily fam = make_family(cfg);
    const BranchProvider branch = make_branch(fam, cfg);
    const ScanOptions opt = make_scan_options(cfg);
    const Vec grid =
        Vec::LinSpaced(cfg.lambda_grid, cfg.lambda_range[0], cfg.lambda_range[1]);
    const BifurcationReport rep = branch_scan(fam, branch, cfg.boundary, grid, opt);

    auto os = open_out(cfg, "scan.csv");
    CsvWriter w(os);
    stamp(w, cfg);
    w.header({"lambda", "m_minus", "m_null"});
    int failures = 0;
    for (int i = 0; i < grid.size(); ++i) {
        if (!rep.errors[i].empty()) {
            ++failures;
            continue;
        }
        w.row({grid(i), static_cast<double>(rep.m_minus[i]),
               static_cast<double>(rep.m_null[i])});
    }

    if (cfg.svg) {
        StepSeries sm, sn;
        sm.label = "m-";
        sn.label = "m0";
        sn.color = "#c44e52";
        for (int i = 0; i < grid.size(); ++i) {
            if (!rep.errors[i].empty()) continue;
            sm.x.push_back(grid(i));
            sm.y.push_back(rep.m_minus[i]);
            sn.x.push_back(grid(i));
            sn.y.push_back(rep.m_null[i]);
        }
        namespace fs = std::filesystem;
        fs::path dir = cfg.out_dir.empty() ? fs::path(".") : fs::path(cfg.out_dir);
        write_step_svg((dir / "scan.svg").string(), {sm, sn}, "index along the branch",
                       "lambda", "count");
    }

    std::cout << "scan: " << grid.size() - failures << "/" << grid.size()
              << " parameter values, " << rep.candidates.size() << " candidate(s)\n";
    for (const auto& c : rep.candidates) {
        std::cout << "candidate: mu = " << format_double(c.mu) << "\n"
                  << "  left (m-, m0) = (" << c.left_index << ", " << c.left_null
                  << ")   right = (" << c.right_index << ", " << c.right_null
                  << ")   at mu: m0 = " << c.nullity_at_mu << "\n"
                  << "  necessary: " << (c.necessary_ok ? "yes" : "no")
                  << "   sufficient (index-interval): "
                  << (c.sufficient_ii3_ok ? "yes" : "no") << "\n"
                  << "  note: " << c.note << "\n";
    }
    for (int i = 0; i < grid.size(); ++i)
        if (!rep.errors[i].empty())
            std::cout << "error at lambda=" << format_double(grid(i)) << ": " << rep.errors[i]
                      << "\n";
    return failures == grid.size() ? kExitSolver : kExitOk;
}

int cmd_perturb(const RunConfig& cfg) {
    int mismatches = 0;
    double worst_weyl = -1e300;
    std::cout << "trial  dim  ker  q  i0  predicted(+,-)  observed(+,-)  ok\n";
    for (int i = 0; i < cfg.trials; ++i) {
        const OperatorFamily fam = random_operator_family(cfg.seed + i);
        const PerturbationCheck chk = predict_jump(fam);
        worst_weyl = std::max(worst_weyl, weyl_check(fam, {-1.0, -0.3, 0.2, 0.9}));
        const bool ok = chk.agrees();
        if (!ok) ++mismatches;
        std::cout << i << "  " << fam.dim << "  " << chk.N << "  " << chk.mQ_minus << "  "
                  << chk.i0 << "  (" << chk.predicted_pos << "," << chk.predicted_neg
                  << ")  (" << chk.observed_pos << "," << chk.observed_neg << ")  "
                  << (ok ? "ok" : "MISMATCH") << "\n";
    }
    std::cout << "weyl defect max: " << format_double(worst_weyl) << "\n";
    if (mismatches > 0 || worst_weyl > 1e-10) {
        std::cout << "self-test FAILED (" << mismatches << " mismatches)\n";
        return kExitCertification;
    }
    std::cout << "self-test passed (" << cfg.trials << " trials)\n";
    return kExitOk;
}

int cmd_demo_pendulum(const RunConfig& base) {
    RunConfig cfg = base;
    cfg.family_name = "pendulum";
    cfg.family_params = {{"l", 1.0}, {"g", 1.0}};
    cfg.dim = 1;
    cfg.boundary = OrthogonalTwist{Mat::Identity(1, 1)};
    cfg.boundary_type = "twist";
    cfg.tau = 2.0 * M_PI;
    cfg.canonical = canonical_text(cfg);

    const LagrangianFamily fam = make_family(cfg);
    const BranchProvider branch = make_branch(fam, cfg);
    const ScanOptions opt = make_scan_options(cfg);

    const IndexReport at0 = branch_index_at(fam, branch, cfg.boundary, 0.0, opt);
    std::cout << "pendulum (l=1, g=1), periodic class, T=2pi, trivial branch\n";
    std::cout << "at lambda=0: (m-, m0) = (" << at0.m_minus << ", " << at0.m_null << ")\n";

    const Vec grid = Vec::LinSpaced(cfg.lambda_grid, -0.3, 0.3);
    const BifurcationReport rep = branch_scan(fam, branch, cfg.boundary, grid, opt);
    if (rep.candidates.empty()) {
        std::cout << "demo: expected a certified candidate, found none\n";
        return kExitCertification;
    }
    const Candidate& c = rep.candidates.front();
    std::cout << "scan [-0.3, 0.3]: m- jumps " << c.left_index << " -> " << c.right_index
              << " across lambda = " << format_double(c.mu) << "\n";
    std::cout << "certificates: necessary " << (c.necessary_ok ? "yes" : "no")
              << ", sufficient (index-interval) " << (c.sufficient_ii3_ok ? "yes" : "no")
              << "\n";

    // Sign-definite perturbation predictor at the degenerate point.
    const Trajectory tr = branch(0.0);
    const CoefficientPath coeffs = coefficients_along(fam, 0.0, tr);
    const KernelBasis kb = kernel_basis(coeffs, cfg.boundary);
    const HessField hess = [](double t, const Vec& q) {
        Mat h(1, 1);
        h(0, 0) = -(1.0 + std::sin(t)) * std::cos(q[0]);
        return h;
    };
    const PerturbPrediction pred =
        hessian_perturbation_predict(fam, hess, tr, cfg.boundary, kb.fields, opt);
    std::cout << "perturbation predictor: m- = " << pred.index_for_positive
              << " for lambda > 0, " << pred.index_for_negative << " for lambda < 0\n";

    const bool ok = at0.m_minus == 1 && at0.m_null == 2 && c.left_index == 1 &&
                    c.right_index == 3 && std::abs(c.mu) < 1e-6 && c.necessary_ok &&
                    c.sufficient_ii3_ok && kb.fields.size() == 2 &&
                    pred.index_for_positive == 3 && pred.index_for_negative == 1;
    if (!ok) {
        std::cout << "demo: results deviate from the expected pendulum picture\n";
        return kExitCertification;
    }
    std::cout << "demo: all checks passed\n";
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Morse indices, focal points and bifurcation certificates for "
                 "one-dimensional variational problems"};
    app.require_subcommand(1);
    app.fallthrough();  // global flags may follow the subcommand

    CliOverrides ov;
    app.add_option("--config", ov.config_path, "JSON config file");
    app.add_option("--out", ov.out_dir, "output directory");
    app.add_option("--grid", ov.grid, "time grid cells (>= 32)");
    app.add_option("--lambda-grid", ov.lambda_grid, "parameter grid points");
    app.add_option("--tol", ov.tol, "tolerance");
    app.add_flag("--refine", ov.refine, "extra grid refinement on indeterminate nullity");
    app.add_flag("--svg", ov.svg, "emit SVG plots");
    app.add_option("--seed", ov.seed, "random seed");
    app.add_option("--trials", ov.trials, "self-test trial count");

    auto* el = app.add_subcommand("el-solve", "solve the boundary value problem, emit CSV");
    auto* kr = app.add_subcommand("kernel", "second-variation kernel by shooting, emit CSV");
    auto* ix = app.add_subcommand("index", "Morse index and nullity by both routes");
    auto* fc = app.add_subcommand("focal", "focal instants with multiplicities, emit CSV");
    auto* sc = app.add_subcommand("scan", "parameter scan with bifurcation certificates");
    auto* pb = app.add_subcommand("perturb", "index-jump formula checks");
    bool selftest = false;
    pb->add_flag("--selftest", selftest, "run the randomized self-test suite");
    auto* dm = app.add_subcommand("demo", "built-in demonstration pipelines");
    std::string demo_name;
    dm->add_option("name", demo_name, "demo name (pendulum)")->required();

    CLI11_PARSE(app, argc, argv);

    try {
        if (el->parsed()) return cmd_el_solve(resolve_config(ov, true));
        if (kr->parsed()) return cmd_kernel(resolve_config(ov, true));
        if (ix->parsed()) return cmd_index(resolve_config(ov, true));
        if (fc->parsed()) return cmd_focal(resolve_config(ov, true));
        if (sc->parsed()) return cmd_scan(resolve_config(ov, true));
        if (pb->parsed()) {
            if (!selftest) throw ConfigError("perturb: only --selftest mode is available");
            return cmd_perturb(resolve_config(ov, false));
        }
        if (dm->parsed()) {
            if (demo_name != "pendulum") throw ConfigError("unknown demo: " + demo_name);
            return cmd_demo_pendulum(resolve_config(ov, false));
        }
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const SolverError& e) {
        std::cerr << "solver error: " << e.what() << "\n";
        return kExitSolver;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitSolver;
    }
    return kExitConfig;
}
