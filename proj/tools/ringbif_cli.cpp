// Command-line front end for the ring bifurcation analyses: equilibrium
// checks, Hessian blocks, spectral scans, bifurcation tables, stability
// windows, branch continuation and time integration. Exit codes: 0 success,
// 1 analysis-level failure or degeneracy, 2 usage error.

#include <CLI11.hpp>
#include <json.hpp>

#include <Eigen/Dense>
#include <iomanip>
#include <iostream>
#include <map>
#include <mutex>

#include "ringbif/continuation.hpp"
#include "ringbif/dynamics.hpp"
#include "ringbif/errors.hpp"
#include "ringbif/io.hpp"
#include "ringbif/model.hpp"
#include "ringbif/parallel.hpp"
#include "ringbif/spectral.hpp"
#include "ringbif/symmetry.hpp"

using namespace ringbif;
using nlohmann::json;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitAnalysis = 1;
constexpr int kExitUsage = 2;

struct CommonOpts {
  int n = 4;
  double mu = 0.0;
  double gamma = 0.0;
  std::string kind = "vortex";
  std::string json_path;
  std::string csv_path;
};

ProblemParams to_params(const CommonOpts& c) {
  ProblemParams p;
  p.n = c.n;
  p.mu = c.mu;
  p.gamma = c.gamma;
  p.kind = c.kind == "filament" ? Kind::Filament : Kind::Vortex;
  p.validate();
  return p;
}

void add_common(CLI::App* cmd, CommonOpts& c, bool with_kind = true) {
  cmd->add_option("--n", c.n, "number of peripheral elements")->required()->check(CLI::Range(2, 64));
  cmd->add_option("--mu", c.mu, "circulation of the central element");
  if (with_kind) {
    cmd->add_option("--gamma", c.gamma, "traveling-wave velocity (filament)");
    cmd->add_option("--kind", c.kind, "problem kind")
        ->check(CLI::IsMember({"vortex", "filament"}));
  }
  cmd->add_option("--json", c.json_path, "write machine-readable output to PATH");
  cmd->add_option("--csv", c.csv_path, "write table data to PATH");
}

void dump_json(const std::string& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open " + path);
  out << j.dump(2) << "\n";
}

std::string kind_name(Kind k) { return k == Kind::Vortex ? "vortex" : "filament"; }

json point_json(const BifurcationPoint& bp) {
  return json{{"k", bp.k},
              {"nu", bp.nu},
              {"eta", bp.eta},
              {"symmetry", bp.symmetry},
              {"provenance", bp.provenance == Provenance::ClosedForm ? "closed-form" : "scan"},
              {"det_residual", bp.det_residual},
              {"label", bp.label}};
}

int cmd_equilibrium(const CommonOpts& c) {
  const ProblemParams p = to_params(c);
  const auto a = ring_equilibrium(p);
  const double gnorm = grad_potential(a, p).norm();
  const Eigen::MatrixXd H = hess_potential(a, p);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(H, Eigen::EigenvaluesOnly);
  int kernel = 0;
  for (int i = 0; i < es.eigenvalues().size(); ++i)
    if (std::abs(es.eigenvalues()(i)) < 1e-9) ++kernel;

  std::cout << std::setprecision(8);
  std::cout << "ring equilibrium, n = " << p.n << ", mu = " << p.mu << "\n";
  std::cout << "  s1 = " << p.s1() << ", omega = " << p.omega() << "\n";
  std::cout << "  |grad V(a)| = " << gnorm << "\n";
  std::cout << "  Hessian kernel dimension = " << kernel << "\n";
  for (int j = 0; j <= p.n; ++j)
    std::cout << "  u" << j << " = (" << a(2 * j) << ", " << a(2 * j + 1) << ")\n";

  if (!c.json_path.empty())
    dump_json(c.json_path, json{{"n", p.n},
                                {"mu", p.mu},
                                {"omega", p.omega()},
                                {"grad_norm", gnorm},
                                {"kernel_dim", kernel}});
  return gnorm < 1e-10 ? kExitOk : kExitAnalysis;
}

int cmd_blocks(const CommonOpts& c) {
  const ProblemParams p = to_params(c);
  const auto dec = decompose_hessian(hess_potential(ring_equilibrium(p), p), p.n);
  double worst = 0.0;
  json jblocks = json::array();
  std::cout << std::setprecision(8);
  std::cout << "Hessian blocks at the ring equilibrium, n = " << p.n << ", mu = " << p.mu << "\n";
  std::cout << "off-block residual = " << dec.residual << "\n";
  bool conj_ok = true;
  for (int k = 1; k <= p.n; ++k) {
    const Eigen::MatrixXcd Ba = analytic_Bk(p, k);
    const Eigen::MatrixXcd Bn = dec.blocks.at(k);
    const double dev = (Ba - Bn).cwiseAbs().maxCoeff();
    worst = std::max(worst, dev);
    const int kc = (p.n - k) % p.n == 0 ? p.n : p.n - k;
    const double conj_dev = (dec.blocks.at(kc) - Bn.conjugate()).cwiseAbs().maxCoeff();
    conj_ok = conj_ok && conj_dev < 1e-8;
    std::cout << "k = " << k << "  (" << Ba.rows() << "x" << Ba.cols() << ")  |analytic-numeric| = "
              << dev << "\n";
    for (int r = 0; r < Ba.rows(); ++r) {
      std::cout << "   ";
      for (int s = 0; s < Ba.cols(); ++s)
        std::cout << " (" << Ba(r, s).real() << (Ba(r, s).imag() < 0 ? "" : "+") << Ba(r, s).imag()
                  << "i)";
      std::cout << "\n";
    }
    json entries = json::array();
    for (int r = 0; r < Ba.rows(); ++r)
      for (int s = 0; s < Ba.cols(); ++s)
        entries.push_back(json{{"row", r}, {"col", s}, {"re", Ba(r, s).real()}, {"im", Ba(r, s).imag()}});
    jblocks.push_back(json{{"k", k}, {"deviation", dev}, {"entries", entries}});
  }
  std::cout << "conjugate pairing B_(n-k) = conj(B_k): " << (conj_ok ? "OK" : "FAILED") << "\n";
  if (!c.json_path.empty())
    dump_json(c.json_path, json{{"n", p.n},
                                {"mu", p.mu},
                                {"off_block_residual", dec.residual},
                                {"max_deviation", worst},
                                {"conjugate_pairing_ok", conj_ok},
                                {"blocks", jblocks}});
  return (worst <= 1e-8 && conj_ok) ? kExitOk : kExitAnalysis;
}

int cmd_spectrum(const CommonOpts& c, int k, double nu_max, int grid) {
  const ProblemParams p = to_params(c);
  if (k < 1 || k > p.n) throw CLI::ValidationError("--k must lie in 1..n");
  if (nu_max <= 0.0) nu_max = scan_nu_bound(k, p);
  std::vector<std::vector<double>> rows;
  for (int i = 0; i <= grid; ++i) {
    const double nu = nu_max * i / grid;
    const auto blk = block_m(k, nu, p);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(blk.m, Eigen::EigenvaluesOnly);
    std::vector<double> row{double(k), nu, blk.m.determinant().real(),
                            double(morse_index(blk.m))};
    for (int e = 0; e < es.eigenvalues().size(); ++e) row.push_back(es.eigenvalues()(e));
    rows.push_back(row);
  }
  std::vector<std::string> header{"k", "nu", "det", "morse"};
  const int nev = static_cast<int>(rows.front().size()) - 4;
  for (int e = 0; e < nev; ++e) header.push_back("lambda" + std::to_string(e));

  std::cout << "spectrum of m_" << k << "(nu), " << kind_name(p.kind) << ", n = " << p.n
            << ", mu = " << p.mu << ", nu in [0, " << nu_max << "], " << grid + 1 << " samples\n";
  if (!c.csv_path.empty()) {
    write_csv(c.csv_path, header, rows);
    write_gnuplot_script(c.csv_path + ".gp", c.csv_path, "det m_k(nu) and eigenvalues",
                         {{2, 3}, {2, 5}}, {"det", "lambda0"});
    std::cout << "wrote " << c.csv_path << " and " << c.csv_path << ".gp\n";
  }
  if (!c.json_path.empty()) {
    json jr = json::array();
    for (const auto& r : rows) jr.push_back(json{{"nu", r[1]}, {"det", r[2]}, {"morse", int(r[3])}});
    dump_json(c.json_path,
              json{{"kind", kind_name(p.kind)}, {"n", p.n}, {"mu", p.mu}, {"gamma", p.gamma},
                   {"k", k}, {"samples", jr}});
  }
  return kExitOk;
}

int cmd_bifurcations(const CommonOpts& c, int k_sel, double nu_max, int grid) {
  const ProblemParams p = to_params(c);
  std::vector<int> ks;
  if (k_sel > 0)
    ks.push_back(k_sel);
  else
    for (int k = 1; k <= p.n; ++k) ks.push_back(k);

  std::vector<BifurcationPoint> all;
  std::mutex m;
  std::string degenerate;
  parallel_for(ks.size(), [&](std::size_t i) {
    const int k = ks[i];
    try {
      std::vector<BifurcationPoint> pts = p.kind == Kind::Vortex
                                              ? vortex_bif_points(k, p)
                                              : filament_bif_points(k, p);
      if (nu_max > 0.0) {
        // optional window filter plus re-scan for completeness
        const auto sr = scan_bif_points(k, p, 1e-6, nu_max, std::max(grid, 100));
        for (const auto& sp : sr.points) {
          const bool known = std::any_of(pts.begin(), pts.end(), [&](const BifurcationPoint& b) {
            return std::abs(b.nu - sp.nu) < 1e-6;
          });
          if (!known) pts.push_back(sp);
        }
      }
      std::scoped_lock lock(m);
      all.insert(all.end(), pts.begin(), pts.end());
    } catch (const DegenerateParameterError& e) {
      std::scoped_lock lock(m);
      if (degenerate.empty()) degenerate = e.what();
    }
  });
  if (!degenerate.empty()) {
    std::cerr << "degenerate parameter: " << degenerate << "\n";
    return kExitAnalysis;
  }
  std::sort(all.begin(), all.end(), [](const BifurcationPoint& a, const BifurcationPoint& b) {
    return a.k != b.k ? a.k < b.k : a.nu < b.nu;
  });

  std::cout << std::setprecision(8);
  std::cout << "bifurcation points, " << kind_name(p.kind) << ", n = " << p.n << ", mu = " << p.mu;
  if (p.kind == Kind::Filament) std::cout << ", gamma = " << p.gamma;
  std::cout << "\n  k      nu           eta  symmetry    provenance   det_residual  label\n";
  for (const auto& bp : all)
    std::cout << "  " << std::left << std::setw(6) << bp.k << std::setw(13) << bp.nu
              << std::setw(5) << bp.eta << std::setw(12) << bp.symmetry << std::setw(13)
              << (bp.provenance == Provenance::ClosedForm ? "closed-form" : "scan")
              << std::setw(14) << bp.det_residual << bp.label << "\n";

  if (!c.csv_path.empty()) {
    std::ofstream out(c.csv_path);
    out << std::setprecision(17) << "k,nu,eta,symmetry,provenance,det_residual\n";
    for (const auto& bp : all)
      out << bp.k << "," << bp.nu << "," << bp.eta << "," << bp.symmetry << ","
          << (bp.provenance == Provenance::ClosedForm ? "closed-form" : "scan") << ","
          << bp.det_residual << "\n";
  }
  if (!c.json_path.empty()) {
    json jp = json::array();
    for (const auto& bp : all) jp.push_back(point_json(bp));
    dump_json(c.json_path, json{{"kind", kind_name(p.kind)},
                                {"n", p.n},
                                {"mu", p.mu},
                                {"gamma", p.gamma},
                                {"points", jp}});
  }
  return kExitOk;
}

int cmd_stability(const CommonOpts& c, double check_mu, bool has_check) {
  if (c.n < 3) throw CLI::ValidationError("stability requires n >= 3");
  const auto w = stability_window(c.n);
  std::cout << std::setprecision(8);
  std::cout << "spectral stability window for n = " << c.n << ": mu in (" << w.mu_lo << ", "
            << w.mu_hi << ")\n";
  json j{{"n", c.n}, {"mu_lo", w.mu_lo}, {"mu_hi", w.mu_hi}};
  if (has_check) {
    const auto chk = stability_check(c.n, check_mu);
    std::cout << "mu = " << check_mu << ": spectral_ok = " << (chk.spectral_ok ? "true" : "false")
              << ", max |Re lambda| = " << chk.max_real_part
              << ", imaginary-axis roots = " << chk.imag_axis_roots << " (target "
              << 2 * (c.n + 1) << ")\n";
    j["check_mu"] = check_mu;
    j["spectral_ok"] = chk.spectral_ok;
    j["max_real_part"] = chk.max_real_part;
    j["imag_axis_roots"] = chk.imag_axis_roots;
  }
  if (!c.json_path.empty()) dump_json(c.json_path, j);
  return kExitOk;
}

int cmd_branch(const CommonOpts& c, int k, const std::string& point_sel, double amplitude,
               int steps, int trunc) {
  const ProblemParams p = to_params(c);
  if (k < 1 || k > p.n) throw CLI::ValidationError("--k must lie in 1..n");
  if (amplitude <= 0.0) throw CLI::ValidationError("--amplitude must be positive");

  std::vector<BifurcationPoint> pts =
      p.kind == Kind::Vortex ? vortex_bif_points(k, p) : filament_bif_points(k, p);
  if (pts.empty()) {
    std::cerr << "no bifurcation points for k = " << k << " at these parameters\n";
    return kExitAnalysis;
  }
  const BifurcationPoint* chosen = nullptr;
  if (point_sel.rfind("scan:", 0) == 0) {
    const std::size_t idx = std::stoul(point_sel.substr(5));
    if (idx < pts.size()) chosen = &pts[idx];
  } else if (!point_sel.empty()) {
    for (const auto& bp : pts)
      if (bp.label == point_sel) chosen = &bp;
  } else {
    chosen = &pts.front();
  }
  if (!chosen) {
    std::cerr << "point selector '" << point_sel << "' does not match; available:";
    for (std::size_t i = 0; i < pts.size(); ++i)
      std::cerr << " [" << i << "] " << pts[i].label << " (nu = " << pts[i].nu << ")";
    std::cerr << "\n";
    return kExitAnalysis;
  }

  std::cout << std::setprecision(8);
  std::cout << "continuing branch: " << kind_name(p.kind) << " n = " << p.n << " mu = " << p.mu
            << " k = " << k << " nu0 = " << chosen->nu << " eta = " << chosen->eta << "\n";
  const auto pred = predictor(k, *chosen, amplitude, p, trunc);
  const auto st = newton_correct(pred, k, amplitude, p);
  const auto br = continue_branch(st, k, steps, p);

  std::cout << "termination: " << to_string(br.termination)
            << (br.detail.empty() ? "" : " (" + br.detail + ")") << ", " << br.states.size()
            << " states\n";
  std::cout << "  step  nu           amplitude     residual      symmetry_res\n";
  for (std::size_t i = 0; i < br.states.size(); ++i) {
    const auto& s = br.states[i];
    std::cout << "  " << std::left << std::setw(6) << i << std::setw(13) << s.loop.nu
              << std::setw(14) << s.amplitude << std::setw(14) << s.residual_norm
              << s.symmetry_res << "\n";
  }

  if (!c.json_path.empty()) {
    json jstates = json::array();
    for (const auto& s : br.states)
      jstates.push_back(json{{"k", k},
                             {"nu", s.loop.nu},
                             {"amplitude", s.amplitude},
                             {"residual_norm", s.residual_norm},
                             {"symmetry_residual", s.symmetry_res},
                             {"termination", to_string(br.termination)}});
    dump_json(c.json_path, json{{"kind", kind_name(p.kind)},
                                {"n", p.n},
                                {"mu", p.mu},
                                {"gamma", p.gamma},
                                {"k", k},
                                {"nu0", chosen->nu},
                                {"eta", chosen->eta},
                                {"termination", to_string(br.termination)},
                                {"states", jstates}});
  }
  if (!c.csv_path.empty()) {
    write_loop_modes_csv(c.csv_path + ".modes.csv", br.states.back().loop);
    write_loop_samples_csv(c.csv_path + ".samples.csv", br.states.back().loop);
    write_gnuplot_script(c.csv_path + ".gp", c.csv_path + ".samples.csv", "final branch loop",
                         {{2, 3}, {4, 5}}, {"element 0", "element 1"});
    std::cout << "wrote " << c.csv_path << ".modes.csv, .samples.csv, .gp\n";
  }
  return kExitOk;
}

int cmd_simulate(const CommonOpts& c, double perturb, int pert_k, double t_end, double tol) {
  const ProblemParams p = to_params(c);
  if (p.mu == 0.0)
    throw CLI::ValidationError("simulate requires mu != 0 (central equation degenerates)");

  const auto a = ring_equilibrium(p);
  Eigen::VectorXd u0 = a;
  if (perturb != 0.0) {
    const int k = pert_k > 0 ? pert_k : std::max(1, p.n / 2);
    Eigen::VectorXd dir = irrep_basis(p.n, k).columns.col(0).real();
    if (dir.norm() < 1e-12) dir = irrep_basis(p.n, k).columns.col(0).imag();
    u0 += perturb * dir.normalized();
  }

  IntegratorConfig ic;
  ic.t_end = t_end;
  ic.tol = tol;
  Trajectory tr;
  if (p.kind == Kind::Vortex)
    tr = integrate_vortex(u0, p, ic);
  else
    tr = integrate_filament_tw(u0, Eigen::VectorXd::Zero(p.dim()), p, ic);

  std::cout << std::setprecision(8);
  std::cout << kind_name(p.kind) << " trajectory: " << tr.t.size() << " samples, t_end = "
            << tr.t.back() << "\n";
  std::cout << "  drift V = " << tr.drift.potential;
  if (p.kind == Kind::Vortex)
    std::cout << ", drift sum kappa |u|^2 = " << tr.drift.kappa_norm;
  else
    std::cout << ", drift TW energy = " << tr.drift.tw_energy;
  std::cout << "\n";

  json j{{"kind", kind_name(p.kind)},
         {"n", p.n},
         {"mu", p.mu},
         {"gamma", p.gamma},
         {"t_end", tr.t.back()},
         {"samples", tr.t.size()},
         {"drift_potential", tr.drift.potential},
         {"drift_kappa_norm", tr.drift.kappa_norm},
         {"drift_tw_energy", tr.drift.tw_energy},
         {"collided", tr.collided}};
  if (tr.collided) {
    j["t_collision"] = tr.t_collision;
    j["collision_pair"] = json::array({tr.collision_i, tr.collision_j});
    std::cout << "  collision at t = " << tr.t_collision << " between elements " << tr.collision_i
              << " and " << tr.collision_j << "\n";
  }
  if (!c.csv_path.empty()) {
    write_trajectory_csv(c.csv_path, tr);
    write_gnuplot_script(c.csv_path + ".gp", c.csv_path, "trajectory", {{2, 3}, {4, 5}},
                         {"element 0", "element 1"});
    std::cout << "wrote " << c.csv_path << " and " << c.csv_path << ".gp\n";
  }
  if (!c.json_path.empty()) dump_json(c.json_path, j);
  return tr.collided ? kExitAnalysis : kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ring bifurcation toolkit: polygonal (n+1)-vortex / filament analysis"};
  app.require_subcommand(1);

  CommonOpts ce, cb, cs, cbf, cst, cbr, csim;
  int spec_k = 1, bif_k = 0, br_k = 1, pert_k = 0;
  double nu_max = -1.0, bif_nu_max = -1.0;
  int grid = 400, bif_grid = 400;
  double check_mu = 0.0;
  double amplitude = 1e-3;
  int steps = 20, trunc = 16;
  std::string point_sel;
  double perturb = 0.0, t_end = 100.0, tol = 1e-10;

  auto* eq = app.add_subcommand("equilibrium", "ring equilibrium and gradient check");
  add_common(eq, ce, false);

  auto* bl = app.add_subcommand("blocks", "analytic vs numeric Hessian blocks B_k");
  add_common(bl, cb, false);

  auto* sp = app.add_subcommand("spectrum", "eigenvalues and det of m_k over a nu grid");
  add_common(sp, cs);
  sp->add_option("--k", spec_k, "block index")->required();
  sp->add_option("--nu-max", nu_max, "scan upper bound (auto if omitted)");
  sp->add_option("--grid", grid, "number of grid intervals")->check(CLI::PositiveNumber);

  auto* bf = app.add_subcommand("bifurcations", "bifurcation frequencies and index jumps");
  add_common(bf, cbf);
  bf->add_option("--k", bif_k, "restrict to one block index");
  bf->add_option("--nu-max", bif_nu_max, "augment closed forms with a scan up to this nu");
  bf->add_option("--grid", bif_grid, "scan grid intervals");

  auto* st = app.add_subcommand("stability", "spectral stability window (vortex)");
  add_common(st, cst, false);
  auto* chk = st->add_option("--check-mu", check_mu, "numeric spectral verdict at this mu");

  auto* br = app.add_subcommand("branch", "continue a bifurcating periodic orbit");
  add_common(br, cbr);
  br->add_option("--k", br_k, "block index")->required();
  br->add_option("--point", point_sel,
                 "nu_plus|nu_minus|nu_bar_plus|nu_bar_minus|nu0|nu1|nu_k|scan:INDEX");
  br->add_option("--amplitude", amplitude, "starting amplitude pin");
  br->add_option("--steps", steps, "continuation steps")->check(CLI::PositiveNumber);
  br->add_option("--trunc", trunc, "Fourier truncation p")->check(CLI::Range(4, 64));

  auto* sim = app.add_subcommand("simulate", "integrate the vortex or filament system");
  add_common(sim, csim);
  sim->add_option("--perturb", perturb, "mode perturbation amplitude");
  sim->add_option("--k", pert_k, "perturbation mode index (default n/2)");
  sim->add_option("--t-end", t_end, "integration horizon")->check(CLI::PositiveNumber);
  sim->add_option("--tol", tol, "adaptive tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (eq->parsed()) return cmd_equilibrium(ce);
    if (bl->parsed()) return cmd_blocks(cb);
    if (sp->parsed()) return cmd_spectrum(cs, spec_k, nu_max, grid);
    if (bf->parsed()) return cmd_bifurcations(cbf, bif_k, bif_nu_max, bif_grid);
    if (st->parsed()) return cmd_stability(cst, check_mu, chk->count() > 0);
    if (br->parsed()) return cmd_branch(cbr, br_k, point_sel, amplitude, steps, trunc);
    if (sim->parsed()) return cmd_simulate(csim, perturb, pert_k, t_end, tol);
  } catch (const CLI::ValidationError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const UnsupportedParameterError& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DegenerateParameterError& e) {
    std::cerr << "degenerate parameter: " << e.what() << "\n";
    return kExitAnalysis;
  } catch (const CollisionError& e) {
    std::cerr << "collision: " << e.what() << "\n";
    return kExitAnalysis;
  } catch (const NewtonFailure& e) {
    std::cerr << "newton failure: " << e.what() << " (residual " << e.residual << ")\n";
    return kExitAnalysis;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitAnalysis;
  }
  return kExitUsage;
}
