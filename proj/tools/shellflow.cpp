// shellflow CLI: simulate / verify / convergence / fbm-sample over a flat
// key=value config. Exit codes: 0 ok, 1 config error, 2 blow-up guard,
// 3 audit or convergence failure.

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <random>
#include <sstream>

#include "shellflow/config.hpp"
#include "shellflow/runio.hpp"

using namespace shellflow;
namespace fs = std::filesystem;

namespace {

const std::vector<std::string> kKnownKeys = {
    "model", "a", "b", "k0", "lambda", "n_shells", "hurst", "beta_prime",
    "beta_hat", "delta", "alpha", "dt", "horizon", "seed", "scheme", "levels",
    "n_grid", "noise_level", "q_decay", "n_checkpoints", "audits",
    "diffusion.profile", "diffusion.sigma", "diffusion.decay",
    "test_hook.flip_bn_sign"};

struct Setup {
  LadderPtr ladder;
  ShellCoefficients coeffs;
  SolverConfig solver;
  FbmSpec fbm;
  TraceClassCov cov;
  int noise_level = 6;
  std::uint64_t seed = 0;
  ShapeProfile profile = ShapeProfile::tanh_profile;
  double sigma = 0.1;
  double decay = 0.5;
  int n_checkpoints = 8;

  DiffusionSpec diffusion() const {
    return DiffusionSpec(ladder, cov.modes(), profile, sigma, decay,
                         solver.delta);
  }
};

bool is_pow2(std::size_t x) { return x >= 1 && (x & (x - 1)) == 0; }

Setup build_setup(const Config& cfg) {
  cfg.require_known(kKnownKeys);
  Setup s;

  const std::string model = cfg.get_string("model", "goy");
  if (model == "goy")
    s.coeffs.kind = ShellModel::goy;
  else if (model == "sabra")
    s.coeffs.kind = ShellModel::sabra;
  else
    throw ConfigError("config: key 'model' must be goy or sabra");
  s.coeffs.a = cfg.get_double("a", 1.0);
  s.coeffs.b = cfg.get_double("b", -0.5);
  if (cfg.get_int("test_hook.flip_bn_sign", 0) != 0) s.coeffs.first_term_sign = -1.0;

  const double k0 = cfg.get_double("k0", 1.0);
  const double lambda = cfg.get_double("lambda", 2.0);
  const int n_shells = static_cast<int>(cfg.get_int("n_shells", 16));
  if (n_shells < 1) throw ConfigError("config: key 'n_shells' must be >= 1");
  s.ladder = make_ladder(k0, lambda, n_shells);

  if (!cfg.has("hurst")) throw ConfigError("config: missing key 'hurst'");
  s.fbm.hurst = cfg.get_double("hurst");
  s.fbm.horizon = cfg.get_double("horizon", 1.0);
  s.seed = static_cast<std::uint64_t>(cfg.get_int("seed", 42));
  s.fbm.seed = s.seed;

  s.solver.dt = cfg.get_double("dt", 1.0 / 1024.0);
  s.solver.horizon = s.fbm.horizon;
  s.solver.beta_prime = cfg.get_double("beta_prime", 0.7);
  s.solver.beta_hat = cfg.get_double("beta_hat", 0.55);
  s.solver.delta = cfg.get_double("delta", 0.75);
  s.solver.alpha = cfg.get_double("alpha", 0.0);
  s.solver.scheme = scheme_from_name(cfg.get_string("scheme", "exponential_euler"));
  if (!(s.solver.beta_prime < s.fbm.hurst))
    throw ConfigError("config: key 'beta_prime' must be < hurst");
  try {
    s.solver.validate();
    s.fbm.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("config: ") + e.what());
  }

  const double steps_real = s.solver.horizon / s.solver.dt;
  const auto steps = static_cast<std::size_t>(std::llround(steps_real));
  if (std::abs(steps_real - static_cast<double>(steps)) > 1e-9 || steps < 1)
    throw ConfigError("config: key 'dt' must divide horizon");

  const long default_grid = is_pow2(steps) ? static_cast<long>(steps) : 1024;
  s.fbm.n_grid = static_cast<std::size_t>(cfg.get_int("n_grid", default_grid));
  if (!is_pow2(s.fbm.n_grid))
    throw ConfigError("config: key 'n_grid' must be a power of two");

  s.noise_level = static_cast<int>(cfg.get_int("noise_level", 6));
  const std::size_t pieces = std::size_t{1} << s.noise_level;
  if (pieces > s.fbm.n_grid)
    throw ConfigError("config: key 'noise_level' exceeds log2(n_grid)");
  if (steps % pieces != 0)
    throw ConfigError("config: key 'noise_level' incompatible with dt (2^level must divide horizon/dt)");

  const double q_decay = cfg.get_double("q_decay", 0.5);
  if (!(q_decay > 0.0 && q_decay < 1.0))
    throw ConfigError("config: key 'q_decay' must lie in (0, 1)");
  s.cov = TraceClassCov::geometric(n_shells, q_decay);

  s.profile = profile_from_name(cfg.get_string("diffusion.profile", "tanh"));
  s.sigma = cfg.get_double("diffusion.sigma", 0.1);
  s.decay = cfg.get_double("diffusion.decay", 0.5);
  s.n_checkpoints = static_cast<int>(cfg.get_int("n_checkpoints", 8));
  return s;
}

SpectralState default_u0(const LadderPtr& ladder, int support = 0) {
  // smooth initial profile u_n = 2^{-n}, optionally cut to the first shells
  const int top = support > 0 ? std::min(support, ladder->n_shells())
                              : ladder->n_shells();
  std::vector<cplx> c(static_cast<std::size_t>(ladder->n_shells()));
  for (int n = 1; n <= top; ++n)
    c[static_cast<std::size_t>(n - 1)] = cplx{std::pow(2.0, -n), 0.0};
  return SpectralState(ladder, std::move(c));
}

int run_simulate(const std::string& cfg_path) {
  const auto t_start = std::chrono::steady_clock::now();
  Config cfg = Config::parse_file(cfg_path);
  Setup s = build_setup(cfg);

  const HilbertPath raw = sample_fbm_hilbert(s.fbm, s.cov);
  const HilbertPath omega = piecewise_linear_restrict(raw, s.noise_level);
  const DiffusionSpec spec = s.diffusion();
  const SpectralState u0 = default_u0(s.ladder);

  const fs::path dir = make_run_dir(s.seed);
  write_path_binary(raw, dir / "noise.bin");

  bool pass = true;
  std::string extra = "{}";
  int code = 0;
  try {
    const Trajectory traj = integrate_galerkin(u0, omega, s.solver, spec, s.coeffs);
    write_trajectory_csv(traj, dir / "trajectory.csv");
  } catch (const BlowUpError& e) {
    pass = false;
    code = 2;
    nlohmann::json j;
    j["error"] = "blow_up";
    j["time"] = e.time;
    extra = j.dump();
    std::cerr << "simulate: " << e.what() << "\n";
  }
  const double wall =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();
  std::vector<fs::path> outputs = {dir / "noise.bin"};
  if (pass) outputs.push_back(dir / "trajectory.csv");
  write_manifest(dir, cfg, s.seed, pass, wall, outputs, extra);
  std::cout << dir.string() << "\n";
  return code;
}

int run_fbm_sample(const std::string& cfg_path) {
  const auto t_start = std::chrono::steady_clock::now();
  Config cfg = Config::parse_file(cfg_path);
  Setup s = build_setup(cfg);
  const HilbertPath raw = sample_fbm_hilbert(s.fbm, s.cov);
  const fs::path dir = make_run_dir(s.seed);
  write_path_binary(raw, dir / "noise.bin");
  write_path_csv(raw, dir / "noise.csv");
  const double wall =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();
  nlohmann::json j;
  j["dense_fallback"] = raw.meta.dense_fallback;
  write_manifest(dir, cfg, s.seed, true, wall, {dir / "noise.bin", dir / "noise.csv"},
                 j.dump());
  std::cout << dir.string() << "\n";
  return 0;
}

// ---- verify audits ----------------------------------------------------

SpectralState random_state(const LadderPtr& lad, std::mt19937_64& eng, double amp) {
  std::normal_distribution<double> N(0.0, amp);
  SpectralState u(lad);
  for (int n = 1; n <= u.n_shells(); ++n) u.mut(n) = cplx{N(eng), N(eng)};
  return u;
}

nlohmann::json audit_skew_symmetry(const Setup& s, bool& pass) {
  std::mt19937_64 eng(7);
  double worst_incomp = 0.0, worst_skew = 0.0;
  for (int it = 0; it < 200; ++it) {
    const SpectralState u = random_state(s.ladder, eng, 1.0);
    const SpectralState v = random_state(s.ladder, eng, 1.0);
    const double scl =
        weighted_norm(u, 0.5) * weighted_norm(v, 0.0) * weighted_norm(v, 0.0) + 1e-300;
    cplx sum{0.0, 0.0};
    for (int n = 1; n <= u.n_shells(); ++n)
      sum += b_component(u, v, n, s.coeffs) * std::conj(v.at(n));
    worst_incomp = std::max(worst_incomp, std::abs(sum.real()) / scl);
    const cplx tri = trilinear_form(u, v, v, s.coeffs);
    const double skew =
        s.coeffs.kind == ShellModel::goy ? std::abs(tri) : std::abs(tri.real());
    worst_skew = std::max(worst_skew, skew / scl);
  }
  pass = worst_incomp <= 1e-12 && worst_skew <= 1e-12;
  return {{"worst_incomp", worst_incomp}, {"worst_skew", worst_skew}};
}

nlohmann::json audit_integral_oracles(bool& pass) {
  const std::size_t m = 2048;
  GridFn z{0, 1, {}}, zeta{0, 1, {}};
  z.v.resize(m + 1);
  zeta.v.resize(m + 1);
  for (std::size_t j = 0; j <= m; ++j) {
    const double t = z.time(j);
    z.v[j] = 1.0;
    zeta.v[j] = t * t;
  }
  const double e1 = std::abs(young_integral_scalar(z, zeta, FracOrder(0.5)).value - 1.0);
  for (std::size_t j = 0; j <= m; ++j) z.v[j] = z.time(j);
  const double e2 =
      std::abs(young_integral_scalar(z, zeta, FracOrder(0.5)).value - 2.0 / 3.0);
  std::vector<double> ones(m + 1, 1.0);
  const double e3 = std::abs(weighted_singular_integral(ones, 0.0, 1.0, -0.5, -0.5) -
                             M_PI);
  pass = e1 <= 1e-10 && e2 <= 1e-5 && e3 <= 1e-8;
  return {{"unit_integrator_err", e1}, {"chain_rule_err", e2}, {"beta_identity_err", e3}};
}

nlohmann::json audit_energy(const Setup& s, bool& pass) {
  SolverConfig cfg = s.solver;
  cfg.horizon = std::min(cfg.horizon, 0.25);
  // the 1e-6 energy tolerance needs the fine fixture step
  cfg.dt = std::min(cfg.dt, 1e-4);
  FbmSpec fb = s.fbm;
  fb.horizon = cfg.horizon;
  fb.n_grid = 256;
  const HilbertPath raw = sample_fbm_hilbert(fb, s.cov);
  const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  int level = 4;
  while (level > 0 && (steps % (std::size_t{1} << level)) != 0) --level;
  const HilbertPath omega = piecewise_linear_restrict(raw, level);
  const DiffusionSpec spec = s.diffusion();
  const Trajectory traj =
      integrate_galerkin(default_u0(s.ladder, 2), omega, cfg, spec, s.coeffs);
  const AuditReport rep = energy_audit(traj, spec);
  pass = rep.pass && rep.fitted.at("majorant_min_slack") >= 0.0;
  return {{"min_slack", rep.min_slack()},
          {"tolerance", rep.tolerance},
          {"majorant_min_slack", rep.fitted.at("majorant_min_slack")}};
}

nlohmann::json audit_hoelder(const Setup& s, bool& pass) {
  SolverConfig cfg = s.solver;
  cfg.horizon = std::min(cfg.horizon, 0.25);
  FbmSpec fb = s.fbm;
  fb.horizon = cfg.horizon;
  fb.n_grid = 256;
  const HilbertPath raw = sample_fbm_hilbert(fb, s.cov);
  const std::size_t steps = static_cast<std::size_t>(std::llround(cfg.horizon / cfg.dt));
  int level = 4;
  while (level > 0 && (steps % (std::size_t{1} << level)) != 0) --level;
  const HilbertPath omega = piecewise_linear_restrict(raw, level);
  const DiffusionSpec spec = s.diffusion();
  const Trajectory traj =
      integrate_galerkin(default_u0(s.ladder, 2), omega, cfg, spec, s.coeffs);
  const double fixture_c = 2.0;  // recorded headroom over measured c_fit
  const AuditReport rep = holder_audit(traj, fixture_c);
  pass = rep.pass;
  return {{"c_fit", rep.fitted.at("c_fit")}, {"fixture", fixture_c}};
}

nlohmann::json audit_er_bound(const Setup& s, bool& pass) {
  FbmSpec fb;
  fb.hurst = s.fbm.hurst;
  fb.horizon = 1.0;
  fb.n_grid = 512;
  fb.seed = s.seed;
  const double bp = s.solver.beta_prime;
  const double alpha = s.solver.effective_alpha();
  const HilbertPath omega = sample_fbm_1d(fb);
  GridFn f{0, 1, {}};
  f.v.resize(fb.n_grid + 1);
  for (std::size_t j = 0; j <= fb.n_grid; ++j) f.v[j] = omega.value(j, 0);
  const double semi = holder_seminorm(omega, bp);
  const double cer = er_constant(alpha, bp);
  double worst = -1.0;
  std::mt19937_64 eng(s.seed + 1);
  std::uniform_int_distribution<std::size_t> J(0, fb.n_grid - 1);
  for (int it = 0; it < 20; ++it) {
    const std::size_t j = J(eng);
    const double tr = 1.0 - f.time(j);
    const double lhs = std::abs(frac_deriv_right(f, FracOrder(alpha), j, bp));
    const double rhs = cer * semi * std::pow(tr, alpha + bp - 1.0);
    worst = std::max(worst, lhs - rhs);
  }
  pass = worst <= 0.0;
  return {{"worst_excess", worst}};
}

nlohmann::json audit_l3_bound(const Setup& s, bool& pass) {
  const double bp = s.solver.beta_prime;
  const double alpha = s.solver.effective_alpha();
  double worst = -1.0;
  for (int rep = 0; rep < 5; ++rep) {
    FbmSpec fb;
    fb.hurst = s.fbm.hurst;
    fb.horizon = 1.0;
    fb.n_grid = 256;
    fb.seed = s.seed + static_cast<std::uint64_t>(rep);
    const HilbertPath omega = sample_fbm_hilbert(fb, TraceClassCov::geometric(2, 0.5));
    OperatorPath Z;
    Z.horizon = 1.0;
    Z.m = fb.n_grid;
    Z.rows = 2;
    Z.cols = 2;
    Z.values.assign((Z.m + 1) * 4, cplx{0.0, 0.0});
    for (std::size_t j = 0; j <= Z.m; ++j) {
      const double th = 0.3 * static_cast<double>(j) / static_cast<double>(Z.m) +
                        0.1 * static_cast<double>(rep);
      Z.at(j, 0, 0) = std::cos(th);
      Z.at(j, 0, 1) = -std::sin(th);
      Z.at(j, 1, 0) = std::sin(th);
      Z.at(j, 1, 1) = std::cos(th);
    }
    const auto r = young_integral_operator(Z, omega, FracOrder(alpha), {1.0, bp});
    double norm = 0.0;
    for (const auto& v : r.value) norm += std::norm(v);
    worst = std::max(worst, std::sqrt(norm) - r.l3_bound);
  }
  pass = worst <= 0.0;
  return {{"worst_excess", worst}};
}

int run_verify(const std::string& cfg_path) {
  const auto t_start = std::chrono::steady_clock::now();
  Config cfg = Config::parse_file(cfg_path);
  Setup s = build_setup(cfg);
  const std::string list = cfg.get_string(
      "audits", "skew_symmetry,integral_oracles,energy,hoelder,er_bound,l3_bound");
  std::vector<std::string> names;
  {
    std::istringstream in(list);
    std::string tok;
    while (std::getline(in, tok, ',')) {
      while (!tok.empty() && tok.front() == ' ') tok.erase(tok.begin());
      while (!tok.empty() && tok.back() == ' ') tok.pop_back();
      if (!tok.empty()) names.push_back(tok);
    }
  }
  if (names.empty())
    throw ConfigError("config: key 'audits' lists nothing to verify");

  nlohmann::json bundle = nlohmann::json::array();
  std::string first_fail;
  for (const auto& name : names) {
    bool ok = false;
    nlohmann::json detail;
    if (name == "skew_symmetry")
      detail = audit_skew_symmetry(s, ok);
    else if (name == "integral_oracles")
      detail = audit_integral_oracles(ok);
    else if (name == "energy")
      detail = audit_energy(s, ok);
    else if (name == "hoelder")
      detail = audit_hoelder(s, ok);
    else if (name == "er_bound")
      detail = audit_er_bound(s, ok);
    else if (name == "l3_bound")
      detail = audit_l3_bound(s, ok);
    else
      throw ConfigError("config: key 'audits' names unknown audit '" + name + "'");
    bundle.push_back({{"name", name}, {"pass", ok}, {"detail", detail}});
    if (!ok && first_fail.empty()) first_fail = name;
  }

  const fs::path dir = make_run_dir(s.seed);
  {
    std::ofstream out(dir / "audits.json");
    out << bundle.dump(2) << "\n";
  }
  const double wall =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();
  write_manifest(dir, cfg, s.seed, first_fail.empty(), wall, {dir / "audits.json"});
  std::cout << dir.string() << "\n";
  if (!first_fail.empty()) {
    std::cerr << "verify: audit failed: " << first_fail << "\n";
    return 3;
  }
  return 0;
}

int run_convergence(const std::string& cfg_path) {
  const auto t_start = std::chrono::steady_clock::now();
  Config cfg = Config::parse_file(cfg_path);
  Setup s = build_setup(cfg);
  std::vector<int> levels = {3, 4, 5, 6};
  if (cfg.has("levels")) levels = cfg.get_int_list("levels");
  if (levels.size() < 2)
    throw ConfigError("config: key 'levels' needs at least two levels");
  const std::size_t steps =
      static_cast<std::size_t>(std::llround(s.solver.horizon / s.solver.dt));
  for (int lv : levels) {
    const std::size_t pieces = std::size_t{1} << lv;
    if (pieces > s.fbm.n_grid || steps % pieces != 0)
      throw ConfigError("config: key 'levels' has an entry incompatible with dt/n_grid");
  }

  const HilbertPath raw = sample_fbm_hilbert(s.fbm, s.cov);
  const DiffusionSpec spec = s.diffusion();
  const SpectralState u0 = default_u0(s.ladder);

  const auto rows = noise_refinement_study(u0, raw, levels, s.solver, spec, s.coeffs);
  const HilbertPath omega = piecewise_linear_restrict(raw, s.noise_level);
  const UniquenessProbe probe = uniqueness_probe(u0, omega, s.solver, spec, s.coeffs);

  const fs::path dir = make_run_dir(s.seed);
  {
    std::string text = "level,diff,seminorm,fitted_constant\n";
    char buf[160];
    for (const auto& r : rows) {
      std::snprintf(buf, sizeof buf, "%d,%.17g,%.17g,%.17g\n", r.level,
                    r.diff_minus_delta, r.noise_dist, r.fitted_c);
      text += buf;
    }
    std::ofstream out(dir / "convergence.csv", std::ios::binary);
    out << text;
  }
  {
    char buf[200];
    std::snprintf(buf, sizeof buf, "dt,divergence\n%.17g,%.17g\n%.17g,%.17g\n%.17g,%.17g\n",
                  s.solver.dt, probe.div_dt, s.solver.dt / 2, probe.div_dt2,
                  s.solver.dt / 4, probe.div_dt4);
    std::ofstream out(dir / "uniqueness.csv", std::ios::binary);
    out << buf;
  }

  bool decreasing = true;
  const bool all_zero = std::all_of(rows.begin(), rows.end(), [](const RefinementRow& r) {
    return r.diff_minus_delta == 0.0;
  });
  if (!all_zero) {
    for (std::size_t i = 0; i + 1 < rows.size(); ++i)
      decreasing &= rows[i + 1].diff_minus_delta < rows[i].diff_minus_delta;
  }
  const double wall =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t_start)
          .count();
  write_manifest(dir, cfg, s.seed, decreasing, wall,
                 {dir / "convergence.csv", dir / "uniqueness.csv"});
  std::cout << dir.string() << "\n";
  if (!decreasing) {
    std::cerr << "convergence: level differences are not decreasing\n";
    return 3;
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"stochastic GOY/SABRA shell models driven by fractional noise"};
  app.require_subcommand(1);
  std::string cfg_sim, cfg_ver, cfg_conv, cfg_fbm;
  auto* sim = app.add_subcommand("simulate", "sample noise, integrate, write artifacts");
  sim->add_option("config", cfg_sim, "config file")->required();
  auto* ver = app.add_subcommand("verify", "run the audit suite");
  ver->add_option("config", cfg_ver, "config file")->required();
  auto* conv = app.add_subcommand("convergence", "noise-refinement and scheme studies");
  conv->add_option("config", cfg_conv, "config file")->required();
  auto* fbm = app.add_subcommand("fbm-sample", "sample and dump an fBm path");
  fbm->add_option("config", cfg_fbm, "config file")->required();

  CLI11_PARSE(app, argc, argv);
  try {
    if (sim->parsed()) return run_simulate(cfg_sim);
    if (ver->parsed()) return run_verify(cfg_ver);
    if (conv->parsed()) return run_convergence(cfg_conv);
    if (fbm->parsed()) return run_fbm_sample(cfg_fbm);
  } catch (const ConfigError& e) {
    std::cerr << e.what() << "\n";
    return 1;
  } catch (const std::invalid_argument& e) {
    std::cerr << "config: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
