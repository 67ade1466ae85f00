// Command-line front end: model files in, CSV / JSON / SVG out.
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "snmap/errors.hpp"
#include "snmap/fluctuation.hpp"
#include "snmap/model_io.hpp"
#include "snmap/optimal_stopping.hpp"
#include "snmap/report.hpp"
#include "snmap/simulator.hpp"

namespace fs = std::filesystem;
using namespace snmap;

namespace {

constexpr int kOk = 0, kValidation = 2, kNumerical = 3, kUnbounded = 4;

// Model failed validation; reported with exit code 2.
struct InvalidModel : Error {
  using Error::Error;
};

MapModel load_checked(const std::string& path) {
  MapModel m = load_model(path);
  const auto report = validate(m);
  if (!report.ok()) {
    std::ostringstream msg;
    msg << "model " << path << " is invalid:";
    for (const auto& v : report.violations)
      msg << "\n  [" << v.code << "]" << (v.state >= 0 ? " state " + std::to_string(v.state + 1) : "") << ": "
          << v.message;
    throw InvalidModel(msg.str());
  }
  return m;
}

std::string q_tag(double q) { return "q" + format_number(q); }

std::string extended(const ExtendedReal& e) { return e.is_finite() ? format_number(e.value) : "inf"; }

nlohmann::json extended_json(const ExtendedReal& e) {
  return e.is_finite() ? nlohmann::json(e.value) : nlohmann::json("inf");
}

void print_matrix(const std::string& name, const Matrix& m) {
  std::cout << name << ":\n";
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    std::cout << "  ";
    for (Eigen::Index j = 0; j < m.cols(); ++j) std::cout << std::setw(16) << format_number(m(i, j));
    std::cout << '\n';
  }
}

Vector vector_or_ones(const std::vector<double>& v, int n) {
  if (v.empty()) return Vector::Ones(n);
  if (static_cast<int>(v.size()) != n) throw InvalidConfig("expected " + std::to_string(n) + " values per state");
  return Eigen::Map<const Vector>(v.data(), n);
}

struct Context {
  fs::path out;
  std::string model;
};

// --- subcommands -------------------------------------------------------------------

int cmd_kappa(const Context& ctx, double theta_max, double grid, const std::vector<double>& qs) {
  const MapModel m = load_checked(ctx.model);
  const int n = m.states();
  if (!(grid > 0.0) || !(theta_max > 0.0)) throw InvalidConfig("--grid and --theta-max must be positive");
  CsvTable k;
  k.header = {"theta", "kappa"};
  for (int j = 1; j <= n; ++j) k.header.push_back("v_" + std::to_string(j));
  const auto steps = static_cast<int>(std::floor(theta_max / grid + 1e-9));
  for (int s = 0; s <= steps; ++s) {
    const double th = s * grid;
    std::vector<double> row{th, kappa(m, th)};
    const Vector v = perron_vector(m, th);
    row.insert(row.end(), v.data(), v.data() + n);
    k.rows.push_back(std::move(row));
  }
  write_csv(ctx.out / "kappa.csv", k);

  CsvTable p;
  p.header = {"q", "phi", "kappa_at_phi"};
  std::cout << "q, Phi(q), kappa(Phi(q)):\n";
  for (double q : qs) {
    if (q < 0.0) throw InvalidConfig("--q values must be nonnegative");
    const double ph = phi(m, q);
    p.rows.push_back({q, ph, kappa(m, ph)});
    std::cout << "  " << format_number(q) << ", " << format_number(ph) << ", " << format_number(kappa(m, ph)) << '\n';
  }
  write_csv(ctx.out / "phi.csv", p);

  Eigen::EigenSolver<Matrix> es(m.generator());
  std::vector<double> ev;
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i) ev.push_back(es.eigenvalues()(i).real());
  std::sort(ev.begin(), ev.end(), std::greater<>());
  std::cout << "generator eigenvalues: {";
  for (std::size_t i = 0; i < ev.size(); ++i) std::cout << (i ? ", " : "") << format_number(std::abs(ev[i]) < 1e-12 ? 0.0 : ev[i]);
  std::cout << "}\nkappa(0) = " << format_number(kappa(m, 0.0)) << "\nwrote kappa.csv, phi.csv\n";
  return kOk;
}

int cmd_scale(const Context& ctx, double q, double x_max, double step) {
  const MapModel m = load_checked(ctx.model);
  if (!(q > 0.0)) throw InvalidConfig("--q must be positive");
  const ScaleTable table(spectral_decompose(m, q), x_max, step);
  const std::string name = "scale_" + q_tag(q) + ".csv";
  write_csv(ctx.out / name, scale_csv(table));
  print_matrix("W(0+)", w_zero_plus(m, q));
  for (int j = 0; j < m.states(); ++j) {
    std::cout << "state " << j + 1 << ": a = " << extended(a_threshold(table, j));
    for (std::size_t k = 1; k < table.size(); ++k)
      if (table.w_row_at(k - 1)(j) >= 0.0 && table.w_row_at(k)(j) < 0.0) {
        std::cout << ", [W1] turns negative near x = " << format_number(table.grid()[k]);
        break;
      }
    std::cout << '\n';
  }
  std::cout << "wrote " << name << '\n';
  return kOk;
}

int cmd_exit(const Context& ctx, double q, double x, double a) {
  const MapModel m = load_checked(ctx.model);
  if (!(q > 0.0)) throw InvalidConfig("--q must be positive");
  if (x > a) throw InvalidConfig("--x must not exceed --a");
  const SpectralRep rep = spectral_decompose(m, q);
  const Matrix id0 = first_passage(m, rep).matrix(x, a);
  const Matrix id1 = x < 0.0 ? Matrix::Zero(m.states(), m.states()) : two_sided_up(rep, x, a);
  const Matrix id2 = two_sided_down(rep, x, a);
  CsvTable t;
  t.header = {"functional", "entry_i", "entry_j", "value"};
  const char* names[] = {"id0", "id1", "id2"};
  int f = 0;
  for (const Matrix* mat : {&id0, &id1, &id2}) {
    for (int i = 0; i < m.states(); ++i)
      for (int j = 0; j < m.states(); ++j) {
        t.labels.push_back(names[f]);
        t.rows.push_back({double(i + 1), double(j + 1), (*mat)(i, j)});
      }
    ++f;
  }
  write_csv(ctx.out / "exit.csv", t);
  print_matrix("id0  E[e^{-q tau_a^+}; J = j]", id0);
  print_matrix("id1  E[e^{-q tau_a^+}; tau_a^+ < tau_0^-, J = j]", id1);
  print_matrix("id2  E[e^{-q tau_0^-}; tau_0^- < tau_a^+, J = j]", id2);
  std::cout << "wrote exit.csv\n";
  return kOk;
}

int cmd_shepp(const Context& ctx, double q, const std::vector<double>& h, double x_max, double step) {
  const MapModel m = load_checked(ctx.model);
  const StopSolution sol = solve_shepp(m, q, vector_or_ones(h, m.states()), x_max, step);
  nlohmann::json out;
  out["q"] = q;
  out["kappa1"] = sol.kappa1();
  out["complete"] = sol.complete();
  for (int j = 0; j < m.states(); ++j) {
    const auto& st = sol.state(j);
    nlohmann::json s;
    s["state"] = j + 1;
    s["regime"] = to_string(st.regime);
    s["c"] = st.c ? nlohmann::json(*st.c) : nlohmann::json(nullptr);
    s["a"] = extended_json(st.a);
    s["w_row_zero"] = st.w_row_zero;
    out["states"].push_back(s);
    std::cout << "state " << j + 1 << ": " << to_string(st.regime) << ", c = " << (st.c ? format_number(*st.c) : "none")
              << ", a = " << extended(st.a) << '\n';
  }
  std::cout << "kappa(1) = " << format_number(sol.kappa1()) << " < q = " << format_number(q) << '\n';
  const std::string name = "shepp_" + q_tag(q) + ".json";
  std::ofstream(ctx.out / name) << out.dump(2) << '\n';
  std::cout << "wrote " << name << '\n';
  return kOk;
}

int cmd_boundary(const Context& ctx, double q, const std::string& kind, const std::vector<double>& h, double K,
                 double eps, double s0, double s1, std::vector<double> init, double step) {
  const MapModel m = load_checked(ctx.model);
  const Vector hv = vector_or_ones(h, m.states());
  const GainSpec gain = kind == "capped" ? GainSpec::capped(hv, K, eps) : GainSpec::shepp(hv);
  if (init.empty()) {
    if (gain.kind() != GainSpec::Kind::Shepp) throw InvalidConfig("--init is required for the capped gain");
    init = solve_shepp(m, q, hv).boundaries();
  }
  OdeOptions opt;
  opt.step = step;
  const auto curves = solve_boundary_ode(m, q, gain, s0, s1, init, opt);
  CsvTable t;
  t.header = {"state", "s", "g"};
  bool ok = true;
  for (std::size_t j = 0; j < curves.size(); ++j) {
    const auto& c = curves[j];
    for (std::size_t k = 0; k < c.s.size(); ++k) t.rows.push_back({double(j + 1), c.s[k], c.g[k]});
    std::cout << "state " << j + 1 << ": " << to_string(c.status) << ", g(" << format_number(c.s.back())
              << ") = " << format_number(c.g.back()) << ", halvings " << c.halvings << ", weak-inequality violations "
              << c.weak_violations << (c.message.empty() ? "" : ", " + c.message) << '\n';
    ok = ok && c.status == OdeStatus::Ok;
  }
  write_csv(ctx.out / "boundary.csv", t);
  std::cout << "wrote boundary.csv\n";
  return ok ? kOk : kNumerical;
}

struct SimArgs {
  double q = 1.5, x = 0.5, a = 1.0, z = 0.5, t = 1.0, dt = 1e-3, horizon = 50.0;
  std::int64_t paths = 100000;
  std::uint64_t seed = 20240601;
  int threads = 0;
  bool no_bridge = false;
  std::string functional = "exit";
  std::vector<double> c, start{0.0, 0.0, 1.0, 1.0}, h;
};

int cmd_simulate(const Context& ctx, const SimArgs& a) {
  const MapModel m = load_checked(ctx.model);
  SimConfig cfg;
  cfg.dt = a.dt;
  cfg.horizon = a.horizon;
  cfg.n_paths = a.paths;
  cfg.master_seed = a.seed;
  cfg.threads = a.threads;
  cfg.bridge = !a.no_bridge;
  CsvTable t;
  t.header = {"functional", "entry_i", "entry_j", "estimate", "std_error", "n_paths", "dt"};
  auto emit = [&](const std::string& label, const PathEstimate& e, const Matrix* exact) {
    for (Eigen::Index i = 0; i < e.value.rows(); ++i)
      for (Eigen::Index j = 0; j < e.value.cols(); ++j) {
        t.labels.push_back(label);
        t.rows.push_back({double(i + 1), double(j + 1), e.value(i, j), e.std_error(i, j), double(e.n_effective), cfg.dt});
        std::cout << label << "[" << i + 1 << "," << j + 1 << "] = " << format_number(e.value(i, j)) << " +- "
                  << format_number(e.std_error(i, j));
        if (exact) std::cout << "   (analytic " << format_number((*exact)(i, j)) << ")";
        std::cout << '\n';
      }
  };
  const std::string& f = a.functional;
  if (f == "exit" || f == "id0" || f == "id1" || f == "id2") {
    const auto e = estimate_exit(m, cfg, a.q, a.x, a.a);
    const SpectralRep rep = spectral_decompose(m, a.q);
    const Matrix x0 = first_passage(m, rep).matrix(a.x, a.a);
    const Matrix x1 = a.x < 0.0 ? Matrix::Zero(m.states(), m.states()) : two_sided_up(rep, a.x, a.a);
    const Matrix x2 = two_sided_down(rep, a.x, a.a);
    if (f == "exit" || f == "id0") emit("id0", e.id0, &x0);
    if (f == "exit" || f == "id1") emit("id1", e.id1, &x1);
    if (f == "exit" || f == "id2") emit("id2", e.id2, &x2);
  } else if (f == "gain") {
    if (a.start.size() != 4) throw InvalidConfig("--start needs x s i j");
    const Vector hv = vector_or_ones(a.h, m.states());
    const std::vector<double> c = a.c.empty() ? solve_shepp(m, a.q, hv).boundaries() : a.c;
    const int i = static_cast<int>(a.start[2]) - 1, j = static_cast<int>(a.start[3]) - 1;
    if (i < 0 || j < 0 || i >= m.states() || j >= m.states()) throw InvalidConfig("--start states out of range");
    const auto e = estimate_stopped_gain(m, cfg, a.q, GainSpec::shepp(hv), c, a.start[0], a.start[1], i, j);
    emit("gain", e, nullptr);
  } else if (f == "mgf") {
    const auto r = verify_mgf(m, cfg, a.z, a.t);
    emit("mgf", r.empirical, &r.analytic);
  } else {
    throw InvalidConfig("unknown functional '" + f + "'");
  }
  write_csv(ctx.out / "simulate.csv", t);
  std::cout << "wrote simulate.csv\n";
  return kOk;
}

int cmd_figures(const Context& ctx, double x_end) {
  const MapModel m = load_checked(ctx.model);
  if (m.states() != 2) throw InvalidConfig("figures expects a two-state model");
  const fs::path dir = ctx.out / "figures";
  fs::create_directories(dir);
  // (q, state) pairs of the five two-panel figures
  const std::vector<std::pair<double, int>> panels{{1.5, 0}, {1.5, 1}, {1.8, 1}, {5.0, 0}, {5.0, 1}};
  std::ofstream summary(dir / "summary.csv");
  summary << "q,c_1,status_1,a_1,c_2,status_2,a_2\n";
  for (double q : {1.5, 1.8, 5.0}) {
    const StopSolution sol = solve_shepp(m, q, Vector::Ones(2));
    summary << format_number(q);
    for (int j = 0; j < 2; ++j) {
      const auto& st = sol.state(j);
      summary << ',' << (st.c ? format_number(*st.c) : "") << ',' << to_string(st.regime) << ',' << extended(st.a);
    }
    summary << '\n';
    const ScaleTable& table = sol.table();
    for (std::size_t p = 0; p < panels.size(); ++p) {
      if (panels[p].first != q) continue;
      const int j = panels[p].second;
      const std::string stem = "fig" + std::to_string(p + 1) + "_" + q_tag(q) + "_j" + std::to_string(j + 1);
      Series w{"[W 1]_" + std::to_string(j + 1), {}, {}}, u{"u_" + std::to_string(j + 1), {}, {}};
      CsvTable wt, ut;
      wt.header = {"x", "wrow_" + std::to_string(j + 1)};
      ut.header = {"x", "u_" + std::to_string(j + 1)};
      for (std::size_t k = 0; k < table.size() && table.grid()[k] <= x_end + 1e-12; ++k) {
        const double x = table.grid()[k];
        const double wr = table.w_row_at(k)(j), ur = table.z_row_at(k)(j) - q * wr;
        w.x.push_back(x);
        w.y.push_back(wr);
        u.x.push_back(x);
        u.y.push_back(ur);
        wt.rows.push_back({x, wr});
        ut.rows.push_back({x, ur});
      }
      write_csv(dir / (stem + "_wrow.csv"), wt);
      write_csv(dir / (stem + "_u.csv"), ut);
      const std::string title = "q = " + format_number(q) + ", state " + std::to_string(j + 1);
      write_text(dir / (stem + "_wrow.svg"), svg_line_chart(title + ": [W 1]_j(x)", "x", {w}));
      write_text(dir / (stem + "_u.svg"), svg_line_chart(title + ": u_j(x)", "x", {u}));
    }
    std::cout << "q = " << format_number(q) << ": c_1 = " << (sol.state(0).c ? format_number(*sol.state(0).c) : "none")
              << ", state 2 " << to_string(sol.state(1).regime)
              << (sol.state(1).c ? " c_2 = " + format_number(*sol.state(1).c) : "") << '\n';
  }
  std::cout << "wrote 10 curve files (+ SVG) and summary.csv to " << dir.string() << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Scale matrices, exit identities and maximum-functional stopping for spectrally negative MAPs"};
  app.require_subcommand(1);
  const char* env_out = std::getenv("SNMAP_OUTPUT_DIR");
  Context ctx{env_out ? env_out : ".", {}};
  app.add_option("-o,--out", ctx.out, "Output directory (default: $SNMAP_OUTPUT_DIR or .)");

  auto model_arg = [&](CLI::App* s) {
    s->add_option("model", ctx.model, "Model file")->required()->check(CLI::ExistingFile);
  };

  double theta_max = 5.0, grid = 0.05;
  std::vector<double> qs{0.5, 1.0, 1.5, 1.8, 5.0};
  auto* kap = app.add_subcommand("kappa", "Perron root, Perron vector and Phi");
  model_arg(kap);
  kap->add_option("--theta-max", theta_max, "Largest theta")->capture_default_str();
  kap->add_option("--grid", grid, "Theta spacing")->capture_default_str();
  kap->add_option("--q", qs, "q values for the Phi table");

  double q = 1.5, x_max = 5.0, step = 1e-3;
  auto* sc = app.add_subcommand("scale", "Scale matrices W, Z on a grid");
  model_arg(sc);
  sc->add_option("--q", q, "Discount rate")->required();
  sc->add_option("--xmax", x_max, "Grid end")->capture_default_str();
  sc->add_option("--step", step, "Grid spacing")->capture_default_str();

  double x = 0.5, a = 1.0;
  auto* ex = app.add_subcommand("exit", "Exit identities id0, id1, id2");
  model_arg(ex);
  ex->add_option("--q", q, "Discount rate")->required();
  ex->add_option("--x", x, "Start level")->capture_default_str();
  ex->add_option("--a", a, "Upper level")->capture_default_str();

  std::vector<double> h;
  auto* sh = app.add_subcommand("shepp", "Constant boundaries for the gain e^s h_j");
  model_arg(sh);
  sh->add_option("--q", q, "Discount rate")->required();
  sh->add_option("--weights", h, "Per-state weights (default all 1)");
  sh->add_option("--xmax", x_max, "Scan range")->capture_default_str();
  sh->add_option("--step", step, "Scan spacing")->capture_default_str();

  std::string gain_kind = "shepp";
  double K = 1.0, eps = 1.0, s0 = 0.0, s1 = 1.0, ode_step = 1e-3;
  std::vector<double> init;
  auto* bd = app.add_subcommand("boundary", "Boundary ODE for a general gain");
  model_arg(bd);
  bd->add_option("--q", q, "Discount rate")->required();
  bd->add_option("--gain", gain_kind, "shepp or capped")->check(CLI::IsMember({"shepp", "capped"}))->capture_default_str();
  bd->add_option("--weights", h, "Per-state weights (default all 1)");
  bd->add_option("--K", K, "Strike of the capped gain")->capture_default_str();
  bd->add_option("--eps", eps, "Cap of the capped gain")->capture_default_str();
  bd->add_option("--s0", s0, "Start of the s-range")->capture_default_str();
  bd->add_option("--s1", s1, "End of the s-range")->capture_default_str();
  bd->add_option("--init", init, "g(s0, j) per state (default: constant boundaries for shepp)");
  bd->add_option("--step", ode_step, "Runge-Kutta step")->capture_default_str();

  SimArgs sa;
  auto* sim = app.add_subcommand("simulate", "Monte Carlo estimates");
  model_arg(sim);
  sim->add_option("--q", sa.q, "Discount rate")->capture_default_str();
  sim->add_option("--paths", sa.paths, "Paths per starting state")->capture_default_str();
  sim->add_option("--dt", sa.dt, "Euler step")->capture_default_str();
  sim->add_option("--seed", sa.seed, "Master seed")->capture_default_str();
  sim->add_option("--horizon", sa.horizon, "Time horizon")->capture_default_str();
  sim->add_option("--threads", sa.threads, "Worker threads (0: all cores)")->capture_default_str();
  sim->add_flag("--no-bridge", sa.no_bridge, "Plain grid monitoring");
  sim->add_option("--functional", sa.functional, "exit, id0, id1, id2, gain or mgf")
      ->check(CLI::IsMember({"exit", "id0", "id1", "id2", "gain", "mgf"}))
      ->capture_default_str();
  sim->add_option("--x", sa.x, "Start level (exit)")->capture_default_str();
  sim->add_option("--a", sa.a, "Upper level (exit)")->capture_default_str();
  sim->add_option("--c", sa.c, "Boundaries per state (gain; default: solver)");
  sim->add_option("--weights", sa.h, "Gain weights (gain)");
  sim->add_option("--start", sa.start, "x s i j with 1-based states (gain)");
  sim->add_option("--z", sa.z, "Argument of the exponent (mgf)")->capture_default_str();
  sim->add_option("--t", sa.t, "Time (mgf)")->capture_default_str();

  double fig_x = 1.5;
  auto* fig = app.add_subcommand("figures", "Curve data and SVG plots for the two-state example");
  model_arg(fig);
  fig->add_option("--xend", fig_x, "Right end of the plotted range")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    fs::create_directories(ctx.out);
    if (*kap) return cmd_kappa(ctx, theta_max, grid, qs);
    if (*sc) return cmd_scale(ctx, q, x_max, step);
    if (*ex) return cmd_exit(ctx, q, x, a);
    if (*sh) return cmd_shepp(ctx, q, h, x_max, step);
    if (*bd) return cmd_boundary(ctx, q, gain_kind, h, K, eps, s0, s1, init, ode_step);
    if (*sim) return cmd_simulate(ctx, sa);
    if (*fig) return cmd_figures(ctx, fig_x);
  } catch (const Unbounded& e) {
    std::cerr << e.what() << '\n';
    return kUnbounded;
  } catch (const InvalidModel& e) {
    std::cerr << e.what() << '\n';
    return kValidation;
  } catch (const ModelParseError& e) {
    std::cerr << e.what() << '\n';
    return kValidation;
  } catch (const ModelShapeMismatch& e) {
    std::cerr << e.what() << '\n';
    return kValidation;
  } catch (const InvalidConfig& e) {
    std::cerr << e.what() << '\n';
    return kValidation;
  } catch (const DegenerateRoots& e) {
    std::cerr << e.what() << "\nhint: rerun with q shifted by +-1e-6\n";
    return kNumerical;
  } catch (const Error& e) {
    std::cerr << e.what() << '\n';
    return kNumerical;
  } catch (const fs::filesystem_error& e) {
    std::cerr << e.what() << '\n';
    return kValidation;
  }
  return kOk;
}
