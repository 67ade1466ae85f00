#include "snmap/simulator.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <thread>

#include <unsupported/Eigen/MatrixFunctions>

#include "snmap/errors.hpp"

namespace snmap {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();
// a path's contribution is frozen once e^{-qt} drops below this
constexpr double kDiscountFloor = 1e-10;
constexpr double kResolvedDiscount = 1e-8;

struct StateEvents {
  double rate = 0.0;  // jumps within the state plus leaving it
  std::vector<double> cumulative;
  std::vector<const JumpLaw*> laws;
  std::vector<int> targets;  // -1: jump within the state
};

struct Dynamics {
  std::vector<StateEvents> events;
  std::vector<double> drift, sigma;
};

Dynamics prepare(const MapModel& model) {
  const int n = model.states();
  Dynamics d;
  d.events.resize(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const auto& c = model.component(i);
    d.drift.push_back(c.drift);
    d.sigma.push_back(std::sqrt(std::max(c.sigma2, 0.0)));
    auto& e = d.events[static_cast<std::size_t>(i)];
    auto add = [&e](double rate, const JumpLaw* law, int target) {
      if (rate <= 0.0) return;
      e.rate += rate;
      e.cumulative.push_back(e.rate);
      e.laws.push_back(law);
      e.targets.push_back(target);
    };
    for (const auto& jp : c.jumps) add(jp.rate, &jp.law, -1);
    for (int k = 0; k < n; ++k)
      if (k != i) add(model.generator()(i, k), &model.switch_jump(i, k), k);
    for (auto& v : e.cumulative) v /= e.rate;
    if (!e.cumulative.empty()) e.cumulative.back() = 1.0;
  }
  return d;
}

void update_max(PathPoint& p) {
  if (p.x >= p.xbar) {
    p.xbar = p.x;
    p.jbar = p.j;
  }
}

// Runs one path until `obs` returns true or time t_end. The observer also
// supplies fixed levels: up_level() is hit exactly by drift-only motion, and
// with `bridge` both levels are tested for crossings between grid points.
template <class Obs>
PathPoint run_path(const Dynamics& d, std::mt19937_64& eng, double dt, bool bridge, PathPoint p, double t_end,
                   Obs& obs) {
  if (obs(p)) return p;
  std::normal_distribution<double> normal;
  std::exponential_distribution<double> expo(1.0);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  while (p.t < t_end) {
    const auto j = static_cast<std::size_t>(p.j);
    const auto& ev = d.events[j];
    const double hold = ev.rate > 0.0 ? expo(eng) / ev.rate : kInf;
    const bool event = p.t + hold < t_end;
    const double seg_end = event ? p.t + hold : t_end;
    const double drift = d.drift[j], sigma = d.sigma[j];
    if (sigma == 0.0) {
      const double level = obs.up_level();
      const double end_x = p.x + drift * (seg_end - p.t);
      if (p.x < level && end_x >= level && drift > 0.0) {
        p.t += (level - p.x) / drift;
        p.x = level;
        update_max(p);
        if (obs(p)) return p;
        continue;  // memoryless: redraw the holding time
      }
      p.x = end_x;
      p.t = seg_end;
      update_max(p);
      if (obs(p)) return p;
    } else {
      const double hi = obs.up_level();
      while (p.t < seg_end) {
        const double h = std::min(dt, seg_end - p.t);
        const double x0 = p.x, lo = obs.down_level(p);
        p.x += drift * h + sigma * std::sqrt(h) * normal(eng);
        p.t = (h == seg_end - p.t) ? seg_end : p.t + h;
        if (bridge) {
          // the Brownian bridge between x0 and p.x: level crossings and maximum
          const double s2h = sigma * sigma * h;
          if (x0 < hi && p.x < hi && unif(eng) < std::exp(-2.0 * (hi - x0) * (hi - p.x) / s2h)) p.x = hi;
          if (x0 >= lo && p.x >= lo && unif(eng) < std::exp(-2.0 * (x0 - lo) * (p.x - lo) / s2h)) {
            obs.down_crossed(p);
          } else if constexpr (Obs::kTracksMax) {
            const double d = p.x - x0;
            const double m = 0.5 * (x0 + p.x + std::sqrt(d * d - 2.0 * s2h * std::log1p(-unif(eng))));
            if (m > p.xbar) {
              p.xbar = m;
              p.jbar = p.j;
            }
          }
        }
        update_max(p);
        if (obs(p)) return p;
      }
    }
    if (!event) break;
    const double u = unif(eng);
    const auto k = static_cast<std::size_t>(
        std::upper_bound(ev.cumulative.begin(), ev.cumulative.end(), u) - ev.cumulative.begin());
    const auto kk = std::min(k, ev.cumulative.size() - 1);
    p.x += ev.laws[kk]->sample(eng);
    if (ev.targets[kk] >= 0) p.j = ev.targets[kk];
    update_max(p);  // a switch without a jump at the maximum moves Jbar
    if (obs(p)) return p;
  }
  return p;
}

// Sum over [lo, hi) of column `col` by a fixed binary tree.
double tree_sum(const std::vector<double>& v, std::size_t width, std::size_t col, std::size_t lo, std::size_t hi) {
  if (hi - lo <= 8) {
    double s = 0.0;
    for (std::size_t k = lo; k < hi; ++k) s += v[k * width + col];
    return s;
  }
  const std::size_t mid = lo + (hi - lo) / 2;
  return tree_sum(v, width, col, lo, mid) + tree_sum(v, width, col, mid, hi);
}

struct Moments {
  std::vector<double> mean, std_error;
};

// Runs fn(path_key, out) for path_key in [0, n) over `threads` workers; each
// writes `width` doubles. Aggregation order does not depend on scheduling.
template <class Fn>
Moments collect(std::int64_t n, std::size_t width, int threads, Fn fn) {
  const auto count = static_cast<std::size_t>(n);
  std::vector<double> values(count * width, 0.0);
  unsigned workers = threads > 0 ? static_cast<unsigned>(threads) : std::max(1u, std::thread::hardware_concurrency());
  workers = static_cast<unsigned>(std::min<std::size_t>(workers, count));
  auto work = [&](std::size_t lo, std::size_t hi) {
    for (std::size_t k = lo; k < hi; ++k) fn(static_cast<std::uint64_t>(k), values.data() + k * width);
  };
  if (workers <= 1) {
    work(0, count);
  } else {
    std::vector<std::thread> pool;
    for (unsigned w = 0; w < workers; ++w)
      pool.emplace_back(work, count * w / workers, count * (w + 1) / workers);
    for (auto& t : pool) t.join();
  }
  std::vector<double> squares(values.size());
  std::transform(values.begin(), values.end(), squares.begin(), [](double v) { return v * v; });
  Moments m;
  const double nn = static_cast<double>(count);
  for (std::size_t c = 0; c < width; ++c) {
    const double mean = tree_sum(values, width, c, 0, count) / nn;
    const double second = tree_sum(squares, width, c, 0, count) / nn;
    const double var = count > 1 ? std::max(second - mean * mean, 0.0) * nn / (nn - 1.0) : 0.0;
    m.mean.push_back(mean);
    m.std_error.push_back(std::sqrt(var / nn));
  }
  return m;
}

double freeze_time(double q) { return q > 0.0 ? std::log(1.0 / kDiscountFloor) / q : kInf; }

// observers without fixed levels
struct NoLevels {
  static constexpr bool kTracksMax = false;
  double up_level() const { return kInf; }
  double down_level(const PathPoint&) const { return -kInf; }
  void down_crossed(const PathPoint&) {}
};

struct Recorder : NoLevels {
  std::vector<PathPoint>* out;
  explicit Recorder(std::vector<PathPoint>* o) : out(o) {}
  bool operator()(const PathPoint& p) {
    out->push_back(p);
    return false;
  }
};

struct ExitObserver {
  double a;
  bool up = false, down = false;
  double tau_up = 0.0, tau_down = 0.0;
  int j_up = 0, j_down = 0;

  static constexpr bool kTracksMax = false;
  double up_level() const { return a; }
  double down_level(const PathPoint&) const { return 0.0; }
  void down_crossed(const PathPoint& p) {
    if (down) return;
    down = true;
    tau_down = p.t;
    j_down = p.j;
  }
  bool operator()(const PathPoint& p) {
    if (p.x < 0.0) down_crossed(p);
    if (p.x >= a) {
      up = true;
      tau_up = p.t;
      j_up = p.j;
      return true;
    }
    return false;
  }
};

struct GainObserver : NoLevels {
  const BoundaryFn* boundary;
  bool stopped = false;
  PathPoint at;

  static constexpr bool kTracksMax = true;
  explicit GainObserver(const BoundaryFn* b) : boundary(b) {}
  double down_level(const PathPoint& p) const { return p.xbar - (*boundary)(p.xbar, p.jbar); }
  void down_crossed(const PathPoint& p) {
    stopped = true;
    at = p;
  }
  bool operator()(const PathPoint& p) {
    if (stopped) return true;
    if (p.xbar - p.x > (*boundary)(p.xbar, p.jbar)) {
      stopped = true;
      at = p;
      return true;
    }
    return false;
  }
};

struct NullObserver : NoLevels {
  bool operator()(const PathPoint&) const { return false; }
};

PathEstimate to_estimate(const Moments& m, Eigen::Index rows, Eigen::Index cols, std::int64_t n) {
  PathEstimate e;
  e.value.resize(rows, cols);
  e.std_error.resize(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r)
    for (Eigen::Index c = 0; c < cols; ++c) {
      const auto k = static_cast<std::size_t>(r * cols + c);
      e.value(r, c) = m.mean[k];
      e.std_error(r, c) = m.std_error[k];
    }
  e.n_effective = n;
  return e;
}

void check_model(const MapModel& model) {
  const auto report = validate(model);
  if (!report.ok()) throw InvalidConfig("model fails validation: " + report.violations.front().message);
}

}  // namespace

void SimConfig::check() const {
  if (!(dt > 0.0)) throw InvalidConfig("dt must be positive");
  if (!(horizon > 0.0)) throw InvalidConfig("horizon must be positive");
  if (n_paths < 100) throw InvalidConfig("at least 100 paths are required");
}

std::mt19937_64 path_engine(std::uint64_t master_seed, std::uint64_t path) {
  std::seed_seq seq{static_cast<std::uint32_t>(master_seed), static_cast<std::uint32_t>(master_seed >> 32),
                    static_cast<std::uint32_t>(path), static_cast<std::uint32_t>(path >> 32)};
  return std::mt19937_64(seq);
}

std::vector<PathPoint> sample_path(const MapModel& model, const SimConfig& config, std::uint64_t path_index,
                                   double x, int i) {
  if (!(config.dt > 0.0) || !(config.horizon > 0.0)) throw InvalidConfig("dt and horizon must be positive");
  const Dynamics d = prepare(model);
  auto eng = path_engine(config.master_seed, path_index);
  std::vector<PathPoint> out;
  Recorder rec(&out);
  run_path(d, eng, config.dt, config.bridge, PathPoint{0.0, x, i, x, i}, config.horizon, rec);
  return out;
}

ExitEstimates estimate_exit(const MapModel& model, const SimConfig& config, double q, double x, double a) {
  config.check();
  check_model(model);
  if (config.dt > 1e-3) throw InvalidConfig("exit estimates need dt <= 1e-3");
  if (x > a) throw InvalidConfig("exit estimates need x <= a");
  if (!(q > 0.0)) throw InvalidConfig("exit estimates need q > 0");
  const Dynamics d = prepare(model);
  const int n = model.states();
  const auto width = static_cast<std::size_t>(3 * n + 1);
  const double t_end = std::min(config.horizon, freeze_time(q));
  const bool horizon_binds = std::exp(-q * config.horizon) >= kResolvedDiscount;

  ExitEstimates e;
  for (PathEstimate* pe : {&e.id0, &e.id1, &e.id2}) {
    pe->value = Matrix::Zero(n, n);
    pe->std_error = Matrix::Zero(n, n);
    pe->n_effective = config.n_paths;
  }
  double unresolved = 0.0;
  for (int i = 0; i < n; ++i) {
    const auto base = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(config.n_paths);
    const Moments m = collect(config.n_paths, width, config.threads, [&](std::uint64_t k, double* out) {
      auto eng = path_engine(config.master_seed, base + k);
      ExitObserver obs{a};
      run_path(d, eng, config.dt, config.bridge, PathPoint{0.0, x, i, x, i}, t_end, obs);
      if (obs.up) {
        const double disc = std::exp(-q * obs.tau_up);
        out[obs.j_up] = disc;
        if (!obs.down) out[n + obs.j_up] = disc;
      }
      if (obs.down) out[2 * n + obs.j_down] = std::exp(-q * obs.tau_down);
      out[3 * n] = (!obs.up && !obs.down && horizon_binds) ? 1.0 : 0.0;
    });
    int which = 0;
    for (PathEstimate* pe : {&e.id0, &e.id1, &e.id2}) {
      for (int j = 0; j < n; ++j) {
        const auto k = static_cast<std::size_t>(which * n + j);
        pe->value(i, j) = m.mean[k];
        pe->std_error(i, j) = m.std_error[k];
      }
      ++which;
    }
    unresolved = std::max(unresolved, m.mean[static_cast<std::size_t>(3 * n)]);
  }
  if (unresolved > 0.01)
    throw HorizonTooShort("more than 1% of paths neither exit nor discount below 1e-8 by the horizon");
  return e;
}

PathEstimate estimate_stopped_gain(const MapModel& model, const SimConfig& config, double q, const GainSpec& gain,
                                   const BoundaryFn& boundary, double x, double s, int i, int j) {
  config.check();
  check_model(model);
  if (!(q > 0.0)) throw InvalidConfig("stopped gain needs q > 0");
  if (x > s) throw InvalidConfig("start needs x <= s");
  if (gain.states() != model.states()) throw InvalidConfig("gain and model disagree on the number of states");
  for (int k = 0; k < model.states(); ++k)
    if (!(boundary(s, k) >= 0.0)) throw InvalidConfig("boundary must be nonnegative");
  const Dynamics d = prepare(model);
  const double t_end = std::min(config.horizon, freeze_time(q));
  const bool horizon_binds = std::exp(-q * config.horizon) >= kResolvedDiscount;

  const Moments m = collect(config.n_paths, 2, config.threads, [&](std::uint64_t k, double* out) {
    auto eng = path_engine(config.master_seed, k);
    GainObserver obs(&boundary);
    run_path(d, eng, config.dt, config.bridge, PathPoint{0.0, x, i, s, j}, t_end, obs);
    if (obs.stopped) out[0] = std::exp(-q * obs.at.t) * gain.f(obs.at.xbar, obs.at.jbar);
    out[1] = (!obs.stopped && horizon_binds) ? 1.0 : 0.0;
  });
  if (m.mean[1] > 0.01) throw HorizonTooShort("more than 1% of paths unstopped with discount above 1e-8");
  return to_estimate(m, 1, 1, config.n_paths);
}

PathEstimate estimate_stopped_gain(const MapModel& model, const SimConfig& config, double q, const GainSpec& gain,
                                   const std::vector<double>& c, double x, double s, int i, int j) {
  if (static_cast<int>(c.size()) != model.states()) throw InvalidConfig("one boundary per state is required");
  const BoundaryFn g = [&c](double, int k) { return c[static_cast<std::size_t>(k)]; };
  return estimate_stopped_gain(model, config, q, gain, g, x, s, i, j);
}

double unstopped_fraction(const MapModel& model, const SimConfig& config, const std::vector<double>& c, double x,
                          double s, int i, int j) {
  config.check();
  if (static_cast<int>(c.size()) != model.states()) throw InvalidConfig("one boundary per state is required");
  const Dynamics d = prepare(model);
  const BoundaryFn g = [&c](double, int k) { return c[static_cast<std::size_t>(k)]; };
  const Moments m = collect(config.n_paths, 1, config.threads, [&](std::uint64_t k, double* out) {
    auto eng = path_engine(config.master_seed, k);
    GainObserver obs(&g);
    run_path(d, eng, config.dt, config.bridge, PathPoint{0.0, x, i, s, j}, config.horizon, obs);
    out[0] = obs.stopped ? 0.0 : 1.0;
  });
  return m.mean[0];
}

MgfCheck verify_mgf(const MapModel& model, const SimConfig& config, double z, double t) {
  config.check();
  if (t < 0.0) throw InvalidConfig("t must be nonnegative");
  const Dynamics d = prepare(model);
  const int n = model.states();
  MgfCheck out;
  out.analytic = (big_psi(model, z) * t).exp();
  out.empirical.value.resize(n, n);
  out.empirical.std_error.resize(n, n);
  out.empirical.n_effective = config.n_paths;
  for (int i = 0; i < n; ++i) {
    const auto base = static_cast<std::uint64_t>(i) * static_cast<std::uint64_t>(config.n_paths);
    const Moments m = collect(config.n_paths, static_cast<std::size_t>(n), config.threads,
                              [&](std::uint64_t k, double* v) {
                                auto eng = path_engine(config.master_seed, base + k);
                                NullObserver obs;
                                const PathPoint end = run_path(d, eng, config.dt, config.bridge, PathPoint{0.0, 0.0, i, 0.0, i}, t, obs);
                                v[end.j] = std::exp(z * end.x);
                              });
    for (int j = 0; j < n; ++j) {
      out.empirical.value(i, j) = m.mean[static_cast<std::size_t>(j)];
      out.empirical.std_error(i, j) = m.std_error[static_cast<std::size_t>(j)];
    }
  }
  return out;
}

}  // namespace snmap
