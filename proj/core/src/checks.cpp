#include "bsdelab/checks.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include "bsdelab/errors.hpp"
#include "bsdelab/rng.hpp"

namespace bsdelab {

namespace {

constexpr std::size_t kMaxStoredViolations = 16;

double uniform_at(const CheckConfig& cfg, std::uint64_t sample, std::uint64_t slot) {
  return counter_uniform(cfg.seed, sample, slot, 0, NoiseStream::checker_aux);
}

// box draw, occasionally replaced by a Cauchy-scaled heavy value
double draw_scalar(const CheckConfig& cfg, std::uint64_t sample, std::uint64_t slot, double box,
                   bool heavy_tails) {
  const double u = counter_uniform(cfg.seed, sample, slot, 1, NoiseStream::checker_y);
  const double v = 2.0 * counter_uniform(cfg.seed, sample, slot, 2, NoiseStream::checker_y) - 1.0;
  if (heavy_tails && u < cfg.heavy_tail_fraction) {
    // tan of a uniform angle: standard Cauchy, clipped to keep f() finite
    const double c = std::tan(0.999 * std::numbers::pi * (v * 0.5));
    return std::clamp(box * c, -1e6, 1e6);
  }
  return box * v;
}

void draw_z(const CheckConfig& cfg, std::uint64_t sample, std::uint64_t salt,
            std::vector<double>& z, bool heavy_tails) {
  for (std::size_t k = 0; k < z.size(); ++k)
    z[k] = draw_scalar(cfg, sample, salt * 64 + 8 + k, cfg.z_box, heavy_tails);
}

// y-pair draw for difference-quotient checks. A quarter of the pairs sit at
// log-uniform tiny scales with log-uniform separations, where non-Lipschitz
// kinks (sqrt, t log(1/t), ...) actually live; plain box pairs miss them.
void draw_pair(const CheckConfig& cfg, std::uint64_t sample, bool heavy_tails, double& y1,
               double& y2) {
  const double mode = counter_uniform(cfg.seed, sample, 40, 3, NoiseStream::checker_y);
  if (mode < 0.25) {
    const double e1 = -9.0 * counter_uniform(cfg.seed, sample, 41, 3, NoiseStream::checker_y);
    const double e2 = -9.0 * counter_uniform(cfg.seed, sample, 42, 3, NoiseStream::checker_y);
    const double s1 =
        counter_uniform(cfg.seed, sample, 43, 3, NoiseStream::checker_y) < 0.5 ? -1.0 : 1.0;
    const double s2 =
        counter_uniform(cfg.seed, sample, 44, 3, NoiseStream::checker_y) < 0.5 ? -1.0 : 1.0;
    y1 = s1 * std::pow(10.0, e1);
    y2 = y1 + s2 * std::pow(10.0, e2);
  } else {
    y1 = draw_scalar(cfg, sample, 1, cfg.y_box, heavy_tails);
    y2 = draw_scalar(cfg, sample, 2, cfg.y_box, heavy_tails);
  }
}

std::string box_string(const CheckConfig& cfg, bool heavy_tails) {
  std::ostringstream os;
  os << "t in [0," << cfg.horizon << "], |y| <= " << cfg.y_box << ", |z_k| <= " << cfg.z_box
     << (heavy_tails ? ", 10% heavy-tail draws up to 1e6" : " (box only)");
  return os.str();
}

void record(CheckReport& rep, const ViolationSample& v, double excess) {
  rep.passed = false;
  rep.worst_excess = std::max(rep.worst_excess, excess);
  if (rep.violations.size() < kMaxStoredViolations) rep.violations.push_back(v);
}

}  // namespace

std::string CheckReport::summary() const {
  std::ostringstream os;
  os << check << ": " << (passed ? "pass" : "FAIL") << " over " << n_samples << " samples";
  if (!passed) os << ", worst excess " << worst_excess;
  return os.str();
}

CheckReport check_one_sided_monotone(const GeneratorSpec& f, const OsgoodFunction& rho,
                                     const CheckConfig& cfg) {
  CheckReport rep;
  rep.check = "one_sided_monotone(" + f.name + "; " + rho.name + ")";
  rep.n_samples = cfg.n_samples;
  rep.box = box_string(cfg, true);
  std::vector<double> z(cfg.dim);
  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    const double t = cfg.horizon * uniform_at(cfg, s, 0);
    double y1 = 0.0, y2 = 0.0;
    draw_pair(cfg, s, true, y1, y2);
    if (y1 == y2) continue;
    draw_z(cfg, s, 0, z, true);
    const double sign = y1 > y2 ? 1.0 : -1.0;
    const double f1 = f(t, y1, z);
    const double f2 = f(t, y2, z);
    const double lhs = sign * (f1 - f2);
    const double rhs = rho(std::abs(y1 - y2));
    // slack scales with the differenced magnitudes: f1 - f2 carries
    // cancellation noise of order ulp(|f1| + |f2|)
    const double slack = cfg.tolerance * (1.0 + std::abs(f1) + std::abs(f2) + rhs);
    if (lhs > rhs + slack) {
      ViolationSample v{t, y1, y2, z, z, lhs, rhs};
      record(rep, v, lhs - rhs);
    }
  }
  return rep;
}

CheckReport check_lipschitz_z(const GeneratorSpec& f, double b, const CheckConfig& cfg) {
  if (!(b >= 0.0)) throw DomainError("check_lipschitz_z: b must be nonnegative");
  CheckReport rep;
  rep.check = "lipschitz_z(" + f.name + "; b=" + std::to_string(b) + ")";
  rep.n_samples = cfg.n_samples;
  rep.box = box_string(cfg, true);
  std::vector<double> z1(cfg.dim), z2(cfg.dim);
  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    const double t = cfg.horizon * uniform_at(cfg, s, 0);
    const double y = draw_scalar(cfg, s, 1, cfg.y_box, true);
    draw_z(cfg, s, 0, z1, true);
    draw_z(cfg, s, 1, z2, true);
    double dist = 0.0;
    for (std::size_t k = 0; k < cfg.dim; ++k) dist += (z1[k] - z2[k]) * (z1[k] - z2[k]);
    dist = std::sqrt(dist);
    const double f1 = f(t, y, z1);
    const double f2 = f(t, y, z2);
    const double lhs = std::abs(f1 - f2);
    const double rhs = b * dist;
    const double slack = cfg.tolerance * (1.0 + std::abs(f1) + std::abs(f2) + rhs);
    if (lhs > rhs + slack) {
      ViolationSample v{t, y, y, z1, z2, lhs, rhs};
      record(rep, v, lhs - rhs);
    }
  }
  return rep;
}

ContinuityReport check_continuity_y(const GeneratorSpec& f, const CheckConfig& cfg) {
  ContinuityReport rep;
  rep.h_ladder = {1e-1, 1e-2, 1e-3, 1e-4, 1e-5};
  rep.max_jump.assign(rep.h_ladder.size(), 0.0);
  std::vector<double> z(cfg.dim);
  const std::size_t n = std::min<std::size_t>(cfg.n_samples, 4000);
  for (std::size_t s = 0; s < n; ++s) {
    const double t = cfg.horizon * uniform_at(cfg, s, 0);
    const double y = draw_scalar(cfg, s, 1, cfg.y_box, false);
    draw_z(cfg, s, 0, z, false);
    const double base = f(t, y, z);
    for (std::size_t j = 0; j < rep.h_ladder.size(); ++j) {
      const double jump = std::abs(f(t, y + rep.h_ladder[j], z) - base);
      rep.max_jump[j] = std::max(rep.max_jump[j], jump);
    }
  }
  // a genuine discontinuity keeps max_jump pinned as h shrinks
  rep.plausible = rep.max_jump.back() <= 0.2 * rep.max_jump.front() + 1e-9;
  return rep;
}

CheckReport check_linear_growth(const GeneratorSpec& f, double a, const CheckConfig& cfg) {
  if (!(a >= 0.0)) throw DomainError("check_linear_growth: a must be nonnegative");
  CheckReport rep;
  rep.check = "linear_growth(" + f.name + "; a=" + std::to_string(a) + ")";
  rep.n_samples = cfg.n_samples;
  rep.box = box_string(cfg, false);
  std::vector<double> z(cfg.dim);
  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    const double t = cfg.horizon * uniform_at(cfg, s, 0);
    const double y = draw_scalar(cfg, s, 1, cfg.y_box, false);
    draw_z(cfg, s, 0, z, false);
    double zn = 0.0;
    for (double v : z) zn += v * v;
    zn = std::sqrt(zn);
    const double lhs = std::abs(f(t, y, z));
    const double rhs = a * (1.0 + std::abs(y) + zn);
    if (lhs > rhs + cfg.tolerance * (1.0 + rhs)) {
      ViolationSample v{t, y, y, z, z, lhs, rhs};
      record(rep, v, lhs - rhs);
    }
  }
  return rep;
}

CheckReport check_lipschitz_y(const GeneratorSpec& f, double r, const CheckConfig& cfg) {
  if (!(r >= 0.0)) throw DomainError("check_lipschitz_y: r must be nonnegative");
  CheckReport rep;
  rep.check = "lipschitz_y(" + f.name + "; r=" + std::to_string(r) + ")";
  rep.n_samples = cfg.n_samples;
  rep.box = box_string(cfg, false);
  std::vector<double> z(cfg.dim);
  for (std::size_t s = 0; s < cfg.n_samples; ++s) {
    const double t = cfg.horizon * uniform_at(cfg, s, 0);
    double y1 = 0.0, y2 = 0.0;
    draw_pair(cfg, s, false, y1, y2);
    if (y1 == y2) continue;
    draw_z(cfg, s, 0, z, false);
    const double f1 = f(t, y1, z);
    const double f2 = f(t, y2, z);
    const double lhs = std::abs(f1 - f2);
    const double rhs = r * std::abs(y1 - y2);
    const double slack = cfg.tolerance * (1.0 + std::abs(f1) + std::abs(f2) + rhs);
    if (lhs > rhs + slack) {
      ViolationSample v{t, y1, y2, z, z, lhs, rhs};
      record(rep, v, lhs - rhs);
    }
  }
  return rep;
}

CheckReport check_osgood_function(const OsgoodFunction& rho, const CheckConfig& cfg) {
  CheckReport rep;
  rep.check = "osgood_modulus(" + rho.name + ")";
  rep.box = "log ladder 1e-8 .. 1e3";
  std::vector<double> ladder;
  for (double t = 1e-8; t <= 1e3; t *= 1.5) ladder.push_back(t);
  rep.n_samples = ladder.size();
  if (std::abs(rho(0.0)) > cfg.tolerance) {
    ViolationSample v{0.0, 0.0, 0.0, {}, {}, rho(0.0), 0.0};
    record(rep, v, std::abs(rho(0.0)));
  }
  double prev = 0.0;
  for (double t : ladder) {
    const double rt = rho(t);
    if (!(rt > 0.0)) {
      ViolationSample v{t, 0.0, 0.0, {}, {}, rt, 0.0};
      record(rep, v, -rt);
    }
    if (rt < prev - cfg.tolerance) {  // must be nondecreasing
      ViolationSample v{t, prev, rt, {}, {}, prev, rt};
      record(rep, v, prev - rt);
    }
    prev = rt;
  }
  // midpoint concavity on consecutive ladder pairs
  for (std::size_t i = 0; i + 1 < ladder.size(); ++i) {
    const double lo = ladder[i], hi = ladder[i + 1];
    const double mid = 0.5 * (lo + hi);
    const double lhs = 0.5 * (rho(lo) + rho(hi));
    const double rhs = rho(mid);
    if (lhs > rhs + cfg.tolerance * (1.0 + std::abs(rhs))) {
      ViolationSample v{mid, lo, hi, {}, {}, lhs, rhs};
      record(rep, v, lhs - rhs);
    }
  }
  // Divergence heuristic for int_0 dt/rho(t) = inf: where the integral
  // converges, the tail contribution I(1e-24..1e-12) is numerically zero;
  // where it diverges it keeps accumulating on every log decade.
  auto log_integral = [&rho](double lo, double hi) {
    double acc = 0.0;
    double t = lo;
    const double ratio = 1.05;
    while (t < hi) {
      const double t2 = std::min(t * ratio, hi);
      const double mid = std::sqrt(t * t2);
      acc += (t2 - t) / rho(mid);
      t = t2;
    }
    return acc;
  };
  const double tail = log_integral(1e-24, 1e-12);
  if (!(tail >= 0.1)) {
    ViolationSample v{1e-12, 0.0, 0.0, {}, {}, tail, 0.1};
    record(rep, v, 0.1 - tail);
  }
  return rep;
}

void require_declared_constants(const GeneratorSpec& f, const CheckConfig& cfg) {
  auto fail = [](const CheckReport& rep) {
    throw HypothesisViolationError("declared constants rejected: " + rep.summary());
  };
  const CheckReport lz = check_lipschitz_z(f, f.lipschitz_z, cfg);
  if (!lz.passed) fail(lz);
  if (f.osgood) {
    const CheckReport om = check_osgood_function(*f.osgood, cfg);
    if (!om.passed) fail(om);
    const CheckReport os = check_one_sided_monotone(f, *f.osgood, cfg);
    if (!os.passed) fail(os);
  }
  if (f.lipschitz_y) {
    const CheckReport ly = check_lipschitz_y(f, *f.lipschitz_y, cfg);
    if (!ly.passed) fail(ly);
  }
  const CheckReport lg = check_linear_growth(f, f.linear_growth, cfg);
  if (!lg.passed) fail(lg);
}

}  // namespace bsdelab
