#include "scwdr/optimizer.hpp"

#include <algorithm>
#include <array>
#include <cmath>

#include "scwdr/parallel.hpp"

namespace scwdr {
namespace {

// Lower box edges are open; the simplex never goes below this fraction of
// the axis span above them.
constexpr double kOpenEdge = 1e-9;

struct Point {
  double u = 0.0;  // alpha0, box-normalized
  double v = 0.0;  // beta, box-normalized
};

class Objective {
 public:
  Objective(Scheme scheme, const ProtocolParams& fixed, double eta, const OptimizationBounds& b)
      : scheme_(scheme), fixed_(fixed), eta_(eta), b_(b) {}

  Point clamp(Point p) const {
    p.u = std::clamp(p.u, kOpenEdge, 1.0);
    p.v = std::clamp(p.v, kOpenEdge, 1.0);
    return p;
  }

  double alpha0(const Point& p) const { return b_.alpha0_low + p.u * (b_.alpha0_high - b_.alpha0_low); }
  double beta(const Point& p) const { return b_.beta_low + p.v * (b_.beta_high - b_.beta_low); }

  KeyRateResult evaluate(const Point& p) {
    ++evaluations;
    return key_rate(scheme_, fixed_.with(alpha0(p), beta(p)), eta_);
  }

  int evaluations = 0;

 private:
  Scheme scheme_;
  const ProtocolParams& fixed_;
  double eta_;
  const OptimizationBounds& b_;
};

struct Candidate {
  Point at;
  KeyRateResult rate;
};

// Larger K wins; exact ties go to smaller alpha0, then smaller beta.
bool better(const Candidate& a, const Candidate& b) {
  if (a.rate.K != b.rate.K) return a.rate.K > b.rate.K;
  if (a.at.u != b.at.u) return a.at.u < b.at.u;
  return a.at.v < b.at.v;
}

double distance(const Point& a, const Point& b) { return std::hypot(a.u - b.u, a.v - b.v); }

Candidate nelder_mead(Objective& f, Point start, double step, const SimplexOptions& opt) {
  std::array<Candidate, 3> s;
  auto make = [&](Point p) {
    p = f.clamp(p);
    return Candidate{p, f.evaluate(p)};
  };
  start = f.clamp(start);
  s[0] = make(start);
  s[1] = make(Point{start.u + (start.u + step <= 1.0 ? step : -step), start.v});
  s[2] = make(Point{start.u, start.v + (start.v + step <= 1.0 ? step : -step)});

  for (int it = 0; it < opt.max_iterations; ++it) {
    std::sort(s.begin(), s.end(), better);
    const double diameter =
        std::max({distance(s[0].at, s[1].at), distance(s[0].at, s[2].at), distance(s[1].at, s[2].at)});
    if (diameter < opt.diameter_tolerance) break;

    const Point c{0.5 * (s[0].at.u + s[1].at.u), 0.5 * (s[0].at.v + s[1].at.v)};
    auto along = [&](double t) { return Point{c.u + t * (s[2].at.u - c.u), c.v + t * (s[2].at.v - c.v)}; };

    const Candidate reflected = make(along(-opt.reflection));
    if (better(reflected, s[0])) {
      const Candidate expanded = make(along(-opt.reflection * opt.expansion));
      s[2] = better(expanded, reflected) ? expanded : reflected;
      continue;
    }
    if (better(reflected, s[1])) {
      s[2] = reflected;
      continue;
    }
    const bool outside = better(reflected, s[2]);
    const Candidate contracted =
        make(outside ? along(-opt.reflection * opt.contraction) : along(opt.contraction));
    if (better(contracted, outside ? reflected : s[2])) {
      s[2] = contracted;
      continue;
    }
    for (int k = 1; k < 3; ++k) {
      s[k] = make(Point{s[0].at.u + opt.shrink * (s[k].at.u - s[0].at.u),
                        s[0].at.v + opt.shrink * (s[k].at.v - s[0].at.v)});
    }
  }
  std::sort(s.begin(), s.end(), better);
  return s[0];
}

}  // namespace

void OptimizationBounds::validate() const {
  if (!(alpha0_low >= 0.0 && alpha0_high > alpha0_low)) throw DomainError("invalid alpha0 search range");
  if (!(beta_low >= 0.0 && beta_high > beta_low)) throw DomainError("invalid beta search range");
  if (coarse_grid < 8) throw DomainError("coarse grid needs at least 8 points per axis");
}

OptimizeResult optimize_key_rate(Scheme scheme, const ProtocolParams& fixed, double eta,
                                 const OptimizationBounds& bounds, const SimplexOptions& simplex,
                                 const OptimizeResult* warm_start) {
  bounds.validate();
  ChannelSpec{eta}.validate();
  Objective f(scheme, fixed, eta, bounds);

  const int n = bounds.coarse_grid;
  Candidate best{};
  bool have_best = false;
  for (int i = 1; i <= n; ++i) {
    for (int k = 1; k <= n; ++k) {
      const Point p{static_cast<double>(i) / n, static_cast<double>(k) / n};
      Candidate c{p, f.evaluate(p)};
      if (!have_best || better(c, best)) {
        best = c;
        have_best = true;
      }
    }
  }

  const double step = 1.0 / n;
  Candidate refined = nelder_mead(f, best.at, step, simplex);
  if (better(refined, best)) best = refined;

  if (warm_start != nullptr) {
    const Point warm{(warm_start->alpha0 - bounds.alpha0_low) / (bounds.alpha0_high - bounds.alpha0_low),
                     (warm_start->beta - bounds.beta_low) / (bounds.beta_high - bounds.beta_low)};
    Candidate from_warm = nelder_mead(f, warm, step, simplex);
    if (better(from_warm, best)) best = from_warm;
  }

  OptimizeResult out;
  out.alpha0 = best.rate.alpha0;
  out.beta = best.rate.beta;
  out.rate = best.rate;
  out.below_cutoff = !(best.rate.K > 0.0);
  out.evaluations = f.evaluations;
  return out;
}

bool is_non_increasing(const std::vector<SweepRow>& rows, double relative_slack) {
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double prev = rows[i - 1].optimum.rate.K;
    const double cur = rows[i].optimum.rate.K;
    if (cur > prev + relative_slack * std::max(std::abs(prev), std::abs(cur))) return false;
  }
  return true;
}

SweepTable sweep(Scheme scheme, const ProtocolParams& fixed, const std::vector<double>& losses_db,
                 const OptimizationBounds& bounds, const SweepOptions& options) {
  if (!std::is_sorted(losses_db.begin(), losses_db.end())) throw DomainError("losses must be sorted ascending");
  SweepTable table;
  table.scheme = scheme;
  table.rows.resize(losses_db.size());
  for (std::size_t i = 0; i < losses_db.size(); ++i) {
    table.rows[i].loss_db = losses_db[i];
    table.rows[i].eta = ChannelSpec::from_loss_db(losses_db[i]).eta;
  }

  if (options.warm_start) {
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      const OptimizeResult* previous = i > 0 ? &table.rows[i - 1].optimum : nullptr;
      table.rows[i].optimum = optimize_key_rate(scheme, fixed, table.rows[i].eta, bounds, options.simplex, previous);
    }
  } else {
    parallel_for(table.rows.size(), options.threads, [&](std::size_t i) {
      table.rows[i].optimum = optimize_key_rate(scheme, fixed, table.rows[i].eta, bounds, options.simplex);
    });
  }
  table.monotone = is_non_increasing(table.rows);
  return table;
}

}  // namespace scwdr
