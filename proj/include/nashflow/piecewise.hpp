#pragma once

#include <algorithm>
#include <cassert>
#include <optional>
#include <stdexcept>
#include <vector>

#include "nashflow/rational.hpp"

namespace nashflow {

// Continuous piecewise-linear function on [xs.front(), inf). The last piece
// is the ray starting at (xs.back(), ys.back()) with slope final_slope.
// Breakpoints are strictly increasing; values between breakpoints are the
// linear interpolants, so two functions agreeing on the union of their
// breakpoints (and in final slope) are equal everywhere.
struct PiecewiseLinear {
  std::vector<Rat> xs;
  std::vector<Rat> ys;
  Rat final_slope;

  static PiecewiseLinear constant(Rat x0, Rat y0) {
    return PiecewiseLinear{{std::move(x0)}, {std::move(y0)}, Rat(0)};
  }

  bool valid() const {
    if (xs.empty() || xs.size() != ys.size()) return false;
    for (std::size_t i = 0; i + 1 < xs.size(); ++i)
      if (!(xs[i] < xs[i + 1])) return false;
    return true;
  }

  const Rat& domain_start() const { return xs.front(); }

  void append(const Rat& x, const Rat& y) {
    if (!(xs.back() < x)) throw std::invalid_argument("PiecewiseLinear: breakpoints must increase");
    xs.push_back(x);
    ys.push_back(y);
  }

  // Slope of the piece starting at breakpoint i (the final ray for the last).
  Rat slope(std::size_t i) const {
    if (i + 1 >= xs.size()) return final_slope;
    return (ys[i + 1] - ys[i]) / (xs[i + 1] - xs[i]);
  }

  Rat eval(const Rat& x) const {
    if (x < xs.front()) throw std::domain_error("PiecewiseLinear: eval left of domain");
    // index of last breakpoint <= x
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin()) - 1;
    if (x == xs[i]) return ys[i];
    return ys[i] + slope(i) * (x - xs[i]);
  }

  // Slope at a non-breakpoint x (for x beyond the last breakpoint: final ray).
  Rat slope_at(const Rat& x) const {
    if (x < xs.front()) throw std::domain_error("PiecewiseLinear: slope left of domain");
    auto it = std::upper_bound(xs.begin(), xs.end(), x);
    std::size_t i = static_cast<std::size_t>(it - xs.begin());
    if (i == 0) i = 1;
    return slope(i - 1);
  }

  bool nondecreasing() const {
    for (std::size_t i = 0; i + 1 < ys.size(); ++i)
      if (ys[i + 1] < ys[i]) return false;
    return final_slope >= Rat(0);
  }
};

inline std::vector<Rat> merge_points(std::vector<Rat> a, const std::vector<Rat>& b) {
  a.insert(a.end(), b.begin(), b.end());
  std::sort(a.begin(), a.end());
  a.erase(std::unique(a.begin(), a.end()), a.end());
  return a;
}

// ca*a + cb*b; both functions must share the domain start.
inline PiecewiseLinear pl_combine(const PiecewiseLinear& a, const PiecewiseLinear& b,
                                  const Rat& ca, const Rat& cb) {
  if (a.domain_start() != b.domain_start())
    throw std::invalid_argument("pl_combine: domain mismatch");
  PiecewiseLinear r;
  r.xs = merge_points(a.xs, b.xs);
  r.ys.reserve(r.xs.size());
  for (const Rat& x : r.xs) r.ys.push_back(ca * a.eval(x) + cb * b.eval(x));
  r.final_slope = ca * a.final_slope + cb * b.final_slope;
  return r;
}

inline PiecewiseLinear pl_scale(const PiecewiseLinear& a, const Rat& c) {
  PiecewiseLinear r = a;
  for (Rat& y : r.ys) y *= c;
  r.final_slope *= c;
  return r;
}

inline PiecewiseLinear pl_add_const(const PiecewiseLinear& a, const Rat& c) {
  PiecewiseLinear r = a;
  for (Rat& y : r.ys) y += c;
  return r;
}

// Pointwise minimum. Inserts crossing points so the result is exact.
inline PiecewiseLinear pl_min(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  if (a.domain_start() != b.domain_start())
    throw std::invalid_argument("pl_min: domain mismatch");
  std::vector<Rat> grid = merge_points(a.xs, b.xs);
  std::vector<Rat> xs;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    xs.push_back(grid[i]);
    if (i + 1 == grid.size()) break;
    // crossing strictly inside (grid[i], grid[i+1])?
    Rat d0 = a.eval(grid[i]) - b.eval(grid[i]);
    Rat d1 = a.eval(grid[i + 1]) - b.eval(grid[i + 1]);
    if (d0.sign() * d1.sign() < 0) {
      Rat t = d0 / (d0 - d1);  // in (0,1)
      xs.push_back(grid[i] + t * (grid[i + 1] - grid[i]));
    }
  }
  // crossing on the final rays
  {
    const Rat& xl = xs.back();
    Rat d0 = a.eval(xl) - b.eval(xl);
    Rat ds = a.final_slope - b.final_slope;
    if (d0.sign() != 0 && ds.sign() != 0 && d0.sign() != ds.sign()) {
      xs.push_back(xl - d0 / ds);
    }
  }
  PiecewiseLinear r;
  r.xs = std::move(xs);
  r.ys.reserve(r.xs.size());
  for (const Rat& x : r.xs) r.ys.push_back(min(a.eval(x), b.eval(x)));
  Rat dlast = a.eval(r.xs.back()) - b.eval(r.xs.back());
  if (dlast.sign() < 0)
    r.final_slope = a.final_slope;
  else if (dlast.sign() > 0)
    r.final_slope = b.final_slope;
  else
    r.final_slope = min(a.final_slope, b.final_slope);
  return r;
}

// outer(inner(x)) for nondecreasing inner whose values stay inside outer's
// domain. Breakpoints: inner's own plus every preimage of an outer breakpoint.
inline PiecewiseLinear pl_compose(const PiecewiseLinear& outer, const PiecewiseLinear& inner) {
  if (inner.eval(inner.domain_start()) < outer.domain_start())
    throw std::invalid_argument("pl_compose: inner range leaves outer domain");
  std::vector<Rat> xs = inner.xs;
  for (const Rat& yb : outer.xs) {
    // solve inner(x) = yb on each strictly increasing piece
    for (std::size_t i = 0; i + 1 < inner.xs.size(); ++i) {
      const Rat& y0 = inner.ys[i];
      const Rat& y1 = inner.ys[i + 1];
      if (y0 < yb && yb < y1) {
        Rat t = (yb - y0) / (y1 - y0);
        xs.push_back(inner.xs[i] + t * (inner.xs[i + 1] - inner.xs[i]));
      }
    }
    if (inner.final_slope > Rat(0) && inner.ys.back() < yb) {
      xs.push_back(inner.xs.back() + (yb - inner.ys.back()) / inner.final_slope);
    }
  }
  std::sort(xs.begin(), xs.end());
  xs.erase(std::unique(xs.begin(), xs.end()), xs.end());
  PiecewiseLinear r;
  r.xs = std::move(xs);
  r.ys.reserve(r.xs.size());
  for (const Rat& x : r.xs) r.ys.push_back(outer.eval(inner.eval(x)));
  if (inner.final_slope.sign() == 0) {
    r.final_slope = Rat(0);
  } else {
    // beyond the last breakpoint inner's values cross no more outer breakpoints
    r.final_slope = outer.slope_at(inner.eval(r.xs.back()) + Rat(1)) * inner.final_slope;
  }
  return r;
}

inline bool pl_equal(const PiecewiseLinear& a, const PiecewiseLinear& b) {
  if (a.domain_start() != b.domain_start()) return false;
  if (a.final_slope != b.final_slope) return false;
  for (const Rat& x : merge_points(a.xs, b.xs))
    if (a.eval(x) != b.eval(x)) return false;
  return true;
}

// Equality restricted to [domain_start, hi].
inline bool pl_equal_on(const PiecewiseLinear& a, const PiecewiseLinear& b, const Rat& hi) {
  if (a.domain_start() != b.domain_start()) return false;
  for (const Rat& x : merge_points(a.xs, b.xs)) {
    if (x > hi) break;
    if (a.eval(x) != b.eval(x)) return false;
  }
  return a.eval(hi) == b.eval(hi);
}

struct ZeroInterval {
  Rat lo;
  ExtRat hi;  // may be infinite (function identically zero on the final ray)
};

// Maximal intervals where f == 0, merged. Degenerate intervals are [p, p].
inline std::vector<ZeroInterval> pl_zero_set(const PiecewiseLinear& f) {
  std::vector<ZeroInterval> raw;
  for (std::size_t i = 0; i + 1 < f.xs.size(); ++i) {
    const Rat& y0 = f.ys[i];
    const Rat& y1 = f.ys[i + 1];
    if (y0.sign() == 0 && y1.sign() == 0) {
      raw.push_back({f.xs[i], ExtRat(f.xs[i + 1])});
    } else if (y0.sign() == 0) {
      raw.push_back({f.xs[i], ExtRat(f.xs[i])});
    } else if (y1.sign() == 0) {
      raw.push_back({f.xs[i + 1], ExtRat(f.xs[i + 1])});
    } else if (y0.sign() * y1.sign() < 0) {
      Rat t = y0 / (y0 - y1);
      Rat x = f.xs[i] + t * (f.xs[i + 1] - f.xs[i]);
      raw.push_back({x, ExtRat(x)});
    }
  }
  // final ray
  const Rat& yl = f.ys.back();
  if (yl.sign() == 0 && f.final_slope.sign() == 0) {
    raw.push_back({f.xs.back(), ExtRat::infinity()});
  } else if (yl.sign() == 0) {
    raw.push_back({f.xs.back(), ExtRat(f.xs.back())});
  } else if (yl.sign() * f.final_slope.sign() < 0) {
    Rat x = f.xs.back() - yl / f.final_slope;
    raw.push_back({x, ExtRat(x)});
  }
  // merge touching/overlapping intervals
  std::vector<ZeroInterval> merged;
  for (auto& z : raw) {
    if (!merged.empty() && ExtRat(z.lo) <= merged.back().hi) {
      if (merged.back().hi < z.hi) merged.back().hi = z.hi;
    } else {
      merged.push_back(z);
    }
  }
  return merged;
}

// Right-continuous step function over the reals: value 0 on (-inf, cuts[0]],
// vals[i] on (cuts[i], cuts[i+1]], tail on (cuts.back(), inf).
// cuts.size() == vals.size() + 1 and cuts are strictly increasing.
struct StepFunction {
  std::vector<Rat> cuts;
  std::vector<Rat> vals;
  Rat tail;

  static StepFunction zero(Rat from = Rat(0)) { return StepFunction{{std::move(from)}, {}, Rat(0)}; }

  bool valid() const {
    if (cuts.empty() || cuts.size() != vals.size() + 1) return false;
    for (std::size_t i = 0; i + 1 < cuts.size(); ++i)
      if (!(cuts[i] < cuts[i + 1])) return false;
    return true;
  }

  const Rat& start() const { return cuts.front(); }
  const Rat& end() const { return cuts.back(); }

  // Append the piece (a, b] = v; a must equal the current end (gaps are
  // filled with an explicit zero piece), empty pieces are dropped and equal
  // adjacent values merged.
  void append(const Rat& a, const Rat& b, const Rat& v) {
    if (a < cuts.back()) throw std::invalid_argument("StepFunction: overlapping piece");
    if (a > cuts.back()) append(cuts.back(), a, Rat(0));
    if (b < a) throw std::invalid_argument("StepFunction: negative piece");
    if (b == a) return;
    if (!vals.empty() && vals.back() == v) {
      cuts.back() = b;
    } else {
      cuts.push_back(b);
      vals.push_back(v);
    }
  }

  Rat eval(const Rat& x) const {
    if (x <= cuts.front()) return Rat(0);
    if (x > cuts.back()) return tail;
    auto it = std::lower_bound(cuts.begin(), cuts.end(), x);  // first cut >= x
    return vals[static_cast<std::size_t>(it - cuts.begin()) - 1];
  }

  void merge_equal_pieces() {
    if (vals.empty()) return;
    std::vector<Rat> ncuts{cuts.front()};
    std::vector<Rat> nvals;
    for (std::size_t i = 0; i < vals.size(); ++i) {
      if (!nvals.empty() && nvals.back() == vals[i]) {
        ncuts.back() = cuts[i + 1];
      } else {
        nvals.push_back(vals[i]);
        ncuts.push_back(cuts[i + 1]);
      }
    }
    // a last piece equal to the tail can be folded into it
    while (!nvals.empty() && nvals.back() == tail) {
      nvals.pop_back();
      ncuts.pop_back();
    }
    cuts = std::move(ncuts);
    vals = std::move(nvals);
  }

  bool nonnegative() const {
    for (const Rat& v : vals)
      if (v.sign() < 0) return false;
    return tail.sign() >= 0;
  }
};

// Sample points that distinguish any two step functions built on `cuts`:
// all cut midpoints plus one point beyond the last cut.
inline std::vector<Rat> step_sample_points(const std::vector<Rat>& cuts) {
  std::vector<Rat> pts;
  for (std::size_t i = 0; i + 1 < cuts.size(); ++i) pts.push_back(midpoint(cuts[i], cuts[i + 1]));
  if (!cuts.empty()) pts.push_back(cuts.back() + Rat(1));
  return pts;
}

inline bool step_equal(const StepFunction& a, const StepFunction& b) {
  std::vector<Rat> grid = merge_points(a.cuts, b.cuts);
  grid.insert(grid.begin(), grid.front() - Rat(1));
  for (const Rat& x : step_sample_points(grid))
    if (a.eval(x) != b.eval(x)) return false;
  return true;
}

// Exact integral: F(x) = int_{x0}^{x} f, as a piecewise-linear function
// starting at x0 (f must vanish before x0, i.e. x0 <= f.start()).
inline PiecewiseLinear step_integral(const StepFunction& f, const Rat& x0) {
  if (f.start() < x0) throw std::invalid_argument("step_integral: function starts before x0");
  PiecewiseLinear F = PiecewiseLinear::constant(x0, Rat(0));
  if (f.start() > x0) F.append(f.start(), Rat(0));
  Rat acc(0);
  for (std::size_t i = 0; i < f.vals.size(); ++i) {
    acc += f.vals[i] * (f.cuts[i + 1] - f.cuts[i]);
    F.append(f.cuts[i + 1], acc);
  }
  F.final_slope = f.tail;
  return F;
}

}  // namespace nashflow
