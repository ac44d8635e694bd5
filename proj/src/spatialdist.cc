// Copyright 2026 The LabelUQ Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "spatialdist.h"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

#include <Eigen/Eigenvalues>
#include <json.hpp>

#include "error.h"
#include "io_util.h"

namespace labeluq {

namespace {

using Mat2 = Eigen::Matrix2d;

constexpr double kRegularization = 1e-8;
constexpr double kCoverageSigmas = 3.0;
constexpr double kWindowSigmas = 4.5;
constexpr std::size_t kMaxLatticeSamples = 1 << 20;

double NormalCdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

Mat2 LocalCovariance(const PhiGaussian& phi, const Vec2& unit) {
  const JacobianBev j = Jacobian(unit);
  return j * phi.cov * j.transpose();
}

double MinStd(const Mat2& c) {
  const double tr = c.trace(), det = c.determinant();
  const double disc = std::sqrt(std::max(0.25 * tr * tr - det, 0.0));
  return std::sqrt(std::max(0.5 * tr - disc, 0.0));
}

// Cell index range [lo, hi] touched by the interval [a, b] on one axis.
std::pair<int, int> CellRange(double a, double b, double origin, double res, int n) {
  const int lo = std::max(0, static_cast<int>(std::floor((a - origin) / res)));
  const int hi = std::min(n - 1, static_cast<int>(std::floor((b - origin) / res)));
  return {lo, hi};
}

SpatialGrid EmptyGrid(const GridSpec& spec, GridKind kind) {
  SpatialGrid g;
  g.spec = spec;
  g.values.assign(spec.size(), 0.0);
  g.kind = kind;
  return g;
}

void Normalize(SpatialGrid& g) {
  const double total = g.Sum();
  if (total > 0.0) {
    for (double& v : g.values) v /= total;
  }
}

// Adds the mass of N(mu, k) over each cell. Narrow kernels are integrated
// exactly per axis from the marginal CDFs; kernels wider than a cell use the
// midpoint rule with the full covariance.
void DepositGaussian(SpatialGrid& g, const Vec2& mu, const Mat2& k, double weight) {
  const GridSpec& s = g.spec;
  const double res = s.resolution;
  const double sx = std::sqrt(k(0, 0)), sy = std::sqrt(k(1, 1));
  const auto [i0, i1] = CellRange(mu.x() - kWindowSigmas * sx, mu.x() + kWindowSigmas * sx,
                                  s.origin.x(), res, s.nx);
  const auto [j0, j1] = CellRange(mu.y() - kWindowSigmas * sy, mu.y() + kWindowSigmas * sy,
                                  s.origin.y(), res, s.ny);
  if (i0 > i1 || j0 > j1) return;

  if (MinStd(k) >= res) {
    const Mat2 inv = k.inverse();
    const double norm = weight * res * res / (2.0 * kPi * std::sqrt(k.determinant()));
    for (int j = j0; j <= j1; ++j) {
      for (int i = i0; i <= i1; ++i) {
        const Vec2 d = s.CellCenter(i, j) - mu;
        g.at(i, j) += norm * std::exp(-0.5 * d.dot(inv * d));
      }
    }
    return;
  }

  thread_local std::vector<double> wx, wy;
  wx.assign(i1 - i0 + 1, 0.0);
  wy.assign(j1 - j0 + 1, 0.0);
  double prev = NormalCdf((s.origin.x() + i0 * res - mu.x()) / sx);
  for (int i = i0; i <= i1; ++i) {
    const double next = NormalCdf((s.origin.x() + (i + 1) * res - mu.x()) / sx);
    wx[i - i0] = next - prev;
    prev = next;
  }
  prev = NormalCdf((s.origin.y() + j0 * res - mu.y()) / sy);
  for (int j = j0; j <= j1; ++j) {
    const double next = NormalCdf((s.origin.y() + (j + 1) * res - mu.y()) / sy);
    wy[j - j0] = next - prev;
    prev = next;
  }
  for (int j = j0; j <= j1; ++j) {
    const double wj = weight * wy[j - j0];
    if (wj == 0.0) continue;
    for (int i = i0; i <= i1; ++i) g.at(i, j) += wj * wx[i - i0];
  }
}

// Adds `weight` to every cell whose center lies inside the parallelogram;
// returns the number of such cells.
int FillParallelogram(SpatialGrid& g, const Parallelogram& p, double weight) {
  const GridSpec& s = g.spec;
  Mat2 m;
  m.col(0) = p.a;
  m.col(1) = p.b;
  if (std::abs(m.determinant()) < 1e-15) return 0;
  const Mat2 inv = m.inverse();
  const Vec2 ext = 0.5 * (p.a.cwiseAbs() + p.b.cwiseAbs());
  const auto [i0, i1] = CellRange(p.center.x() - ext.x(), p.center.x() + ext.x(),
                                  s.origin.x(), s.resolution, s.nx);
  const auto [j0, j1] = CellRange(p.center.y() - ext.y(), p.center.y() + ext.y(),
                                  s.origin.y(), s.resolution, s.ny);
  int count = 0;
  for (int j = j0; j <= j1; ++j) {
    for (int i = i0; i <= i1; ++i) {
      const Vec2 v = inv * (s.CellCenter(i, j) - p.center);
      if (std::abs(v.x()) <= 0.5 && std::abs(v.y()) <= 0.5) {
        g.at(i, j) += weight;
        ++count;
      }
    }
  }
  return count;
}

// [min x, max x] of a convex polygon's chord at height y; empty when lo > hi.
std::pair<double, double> Chord(const Polygon2d& poly, double y) {
  double lo = 1e300, hi = -1e300;
  const auto& v = poly.vertices;
  for (std::size_t e = 0; e < v.size(); ++e) {
    const Vec2& p = v[e];
    const Vec2& q = v[(e + 1) % v.size()];
    if ((p.y() - y) * (q.y() - y) > 0.0) continue;
    if (p.y() == q.y()) {
      lo = std::min({lo, p.x(), q.x()});
      hi = std::max({hi, p.x(), q.x()});
      continue;
    }
    const double x = p.x() + (y - p.y()) / (q.y() - p.y()) * (q.x() - p.x());
    lo = std::min(lo, x);
    hi = std::max(hi, x);
  }
  return {lo, hi};
}

// Area of the axis-aligned cell inside a convex CCW polygon. Only edges that
// cut the cell are clipped against; buffers stay on the stack.
double CellOverlap(double x0, double y0, double x1, double y1, const Polygon2d& poly) {
  constexpr int kMax = 16;
  std::array<Vec2, kMax> buf_a, buf_b;
  buf_a[0] = Vec2(x0, y0);
  buf_a[1] = Vec2(x1, y0);
  buf_a[2] = Vec2(x1, y1);
  buf_a[3] = Vec2(x0, y1);
  Vec2* in = buf_a.data();
  Vec2* out = buf_b.data();
  int n_in = 4;
  const auto& v = poly.vertices;
  for (std::size_t e = 0; e < v.size() && n_in > 0; ++e) {
    const Vec2 a = v[e];
    const Vec2 edge = v[(e + 1) % v.size()] - a;
    std::array<double, kMax> d;
    bool all_in = true;
    for (int k = 0; k < n_in; ++k) {
      const Vec2 r = in[k] - a;
      d[k] = edge.x() * r.y() - edge.y() * r.x();
      all_in = all_in && d[k] >= 0.0;
    }
    if (all_in) continue;
    int n_out = 0;
    for (int k = 0; k < n_in && n_out < kMax - 1; ++k) {
      const int k2 = (k + 1) % n_in;
      if (d[k] >= 0.0) out[n_out++] = in[k];
      if ((d[k] >= 0.0) != (d[k2] >= 0.0)) {
        out[n_out++] = in[k] + d[k] / (d[k] - d[k2]) * (in[k2] - in[k]);
      }
    }
    std::swap(in, out);
    n_in = n_out;
  }
  double area = 0.0;
  for (int k = 0; k < n_in; ++k) {
    const Vec2& p = in[k];
    const Vec2& q = in[(k + 1) % n_in];
    area += p.x() * q.y() - p.y() * q.x();
  }
  return 0.5 * std::abs(area);
}

// Adds `weight` times the cell's overlap area with the convex polygon. Rows
// are scanned: cells within both row-edge chords are fully covered, cells in
// the strip's outer extent are clipped, the rest are skipped.
void DepositOverlap(SpatialGrid& g, const Polygon2d& poly, double weight) {
  const GridSpec& s = g.spec;
  Vec2 lo_b(1e300, 1e300), hi_b(-1e300, -1e300);
  for (const Vec2& v : poly.vertices) {
    lo_b = lo_b.cwiseMin(v);
    hi_b = hi_b.cwiseMax(v);
  }
  const double res = s.resolution;
  const double full = weight * res * res;
  const auto [j0, j1] = CellRange(lo_b.y(), hi_b.y(), s.origin.y(), res, s.ny);
  for (int j = j0; j <= j1; ++j) {
    const double y0 = s.origin.y() + res * j, y1 = y0 + res;
    const auto [a0, b0] = Chord(poly, y0);
    const auto [a1, b1] = Chord(poly, y1);
    double outer_lo = std::min(a0, a1), outer_hi = std::max(b0, b1);
    for (const Vec2& v : poly.vertices) {
      if (v.y() > y0 && v.y() < y1) {
        outer_lo = std::min(outer_lo, v.x());
        outer_hi = std::max(outer_hi, v.x());
      }
    }
    if (outer_lo > outer_hi) continue;
    const double inner_lo = std::max(a0, a1), inner_hi = std::min(b0, b1);
    const auto [i0, i1] = CellRange(outer_lo, outer_hi, s.origin.x(), res, s.nx);
    for (int i = i0; i <= i1; ++i) {
      const double x0 = s.origin.x() + res * i, x1 = x0 + res;
      if (x0 >= inner_lo && x1 <= inner_hi) {
        g.at(i, j) += full;
        continue;
      }
      g.at(i, j) += weight * CellOverlap(x0, y0, x1, y1, poly);
    }
  }
}

Polygon2d ParallelogramPolygon(const Parallelogram& p) {
  const Vec2 a = 0.5 * p.a, b = 0.5 * p.b;
  Polygon2d poly{{p.center + a + b, p.center - a + b, p.center - a - b, p.center + a - b}};
  if (SignedArea(poly) < 0) std::reverse(poly.vertices.begin(), poly.vertices.end());
  return poly;
}

}  // namespace

void Validate(const GridSpec& spec) {
  Require(spec.resolution > 0.0 && std::isfinite(spec.resolution),
          "grid resolution must be positive");
  Require(spec.nx >= 1 && spec.ny >= 1, "grid must have at least one cell");
  Require(std::isfinite(spec.origin.x()) && std::isfinite(spec.origin.y()),
          "grid origin must be finite");
}

double SpatialGrid::Sum() const {
  return std::accumulate(values.begin(), values.end(), 0.0);
}

GridSpec AlignedGrid(const std::array<double, 4>& bounds, double resolution,
                     double margin) {
  Require(resolution > 0.0, "grid resolution must be positive");
  GridSpec spec;
  spec.resolution = resolution;
  const double x0 = std::floor((bounds[0] - margin) / resolution);
  const double y0 = std::floor((bounds[1] - margin) / resolution);
  const double x1 = std::ceil((bounds[2] + margin) / resolution);
  const double y1 = std::ceil((bounds[3] + margin) / resolution);
  spec.origin = Vec2(x0 * resolution, y0 * resolution);
  spec.nx = std::max(1, static_cast<int>(x1 - x0));
  spec.ny = std::max(1, static_cast<int>(y1 - y0));
  return spec;
}

GridSpec DefaultGrid(const PhiGaussian& phi, double resolution) {
  double max_std = 0.0;
  for (const Corner& c : BoxCorners(BoxFromFeature(phi.mean))) {
    const Mat2 cov = LocalCovariance(phi, c.unit);
    max_std = std::max({max_std, std::sqrt(cov(0, 0)), std::sqrt(cov(1, 1))});
  }
  const auto bounds = BoxBounds(BoxFromFeature(phi.mean));
  return AlignedGrid(bounds, resolution, std::max(1.0, 3.0 * max_std + resolution));
}

GridSpec UnionGrid(const GridSpec& a, const GridSpec& b) {
  const Vec2 lo = a.origin.cwiseMin(b.origin);
  const Vec2 hi = a.upper().cwiseMax(b.upper());
  const double res = std::min(a.resolution, b.resolution);
  // Shrink by a hair so exact multiples do not gain an extra cell.
  const double eps = 1e-9 * res;
  return AlignedGrid({lo.x() + eps, lo.y() + eps, hi.x() - eps, hi.y() - eps}, res, 0.0);
}

Parallelogram Parallelogram::FromPhi(const FeatureBev& phi) {
  return {Vec2(phi[0], phi[1]), Vec2(phi[2], phi[3]), Vec2(-phi[5], phi[4])};
}

Parallelogram Parallelogram::FromBox(const BoxBev& box) {
  return FromPhi(FeatureVector(box));
}

BoxSampler BoxSampler::Delta(const BoxBev& box) {
  BoxSampler s;
  s.kind_ = Kind::kDelta;
  s.boxes_ = {box};
  return s;
}

BoxSampler BoxSampler::Discrete(std::vector<BoxBev> boxes, std::vector<double> probs) {
  Require(!boxes.empty() && boxes.size() == probs.size(),
          "discrete sampler needs one probability per box");
  double total = 0.0;
  BoxSampler s;
  s.kind_ = Kind::kDiscrete;
  for (double p : probs) {
    Require(p >= 0.0, "discrete probabilities must be non-negative");
    total += p;
    s.cumulative_.push_back(total);
  }
  Require(std::abs(total - 1.0) <= 1e-6, "discrete probabilities must sum to 1");
  s.boxes_ = std::move(boxes);
  return s;
}

BoxSampler BoxSampler::Gaussian(const PhiGaussian& phi) {
  BoxSampler s;
  s.kind_ = Kind::kGaussian;
  s.mean_ = phi.mean;
  const Eigen::SelfAdjointEigenSolver<Mat6> eig(0.5 * (phi.cov + phi.cov.transpose()));
  s.factor_ = eig.eigenvectors() *
              eig.eigenvalues().cwiseMax(0.0).cwiseSqrt().asDiagonal();
  return s;
}

Parallelogram BoxSampler::Draw(std::mt19937_64& rng) const {
  switch (kind_) {
    case Kind::kDelta:
      return Parallelogram::FromBox(boxes_.front());
    case Kind::kDiscrete: {
      std::uniform_real_distribution<double> u(0.0, cumulative_.back());
      const double x = u(rng);
      const auto it = std::upper_bound(cumulative_.begin(), cumulative_.end(), x);
      const std::size_t idx =
          std::min<std::size_t>(it - cumulative_.begin(), boxes_.size() - 1);
      return Parallelogram::FromBox(boxes_[idx]);
    }
    case Kind::kGaussian: {
      std::normal_distribution<double> n01;
      FeatureBev z;
      for (int i = 0; i < 6; ++i) z[i] = n01(rng);
      return Parallelogram::FromPhi(mean_ + factor_ * z);
    }
  }
  Fail(ErrorCode::kInternal, "unknown sampler kind");
}

double CoverageDeficit(const PhiGaussian& phi, const GridSpec& spec) {
  const BoxBev box = BoxFromFeature(phi.mean);
  Vec2 lo(1e300, 1e300), hi(-1e300, -1e300);
  // The marginal variances are convex in v*, so the corners bound them.
  for (const Corner& c : BoxCorners(box)) {
    const Mat2 cov = LocalCovariance(phi, c.unit);
    const Vec2 spread(kCoverageSigmas * std::sqrt(std::max(cov(0, 0), 0.0)),
                      kCoverageSigmas * std::sqrt(std::max(cov(1, 1), 0.0)));
    lo = lo.cwiseMin(c.point - spread);
    hi = hi.cwiseMax(c.point + spread);
  }
  const Vec2 up = spec.upper();
  return std::max({0.0, spec.origin.x() - lo.x(), spec.origin.y() - lo.y(),
                   hi.x() - up.x(), hi.y() - up.y()});
}

SpatialGrid SpatialPg(const PhiGaussian& phi, const GridSpec& spec,
                      int surface_samples) {
  Validate(spec);
  Require(surface_samples >= 1, "surface_samples must be >= 1");
  const double deficit = CoverageDeficit(phi, spec);
  if (deficit > 1e-9) {
    throw CoverageError("grid does not cover the 3-sigma support; deficit " +
                            std::to_string(deficit) + " m",
                        deficit);
  }
  const double res = spec.resolution;
  const Parallelogram shape = Parallelogram::FromPhi(phi.mean);
  const double len = shape.a.norm(), wid = shape.b.norm();

  double s_min = 1e300;
  for (int a = 0; a <= 4; ++a) {
    for (int b = 0; b <= 4; ++b) {
      s_min = std::min(s_min, MinStd(LocalCovariance(phi, Vec2(a / 4.0 - 0.5, b / 4.0 - 0.5))));
    }
  }
  // Lattice spacing is kept below the local spread so the sum of per-sample
  // kernels stays smooth; each sample is widened by half its patch size.
  const double spacing = std::max(res / 10.0, 0.5 * s_min);
  const int base = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(surface_samples))));
  int n_l = std::max(base, static_cast<int>(std::ceil(len / spacing)));
  int n_w = std::max(base, static_cast<int>(std::ceil(wid / spacing)));
  const double over = static_cast<double>(n_l) * n_w / kMaxLatticeSamples;
  if (over > 1.0) {
    const double f = std::sqrt(over);
    n_l = std::max(base, static_cast<int>(std::ceil(n_l / f)));
    n_w = std::max(base, static_cast<int>(std::ceil(n_w / f)));
  }

  const Vec2 dir_l = len > 0 ? Vec2(shape.a / len) : Vec2(1, 0);
  const Vec2 dir_w = wid > 0 ? Vec2(shape.b / wid) : Vec2(0, 1);
  const double bl = 0.5 * len / n_l, bw = 0.5 * wid / n_w;
  const Mat2 blur = bl * bl * dir_l * dir_l.transpose() +
                    bw * bw * dir_w * dir_w.transpose() +
                    kRegularization * Mat2::Identity();

  SpatialGrid g = EmptyGrid(spec, GridKind::kDensity);
  const double weight = 1.0 / (static_cast<double>(n_l) * n_w);
  for (int a = 0; a < n_l; ++a) {
    const double v1 = (a + 0.5) / n_l - 0.5;
    for (int b = 0; b < n_w; ++b) {
      const Vec2 unit(v1, (b + 0.5) / n_w - 0.5);
      const JacobianBev j = Jacobian(unit);
      const Vec2 mu = j * phi.mean;
      const Mat2 k = j * phi.cov * j.transpose() + blur;
      DepositGaussian(g, mu, 0.5 * (k + k.transpose()), weight);
    }
  }
  Normalize(g);
  return g;
}

SpatialGrid SpatialPg(const LabelPosterior& posterior, const GridSpec& spec,
                      int surface_samples) {
  return SpatialPg(posterior.phi(), spec, surface_samples);
}

SpatialGrid SpatialPdq(const BoxSampler& sampler, const GridSpec& spec, int draws,
                       std::uint64_t seed) {
  Validate(spec);
  Require(draws >= 1, "draws must be >= 1");
  SpatialGrid g = EmptyGrid(spec, GridKind::kMembership);
  std::mt19937_64 rng(seed);
  const double inc = 1.0 / draws;
  for (int d = 0; d < draws; ++d) FillParallelogram(g, sampler.Draw(rng), inc);
  for (double& v : g.values) v = std::clamp(v, 0.0, 1.0);
  return g;
}

SpatialGrid UniformBoxGrid(const BoxBev& box, const GridSpec& spec) {
  Validate(spec);
  Require(box.area() > 0.0, "uniform grid needs a box with positive area");
  SpatialGrid g = EmptyGrid(spec, GridKind::kDensity);
  DepositOverlap(g, BoxPolygon(box), 1.0);
  const double total = g.Sum();
  if (!(total > 1e-12 * box.area())) {
    Fail(ErrorCode::kInvalidArgument, "box lies entirely outside the grid");
  }
  for (double& v : g.values) v /= total;
  return g;
}

SpatialGrid SpatialPgDiscrete(std::span<const std::pair<BoxBev, double>> boxes,
                              const GridSpec& spec) {
  Validate(spec);
  Require(!boxes.empty(), "discrete distribution needs at least one box");
  double total = 0.0;
  for (const auto& [box, p] : boxes) {
    Require(p >= 0.0, "discrete probabilities must be non-negative");
    total += p;
  }
  Require(std::abs(total - 1.0) <= 1e-6, "discrete probabilities must sum to 1");
  SpatialGrid g = EmptyGrid(spec, GridKind::kDensity);
  for (const auto& [box, p] : boxes) {
    if (p == 0.0) continue;
    const SpatialGrid u = UniformBoxGrid(box, spec);
    for (std::size_t i = 0; i < g.values.size(); ++i) g.values[i] += p * u.values[i];
  }
  Normalize(g);
  return g;
}

double CornerTotalVariance(const PhiGaussian& phi, int corner) {
  Require(corner >= 0 && corner < 4, "corner index must be in [0, 3]");
  const Corner c = BoxCorners(BoxFromFeature(phi.mean))[corner];
  return LocalCovariance(phi, c.unit).trace();
}

double CornerTotalVariance(const LabelPosterior& posterior, int corner) {
  return CornerTotalVariance(posterior.phi(), corner);
}

SpatialGrid MonteCarloPg(const PhiGaussian& phi, const GridSpec& spec, int draws,
                         std::uint64_t seed) {
  Validate(spec);
  Require(draws >= 1, "draws must be >= 1");
  const BoxSampler sampler = BoxSampler::Gaussian(phi);
  SpatialGrid g = EmptyGrid(spec, GridKind::kDensity);
  std::mt19937_64 rng(seed);
  for (int d = 0; d < draws; ++d) {
    const Parallelogram p = sampler.Draw(rng);
    const double area = p.area();
    if (area <= 1e-12) continue;
    DepositOverlap(g, ParallelogramPolygon(p), 1.0 / area);
  }
  Normalize(g);
  return g;
}

double TotalVariation(const SpatialGrid& a, const SpatialGrid& b) {
  if (!(a.spec == b.spec)) Fail(ErrorCode::kGridMismatch, "grids differ in spec");
  double tv = 0.0;
  for (std::size_t i = 0; i < a.values.size(); ++i) tv += std::abs(a.values[i] - b.values[i]);
  return 0.5 * tv;
}

double MonteCarloPgDistance(const PhiGaussian& phi, const GridSpec& spec, int mc_draws,
                      std::uint64_t seed, int surface_samples) {
  return TotalVariation(SpatialPg(phi, spec, surface_samples),
                        MonteCarloPg(phi, spec, mc_draws, seed));
}

double Entropy(const SpatialGrid& grid) {
  const double total = grid.Sum();
  Require(total > 0.0, "entropy of an empty grid");
  double h = 0.0;
  for (double v : grid.values) {
    if (v > 0.0) {
      const double p = v / total;
      h -= p * std::log(p);
    }
  }
  return h;
}

SpatialGrid Resample(const SpatialGrid& grid, const GridSpec& target) {
  Validate(target);
  const GridSpec& s = grid.spec;
  SpatialGrid out = EmptyGrid(target, grid.kind);
  const double rs = s.resolution, rt = target.resolution;
  // Per-axis overlap lengths between source cell k and target cells.
  auto overlaps = [&](double src_origin, int n_src, double dst_origin, int n_dst) {
    std::vector<std::vector<std::pair<int, double>>> ov(n_src);
    for (int k = 0; k < n_src; ++k) {
      const double a = src_origin + k * rs, b = a + rs;
      const auto [lo, hi] = CellRange(a, b, dst_origin, rt, n_dst);
      for (int t = lo; t <= hi; ++t) {
        const double c = dst_origin + t * rt;
        const double len = std::min(b, c + rt) - std::max(a, c);
        if (len > 0.0) ov[k].push_back({t, len});
      }
    }
    return ov;
  };
  const auto ox = overlaps(s.origin.x(), s.nx, target.origin.x(), target.nx);
  const auto oy = overlaps(s.origin.y(), s.ny, target.origin.y(), target.ny);
  const bool density = grid.kind == GridKind::kDensity;
  for (int j = 0; j < s.ny; ++j) {
    for (int i = 0; i < s.nx; ++i) {
      const double v = grid.at(i, j);
      if (v == 0.0) continue;
      for (const auto& [tj, ly] : oy[j]) {
        for (const auto& [ti, lx] : ox[i]) {
          const double area = lx * ly;
          out.at(ti, tj) += density ? v * area / (rs * rs) : v * area / (rt * rt);
        }
      }
    }
  }
  return out;
}

std::string GridToText(const SpatialGrid& grid) {
  nlohmann::ordered_json header;
  header["kind"] = grid.kind == GridKind::kDensity ? "density" : "membership";
  header["origin"] = {grid.spec.origin.x(), grid.spec.origin.y()};
  header["resolution"] = grid.spec.resolution;
  header["nx"] = grid.spec.nx;
  header["ny"] = grid.spec.ny;
  std::string out = "# " + header.dump() + "\n";
  for (int j = 0; j < grid.spec.ny; ++j) {
    for (int i = 0; i < grid.spec.nx; ++i) {
      if (i) out += ',';
      out += FormatDouble(grid.at(i, j));
    }
    out += '\n';
  }
  return out;
}

SpatialGrid GridFromText(const std::string& text) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line) || line.rfind("# ", 0) != 0) {
    Fail(ErrorCode::kParse, "grid file: missing header line");
  }
  SpatialGrid g;
  try {
    const auto header = nlohmann::json::parse(line.substr(2));
    const std::string kind = header.at("kind").get<std::string>();
    if (kind == "density") {
      g.kind = GridKind::kDensity;
    } else if (kind == "membership") {
      g.kind = GridKind::kMembership;
    } else {
      Fail(ErrorCode::kParse, "grid file: unknown kind '" + kind + "'");
    }
    g.spec.origin = Vec2(header.at("origin").at(0).get<double>(),
                         header.at("origin").at(1).get<double>());
    g.spec.resolution = header.at("resolution").get<double>();
    g.spec.nx = header.at("nx").get<int>();
    g.spec.ny = header.at("ny").get<int>();
  } catch (const nlohmann::json::exception& e) {
    Fail(ErrorCode::kParse, std::string("grid file header: ") + e.what());
  }
  Validate(g.spec);
  g.values.reserve(g.spec.size());
  for (int j = 0; j < g.spec.ny; ++j) {
    if (!std::getline(in, line)) {
      Fail(ErrorCode::kParse, "grid file: expected " + std::to_string(g.spec.ny) +
                                  " rows, got " + std::to_string(j));
    }
    std::size_t start = 0;
    int count = 0;
    while (start <= line.size()) {
      const std::size_t end = std::min(line.find(',', start), line.size());
      double v;
      if (!ParseDouble(std::string_view(line).substr(start, end - start), &v)) {
        Fail(ErrorCode::kParse, "grid file: bad value in row " + std::to_string(j + 2));
      }
      g.values.push_back(v);
      ++count;
      start = end + 1;
    }
    if (count != g.spec.nx) {
      Fail(ErrorCode::kParse, "grid file: row " + std::to_string(j + 2) + " has " +
                                  std::to_string(count) + " values, expected " +
                                  std::to_string(g.spec.nx));
    }
  }
  return g;
}

void WriteGrid(const std::string& path, const SpatialGrid& grid) {
  WriteFileAtomic(path, GridToText(grid));
}

SpatialGrid ReadGrid(const std::string& path) { return GridFromText(ReadFile(path)); }

Graymap ToGraymap(const SpatialGrid& grid) {
  Graymap img;
  img.width = grid.spec.nx;
  img.height = grid.spec.ny;
  img.pixels.resize(grid.spec.size());
  const double peak = *std::max_element(grid.values.begin(), grid.values.end());
  for (int row = 0; row < img.height; ++row) {
    const int j = img.height - 1 - row;
    for (int i = 0; i < img.width; ++i) {
      const double v = peak > 0.0 ? grid.at(i, j) / peak : 0.0;
      img.pixels[static_cast<std::size_t>(row) * img.width + i] =
          static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0));
    }
  }
  return img;
}

void WritePgm(const std::string& path, const SpatialGrid& grid) {
  const Graymap img = ToGraymap(grid);
  std::string data = "P5\n" + std::to_string(img.width) + " " +
                     std::to_string(img.height) + "\n255\n";
  data.append(img.pixels.begin(), img.pixels.end());
  WriteFileAtomic(path, data);
}

Graymap ReadPgm(const std::string& path) {
  const std::string data = ReadFile(path);
  std::istringstream in(data);
  std::string magic;
  Graymap img;
  int maxval = 0;
  in >> magic >> img.width >> img.height >> maxval;
  if (magic != "P5" || !in || img.width <= 0 || img.height <= 0 || maxval != 255) {
    Fail(ErrorCode::kParse, "not an 8-bit binary graymap: " + path);
  }
  in.get();
  const std::size_t offset = static_cast<std::size_t>(in.tellg());
  const std::size_t n = static_cast<std::size_t>(img.width) * img.height;
  if (data.size() < offset + n) Fail(ErrorCode::kParse, "truncated graymap: " + path);
  img.pixels.assign(data.begin() + offset, data.begin() + offset + n);
  return img;
}

}  // namespace labeluq
