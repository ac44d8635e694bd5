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

// Spatial uncertainty distributions of probabilistic boxes on a BEV grid.
//
// Two representations are supported:
//   * the generative density p_G(u), the average over unit-box locations v*
//     of the Gaussian density of V(v*, Y) = J(v*) phi. It integrates to one.
//   * the membership field P(u) = Pr[u in B(Y)], which is not normalized.

#ifndef LABELUQ_SPATIALDIST_H_
#define LABELUQ_SPATIALDIST_H_

#include <array>
#include <cmath>
#include <cstdint>
#include <random>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "geometry.h"
#include "labelvb.h"

namespace labeluq {

// Cell (i, j) spans [origin + (i, j) * resolution, origin + (i+1, j+1) *
// resolution]. Values are stored row-major with j (the y index) as the row.
struct GridSpec {
  Vec2 origin = Vec2::Zero();
  double resolution = 0.1;
  int nx = 1;
  int ny = 1;

  std::size_t size() const { return static_cast<std::size_t>(nx) * ny; }
  Vec2 CellCenter(int i, int j) const {
    return origin + resolution * Vec2(i + 0.5, j + 0.5);
  }
  Vec2 upper() const { return origin + resolution * Vec2(nx, ny); }
  bool operator==(const GridSpec& o) const {
    return origin == o.origin && resolution == o.resolution && nx == o.nx &&
           ny == o.ny;
  }
};

void Validate(const GridSpec& spec);

enum class GridKind { kDensity, kMembership };

struct SpatialGrid {
  GridSpec spec;
  std::vector<double> values;
  GridKind kind = GridKind::kDensity;

  double& at(int i, int j) { return values[static_cast<std::size_t>(j) * spec.nx + i]; }
  double at(int i, int j) const {
    return values[static_cast<std::size_t>(j) * spec.nx + i];
  }
  double Sum() const;
};

// Grid aligned to integer multiples of `resolution` covering `bounds`
// ([min_x, min_y, max_x, max_y]) dilated by `margin`.
GridSpec AlignedGrid(const std::array<double, 4>& bounds, double resolution,
                     double margin);

// Label box bounds dilated by max(1 m, 3 * largest corner std).
GridSpec DefaultGrid(const PhiGaussian& phi, double resolution);

// Smallest aligned grid at the finer resolution that covers both specs.
GridSpec UnionGrid(const GridSpec& a, const GridSpec& b);

// A box drawn from a BoxSampler, u = center + v1 * a + v2 * b for v* in the
// unit square. Gaussian draws over phi need not be rectangular.
struct Parallelogram {
  Vec2 center;
  Vec2 a;
  Vec2 b;

  double area() const { return std::abs(a.x() * b.y() - a.y() * b.x()); }
  static Parallelogram FromPhi(const FeatureBev& phi);
  static Parallelogram FromBox(const BoxBev& box);
};

class BoxSampler {
 public:
  static BoxSampler Delta(const BoxBev& box);
  // Probabilities must be non-negative and sum to one.
  static BoxSampler Discrete(std::vector<BoxBev> boxes, std::vector<double> probs);
  static BoxSampler Gaussian(const PhiGaussian& phi);

  Parallelogram Draw(std::mt19937_64& rng) const;

 private:
  enum class Kind { kDelta, kDiscrete, kGaussian };
  Kind kind_ = Kind::kDelta;
  std::vector<BoxBev> boxes_;
  std::vector<double> cumulative_;
  FeatureBev mean_ = FeatureBev::Zero();
  Mat6 factor_ = Mat6::Zero();
};

// Largest shortfall (m) of the grid against the 3-sigma support of phi; zero
// when covered.
double CoverageDeficit(const PhiGaussian& phi, const GridSpec& spec);

// p_G on the grid. `surface_samples` sets the minimum v* lattice (rounded up
// to a square); the lattice is refined further when the per-location
// Gaussians are narrow relative to the grid. Throws CoverageError when the
// grid misses part of the 3-sigma support.
SpatialGrid SpatialPg(const PhiGaussian& phi, const GridSpec& spec,
                      int surface_samples = 1024);
SpatialGrid SpatialPg(const LabelPosterior& posterior, const GridSpec& spec,
                      int surface_samples = 1024);

// Fraction of `draws` sampled boxes that contain each cell center.
SpatialGrid SpatialPdq(const BoxSampler& sampler, const GridSpec& spec, int draws,
                       std::uint64_t seed);

// Uniform density over the box: each cell gets its overlap area with the box,
// normalized over the grid.
SpatialGrid UniformBoxGrid(const BoxBev& box, const GridSpec& spec);

// Mixture of per-box uniform densities; each component keeps its own
// probability mass regardless of its area.
SpatialGrid SpatialPgDiscrete(std::span<const std::pair<BoxBev, double>> boxes,
                              const GridSpec& spec);

// trace(J(v*) Sigma J(v*)^T) at BoxCorners(label)[corner].
double CornerTotalVariance(const PhiGaussian& phi, int corner);
double CornerTotalVariance(const LabelPosterior& posterior, int corner);

// p_G by Monte Carlo over boxes: sample phi, add 1/A(phi) times each cell's
// overlap area with the sampled box, normalize.
SpatialGrid MonteCarloPg(const PhiGaussian& phi, const GridSpec& spec, int draws,
                         std::uint64_t seed);

// Total-variation distance between SpatialPg and MonteCarloPg.
double MonteCarloPgDistance(const PhiGaussian& phi, const GridSpec& spec, int mc_draws,
                      std::uint64_t seed, int surface_samples = 1024);

double TotalVariation(const SpatialGrid& a, const SpatialGrid& b);
double Entropy(const SpatialGrid& grid);

// Mass-conserving rebinning by area overlap. Membership grids are
// area-averaged instead.
SpatialGrid Resample(const SpatialGrid& grid, const GridSpec& target);

// Text export: a '#'-prefixed JSON header line, then ny rows of nx values.
void WriteGrid(const std::string& path, const SpatialGrid& grid);
SpatialGrid ReadGrid(const std::string& path);
std::string GridToText(const SpatialGrid& grid);
SpatialGrid GridFromText(const std::string& text);

// 8-bit binary graymap scaled by the grid maximum; top row is the largest y.
void WritePgm(const std::string& path, const SpatialGrid& grid);
struct Graymap {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, top row first
};
Graymap ReadPgm(const std::string& path);
Graymap ToGraymap(const SpatialGrid& grid);

}  // namespace labeluq

#endif  // LABELUQ_SPATIALDIST_H_
