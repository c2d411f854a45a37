#pragma once

#include <array>
#include <string>
#include <vector>

#include "dcnet/projective.hpp"

namespace dcnet {

/// Finite patch of a discrete conjugate net: an R x C grid of points in RP^n
/// whose elementary quads are planar. Vertex (i,j) is stored row-major with i
/// as the slow index.
class QNet {
 public:
  QNet(int rows, int cols, int ambient, std::vector<HPoint> vertices);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int ambient() const { return ambient_; }
  const HPoint& at(int i, int j) const { return vertices_[idx(i, j)]; }
  const std::vector<HPoint>& vertices() const { return vertices_; }

  /// Max over quads of the scaled smallest singular value of the 4 stacked
  /// vertex representatives; < tolerance for valid nets.
  double planarity_residual() const;

  /// Span of the i-parameter line {P(i,j)}_i at fixed j.
  Subspace row_span(int j) const;
  /// Span of the j-parameter line {P(i,j)}_j at fixed i.
  Subspace col_span(int i) const;

 private:
  int idx(int i, int j) const { return i * cols_ + j; }
  int rows_, cols_, ambient_;
  std::vector<HPoint> vertices_;
};

enum class Direction { A, B };

/// Laplace points of one planar quad, ordered (P(i,j), P(i+1,j), P(i+1,j+1),
/// P(i,j+1)). A consumes the i-direction edges, B the j-direction edges.
struct LaplacePoints {
  HPoint a;
  HPoint b;
};
LaplacePoints laplace_points(const HPoint& p00, const HPoint& p10,
                             const HPoint& p11, const HPoint& p01);

QNet laplace_transform(const QNet& net, Direction dir);

struct LaplaceIteration {
  QNet result;
  std::vector<QNet> intermediates;  ///< nets after 1..steps transforms
};
LaplaceIteration iterate_laplace(const QNet& net, Direction dir, int steps);

enum class DegeneracyKind { Goursat, Laplace };

struct DegeneracyReport {
  Direction direction = Direction::A;
  int steps = 0;
  bool goursat = false;
  bool laplace = false;
  /// Max over the constant index of the pairwise spread of transform values.
  double goursat_residual = 0.0;
  double laplace_residual = 0.0;
};
DegeneracyReport classify_degeneracy(const QNet& net, Direction dir, int steps,
                                     double tol = Tolerances::global().spread);

/// Discrete line congruence: grid of projective lines where grid neighbors
/// intersect.
class LineCongruence {
 public:
  LineCongruence(int rows, int cols, int ambient, std::vector<Subspace> lines);

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  int ambient() const { return ambient_; }
  const Subspace& at(int i, int j) const { return lines_[idx(i, j)]; }

  /// Max over neighboring pairs of the rank-deficiency residual of the
  /// stacked bases; small iff neighbors intersect.
  double intersection_residual() const;

 private:
  int idx(int i, int j) const { return i * cols_ + j; }
  int rows_, cols_, ambient_;
  std::vector<Subspace> lines_;
};

LineCongruence congruence_laplace(const LineCongruence& lc, Direction dir);

struct CongruenceDegeneracyReport {
  Direction direction = Direction::A;
  int steps = 0;
  bool goursat = false;
  bool laplace = false;
  double goursat_residual = 0.0;
  double laplace_residual = 0.0;
};
CongruenceDegeneracyReport classify_congruence_degeneracy(
    const LineCongruence& lc, Direction dir, int steps,
    double tol = Tolerances::global().spread);

}  // namespace dcnet
