#include "dcnet/qnet.hpp"

#include <cmath>

namespace dcnet {

QNet::QNet(int rows, int cols, int ambient, std::vector<HPoint> vertices)
    : rows_(rows), cols_(cols), ambient_(ambient), vertices_(std::move(vertices)) {
  if (rows_ < 1 || cols_ < 1)
    throw GeometryError("QNet: grid must be at least 1x1");
  if (static_cast<int>(vertices_.size()) != rows_ * cols_)
    throw GeometryError("QNet: vertex count does not match grid");
  for (const auto& v : vertices_)
    if (v.ambient() != ambient_)
      throw GeometryError("QNet: vertex ambient dimension mismatch");
}

double QNet::planarity_residual() const {
  double worst = 0.0;
  for (int i = 0; i + 1 < rows_; ++i) {
    for (int j = 0; j + 1 < cols_; ++j) {
      Mat m(4, ambient_ + 1);
      m.row(0) = at(i, j).coords();
      m.row(1) = at(i + 1, j).coords();
      m.row(2) = at(i + 1, j + 1).coords();
      m.row(3) = at(i, j + 1).coords();
      Eigen::JacobiSVD<Mat> svd(m);
      const auto& s = svd.singularValues();
      worst = std::max(worst, s[s.size() - 1] / s[0]);
    }
  }
  return worst;
}

Subspace QNet::row_span(int j) const {
  std::vector<HPoint> pts;
  pts.reserve(rows_);
  for (int i = 0; i < rows_; ++i) pts.push_back(at(i, j));
  return Subspace::from_points(pts);
}

Subspace QNet::col_span(int i) const {
  std::vector<HPoint> pts;
  pts.reserve(cols_);
  for (int j = 0; j < cols_; ++j) pts.push_back(at(i, j));
  return Subspace::from_points(pts);
}

LaplacePoints laplace_points(const HPoint& p00, const HPoint& p10,
                             const HPoint& p11, const HPoint& p01) {
  const Subspace plane = Subspace::from_points({p00, p10, p11, p01});
  if (plane.dim() != 2)
    throw GeometryError("laplace_points: quad does not span a 2-plane");
  const Mat& b = plane.basis();
  // In-plane coordinates; lines and their meets via cross products.
  const Eigen::Vector3d c00 = b.transpose() * p00.coords();
  const Eigen::Vector3d c10 = b.transpose() * p10.coords();
  const Eigen::Vector3d c11 = b.transpose() * p11.coords();
  const Eigen::Vector3d c01 = b.transpose() * p01.coords();

  auto line = [](const Eigen::Vector3d& x, const Eigen::Vector3d& y) {
    Eigen::Vector3d l = x.cross(y);
    if (l.norm() < 1e-12)
      throw GeometryError("laplace_points: coincident quad vertices");
    return l;
  };
  const Eigen::Vector3d e_i0 = line(c00, c10);  // P(i,j) v P(i+1,j)
  const Eigen::Vector3d e_i1 = line(c01, c11);  // P(i,j+1) v P(i+1,j+1)
  const Eigen::Vector3d e_j0 = line(c00, c01);  // P(i,j) v P(i,j+1)
  const Eigen::Vector3d e_j1 = line(c10, c11);  // P(i+1,j) v P(i+1,j+1)

  Eigen::Vector3d a = e_i0.cross(e_i1);
  Eigen::Vector3d bb = e_j0.cross(e_j1);
  const double scale = std::max({e_i0.norm() * e_i1.norm(), e_j0.norm() * e_j1.norm(), 1e-300});
  if (a.norm() < 1e-10 * scale || bb.norm() < 1e-10 * scale)
    throw GeometryError("laplace_points: opposite edges coincide");
  return {HPoint(b * a), HPoint(b * bb)};
}

QNet laplace_transform(const QNet& net, Direction dir) {
  if (net.rows() < 2 || net.cols() < 2)
    throw GeometryError("laplace_transform: grid exhausted");
  std::vector<HPoint> out;
  out.reserve((net.rows() - 1) * (net.cols() - 1));
  for (int i = 0; i + 1 < net.rows(); ++i) {
    for (int j = 0; j + 1 < net.cols(); ++j) {
      LaplacePoints lp = [&] {
        try {
          return laplace_points(net.at(i, j), net.at(i + 1, j),
                                net.at(i + 1, j + 1), net.at(i, j + 1));
        } catch (const GeometryError& e) {
          throw GeometryError("laplace_transform: degenerate quad (" +
                              std::to_string(i) + "," + std::to_string(j) +
                              "): " + e.what());
        }
      }();
      out.push_back(dir == Direction::A ? lp.a : lp.b);
    }
  }
  return QNet(net.rows() - 1, net.cols() - 1, net.ambient(), std::move(out));
}

LaplaceIteration iterate_laplace(const QNet& net, Direction dir, int steps) {
  if (steps < 0) throw GeometryError("iterate_laplace: negative steps");
  if (net.rows() - steps < 1 || net.cols() - steps < 1)
    throw GeometryError("iterate_laplace: grid exhausted after " +
                        std::to_string(steps) + " steps");
  LaplaceIteration it{net, {}};
  for (int d = 0; d < steps; ++d) {
    try {
      it.result = laplace_transform(it.result, dir);
    } catch (const GeometryError& e) {
      throw GeometryError("iterate_laplace: step " + std::to_string(d + 1) +
                          ": " + e.what());
    }
    it.intermediates.push_back(it.result);
  }
  return it;
}

namespace {

// Max pairwise chordal spread along one grid index.
double spread_over_i(const QNet& net) {
  double worst = 0.0;
  for (int j = 0; j < net.cols(); ++j)
    for (int i = 0; i < net.rows(); ++i)
      for (int k = i + 1; k < net.rows(); ++k)
        worst = std::max(worst, HPoint::distance(net.at(i, j), net.at(k, j)));
  return worst;
}

double spread_over_j(const QNet& net) {
  double worst = 0.0;
  for (int i = 0; i < net.rows(); ++i)
    for (int j = 0; j < net.cols(); ++j)
      for (int k = j + 1; k < net.cols(); ++k)
        worst = std::max(worst, HPoint::distance(net.at(i, j), net.at(i, k)));
  return worst;
}

}  // namespace

DegeneracyReport classify_degeneracy(const QNet& net, Direction dir, int steps,
                                     double tol) {
  const QNet t = iterate_laplace(net, dir, steps).result;
  const double si = spread_over_i(t);
  const double sj = spread_over_j(t);
  DegeneracyReport rep;
  rep.direction = dir;
  rep.steps = steps;
  if (dir == Direction::A) {
    rep.goursat_residual = si;  // independent of i
    rep.laplace_residual = sj;  // independent of j
  } else {
    rep.goursat_residual = sj;  // independent of j
    rep.laplace_residual = si;  // independent of i
  }
  rep.goursat = rep.goursat_residual < tol;
  rep.laplace = rep.laplace_residual < tol;
  return rep;
}

LineCongruence::LineCongruence(int rows, int cols, int ambient,
                               std::vector<Subspace> lines)
    : rows_(rows), cols_(cols), ambient_(ambient), lines_(std::move(lines)) {
  if (rows_ < 1 || cols_ < 1)
    throw GeometryError("LineCongruence: grid must be at least 1x1");
  if (static_cast<int>(lines_.size()) != rows_ * cols_)
    throw GeometryError("LineCongruence: line count does not match grid");
  for (const auto& l : lines_) {
    if (l.ambient() != ambient_)
      throw GeometryError("LineCongruence: ambient dimension mismatch");
    if (l.dim() != 1) throw GeometryError("LineCongruence: cell is not a line");
  }
}

double LineCongruence::intersection_residual() const {
  double worst = 0.0;
  auto pair_residual = [&](const Subspace& a, const Subspace& b) {
    Mat m(a.basis().rows(), a.basis().cols() + b.basis().cols());
    m << a.basis(), b.basis();
    // Two intersecting lines span a 2-plane: the 4 stacked basis vectors have
    // rank 3, so the smallest singular value must vanish.
    Eigen::JacobiSVD<Mat> svd(m);
    const auto& s = svd.singularValues();
    return s[s.size() - 1] / s[0];
  };
  for (int i = 0; i < rows_; ++i)
    for (int j = 0; j < cols_; ++j) {
      if (i + 1 < rows_) worst = std::max(worst, pair_residual(at(i, j), at(i + 1, j)));
      if (j + 1 < cols_) worst = std::max(worst, pair_residual(at(i, j), at(i, j + 1)));
    }
  return worst;
}

LineCongruence congruence_laplace(const LineCongruence& lc, Direction dir) {
  if (lc.rows() < 2 || lc.cols() < 2)
    throw GeometryError("congruence_laplace: grid exhausted");
  std::vector<Subspace> out;
  out.reserve((lc.rows() - 1) * (lc.cols() - 1));
  for (int i = 0; i + 1 < lc.rows(); ++i) {
    for (int j = 0; j + 1 < lc.cols(); ++j) {
      Subspace j1 = (dir == Direction::A) ? join(lc.at(i, j), lc.at(i + 1, j))
                                          : join(lc.at(i, j), lc.at(i, j + 1));
      Subspace j2 = (dir == Direction::A)
                        ? join(lc.at(i, j + 1), lc.at(i + 1, j + 1))
                        : join(lc.at(i + 1, j), lc.at(i + 1, j + 1));
      if (j1.dim() != 2 || j2.dim() != 2)
        throw GeometryError("congruence_laplace: neighbor join is not a 2-plane at (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
      Subspace m = meet(j1, j2);
      if (m.dim() != 1)
        throw GeometryError("congruence_laplace: meet is not a line at (" +
                            std::to_string(i) + "," + std::to_string(j) + ")");
      out.push_back(std::move(m));
    }
  }
  return LineCongruence(lc.rows() - 1, lc.cols() - 1, lc.ambient(), std::move(out));
}

CongruenceDegeneracyReport classify_congruence_degeneracy(
    const LineCongruence& lc, Direction dir, int steps, double tol) {
  LineCongruence t = lc;
  for (int d = 0; d < steps; ++d) t = congruence_laplace(t, dir);
  double si = 0.0, sj = 0.0;
  for (int j = 0; j < t.cols(); ++j)
    for (int i = 0; i < t.rows(); ++i)
      for (int k = i + 1; k < t.rows(); ++k)
        si = std::max(si, Subspace::distance(t.at(i, j), t.at(k, j)));
  for (int i = 0; i < t.rows(); ++i)
    for (int j = 0; j < t.cols(); ++j)
      for (int k = j + 1; k < t.cols(); ++k)
        sj = std::max(sj, Subspace::distance(t.at(i, j), t.at(i, k)));
  CongruenceDegeneracyReport rep;
  rep.direction = dir;
  rep.steps = steps;
  if (dir == Direction::A) {
    rep.goursat_residual = si;
    rep.laplace_residual = sj;
  } else {
    rep.goursat_residual = sj;
    rep.laplace_residual = si;
  }
  rep.goursat = rep.goursat_residual < tol;
  rep.laplace = rep.laplace_residual < tol;
  return rep;
}

}  // namespace dcnet
