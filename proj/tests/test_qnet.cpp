#include "doctest.h"

#include <cmath>

#include "dcnet/inscribed.hpp"
#include "dcnet/qnet.hpp"
#include "dcnet/rng.hpp"

using namespace dcnet;

namespace {

Vec v3(double a, double b, double c) {
  Vec v(3);
  v << a, b, c;
  return v;
}

QNet shift_window(const QNet& net, int di, int dj) {
  std::vector<HPoint> pts;
  for (int i = di; i < net.rows(); ++i)
    for (int j = dj; j < net.cols(); ++j) pts.push_back(net.at(i, j));
  return QNet(net.rows() - di, net.cols() - dj, net.ambient(), std::move(pts));
}

double max_vertex_distance(const QNet& a, const QNet& b) {
  double worst = 0.0;
  for (int i = 0; i < a.rows(); ++i)
    for (int j = 0; j < a.cols(); ++j)
      worst = std::max(worst, HPoint::distance(a.at(i, j), b.at(i, j)));
  return worst;
}

}  // namespace

TEST_CASE("laplace_points: normalized quad gives [v+w], [u+v]") {
  Rng rng(3);
  const Vec u = rng.normal_vec(4), v = rng.normal_vec(4), w = rng.normal_vec(4);
  // quad order: P(i,j)=[v], P(i+1,j)=[w], P(i+1,j+1)=[u+v+w], P(i,j+1)=[u]
  LaplacePoints lp = laplace_points(HPoint(v), HPoint(w), HPoint(Vec(u + v + w)), HPoint(u));
  CHECK(HPoint::distance(lp.a, HPoint(Vec(v + w))) < 1e-12);
  CHECK(HPoint::distance(lp.b, HPoint(Vec(u + v))) < 1e-12);
}

TEST_CASE("laplace_points: square on the unit circle meets at infinity") {
  LaplacePoints lp = laplace_points(HPoint(v3(1, 0, 1)), HPoint(v3(0, 1, 1)),
                                    HPoint(v3(-1, 0, 1)), HPoint(v3(0, -1, 1)));
  CHECK(HPoint::distance(lp.a, HPoint(v3(1, -1, 0))) < 1e-12);
  CHECK(HPoint::distance(lp.b, HPoint(v3(1, 1, 0))) < 1e-12);
}

TEST_CASE("laplace_points stay in the quad plane; degenerate quads throw") {
  Rng rng(5);
  Quadric q = random_quadric(3, rng);
  InscribedNet net = random_inscribed_net(q, 2, 2, rng);
  const auto& n = net.net;
  LaplacePoints lp = laplace_points(n.at(0, 0), n.at(1, 0), n.at(1, 1), n.at(0, 1));
  Subspace plane = Subspace::from_points({n.at(0, 0), n.at(1, 0), n.at(1, 1), n.at(0, 1)});
  CHECK(plane.distance_to(lp.a) < 1e-10);
  CHECK(plane.distance_to(lp.b) < 1e-10);

  CHECK_THROWS_AS(laplace_points(n.at(0, 0), n.at(0, 0), n.at(1, 1), n.at(0, 1)),
                  GeometryError);
}

TEST_CASE("laplace transforms: mutual inverse up to shift, Q-net closure") {
  Rng rng(7);
  for (int n = 3; n <= 6; ++n) {
    Quadric q = random_quadric(n, rng);
    InscribedNet in = random_inscribed_net(q, 5, 5, rng);
    CHECK(in.net.planarity_residual() < 1e-9);

    QNet la = laplace_transform(in.net, Direction::A);
    QNet lb = laplace_transform(in.net, Direction::B);
    CHECK(la.planarity_residual() < 1e-8);
    CHECK(lb.planarity_residual() < 1e-8);

    QNet ab = laplace_transform(lb, Direction::A);
    QNet ba = laplace_transform(la, Direction::B);
    QNet expect = shift_window(in.net, 1, 1);
    CHECK(max_vertex_distance(ab, expect) < 1e-9);
    CHECK(max_vertex_distance(ba, expect) < 1e-9);
  }
}

TEST_CASE("iterate_laplace: identity, exhaustion, m x m to a point") {
  Rng rng(9);
  Quadric q = random_quadric(4, rng);
  InscribedNet in = random_inscribed_net(q, 4, 4, rng);
  LaplaceIteration it0 = iterate_laplace(in.net, Direction::A, 0);
  CHECK(max_vertex_distance(it0.result, in.net) == 0.0);

  LaplaceIteration it = iterate_laplace(in.net, Direction::A, 3);
  CHECK(it.result.rows() == 1);
  CHECK(it.result.cols() == 1);
  CHECK(it.intermediates.size() == 3);

  CHECK_THROWS_AS(static_cast<void>(iterate_laplace(in.net, Direction::B, 4)), GeometryError);
}

TEST_CASE("classify_degeneracy: collinear i-lines are Goursat after one step") {
  // i-parameter lines on concurrent lines L_j = c v q_j: every A-point is c.
  Rng rng(11);
  const int n = 3;
  Vec c = rng.unit_vec(n + 1);
  std::vector<HPoint> pts;
  std::vector<Vec> qdir;
  for (int j = 0; j < 4; ++j) qdir.push_back(rng.unit_vec(n + 1));
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      pts.push_back(HPoint(Vec(c + rng.uniform(0.3, 3.0) * qdir[j])));
  QNet net(4, 4, n, pts);
  CHECK(net.planarity_residual() < 1e-9);
  DegeneracyReport rep = classify_degeneracy(net, Direction::A, 1);
  CHECK(rep.goursat);
  CHECK(rep.goursat_residual < 1e-9);

  // Generic control: no degeneracy at any feasible step.
  Quadric q = random_quadric(4, rng);
  InscribedNet in = random_inscribed_net(q, 5, 5, rng);
  for (int d = 1; d <= 3; ++d) {
    DegeneracyReport r = classify_degeneracy(in.net, Direction::A, d);
    CHECK_FALSE(r.goursat);
    CHECK_FALSE(r.laplace);
  }
}

TEST_CASE("goursat strips: confined i-lines degenerate at exactly step m") {
  Rng rng(13);
  for (int m : {2, 3}) {
    Quadric q = random_quadric(m + 2, rng);
    InscribedNet strip = goursat_strip(q, m, m + 4, rng);
    for (int j = 0; j < strip.net.cols(); ++j)
      CHECK(strip.net.row_span(j).dim() == m);
    DegeneracyReport rep = classify_degeneracy(strip.net, Direction::A, m);
    CHECK(rep.goursat);
    CHECK(rep.goursat_residual < 1e-7);
    DegeneracyReport before = classify_degeneracy(strip.net, Direction::A, m - 1);
    CHECK_FALSE(before.goursat);
  }
}

TEST_CASE("focal nets: concurrent i-edges are Laplace degenerate after one step") {
  Rng rng(17);
  Quadric q = random_quadric(3, rng);
  InscribedNet net = laplace_focal_net(q, 5, 5, rng);
  DegeneracyReport rep = classify_degeneracy(net.net, Direction::A, 1);
  CHECK(rep.laplace);
  CHECK(rep.laplace_residual < 1e-8);

  // The degenerate value coincides with the meet over j of the joins of
  // consecutive i-points (the focal point of the column).
  QNet la = laplace_transform(net.net, Direction::A);
  for (int i = 0; i + 1 < net.net.rows(); ++i) {
    std::vector<Subspace> edges;
    for (int j = 0; j < net.net.cols(); ++j)
      edges.push_back(Subspace::from_points({net.net.at(i, j), net.net.at(i + 1, j)}));
    MeetPoint focal = meet_point(edges);
    CHECK(HPoint::distance(focal.point, la.at(i, 0)) < 1e-8);
  }
}

TEST_CASE("planarity_residual: constructed vs random quads") {
  Rng rng(19);
  Quadric q = random_quadric(3, rng);
  InscribedNet in = random_inscribed_net(q, 3, 3, rng);
  CHECK(in.net.planarity_residual() < 1e-9);

  std::vector<HPoint> pts;
  for (int k = 0; k < 4; ++k) pts.push_back(HPoint(rng.normal_vec(4)));
  QNet random_quad(2, 2, 3, pts);
  CHECK(random_quad.planarity_residual() > 1e-3);

  std::vector<HPoint> rep{pts[0], pts[0], pts[1], pts[2]};
  QNet repeated(2, 2, 3, rep);
  CHECK(repeated.planarity_residual() < 1e-12);  // rank drop, flagged by laplace_points
  CHECK_THROWS_AS(laplace_transform(repeated, Direction::A), GeometryError);
}

TEST_CASE("line congruences: edge congruence of a Q-net") {
  Rng rng(23);
  Quadric q = random_quadric(4, rng);
  InscribedNet in = random_inscribed_net(q, 5, 5, rng);
  std::vector<Subspace> lines;
  for (int i = 0; i + 1 < 5; ++i)
    for (int j = 0; j < 5; ++j)
      lines.push_back(Subspace::from_points({in.net.at(i, j), in.net.at(i + 1, j)}));
  LineCongruence lc(4, 5, 4, lines);
  CHECK(lc.intersection_residual() < 1e-10);

  LineCongruence la = congruence_laplace(lc, Direction::A);
  CHECK(la.intersection_residual() < 1e-8);
  LineCongruence lb = congruence_laplace(lc, Direction::B);
  CHECK(lb.intersection_residual() < 1e-8);

  // Mutual inverse up to index shift, mirrored from the point case.
  LineCongruence ab = congruence_laplace(lb, Direction::A);
  for (int i = 0; i < ab.rows(); ++i)
    for (int j = 0; j < ab.cols(); ++j)
      CHECK(Subspace::distance(ab.at(i, j), lc.at(i + 1, j + 1)) < 1e-8);
}

TEST_CASE("line congruences: lines through a fixed point stay through it") {
  Rng rng(29);
  Quadric q = random_quadric(4, rng);
  InscribedNet in = random_inscribed_net(q, 4, 4, rng);
  const HPoint apex(rng.unit_vec(5));
  std::vector<Subspace> lines;
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      lines.push_back(Subspace::from_points({apex, in.net.at(i, j)}));
  LineCongruence lc(4, 4, 4, lines);
  CHECK(lc.intersection_residual() < 1e-10);
  for (Direction dir : {Direction::A, Direction::B}) {
    LineCongruence t = congruence_laplace(lc, dir);
    for (int i = 0; i < t.rows(); ++i)
      for (int j = 0; j < t.cols(); ++j)
        CHECK(t.at(i, j).distance_to(apex) < 1e-9);
  }

  // 2x2 congruence gives a single line per direction.
  std::vector<Subspace> four{lc.at(0, 0), lc.at(0, 1), lc.at(1, 0), lc.at(1, 1)};
  LineCongruence small(2, 2, 4, four);
  CHECK(congruence_laplace(small, Direction::A).rows() == 1);
}
