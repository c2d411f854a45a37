#include "doctest.h"

#include <algorithm>
#include <cmath>

#include "dcnet/moebius.hpp"
#include "dcnet/rng.hpp"

using namespace dcnet;

namespace {

Vec e2(double x, double y) {
  Vec v(2);
  v << x, y;
  return v;
}
Vec e3(double x, double y, double z) {
  Vec v(3);
  v << x, y, z;
  return v;
}

}  // namespace

TEST_CASE("lift and projection round trip") {
  MoebiusSpace sp2(2);
  CHECK(HPoint::distance(sp2.lift_point(e2(0, 0)), HPoint(sp2.e0())) < 1e-15);

  MoebiusSpace sp3(3);
  // (1,0,0) lifts to e_1 + e_0 + e_inf = (1,0,0,0,1).
  Vec expect(5);
  expect << 1, 0, 0, 0, 1;
  CHECK(HPoint::distance(sp3.lift_point(e3(1, 0, 0)), HPoint(expect)) < 1e-15);

  Rng rng(211);
  for (int n = 2; n <= 4; ++n) {
    MoebiusSpace sp(n);
    for (int t = 0; t < 100; ++t) {
      Vec p = 3.0 * rng.normal_vec(n);
      HPoint lift = sp.lift_point(p);
      CHECK(sp.quadric().incidence_residual(lift) < 1e-12);
      auto back = sp.project(lift);
      REQUIRE_FALSE(back.at_infinity);
      CHECK((back.point - p).norm() < 1e-12);
    }
  }

  // A vector with vanishing x_0-component projects to infinity.
  Vec v = Vec::Zero(5);
  v[0] = 1.0;
  auto inf = sp3.project(HPoint(v));
  CHECK(inf.at_infinity);
  CHECK((inf.direction - e3(1, 0, 0)).norm() < 1e-15);
}

TEST_CASE("sphere_through: circles, planes, spheres") {
  MoebiusSpace sp2(2);
  SphereRep circle = sphere_through(sp2, {e2(1, 0), e2(0, 1), e2(-1, 0)});
  CHECK(circle.kind == SphereRep::Kind::Sphere);
  CHECK(circle.center.norm() < 1e-12);
  CHECK(circle.radius2 == doctest::Approx(1.0));

  SphereRep line = sphere_through(sp2, {e2(0, 1), e2(1, 2), e2(2, 3)});
  CHECK(line.kind == SphereRep::Kind::Plane);
  CHECK(std::abs(std::abs(line.normal.dot(e2(1, -1)) / std::sqrt(2.0)) - 1.0) < 1e-12);

  MoebiusSpace sp3(3);
  SphereRep sphere = sphere_through(
      sp3, {e3(1, 0, 0), e3(0, 1, 0), e3(0, 0, 1), e3(-1, 0, 0)});
  CHECK(sphere.center.norm() < 1e-12);
  CHECK(sphere.radius2 == doctest::Approx(1.0));

  // The rep of a sphere projects to its centre.
  Rng rng(223);
  for (int t = 0; t < 20; ++t) {
    Vec c = 2.0 * rng.normal_vec(3);
    const double r = rng.uniform(0.5, 2.0);
    std::vector<Vec> pts;
    for (int k = 0; k < 4; ++k) pts.push_back(Vec(c + r * rng.unit_vec(3)));
    SphereRep s = sphere_through(sp3, pts);
    CHECK((s.center - c).norm() < 1e-8);
    CHECK(s.radius2 == doctest::Approx(r * r).epsilon(1e-7));
    auto proj = sp3.project(s.rep);
    CHECK((proj.point - c).norm() < 1e-8);
  }
}

TEST_CASE("circularity residual") {
  MoebiusSpace sp(2);
  CHECK(circularity_residual(sp, e2(0, 0), e2(1, 0), e2(1, 1), e2(0, 1)) < 1e-14);
  CHECK(circularity_residual(sp, e2(0, 0), e2(1, 0), e2(1, 1), e2(0, 2)) > 1e-3);

  Rng rng(227);
  for (int t = 0; t < 20; ++t) {
    Vec c = rng.normal_vec(2);
    const double r = rng.uniform(0.5, 2.0);
    auto at = [&](double a) { return Vec(c + r * e2(std::cos(a), std::sin(a))); };
    CHECK(circularity_residual(sp, at(0.3), at(1.2), at(2.9), at(4.4)) < 1e-10);
  }
}

TEST_CASE("orthogonality dictionary: form residual vs euclidean angle") {
  MoebiusSpace sp(3);
  Rng rng(229);
  auto rep_of = [&](const Vec& c, double r2) {
    Vec v(5);
    v.head(3) = c;
    const double xinf = c.squaredNorm() - r2;
    v[3] = (xinf - 1.0) / 2.0;
    v[4] = (xinf + 1.0) / 2.0;
    return HPoint(v);
  };
  for (int t = 0; t < 50; ++t) {
    Vec c1 = rng.normal_vec(3);
    const double r1 = rng.uniform(0.5, 1.5);
    Vec dir = rng.unit_vec(3);
    const double d = rng.uniform(1.0, 2.0) * r1 + 0.5;
    Vec c2 = c1 + d * dir;
    // orthogonal partner: r2^2 = |c1-c2|^2 - r1^2 > 0
    const double r22 = d * d - r1 * r1;
    auto orth = conjugate(rep_of(c1, r1 * r1), rep_of(c2, r22), sp.quadric(), 1e-7);
    CHECK(orth.conjugate);
    // oblique partner disagrees in both dictionaries
    const double r22_bad = r22 * rng.uniform(1.2, 2.0);
    auto oblique = conjugate(rep_of(c1, r1 * r1), rep_of(c2, r22_bad), sp.quadric(), 1e-7);
    const double cosangle =
        (r1 * r1 + r22_bad - d * d) / (2.0 * r1 * std::sqrt(r22_bad));
    CHECK_FALSE(oblique.conjugate);
    CHECK(std::abs(std::acos(std::clamp(cosangle, -1.0, 1.0)) - M_PI / 2) > 1e-4);
  }
}

TEST_CASE("incidence patches: every constraint pair certifies its corner") {
  Rng rng(233);
  struct Case {
    const char* pair;
    int n;
  };
  const Case cases[] = {
      {"circular-circular", 2}, {"circular-circular", 3}, {"linear-circular", 2},
      {"linear-linear", 2},     {"circular-spherical", 3}, {"linear-spherical", 3},
      {"circular-planar", 3},   {"linear-planar", 3},      {"spherical-spherical", 3},
      {"planar-spherical", 3},  {"planar-planar", 3},      {"spherical-spherical", 4},
  };
  for (const auto& c : cases) {
    CAPTURE(c.pair);
    CAPTURE(c.n);
    MoebiusSpace space(c.n);
    ConstraintPair pair = pair_from_string(c.pair);
    for (int trial = 0; trial < 3; ++trial) {
      IncidencePatch patch = make_incidence_patch(space, pair, rng);
      CHECK(patch.rows == patch_rows(pair));
      CHECK(patch.cols == patch_cols(pair));
      CornerCertificate cert = complete_patch(patch);
      CHECK(cert.on_quadric < 1e-8);
      CHECK(cert.in_v < 1e-7);
      CHECK(cert.in_h < 1e-7);
      CHECK(cert.final_quad < 1e-8);
      if (pair.v_kind == LineKind::Circular && pair.h_kind == LineKind::Circular) {
        REQUIRE(cert.six_circles.size() == 6);
        for (double r : cert.six_circles) CHECK(r < 1e-8);
      }
    }
  }
}

TEST_CASE("grow_net keeps constraints and circularity") {
  Rng rng(239);
  MoebiusSpace sp2(2);
  GrownNet net = grow_net(sp2, pair_from_string("circular-circular"), 6, 6, rng);
  CHECK(net.max_on_quadric < 1e-8);
  CircularNet circ = to_circular(net);
  CHECK(circ.circularity_residual() < 1e-8);
  for (int j = 0; j < 6; ++j) CHECK(net.lift.row_span(j).dim() == 2);
  for (int i = 0; i < 6; ++i) CHECK(net.lift.col_span(i).dim() == 2);

  MoebiusSpace sp3(3);
  GrownNet lp = grow_net(sp3, pair_from_string("linear-planar"), 6, 4, rng);
  CircularNet lpc = to_circular(lp);
  CHECK(lpc.circularity_residual() < 1e-8);
  // j-lines are honest straight lines in R^3
  for (int i = 0; i < 6; ++i) {
    Mat m(4, 3);
    for (int j = 0; j < 4; ++j)
      m.row(j) = (lpc.point(i, j) - lpc.point(i, 0)).transpose();
    CHECK(numeric_rank(m) <= 1);
  }
}

TEST_CASE("envelope: circular-circular in the plane (confocal conics)") {
  Rng rng(241);
  MoebiusSpace sp(2);
  GrownNet net = grow_net(sp, pair_from_string("circular-circular"), 7, 7, rng);
  Report rep = verify_envelope(net);
  for (const auto& c : rep.checks) {
    CAPTURE(c.id);
    CAPTURE(c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("envelope: circular-circular in space lies on a cyclide pencil") {
  Rng rng(243);
  MoebiusSpace sp(3);
  GrownNet net = grow_net(sp, pair_from_string("circular-circular"), 5, 5, rng);
  Report rep = verify_envelope(net);
  for (const auto& c : rep.checks) {
    CAPTURE(c.id);
    CAPTURE(c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("envelope: linear-linear parallelism parity") {
  Rng rng(251);
  MoebiusSpace sp(2);
  GrownNet net = grow_net(sp, pair_from_string("linear-linear"), 6, 6, rng);
  Report rep = verify_envelope(net);
  for (const auto& c : rep.checks) {
    CAPTURE(c.id);
    CAPTURE(c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("envelope: linear-planar in space") {
  Rng rng(257);
  MoebiusSpace sp(3);
  GrownNet net = grow_net(sp, pair_from_string("linear-planar"), 7, 6, rng);
  Report rep = verify_envelope(net);
  for (const auto& c : rep.checks) {
    CAPTURE(c.id);
    CAPTURE(c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("envelope: planar-planar conics at infinity") {
  Rng rng(263);
  MoebiusSpace sp(3);
  GrownNet net = grow_net(sp, pair_from_string("planar-planar"), 7, 7, rng);
  Report rep = verify_envelope(net);
  for (const auto& c : rep.checks) {
    CAPTURE(c.id);
    CAPTURE(c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("envelope: spherical-spherical confocal center quadrics") {
  Rng rng(269);
  MoebiusSpace sp(3);
  GrownNet net = grow_net(sp, pair_from_string("spherical-spherical"), 12, 12, rng);
  Report rep = verify_envelope(net);
  for (const auto& c : rep.checks) {
    CAPTURE(c.id);
    CAPTURE(c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("envelope: structural checks for the mixed pairs") {
  Rng rng(271);
  MoebiusSpace sp3(3);
  MoebiusSpace sp2(2);
  struct Case {
    const char* pair;
    const MoebiusSpace* sp;
    int rows, cols;
  };
  const Case cases[] = {
      {"linear-circular", &sp2, 7, 5},
      {"circular-spherical", &sp3, 6, 5},
      {"linear-spherical", &sp3, 6, 5},
      {"circular-planar", &sp3, 6, 7},
      {"planar-spherical", &sp3, 12, 6},
  };
  for (const auto& c : cases) {
    CAPTURE(c.pair);
    GrownNet net = grow_net(*c.sp, pair_from_string(c.pair), c.rows, c.cols, rng);
    Report rep = verify_envelope(net);
    for (const auto& chk : rep.checks) {
      CAPTURE(chk.id);
      CAPTURE(chk.residual);
      CHECK(chk.pass);
    }
  }
}

TEST_CASE("one family m-spherical: degeneracy steps and orthogonal spheres") {
  Rng rng(277);
  // circles (m=1) and 2-spheres (m=2) in R^3
  for (int m : {1, 2}) {
    CAPTURE(m);
    CircularNet net = spherical_row_net(3, m, m + 4, m + 3, rng);
    Report rep = spherical_line_analysis(net, m, false);
    for (const auto& c : rep.checks) {
      CAPTURE(c.id);
      CAPTURE(c.residual);
      CHECK(c.pass);
    }
  }
  // planar family: the B-degenerate points land in the hyperplane at infinity
  CircularNet planar = spherical_row_net(3, 2, 6, 5, rng, true);
  Report rep = spherical_line_analysis(planar, 2, true);
  for (const auto& c : rep.checks) {
    CAPTURE(c.id);
    CAPTURE(c.residual);
    CHECK(c.pass);
  }
}

TEST_CASE("foci oracle on known conics") {
  // x^2/25 + y^2/9 = 1: foci at (+-4, 0).
  Mat f = Mat::Zero(3, 3);
  f(0, 0) = 1.0 / 25.0;
  f(1, 1) = 1.0 / 9.0;
  f(2, 2) = -1.0;
  ConicFoci foci = conic_foci(Quadric(f));
  const Vec a = foci.f1, b = foci.f2;
  CHECK(std::min((a - e2(4, 0)).norm(), (a - e2(-4, 0)).norm()) < 1e-12);
  CHECK(std::min((b - e2(4, 0)).norm(), (b - e2(-4, 0)).norm()) < 1e-12);

  // Confocal hyperbola x^2/7 - y^2/9 = 1 shares the foci (c^2 = 16).
  Mat h = Mat::Zero(3, 3);
  h(0, 0) = 1.0 / 7.0;
  h(1, 1) = -1.0 / 9.0;
  h(2, 2) = -1.0;
  ConicFoci hf = conic_foci(Quadric(h));
  CHECK(std::min((hf.f1 - e2(4, 0)).norm(), (hf.f1 - e2(-4, 0)).norm()) < 1e-12);
  CHECK(confocal_residual({Quadric(f), Quadric(h)}) < 1e-12);

  // A non-confocal pair fails the dual-pencil test.
  Mat g = Mat::Zero(3, 3);
  g(0, 0) = 1.0 / 24.0;
  g(1, 1) = 1.0 / 9.0;
  g(2, 2) = -1.0;
  CHECK(confocal_residual({Quadric(f), Quadric(g)}) > 1e-4);
}
