#include "dcnet/moebius.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace dcnet {

namespace {

Mat moebius_form(int n) {
  Vec d = Vec::Ones(n + 2);
  d[n + 1] = -1.0;
  return Mat(d.asDiagonal());
}

}  // namespace

MoebiusSpace::MoebiusSpace(int n) : n_(n), q_(moebius_form(n)) {
  if (n < 2) throw GeometryError("MoebiusSpace: n must be >= 2");
}

Vec MoebiusSpace::e0() const {
  Vec v = Vec::Zero(n_ + 2);
  v[n_] = -0.5;
  v[n_ + 1] = 0.5;
  return v;
}

Vec MoebiusSpace::einf() const {
  Vec v = Vec::Zero(n_ + 2);
  v[n_] = 0.5;
  v[n_ + 1] = 0.5;
  return v;
}

HPoint MoebiusSpace::lift_point(const Vec& p) const {
  if (p.size() != n_) throw GeometryError("lift_point: wrong Euclidean dimension");
  Vec v(n_ + 2);
  v.head(n_) = p;
  const double n2 = p.squaredNorm();
  v[n_] = (n2 - 1.0) / 2.0;
  v[n_ + 1] = (n2 + 1.0) / 2.0;
  return HPoint(v);
}

MoebiusSpace::Projected MoebiusSpace::project(const HPoint& m) const {
  const Vec& v = m.coords();
  const double w = x0(v);
  Projected out;
  if (std::abs(w) < 1e-10) {
    out.at_infinity = true;
    Vec dir = v.head(n_);
    const double dn = dir.norm();
    if (dn < 1e-12) throw GeometryError("project: north pole has no image");
    out.direction = dir / dn;
    out.point = Vec::Zero(n_);
    return out;
  }
  out.point = v.head(n_) / w;
  out.direction = Vec::Zero(n_);
  return out;
}

SphereRep classify_sphere_rep(const MoebiusSpace& space, const HPoint& rep) {
  SphereRep out{SphereRep::Kind::Sphere, rep, Vec(), 0.0, Vec(), 0.0};
  const Vec& v = rep.coords();
  const int n = space.n();
  const double phi = space.quadric().eval(rep, rep);
  const double w = space.x0(v);
  if (std::abs(w) < 1e-9) {
    out.kind = SphereRep::Kind::Plane;
    Vec normal = v.head(n);
    const double nn = normal.norm();
    if (nn < 1e-12) throw GeometryError("classify_sphere_rep: degenerate plane rep");
    out.normal = normal / nn;
    // E = v + 2d*einf carries the offset d on both of the last two slots.
    out.offset = v[n] / nn;
    out.center = Vec::Zero(n);
    return out;
  }
  out.center = v.head(n) / w;
  out.radius2 = out.center.squaredNorm() - space.xinf(v) / w;
  if (std::abs(phi) < Tolerances::global().residual)
    out.kind = SphereRep::Kind::Point;
  else if (out.radius2 > 0)
    out.kind = SphereRep::Kind::Sphere;
  else
    out.kind = SphereRep::Kind::ImaginarySphere;
  return out;
}

SphereRep sphere_through(const MoebiusSpace& space, const std::vector<Vec>& points) {
  if (static_cast<int>(points.size()) != space.n() + 1)
    throw GeometryError("sphere_through: need n+1 points");
  std::vector<HPoint> lifts;
  for (const auto& p : points) lifts.push_back(space.lift_point(p));
  Subspace span = Subspace::from_points(lifts);
  if (span.dim() != space.n())
    throw GeometryError("sphere_through: points span a deficient subspace (dim " +
                        std::to_string(span.dim()) + ")");
  return classify_sphere_rep(space, polar_point(span, space.quadric()));
}

double circularity_residual(const MoebiusSpace& space, const Vec& a, const Vec& b,
                            const Vec& c, const Vec& d) {
  Mat m(4, space.n() + 2);
  m.row(0) = space.lift_point(a).coords();
  m.row(1) = space.lift_point(b).coords();
  m.row(2) = space.lift_point(c).coords();
  m.row(3) = space.lift_point(d).coords();
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  return s[s.size() - 1] / s[0];
}

// --- CircularNet -------------------------------------------------------------

namespace {

QNet lift_points(const MoebiusSpace& space, int rows, int cols,
                 const std::vector<Vec>& pts) {
  std::vector<HPoint> lifted;
  lifted.reserve(pts.size());
  for (const auto& p : pts) lifted.push_back(space.lift_point(p));
  return QNet(rows, cols, space.ambient(), std::move(lifted));
}

}  // namespace

CircularNet::CircularNet(MoebiusSpace space, int rows, int cols, std::vector<Vec> points)
    : space_(space),
      rows_(rows),
      cols_(cols),
      points_(std::move(points)),
      lift_(lift_points(space_, rows, cols, points_)) {
  if (static_cast<int>(points_.size()) != rows_ * cols_)
    throw GeometryError("CircularNet: point count does not match grid");
}

CircularNet CircularNet::from_lift(const MoebiusSpace& space, const QNet& lift) {
  std::vector<Vec> pts;
  pts.reserve(lift.rows() * lift.cols());
  for (int i = 0; i < lift.rows(); ++i)
    for (int j = 0; j < lift.cols(); ++j) {
      auto pr = space.project(lift.at(i, j));
      if (pr.at_infinity)
        throw GeometryError("CircularNet::from_lift: vertex at infinity");
      pts.push_back(pr.point);
    }
  return CircularNet(space, lift.rows(), lift.cols(), std::move(pts));
}

double CircularNet::circularity_residual() const {
  double worst = 0.0;
  for (int i = 0; i + 1 < rows_; ++i)
    for (int j = 0; j + 1 < cols_; ++j)
      worst = std::max(worst, dcnet::circularity_residual(
                                  space_, point(i, j), point(i + 1, j),
                                  point(i + 1, j + 1), point(i, j + 1)));
  return worst;
}

// --- constraint pairs ----------------------------------------------------------

std::string to_string(LineKind k) {
  switch (k) {
    case LineKind::Circular: return "circular";
    case LineKind::Linear: return "linear";
    case LineKind::Spherical: return "spherical";
    case LineKind::Planar: return "planar";
  }
  return "?";
}

LineKind line_kind_from_string(const std::string& s) {
  if (s == "circular") return LineKind::Circular;
  if (s == "linear") return LineKind::Linear;
  if (s == "spherical") return LineKind::Spherical;
  if (s == "planar") return LineKind::Planar;
  throw GeometryError("unknown parameter-line kind: " + s);
}

int lift_span_dim(LineKind k) {
  return (k == LineKind::Circular || k == LineKind::Linear) ? 2 : 3;
}

bool through_north(LineKind k) {
  return k == LineKind::Linear || k == LineKind::Planar;
}

std::string to_string(const ConstraintPair& p) {
  return to_string(p.v_kind) + "-" + to_string(p.h_kind);
}

ConstraintPair pair_from_string(const std::string& s) {
  const auto dash = s.find('-');
  if (dash == std::string::npos)
    throw GeometryError("constraint pair must look like circular-spherical");
  return {line_kind_from_string(s.substr(0, dash)),
          line_kind_from_string(s.substr(dash + 1))};
}

std::vector<ConstraintPair> all_constraint_pairs() {
  using K = LineKind;
  return {{K::Circular, K::Circular}, {K::Linear, K::Circular},
          {K::Linear, K::Linear},     {K::Circular, K::Spherical},
          {K::Linear, K::Spherical},  {K::Circular, K::Planar},
          {K::Linear, K::Planar},     {K::Spherical, K::Spherical},
          {K::Planar, K::Spherical},  {K::Planar, K::Planar}};
}

int patch_rows(const ConstraintPair& p) {
  return lift_span_dim(p.h_kind) + 2 - (through_north(p.h_kind) ? 1 : 0);
}

int patch_cols(const ConstraintPair& p) {
  return lift_span_dim(p.v_kind) + 2 - (through_north(p.v_kind) ? 1 : 0);
}

const HPoint& IncidencePatch::at(int i, int j) const {
  return lifts[static_cast<size_t>(i) * cols + j];
}
HPoint& IncidencePatch::at(int i, int j) {
  return lifts[static_cast<size_t>(i) * cols + j];
}

namespace {

// Span of a parameter line, extended through the north pole when the
// constraint kind asks for Euclidean flatness.
Subspace constrained_span(const MoebiusSpace& space, const std::vector<HPoint>& pts,
                          bool add_north) {
  std::vector<HPoint> gen = pts;
  if (add_north) gen.push_back(space.north());
  return Subspace::from_points(gen);
}

struct PatchBuilder {
  const MoebiusSpace& space;
  ConstraintPair pair;
  int rows, cols;
  int dv, dh;
  bool tv, th;
  Rng& rng;
  std::vector<std::vector<HPoint>> grid;

  PatchBuilder(const MoebiusSpace& s, ConstraintPair p, Rng& r)
      : space(s),
        pair(p),
        rows(patch_rows(p)),
        cols(patch_cols(p)),
        dv(lift_span_dim(p.v_kind)),
        dh(lift_span_dim(p.h_kind)),
        tv(through_north(p.v_kind)),
        th(through_north(p.h_kind)),
        rng(r) {
    if (dh > s.n() || dv > s.n())
      throw GeometryError("incidence patch: constraint needs a larger ambient space");
  }

  HPoint chord(const HPoint& from, const Subspace* section) {
    return random_chord_point(space.quadric(), from, rng, section);
  }

  // Random chord point on the quad conic, distinct from the quad neighbours.
  HPoint free_vertex(const HPoint& diag, const HPoint& left, const HPoint& down) {
    const Subspace plane = Subspace::from_points({diag, left, down});
    if (plane.dim() != 2) throw GeometryError("incidence patch: collinear triple");
    for (int attempt = 0; attempt < 30; ++attempt) {
      HPoint cand = chord(diag, &plane);
      if (HPoint::distance(cand, left) > 1e-4 && HPoint::distance(cand, down) > 1e-4)
        return cand;
    }
    throw GeometryError("incidence patch: no generic fourth vertex");
  }

  // Deterministic vertex completing the quad inside `span`.
  HPoint constrained_vertex(const Subspace& span, const HPoint& diag,
                            const HPoint& prev_in_span, const HPoint& third) {
    const Subspace plane = Subspace::from_points({diag, prev_in_span, third});
    if (plane.dim() != 2) throw GeometryError("incidence patch: collinear triple");
    const Subspace line = meet(span, plane);
    if (line.dim() != 1)
      throw GeometryError("incidence patch: span-plane meet is not a line");
    SecondIntersection si = second_intersection(line, prev_in_span, space.quadric());
    if (si.tangent) throw GeometryError("incidence patch: tangency");
    return si.point;
  }

  void build() {
    grid.assign(rows, {});
    // First i-line inside a fresh H_0.
    std::vector<HPoint> hgens;
    hgens.push_back(space.lift_point(rng.normal_vec(space.n())));
    for (int k = 1; k <= dh - (th ? 1 : 0); ++k)
      hgens.push_back(chord(hgens.back(), nullptr));
    const Subspace h0 = constrained_span(space, hgens, th);
    if (h0.dim() != dh) throw GeometryError("incidence patch: H_0 span dim");
    std::vector<HPoint> line0 = hgens;
    while (static_cast<int>(line0.size()) < rows) line0.push_back(chord(line0.back(), &h0));
    for (int i = 0; i < rows; ++i) grid[i].push_back(line0[i]);

    // First j-line inside a fresh V_0 through the shared origin vertex.
    std::vector<HPoint> vgens;
    vgens.push_back(grid[0][0]);
    for (int k = 1; k <= dv - (tv ? 1 : 0); ++k)
      vgens.push_back(chord(vgens.back(), nullptr));
    const Subspace v0 = constrained_span(space, vgens, tv);
    if (v0.dim() != dv) throw GeometryError("incidence patch: V_0 span dim");
    std::vector<HPoint> col0 = vgens;
    while (static_cast<int>(col0.size()) < cols) col0.push_back(chord(col0.back(), &v0));
    for (int j = 1; j < cols; ++j) grid[0].push_back(col0[j]);

    for (int j = 1; j < cols; ++j) {
      for (int i = 1; i < rows; ++i) {
        if (i == rows - 1 && j == cols - 1) continue;  // the theorem's corner
        if (i < rows - 1 && j < cols - 1) {
          grid[i].push_back(free_vertex(grid[i - 1][j - 1], grid[i][j - 1], grid[i - 1][j]));
        } else if (j == cols - 1) {
          std::vector<HPoint> built(grid[i].begin(), grid[i].begin() + (cols - 1));
          const Subspace vi = constrained_span(space, built, tv);
          if (vi.dim() != dv) throw GeometryError("incidence patch: V_i span dim");
          grid[i].push_back(
              constrained_vertex(vi, grid[i - 1][j - 1], grid[i][j - 1], grid[i - 1][j]));
        } else {  // i == rows-1, constrained to H_j
          std::vector<HPoint> built;
          for (int k = 0; k < rows - 1; ++k) built.push_back(grid[k][j]);
          const Subspace hj = constrained_span(space, built, th);
          if (hj.dim() != dh) throw GeometryError("incidence patch: H_j span dim");
          grid[i].push_back(
              constrained_vertex(hj, grid[i - 1][j - 1], grid[i - 1][j], grid[i][j - 1]));
        }
      }
    }
  }
};

}  // namespace

IncidencePatch make_incidence_patch(const MoebiusSpace& space, ConstraintPair pair,
                                    Rng& rng) {
  for (int attempt = 0; attempt < 20; ++attempt) {
    try {
      PatchBuilder b(space, pair, rng);
      b.build();
      IncidencePatch patch{space, pair, b.rows, b.cols, {}, false};
      patch.lifts.reserve(static_cast<size_t>(b.rows) * b.cols);
      for (int i = 0; i < b.rows; ++i)
        for (int j = 0; j < b.cols; ++j) {
          if (i == b.rows - 1 && j == b.cols - 1)
            patch.lifts.push_back(space.north());  // placeholder until completed
          else
            patch.lifts.push_back(b.grid[i][j]);
        }
      return patch;
    } catch (const GeometryError&) {
      continue;
    }
  }
  throw GeometryError("make_incidence_patch: no generic configuration after 20 tries");
}

CornerCertificate complete_patch(IncidencePatch& patch) {
  const int r = patch.rows, c = patch.cols;
  const MoebiusSpace& space = patch.space;
  const bool tv = through_north(patch.pair.v_kind);
  const bool th = through_north(patch.pair.h_kind);

  std::vector<HPoint> last_row;
  for (int j = 0; j < c - 1; ++j) last_row.push_back(patch.at(r - 1, j));
  const Subspace v_last = constrained_span(space, last_row, tv);
  std::vector<HPoint> last_col;
  for (int i = 0; i < r - 1; ++i) last_col.push_back(patch.at(i, c - 1));
  const Subspace h_last = constrained_span(space, last_col, th);
  if (v_last.dim() != lift_span_dim(patch.pair.v_kind) ||
      h_last.dim() != lift_span_dim(patch.pair.h_kind))
    throw GeometryError("complete_patch: final span dimensions are off");

  const Subspace plane = Subspace::from_points(
      {patch.at(r - 2, c - 2), patch.at(r - 1, c - 2), patch.at(r - 2, c - 1)});
  const HPoint corner = meet_point({plane, v_last, h_last}).point;

  CornerCertificate cert{corner, 0, 0, 0, 0, {}};
  cert.on_quadric = space.quadric().incidence_residual(corner);
  cert.in_v = v_last.distance_to(corner);
  cert.in_h = h_last.distance_to(corner);
  {
    Mat m(4, space.n() + 2);
    m.row(0) = patch.at(r - 2, c - 2).coords();
    m.row(1) = patch.at(r - 1, c - 2).coords();
    m.row(2) = corner.coords();
    m.row(3) = patch.at(r - 2, c - 1).coords();
    Eigen::JacobiSVD<Mat> svd(m);
    cert.final_quad = svd.singularValues()[3] / svd.singularValues()[0];
  }
  patch.at(r - 1, c - 1) = corner;
  patch.completed = true;

  if (patch.pair.v_kind == LineKind::Circular &&
      patch.pair.h_kind == LineKind::Circular) {
    // The corner is also the concurrency point of six circles; each
    // quadruple below must be concyclic.
    const int quadruples[6][4][2] = {
        {{2, 2}, {3, 2}, {2, 3}, {3, 3}}, {{0, 0}, {3, 0}, {0, 3}, {3, 3}},
        {{0, 2}, {0, 3}, {3, 2}, {3, 3}}, {{2, 0}, {3, 0}, {2, 3}, {3, 3}},
        {{3, 0}, {3, 1}, {3, 2}, {3, 3}}, {{0, 3}, {1, 3}, {2, 3}, {3, 3}}};
    for (const auto& quad : quadruples) {
      Mat m(4, space.n() + 2);
      for (int k = 0; k < 4; ++k)
        m.row(k) = patch.at(quad[k][0], quad[k][1]).coords();
      Eigen::JacobiSVD<Mat> svd(m);
      cert.six_circles.push_back(svd.singularValues()[3] / svd.singularValues()[0]);
    }
  }
  return cert;
}

// --- growth ---------------------------------------------------------------------

namespace {

struct GrowState {
  const MoebiusSpace& space;
  ConstraintPair pair;
  std::vector<std::vector<HPoint>> grid;
  Rng& rng;

  int rows() const { return static_cast<int>(grid.size()); }
  int cols() const { return static_cast<int>(grid[0].size()); }

  Subspace v_span(int i) const {
    return constrained_span(space, grid[i], through_north(pair.v_kind));
  }
  Subspace h_span(int j) const {
    std::vector<HPoint> col;
    for (const auto& row : grid) col.push_back(row[j]);
    return constrained_span(space, col, through_north(pair.h_kind));
  }

  void add_column() {
    const int r = rows(), c = cols();
    for (int attempt = 0; attempt < 20; ++attempt) {
      try {
        std::vector<HPoint> fresh;
        const Subspace v0 = v_span(0);
        fresh.push_back(random_chord_point(space.quadric(), grid[0][c - 1], rng, &v0));
        for (int i = 1; i < r; ++i) {
          const Subspace vi = v_span(i);
          const Subspace plane = Subspace::from_points(
              {grid[i - 1][c - 1], fresh[i - 1], grid[i][c - 1]});
          const Subspace line = meet(vi, plane);
          if (line.dim() != 1) throw GeometryError("grow: V meet is not a line");
          SecondIntersection si =
              second_intersection(line, grid[i][c - 1], space.quadric());
          if (si.tangent) throw GeometryError("grow: tangency");
          fresh.push_back(si.point);
        }
        for (int i = 0; i < r; ++i) grid[i].push_back(fresh[i]);
        return;
      } catch (const GeometryError&) {
        continue;
      }
    }
    throw GeometryError("grow_net: column growth failed");
  }

  void add_row() {
    const int r = rows(), c = cols();
    for (int attempt = 0; attempt < 20; ++attempt) {
      try {
        std::vector<HPoint> fresh;
        const Subspace h0 = h_span(0);
        fresh.push_back(random_chord_point(space.quadric(), grid[r - 1][0], rng, &h0));
        for (int j = 1; j < c; ++j) {
          const Subspace hj = h_span(j);
          const Subspace plane = Subspace::from_points(
              {grid[r - 1][j - 1], fresh[j - 1], grid[r - 1][j]});
          const Subspace line = meet(hj, plane);
          if (line.dim() != 1) throw GeometryError("grow: H meet is not a line");
          SecondIntersection si =
              second_intersection(line, grid[r - 1][j], space.quadric());
          if (si.tangent) throw GeometryError("grow: tangency");
          fresh.push_back(si.point);
        }
        grid.push_back(std::move(fresh));
        return;
      } catch (const GeometryError&) {
        continue;
      }
    }
    throw GeometryError("grow_net: row growth failed");
  }
};

}  // namespace

GrownNet grow_net(const MoebiusSpace& space, ConstraintPair pair, int rows,
                  int cols, Rng& rng) {
  if (rows < patch_rows(pair) || cols < patch_cols(pair))
    throw GeometryError("grow_net: requested grid smaller than the seed patch");
  for (int attempt = 0; attempt < 10; ++attempt) {
    try {
      IncidencePatch patch = make_incidence_patch(space, pair, rng);
      CornerCertificate cert = complete_patch(patch);
      if (cert.on_quadric > Tolerances::global().residual)
        throw GeometryError("grow_net: seed corner missed the quadric");
      GrowState st{space, pair, {}, rng};
      st.grid.assign(patch.rows, {});
      for (int i = 0; i < patch.rows; ++i)
        for (int j = 0; j < patch.cols; ++j) st.grid[i].push_back(patch.at(i, j));
      while (st.cols() < cols) st.add_column();
      while (st.rows() < rows) st.add_row();

      std::vector<HPoint> flat;
      for (const auto& row : st.grid)
        for (const auto& p : row) flat.push_back(p);
      GrownNet out{space, pair, QNet(rows, cols, space.ambient(), std::move(flat)), 0.0};
      for (const auto& p : out.lift.vertices())
        out.max_on_quadric =
            std::max(out.max_on_quadric, space.quadric().incidence_residual(p));
      if (out.max_on_quadric > Tolerances::global().residual)
        throw GeometryError("grow_net: vertex drifted off the quadric");
      for (int j = 0; j < cols; ++j)
        if (out.lift.row_span(j).dim() > lift_span_dim(pair.h_kind))
          throw GeometryError("grow_net: i-line span exceeded its constraint");
      for (int i = 0; i < rows; ++i)
        if (out.lift.col_span(i).dim() > lift_span_dim(pair.v_kind))
          throw GeometryError("grow_net: j-line span exceeded its constraint");
      return out;
    } catch (const GeometryError&) {
      continue;
    }
  }
  throw GeometryError("grow_net: no generic net after 10 tries");
}

CircularNet to_circular(const GrownNet& net) {
  return CircularNet::from_lift(net.space, net.lift);
}

// --- dual / confocal utilities ---------------------------------------------------

Mat adjugate(const Mat& m) {
  const double det = m.determinant();
  Mat adj;
  if (std::abs(det) > 1e-12 * std::pow(m.norm(), static_cast<double>(m.rows()))) {
    adj = det * m.inverse();
  } else {
    // cofactor fallback for (near-)singular forms
    const Eigen::Index n = m.rows();
    adj.resize(n, n);
    for (Eigen::Index i = 0; i < n; ++i)
      for (Eigen::Index j = 0; j < n; ++j) {
        Mat minor(n - 1, n - 1);
        for (Eigen::Index r = 0, rr = 0; r < n; ++r) {
          if (r == i) continue;
          Eigen::Index cc = 0;
          for (Eigen::Index c = 0; c < n; ++c) {
            if (c == j) continue;
            minor(rr, cc++) = m(r, c);
          }
          ++rr;
        }
        adj(j, i) = (((i + j) % 2) ? -1.0 : 1.0) * minor.determinant();
      }
  }
  const double nrm = adj.norm();
  if (nrm < 1e-300) throw GeometryError("adjugate: zero dual form");
  return adj / nrm;
}

double confocal_residual(const std::vector<Quadric>& family) {
  if (family.size() < 2) throw GeometryError("confocal_residual: need >= 2 quadrics");
  const Eigen::Index n1 = family[0].form().rows();
  Mat stacked(static_cast<Eigen::Index>(family.size()) + 1, n1 * n1);
  for (size_t k = 0; k < family.size(); ++k) {
    Mat d = adjugate(family[k].form());
    stacked.row(static_cast<Eigen::Index>(k)) =
        Eigen::Map<const Vec>(d.data(), n1 * n1).transpose();
  }
  Mat einf = Mat::Identity(n1, n1);
  einf(n1 - 1, n1 - 1) = 0.0;
  einf /= einf.norm();
  stacked.row(static_cast<Eigen::Index>(family.size())) =
      Eigen::Map<const Vec>(einf.data(), n1 * n1).transpose();
  Eigen::JacobiSVD<Mat> svd(stacked);
  const auto& s = svd.singularValues();
  if (s.size() < 3) return 0.0;
  return s[2] / s[0];
}

ConicFoci conic_foci(const Quadric& conic) {
  const Mat& f = conic.form();
  if (f.rows() != 3) throw GeometryError("conic_foci: need a conic in RP^2");
  const Mat a = f.topLeftCorner(2, 2);
  const Vec b = f.topRightCorner(2, 1);
  if (std::abs(a.determinant()) < 1e-12)
    throw GeometryError("conic_foci: parabola or degenerate conic");
  const Vec center = a.colPivHouseholderQr().solve(Vec(-b));
  const double cbar = f(2, 2) + b.dot(center);
  Eigen::SelfAdjointEigenSolver<Mat> es(a);
  const Vec ev = es.eigenvalues();
  const double s0 = -cbar / ev[0];
  const double s1 = -cbar / ev[1];
  int axis;
  double c2;
  if (s0 > 0 && s1 > 0) {  // ellipse: foci on the major axis
    axis = (s0 >= s1) ? 0 : 1;
    c2 = std::abs(s0 - s1);
  } else if (s0 > 0 || s1 > 0) {  // hyperbola: foci on the real axis
    axis = (s0 > 0) ? 0 : 1;
    c2 = std::abs(s0) + std::abs(s1);
  } else {
    throw GeometryError("conic_foci: empty conic");
  }
  const Vec dir = es.eigenvectors().col(axis);
  const double c = std::sqrt(c2);
  return {Vec(center + c * dir), Vec(center - c * dir)};
}

// --- envelope verification ---------------------------------------------------------

namespace {

QuadricFit fit_through_euclidean(const std::vector<Vec>& pts) {
  std::vector<HPoint> h;
  for (const auto& p : pts) {
    Vec v(p.size() + 1);
    v.head(p.size()) = p;
    v[p.size()] = 1.0;
    h.push_back(HPoint(v));
  }
  return fit_quadric(h);
}

// ~0 iff the homogenized points have rank <= expected_rank (affine flat fit).
double affine_fit_residual(const std::vector<Vec>& pts, int expected_rank) {
  Mat m(static_cast<Eigen::Index>(pts.size()), pts[0].size() + 1);
  for (size_t i = 0; i < pts.size(); ++i) {
    m.row(static_cast<Eigen::Index>(i)).head(pts[i].size()) = pts[i].transpose();
    m(static_cast<Eigen::Index>(i), pts[i].size()) = 1.0;
  }
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (expected_rank >= s.size()) return 0.0;
  return s[expected_rank] / s[0];
}

double parallel_residual(const std::vector<Vec>& dirs) {
  double worst = 0.0;
  for (size_t a = 0; a < dirs.size(); ++a)
    for (size_t b = a + 1; b < dirs.size(); ++b) {
      const Vec u = dirs[a] / dirs[a].norm();
      const Vec v = dirs[b] / dirs[b].norm();
      worst = std::max(worst, std::min((u - v).norm(), (u + v).norm()));
    }
  return worst;
}

// Double contact of two conics: the pencil contains a member of corank >= 2
// (the squared contact chord).
double double_contact_residual(const Quadric& a, const Quadric& b) {
  auto deg = degenerate_members(Pencil(a, b));
  if (deg.everywhere_degenerate) return 0.0;
  double best = 1e300;
  for (const auto& m : deg.members) {
    Eigen::JacobiSVD<Mat> svd(m.quadric.form());
    const auto& s = svd.singularValues();
    best = std::min(best, s[s.size() - 2] / s[0]);
  }
  return best;
}

std::vector<HPoint> direction_points(const std::vector<Vec>& dirs) {
  std::vector<HPoint> out;
  out.reserve(dirs.size());
  for (const auto& d : dirs) out.push_back(HPoint(d));
  return out;
}

}  // namespace

Report verify_envelope(const GrownNet& net) {
  Report rep;
  const MoebiusSpace& space = net.space;
  const int n = space.n();
  const QNet& lift = net.lift;
  const int rows = lift.rows(), cols = lift.cols();
  const ConstraintPair pair = net.pair;
  CircularNet circ = to_circular(net);

  auto row_rep = [&](int j) {
    return classify_sphere_rep(space,
                               polar_point(lift.row_span(j), space.quadric()));
  };
  auto col_rep = [&](int i) {
    return classify_sphere_rep(space,
                               polar_point(lift.col_span(i), space.quadric()));
  };
  auto row_spans = [&] {
    std::vector<Subspace> s;
    for (int j = 0; j < cols; ++j) s.push_back(lift.row_span(j));
    return s;
  };
  auto col_spans = [&] {
    std::vector<Subspace> s;
    for (int i = 0; i < rows; ++i) s.push_back(lift.col_span(i));
    return s;
  };
  auto v_line_dirs = [&] {
    std::vector<Vec> dirs;
    for (int i = 0; i < rows; ++i)
      dirs.push_back(Vec(circ.point(i, 1) - circ.point(i, 0)));
    return dirs;
  };
  // Best-fit plane (normal, offset) through the points of an i-line (fixed j)
  // or a j-line (fixed i).
  auto fit_plane = [&](bool along_i, int fixed) {
    const int count = along_i ? rows : cols;
    Mat m(count, n);
    Vec mean = Vec::Zero(n);
    for (int k = 0; k < count; ++k)
      mean += along_i ? circ.point(k, fixed) : circ.point(fixed, k);
    mean /= count;
    for (int k = 0; k < count; ++k)
      m.row(k) =
          ((along_i ? circ.point(k, fixed) : circ.point(fixed, k)) - mean).transpose();
    Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
    Vec normal = svd.matrixV().col(n - 1);
    return std::pair<Vec, double>(normal, normal.dot(mean));
  };

  const bool cc = pair.v_kind == LineKind::Circular && pair.h_kind == LineKind::Circular;
  const bool ll = pair.v_kind == LineKind::Linear && pair.h_kind == LineKind::Linear;
  const bool ss = pair.v_kind == LineKind::Spherical && pair.h_kind == LineKind::Spherical;
  const bool pp = pair.v_kind == LineKind::Planar && pair.h_kind == LineKind::Planar;

  if (cc && n == 2) {
    std::vector<Vec> ch, cv;
    std::vector<SphereRep> hreps, vreps;
    for (int j = 0; j < cols; ++j) hreps.push_back(row_rep(j));
    for (int i = 0; i < rows; ++i) vreps.push_back(col_rep(i));
    for (const auto& r : hreps) ch.push_back(r.center);
    for (const auto& r : vreps) cv.push_back(r.center);
    QuadricFit qh = fit_through_euclidean(ch);
    QuadricFit qv = fit_through_euclidean(cv);
    rep.add("centers_h_on_conic", qh.residual, 1e-6);
    rep.add("centers_v_on_conic", qv.residual, 1e-6);
    rep.add("confocal_dual_pencil", confocal_residual({qh.quadric, qv.quadric}), 1e-6);
    ConicFoci fh = conic_foci(qh.quadric);
    ConicFoci fv = conic_foci(qv.quadric);
    const double foci_mismatch =
        std::min((fh.f1 - fv.f1).norm() + (fh.f2 - fv.f2).norm(),
                 (fh.f1 - fv.f2).norm() + (fh.f2 - fv.f1).norm());
    rep.add("confocal_foci_oracle", foci_mismatch, 1e-6);

    const MeetPoint x = meet_point(row_spans());
    const MeetPoint y = meet_point(col_spans());
    double worst = 0.0;
    for (const auto& r : hreps)
      worst = std::max(worst, std::abs(space.quadric().eval(x.point, r.rep)));
    rep.add("orthogonal_circle_h", worst, 1e-7);
    worst = 0.0;
    for (const auto& r : vreps)
      worst = std::max(worst, std::abs(space.quadric().eval(y.point, r.rep)));
    rep.add("orthogonal_circle_v", worst, 1e-7);
    rep.add("orthogonal_pair", std::abs(space.quadric().eval(x.point, y.point)), 1e-7);

    SphereRep kh = classify_sphere_rep(space, x.point);
    SphereRep kv = classify_sphere_rep(space, y.point);
    rep.add_flag("orthogonal_pair_real", kh.radius2 > 0 || kv.radius2 > 0,
                 "at most one common circle may be imaginary");
    const double euc = std::abs((kh.center - kv.center).squaredNorm() - kh.radius2 -
                                kv.radius2) /
                       (1.0 + (kh.center - kv.center).squaredNorm());
    rep.add("orthogonal_pair_euclidean_oracle", euc, 1e-6);
  } else if (cc && n == 3) {
    // Both circle families lie on a Darboux cyclide: the pencil structure of
    // the lift carries the statement.
    InscribedNet in = make_inscribed(lift, space.quadric());
    PencilStructure ps = recover_pencil_structure(in);
    rep.add_flag("v_signature", ps.v_sig == Signature{2, 2, 1});
    rep.add_flag("h_signature", ps.h_sig == Signature{2, 2, 1});
    rep.add("moebius_in_pencil", ps.pencil_residual, 1e-7);
    rep.add_flag("v_alternation", ps.dim_v_adjacent == 1 && ps.dim_v_skip == 0);
    rep.add_flag("h_alternation", ps.dim_h_adjacent == 1 && ps.dim_h_skip == 0);
  } else if (ll && n == 2) {
    std::vector<Vec> even, odd;
    auto dirs = v_line_dirs();
    for (size_t i = 0; i < dirs.size(); ++i) (i % 2 ? odd : even).push_back(dirs[i]);
    rep.add("v_even_parallel", parallel_residual(even), 1e-7);
    rep.add("v_odd_parallel", parallel_residual(odd), 1e-7);
    std::vector<Vec> heven, hodd;
    for (int j = 0; j < cols; ++j) {
      Vec d = circ.point(1, j) - circ.point(0, j);
      (j % 2 ? hodd : heven).push_back(d);
    }
    rep.add("h_even_parallel", parallel_residual(heven), 1e-7);
    rep.add("h_odd_parallel", parallel_residual(hodd), 1e-7);
  } else if (pair.v_kind == LineKind::Linear && pair.h_kind == LineKind::Circular &&
             n == 2) {
    std::vector<HPoint> covectors;
    for (int i = 0; i < rows; ++i) {
      const Vec a = circ.point(i, 0), b = circ.point(i, 1);
      Vec l(3);
      l << a[1] - b[1], b[0] - a[0], a[0] * b[1] - a[1] * b[0];
      covectors.push_back(HPoint(l));
    }
    QuadricFit dual = fit_quadric(covectors);
    rep.add("lines_tangent_conic_dual_fit", dual.residual, 1e-6);
    Quadric conic(adjugate(dual.quadric.form()));
    std::vector<Vec> centers;
    double worst = 0.0;
    for (int j = 0; j < cols; ++j) {
      SphereRep r = row_rep(j);
      centers.push_back(r.center);
      Mat cf = Mat::Identity(3, 3);
      cf(0, 2) = cf(2, 0) = -r.center[0];
      cf(1, 2) = cf(2, 1) = -r.center[1];
      cf(2, 2) = r.center.squaredNorm() - r.radius2;
      worst = std::max(worst, double_contact_residual(Quadric(cf), conic));
    }
    rep.add("circles_double_contact", worst, 1e-6);
    rep.add("circle_centers_collinear", affine_fit_residual(centers, 2), 1e-6);
  } else if (pair.v_kind == LineKind::Linear && pair.h_kind == LineKind::Planar &&
             n == 3) {
    std::vector<Vec> even, odd;
    for (int j = 0; j < cols; ++j) {
      Vec normal = fit_plane(true, j).first;
      (j % 2 ? odd : even).push_back(normal);
    }
    rep.add("h_even_parallel", parallel_residual(even), 1e-7);
    rep.add("h_odd_parallel", parallel_residual(odd), 1e-7);
    QuadricFit conic_at_inf = fit_quadric(direction_points(v_line_dirs()));
    rep.add("line_directions_on_conic_at_infinity", conic_at_inf.residual, 1e-6);
  } else if (pp && n == 3) {
    std::vector<Vec> hnormals, vnormals;
    for (int j = 0; j < cols; ++j) hnormals.push_back(fit_plane(true, j).first);
    for (int i = 0; i < rows; ++i) vnormals.push_back(fit_plane(false, i).first);
    QuadricFit dh = fit_quadric(direction_points(hnormals));
    QuadricFit dv = fit_quadric(direction_points(vnormals));
    rep.add("h_planes_tangent_conic_at_infinity", dh.residual, 1e-6);
    rep.add("v_planes_tangent_conic_at_infinity", dv.residual, 1e-6);
  } else if (ss && n == 3) {
    std::vector<Vec> ch, cv;
    std::vector<SphereRep> hreps, vreps;
    for (int j = 0; j < cols; ++j) hreps.push_back(row_rep(j));
    for (int i = 0; i < rows; ++i) vreps.push_back(col_rep(i));
    for (const auto& r : hreps) ch.push_back(r.center);
    for (const auto& r : vreps) cv.push_back(r.center);
    QuadricFit qh = fit_through_euclidean(ch);
    QuadricFit qv = fit_through_euclidean(cv);
    rep.add("centers_h_on_quadric", qh.residual, 1e-6);
    rep.add("centers_v_on_quadric", qv.residual, 1e-6);
    rep.add("confocal_dual_pencil", confocal_residual({qh.quadric, qv.quadric}), 1e-6);

    const MeetPoint x = meet_point(row_spans());
    const MeetPoint y = meet_point(col_spans());
    double worst = 0.0;
    for (const auto& r : hreps)
      worst = std::max(worst, std::abs(space.quadric().eval(x.point, r.rep)));
    rep.add("orthogonal_sphere_h", worst, 1e-7);
    worst = 0.0;
    for (const auto& r : vreps)
      worst = std::max(worst, std::abs(space.quadric().eval(y.point, r.rep)));
    rep.add("orthogonal_sphere_v", worst, 1e-7);
    rep.add("orthogonal_pair", std::abs(space.quadric().eval(x.point, y.point)), 1e-7);
    SphereRep sh = classify_sphere_rep(space, x.point);
    SphereRep sv = classify_sphere_rep(space, y.point);
    rep.add_flag("orthogonal_pair_real", sh.radius2 > 0 || sv.radius2 > 0,
                 "at most one common sphere may be imaginary");
    const double euc = std::abs((sh.center - sv.center).squaredNorm() - sh.radius2 -
                                sv.radius2) /
                       (1.0 + (sh.center - sv.center).squaredNorm());
    rep.add("orthogonal_pair_euclidean_oracle", euc, 1e-6);
  } else if (pair.v_kind == LineKind::Circular && pair.h_kind == LineKind::Spherical &&
             n == 3) {
    Subspace x = meet(row_spans());
    rep.add_flag("sphere_spans_share_line", x.dim() == 1);
    DegeneracyReport a = classify_degeneracy(lift, Direction::A, 3);
    rep.add("lift_goursat_step3", a.goursat_residual, 1e-7);
    DegeneracyReport b = classify_degeneracy(lift, Direction::B, 2);
    rep.add("lift_b_goursat_step2", b.goursat_residual, 1e-7);
  } else if (pair.v_kind == LineKind::Linear && pair.h_kind == LineKind::Spherical &&
             n == 3) {
    std::vector<Vec> centers;
    for (int j = 0; j < cols; ++j) centers.push_back(row_rep(j).center);
    rep.add("sphere_centers_collinear", affine_fit_residual(centers, 2), 1e-6);
    Subspace x = meet(row_spans());
    rep.add_flag("sphere_spans_share_line", x.dim() == 1);
  } else if (pair.v_kind == LineKind::Circular && pair.h_kind == LineKind::Planar &&
             n == 3) {
    std::vector<Vec> normals;
    std::vector<double> offsets;
    for (int j = 0; j < cols; ++j) {
      auto [nrm, off] = fit_plane(true, j);
      normals.push_back(nrm);
      offsets.push_back(off);
    }
    Mat planes(cols, 4);
    for (int j = 0; j < cols; ++j) {
      planes.row(j).head(3) = normals[j].transpose();
      planes(j, 3) = -offsets[j];
    }
    Eigen::JacobiSVD<Mat> svd(planes, Eigen::ComputeFullV);
    rep.add("h_planes_concurrent", svd.singularValues()[3] / svd.singularValues()[0],
            1e-6);
    QuadricFit dual = fit_quadric(direction_points(normals));
    rep.add("h_plane_normals_on_dual_conic", dual.residual, 1e-6);
  } else if (pair.v_kind == LineKind::Planar && pair.h_kind == LineKind::Spherical &&
             n == 3) {
    std::vector<Vec> centers;
    for (int j = 0; j < cols; ++j) centers.push_back(row_rep(j).center);
    rep.add("sphere_centers_coplanar", affine_fit_residual(centers, 3), 1e-6);
    std::vector<HPoint> covectors;
    for (int i = 0; i < rows; ++i) {
      auto [nrm, off] = fit_plane(false, i);
      Vec cov(4);
      cov.head(3) = nrm;
      cov[3] = -off;
      covectors.push_back(HPoint(cov));
    }
    QuadricFit dual = fit_quadric(covectors);
    rep.add("v_planes_tangent_quadric_dual_fit", dual.residual, 1e-6);
  } else {
    throw GeometryError("verify_envelope: no checks implemented for pair " +
                        to_string(pair) + " in R^" + std::to_string(n));
  }
  return rep;
}

// --- one family spherical/planar ----------------------------------------------------

CircularNet spherical_row_net(int n, int m, int rows, int cols, Rng& rng,
                              bool planar) {
  MoebiusSpace space(n);
  if (m + 1 > n) throw GeometryError("spherical_row_net: m too large for the ambient");
  // Points needed to pin down a fresh (m+1)-dim i-line span; the north pole
  // replaces one generator for planar lines.
  const int span_pts = m + 2 - (planar ? 1 : 0);

  auto build = [&]() {
    std::vector<std::vector<HPoint>> grid(rows);
    // Column 0: a full i-line inside a fresh span.
    std::vector<HPoint> gens;
    gens.push_back(space.lift_point(rng.normal_vec(n)));
    for (int k = 1; k < span_pts; ++k)
      gens.push_back(random_chord_point(space.quadric(), gens.back(), rng));
    const Subspace h0 = constrained_span(space, gens, planar);
    if (h0.dim() != m + 1) throw GeometryError("span dim");
    std::vector<HPoint> col0 = gens;
    while (static_cast<int>(col0.size()) < rows)
      col0.push_back(random_chord_point(space.quadric(), col0.back(), rng, &h0));
    for (int i = 0; i < rows; ++i) grid[i].push_back(col0[i]);

    for (int c = 1; c < cols; ++c) {
      std::vector<HPoint> fresh;
      fresh.push_back(random_chord_point(space.quadric(), grid[0][c - 1], rng));
      for (int i = 1; i < rows; ++i) {
        const Subspace plane = Subspace::from_points(
            {grid[i - 1][c - 1], fresh[i - 1], grid[i][c - 1]});
        if (plane.dim() != 2) throw GeometryError("collinear");
        if (i < span_pts) {
          HPoint cand =
              random_chord_point(space.quadric(), grid[i - 1][c - 1], rng, &plane);
          if (HPoint::distance(cand, fresh[i - 1]) < 1e-4 ||
              HPoint::distance(cand, grid[i][c - 1]) < 1e-4)
            throw GeometryError("coincident");
          fresh.push_back(cand);
        } else {
          const Subspace h_new = constrained_span(space, fresh, planar);
          if (h_new.dim() != m + 1) throw GeometryError("fresh span dim");
          const Subspace line = meet(h_new, plane);
          if (line.dim() != 1) throw GeometryError("meet not line");
          SecondIntersection si =
              second_intersection(line, fresh[i - 1], space.quadric());
          if (si.tangent) throw GeometryError("tangency");
          fresh.push_back(si.point);
        }
      }
      if (constrained_span(space, fresh, planar).dim() != m + 1)
        throw GeometryError("fresh span dim");
      for (int i = 0; i < rows; ++i) grid[i].push_back(fresh[i]);
    }
    std::vector<HPoint> flat;
    for (const auto& r : grid)
      for (const auto& p : r) flat.push_back(p);
    return CircularNet::from_lift(space, QNet(rows, cols, n + 1, std::move(flat)));
  };

  for (int attempt = 0; attempt < 20; ++attempt) {
    try {
      return build();
    } catch (const GeometryError&) {
      continue;
    }
  }
  throw GeometryError("spherical_row_net: no generic net after 20 tries");
}

Report spherical_line_analysis(const CircularNet& net, int m, bool planar) {
  Report rep;
  const MoebiusSpace& space = net.space();
  const QNet& lift = net.lift();
  const int rows = lift.rows(), cols = lift.cols();
  for (int j = 0; j < cols; ++j) {
    const Subspace span = lift.row_span(j);
    if (span.dim() != m + 1)
      throw GeometryError("spherical_line_analysis: i-line span is not (m+1)-dim");
    if (planar && span.distance_to(space.north()) > 1e-7)
      throw GeometryError("spherical_line_analysis: planar line span misses north pole");
  }
  DegeneracyReport a = classify_degeneracy(lift, Direction::A, m + 1);
  rep.add("lift_goursat_step_m_plus_1", a.goursat_residual, 1e-7);
  DegeneracyReport b = classify_degeneracy(lift, Direction::B, m + 1);
  rep.add("lift_b_laplace_step_m_plus_1", b.laplace_residual, 1e-7);

  // The B-degenerate point lies in every osculating sphere span of its row;
  // its polar hypersphere is the common orthogonal one.
  const QNet lb = iterate_laplace(lift, Direction::B, m + 1).result;
  double membership = 0.0, infinity_defect = 0.0;
  for (int j = 0; j < lb.cols(); ++j) {
    const HPoint& witness = lb.at(0, j);
    if (j + m + 1 < cols) {
      for (int i = 0; i < rows; ++i) {
        std::vector<HPoint> osc;
        for (int dj = 0; dj <= m + 1; ++dj) osc.push_back(lift.at(i, j + dj));
        const Subspace span = Subspace::from_points(osc);
        membership = std::max(membership, span.distance_to(witness));
      }
    }
    infinity_defect = std::max(infinity_defect, std::abs(space.x0(witness.coords())));
  }
  rep.add("common_orthogonal_hypersphere_membership", membership, 1e-7);
  if (planar) rep.add("b_degenerate_points_at_infinity", infinity_defect, 1e-8);
  return rep;
}

}  // namespace dcnet
