#include "dcnet/inscribed.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>

namespace dcnet {

InscribedNet make_inscribed(QNet net, Quadric q, double tol) {
  if (net.ambient() != q.ambient())
    throw GeometryError("make_inscribed: ambient dimension mismatch");
  InscribedNet out{std::move(net), std::move(q)};
  double worst = 0.0;
  for (const auto& v : out.net.vertices())
    worst = std::max(worst, out.quadric.incidence_residual(v));
  out.incidence_residual = worst;
  if (worst > tol)
    throw GeometryError("make_inscribed: vertex off the quadric, residual " +
                        std::to_string(worst));
  double iso_i = 1e300, iso_j = 1e300;
  for (int i = 0; i < out.net.rows(); ++i)
    for (int j = 0; j < out.net.cols(); ++j) {
      if (i + 1 < out.net.rows())
        iso_i = std::min(iso_i, std::abs(out.quadric.eval(out.net.at(i, j),
                                                          out.net.at(i + 1, j))));
      if (j + 1 < out.net.cols())
        iso_j = std::min(iso_j, std::abs(out.quadric.eval(out.net.at(i, j),
                                                          out.net.at(i, j + 1))));
    }
  out.min_edge_isotropy_i = iso_i;
  out.min_edge_isotropy_j = iso_j;
  return out;
}

// --- random generation -------------------------------------------------------

Quadric random_quadric(int n, Rng& rng) {
  const int n1 = n + 1;
  Vec d(n1);
  bool has_pos = false, has_neg = false;
  for (int i = 0; i < n1; ++i) {
    const double mag = rng.uniform(0.5, 1.5);
    const bool neg = rng.uniform() < 0.5;
    d[i] = neg ? -mag : mag;
    has_pos |= !neg;
    has_neg |= neg;
  }
  if (!has_pos) d[0] = std::abs(d[0]);
  if (!has_neg) d[n1 - 1] = -std::abs(d[n1 - 1]);
  Mat g(n1, n1);
  for (int i = 0; i < n1; ++i) g.col(i) = rng.normal_vec(n1);
  Eigen::HouseholderQR<Mat> qr(g);
  Mat r = qr.householderQ();
  return Quadric(r * d.asDiagonal() * r.transpose());
}

HPoint random_point_on(const Quadric& q, Rng& rng) {
  Eigen::SelfAdjointEigenSolver<Mat> es(q.form());
  const Vec ev = es.eigenvalues();  // ascending
  const int n1 = static_cast<int>(ev.size());
  if (!(ev[0] < 0.0 && ev[n1 - 1] > 0.0))
    throw GeometryError("random_point_on: quadric has no real points");
  const Vec vn = es.eigenvectors().col(0);
  const Vec vp = es.eigenvectors().col(n1 - 1);
  HPoint p(Vec(std::sqrt(ev[n1 - 1]) * vn + std::sqrt(-ev[0]) * vp));
  for (int hop = 0; hop < 3; ++hop) p = random_chord_point(q, p, rng);
  return p;
}

HPoint random_chord_point(const Quadric& q, const HPoint& p, Rng& rng,
                          const Subspace* section) {
  for (int attempt = 0; attempt < 40; ++attempt) {
    Vec dir = rng.normal_vec(p.ambient() + 1);
    if (section) dir = section->projector() * dir;
    dir -= p.coords() * p.coords().dot(dir);
    const double dn = dir.norm();
    if (dn < 1e-8) continue;
    dir /= dn;
    Mat span(p.ambient() + 1, 2);
    span.col(0) = p.coords();
    span.col(1) = dir;
    try {
      SecondIntersection si = second_intersection(Subspace(span), p, q);
      if (si.tangent) continue;
      if (HPoint::distance(si.point, p) < 1e-4) continue;
      return si.point;
    } catch (const GeometryError&) {
      continue;
    }
  }
  throw GeometryError("random_chord_point: no generic chord after 40 tries");
}

namespace {

// Places the vertex closing the quad (i-1,j-1): in the quad plane and on q.
HPoint close_quad_on_quadric(const Quadric& q, const HPoint& p_diag,
                             const HPoint& p_left, const HPoint& p_down,
                             Rng& rng) {
  const Subspace plane = Subspace::from_points({p_diag, p_left, p_down});
  if (plane.dim() != 2)
    throw GeometryError("close_quad_on_quadric: collinear triple");
  for (int attempt = 0; attempt < 40; ++attempt) {
    HPoint cand = random_chord_point(q, p_diag, rng, &plane);
    if (HPoint::distance(cand, p_left) < 1e-4) continue;
    if (HPoint::distance(cand, p_down) < 1e-4) continue;
    return cand;
  }
  throw GeometryError("close_quad_on_quadric: no generic fourth vertex");
}

}  // namespace

InscribedNet random_inscribed_net(const Quadric& q, int rows, int cols, Rng& rng) {
  if (rows < 2 || cols < 2)
    throw GeometryError("random_inscribed_net: grid too small");
  std::vector<HPoint> pts;
  pts.reserve(rows * cols);
  const HPoint origin = random_point_on(q, rng);
  std::vector<std::vector<HPoint>> grid(rows);
  for (auto& r : grid) r.reserve(cols);
  grid[0].push_back(origin);
  for (int j = 1; j < cols; ++j)
    grid[0].push_back(random_chord_point(q, grid[0][j - 1], rng));
  for (int i = 1; i < rows; ++i) {
    grid[i].push_back(random_chord_point(q, grid[i - 1][0], rng));
    for (int j = 1; j < cols; ++j)
      grid[i].push_back(close_quad_on_quadric(q, grid[i - 1][j - 1],
                                              grid[i][j - 1], grid[i - 1][j], rng));
  }
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) pts.push_back(grid[i][j]);
  return make_inscribed(QNet(rows, cols, q.ambient(), std::move(pts)), q);
}

InscribedNet goursat_strip(const Quadric& q, int m, int rows, Rng& rng) {
  if (m < 2) throw GeometryError("goursat_strip: m must be >= 2 (lines on a quadric are isotropic)");
  if (rows < m + 1) throw GeometryError("goursat_strip: rows < m+1");
  InscribedNet seed = random_inscribed_net(q, m + 1, m + 1, rng);
  std::vector<Subspace> h;
  for (int j = 0; j <= m; ++j) {
    h.push_back(seed.net.row_span(j));
    if (h.back().dim() != m)
      throw GeometryError("goursat_strip: seed row span is not m-dimensional");
  }
  std::vector<std::vector<HPoint>> grid(rows, std::vector<HPoint>());
  for (int i = 0; i <= m; ++i)
    for (int j = 0; j <= m; ++j) grid[i].push_back(seed.net.at(i, j));
  for (int i = m + 1; i < rows; ++i) {
    grid[i].push_back(random_chord_point(q, grid[i - 1][0], rng, &h[0]));
    for (int j = 1; j <= m; ++j) {
      const Subspace plane =
          Subspace::from_points({grid[i - 1][j - 1], grid[i][j - 1], grid[i - 1][j]});
      const Subspace line = meet(h[j], plane);
      if (line.dim() != 1)
        throw GeometryError("goursat_strip: span-plane meet is not a line");
      SecondIntersection si = second_intersection(line, grid[i - 1][j], q);
      if (si.tangent) throw GeometryError("goursat_strip: tangency hit");
      grid[i].push_back(si.point);
    }
  }
  std::vector<HPoint> pts;
  pts.reserve(rows * (m + 1));
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j <= m; ++j) pts.push_back(grid[i][j]);
  return make_inscribed(QNet(rows, m + 1, q.ambient(), std::move(pts)), q);
}

InscribedNet laplace_focal_net(const Quadric& q, int rows, int cols, Rng& rng) {
  if (rows < 2 || cols < 2) throw GeometryError("laplace_focal_net: grid too small");
  const int n1 = q.ambient() + 1;
  std::vector<std::vector<HPoint>> grid(rows, std::vector<HPoint>());
  grid[0].push_back(random_point_on(q, rng));
  for (int j = 1; j < cols; ++j)
    grid[0].push_back(random_chord_point(q, grid[0][j - 1], rng));
  for (int i = 1; i < rows; ++i) {
    bool ok = false;
    for (int attempt = 0; attempt < 20 && !ok; ++attempt) {
      HPoint focus = HPoint(rng.normal_vec(n1));
      if (q.incidence_residual(focus) < 1e-3) continue;  // keep focus off q
      std::vector<HPoint> row;
      ok = true;
      for (int j = 0; j < cols; ++j) {
        Mat span(n1, 2);
        span.col(0) = grid[i - 1][j].coords();
        span.col(1) = focus.coords();
        try {
          SecondIntersection si = second_intersection(Subspace(span), grid[i - 1][j], q);
          if (si.tangent || HPoint::distance(si.point, grid[i - 1][j]) < 1e-4) {
            ok = false;
            break;
          }
          row.push_back(si.point);
        } catch (const GeometryError&) {
          ok = false;
          break;
        }
      }
      if (ok) grid[i] = std::move(row);
    }
    if (!ok) throw GeometryError("laplace_focal_net: no generic focal point");
  }
  std::vector<HPoint> pts;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) pts.push_back(grid[i][j]);
  return make_inscribed(QNet(rows, cols, q.ambient(), std::move(pts)), q);
}

// --- theorem checks ------------------------------------------------------------

Theorem11Result check_theorem_1_1(const QNet& net, const Quadric& q, double tol) {
  const int m = net.rows();
  if (net.cols() != m || m < 2)
    throw GeometryError("check_theorem_1_1: net must be m x m, m >= 2");
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == m - 1 && j == m - 1) continue;
      if (q.incidence_residual(net.at(i, j)) > tol)
        throw GeometryError("check_theorem_1_1: interior vertex off quadric");
    }
  Theorem11Result out;
  out.corner_residual = q.incidence_residual(net.at(m - 1, m - 1));
  out.corner_on_quadric = out.corner_residual < tol;
  const HPoint a = iterate_laplace(net, Direction::A, m - 1).result.at(0, 0);
  const HPoint b = iterate_laplace(net, Direction::B, m - 1).result.at(0, 0);
  ConjugacyResult c = conjugate(a, b, q, tol);
  out.conj_residual = c.residual;
  out.transforms_conjugate = c.conjugate;
  return out;
}

CornerMeets corollary_XY(const QNet& net) {
  const int m = net.rows();
  if (net.cols() != m || m < 2)
    throw GeometryError("corollary_XY: net must be m x m, m >= 2");
  std::vector<Subspace> hs, vs;
  for (int j = 0; j < m; ++j) {
    hs.push_back(net.row_span(j));
    if (hs.back().dim() != m - 1)
      throw GeometryError("corollary_XY: row span dimension is not m-1");
  }
  for (int i = 0; i < m; ++i) {
    vs.push_back(net.col_span(i));
    if (vs.back().dim() != m - 1)
      throw GeometryError("corollary_XY: column span dimension is not m-1");
  }
  const Subspace x = meet(hs);
  const Subspace y = meet(vs);
  if (x.dim() != 0 || y.dim() != 0)
    throw GeometryError("corollary_XY: meet is not a point (genericity failure)");
  CornerMeets out{HPoint(x.basis().col(0)), HPoint(y.basis().col(0)), 0.0, 0.0};
  out.x_vs_iterated = HPoint::distance(
      out.x, iterate_laplace(net, Direction::A, m - 1).result.at(0, 0));
  out.y_vs_iterated = HPoint::distance(
      out.y, iterate_laplace(net, Direction::B, m - 1).result.at(0, 0));
  return out;
}

// --- constrained extension -------------------------------------------------------

ConstrainedSeed make_constrainted_seed_impl(const Quadric& q, int d, int steps, Rng& rng) {
  ConstrainedSeed seed{random_inscribed_net(q, d + 1, d + 1, rng), {}, {}, d};
  const Subspace v0 = seed.patch.net.col_span(0);
  const Subspace h0 = seed.patch.net.row_span(0);
  if (v0.dim() != d || h0.dim() != d)
    throw GeometryError("make_constrained_seed: seed spans not d-dimensional");
  HPoint pc = seed.patch.net.at(0, d);
  HPoint pr = seed.patch.net.at(d, 0);
  for (int k = 0; k < steps; ++k) {
    pc = random_chord_point(q, pc, rng, &v0);
    pr = random_chord_point(q, pr, rng, &h0);
    seed.boundary_col.push_back(pc);
    seed.boundary_row.push_back(pr);
  }
  return seed;
}

ConstrainedSeed make_constrained_seed(const Quadric& q, int d, int steps, Rng& rng) {
  for (int attempt = 0; attempt < 10; ++attempt) {
    try {
      return make_constrainted_seed_impl(q, d, steps, rng);
    } catch (const GeometryError&) {
      continue;
    }
  }
  throw GeometryError("make_constrained_seed: no generic seed after 10 tries");
}

InscribedNet extend_constrained(const ConstrainedSeed& seed) {
  const QNet& net = seed.patch.net;
  const Quadric& q = seed.patch.quadric;
  const int s = net.rows();
  const int d = seed.d;
  if (net.cols() != s) throw GeometryError("extend_constrained: patch not square");
  if (seed.boundary_col.empty() || seed.boundary_row.empty())
    throw GeometryError("extend_constrained: boundary points exhausted");
  const double tol = Tolerances::global().residual;

  std::vector<Subspace> hs, vs;
  for (int j = 0; j < s; ++j) {
    hs.push_back(net.row_span(j));
    if (hs.back().dim() != d)
      throw GeometryError("extend_constrained: row span dim != d");
  }
  for (int i = 0; i < s; ++i) {
    vs.push_back(net.col_span(i));
    if (vs.back().dim() != d)
      throw GeometryError("extend_constrained: column span dim != d");
  }
  const MeetPoint x = meet_point(hs);
  const MeetPoint y = meet_point(vs);

  const HPoint& bc = seed.boundary_col.front();
  const HPoint& br = seed.boundary_row.front();
  if (q.incidence_residual(bc) > tol || vs[0].distance_to(bc) > 1e-7)
    throw GeometryError("extend_constrained: boundary column point not on q ∩ V_0");
  if (q.incidence_residual(br) > tol || hs[0].distance_to(br) > 1e-7)
    throw GeometryError("extend_constrained: boundary row point not on q ∩ H_0");

  std::vector<HPoint> newcol{bc}, newrow{br};
  for (int i = 1; i <= s - 2; ++i) {
    const Subspace plane = Subspace::from_points(
        {net.at(i - 1, s - 1), newcol[i - 1], net.at(i, s - 1)});
    const Subspace line = meet(vs[i], plane);
    if (line.dim() != 1)
      throw GeometryError("extend_constrained: V_i ∩ quad-plane is not a line");
    SecondIntersection si = second_intersection(line, net.at(i, s - 1), q);
    if (si.tangent) throw GeometryError("extend_constrained: tangency in column step");
    newcol.push_back(si.point);
  }
  for (int j = 1; j <= s - 2; ++j) {
    const Subspace plane = Subspace::from_points(
        {net.at(s - 1, j - 1), newrow[j - 1], net.at(s - 1, j)});
    const Subspace line = meet(hs[j], plane);
    if (line.dim() != 1)
      throw GeometryError("extend_constrained: H_j ∩ quad-plane is not a line");
    SecondIntersection si = second_intersection(line, net.at(s - 1, j), q);
    if (si.tangent) throw GeometryError("extend_constrained: tangency in row step");
    newrow.push_back(si.point);
  }

  std::vector<HPoint> hgen{x.point}, vgen{y.point};
  for (int i = 0; i < d && i < static_cast<int>(newcol.size()); ++i)
    hgen.push_back(newcol[i]);
  for (int j = 0; j < d && j < static_cast<int>(newrow.size()); ++j)
    vgen.push_back(newrow[j]);
  const Subspace h_new = Subspace::from_points(hgen);
  const Subspace v_new = Subspace::from_points(vgen);
  if (h_new.dim() != d || v_new.dim() != d)
    throw GeometryError("extend_constrained: new parameter-line space has wrong dim");

  {
    const Subspace plane = Subspace::from_points(
        {net.at(s - 2, s - 1), net.at(s - 1, s - 1), newcol[s - 2]});
    newcol.push_back(meet_point({h_new, vs[s - 1], plane}).point);
  }
  {
    const Subspace plane = Subspace::from_points(
        {net.at(s - 1, s - 2), net.at(s - 1, s - 1), newrow[s - 2]});
    newrow.push_back(meet_point({v_new, hs[s - 1], plane}).point);
  }
  const Subspace corner_plane =
      Subspace::from_points({net.at(s - 1, s - 1), newrow[s - 1], newcol[s - 1]});
  const HPoint corner = meet_point({v_new, h_new, corner_plane}).point;

  std::vector<HPoint> pts;
  pts.reserve((s + 1) * (s + 1));
  for (int i = 0; i < s; ++i) {
    for (int j = 0; j < s; ++j) pts.push_back(net.at(i, j));
    pts.push_back(newcol[i]);
  }
  for (int j = 0; j < s; ++j) pts.push_back(newrow[j]);
  pts.push_back(corner);
  return make_inscribed(QNet(s + 1, s + 1, q.ambient(), std::move(pts)), q);
}

ExtensionTrace extend_constrained_steps(ConstrainedSeed seed, int steps) {
  if (steps > static_cast<int>(seed.boundary_col.size()))
    throw GeometryError("extend_constrained_steps: not enough boundary points");
  auto meets = [](const QNet& n) {
    std::vector<Subspace> hs, vs;
    for (int j = 0; j < n.cols(); ++j) hs.push_back(n.row_span(j));
    for (int i = 0; i < n.rows(); ++i) vs.push_back(n.col_span(i));
    return std::pair<HPoint, HPoint>(meet_point(hs).point, meet_point(vs).point);
  };
  auto [x0, y0] = meets(seed.patch.net);
  ExtensionTrace trace{seed.patch, 0.0, 0.0, 0.0, {}, {}};
  for (int k = 0; k < steps; ++k) {
    trace.net = extend_constrained(seed);
    trace.max_new_vertex_residual =
        std::max(trace.max_new_vertex_residual, trace.net.incidence_residual);
    seed.patch = trace.net;
    seed.boundary_col.erase(seed.boundary_col.begin());
    seed.boundary_row.erase(seed.boundary_row.begin());
  }
  auto [x1, y1] = meets(trace.net.net);
  trace.x_drift = HPoint::distance(x0, x1);
  trace.y_drift = HPoint::distance(y0, y1);
  for (int j = 0; j < trace.net.net.cols(); ++j)
    trace.row_span_dims.push_back(trace.net.net.row_span(j).dim());
  for (int i = 0; i < trace.net.net.rows(); ++i)
    trace.col_span_dims.push_back(trace.net.net.col_span(i).dim());
  return trace;
}

// --- termination theorems ---------------------------------------------------------

TerminationReport check_goursat_implies_laplace(const InscribedNet& net, int m) {
  TerminationReport rep;
  rep.conclusion_step = m;
  if (net.min_edge_isotropy_i < 1e-6)
    throw GeometryError("check_goursat_implies_laplace: isotropic i-edge lines");
  DegeneracyReport hyp = classify_degeneracy(net.net, Direction::A, m);
  rep.hypothesis_met = hyp.goursat;
  rep.hypothesis_residual = hyp.goursat_residual;
  if (!rep.hypothesis_met)
    throw GeometryError("check_goursat_implies_laplace: A-sequence not Goursat degenerate at step m");
  DegeneracyReport con = classify_degeneracy(net.net, Direction::B, m);
  rep.conclusion_met = con.laplace;
  rep.conclusion_residual = con.laplace_residual;
  return rep;
}

TerminationReport check_laplace_implies_goursat(const InscribedNet& net, int m) {
  const int n = net.net.ambient();
  const int step = m + n - 1;
  TerminationReport rep;
  rep.conclusion_step = step;
  if (signature(net.quadric).r != 0)
    throw GeometryError("check_laplace_implies_goursat: quadric degenerate");
  if (net.net.cols() - step < 2 || net.net.rows() - step < 1)
    throw GeometryError("check_laplace_implies_goursat: grid too small; need at least " +
                        std::to_string(step + 2) + " columns and " +
                        std::to_string(step + 1) + " rows");
  DegeneracyReport hyp = classify_degeneracy(net.net, Direction::A, m);
  rep.hypothesis_met = hyp.laplace;
  rep.hypothesis_residual = hyp.laplace_residual;
  if (!rep.hypothesis_met)
    throw GeometryError("check_laplace_implies_goursat: A-sequence not Laplace degenerate at step m");
  DegeneracyReport con = classify_degeneracy(net.net, Direction::B, step);
  rep.conclusion_met = con.goursat;
  rep.conclusion_residual = con.goursat_residual;
  return rep;
}

// --- pencil structure ---------------------------------------------------------------

PencilStructure recover_pencil_structure(const InscribedNet& net) {
  const QNet& n = net.net;
  const int nn = n.ambient();
  if (nn % 2 != 0)
    throw GeometryError("recover_pencil_structure: ambient dimension must be 2m");
  const int m = nn / 2;
  std::vector<IsotropicConstraint> vcons, hcons;
  std::vector<Subspace> vspans, hspans;
  for (int i = 0; i < n.rows(); ++i) {
    Subspace s = n.col_span(i);
    if (s.dim() != m)
      throw GeometryError("recover_pencil_structure: column span dim != m");
    vspans.push_back(s);
    vcons.push_back({s});
  }
  for (int j = 0; j < n.cols(); ++j) {
    Subspace s = n.row_span(j);
    if (s.dim() != m)
      throw GeometryError("recover_pencil_structure: row span dim != m");
    hspans.push_back(s);
    hcons.push_back({s});
  }
  Quadric v = quadric_through({}, vcons);
  Quadric h = quadric_through({}, hcons);
  PencilStructure out{v, h, signature(v), signature(h), 0.0, -9, -9, -9, -9};

  const Eigen::Index sz = (nn + 1) * (nn + 1);
  Mat basis(sz, 2);
  basis.col(0) = Eigen::Map<const Vec>(v.form().data(), sz);
  basis.col(1) = Eigen::Map<const Vec>(h.form().data(), sz);
  const Vec target = Eigen::Map<const Vec>(net.quadric.form().data(), sz);
  const Vec coef = basis.colPivHouseholderQr().solve(target);
  out.pencil_residual = (basis * coef - target).norm();

  auto meet_dim = [](const Subspace& a, const Subspace& b) {
    try {
      return meet(a, b).dim();
    } catch (const GeometryError&) {
      return -1;
    }
  };
  if (n.rows() >= 2) out.dim_v_adjacent = meet_dim(vspans[0], vspans[1]);
  if (n.rows() >= 3) out.dim_v_skip = meet_dim(vspans[0], vspans[2]);
  if (n.cols() >= 2) out.dim_h_adjacent = meet_dim(hspans[0], hspans[1]);
  if (n.cols() >= 3) out.dim_h_skip = meet_dim(hspans[0], hspans[2]);
  return out;
}

// --- small degeneracy propositions -----------------------------------------------------

SmallDegeneracyReport check_small_degeneracy(const QNet& net) {
  SmallDegeneracyReport rep;
  int span_dim = 0;
  if (net.rows() == 3 && net.cols() == 3)
    span_dim = 2;
  else if (net.rows() == 4 && net.cols() == 4)
    span_dim = 3;
  else
    throw GeometryError("check_small_degeneracy: net must be 3x3 or 4x4");
  std::vector<Subspace> hs;
  for (int j = 0; j < net.cols(); ++j) {
    hs.push_back(net.row_span(j));
    if (hs.back().dim() != span_dim)
      throw GeometryError("check_small_degeneracy: row span has wrong dimension");
  }
  try {
    rep.meet_dim = meet(hs).dim();
  } catch (const GeometryError&) {
    rep.meet_dim = -1;
  }
  if (net.rows() == 3) {
    if (rep.meet_dim != 1)
      throw GeometryError("check_small_degeneracy: 3x3 hypothesis needs a common line");
    rep.expected_step = 1;
  } else {
    if (rep.meet_dim == 1)
      rep.expected_step = 2;
    else if (rep.meet_dim == 2)
      rep.expected_step = 1;
    else
      throw GeometryError("check_small_degeneracy: 4x4 hypothesis needs meet dim 1 or 2");
  }
  DegeneracyReport d = classify_degeneracy(net, Direction::A, rep.expected_step);
  rep.laplace_degenerate = d.laplace;
  rep.residual = d.laplace_residual;
  return rep;
}

namespace {

HPoint random_point_in(const Subspace& s, Rng& rng) {
  for (int attempt = 0; attempt < 20; ++attempt) {
    Vec v = s.basis() * rng.normal_vec(static_cast<int>(s.basis().cols()));
    if (v.norm() > 1e-8) return HPoint(v);
  }
  throw GeometryError("random_point_in: degenerate sample");
}

QNet fill_net_in_hyperplane_family(const std::vector<Subspace>& h, int rows, Rng& rng) {
  const int ambient = h[0].ambient();
  const int cols = static_cast<int>(h.size());
  std::vector<std::vector<HPoint>> grid(rows);
  // first column free inside h[0]
  for (int i = 0; i < rows; ++i) {
    for (int attempt = 0;; ++attempt) {
      HPoint cand = random_point_in(h[0], rng);
      bool ok = true;
      for (int k = 0; k < i; ++k)
        if (HPoint::distance(cand, grid[k][0]) < 1e-3) ok = false;
      if (ok) {
        grid[i].push_back(cand);
        break;
      }
      if (attempt > 20) throw GeometryError("fill_net: coincident sample");
    }
  }
  for (int j = 1; j < cols; ++j) {
    grid[0].push_back(random_point_in(h[j], rng));
    for (int i = 1; i < rows; ++i) {
      const Subspace plane = Subspace::from_points(
          {grid[i - 1][j - 1], grid[i][j - 1], grid[i - 1][j]});
      if (plane.dim() != 2) throw GeometryError("fill_net: collinear triple");
      const Subspace line = meet(h[j], plane);
      if (line.dim() != 1) throw GeometryError("fill_net: meet is not a line");
      for (int attempt = 0;; ++attempt) {
        HPoint cand = random_point_in(line, rng);
        if (HPoint::distance(cand, grid[i - 1][j]) > 1e-3 &&
            plane.distance_to(cand) < 1e-9) {
          grid[i].push_back(cand);
          break;
        }
        if (attempt > 20) throw GeometryError("fill_net: degenerate line sample");
      }
    }
  }
  std::vector<HPoint> pts;
  for (int i = 0; i < rows; ++i)
    for (int j = 0; j < cols; ++j) pts.push_back(grid[i][j]);
  return QNet(rows, cols, ambient, std::move(pts));
}

}  // namespace

QNet small_degeneracy_net_3x3(Rng& rng) {
  // Three 2-planes in RP^3 through a common line.
  for (int attempt = 0; attempt < 10; ++attempt) {
    try {
      Mat l(4, 2);
      l.col(0) = rng.normal_vec(4);
      l.col(1) = rng.normal_vec(4);
      const Subspace common(l);
      if (common.dim() != 1) continue;
      std::vector<Subspace> h;
      for (int j = 0; j < 3; ++j) {
        Mat s(4, 3);
        s.leftCols(2) = common.basis();
        s.col(2) = rng.normal_vec(4);
        h.emplace_back(s);
        if (h.back().dim() != 2) throw GeometryError("degenerate plane");
      }
      return fill_net_in_hyperplane_family(h, 3, rng);
    } catch (const GeometryError&) {
      continue;
    }
  }
  throw GeometryError("small_degeneracy_net_3x3: no generic configuration");
}

QNet small_degeneracy_net_4x4(int common_dim, Rng& rng) {
  if (common_dim != 1 && common_dim != 2)
    throw GeometryError("small_degeneracy_net_4x4: common_dim must be 1 or 2");
  for (int attempt = 0; attempt < 10; ++attempt) {
    try {
      Mat w(5, common_dim + 1);
      for (int c = 0; c <= common_dim; ++c) w.col(c) = rng.normal_vec(5);
      const Subspace common(w);
      if (common.dim() != common_dim) continue;
      std::vector<Subspace> h;
      for (int j = 0; j < 4; ++j) {
        Mat s(5, 4);
        s.leftCols(common_dim + 1) = common.basis();
        for (int c = common_dim + 1; c < 4; ++c) s.col(c) = rng.normal_vec(5);
        h.emplace_back(s);
        if (h.back().dim() != 3) throw GeometryError("degenerate hyperplane");
      }
      return fill_net_in_hyperplane_family(h, 4, rng);
    } catch (const GeometryError&) {
      continue;
    }
  }
  throw GeometryError("small_degeneracy_net_4x4: no generic configuration");
}

}  // namespace dcnet
