#include "dcnet/projective.hpp"

#include <Eigen/Eigenvalues>
#include <algorithm>
#include <cmath>
#include <complex>

namespace dcnet {

Tolerances& Tolerances::global() {
  static Tolerances t;
  return t;
}

// --- HPoint ----------------------------------------------------------------

HPoint::HPoint(Vec v) : v_(std::move(v)) {
  const double n = v_.norm();
  if (!(n > 0.0) || !v_.allFinite())
    throw GeometryError("HPoint: zero or non-finite coordinate vector");
  v_ /= n;
  for (Eigen::Index i = 0; i < v_.size(); ++i) {
    if (std::abs(v_[i]) > 1e-12) {
      if (v_[i] < 0.0) v_ = -v_;
      break;
    }
  }
}

HPoint HPoint::from_list(std::initializer_list<double> v) {
  Vec x(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double d : v) x[i++] = d;
  return HPoint(x);
}

double HPoint::distance(const HPoint& a, const HPoint& b) {
  return std::min((a.v_ - b.v_).norm(), (a.v_ + b.v_).norm());
}

// --- Subspace ---------------------------------------------------------------

namespace {

// Deterministic sign fix: largest-|entry| of each basis column positive.
void fix_column_signs(Mat& b) {
  for (Eigen::Index c = 0; c < b.cols(); ++c) {
    Eigen::Index imax = 0;
    b.col(c).cwiseAbs().maxCoeff(&imax);
    if (b(imax, c) < 0.0) b.col(c) = -b.col(c);
  }
}

}  // namespace

Subspace::Subspace(const Mat& span) {
  if (span.cols() == 0) throw GeometryError("Subspace: empty span");
  Eigen::JacobiSVD<Mat> svd(span, Eigen::ComputeFullU);
  const double smax = svd.singularValues().size() ? svd.singularValues()[0] : 0.0;
  if (!(smax > 0.0)) throw GeometryError("Subspace: zero span");
  const double cut = Tolerances::global().rank_rel * smax;
  int rank = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > cut) ++rank;
  basis_ = svd.matrixU().leftCols(rank);
  fix_column_signs(basis_);
}

Subspace Subspace::from_points(const std::vector<HPoint>& pts) {
  if (pts.empty()) throw GeometryError("Subspace: no points");
  Mat m(pts[0].coords().size(), static_cast<Eigen::Index>(pts.size()));
  for (size_t i = 0; i < pts.size(); ++i) m.col(static_cast<Eigen::Index>(i)) = pts[i].coords();
  return Subspace(m);
}

double Subspace::distance_to(const HPoint& p) const {
  return (p.coords() - basis_ * (basis_.transpose() * p.coords())).norm();
}

bool Subspace::contains(const HPoint& p, double tol) const {
  return distance_to(p) < tol;
}

double Subspace::distance(const Subspace& a, const Subspace& b) {
  return (a.projector() - b.projector()).norm();
}

// --- Quadric ----------------------------------------------------------------

Quadric::Quadric(Mat form) : form_(std::move(form)) {
  if (form_.rows() != form_.cols() || form_.rows() < 2)
    throw GeometryError("Quadric: form must be square, size >= 2");
  form_ = ((form_ + form_.transpose()) / 2.0).eval();
  const double fn = form_.norm();
  if (!(fn > 0.0) || !form_.allFinite())
    throw GeometryError("Quadric: zero or non-finite form");
  form_ /= fn;
  // Sign: largest-magnitude diagonal entry positive (first index on ties);
  // fall back to the largest-magnitude entry when the diagonal vanishes.
  const double max_abs = form_.cwiseAbs().maxCoeff();
  Eigen::Index pick = -1;
  double best = 0.0;
  for (Eigen::Index i = 0; i < form_.rows(); ++i) {
    const double m = std::abs(form_(i, i));
    if (m > best * (1.0 + 1e-14)) {
      best = m;
      pick = i;
    }
  }
  double ref = 0.0;
  if (pick >= 0 && best > 1e-12 * max_abs) {
    ref = form_(pick, pick);
  } else {
    for (Eigen::Index i = 0; i < form_.rows() && ref == 0.0; ++i)
      for (Eigen::Index j = 0; j < form_.cols() && ref == 0.0; ++j)
        if (std::abs(form_(i, j)) > 1e-12 * max_abs) ref = form_(i, j);
  }
  if (ref < 0.0) form_ = -form_;
}

Quadric Quadric::diagonal(std::initializer_list<double> d) {
  Vec diag(static_cast<Eigen::Index>(d.size()));
  Eigen::Index i = 0;
  for (double x : d) diag[i++] = x;
  return Quadric(Mat(diag.asDiagonal()));
}

Pencil::Pencil(Quadric a_, Quadric b_) : a(std::move(a_)), b(std::move(b_)) {
  if (a.ambient() != b.ambient())
    throw GeometryError("Pencil: ambient dimension mismatch");
  const double d = std::min((a.form() - b.form()).norm(), (a.form() + b.form()).norm());
  if (d < 1e-9) throw GeometryError("Pencil: proportional quadrics");
}

Quadric Pencil::member(double lambda, double mu) const {
  return Quadric(lambda * a.form() + mu * b.form());
}

// --- rank helpers -----------------------------------------------------------

int numeric_rank(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  if (svd.singularValues().size() == 0) return 0;
  const double cut = Tolerances::global().rank_rel * svd.singularValues()[0];
  int r = 0;
  for (Eigen::Index i = 0; i < svd.singularValues().size(); ++i)
    if (svd.singularValues()[i] > cut) ++r;
  return r;
}

double rank_deficiency_residual(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || !(s[0] > 0.0)) return 0.0;
  return s[s.size() - 1] / s[0];
}

Mat nullspace(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  const double smax = s.size() ? s[0] : 0.0;
  const double cut = Tolerances::global().rank_rel * std::max(smax, 1e-300);
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i)
    if (s[i] > cut) ++rank;
  return svd.matrixV().rightCols(m.cols() - rank);
}

// --- join / meet ------------------------------------------------------------

Subspace join(const std::vector<Subspace>& spaces) {
  if (spaces.empty()) throw GeometryError("join: no subspaces");
  const int n = spaces[0].ambient();
  Eigen::Index cols = 0;
  for (const auto& s : spaces) {
    if (s.ambient() != n) throw GeometryError("join: ambient dimension mismatch");
    cols += s.basis().cols();
  }
  Mat stacked(n + 1, cols);
  Eigen::Index at = 0;
  for (const auto& s : spaces) {
    stacked.middleCols(at, s.basis().cols()) = s.basis();
    at += s.basis().cols();
  }
  return Subspace(stacked);
}

Subspace join(const Subspace& a, const Subspace& b) { return join(std::vector<Subspace>{a, b}); }

Subspace complement(const Subspace& s) {
  Eigen::JacobiSVD<Mat> svd(s.basis(), Eigen::ComputeFullU);
  const Eigen::Index k = s.basis().cols();
  if (svd.matrixU().cols() == k)
    throw GeometryError("complement: subspace is the whole space");
  Mat c = svd.matrixU().rightCols(svd.matrixU().cols() - k);
  return Subspace(c);
}

Subspace meet(const std::vector<Subspace>& spaces) {
  if (spaces.empty()) throw GeometryError("meet: no subspaces");
  if (spaces.size() == 1) return spaces[0];
  const int n = spaces[0].ambient();
  std::vector<Subspace> comps;
  comps.reserve(spaces.size());
  for (const auto& s : spaces) {
    if (s.ambient() != n) throw GeometryError("meet: ambient dimension mismatch");
    if (s.dim() == n) continue;  // whole space contributes nothing
    comps.push_back(complement(s));
  }
  if (comps.empty()) return spaces[0];
  const Subspace j = join(comps);
  if (j.dim() == n) throw GeometryError("empty meet");
  return complement(j);
}

Subspace meet(const Subspace& a, const Subspace& b) { return meet(std::vector<Subspace>{a, b}); }

// --- conjugacy / polarity ----------------------------------------------------

ConjugacyResult conjugate(const HPoint& a, const HPoint& b, const Quadric& q, double tol) {
  if (a.ambient() != b.ambient() || a.ambient() != q.ambient())
    throw GeometryError("conjugate: ambient dimension mismatch");
  const double r = std::abs(q.eval(a, b));
  return {r, r < tol};
}

Subspace polar(const Subspace& s, const Quadric& q) {
  if (s.ambient() != q.ambient())
    throw GeometryError("polar: ambient dimension mismatch");
  Mat w = q.form() * s.basis();
  if (numeric_rank(w) < w.cols())
    throw GeometryError("polar undefined: subspace meets the singular locus");
  Mat nt = nullspace(w.transpose());
  if (nt.cols() == 0) throw GeometryError("polar undefined: empty polar");
  return Subspace(nt);
}

Subspace polar(const HPoint& p, const Quadric& q) {
  return polar(Subspace(Mat(p.coords())), q);
}

HPoint polar_point(const Subspace& hyperplane, const Quadric& q) {
  const Subspace pol = polar(hyperplane, q);
  if (pol.dim() != 0)
    throw GeometryError("polar_point: polar is not a point");
  return HPoint(pol.basis().col(0));
}

Restriction restrict(const Quadric& q, const Subspace& s) {
  if (s.ambient() != q.ambient())
    throw GeometryError("restrict: ambient dimension mismatch");
  if (s.dim() < 1) throw GeometryError("restrict: subspace must have dim >= 1");
  Mat r = s.basis().transpose() * q.form() * s.basis();
  r = ((r + r.transpose()) / 2.0).eval();
  Restriction out;
  out.residual = r.cwiseAbs().maxCoeff();
  if (out.residual < Tolerances::global().rank_rel) {
    out.isotropic = true;
    out.sig = Signature{0, 0, static_cast<int>(r.rows())};
    return out;
  }
  out.form = Quadric(r);
  out.sig = signature(*out.form);
  return out;
}

Signature signature_of(const Mat& symmetric) {
  Eigen::SelfAdjointEigenSolver<Mat> es(((symmetric + symmetric.transpose()) / 2.0).eval());
  const Vec ev = es.eigenvalues();
  const double emax = ev.cwiseAbs().maxCoeff();
  const double cut = Tolerances::global().rank_rel * std::max(emax, 1e-300);
  Signature s;
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev[i] > cut)
      ++s.p;
    else if (ev[i] < -cut)
      ++s.q;
    else
      ++s.r;
  }
  return s;
}

Signature signature(const Quadric& q) { return signature_of(q.form()); }

// --- second intersection ------------------------------------------------------

SecondIntersection second_intersection(const Subspace& line, const HPoint& p, const Quadric& q) {
  if (line.dim() != 1) throw GeometryError("second_intersection: not a line");
  const double tol = Tolerances::global().residual;
  if (!line.contains(p, 1e-7))
    throw GeometryError("second_intersection: point not on line");
  if (q.incidence_residual(p) > tol)
    throw GeometryError("second_intersection: point not on quadric");
  // Direction within the line orthogonal to p: pick the basis column with the
  // larger component orthogonal to p (deterministic).
  const Vec a = p.coords();
  Vec b0 = line.basis().col(0) - a * a.dot(line.basis().col(0));
  Vec b1 = line.basis().col(1) - a * a.dot(line.basis().col(1));
  Vec b = (b0.norm() >= b1.norm()) ? b0 : b1;
  const double bn = b.norm();
  if (bn < 1e-10)
    throw GeometryError("second_intersection: degenerate line basis");
  b /= bn;
  const double qab = q.eval(a, b);
  const double qbb = q.eval(b, b);
  // phi(s*a + t*b) = 2*s*t*phi(a,b) + t^2*phi(b,b); roots [1:0] and
  // [phi(b,b) : -2*phi(a,b)].
  const double scale = std::max(std::abs(qab), std::abs(qbb));
  if (scale < Tolerances::global().rank_rel)
    throw GeometryError("second_intersection: isotropic line");
  if (std::abs(qab) < Tolerances::global().rank_rel * std::abs(qbb)) {
    return {p, true};  // tangent: double root at p
  }
  Vec second = qbb * a - 2.0 * qab * b;
  return {HPoint(second), false};
}

// --- degenerate pencil members -------------------------------------------------

namespace {

// det(t*A + (1-t)*B) sampled at Chebyshev nodes, interpolated in the monomial
// basis. Degree deficiency corresponds to roots at [1:-1].
Vec interpolate_det_poly(const Mat& A, const Mat& B) {
  const Eigen::Index n1 = A.rows();
  const int deg = static_cast<int>(n1);   // degree <= n+1
  const int npts = deg + 1;
  Vec ts(npts), vals(npts);
  for (int k = 0; k < npts; ++k) {
    ts[k] = std::cos(M_PI * (k + 0.5) / npts);  // Chebyshev nodes on [-1,1]
    Mat m = ts[k] * A + (1.0 - ts[k]) * B;
    vals[k] = m.determinant();
  }
  Mat vander(npts, npts);
  for (int r = 0; r < npts; ++r)
    for (int c = 0; c < npts; ++c) vander(r, c) = std::pow(ts[r], c);
  return vander.colPivHouseholderQr().solve(vals);
}

std::vector<std::complex<double>> companion_roots(const Vec& coeffs, int deg) {
  // coeffs[0..deg], coeffs[deg] != 0
  std::vector<std::complex<double>> roots;
  if (deg <= 0) return roots;
  Mat comp = Mat::Zero(deg, deg);
  for (int i = 0; i < deg; ++i) comp(i, deg - 1) = -coeffs[i] / coeffs[deg];
  for (int i = 1; i < deg; ++i) comp(i, i - 1) = 1.0;
  Eigen::EigenSolver<Mat> es(comp);
  for (Eigen::Index i = 0; i < es.eigenvalues().size(); ++i)
    roots.push_back(es.eigenvalues()[i]);
  return roots;
}

double smallest_singular_value(const Mat& m) {
  Eigen::JacobiSVD<Mat> svd(m);
  return svd.singularValues()[svd.singularValues().size() - 1];
}

}  // namespace

PencilDegeneration degenerate_members(const Pencil& p) {
  const Mat& A = p.a.form();
  const Mat& B = p.b.form();
  const int n1 = static_cast<int>(A.rows());
  Vec c = interpolate_det_poly(A, B);
  const double cmax = c.cwiseAbs().maxCoeff();

  PencilDegeneration out;
  if (cmax < 1e-12) {
    out.everywhere_degenerate = true;
    return out;
  }

  int deg = n1;
  const double lead_cut = 1e-9 * cmax;
  while (deg > 0 && std::abs(c[deg]) < lead_cut) --deg;

  struct Root {
    double lambda, mu;
    int mult;
  };
  std::vector<Root> roots;
  // Degree deficiency: root where the coefficient of t^[full degree] dies,
  // i.e. lambda + mu = 0.
  if (deg < n1) roots.push_back({1.0, -1.0, n1 - deg});

  auto croots = companion_roots(c, deg);
  std::vector<double> real_ts;
  for (const auto& z : croots) {
    if (std::abs(z.imag()) < 1e-7 * std::max(1.0, std::abs(z.real())))
      real_ts.push_back(z.real());
  }
  std::sort(real_ts.begin(), real_ts.end());
  for (size_t i = 0; i < real_ts.size();) {
    size_t k = i + 1;
    const double clus = 1e-6 * std::max(1.0, std::abs(real_ts[i]));
    double sum = real_ts[i];
    while (k < real_ts.size() && std::abs(real_ts[k] - real_ts[i]) < clus) {
      sum += real_ts[k];
      ++k;
    }
    const double t = sum / static_cast<double>(k - i);
    roots.push_back({t, 1.0 - t, static_cast<int>(k - i)});
    i = k;
  }

  for (auto& r : roots) {
    // Refine on the unit parameter circle by minimizing the smallest
    // singular value of lambda*A + mu*B (ternary search).
    double theta = std::atan2(r.mu, r.lambda);
    double lo = theta - 1e-4, hi = theta + 1e-4;
    auto sv = [&](double th) {
      return smallest_singular_value(std::cos(th) * A + std::sin(th) * B);
    };
    for (int it = 0; it < 80; ++it) {
      const double m1 = lo + (hi - lo) / 3.0, m2 = hi - (hi - lo) / 3.0;
      if (sv(m1) < sv(m2))
        hi = m2;
      else
        lo = m1;
    }
    theta = (lo + hi) / 2.0;
    double lam = std::cos(theta), mu = std::sin(theta);
    if (lam < 0 || (lam == 0 && mu < 0)) {
      lam = -lam;
      mu = -mu;
    }
    Mat m = lam * A + mu * B;
    PencilMember pm{lam, mu, Quadric(m), signature_of(m), r.mult, 0.0};
    pm.det_residual = std::abs(m.determinant());
    out.members.push_back(std::move(pm));
  }
  std::sort(out.members.begin(), out.members.end(),
            [](const PencilMember& x, const PencilMember& y) {
              return std::atan2(x.mu, x.lambda) < std::atan2(y.mu, y.lambda);
            });
  return out;
}

MeetPoint meet_point(const std::vector<Subspace>& spaces) {
  if (spaces.empty()) throw GeometryError("meet_point: no subspaces");
  const int n1 = spaces[0].ambient() + 1;
  Mat stacked(static_cast<Eigen::Index>(spaces.size()) * n1, n1);
  for (size_t k = 0; k < spaces.size(); ++k) {
    if (spaces[k].ambient() + 1 != n1)
      throw GeometryError("meet_point: ambient dimension mismatch");
    stacked.middleRows(static_cast<Eigen::Index>(k) * n1, n1) =
        Mat::Identity(n1, n1) - spaces[k].projector();
  }
  Eigen::JacobiSVD<Mat> svd(stacked, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  MeetPoint out{HPoint(svd.matrixV().col(n1 - 1)), 0.0};
  // residual: how close the *second* smallest singular value is to zero
  // (if it is also tiny the meet is higher-dimensional, not a point).
  out.residual = s[n1 - 1] / std::max(s[0], 1e-300);
  if (s[n1 - 2] / std::max(s[0], 1e-300) < 1e-8)
    throw GeometryError("meet_point: intersection is not zero-dimensional");
  return out;
}

// --- quadric through constraints ------------------------------------------------

namespace {

Eigen::Index sym_coeff_count(int n1) { return static_cast<Eigen::Index>(n1) * (n1 + 1) / 2; }

// Row of the linear system for phi(x,y) = 0 over upper-triangle coefficients.
Vec constraint_row(const Vec& x, const Vec& y) {
  const int n1 = static_cast<int>(x.size());
  Vec row(sym_coeff_count(n1));
  Eigen::Index at = 0;
  for (int i = 0; i < n1; ++i)
    for (int j = i; j < n1; ++j)
      row[at++] = (i == j) ? x[i] * y[i] : x[i] * y[j] + x[j] * y[i];
  return row;
}

Mat coeffs_to_form(const Vec& c, int n1) {
  Mat f(n1, n1);
  Eigen::Index at = 0;
  for (int i = 0; i < n1; ++i)
    for (int j = i; j < n1; ++j) {
      f(i, j) = c[at];
      f(j, i) = c[at];
      ++at;
    }
  return f;
}

Mat build_constraint_matrix(const std::vector<HPoint>& points,
                            const std::vector<IsotropicConstraint>& constraints,
                            int* n1_out) {
  int n1 = -1;
  if (!points.empty()) n1 = static_cast<int>(points[0].coords().size());
  if (n1 < 0 && !constraints.empty())
    n1 = static_cast<int>(constraints[0].subspace.basis().rows());
  if (n1 < 0) throw GeometryError("quadric_through: no constraints");
  std::vector<Vec> rows;
  for (const auto& p : points) rows.push_back(constraint_row(p.coords(), p.coords()));
  for (const auto& c : constraints) {
    const Mat& b = c.subspace.basis();
    for (Eigen::Index i = 0; i < b.cols(); ++i)
      for (Eigen::Index j = i; j < b.cols(); ++j)
        rows.push_back(constraint_row(b.col(i), b.col(j)));
  }
  Mat m(static_cast<Eigen::Index>(rows.size()), sym_coeff_count(n1));
  for (size_t i = 0; i < rows.size(); ++i) m.row(static_cast<Eigen::Index>(i)) = rows[i];
  *n1_out = n1;
  return m;
}

}  // namespace

Quadric quadric_through(const std::vector<HPoint>& points,
                        const std::vector<IsotropicConstraint>& constraints) {
  int n1 = 0;
  Mat m = build_constraint_matrix(points, constraints, &n1);
  Mat ns = nullspace(m);
  if (ns.cols() == 0) throw GeometryError("quadric_through: over-constrained");
  if (ns.cols() > 1)
    throw GeometryError("quadric_through: under-determined (" +
                        std::to_string(ns.cols()) + "-dimensional solution space)");
  return Quadric(coeffs_to_form(ns.col(0), n1));
}

QuadricFit fit_quadric(const std::vector<HPoint>& points,
                       const std::vector<IsotropicConstraint>& constraints) {
  int n1 = 0;
  Mat m = build_constraint_matrix(points, constraints, &n1);
  Eigen::JacobiSVD<Mat> svd(m, Eigen::ComputeFullV);
  const auto& s = svd.singularValues();
  Vec c = svd.matrixV().col(svd.matrixV().cols() - 1);
  double resid = 0.0;
  if (s.size() >= static_cast<Eigen::Index>(svd.matrixV().cols())) {
    resid = s[svd.matrixV().cols() - 1] / std::max(s[0], 1e-300);
  }
  return {Quadric(coeffs_to_form(c, n1)), resid};
}

}  // namespace dcnet
