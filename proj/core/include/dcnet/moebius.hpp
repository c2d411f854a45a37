#pragma once

#include <optional>
#include <string>
#include <vector>

#include "dcnet/inscribed.hpp"
#include "dcnet/qnet.hpp"
#include "dcnet/report.hpp"
#include "dcnet/rng.hpp"

namespace dcnet {

/// Conformal model of R^n ∪ {∞}: the quadric x_1^2+...+x_{n+1}^2 - x_{n+2}^2
/// inside RP^{n+1}. Coordinates are stored in the orthonormal basis; e_0 and
/// e_inf are the isotropic combinations of the last two basis vectors.
class MoebiusSpace {
 public:
  explicit MoebiusSpace(int n);

  int n() const { return n_; }
  int ambient() const { return n_ + 1; }  ///< projective dimension
  const Quadric& quadric() const { return q_; }

  Vec e0() const;
  Vec einf() const;
  HPoint north() const { return HPoint(einf()); }

  /// x_0 = x_{n+2} - x_{n+1} and x_inf = x_{n+2} + x_{n+1} components.
  double x0(const Vec& v) const { return v[n_ + 1] - v[n_]; }
  double xinf(const Vec& v) const { return v[n_ + 1] + v[n_]; }

  HPoint lift_point(const Vec& p) const;

  struct Projected {
    bool at_infinity = false;
    Vec point;      ///< Euclidean point when finite
    Vec direction;  ///< unit direction when at infinity
  };
  Projected project(const HPoint& m) const;

 private:
  int n_;
  Quadric q_;
};

struct SphereRep {
  enum class Kind { Point, Sphere, Plane, ImaginarySphere };
  Kind kind = Kind::Sphere;
  HPoint rep;
  Vec center;          ///< sphere/imaginary-sphere/point
  double radius2 = 0;  ///< negative for imaginary spheres
  Vec normal;          ///< plane
  double offset = 0;   ///< plane <v,x> = d
};

SphereRep classify_sphere_rep(const MoebiusSpace& space, const HPoint& rep);

/// Hypersphere (or hyperplane) through n+1 affinely independent points.
SphereRep sphere_through(const MoebiusSpace& space, const std::vector<Vec>& points);

/// Scaled smallest singular value of the four stacked lifts; ~0 iff concyclic.
double circularity_residual(const MoebiusSpace& space, const Vec& a, const Vec& b,
                            const Vec& c, const Vec& d);

/// Circular net: grid in R^n with concyclic quads, carried with its lift.
class CircularNet {
 public:
  CircularNet(MoebiusSpace space, int rows, int cols, std::vector<Vec> points);
  static CircularNet from_lift(const MoebiusSpace& space, const QNet& lift);

  const MoebiusSpace& space() const { return space_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  const Vec& point(int i, int j) const { return points_[i * cols_ + j]; }
  const std::vector<Vec>& points() const { return points_; }
  const QNet& lift() const { return lift_; }

  double circularity_residual() const;  ///< max over quads

 private:
  MoebiusSpace space_;
  int rows_, cols_;
  std::vector<Vec> points_;
  QNet lift_;
};

// --- constrained parameter lines (the incidence-theorem engine) -------------

enum class LineKind { Circular, Linear, Spherical, Planar };

std::string to_string(LineKind k);
LineKind line_kind_from_string(const std::string& s);

/// Lift-span dimension of a constrained parameter line.
int lift_span_dim(LineKind k);
/// Whether the lift span passes through the north pole (Euclidean flatness).
bool through_north(LineKind k);

/// v_kind constrains the j-parameter lines, h_kind the i-parameter lines.
struct ConstraintPair {
  LineKind v_kind;
  LineKind h_kind;
};

std::string to_string(const ConstraintPair& p);
ConstraintPair pair_from_string(const std::string& s);
std::vector<ConstraintPair> all_constraint_pairs();

/// Patch extents forced by the pair: i-count from the h constraint, j-count
/// from the v constraint.
int patch_rows(const ConstraintPair& p);
int patch_cols(const ConstraintPair& p);

/// Hypothesis-true incidence configuration with the last corner missing.
struct IncidencePatch {
  MoebiusSpace space;
  ConstraintPair pair;
  int rows = 0;
  int cols = 0;
  std::vector<HPoint> lifts;  ///< row-major; corner present only when completed
  bool completed = false;

  const HPoint& at(int i, int j) const;
  HPoint& at(int i, int j);
};

IncidencePatch make_incidence_patch(const MoebiusSpace& space, ConstraintPair pair,
                                    Rng& rng);

struct CornerCertificate {
  HPoint corner;
  double on_quadric = 0.0;       ///< |phi(corner, corner)|
  double in_v = 0.0;             ///< distance to the last j-line span
  double in_h = 0.0;             ///< distance to the last i-line span
  double final_quad = 0.0;       ///< planarity of the closing quad
  std::vector<double> six_circles;  ///< circular-circular: concurrency circles
};

/// Computes the missing corner as the triple meet of the closing quad plane
/// with the two final constraint spans, and certifies the incidence claims.
CornerCertificate complete_patch(IncidencePatch& patch);

/// Constrained circular net grown to the requested extents by repeated
/// application of the corner construction.
struct GrownNet {
  MoebiusSpace space;
  ConstraintPair pair;
  QNet lift;
  double max_on_quadric = 0.0;  ///< worst vertex incidence residual
};

GrownNet grow_net(const MoebiusSpace& space, ConstraintPair pair, int rows,
                  int cols, Rng& rng);

CircularNet to_circular(const GrownNet& net);

/// Structure verification for grown nets (envelopes, confocality,
/// parallelism, concurrency), dispatched on the constraint pair.
Report verify_envelope(const GrownNet& net);

/// One family of m-spherical (or m-planar) i-parameter lines: Laplace-
/// sequence behaviour of the lift plus the common orthogonal hyperspheres.
Report spherical_line_analysis(const CircularNet& net, int m, bool planar);

/// rows x cols circular net whose i-lines are m-spherical (or m-planar when
/// `planar`) and otherwise generic.
CircularNet spherical_row_net(int n, int m, int rows, int cols, Rng& rng,
                              bool planar = false);

/// Conic utilities shared with the cyclide module.
struct ConicFoci {
  Vec f1;
  Vec f2;
};
/// Real foci of a central conic in R^2 via principal-axis rotation.
ConicFoci conic_foci(const Quadric& conic);

/// Confocality test per the dual-pencil definition: the duals of the given
/// family together with the dual of the absolute at infinity span a pencil.
double confocal_residual(const std::vector<Quadric>& family_euclidean);

/// Adjugate (dual) of a symmetric form, unit-normalized.
Mat adjugate(const Mat& m);

}  // namespace dcnet
