#pragma once

#include <optional>
#include <string>
#include <vector>

#include "perdeg/degree.hpp"
#include "perdeg/linearized.hpp"

namespace perdeg {

struct Thresholds {
  double tol_eq = 1e-7;     // "= 0" conditions pass when the defect is at most this
  double floor_neq = 1e-4;  // "!= 0" conditions pass when the gap is at least this
};

/// Per boundary sample raw values, extrema taken over the s-grid.
struct BoundarySample {
  int curve = 0;
  double theta = 0.0;
  Point2 xi = Point2::Zero();
  double a1_defect = 0.0;       // |Omega(T,0,xi) - xi|
  double eta1_gap_max = 0.0;    // max_s |eta1(T,s,xi) - eta1(0,s,xi)|
  double eta1_gap_min = 0.0;    // min_s of the same
  double eta2_gap_min = 0.0;    // min_s |eta2(T,s,xi) - eta2(0,s,xi)|
  bool s_collapsed = false;     // Y(T) = I detected: gaps are s-independent
};

/// Boundary hypotheses evaluated on a (boundary sample) x (s-grid) product.
///  A1: Omega(T,0,xi) = xi                       a1_max_defect <= tol_eq
///  A2: eta1 gap = 0                             a2_max_gap <= tol_eq
///  A3: eta2 gap != 0                            a3_min_gap >= floor_neq
///  A4: eta1 gap != 0                            a4_min_gap >= floor_neq
struct ConditionReport {
  double period = 0.0;
  double a1_max_defect = 0.0;
  double a2_max_gap = 0.0;
  double a3_min_gap = 0.0;
  double a4_min_gap = 0.0;
  int s_grid_size = 0;
  int boundary_samples = 0;
  int collapsed_samples = 0;
  Thresholds thresholds;
  std::vector<BoundarySample> samples;

  [[nodiscard]] bool pass_a1() const { return a1_max_defect <= thresholds.tol_eq; }
  [[nodiscard]] bool pass_a2() const { return a2_max_gap <= thresholds.tol_eq; }
  [[nodiscard]] bool pass_a3() const { return a3_min_gap >= thresholds.floor_neq; }
  [[nodiscard]] bool pass_a4() const { return a4_min_gap >= thresholds.floor_neq; }
};

struct ConditionOptions {
  int s_grid_size = 16;
  Thresholds thresholds;
  bool allow_s_collapse = true;
};

/// s-grid: s_k = k T / (size - 1), k = 0..size-1.
[[nodiscard]] std::vector<double> anchor_grid(double period, int size);

/// Exhaustive evaluation on every boundary curve of `region` at its base
/// sample count. Requires >= 64 samples per curve and s_grid_size >= 8.
[[nodiscard]] ConditionReport check_conditions(const PerturbedSystem& sys, const PlanarRegion& region,
                                               const ConditionOptions& options = {});

enum class TheoremId { T1, T2, T3, T4 };
[[nodiscard]] std::string to_string(TheoremId id);
[[nodiscard]] TheoremId theorem_from_string(const std::string& s);

struct LabeledReport {
  std::string label;  // e.g. "boundary U", "boundary U0", "boundary U_delta"
  std::vector<std::string> required;  // condition names checked on this boundary
  ConditionReport report;
};

struct LabeledDegree {
  std::string label;  // e.g. "deg(eta2(T,0,.), U0)"
  DegreeResult result;
};

struct Certificate {
  TheoremId theorem = TheoremId::T1;
  double period = 0.0;
  PlanarRegion region;                    // U, or U_delta for T3/T4
  std::optional<PlanarRegion> inner;      // U0 for T3/T4
  double delta = 0.0;
  double mu = 0.0;
  std::vector<LabeledReport> reports;
  std::vector<LabeledDegree> degrees;
  int predicted_degree = 0;               // degree, or the degree difference for T3/T4
  bool valid = false;
  std::vector<std::string> failures;      // failing conditions, e.g. "A3 on boundary U0"
};

class ConditionsFailed : public Error {
 public:
  explicit ConditionsFailed(Certificate cert);
  [[nodiscard]] const Certificate& certificate() const { return cert_; }

 private:
  Certificate cert_;
};

struct CertificateOptions {
  ConditionOptions conditions;
};

/// Assessment never throws on failing hypotheses: the certificate comes back
/// with valid = false and the failures listed. The *_certificate wrappers
/// throw ConditionsFailed instead.
[[nodiscard]] Certificate assess_theorem1(const PerturbedSystem& sys, const PlanarRegion& region,
                                          const CertificateOptions& options = {});
[[nodiscard]] Certificate assess_theorem2(const PerturbedSystem& sys, const PlanarRegion& region,
                                          const CertificateOptions& options = {});
[[nodiscard]] Certificate assess_theorem3(const PerturbedSystem& sys, const PlanarRegion& u0, double delta,
                                          const CertificateOptions& options = {});

[[nodiscard]] Certificate theorem1_certificate(const PerturbedSystem& sys, const PlanarRegion& region,
                                               const CertificateOptions& options = {});
[[nodiscard]] Certificate theorem2_certificate(const PerturbedSystem& sys, const PlanarRegion& region,
                                               const CertificateOptions& options = {});
[[nodiscard]] Certificate theorem3_certificate(const PerturbedSystem& sys, const PlanarRegion& u0, double delta,
                                               const CertificateOptions& options = {});

/// psi(t, xi) = A xi with spectrum {i lambda, -i lambda}, lambda > 0.
struct LinearCenter {
  Eigen::Matrix2d a;
  double lambda = 0.0;
  [[nodiscard]] double period() const { return 2.0 * kPi / lambda; }
};

/// Recovers A from psi and checks autonomy, linearity and the spectrum.
/// Throws SpectrumMismatch.
[[nodiscard]] LinearCenter extract_linear_center(const PerturbedSystem& sys);

/// The time-rescaled system for detuning mu:
///   phi2_mu(t, xi, eps) = phi2(t, xi, eps, mu) + mu A xi + eps^2 mu phi1(xi) + eps^3 mu phi2(t, xi, eps, mu).
[[nodiscard]] PerturbedSystem detuned_system(const PerturbedSystem& sys, const LinearCenter& center, double mu);

struct MuScanRow {
  double mu = 0.0;
  Certificate certificate;
  double a3_min_gap = 0.0;
  double a4_min_gap = 0.0;
  int degree_difference = 0;
  bool degree_computed = false;
  bool matches_base = false;  // conditions pass and the degree difference equals the mu = 0 value
};

struct MuScanResult {
  Certificate base;
  std::vector<MuScanRow> rows;  // in grid order
  double mu_hat = 0.0;          // largest m with every grid |mu| <= m matching the base
  double grid_step = 0.0;       // smallest spacing between distinct grid values
};

/// Frequency-pulling scan. Throws BaseCaseInvalid when mu = 0 fails.
[[nodiscard]] MuScanResult theorem4_scan(const PerturbedSystem& sys, const PlanarRegion& u0, double delta,
                                         const std::vector<double>& mu_grid, const CertificateOptions& options = {});

/// Uniform grid lo, lo + step, ..., hi (endpoints included when they land on the lattice).
[[nodiscard]] std::vector<double> uniform_grid(double lo, double hi, double step);

}  // namespace perdeg
