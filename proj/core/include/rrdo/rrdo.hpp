#pragma once

#include <cstdint>
#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rrdo/linalg.hpp"

namespace rrdo {

enum class NormKind { kEuclideanOperator, kMaxRowSum, kReferenceInduced };

std::string to_string(NormKind kind);

/// Names the norm in which an operator is certified to be a contraction.
///
/// For kReferenceInduced the reference vector psi lives in C^d (x) C^d and a
/// vector phi = (A (x) 1) psi is assigned |||phi||| = ||A||. The reshape
/// mat(.) maps index i*d + j to entry (i, j), so mat((A (x) 1) psi) =
/// A mat(psi).
class NormDescriptor {
 public:
  static NormDescriptor euclidean();
  static NormDescriptor max_row_sum();
  /// Throws kInvalidInput if dim(reference) is not a square and
  /// kReferenceNotSeparating if mat(reference) is singular.
  static NormDescriptor reference_induced(const ComplexVector& reference);

  NormKind kind() const noexcept { return kind_; }
  const std::optional<ComplexVector>& reference() const noexcept { return reference_; }

  /// ||mat(reference)^-1||, the constant bounding Euclidean growth of a
  /// reference-induced contraction. 1 for the other kinds.
  double reference_inverse_norm() const noexcept { return inverse_norm_; }

  /// Cached mat(reference)^-1 (reference-induced only).
  const ComplexMatrix& reference_inverse() const;

 private:
  explicit NormDescriptor(NormKind kind) : kind_(kind) {}

  NormKind kind_;
  std::optional<ComplexVector> reference_;
  std::shared_ptr<const ComplexMatrix> inverse_;
  double inverse_norm_ = 1.0;
};

/// A reduced dynamics operator: a matrix fixing psi_s, contractive for `norm`.
/// psi_s is normalized on construction.
struct Rrdo {
  Rrdo(ComplexMatrix matrix, ComplexVector psi_s, NormDescriptor norm);

  ComplexMatrix matrix;
  ComplexVector psi_s;
  NormDescriptor norm;

  Eigen::Index dim() const { return matrix.rows(); }
};

double triple_norm(const ComplexVector& v, const NormDescriptor& norm);

/// For kReferenceInduced this is a lower-bound certificate: the ratio
/// |||M phi||| / |||phi||| maximized over the canonical basis and `probes`
/// random complex unit vectors.
double triple_norm(const ComplexMatrix& m, const NormDescriptor& norm, int probes = 64,
                   std::uint64_t seed = 0x7072'6f62'6573ULL);

struct ValidationReport {
  double invariance_residual = 0.0;   // ||M psi_s - psi_s||
  double contraction_ratio = 0.0;     // worst |||M phi||| / |||phi||| observed
  double power_norm_max = 0.0;        // max_{k<=64} ||M^k||; reference-induced only
  double power_norm_allowed = 0.0;    // norm-equivalence bound on ||M^k||
  std::vector<std::string> violations;

  bool passed() const { return violations.empty(); }
};

/// Checks M psi_s = psi_s, contraction in the declared norm, and boundedness
/// of powers. Never throws for a well-formed Rrdo; failures go in the report.
ValidationReport validate_rrdo(const Rrdo& candidate, int probes = 64, std::uint64_t seed = 1);

struct RrdoDecomposition {
  linalg::SpectralCluster p1;  // spectral projector of M at eigenvalue 1
  ComplexVector psi;           // p1^* psi_s, <psi_s, psi> = 1
  ComplexMatrix p;             // |psi_s><psi|
  ComplexMatrix q;             // 1 - p
  ComplexMatrix m_q;           // q M q
  bool in_me = false;          // 1 is the only unimodular eigenvalue and is simple
  double sr_mq = 0.0;
};

constexpr double kDefaultClusterTol = 1e-8;

/// M = P + M_Q. Throws kNotAnRrdo when no eigenvalue lies within tol of 1.
RrdoDecomposition decompose(const Rrdo& r, double tol = kDefaultClusterTol);

}  // namespace rrdo
