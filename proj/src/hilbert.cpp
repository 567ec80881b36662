#include "fibreqm/hilbert.hpp"

#include <cmath>
#include <limits>
#include <string>

#include "fibreqm/errors.hpp"

namespace fqm {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::DimensionMismatch: return "dimension mismatch";
    case ErrorCode::InvalidArgument: return "invalid argument";
    case ErrorCode::SingularMatrix: return "singular matrix";
    case ErrorCode::ZeroState: return "zero state";
    case ErrorCode::NonConvergence: return "non-convergence";
    case ErrorCode::OffGrid: return "off-grid time";
    case ErrorCode::GridMismatch: return "grid mismatch";
    case ErrorCode::NotPointwise: return "operator not pointwise";
    case ErrorCode::MissingDerivative: return "missing derivative";
    case ErrorCode::EvaluationFailure: return "evaluation failure";
    case ErrorCode::Io: return "i/o error";
    case ErrorCode::Parse: return "parse error";
    case ErrorCode::Schema: return "schema violation";
    case ErrorCode::UnknownFormat: return "unknown format";
  }
  return "unknown error";
}

void PhysicalConstants::validate() const {
  if (!(hbar > 0.0) || !std::isfinite(hbar)) {
    fail(ErrorCode::InvalidArgument, "hbar must be positive and finite");
  }
}

void require_square(const OperatorMatrix& a, const char* what) {
  if (a.rows() != a.cols()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": operator is not square (" +
             std::to_string(a.rows()) + "x" + std::to_string(a.cols()) + ")");
  }
}

void require_same_dimension(const OperatorMatrix& a, const OperatorMatrix& b,
                            const char* what) {
  require_square(a, what);
  require_square(b, what);
  if (a.rows() != b.rows()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": operand dimensions " +
             std::to_string(a.rows()) + " and " + std::to_string(b.rows()));
  }
}

void require_same_dimension(const OperatorMatrix& a, const StateVector& v,
                            const char* what) {
  require_square(a, what);
  if (a.cols() != v.size()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": operator dimension " +
             std::to_string(a.cols()) + ", vector dimension " +
             std::to_string(v.size()));
  }
}

void require_same_dimension(const StateVector& u, const StateVector& v,
                            const char* what) {
  if (u.size() != v.size()) {
    fail(ErrorCode::DimensionMismatch,
         std::string(what) + ": vector dimensions " +
             std::to_string(u.size()) + " and " + std::to_string(v.size()));
  }
}

Complex inner_product(const StateVector& u, const StateVector& v) {
  require_same_dimension(u, v, "inner_product");
  // Eigen's dot() conjugates its left operand.
  return u.dot(v);
}

OperatorMatrix adjoint(const OperatorMatrix& a) { return a.adjoint(); }

OperatorMatrix commutator(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dimension(a, b, "commutator");
  return a * b - b * a;
}

double max_abs(const OperatorMatrix& a) {
  return a.size() == 0 ? 0.0 : a.cwiseAbs().maxCoeff();
}

double max_abs(const StateVector& v) {
  return v.size() == 0 ? 0.0 : v.cwiseAbs().maxCoeff();
}

double max_abs_diff(const OperatorMatrix& a, const OperatorMatrix& b) {
  require_same_dimension(a, b, "max_abs_diff");
  return max_abs(OperatorMatrix(a - b));
}

double max_abs_diff(const StateVector& a, const StateVector& b) {
  require_same_dimension(a, b, "max_abs_diff");
  return max_abs(StateVector(a - b));
}

bool is_hermitian(const OperatorMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return max_abs(OperatorMatrix(a - a.adjoint())) <= tol;
}

bool is_unitary(const OperatorMatrix& a, double tol) {
  if (a.rows() != a.cols()) return false;
  const OperatorMatrix gram = a.adjoint() * a;
  return max_abs(OperatorMatrix(gram - OperatorMatrix::Identity(a.rows(), a.cols()))) <= tol;
}

double min_singular_value(const OperatorMatrix& a) {
  require_square(a, "min_singular_value");
  if (a.size() == 0) return 0.0;
  Eigen::JacobiSVD<OperatorMatrix> svd(a);
  return svd.singularValues().minCoeff();
}

OperatorMatrix checked_inverse(const OperatorMatrix& a, double inv_tol) {
  require_square(a, "checked_inverse");
  if (!a.allFinite()) {
    fail(ErrorCode::SingularMatrix, "matrix has non-finite entries");
  }
  const double smin = min_singular_value(a);
  if (!(smin >= inv_tol)) {
    fail(ErrorCode::SingularMatrix,
         "smallest singular value " + std::to_string(smin) +
             " below invertibility threshold " + std::to_string(inv_tol));
  }
  return a.partialPivLu().inverse();
}

OperatorMatrix identity(std::size_t n) {
  return OperatorMatrix::Identity(static_cast<Eigen::Index>(n),
                                  static_cast<Eigen::Index>(n));
}

OperatorMatrix outer(const StateVector& u, const StateVector& v) {
  return u * v.adjoint();
}

namespace {

constexpr int kMinTaylorOrder = 8;
constexpr int kMaxTaylorOrder = 40;
constexpr int kMaxSquarings = 64;
constexpr double kScaledNormTarget = 0.5;

double one_norm(const OperatorMatrix& a) {
  return a.cwiseAbs().colwise().sum().maxCoeff();
}

}  // namespace

OperatorMatrix matrix_exponential(const OperatorMatrix& a) {
  require_square(a, "matrix_exponential");
  const Eigen::Index n = a.rows();
  if (n == 0) return a;
  if (!a.allFinite()) {
    fail(ErrorCode::NonConvergence, "matrix_exponential: non-finite input");
  }

  const double norm = one_norm(a);
  int squarings = 0;
  if (norm > kScaledNormTarget) {
    squarings = static_cast<int>(std::ceil(std::log2(norm / kScaledNormTarget)));
  }
  if (squarings > kMaxSquarings) {
    fail(ErrorCode::NonConvergence,
         "matrix_exponential: norm too large for scaling budget");
  }
  const OperatorMatrix scaled = a / std::ldexp(1.0, squarings);

  OperatorMatrix sum = OperatorMatrix::Identity(n, n);
  OperatorMatrix term = OperatorMatrix::Identity(n, n);
  bool converged = false;
  for (int k = 1; k <= kMaxTaylorOrder; ++k) {
    term = (term * scaled) / static_cast<double>(k);
    sum += term;
    if (k >= kMinTaylorOrder &&
        max_abs(term) <= std::numeric_limits<double>::epsilon() * max_abs(sum)) {
      converged = true;
      break;
    }
  }
  if (!converged) {
    fail(ErrorCode::NonConvergence,
         "matrix_exponential: Taylor series did not converge");
  }

  for (int i = 0; i < squarings; ++i) sum = sum * sum;
  if (!sum.allFinite()) {
    fail(ErrorCode::NonConvergence, "matrix_exponential: overflow");
  }
  return sum;
}

}  // namespace fqm
