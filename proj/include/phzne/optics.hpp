// Two-photon linear optics: mode unitaries built from couplers and phase
// shifters, and output statistics for partially distinguishable photon pairs.
//
// Matrix convention: entry (i, j) is the amplitude for a photon entering
// mode i to leave in mode j, i.e. a_i = sum_j U(i, j) b_j. Elements are
// therefore chained left to right in the order light passes through them.
#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace phzne {

using cplx = std::complex<double>;
using CMatrix = Eigen::MatrixXcd;

inline constexpr double kUnitarityTol = 1e-12;
inline constexpr double kPi = 3.14159265358979323846;

/// Max-norm distance of U^dagger U from the identity.
inline double unitarity_defect(const CMatrix& m) {
  const auto n = m.rows();
  return (m.adjoint() * m - CMatrix::Identity(n, n)).cwiseAbs().maxCoeff();
}

class ModeUnitary {
 public:
  /// Validating constructor: square, dim >= 2, unitary within `tol`.
  explicit ModeUnitary(CMatrix entries, double tol = kUnitarityTol)
      : entries_(std::move(entries)) {
    if (entries_.rows() != entries_.cols()) {
      throw std::invalid_argument("ModeUnitary: matrix is not square");
    }
    if (entries_.rows() < 2) {
      throw std::invalid_argument("ModeUnitary: need at least 2 modes");
    }
    const double defect = unitarity_defect(entries_);
    if (!(defect <= tol)) {
      throw std::invalid_argument("ModeUnitary: not unitary (defect " +
                                  std::to_string(defect) + ")");
    }
  }

  static ModeUnitary identity(std::size_t dim) {
    return ModeUnitary(CMatrix::Identity(static_cast<Eigen::Index>(dim),
                                         static_cast<Eigen::Index>(dim)));
  }

  std::size_t dim() const { return static_cast<std::size_t>(entries_.rows()); }
  const CMatrix& matrix() const { return entries_; }
  cplx operator()(std::size_t in, std::size_t out) const {
    return entries_(static_cast<Eigen::Index>(in), static_cast<Eigen::Index>(out));
  }

  ModeUnitary adjoint() const { return ModeUnitary(entries_.adjoint()); }

 private:
  CMatrix entries_;
};

namespace detail {

inline void check_mode(std::size_t mode, std::size_t dim, const char* what) {
  if (mode >= dim) {
    throw std::invalid_argument(std::string(what) + ": mode index " +
                                std::to_string(mode) + " out of range for " +
                                std::to_string(dim) + " modes");
  }
}

inline void check_dim(std::size_t dim, const char* what) {
  if (dim < 2) throw std::invalid_argument(std::string(what) + ": dim must be >= 2");
}

}  // namespace detail

/// Real symmetric coupler acting on modes (i, j):
///   [[ sqrt(r),   sqrt(1-r)],
///    [ sqrt(1-r), -sqrt(r) ]]
/// with the block rows/columns ordered (i, j). Swapping i and j moves the
/// minus sign to the other mode.
inline ModeUnitary directional_coupler(double reflectivity,
                                       std::pair<std::size_t, std::size_t> modes,
                                       std::size_t dim) {
  detail::check_dim(dim, "directional_coupler");
  const auto [i, j] = modes;
  detail::check_mode(i, dim, "directional_coupler");
  detail::check_mode(j, dim, "directional_coupler");
  if (i == j) throw std::invalid_argument("directional_coupler: modes must differ");
  if (!(reflectivity >= 0.0 && reflectivity <= 1.0)) {
    throw std::invalid_argument("directional_coupler: reflectivity outside [0, 1]");
  }
  const double r = std::sqrt(reflectivity);
  const double t = std::sqrt(1.0 - reflectivity);
  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix m = CMatrix::Identity(d, d);
  const auto ei = static_cast<Eigen::Index>(i);
  const auto ej = static_cast<Eigen::Index>(j);
  m(ei, ei) = r;
  m(ei, ej) = t;
  m(ej, ei) = t;
  m(ej, ej) = -r;
  return ModeUnitary(std::move(m));
}

inline ModeUnitary phase_shifter(double phase, std::size_t mode, std::size_t dim) {
  detail::check_dim(dim, "phase_shifter");
  detail::check_mode(mode, dim, "phase_shifter");
  const auto d = static_cast<Eigen::Index>(dim);
  CMatrix m = CMatrix::Identity(d, d);
  m(static_cast<Eigen::Index>(mode), static_cast<Eigen::Index>(mode)) = std::polar(1.0, phase);
  return ModeUnitary(std::move(m));
}

/// `second` applied after `first`.
inline ModeUnitary compose(const ModeUnitary& first, const ModeUnitary& second) {
  if (first.dim() != second.dim()) {
    throw std::invalid_argument("compose: dimension mismatch (" +
                                std::to_string(first.dim()) + " vs " +
                                std::to_string(second.dim()) + ")");
  }
  return ModeUnitary(first.matrix() * second.matrix());
}

inline void check_noise_level(double epsilon, const char* what) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0)) {
    throw std::invalid_argument(std::string(what) + ": noise level outside [0, 1]");
  }
}

/// Weight of the fully indistinguishable component of the pair state,
/// lambda = cos^2(2 theta) = 2 (1 - eps) / (2 - eps).
inline double indistinguishability_weight(double epsilon) {
  check_noise_level(epsilon, "indistinguishability_weight");
  return 2.0 * (1.0 - epsilon) / (2.0 - epsilon);
}

struct PhotonPairInput {
  std::size_t mode_a;
  std::size_t mode_b;
  double noise_level;
};

inline void validate(const PhotonPairInput& in, std::size_t dim) {
  detail::check_mode(in.mode_a, dim, "PhotonPairInput");
  detail::check_mode(in.mode_b, dim, "PhotonPairInput");
  if (in.mode_a == in.mode_b) {
    throw std::invalid_argument("PhotonPairInput: photons must enter distinct modes");
  }
  check_noise_level(in.noise_level, "PhotonPairInput");
}

/// Unordered output pair, stored canonically with j <= k. j == k is bunched.
class OutputPattern {
 public:
  OutputPattern(std::size_t j, std::size_t k) : j_(j < k ? j : k), k_(j < k ? k : j) {}
  std::size_t j() const { return j_; }
  std::size_t k() const { return k_; }
  bool bunched() const { return j_ == k_; }
  friend bool operator==(const OutputPattern&, const OutputPattern&) = default;

 private:
  std::size_t j_;
  std::size_t k_;
};

/// Pattern probability split into the fully indistinguishable and fully
/// distinguishable contributions. The mixed value is affine in lambda.
struct PatternComponents {
  double indistinguishable = 0.0;
  double distinguishable = 0.0;

  double mix(double lambda) const {
    return lambda * indistinguishable + (1.0 - lambda) * distinguishable;
  }
};

inline PatternComponents pattern_components(const CMatrix& u, std::size_t a, std::size_t b,
                                            OutputPattern pattern) {
  const auto ia = static_cast<Eigen::Index>(a);
  const auto ib = static_cast<Eigen::Index>(b);
  const auto j = static_cast<Eigen::Index>(pattern.j());
  const auto k = static_cast<Eigen::Index>(pattern.k());
  if (pattern.bunched()) {
    // Bosonic enhancement only for the indistinguishable part.
    const double q = std::norm(u(ia, j) * u(ib, j));
    return {2.0 * q, q};
  }
  const cplx direct = u(ia, j) * u(ib, k);
  const cplx crossed = u(ia, k) * u(ib, j);
  return {std::norm(direct + crossed), std::norm(direct) + std::norm(crossed)};
}

class CoincidenceDistribution {
 public:
  explicit CoincidenceDistribution(std::size_t dim) : dim_(dim), probs_(dim * dim, 0.0) {}

  std::size_t dim() const { return dim_; }

  double at(OutputPattern p) const {
    detail::check_mode(p.k(), dim_, "CoincidenceDistribution");
    return probs_[p.j() * dim_ + p.k()];
  }
  void set(OutputPattern p, double value) { probs_[p.j() * dim_ + p.k()] = value; }

  /// All canonical patterns (j <= k), row-major.
  std::vector<OutputPattern> patterns() const {
    std::vector<OutputPattern> out;
    out.reserve(dim_ * (dim_ + 1) / 2);
    for (std::size_t j = 0; j < dim_; ++j)
      for (std::size_t k = j; k < dim_; ++k) out.emplace_back(j, k);
    return out;
  }

  double total() const {
    double s = 0.0;
    for (const auto& p : patterns()) s += at(p);
    return s;
  }

 private:
  std::size_t dim_;
  std::vector<double> probs_;
};

inline void check_input(const ModeUnitary& u, const PhotonPairInput& in) {
  validate(in, u.dim());
}

inline double coincidence_probability(const ModeUnitary& u, const PhotonPairInput& in,
                                      OutputPattern pattern) {
  check_input(u, in);
  detail::check_mode(pattern.k(), u.dim(), "coincidence_probability");
  const double lambda = indistinguishability_weight(in.noise_level);
  return pattern_components(u.matrix(), in.mode_a, in.mode_b, pattern).mix(lambda);
}

inline CoincidenceDistribution output_distribution(const ModeUnitary& u,
                                                   const PhotonPairInput& in) {
  check_input(u, in);
  const double lambda = indistinguishability_weight(in.noise_level);
  CoincidenceDistribution dist(u.dim());
  for (const auto& p : dist.patterns()) {
    dist.set(p, pattern_components(u.matrix(), in.mode_a, in.mode_b, p).mix(lambda));
  }
  return dist;
}

}  // namespace phzne
