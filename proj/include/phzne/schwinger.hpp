// Two-qubit Schwinger Hamiltonian
//   H(m) = I + XX + YY - Z1/2 + Z1Z2/2 + (m/2)(Z2 - Z1)
// measured in three bases (XX, YY, ZZ eigenbases). Computational basis
// order is |q1 q2> = |00>, |01>, |10>, |11> with Z|0> = +|0>.
#pragma once

#include "phzne/processor.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

namespace phzne {

struct PauliString {
  char q1 = 'I';
  char q2 = 'I';

  std::string label() const { return std::string{q1, q2}; }
  friend bool operator==(const PauliString&, const PauliString&) = default;
};

struct PauliTerm {
  double coefficient;
  PauliString string;
};

struct SchwingerHamiltonian {
  double m = 0.0;
  std::vector<PauliTerm> terms;
};

inline SchwingerHamiltonian hamiltonian(double m) {
  if (!std::isfinite(m)) throw std::invalid_argument("hamiltonian: m must be finite");
  return {m,
          {{1.0, {'I', 'I'}},
           {1.0, {'X', 'X'}},
           {1.0, {'Y', 'Y'}},
           {-(1.0 + m) / 2.0, {'Z', 'I'}},
           {m / 2.0, {'I', 'Z'}},
           {0.5, {'Z', 'Z'}}}};
}

inline Eigen::Matrix2cd pauli_matrix(char p) {
  Eigen::Matrix2cd s;
  switch (p) {
    case 'I': s << 1, 0, 0, 1; break;
    case 'X': s << 0, 1, 1, 0; break;
    case 'Y': s << 0, cplx(0, -1), cplx(0, 1), 0; break;
    case 'Z': s << 1, 0, 0, -1; break;
    default: throw std::invalid_argument(std::string("pauli_matrix: bad letter ") + p);
  }
  return s;
}

inline Eigen::Matrix4cd dense_matrix(const PauliString& s) {
  const Eigen::Matrix2cd a = pauli_matrix(s.q1);
  const Eigen::Matrix2cd b = pauli_matrix(s.q2);
  Eigen::Matrix4cd out;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j)
      for (int k = 0; k < 2; ++k)
        for (int l = 0; l < 2; ++l) out(2 * i + k, 2 * j + l) = a(i, j) * b(k, l);
  return out;
}

inline Eigen::Matrix4cd dense_matrix(const SchwingerHamiltonian& h) {
  Eigen::Matrix4cd out = Eigen::Matrix4cd::Zero();
  for (const auto& t : h.terms) out += t.coefficient * dense_matrix(t.string);
  return out;
}

/// XX | YY | {II, ZI, IZ, ZZ}: one measurement basis per group.
inline std::array<std::vector<PauliString>, 3> commuting_groups() {
  return {{{{'X', 'X'}},
           {{'Y', 'Y'}},
           {{'I', 'I'}, {'Z', 'I'}, {'I', 'Z'}, {'Z', 'Z'}}}};
}

/// The diagonal is (1, -m, 1+m, 2) and XX + YY couples |01> and |10> with
/// strength 2, so the spectrum is {1, 2, (1 +- sqrt((1+2m)^2 + 16)) / 2}.
inline double exact_ground_energy(double m) {
  if (!std::isfinite(m)) throw std::invalid_argument("exact_ground_energy: m must be finite");
  const double s = std::sqrt((1.0 + 2.0 * m) * (1.0 + 2.0 * m) + 16.0);
  return std::min({1.0, 2.0, (1.0 - s) / 2.0});
}

/// Real ground-state amplitudes over |00>, |01>, |10>, |11>, sign fixed so
/// the first nonzero amplitude is positive.
inline std::array<double, 4> ground_state(double m) {
  const double e0 = exact_ground_energy(m);
  // (-m - e0) v01 + 2 v10 = 0
  double v01 = 2.0;
  double v10 = e0 + m;
  const double n = std::hypot(v01, v10);
  v01 /= n;
  v10 /= n;
  if (v01 < 0.0 || (v01 == 0.0 && v10 < 0.0)) {
    v01 = -v01;
    v10 = -v10;
  }
  return {0.0, v01, v10, 0.0};
}

namespace detail {

inline constexpr std::array<double, 4> kParitySigns{1.0, -1.0, -1.0, 1.0};

inline std::array<double, 4> z_coefficients(double m) { return {1.0, -m, 1.0 + m, 2.0}; }

inline void check_normalized(const OutcomeProbs& p, const char* basis) {
  if (std::abs(p.sum() - 1.0) > 1e-6) {
    throw std::invalid_argument(std::string("energy_from_probs: ") + basis +
                                "-basis probabilities sum to " + std::to_string(p.sum()));
  }
}

}  // namespace detail

/// Energy reconstructed from the three basis distributions. Linear in every
/// probability.
inline double energy_from_probs(const OutcomeProbs& px, const OutcomeProbs& py,
                                const OutcomeProbs& pz, double m) {
  detail::check_normalized(px, "X");
  detail::check_normalized(py, "Y");
  detail::check_normalized(pz, "Z");
  const auto zc = detail::z_coefficients(m);
  double e = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    e += detail::kParitySigns[i] * (px.p[i] + py.p[i]) + zc[i] * pz.p[i];
  }
  return e;
}

using Counts = std::array<std::uint64_t, 4>;

inline std::uint64_t total(const Counts& c) { return c[0] + c[1] + c[2] + c[3]; }

inline double pauli_expectation_from_counts(const Counts& counts, const std::array<int, 4>& signs) {
  const std::uint64_t n = total(counts);
  if (n == 0) throw std::domain_error("pauli_expectation_from_counts: zero total count");
  double s = 0.0;
  for (std::size_t i = 0; i < 4; ++i) {
    if (signs[i] != 1 && signs[i] != -1) {
      throw std::invalid_argument("pauli_expectation_from_counts: signs must be +-1");
    }
    s += signs[i] * static_cast<double>(counts[i]);
  }
  return s / static_cast<double>(n);
}

struct EnergyEstimate {
  double value = 0.0;
  double stddev = 0.0;
};

/// Count-based energy. The standard deviation follows from treating each
/// count as independent Poisson with Var[n] = n and linearising the ratio
/// estimator: dE/dn_i = (c_i - E_k) / N_k within basis k.
inline EnergyEstimate energy_from_counts(const Counts& cx, const Counts& cy, const Counts& cz,
                                         double m) {
  const auto zc = detail::z_coefficients(m);
  const std::array<std::array<double, 4>, 3> coeffs{detail::kParitySigns, detail::kParitySigns, zc};
  const std::array<const Counts*, 3> all{&cx, &cy, &cz};
  EnergyEstimate out;
  double var = 0.0;
  for (std::size_t k = 0; k < 3; ++k) {
    const auto& c = *all[k];
    const std::uint64_t n = total(c);
    if (n == 0) {
      throw std::domain_error(std::string("energy_from_counts: zero total in ") +
                              to_string(kAllBases[k]) + " basis");
    }
    const double nd = static_cast<double>(n);
    double ek = 0.0;
    for (std::size_t i = 0; i < 4; ++i) ek += coeffs[k][i] * static_cast<double>(c[i]);
    ek /= nd;
    out.value += ek;
    for (std::size_t i = 0; i < 4; ++i) {
      const double d = coeffs[k][i] - ek;
      var += d * d * static_cast<double>(c[i]) / (nd * nd);
    }
  }
  out.stddev = std::sqrt(var);
  return out;
}

}  // namespace phzne
