// Six-mode programmable chip: dual-rail qubits, a post-selected CNOT and
// single-qubit Mach-Zehnder stages driven by eight phase shifters.
//
// Mode map (0-based):
//   0      ancilla (vacuum)
//   1, 2   control qubit rails |0>, |1>
//   3, 4   target qubit rails  |0>, |1>
//   5      ancilla (vacuum)
//
// Element order, as light traverses the chip:
//   control prep   DC1 (1,2)   PS2 on 1   DC2 (2,1)   PS1 on 1
//   target prep    DC3 (3,4)   PS4 on 3   DC4 (4,3)   PS3 on 3
//   CNOT           DC5 (3,4)   DC6 (0,1)  DC7 (2,3)   DC8 (5,4)   DC9 (3,4)
//   control meas   PS5 on 1    DC10 (1,2) PS6 on 1    DC11 (1,2)
//   target meas    PS7 on 3    DC12 (3,4) PS8 on 3    DC13 (3,4)
// DC6..DC8 have reflectivity 1/3, all others 1/2. The two photons only meet
// at DC7, which carries the Hong-Ou-Mandel interference.
//
// With all phases zero each preparation interferometer flips its qubit and
// each measurement interferometer is the identity. Setting phi4 = pi
// prepares |1>_c |0>_t, for which the output pair (2, 3) shows a full
// Hong-Ou-Mandel dip; that pair is the visibility monitor.
#pragma once

#include "phzne/optics.hpp"

#include <array>
#include <cmath>
#include <complex>
#include <cstddef>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace phzne {

inline constexpr std::size_t kChipModes = 6;
inline constexpr std::size_t kPhaseCount = 8;
inline constexpr double kPostSelectionFloor = 1e-9;

/// Wraps an angle to [0, 2 pi).
inline double wrap_phase(double phi) {
  double w = std::fmod(phi, 2.0 * kPi);
  if (w < 0.0) w += 2.0 * kPi;
  if (w >= 2.0 * kPi) w = 0.0;
  return w;
}

class PhaseSettings {
 public:
  PhaseSettings() { values_.fill(0.0); }
  explicit PhaseSettings(const std::array<double, kPhaseCount>& phases) {
    for (std::size_t i = 0; i < kPhaseCount; ++i) {
      if (!std::isfinite(phases[i])) {
        throw std::invalid_argument("PhaseSettings: phase " + std::to_string(i + 1) +
                                    " is not finite");
      }
      values_[i] = wrap_phase(phases[i]);
    }
  }

  /// 1-based, matching the shifter labels phi1..phi8.
  double phi(std::size_t index) const {
    if (index < 1 || index > kPhaseCount) {
      throw std::invalid_argument("PhaseSettings: index must be in 1..8");
    }
    return values_[index - 1];
  }
  const std::array<double, kPhaseCount>& values() const { return values_; }

 private:
  std::array<double, kPhaseCount> values_;
};

/// phi1..phi4.
using PrepPhases = std::array<double, 4>;
/// phi5..phi8.
using MeasurePhases = std::array<double, 4>;

inline PhaseSettings combine(const PrepPhases& prep, const MeasurePhases& meas) {
  return PhaseSettings({prep[0], prep[1], prep[2], prep[3], meas[0], meas[1], meas[2], meas[3]});
}

enum class BasisId { X, Y, Z };

inline constexpr std::array<BasisId, 3> kAllBases{BasisId::X, BasisId::Y, BasisId::Z};

inline const char* to_string(BasisId b) {
  switch (b) {
    case BasisId::X: return "X";
    case BasisId::Y: return "Y";
    case BasisId::Z: return "Z";
  }
  return "?";
}

/// Post-selected outcome probabilities, indexed by (control bit, target bit).
struct OutcomeProbs {
  std::array<double, 4> p{};  // p00, p01, p10, p11

  double operator()(int i, int j) const { return p[static_cast<std::size_t>(2 * i + j)]; }
  double sum() const { return p[0] + p[1] + p[2] + p[3]; }
};

struct Coupler {
  double reflectivity;
  std::size_t first;
  std::size_t second;
};

struct Shifter {
  std::size_t label;  // 1..8
  std::size_t mode;
};

using ChipElement = std::variant<Coupler, Shifter>;

struct ChipLayout {
  std::size_t dim = kChipModes;
  std::vector<ChipElement> elements;
  std::array<std::size_t, 2> control_rails{1, 2};
  std::array<std::size_t, 2> target_rails{3, 4};
  std::array<std::size_t, 2> ancilla_modes{0, 5};
  OutputPattern hom_monitor{2, 3};

  std::size_t shifter_count() const {
    std::size_t n = 0;
    for (const auto& e : elements) n += std::holds_alternative<Shifter>(e) ? 1 : 0;
    return n;
  }
};

namespace detail {

inline void append_prep(std::vector<ChipElement>& out, std::size_t r0, std::size_t r1,
                        std::size_t external, std::size_t internal) {
  out.emplace_back(Coupler{0.5, r0, r1});
  out.emplace_back(Shifter{internal, r0});
  out.emplace_back(Coupler{0.5, r1, r0});
  out.emplace_back(Shifter{external, r0});
}

inline void append_measure(std::vector<ChipElement>& out, std::size_t r0, std::size_t r1,
                           std::size_t outer, std::size_t inner) {
  out.emplace_back(Shifter{outer, r0});
  out.emplace_back(Coupler{0.5, r0, r1});
  out.emplace_back(Shifter{inner, r0});
  out.emplace_back(Coupler{0.5, r0, r1});
}

// Right-multiplies `m` by the element in place. Only two columns change.
inline void apply_element(CMatrix& m, const ChipElement& e, const PhaseSettings& phases) {
  if (const auto* c = std::get_if<Coupler>(&e)) {
    const double r = std::sqrt(c->reflectivity);
    const double t = std::sqrt(1.0 - c->reflectivity);
    const auto i = static_cast<Eigen::Index>(c->first);
    const auto j = static_cast<Eigen::Index>(c->second);
    for (Eigen::Index row = 0; row < m.rows(); ++row) {
      const cplx x = m(row, i);
      const cplx y = m(row, j);
      m(row, i) = r * x + t * y;
      m(row, j) = t * x - r * y;
    }
  } else {
    const auto& s = std::get<Shifter>(e);
    const cplx f = std::polar(1.0, phases.phi(s.label));
    m.col(static_cast<Eigen::Index>(s.mode)) *= f;
  }
}

}  // namespace detail

inline ChipLayout build_chip() {
  ChipLayout layout;
  auto& el = layout.elements;
  detail::append_prep(el, 1, 2, 1, 2);
  detail::append_prep(el, 3, 4, 3, 4);
  // CNOT: Hadamard couplers on the target around the three-coupler CZ core.
  el.emplace_back(Coupler{0.5, 3, 4});
  el.emplace_back(Coupler{1.0 / 3.0, 0, 1});
  el.emplace_back(Coupler{1.0 / 3.0, 2, 3});
  el.emplace_back(Coupler{1.0 / 3.0, 5, 4});
  el.emplace_back(Coupler{0.5, 3, 4});
  detail::append_measure(el, 1, 2, 5, 6);
  detail::append_measure(el, 3, 4, 7, 8);
  return layout;
}

/// Product of a contiguous run of elements; handy for checking sub-circuits.
inline ModeUnitary element_product(const ChipLayout& layout, std::size_t begin, std::size_t end,
                                   const PhaseSettings& phases) {
  if (begin > end || end > layout.elements.size()) {
    throw std::invalid_argument("element_product: bad element range");
  }
  const auto d = static_cast<Eigen::Index>(layout.dim);
  CMatrix m = CMatrix::Identity(d, d);
  for (std::size_t i = begin; i < end; ++i) detail::apply_element(m, layout.elements[i], phases);
  return ModeUnitary(std::move(m));
}

inline ModeUnitary chip_unitary(const ChipLayout& layout, const PhaseSettings& phases) {
  return element_product(layout, 0, layout.elements.size(), phases);
}

/// Measurement-stage phases (phi5..phi8) that rotate the eigenbasis of
/// sigma^k (x) sigma^k onto the rails. Outcome 0 is the +1 eigenvector of
/// each single-qubit Pauli.
inline MeasurePhases basis_settings(BasisId basis) {
  switch (basis) {
    case BasisId::X: return {kPi / 2, kPi / 2, kPi / 2, kPi / 2};
    case BasisId::Y: return {kPi, kPi / 2, kPi, kPi / 2};
    case BasisId::Z: return {0.0, 0.0, 0.0, 0.0};
  }
  throw std::invalid_argument("basis_settings: unknown basis");
}

/// (external, internal) phases preparing alpha|0> + beta|1> (up to a global
/// phase) on one qubit from a photon entering rail 0.
inline std::array<double, 2> qubit_prep_phases(cplx alpha, cplx beta) {
  const double na = std::abs(alpha);
  const double nb = std::abs(beta);
  if (na + nb == 0.0) throw std::invalid_argument("qubit_prep_phases: zero state");
  const double internal = 2.0 * std::atan2(na, nb);
  double external = 0.0;
  if (na > 0.0 && nb > 0.0) external = std::arg(alpha) - std::arg(beta) + kPi / 2;
  return {wrap_phase(external), wrap_phase(internal)};
}

/// phi1..phi4 preparing the product state (control) (x) (target).
inline PrepPhases product_state_phases(cplx c0, cplx c1, cplx t0, cplx t1) {
  const auto c = qubit_prep_phases(c0, c1);
  const auto t = qubit_prep_phases(t0, t1);
  return {c[0], c[1], t[0], t[1]};
}

/// Indistinguishable / distinguishable components of the four post-selected
/// patterns for one basis. Mixing at a given lambda is then O(1), so several
/// noise levels can share a single chip evaluation.
struct BasisResponse {
  std::array<PatternComponents, 4> patterns{};

  double success(double lambda) const {
    double s = 0.0;
    for (const auto& c : patterns) s += c.mix(lambda);
    return s;
  }
};

inline BasisResponse basis_response(const ChipLayout& layout, const PrepPhases& prep,
                                    BasisId basis) {
  const ModeUnitary u = chip_unitary(layout, combine(prep, basis_settings(basis)));
  BasisResponse out;
  const std::size_t a = layout.control_rails[0];
  const std::size_t b = layout.target_rails[0];
  for (int c = 0; c < 2; ++c) {
    for (int t = 0; t < 2; ++t) {
      const OutputPattern pat(layout.control_rails[static_cast<std::size_t>(c)],
                              layout.target_rails[static_cast<std::size_t>(t)]);
      out.patterns[static_cast<std::size_t>(2 * c + t)] =
          pattern_components(u.matrix(), a, b, pat);
    }
  }
  return out;
}

struct PostSelected {
  OutcomeProbs probs;
  double success_prob = 0.0;
};

inline PostSelected post_select(const BasisResponse& resp, double epsilon) {
  const double lambda = indistinguishability_weight(epsilon);
  PostSelected out;
  out.success_prob = resp.success(lambda);
  if (!(out.success_prob >= kPostSelectionFloor)) {
    throw std::domain_error("outcome_probabilities: post-selection probability " +
                            std::to_string(out.success_prob) + " below floor");
  }
  for (std::size_t i = 0; i < 4; ++i) {
    out.probs.p[i] = resp.patterns[i].mix(lambda) / out.success_prob;
  }
  return out;
}

inline PostSelected outcome_probabilities(const ChipLayout& layout, const PrepPhases& prep,
                                          BasisId basis, double epsilon) {
  check_noise_level(epsilon, "outcome_probabilities");
  return post_select(basis_response(layout, prep, basis), epsilon);
}

/// Phase setting used for the visibility measurement: phi4 = pi, rest zero.
inline PhaseSettings hom_phases() { return PhaseSettings({0, 0, 0, kPi, 0, 0, 0, 0}); }

/// V = (p_dist - p) / (p_dist + p) on the monitor pair, where p_dist is the
/// fully distinguishable coincidence probability.
inline double hom_visibility(const ChipLayout& layout, double epsilon) {
  check_noise_level(epsilon, "hom_visibility");
  const ModeUnitary u = chip_unitary(layout, hom_phases());
  const auto comp = pattern_components(u.matrix(), layout.control_rails[0],
                                       layout.target_rails[0], layout.hom_monitor);
  const double p = comp.mix(indistinguishability_weight(epsilon));
  return (comp.distinguishable - p) / (comp.distinguishable + p);
}

}  // namespace phzne
