#pragma once

// Entanglement-based direction transfer. Alice measures her halves of N
// singlets along a private direction a_z and announces the +-1 results;
// Bob's halves collapse onto |up/down along a_z>, anti-correlated with her.

#include <cstdint>
#include <optional>
#include <vector>

#include "qnav/qcore.hpp"

namespace qnav {

class ProtocolTranscript {
 public:
  /// Builds the transcript for the given Alice outcomes (each +1 or -1).
  ProtocolTranscript(const UnitDirection& alice_direction, std::vector<int> outcomes);

  std::size_t pair_count() const { return outcomes_.size(); }
  const UnitDirection& alice_direction() const { return alice_direction_; }
  const std::vector<int>& outcomes() const { return outcomes_; }
  /// Bob-side particles in |up along a_z>: Alice saw -1 for these.
  std::size_t n_plus() const { return n_plus_; }
  std::size_t n_minus() const { return outcomes_.size() - n_plus_; }

 private:
  UnitDirection alice_direction_;
  std::vector<int> outcomes_;
  std::size_t n_plus_ = 0;
};

enum class RealizationKind { kSpinHalf, kPhotonPolarization, kScalar };

const char* to_string(RealizationKind kind);

/// Physical carrier of the entangled qubits. Photon polarization carries an
/// unknown rotation between Alice's frame and the polarization plane.
class QubitRealization {
 public:
  static QubitRealization spin_half() { return QubitRealization(RealizationKind::kSpinHalf, std::nullopt); }
  static QubitRealization photon(const Rotation& hidden_frame) {
    return QubitRealization(RealizationKind::kPhotonPolarization, hidden_frame);
  }
  static QubitRealization scalar() { return QubitRealization(RealizationKind::kScalar, std::nullopt); }

  RealizationKind kind() const { return kind_; }
  const std::optional<Rotation>& hidden_frame() const { return hidden_frame_; }

 private:
  QubitRealization(RealizationKind kind, std::optional<Rotation> frame)
      : kind_(kind), hidden_frame_(std::move(frame)) {}

  RealizationKind kind_;
  std::optional<Rotation> hidden_frame_;
};

struct MeasurementRecord {
  UnitDirection axis;  // in Bob's frame
  int outcome = 1;
  int alice_sign = 1;

  /// -alice_sign * outcome: +1 means Bob's result points along +a_z.
  int effective_outcome() const { return -alice_sign * outcome; }
};

/// Alice measures N singlet halves along a_z. Outcomes follow the exact
/// singlet joint distribution. Throws kEmptyProtocol for N == 0.
ProtocolTranscript run_alice(std::size_t pair_count, const UnitDirection& alice_direction, RandomStream& rng);

/// State of Bob's particle i: |up along (-outcome_i * a_z)>.
std::vector<StateVector> bob_ensemble(const ProtocolTranscript& transcript);

/// Bob measures particle i along axes[i]; records carry Alice's sign for i.
std::vector<MeasurementRecord> bob_measure(const std::vector<StateVector>& ensemble,
                                           const std::vector<UnitDirection>& axes,
                                           const std::vector<int>& alice_signs,
                                           const QubitRealization& realization, RandomStream& rng);

/// x, y, z, x, y, z, ...
std::vector<UnitDirection> round_robin_axes(std::size_t count);

struct ChannelAudit {
  std::size_t pair_count = 0;
  std::size_t plus_count_reference = 0;
  std::size_t plus_count_other = 0;
  double chi2_counts = 0.0;
  double p_counts = 1.0;
  // Non-overlapping 2-bit patterns, 3 degrees of freedom.
  double chi2_patterns = 0.0;
  double p_patterns = 1.0;
  bool independent = true;
};

/// Two-sample chi-square test between Alice's announced string in
/// `transcript` and a fresh string generated for `other_direction` from
/// RandomStream(seed). `independent` is set when both p-values exceed 0.001.
ChannelAudit channel_information_audit(const ProtocolTranscript& transcript, const UnitDirection& other_direction,
                                       std::uint64_t seed);

/// Survival function of the chi-square distribution for 1 or 3 degrees of freedom.
double chi_square_sf(double statistic, int dof);

}  // namespace qnav
