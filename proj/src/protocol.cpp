#include "qnav/protocol.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

namespace qnav {

const char* to_string(RealizationKind kind) {
  switch (kind) {
    case RealizationKind::kSpinHalf: return "spin-half";
    case RealizationKind::kPhotonPolarization: return "photon";
    case RealizationKind::kScalar: return "scalar";
  }
  return "unknown";
}

ProtocolTranscript::ProtocolTranscript(const UnitDirection& alice_direction, std::vector<int> outcomes)
    : alice_direction_(alice_direction), outcomes_(std::move(outcomes)) {
  if (outcomes_.empty()) throw Error(ErrorCode::kEmptyProtocol, "transcript needs at least one pair");
  for (int o : outcomes_) {
    if (o != 1 && o != -1) throw Error(ErrorCode::kInvalidDistribution, "Alice outcomes must be +1 or -1");
    if (o == -1) ++n_plus_;
  }
}

ProtocolTranscript run_alice(std::size_t pair_count, const UnitDirection& alice_direction, RandomStream& rng) {
  if (pair_count == 0) throw Error(ErrorCode::kEmptyProtocol, "N must be at least 1");
  // Alice's Stern-Gerlach acts on the first tensor factor of each singlet.
  const Operator id = identity_operator(2);
  const Povm alice({kron(projector_along(alice_direction, +1), id), kron(projector_along(alice_direction, -1), id)});
  const std::vector<double> probabilities = born_probabilities(singlet_state(), alice);

  std::vector<int> outcomes(pair_count);
  for (int& o : outcomes) o = sample_outcome(probabilities, rng) == 0 ? +1 : -1;
  return ProtocolTranscript(alice_direction, std::move(outcomes));
}

std::vector<StateVector> bob_ensemble(const ProtocolTranscript& transcript) {
  const StateVector up = bloch_to_state(transcript.alice_direction());
  const StateVector down = bloch_to_state(-transcript.alice_direction());
  std::vector<StateVector> ensemble;
  ensemble.reserve(transcript.pair_count());
  for (int o : transcript.outcomes()) ensemble.push_back(o == -1 ? up : down);
  return ensemble;
}

std::vector<MeasurementRecord> bob_measure(const std::vector<StateVector>& ensemble,
                                           const std::vector<UnitDirection>& axes,
                                           const std::vector<int>& alice_signs,
                                           const QubitRealization& realization, RandomStream& rng) {
  if (ensemble.size() != axes.size() || ensemble.size() != alice_signs.size()) {
    throw Error(ErrorCode::kLengthMismatch, "ensemble, axes and signs must have equal length");
  }
  std::vector<MeasurementRecord> records;
  records.reserve(ensemble.size());

  // Bob cycles through few distinct axes; reuse their measurement operators.
  struct CachedAxis {
    UnitDirection axis;
    Povm povm;
  };
  std::vector<CachedAxis> cache;

  for (std::size_t i = 0; i < ensemble.size(); ++i) {
    int outcome = 0;
    if (realization.kind() == RealizationKind::kScalar) {
      // No directional observable: a fair coin regardless of axis.
      outcome = rng.uniform() < 0.5 ? +1 : -1;
    } else {
      UnitDirection physical = axes[i];
      if (realization.kind() == RealizationKind::kPhotonPolarization && realization.hidden_frame()) {
        physical = apply_rotation(*realization.hidden_frame(), physical);
      }
      auto it = std::find_if(cache.begin(), cache.end(), [&](const CachedAxis& c) { return c.axis == physical; });
      if (it == cache.end()) {
        if (cache.size() >= 8) cache.erase(cache.begin());
        cache.push_back({physical, Povm::stern_gerlach(physical)});
        it = std::prev(cache.end());
      }
      const std::vector<double> p = born_probabilities(ensemble[i], it->povm);
      outcome = sample_outcome(p, rng) == 0 ? +1 : -1;
    }
    records.push_back({axes[i], outcome, alice_signs[i]});
  }
  return records;
}

std::vector<UnitDirection> round_robin_axes(std::size_t count) {
  const std::array<UnitDirection, 3> xyz{UnitDirection::x_axis(), UnitDirection::y_axis(), UnitDirection::z_axis()};
  std::vector<UnitDirection> axes;
  axes.reserve(count);
  for (std::size_t i = 0; i < count; ++i) axes.push_back(xyz[i % 3]);
  return axes;
}

double chi_square_sf(double statistic, int dof) {
  if (statistic <= 0.0) return 1.0;
  const double h = std::sqrt(statistic / 2.0);
  switch (dof) {
    case 1: return std::erfc(h);
    case 3: return std::erfc(h) + std::sqrt(2.0 * statistic / std::numbers::pi) * std::exp(-statistic / 2.0);
    default: throw Error(ErrorCode::kConfig, "chi_square_sf supports 1 or 3 degrees of freedom");
  }
}

namespace {

// Pearson statistic for a 2 x C contingency table; empty columns contribute 0.
template <std::size_t C>
double two_sample_chi2(const std::array<double, C>& a, const std::array<double, C>& b) {
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    na += a[c];
    nb += b[c];
  }
  const double n = na + nb;
  if (na == 0.0 || nb == 0.0) return 0.0;
  double chi2 = 0.0;
  for (std::size_t c = 0; c < C; ++c) {
    const double col = a[c] + b[c];
    if (col == 0.0) continue;
    const double ea = na * col / n;
    const double eb = nb * col / n;
    chi2 += (a[c] - ea) * (a[c] - ea) / ea + (b[c] - eb) * (b[c] - eb) / eb;
  }
  return chi2;
}

std::array<double, 4> pattern_counts(const std::vector<int>& s) {
  std::array<double, 4> counts{};
  for (std::size_t i = 0; i + 1 < s.size(); i += 2) {
    counts[(s[i] == 1 ? 0 : 2) + (s[i + 1] == 1 ? 0 : 1)] += 1.0;
  }
  return counts;
}

}  // namespace

ChannelAudit channel_information_audit(const ProtocolTranscript& transcript, const UnitDirection& other_direction,
                                       std::uint64_t seed) {
  RandomStream fresh(seed);
  const ProtocolTranscript other = run_alice(transcript.pair_count(), other_direction, fresh);
  const std::vector<int>& a = transcript.outcomes();
  const std::vector<int>& b = other.outcomes();

  ChannelAudit audit;
  audit.pair_count = a.size();
  audit.plus_count_reference = static_cast<std::size_t>(std::count(a.begin(), a.end(), 1));
  audit.plus_count_other = static_cast<std::size_t>(std::count(b.begin(), b.end(), 1));

  const std::array<double, 2> ca{static_cast<double>(audit.plus_count_reference),
                                 static_cast<double>(a.size() - audit.plus_count_reference)};
  const std::array<double, 2> cb{static_cast<double>(audit.plus_count_other),
                                 static_cast<double>(b.size() - audit.plus_count_other)};
  audit.chi2_counts = two_sample_chi2(ca, cb);
  audit.p_counts = chi_square_sf(audit.chi2_counts, 1);
  audit.chi2_patterns = two_sample_chi2(pattern_counts(a), pattern_counts(b));
  audit.p_patterns = chi_square_sf(audit.chi2_patterns, 3);
  audit.independent = audit.p_counts > 1e-3 && audit.p_patterns > 1e-3;
  return audit;
}

}  // namespace qnav
