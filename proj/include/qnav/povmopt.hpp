#pragma once

// Measure-and-guess strategies for estimating a uniformly random direction
// from one spin, a parallel pair |n>|n>, or an anti-parallel pair |n>|-n>.
// Objective: F = sum_j w_j sum_k Tr[E_k rho(n_j)] (1 + g_k.n_j)/2.

#include <array>
#include <cstdint>
#include <vector>

#include "qnav/estimation.hpp"
#include "qnav/qcore.hpp"

namespace qnav {

enum class EnsembleKind { kSingle, kParallelPair, kAntiParallelPair };

const char* to_string(EnsembleKind kind);

class DirectionalEnsemble {
 public:
  DirectionalEnsemble(EnsembleKind kind, SphereGrid prior);

  EnsembleKind kind() const { return kind_; }
  const SphereGrid& prior() const { return prior_; }
  int dim() const { return kind_ == EnsembleKind::kSingle ? 2 : 4; }

  /// |n>, |n>|n> or |n>|-n>.
  StateVector state(const UnitDirection& n) const;

 private:
  EnsembleKind kind_;
  SphereGrid prior_;
};

struct GuessedPovm {
  Povm povm;
  std::vector<UnitDirection> guesses;  // guesses[k] is emitted on outcome k
};

struct OptimizationTrace {
  std::vector<double> objective_history;
  bool converged = false;
  int iterations = 0;
};

/// Prior moments sum_j w_j rho(n_j) and sum_j w_j n_j[a] rho(n_j). The
/// objective is linear in these, so every see-saw step is O(K) small
/// matrix products independent of the grid size.
struct EnsembleMoments {
  Operator zeroth;
  std::array<Operator, 3> first;
};

EnsembleMoments ensemble_moments(const DirectionalEnsemble& ensemble);

namespace serial {
EnsembleMoments ensemble_moments(const DirectionalEnsemble& ensemble);
}

/// Direct grid sum of the objective.
double mean_fidelity(const GuessedPovm& strategy, const DirectionalEnsemble& ensemble);
/// Same objective from precomputed moments.
double mean_fidelity(const GuessedPovm& strategy, const EnsembleMoments& moments);

struct SeesawResult {
  GuessedPovm strategy;
  OptimizationTrace trace;
};

inline constexpr int kDefaultSeesawIterations = 3000;
inline constexpr double kDefaultSeesawTolerance = 1e-10;

/// Alternating maximization: exact guess update, then the iterated
/// E_k <- S^{-1/2} R_k E_k R_k S^{-1/2} POVM update. A POVM update that would
/// lower the objective is replaced by a diluted one (R_k -> I + eps R_k with
/// shrinking eps) or skipped, so the history never decreases.
/// Throws kSingularOperator when S stays singular after three reseeds.
SeesawResult seesaw_optimize(const DirectionalEnsemble& ensemble, int outcomes, int max_iters, double tol,
                             RandomStream& rng);

struct RestartSummary {
  SeesawResult best;
  std::vector<double> restart_objectives;
};

/// Independent restarts with sub-seeds derived from `seed`; best objective
/// wins, ties to the lowest restart index.
RestartSummary seesaw_best_of(const DirectionalEnsemble& ensemble, int outcomes, int restarts, std::uint64_t seed,
                              int max_iters = kDefaultSeesawIterations, double tol = kDefaultSeesawTolerance);

/// Best two-outcome Stern-Gerlach strategy {P(a,+), P(a,-)} with guesses
/// {a, -a} over every axis a of `axis_grid`. Single-spin ensembles only.
double brute_force_projective_oracle(const DirectionalEnsemble& ensemble, const SphereGrid& axis_grid);

}  // namespace qnav
