#include "qnav/povmopt.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "qnav/kernels.hpp"

namespace qnav {

const char* to_string(EnsembleKind kind) {
  switch (kind) {
    case EnsembleKind::kSingle: return "single";
    case EnsembleKind::kParallelPair: return "parallel";
    case EnsembleKind::kAntiParallelPair: return "antiparallel";
  }
  return "unknown";
}

DirectionalEnsemble::DirectionalEnsemble(EnsembleKind kind, SphereGrid prior) : kind_(kind), prior_(std::move(prior)) {
  if (prior_.size() == 0 || prior_.weights.size() != prior_.points.size()) {
    throw Error(ErrorCode::kConfig, "ensemble prior needs matching points and weights");
  }
  double total = 0.0;
  for (double w : prior_.weights) {
    if (w < 0.0) throw Error(ErrorCode::kConfig, "negative prior weight");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-12) throw Error(ErrorCode::kConfig, "prior weights must sum to 1");
}

StateVector DirectionalEnsemble::state(const UnitDirection& n) const {
  switch (kind_) {
    case EnsembleKind::kSingle: return bloch_to_state(n);
    case EnsembleKind::kParallelPair: return tensor(bloch_to_state(n), bloch_to_state(n));
    case EnsembleKind::kAntiParallelPair: return tensor(bloch_to_state(n), bloch_to_state(-n));
  }
  throw Error(ErrorCode::kConfig, "unknown ensemble");
}

// ---------------------------------------------------------------------------
// Moments

namespace {

EnsembleMoments zero_moments(int d) {
  EnsembleMoments m;
  m.zeroth = Operator::Zero(d, d);
  for (Operator& f : m.first) f = Operator::Zero(d, d);
  return m;
}

void accumulate(EnsembleMoments& m, const DirectionalEnsemble& ensemble, std::size_t j) {
  const UnitDirection& n = ensemble.prior().points[j];
  const Amplitudes psi = ensemble.state(n).amplitudes();
  const Operator rho = ensemble.prior().weights[j] * (psi * psi.adjoint());
  m.zeroth += rho;
  for (int a = 0; a < 3; ++a) m.first[static_cast<std::size_t>(a)] += n.vec()[a] * rho;
}

void add_into(EnsembleMoments& into, const EnsembleMoments& part) {
  into.zeroth += part.zeroth;
  for (std::size_t a = 0; a < 3; ++a) into.first[a] += part.first[a];
}

}  // namespace

EnsembleMoments ensemble_moments(const DirectionalEnsemble& ensemble) {
  // Fixed-size blocks reduced in block order: the result does not depend on
  // the number of threads.
  constexpr std::size_t kBlock = 64;
  const std::size_t points = ensemble.prior().size();
  const std::size_t blocks = (points + kBlock - 1) / kBlock;
  std::vector<EnsembleMoments> partial(blocks, zero_moments(ensemble.dim()));
  const auto nb = static_cast<long long>(blocks);
#pragma omp parallel for schedule(static)
  for (long long b = 0; b < nb; ++b) {
    const std::size_t begin = static_cast<std::size_t>(b) * kBlock;
    const std::size_t end = std::min(points, begin + kBlock);
    for (std::size_t j = begin; j < end; ++j) accumulate(partial[static_cast<std::size_t>(b)], ensemble, j);
  }
  EnsembleMoments total = zero_moments(ensemble.dim());
  for (const EnsembleMoments& p : partial) add_into(total, p);
  return total;
}

namespace serial {

EnsembleMoments ensemble_moments(const DirectionalEnsemble& ensemble) {
  EnsembleMoments total = zero_moments(ensemble.dim());
  for (std::size_t j = 0; j < ensemble.prior().size(); ++j) accumulate(total, ensemble, j);
  return total;
}

}  // namespace serial

// ---------------------------------------------------------------------------
// Objective

double mean_fidelity(const GuessedPovm& strategy, const DirectionalEnsemble& ensemble) {
  if (strategy.povm.dim() != ensemble.dim()) throw Error(ErrorCode::kDimension, "strategy and ensemble dimensions differ");
  if (strategy.guesses.size() != strategy.povm.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one guess per POVM outcome is required");
  }
  double f = 0.0;
  const SphereGrid& prior = ensemble.prior();
  for (std::size_t j = 0; j < prior.size(); ++j) {
    const std::vector<double> p = born_probabilities(ensemble.state(prior.points[j]), strategy.povm);
    double inner = 0.0;
    for (std::size_t k = 0; k < p.size(); ++k) inner += p[k] * 0.5 * (1.0 + strategy.guesses[k].dot(prior.points[j]));
    f += prior.weights[j] * inner;
  }
  return std::clamp(f, 0.0, 1.0);
}

namespace {

Operator payoff(const EnsembleMoments& m, const UnitDirection& g) {
  return Operator(0.5 * (m.zeroth + g.x() * m.first[0] + g.y() * m.first[1] + g.z() * m.first[2]));
}

double objective(const std::vector<Operator>& elements, const std::vector<UnitDirection>& guesses,
                 const EnsembleMoments& m) {
  double f = 0.0;
  for (std::size_t k = 0; k < elements.size(); ++k) f += (elements[k] * payoff(m, guesses[k])).trace().real();
  return f;
}

Operator hermitian_part(const Operator& a) { return Operator(0.5 * (a + a.adjoint())); }

// Applies f to the eigenvalues of a Hermitian matrix.
template <class F>
Operator spectral_map(const Operator& a, F&& f) {
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitian_part(a));
  Eigen::VectorXd values = es.eigenvalues();
  for (Eigen::Index i = 0; i < values.size(); ++i) values(i) = f(values(i));
  return Operator(es.eigenvectors() * values.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint());
}

// Clip tiny negative eigenvalues, then restore sum_k E_k = I exactly.
void restore_closure(std::vector<Operator>& elements) {
  const int d = static_cast<int>(elements.front().rows());
  Operator total = Operator::Zero(d, d);
  for (Operator& e : elements) {
    e = spectral_map(e, [](double x) { return x < 0.0 ? 0.0 : x; });
    total += e;
  }
  const Operator inv_sqrt = spectral_map(total, [](double x) { return 1.0 / std::sqrt(x); });
  for (Operator& e : elements) e = hermitian_part(inv_sqrt * e * inv_sqrt);
}

struct Support {
  Operator projector;  // onto the span of the ensemble states
  int rank = 0;
};

Support ensemble_support(const EnsembleMoments& m) {
  Eigen::SelfAdjointEigenSolver<Operator> es(hermitian_part(m.zeroth));
  const double top = es.eigenvalues().maxCoeff();
  Support s;
  const Eigen::Index d = m.zeroth.rows();
  s.projector = Operator::Zero(d, d);
  for (Eigen::Index i = 0; i < d; ++i) {
    if (es.eigenvalues()(i) > 1e-10 * top) {
      s.projector += es.eigenvectors().col(i) * es.eigenvectors().col(i).adjoint();
      ++s.rank;
    }
  }
  return s;
}

// One POVM update with payoff operators `r`. Returns false when S is
// singular on the relevant subspace.
bool povm_update(const std::vector<Operator>& current, const std::vector<Operator>& r, const Support& support,
                 bool restrict_to_support, std::vector<Operator>& next) {
  const int d = static_cast<int>(current.front().rows());
  Operator s = Operator::Zero(d, d);
  for (std::size_t k = 0; k < current.size(); ++k) s += r[k] * current[k] * r[k];

  Eigen::SelfAdjointEigenSolver<Operator> es(hermitian_part(s));
  const double top = es.eigenvalues().maxCoeff();
  if (!(top > 0.0)) return false;
  // Eigenvalues ascend; invert only the top `needed` of them.
  const int needed = restrict_to_support ? support.rank : d;
  Eigen::VectorXd inv_sqrt = Eigen::VectorXd::Zero(d);
  for (Eigen::Index i = d - needed; i < d; ++i) {
    const double x = es.eigenvalues()(i);
    if (!(x > 1e-14 * top)) return false;
    inv_sqrt(i) = 1.0 / std::sqrt(x);
  }
  const Operator s_inv_sqrt =
      es.eigenvectors() * inv_sqrt.cast<Complex>().asDiagonal() * es.eigenvectors().adjoint();

  const Operator complement = identity_operator(d) - support.projector;
  next.resize(current.size());
  for (std::size_t k = 0; k < current.size(); ++k) {
    next[k] = hermitian_part(s_inv_sqrt * r[k] * current[k] * r[k] * s_inv_sqrt);
    // Directions outside the ensemble span never occur; share them evenly.
    if (restrict_to_support && support.rank < d) {
      next[k] += complement / static_cast<double>(current.size());
    }
  }
  restore_closure(next);
  return true;
}

void guess_update(const std::vector<Operator>& elements, const EnsembleMoments& m,
                  std::vector<UnitDirection>& guesses) {
  for (std::size_t k = 0; k < elements.size(); ++k) {
    Vec3 b;
    for (int a = 0; a < 3; ++a) b[a] = (elements[k] * m.first[static_cast<std::size_t>(a)]).trace().real();
    if (b.norm() < 1e-15) continue;
    const UnitDirection candidate = UnitDirection::normalized(b);
    if (candidate.vec().dot(b) >= guesses[k].vec().dot(b)) guesses[k] = candidate;
  }
}

std::vector<Operator> initial_elements(const DirectionalEnsemble& ensemble, int outcomes, RandomStream& rng) {
  const int d = ensemble.dim();
  std::vector<Operator> elements;
  elements.reserve(static_cast<std::size_t>(outcomes));
  for (int k = 0; k < outcomes; ++k) {
    const UnitDirection n = UnitDirection::normalized(Vec3(rng.normal(), rng.normal(), rng.normal()));
    const Amplitudes psi = ensemble.state(n).amplitudes();
    elements.push_back(Operator(0.5 * (psi * psi.adjoint()) + (0.5 / outcomes) * identity_operator(d)));
  }
  restore_closure(elements);
  return elements;
}

}  // namespace

double mean_fidelity(const GuessedPovm& strategy, const EnsembleMoments& moments) {
  if (strategy.povm.dim() != moments.zeroth.rows()) {
    throw Error(ErrorCode::kDimension, "strategy and ensemble dimensions differ");
  }
  if (strategy.guesses.size() != strategy.povm.size()) {
    throw Error(ErrorCode::kLengthMismatch, "one guess per POVM outcome is required");
  }
  return std::clamp(objective(strategy.povm.elements(), strategy.guesses, moments), 0.0, 1.0);
}

// ---------------------------------------------------------------------------
// See-saw

SeesawResult seesaw_optimize(const DirectionalEnsemble& ensemble, int outcomes, int max_iters, double tol,
                             RandomStream& rng) {
  if (outcomes < 2) throw Error(ErrorCode::kConfig, "need at least two outcomes");
  if (max_iters < 0 || !(tol >= 0.0)) throw Error(ErrorCode::kConfig, "invalid iteration limits");

  const EnsembleMoments m = ensemble_moments(ensemble);
  const Support support = ensemble_support(m);
  const int d = ensemble.dim();
  const auto k_count = static_cast<std::size_t>(outcomes);

  constexpr int kAttempts = 3;
  for (int attempt = 0; attempt < kAttempts; ++attempt) {
    RandomStream local = attempt == 0 ? RandomStream(rng.next_u64()) : rng.derive(static_cast<std::uint64_t>(attempt));
    std::vector<Operator> elements = initial_elements(ensemble, outcomes, local);
    std::vector<UnitDirection> guesses(k_count);
    for (UnitDirection& g : guesses) {
      g = UnitDirection::normalized(Vec3(local.normal(), local.normal(), local.normal()));
    }
    guess_update(elements, m, guesses);

    OptimizationTrace trace;
    double current = objective(elements, guesses, m);
    trace.objective_history.push_back(current);
    bool singular = false;

    std::vector<Operator> r(k_count);
    std::vector<Operator> next;
    for (int it = 0; it < max_iters; ++it) {
      for (std::size_t k = 0; k < k_count; ++k) r[k] = payoff(m, guesses[k]);

      if (!povm_update(elements, r, support, true, next)) {
        singular = true;
        break;
      }
      double candidate = objective(next, guesses, m);
      if (candidate < current) {
        // Diluted steps: R_k -> I + eps R_k. Small eps is a first-order ascent.
        double scale = 0.0;
        for (const Operator& rk : r) scale = std::max(scale, rk.cwiseAbs().maxCoeff());
        bool improved = false;
        std::vector<Operator> diluted(k_count);
        for (int halving = 0; halving < 48 && !improved; ++halving) {
          const double eps = std::ldexp(16.0 / scale, -halving);
          for (std::size_t k = 0; k < k_count; ++k) diluted[k] = identity_operator(d) + eps * r[k];
          if (!povm_update(elements, diluted, support, false, next)) continue;
          candidate = objective(next, guesses, m);
          improved = candidate >= current;
        }
        if (!improved) next = elements;
      }
      if (objective(next, guesses, m) >= current) elements = next;
      guess_update(elements, m, guesses);

      const double updated = std::max(current, objective(elements, guesses, m));
      trace.objective_history.push_back(updated);
      trace.iterations = it + 1;
      const bool settled = std::abs(updated - current) <= tol * std::abs(current);
      current = updated;
      if (settled) {
        trace.converged = true;
        break;
      }
    }
    if (singular) continue;

    SeesawResult result{GuessedPovm{Povm(elements), guesses}, std::move(trace)};
    // Report the objective of the returned strategy exactly.
    result.trace.objective_history.back() = objective(result.strategy.povm.elements(), guesses, m);
    return result;
  }
  throw Error(ErrorCode::kSingularOperator, "see-saw normalizer stayed singular after 3 seeds");
}

RestartSummary seesaw_best_of(const DirectionalEnsemble& ensemble, int outcomes, int restarts, std::uint64_t seed,
                              int max_iters, double tol) {
  if (restarts < 1) throw Error(ErrorCode::kConfig, "need at least one restart");
  // SeesawResult is not default-constructible; map_trials fills optionals.
  const auto runs = map_trials(static_cast<std::size_t>(restarts), [&](std::size_t r) {
    RandomStream rng(derive_seed(seed, to_string(ensemble.kind()), r));
    return std::optional<SeesawResult>(seesaw_optimize(ensemble, outcomes, max_iters, tol, rng));
  });
  RestartSummary summary{*runs.front(), {}};
  for (const auto& run : runs) {
    summary.restart_objectives.push_back(run->trace.objective_history.back());
    if (run->trace.objective_history.back() > summary.best.trace.objective_history.back()) summary.best = *run;
  }
  return summary;
}

double brute_force_projective_oracle(const DirectionalEnsemble& ensemble, const SphereGrid& axis_grid) {
  if (ensemble.kind() != EnsembleKind::kSingle) {
    throw Error(ErrorCode::kDimension, "projective oracle is defined for single spins");
  }
  double best = 0.0;
  for (const UnitDirection& a : axis_grid.points) {
    const GuessedPovm strategy{Povm::stern_gerlach(a), {a, -a}};
    best = std::max(best, mean_fidelity(strategy, ensemble));
  }
  return best;
}

}  // namespace qnav
