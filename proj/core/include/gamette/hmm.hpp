#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "gamette/numkit/matrix.hpp"

namespace gamette::hmm {

inline constexpr double kSigmaFloor = 1e-3;

struct GaussianEmission {
  double mean = 0.0;
  double stddev = 1.0;
};

/// Univariate Gaussian-emission hidden Markov model.
struct HmmModel {
  std::vector<double> pi;
  numkit::Matrix transition;  // row-stochastic
  std::vector<GaussianEmission> emissions;

  std::size_t n_states() const { return emissions.size(); }
  /// Throws unless shapes agree, pi and every row sum to 1 within `tolerance`
  /// and every stddev is at least the floor.
  void validate(double tolerance = 1e-10) const;
};

using Sequence = std::vector<double>;

double log_emission(const GaussianEmission& e, double x);

/// Sum over sequences of log P(sequence | model), by log-domain forward pass.
double log_likelihood(const HmmModel& model, std::span<const Sequence> sequences);

struct FitOptions {
  std::size_t n_states = 2;
  int restarts = 10;
  std::uint64_t seed = 0;
  double tolerance = 1e-6;
  int max_iterations = 500;
  unsigned jobs = 1;
};

struct FitResult {
  HmmModel model;
  double log_likelihood = 0.0;
  std::vector<double> trace;  // log-likelihood before each M-step of the chosen restart
  int iterations = 0;
  bool converged = false;
  int restart = 0;
  bool reinitialized = false;  // a state lost its posterior mass and was reseeded
  bool degenerate = false;     // a state collapsed again after reseeding
  std::size_t trace_reset = 0; // trace index where reseeding restarted the ascent
};

/// Multi-sequence Baum-Welch. Each restart seeds means from pooled quantiles
/// plus jitter; the restart with the highest final likelihood wins (lowest
/// index on ties). Restarts may run on `jobs` threads without changing the
/// result.
FitResult fit_em(std::span<const Sequence> sequences, const FitOptions& options);

/// Runs Baum-Welch from a given starting model (no restarts).
FitResult fit_em_from(std::span<const Sequence> sequences, HmmModel start, double tolerance = 1e-6,
                      int max_iterations = 500, std::uint64_t reseed = 0);

/// Maximum a posteriori state path; ties go to the lower state index.
std::vector<std::size_t> viterbi(const HmmModel& model, std::span<const double> sequence);

/// Joint log-probability of a state path and the observations.
double path_log_probability(const HmmModel& model, std::span<const std::size_t> path,
                            std::span<const double> sequence);

/// Free parameters of an n-state Gaussian HMM: (n-1) + n(n-1) + 2n.
int free_parameters(std::size_t n_states);

struct BicEntry {
  std::size_t n_states = 0;
  double log_likelihood = 0.0;
  int free_parameters = 0;
  std::size_t data_size = 0;
  double bic = 0.0;
  bool failed = false;
  std::string error;
};

struct BicSweepResult {
  std::vector<BicEntry> entries;
  std::size_t selected = 0;
  std::vector<std::optional<FitResult>> fits;  // parallel to entries
};

/// Fits every candidate state count and selects the BIC minimum (smaller k on
/// ties). D is the total number of scalar observations.
BicSweepResult bic_sweep(std::span<const Sequence> sequences, std::span<const std::size_t> k_range,
                         int restarts, std::uint64_t seed, unsigned jobs = 1, double tolerance = 1e-6,
                         int max_iterations = 500);

struct ModeLabeling {
  std::vector<std::string> labels;    // per state
  std::vector<std::string> alphabet;  // by emission mean: N_m..N1, C, P1..P_k
  std::size_t control_state = 0;
  bool control_tie = false;  // another state was within 1e-9 of C's distance to `zero`
};

/// C is the state whose mean lies closest to `zero`, the observation value
/// that means "no deviation". States below C get N labels (N1 nearest C),
/// states above get P labels (P1 nearest C).
ModeLabeling label_states(const HmmModel& model, double zero = 0.0);

struct StoredModel {
  HmmModel model;
  double zero = 0.0;
  ModeLabeling labeling;
};

/// Plain-text model file: state count, pi, transition rows, emission rows,
/// the no-deviation origin and the resulting label map.
void write_model(std::ostream& out, const HmmModel& model, double zero = 0.0);
StoredModel read_model(std::istream& in);

}  // namespace gamette::hmm
