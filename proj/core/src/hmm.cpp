#include "gamette/hmm.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <iterator>
#include <ostream>
#include <sstream>
#include <limits>
#include <numbers>
#include <numeric>
#include <random>

#include "gamette/error.hpp"
#include "gamette/numkit/stats.hpp"
#include "gamette/parallel.hpp"
#include "gamette/textio.hpp"

namespace gamette::hmm {

using numkit::log_sum_exp;
using numkit::Matrix;

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr double kDegenerateMass = 1e-8;

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

void check_sequences(std::span<const Sequence> sequences) {
  if (sequences.empty()) throw validation_error("hmm: no sequences");
  for (const auto& s : sequences) {
    if (s.empty()) throw validation_error("hmm: empty sequence");
    for (double x : s) {
      if (!std::isfinite(x)) throw validation_error("hmm: non-finite observation");
    }
  }
}

// Per-model constants reused across sequences.
struct LogModel {
  std::vector<double> log_pi;
  Matrix log_a;

  explicit LogModel(const HmmModel& m) : log_a(m.n_states(), m.n_states()) {
    for (double p : m.pi) log_pi.push_back(safe_log(p));
    for (std::size_t i = 0; i < m.n_states(); ++i)
      for (std::size_t j = 0; j < m.n_states(); ++j) log_a(i, j) = safe_log(m.transition(i, j));
  }
};

Matrix log_emissions(const HmmModel& model, std::span<const double> seq) {
  Matrix lb(seq.size(), model.n_states());
  for (std::size_t t = 0; t < seq.size(); ++t)
    for (std::size_t s = 0; s < model.n_states(); ++s) lb(t, s) = log_emission(model.emissions[s], seq[t]);
  return lb;
}

Matrix forward(const LogModel& lm, const Matrix& lb) {
  const std::size_t T = lb.rows();
  const std::size_t n = lb.cols();
  Matrix la(T, n);
  std::vector<double> terms(n);
  for (std::size_t s = 0; s < n; ++s) la(0, s) = lm.log_pi[s] + lb(0, s);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      for (std::size_t r = 0; r < n; ++r) terms[r] = la(t - 1, r) + lm.log_a(r, s);
      la(t, s) = log_sum_exp(terms) + lb(t, s);
    }
  }
  return la;
}

struct Accumulators {
  std::vector<double> pi_sum;
  std::vector<double> gamma_sum;
  std::vector<double> gamma_x;
  std::vector<double> gamma_xx;
  Matrix xi;
  double log_likelihood = 0.0;

  explicit Accumulators(std::size_t n)
      : pi_sum(n, 0.0), gamma_sum(n, 0.0), gamma_x(n, 0.0), gamma_xx(n, 0.0), xi(n, n, 0.0) {}
};

// Forward-backward with per-step scaling. Emissions are shifted by their
// per-step log maximum before exponentiation, so the recursion stays in range
// and the log-likelihood is recovered as the sum of log scales and shifts.
Accumulators expectation(const HmmModel& model, std::span<const Sequence> sequences) {
  const std::size_t n = model.n_states();
  Accumulators acc(n);
  const Matrix& a = model.transition;
  for (const auto& seq : sequences) {
    const std::size_t T = seq.size();
    Matrix b = log_emissions(model, seq);
    double ll = 0.0;
    for (std::size_t t = 0; t < T; ++t) {
      const auto row = b.row(t);
      const double m = *std::max_element(row.begin(), row.end());
      ll += m;
      for (double& x : row) x = std::exp(x - m);
    }
    Matrix alpha(T, n);
    std::vector<double> scale(T, 0.0);
    for (std::size_t t = 0; t < T && std::isfinite(ll); ++t) {
      double c = 0.0;
      for (std::size_t s = 0; s < n; ++s) {
        double v = 0.0;
        if (t == 0) {
          v = model.pi[s];
        } else {
          for (std::size_t r = 0; r < n; ++r) v += alpha(t - 1, r) * a(r, s);
        }
        alpha(t, s) = v * b(t, s);
        c += alpha(t, s);
      }
      if (!(c > 0.0)) {
        ll = kNegInf;
        break;
      }
      scale[t] = c;
      ll += std::log(c);
      for (std::size_t s = 0; s < n; ++s) alpha(t, s) /= c;
    }
    acc.log_likelihood += ll;
    if (!std::isfinite(ll)) continue;

    Matrix beta(T, n, 1.0);
    for (std::size_t t = T - 1; t-- > 0;) {
      for (std::size_t r = 0; r < n; ++r) {
        double v = 0.0;
        for (std::size_t s = 0; s < n; ++s) v += a(r, s) * b(t + 1, s) * beta(t + 1, s);
        beta(t, r) = v / scale[t + 1];
      }
    }
    for (std::size_t t = 0; t < T; ++t) {
      for (std::size_t s = 0; s < n; ++s) {
        const double g = alpha(t, s) * beta(t, s);
        if (t == 0) acc.pi_sum[s] += g;
        acc.gamma_sum[s] += g;
        acc.gamma_x[s] += g * seq[t];
        acc.gamma_xx[s] += g * seq[t] * seq[t];
      }
      if (t + 1 == T) continue;
      for (std::size_t r = 0; r < n; ++r) {
        for (std::size_t s = 0; s < n; ++s)
          acc.xi(r, s) += alpha(t, r) * a(r, s) * b(t + 1, s) * beta(t + 1, s) / scale[t + 1];
      }
    }
  }
  return acc;
}

struct Pooled {
  std::vector<double> sorted;
  std::vector<double> distinct;
  double stddev = 1.0;
};

Pooled pool(std::span<const Sequence> sequences) {
  Pooled p;
  for (const auto& s : sequences) p.sorted.insert(p.sorted.end(), s.begin(), s.end());
  std::sort(p.sorted.begin(), p.sorted.end());
  std::unique_copy(p.sorted.begin(), p.sorted.end(), std::back_inserter(p.distinct));
  p.stddev = std::max(numkit::population_stddev(p.sorted), kSigmaFloor);
  return p;
}

// Means come from quantiles of the distinct observed values, so a heavy tie
// such as exact zero deviations seeds one state rather than several. Restart 0
// uses mid-stratum levels; later restarts draw a level inside each stratum.
HmmModel initial_model(const Pooled& data, std::size_t n, std::uint64_t seed, bool midpoints) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> jitter(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  HmmModel m;
  m.transition = Matrix(n, n);
  const std::size_t N = data.distinct.size();
  for (std::size_t s = 0; s < n; ++s) {
    const double u = midpoints ? 0.5 : unit(rng);
    const double q = (static_cast<double>(s) + u) / static_cast<double>(n);
    const auto idx = std::min(N - 1, static_cast<std::size_t>(q * static_cast<double>(N)));
    GaussianEmission e;
    e.mean = data.distinct[idx] + 0.1 * data.stddev * jitter(rng);
    e.stddev = data.stddev;
    m.emissions.push_back(e);
  }
  double pi_total = 0.0;
  for (std::size_t s = 0; s < n; ++s) {
    m.pi.push_back(1.0 + 0.1 * unit(rng));
    pi_total += m.pi.back();
  }
  for (double& p : m.pi) p /= pi_total;
  for (std::size_t r = 0; r < n; ++r) {
    double row = 0.0;
    for (std::size_t s = 0; s < n; ++s) {
      m.transition(r, s) = 1.0 + 0.1 * unit(rng);
      row += m.transition(r, s);
    }
    for (std::size_t s = 0; s < n; ++s) m.transition(r, s) /= row;
  }
  return m;
}

HmmModel maximization(const HmmModel& previous, const Accumulators& acc, std::size_t n_sequences,
                      std::vector<std::size_t>& collapsed) {
  const std::size_t n = previous.n_states();
  HmmModel m = previous;
  collapsed.clear();
  for (std::size_t s = 0; s < n; ++s) m.pi[s] = acc.pi_sum[s] / static_cast<double>(n_sequences);
  const double pi_total = std::accumulate(m.pi.begin(), m.pi.end(), 0.0);
  for (double& p : m.pi) p /= pi_total;

  for (std::size_t r = 0; r < n; ++r) {
    double row = 0.0;
    for (std::size_t s = 0; s < n; ++s) row += acc.xi(r, s);
    if (row > 0.0) {
      for (std::size_t s = 0; s < n; ++s) m.transition(r, s) = acc.xi(r, s) / row;
    }
  }
  for (std::size_t s = 0; s < n; ++s) {
    const double w = acc.gamma_sum[s];
    if (w < kDegenerateMass) {
      collapsed.push_back(s);
      continue;
    }
    const double mu = acc.gamma_x[s] / w;
    const double var = std::max(0.0, acc.gamma_xx[s] / w - mu * mu);
    m.emissions[s].mean = mu;
    m.emissions[s].stddev = std::max(std::sqrt(var), kSigmaFloor);
  }
  return m;
}

}  // namespace

void HmmModel::validate(double tolerance) const {
  const std::size_t n = n_states();
  if (n == 0) throw validation_error("hmm model: no states");
  if (pi.size() != n || transition.rows() != n || transition.cols() != n)
    throw validation_error("hmm model: shape mismatch");
  auto check = [&](std::span<const double> row, const char* what) {
    double sum = 0.0;
    for (double p : row) {
      if (!(p >= 0.0)) throw validation_error(std::string("hmm model: negative probability in ") + what);
      sum += p;
    }
    if (std::abs(sum - 1.0) > tolerance) throw validation_error(std::string("hmm model: ") + what + " does not sum to 1");
  };
  check(pi, "pi");
  for (std::size_t r = 0; r < n; ++r) check(transition.row(r), "transition row");
  for (const auto& e : emissions) {
    if (!std::isfinite(e.mean)) throw validation_error("hmm model: non-finite mean");
    if (!(e.stddev >= kSigmaFloor * (1.0 - 1e-12))) throw validation_error("hmm model: stddev below floor");
  }
}

double log_emission(const GaussianEmission& e, double x) {
  const double z = (x - e.mean) / e.stddev;
  return -0.5 * z * z - std::log(e.stddev) - 0.5 * std::log(2.0 * std::numbers::pi);
}

double log_likelihood(const HmmModel& model, std::span<const Sequence> sequences) {
  model.validate(1e-9);
  check_sequences(sequences);
  const LogModel lm(model);
  double total = 0.0;
  for (const auto& seq : sequences) {
    const Matrix la = forward(lm, log_emissions(model, seq));
    total += log_sum_exp(la.row(seq.size() - 1));
  }
  return total;
}

FitResult fit_em_from(std::span<const Sequence> sequences, HmmModel start, double tolerance,
                      int max_iterations, std::uint64_t reseed) {
  check_sequences(sequences);
  start.validate(1e-9);
  const Pooled data = pool(sequences);
  std::mt19937_64 rng(reseed);

  FitResult out;
  HmmModel model = std::move(start);
  std::vector<std::size_t> collapsed;
  std::vector<bool> reseeded(model.n_states(), false);
  double previous = kNegInf;
  bool evaluated = false;
  for (int it = 0; it < max_iterations; ++it) {
    const Accumulators acc = expectation(model, sequences);
    out.trace.push_back(acc.log_likelihood);
    out.iterations = it + 1;
    if (it > 0 && acc.log_likelihood - previous < tolerance) {
      out.converged = true;
      out.log_likelihood = acc.log_likelihood;
      evaluated = true;
      break;
    }
    previous = acc.log_likelihood;
    model = maximization(model, acc, sequences.size(), collapsed);
    for (std::size_t s : collapsed) {
      if (reseeded[s]) {
        out.degenerate = true;
        continue;
      }
      // Reseed once on a random observation; the ascent restarts from here.
      reseeded[s] = true;
      out.reinitialized = true;
      std::uniform_int_distribution<std::size_t> pick(0, data.sorted.size() - 1);
      model.emissions[s] = {data.sorted[pick(rng)], data.stddev};
      for (std::size_t j = 0; j < model.n_states(); ++j)
        model.transition(s, j) = 1.0 / static_cast<double>(model.n_states());
      previous = kNegInf;
      out.trace_reset = out.trace.size();
    }
  }
  if (!evaluated) out.log_likelihood = log_likelihood(model, sequences);
  out.model = std::move(model);
  return out;
}

FitResult fit_em(std::span<const Sequence> sequences, const FitOptions& options) {
  check_sequences(sequences);
  if (options.n_states < 1) throw validation_error("fit_em: n_states must be >= 1");
  if (options.restarts < 1) throw validation_error("fit_em: restarts must be >= 1");
  std::size_t total = 0;
  for (const auto& s : sequences) total += s.size();
  if (total <= options.n_states * 3)
    throw validation_error("fit_em: need more than 3 observations per state");

  const Pooled data = pool(sequences);
  const auto restarts = static_cast<std::size_t>(options.restarts);
  std::vector<FitResult> results(restarts);
  parallel_for(restarts, options.jobs, [&](std::size_t r) {
    const std::uint64_t seed = options.seed + 1000003ULL * r;
    results[r] = fit_em_from(sequences, initial_model(data, options.n_states, seed, r == 0), options.tolerance,
                             options.max_iterations, seed ^ 0x9e3779b97f4a7c15ULL);
    results[r].restart = static_cast<int>(r);
  });
  std::size_t best = 0;
  for (std::size_t r = 1; r < restarts; ++r) {
    if (results[r].log_likelihood > results[best].log_likelihood) best = r;
  }
  return std::move(results[best]);
}

std::vector<std::size_t> viterbi(const HmmModel& model, std::span<const double> sequence) {
  if (sequence.empty()) throw validation_error("viterbi: empty sequence");
  const std::size_t n = model.n_states();
  const std::size_t T = sequence.size();
  const LogModel lm(model);
  const Matrix lb = log_emissions(model, sequence);
  Matrix delta(T, n);
  std::vector<std::size_t> back(T * n, 0);
  for (std::size_t s = 0; s < n; ++s) delta(0, s) = lm.log_pi[s] + lb(0, s);
  for (std::size_t t = 1; t < T; ++t) {
    for (std::size_t s = 0; s < n; ++s) {
      std::size_t arg = 0;
      double best = delta(t - 1, 0) + lm.log_a(0, s);
      for (std::size_t r = 1; r < n; ++r) {
        const double v = delta(t - 1, r) + lm.log_a(r, s);
        if (v > best) {
          best = v;
          arg = r;
        }
      }
      delta(t, s) = best + lb(t, s);
      back[t * n + s] = arg;
    }
  }
  std::vector<std::size_t> path(T);
  std::size_t last = 0;
  for (std::size_t s = 1; s < n; ++s) {
    if (delta(T - 1, s) > delta(T - 1, last)) last = s;
  }
  path[T - 1] = last;
  for (std::size_t t = T - 1; t > 0; --t) path[t - 1] = back[t * n + path[t]];
  return path;
}

double path_log_probability(const HmmModel& model, std::span<const std::size_t> path,
                            std::span<const double> sequence) {
  if (path.size() != sequence.size() || path.empty()) throw validation_error("path_log_probability: size mismatch");
  double lp = safe_log(model.pi[path[0]]) + log_emission(model.emissions[path[0]], sequence[0]);
  for (std::size_t t = 1; t < path.size(); ++t) {
    lp += safe_log(model.transition(path[t - 1], path[t])) + log_emission(model.emissions[path[t]], sequence[t]);
  }
  return lp;
}

int free_parameters(std::size_t n_states) {
  const auto n = static_cast<int>(n_states);
  return (n - 1) + n * (n - 1) + 2 * n;
}

BicSweepResult bic_sweep(std::span<const Sequence> sequences, std::span<const std::size_t> k_range,
                         int restarts, std::uint64_t seed, unsigned jobs, double tolerance,
                         int max_iterations) {
  if (k_range.empty()) throw validation_error("bic_sweep: empty k range");
  check_sequences(sequences);
  std::size_t data_size = 0;
  for (const auto& s : sequences) data_size += s.size();

  BicSweepResult out;
  bool any = false;
  for (std::size_t idx = 0; idx < k_range.size(); ++idx) {
    const std::size_t k = k_range[idx];
    BicEntry entry;
    entry.n_states = k;
    entry.free_parameters = free_parameters(k);
    entry.data_size = data_size;
    try {
      FitOptions options;
      options.n_states = k;
      options.restarts = restarts;
      options.seed = seed + 7919ULL * k;
      options.tolerance = tolerance;
      options.max_iterations = max_iterations;
      options.jobs = jobs;
      FitResult fit = fit_em(sequences, options);
      entry.log_likelihood = fit.log_likelihood;
      entry.bic = -2.0 * fit.log_likelihood + entry.free_parameters * std::log(static_cast<double>(data_size));
      if (!std::isfinite(entry.bic)) throw numeric_error("non-finite BIC");
      out.fits.emplace_back(std::move(fit));
      if (!any || entry.bic < out.entries[out.selected].bic) out.selected = idx;
      any = true;
    } catch (const Error& e) {
      entry.failed = true;
      entry.error = e.what();
      out.fits.emplace_back(std::nullopt);
    }
    out.entries.push_back(std::move(entry));
  }
  if (!any) throw numeric_error("bic_sweep: every candidate state count failed");
  return out;
}

ModeLabeling label_states(const HmmModel& model, double zero) {
  const std::size_t n = model.n_states();
  if (n == 0) throw validation_error("label_states: empty model");
  ModeLabeling out;
  out.labels.assign(n, "");
  std::size_t c = 0;
  for (std::size_t s = 1; s < n; ++s) {
    if (std::abs(model.emissions[s].mean - zero) < std::abs(model.emissions[c].mean - zero) - 1e-9) c = s;
  }
  for (std::size_t s = 0; s < n; ++s) {
    if (s != c &&
        std::abs(std::abs(model.emissions[s].mean - zero) - std::abs(model.emissions[c].mean - zero)) <= 1e-9)
      out.control_tie = true;
  }
  out.control_state = c;
  const double cm = model.emissions[c].mean;

  std::vector<std::size_t> below, above;
  for (std::size_t s = 0; s < n; ++s) {
    if (s == c) continue;
    (model.emissions[s].mean < cm ? below : above).push_back(s);
  }
  auto by_mean = [&](std::size_t a, std::size_t b) {
    if (model.emissions[a].mean != model.emissions[b].mean) return model.emissions[a].mean < model.emissions[b].mean;
    return a < b;
  };
  std::sort(below.begin(), below.end(), by_mean);
  std::sort(above.begin(), above.end(), by_mean);

  for (std::size_t i = 0; i < below.size(); ++i) {
    out.labels[below[i]] = "N" + std::to_string(below.size() - i);
    out.alphabet.push_back(out.labels[below[i]]);
  }
  out.labels[c] = "C";
  out.alphabet.push_back("C");
  for (std::size_t i = 0; i < above.size(); ++i) {
    out.labels[above[i]] = "P" + std::to_string(i + 1);
    out.alphabet.push_back(out.labels[above[i]]);
  }
  return out;
}

void write_model(std::ostream& out, const HmmModel& model, double zero) {
  model.validate(1e-9);
  const std::size_t n = model.n_states();
  out << "states " << n << '\n';
  out << "pi";
  for (double p : model.pi) out << ' ' << format_double(p);
  out << '\n';
  for (std::size_t r = 0; r < n; ++r) {
    out << "transition";
    for (std::size_t c = 0; c < n; ++c) out << ' ' << format_double(model.transition(r, c));
    out << '\n';
  }
  for (const auto& e : model.emissions) out << "emission " << format_double(e.mean) << ' ' << format_double(e.stddev) << '\n';
  out << "zero " << format_double(zero) << '\n';
  const ModeLabeling labeling = label_states(model, zero);
  out << "labels";
  for (const auto& l : labeling.labels) out << ' ' << l;
  out << '\n';
}

StoredModel read_model(std::istream& in) {
  StoredModel out;
  std::string line;
  std::size_t n = 0;
  std::vector<std::string> labels;
  bool have_zero = false;
  while (std::getline(in, line)) {
    const auto text = trim(line);
    if (text.empty() || text.front() == '#') continue;
    auto fields = split(text, ' ');
    const std::string key = fields.front();
    fields.erase(fields.begin());
    auto numbers = [&] {
      std::vector<double> v;
      for (const auto& f : fields) v.push_back(parse_double(f));
      return v;
    };
    if (key == "states") {
      if (fields.size() != 1) throw validation_error("model file: bad states line");
      n = static_cast<std::size_t>(parse_integer(fields[0], "states"));
      out.model.transition = Matrix(n, n);
    } else if (key == "pi") {
      out.model.pi = numbers();
    } else if (key == "transition") {
      const auto row = numbers();
      const std::size_t r = [&] {
        std::size_t filled = 0;
        for (std::size_t i = 0; i < n; ++i) {
          double sum = 0.0;
          for (std::size_t j = 0; j < n; ++j) sum += out.model.transition(i, j);
          if (sum > 0.0) filled = i + 1;
        }
        return filled;
      }();
      if (row.size() != n || r >= n) throw validation_error("model file: bad transition row");
      for (std::size_t c = 0; c < n; ++c) out.model.transition(r, c) = row[c];
    } else if (key == "emission") {
      const auto v = numbers();
      if (v.size() != 2) throw validation_error("model file: bad emission row");
      out.model.emissions.push_back({v[0], v[1]});
    } else if (key == "zero") {
      const auto v = numbers();
      if (v.size() != 1) throw validation_error("model file: bad zero line");
      out.zero = v[0];
      have_zero = true;
    } else if (key == "labels") {
      labels = fields;
    } else {
      throw validation_error("model file: unknown line '" + key + "'");
    }
  }
  if (n == 0 || out.model.n_states() != n || !have_zero) throw validation_error("model file: incomplete model");
  out.model.validate(1e-9);
  out.labeling = label_states(out.model, out.zero);
  if (!labels.empty() && labels != out.labeling.labels)
    throw validation_error("model file: label map does not match the emissions");
  return out;
}

}  // namespace gamette::hmm
