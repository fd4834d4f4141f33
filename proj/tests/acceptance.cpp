// Acceptance suite: one PASS/FAIL line per criterion, nonzero exit on any failure.

#include "oracles.hpp"
#include "ptomo/estimator.hpp"
#include "ptomo/harness.hpp"
#include "ptomo/lowerbound.hpp"
#include "ptomo/overlap.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>

using namespace ptomo;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass;
  std::string detail;
};

int failures = 0;

void criterion(int id, const char* title, const std::function<Outcome()>& body) {
  const auto start = std::chrono::steady_clock::now();
  Outcome o{false, ""};
  try {
    o = body();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  if (!o.pass) ++failures;
  std::printf("[%s] C%d %s: %s (%.1fs)\n", o.pass ? "PASS" : "FAIL", id, title, o.detail.c_str(), secs);
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0, double c = 0, double d = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c, d);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream is(p, std::ios::binary);
  if (!is) throw std::runtime_error("missing " + p.string());
  std::ostringstream ss;
  ss << is.rdbuf();
  return ss.str();
}

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() / ("ptomo_acceptance_" + name);
  fs::remove_all(p);
  return p;
}

ExperimentConfig tomo_config() {
  ExperimentConfig c;
  c.kind = ExperimentKind::Tomo;
  c.state = StateSpec::random_mixed(2, 4, 2024);
  c.epsilon = 0.2;
  c.delta = 0.1;
  c.trials = 200;
  c.seed = 1;
  return c;
}

ExperimentConfig overlap_config() {
  ExperimentConfig c;
  c.kind = ExperimentKind::Overlap;
  c.state = StateSpec::ghz(6);
  c.k = 2;
  c.epsilon = 0.25;
  c.delta = 0.2;
  c.trials = 50;
  c.seed = 2;
  return c;
}

ExperimentConfig scaling_config() {
  ExperimentConfig c;
  c.kind = ExperimentKind::LowerBound;
  c.n = 1;
  c.epsilon = 0.1;
  c.delta = 0.1;
  c.trials = 4000;
  c.seed = 3;
  c.n_list = {1, 2, 4, 8, 16};
  return c;
}

}  // namespace

int main() {
  criterion(1, "exact-statistics unbiasedness", [] {
    double worst = 0.0;
    for (int n = 1; n <= 3; ++n)
      for (std::uint64_t s = 0; s < 10; ++s) {
        const DensityMatrix rho = make_state(StateSpec::random_mixed(n, 1 + static_cast<int>(s % 3), 1000 + s));
        ExactPauliAccumulator acc(n);
        for (std::uint64_t b = 0; b < basis_count(n); ++b) {
          const MeasurementBasis basis = MeasurementBasis::from_index(b, n);
          acc.accumulate_distribution(basis, outcome_distribution(rho, basis), 1.0);
        }
        worst = std::max(worst, frobenius_norm(reconstruct(acc) - rho.matrix()));
      }
    return Outcome{worst <= 1e-10, fmt("max ||sigma - rho||_2 = %.3g over 30 states", worst)};
  });

  criterion(2, "full tomography success rate at the planned budget", [] {
    const ExperimentConfig c = tomo_config();
    if (shots_per_basis(2, c.epsilon, c.delta) != 10234) return Outcome{false, "budget is not 10234"};
    const ExperimentResult r = run_experiment(c);
    const auto& s = r.summary;
    return Outcome{s.success_rate >= 0.9 && s.wilson_low >= 0.85,
                   fmt("m = 10234, rate %.3f over %.0f trials, Wilson [%.3f, %.3f]", s.success_rate,
                       static_cast<double>(s.trials), s.wilson_low, s.wilson_high)};
  });

  criterion(3, "mean 2-norm error bound", [] {
    bool ok = true;
    std::string detail;
    for (int n = 1; n <= 3; ++n)
      for (std::int64_t m : {100, 1000}) {
        const OutcomeSampler sampler(make_state(StateSpec::random_mixed(n, 2, 300 + static_cast<std::uint64_t>(n))));
        double mean = 0.0;
        for (std::uint64_t t = 0; t < 100; ++t) {
          Rng rng = Rng::substream(static_cast<std::uint64_t>(n * 10000 + m), t);
          mean += run_full_tomography(sampler, TomographyPlan{n, 0.2, 0.1, m}, rng).frobenius_error / 100;
        }
        const double bound = std::sqrt(std::pow(5.0, n) / (static_cast<double>(m) * std::pow(3.0, n)));
        ok = ok && mean <= bound;
        detail += fmt("n=%.0f m=%.0f %.4f<=%.4f; ", n, static_cast<double>(m), mean, bound);
      }
    return Outcome{ok, detail};
  });

  criterion(4, "count law", [] {
    std::int64_t mismatches = 0, checked = 0;
    for (int n = 1; n <= 4; ++n) {
      const std::int64_t m = 11 + n;
      Rng rng(40 + static_cast<std::uint64_t>(n));
      const auto r = run_full_tomography(make_state(StateSpec::random_mixed(n, 2, 41)), TomographyPlan{n, 0.2, 0.1, m}, rng);
      for (std::uint64_t q = 0; q < pauli_count(n); ++q) {
        const int w = PauliString::from_index(q, n).weight();
        std::int64_t expected = m;
        for (int i = 0; i < n - w; ++i) expected *= 3;
        mismatches += r.accumulator.count_values()[q] != expected;
        ++checked;
      }
    }
    return Outcome{mismatches == 0, fmt("%.0f words checked, %.0f mismatches", static_cast<double>(checked),
                                        static_cast<double>(mismatches))};
  });

  criterion(5, "bounded differences", [] {
    const int n = 2;
    Rng rng(50);
    const auto run = run_full_tomography(make_state(StateSpec::random_mixed(n, 3, 51)), TomographyPlan{n, 0.2, 0.1, 30},
                                         rng, {true, false});
    // mu recomputed from scratch by the per-word sign rule
    const auto recompute = [n](const std::vector<Shot>& shots) {
      std::vector<std::int64_t> mu(pauli_count(n), 0);
      for (const Shot& s : shots)
        for (std::uint64_t q = 0; q < mu.size(); ++q) {
          const PauliString word = PauliString::from_index(q, n);
          if (is_compatible(word, s.basis)) mu[q] += shot_sign(word, s);
        }
      return mu;
    };
    const auto base = recompute(run.shots);
    std::int64_t worst = 0;
    for (int p = 0; p < 100; ++p) {
      std::vector<Shot> changed = run.shots;
      Shot& s = changed[rng.uniform_index(changed.size())];
      s.outcome ^= 1U << rng.uniform_index(static_cast<std::uint64_t>(n));
      const auto mu = recompute(changed);
      for (std::size_t q = 0; q < mu.size(); ++q) worst = std::max(worst, std::abs(mu[q] - base[q]));
    }
    return Outcome{worst <= 2, fmt("max |delta mu| = %.0f over 100 perturbations", static_cast<double>(worst))};
  });

  criterion(6, "overlapping tomography, all 2-qubit marginals of GHZ(6)", [] {
    const ExperimentConfig c = overlap_config();
    const std::int64_t T = total_shots(6, 2, c.epsilon, c.delta);
    if (T != 256545) return Outcome{false, fmt("T = %.0f, expected 256545", static_cast<double>(T))};
    const ExperimentResult r = run_experiment(c);
    const auto& s = r.summary;
    return Outcome{s.success_rate >= 0.8 && s.wilson_low >= 0.66,
                   fmt("T = 256545, simultaneous rate %.3f over %.0f trials, Wilson [%.3f, %.3f]", s.success_rate,
                       static_cast<double>(s.trials), s.wilson_low, s.wilson_high)};
  });

  criterion(7, "restricted-basis coverage", [] {
    const int k = 2;
    const std::int64_t m = 20, T = 2 * m * 9, trials = 10000;
    const OutcomeSampler sampler(make_state(StateSpec::maximally_mixed(4)));
    const Subset pair({1, 3}, 4);
    std::int64_t ok = 0;
    double bound = 0.0;
    for (std::int64_t t = 0; t < trials; ++t) {
      Rng rng = Rng::substream(70, static_cast<std::uint64_t>(t));
      const auto report = coverage_check(draw_random_shots(sampler, T, rng), pair, m);
      ok += report.ok;
      bound = report.bound;
    }
    const double rate = static_cast<double>(ok) / trials;
    const double threshold = 1.0 - std::pow(3.0, k) * std::pow(2.0 / std::exp(1.0), static_cast<double>(m));
    const double se = std::sqrt(std::max(rate * (1 - rate), 1.0 / trials) / trials);
    return Outcome{rate >= threshold - 3 * se && std::abs(1.0 - bound - threshold) < 1e-12,
                   fmt("rate %.4f vs 1 - 9(2/e)^20 = %.5f (3 se = %.4f)", rate, threshold, 3 * se)};
  });

  criterion(8, "restricted shots follow exact marginals", [] {
    double worst = 0.0;
    double min_conditioned = 1e300;
    for (std::uint64_t st = 0; st < 5; ++st) {
      const DensityMatrix rho = make_state(StateSpec::random_mixed(4, 1 + static_cast<int>(st % 4), 800 + st));
      const OutcomeSampler sampler(rho);
      Rng rng(810 + st);
      const auto shots = draw_random_shots(sampler, 1000000, rng);
      for (const Subset& s : subsets_of_size(4, 2)) {
        const RestrictedStatistics stats = restricted_statistics(shots, s);
        const DensityMatrix marginal = partial_trace(rho, s);
        for (std::uint64_t b = 0; b < 9; ++b) {
          const RealVector& w = stats.outcome_weights[b];
          min_conditioned = std::min(min_conditioned, w.sum());
          const RealVector exact = outcome_distribution(marginal, MeasurementBasis::from_index(b, 2));
          worst = std::max(worst, 0.5 * (w / w.sum() - exact).cwiseAbs().sum());
        }
      }
    }
    return Outcome{worst <= 0.02 && min_conditioned >= 1e5,
                   fmt("max TV %.4f, min conditioned shots %.0f, 5 states x 6 pairs x 9 bases", worst, min_conditioned)};
  });

  criterion(9, "anti-concentration inequality", [] {
    Rng rng(90);
    const auto r = anticoncentration_check(0.1, 100, 10, 100000, rng);
    const auto pmf = oracle::binomial_pmf(100, 0.4L);
    long double exact = 0;
    for (int j = 51; j <= 100; ++j) exact += pmf[static_cast<std::size_t>(j)];
    const bool matches = std::abs(r.empirical_lhs - static_cast<double>(exact)) <= 3 * r.standard_error;
    return Outcome{r.pass && r.empirical_lhs >= r.rhs && matches,
                   fmt("lhs %.5f >= rhs %.6f; exact tail %.5f, se %.5f", r.empirical_lhs, r.rhs,
                       static_cast<double>(exact), r.standard_error)};
  });

  criterion(10, "lower-bound scaling", [] {
    const ExperimentResult r = run_experiment(scaling_config());
    bool monotone = true;
    std::string table;
    for (std::size_t i = 0; i < r.scaling.size(); ++i) {
      if (i > 0 && r.scaling[i].m_star < r.scaling[i - 1].m_star) monotone = false;
      table += fmt("m*(%.0f)=%.0f ", r.scaling[i].n, static_cast<double>(r.scaling[i].m_star));
    }
    const bool grows = r.scaling.size() == 5 && r.scaling.back().m_star > r.scaling.front().m_star;
    Rng rng(100);
    const int n = 8;
    const JointDecodeStats stats = simulate_decoding(n, 0.1, r.scaling[3].m_star, 20000, rng);
    const FactorizationCheck f = factorization_check(stats, n);
    return Outcome{monotone && grows && f.pass,
                   table + fmt("; n=8 joint %.4f vs per-coord^n %.4f (3 se = %.4f)", f.joint, f.predicted,
                               3 * f.pooled_standard_error)};
  });

  criterion(11, "byte-identical reruns", [] {
    std::vector<std::pair<std::string, ExperimentConfig>> configs = {
        {"tomo", tomo_config()}, {"overlap", overlap_config()}, {"scaling", scaling_config()}};
    configs[1].second.trials = 5;
    configs[1].second.save_estimates = true;
    std::string detail;
    bool ok = true;
    for (auto& [name, c] : configs) {
      std::string first;
      for (int run = 0; run < 2; ++run) {
        const fs::path dir = scratch(name + std::to_string(run));
        c.out = dir.string();
        c.workers = run == 0 ? 1 : 0;
        run_experiment(c);
        const std::string text = slurp(dir / "trials.jsonl") + slurp(dir / "summary.csv");
        if (run == 0) first = text;
        else if (text != first) ok = false;
        fs::remove_all(dir);
      }
      detail += name + " ";
    }
    return Outcome{ok, detail + "rerun with 1 worker and all workers"};
  });

  std::printf("%d criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
