#include "ptomo/harness.hpp"

#include "ptomo/estimator.hpp"
#include "ptomo/overlap.hpp"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <map>
#include <mutex>
#include <sstream>
#include <stdexcept>
#include <thread>

namespace ptomo {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view text, char sep) {
  std::vector<std::string_view> parts;
  std::size_t start = 0;
  while (true) {
    const auto pos = text.find(sep, start);
    parts.push_back(trim(text.substr(start, pos - start)));
    if (pos == std::string_view::npos) break;
    start = pos + 1;
  }
  return parts;
}

template <typename T>
T parse_value(std::string_view key, std::string_view text) {
  T value{};
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, value);
  if (ec != std::errc() || ptr != end || text.empty())
    throw std::invalid_argument("config key '" + std::string(key) + "': cannot parse '" + std::string(text) + "'");
  return value;
}

bool parse_bool(std::string_view key, std::string_view text) {
  if (text == "true" || text == "1" || text == "yes" || text == "on") return true;
  if (text == "false" || text == "0" || text == "no" || text == "off") return false;
  throw std::invalid_argument("config key '" + std::string(key) + "': expected a boolean, got '" +
                              std::string(text) + "'");
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string join_subsets(const std::vector<Subset>& subsets) {
  std::string s;
  for (std::size_t i = 0; i < subsets.size(); ++i) {
    if (i) s += ';';
    for (std::size_t j = 0; j < subsets[i].indices().size(); ++j) {
      if (j) s += ',';
      s += std::to_string(subsets[i].indices()[j]);
    }
  }
  return s;
}

template <typename Fn>
void parallel_for(std::int64_t count, int workers, Fn&& fn) {
  if (workers <= 1 || count <= 1) {
    for (std::int64_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<std::int64_t> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> pool;
  const auto threads = static_cast<int>(std::min<std::int64_t>(workers, count));
  for (int w = 0; w < threads; ++w) {
    pool.emplace_back([&] {
      for (std::int64_t i = next++; i < count; i = next++) {
        try {
          fn(i);
        } catch (...) {
          std::lock_guard lock(error_mutex);
          if (!error) error = std::current_exception();
          next = count;
        }
      }
    });
  }
  for (auto& t : pool) t.join();
  if (error) std::rethrow_exception(error);
}

std::ofstream open_output(const fs::path& path) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw std::runtime_error("cannot open '" + path.string() + "' for writing");
  return os;
}

void finish_output(std::ofstream& os, const fs::path& path) {
  os.flush();
  if (!os) throw std::runtime_error("failed writing '" + path.string() + "'");
}

json estimate_to_json(const SubsetEstimate& est) {
  json j;
  j["subset"] = est.subset.indices();
  j["sigma"] = matrix_to_json(est.sigma);
  json counts = json::object();
  for (std::size_t b = 0; b < est.per_basis_counts.size(); ++b)
    counts[MeasurementBasis::from_index(b, est.subset.size()).str()] = est.per_basis_counts[b];
  j["per_basis_counts"] = std::move(counts);
  if (est.trace_error) j["trace_error"] = *est.trace_error;
  return j;
}

int resolve_workers(int requested) {
  if (requested > 0) return requested;
  return std::max(1, static_cast<int>(std::thread::hardware_concurrency()));
}

}  // namespace

std::string_view to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::Tomo: return "tomo";
    case ExperimentKind::Overlap: return "overlap";
    case ExperimentKind::LowerBound: return "lowerbound";
    case ExperimentKind::Oracle: return "oracle";
  }
  return "unknown";
}

ExperimentKind parse_experiment_kind(std::string_view text) {
  if (text == "tomo") return ExperimentKind::Tomo;
  if (text == "overlap") return ExperimentKind::Overlap;
  if (text == "lowerbound") return ExperimentKind::LowerBound;
  if (text == "oracle") return ExperimentKind::Oracle;
  throw std::invalid_argument("unknown experiment kind '" + std::string(text) + "'");
}

void ExperimentConfig::set(std::string_view key, std::string_view raw) {
  const std::string_view value = trim(raw);
  if (key == "kind") {
    kind = parse_experiment_kind(value);
  } else if (key == "state") {
    state = StateSpec::parse(value);
  } else if (key == "n") {
    n = parse_value<int>(key, value);
  } else if (key == "k") {
    k = parse_value<int>(key, value);
  } else if (key == "epsilon") {
    epsilon = parse_value<double>(key, value);
  } else if (key == "delta") {
    delta = parse_value<double>(key, value);
  } else if (key == "trials") {
    trials = parse_value<std::int64_t>(key, value);
  } else if (key == "seed") {
    seed = parse_value<std::uint64_t>(key, value);
  } else if (key == "out") {
    out = std::string(value);
  } else if (key == "shots_per_basis") {
    shots_per_basis = parse_value<std::int64_t>(key, value);
  } else if (key == "total_shots") {
    total_shots = parse_value<std::int64_t>(key, value);
  } else if (key == "subsets") {
    subsets.clear();
    if (!value.empty()) {
      for (auto group : split(value, ';')) {
        std::vector<int> idx;
        for (auto item : split(group, ',')) idx.push_back(parse_value<int>(key, item));
        subsets.emplace_back(std::move(idx), kMaxQubits);
      }
    }
  } else if (key == "bases") {
    bases.clear();
    if (!value.empty())
      for (auto item : split(value, ',')) bases.emplace_back(item);
  } else if (key == "samples") {
    samples = parse_value<std::int64_t>(key, value);
  } else if (key == "n_list") {
    n_list.clear();
    if (!value.empty())
      for (auto item : split(value, ',')) n_list.push_back(parse_value<int>(key, item));
  } else if (key == "project_to_physical") {
    project_to_physical = parse_bool(key, value);
  } else if (key == "save_shots") {
    save_shots = parse_bool(key, value);
  } else if (key == "save_estimates") {
    save_estimates = parse_bool(key, value);
  } else if (key == "include_smaller") {
    include_smaller = parse_bool(key, value);
  } else if (key == "record_timing") {
    record_timing = parse_bool(key, value);
  } else if (key == "workers") {
    workers = parse_value<int>(key, value);
  } else {
    throw std::invalid_argument("unknown config key '" + std::string(key) + "'");
  }
}

ExperimentConfig ExperimentConfig::parse(std::istream& is) {
  ExperimentConfig config;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    std::string_view view(line);
    if (const auto hash = view.find('#'); hash != std::string_view::npos) view = view.substr(0, hash);
    view = trim(view);
    if (view.empty()) continue;
    const auto eq = view.find('=');
    if (eq == std::string_view::npos)
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": expected 'key = value'");
    try {
      config.set(trim(view.substr(0, eq)), view.substr(eq + 1));
    } catch (const std::invalid_argument& e) {
      throw std::invalid_argument("config line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return config;
}

ExperimentConfig ExperimentConfig::load(const std::string& path) {
  std::ifstream is(path);
  if (!is) throw std::runtime_error("cannot open config file '" + path + "'");
  return parse(is);
}

int ExperimentConfig::qubits() const {
  if (n) return *n;
  if (state) return state->n;
  return 2;
}

StateSpec ExperimentConfig::resolved_state() const {
  return state ? *state : StateSpec::maximally_mixed(qubits());
}

void ExperimentConfig::validate() const {
  const int q = qubits();
  if (q < 1 || q > kMaxQubits) throw std::invalid_argument("n must lie in [1, 12]");
  if (state && state->n != q)
    throw std::invalid_argument("state " + state->str() + " has " + std::to_string(state->n) + " qubits but n = " +
                                std::to_string(q));
  if (trials < 0) throw std::invalid_argument("trials must be >= 0");
  if (workers < 0) throw std::invalid_argument("workers must be >= 0");
  if (!(delta > 0.0 && delta < 1.0)) throw std::invalid_argument("delta must lie in (0, 1)");
  if (kind == ExperimentKind::LowerBound) {
    if (!(epsilon > 0.0 && epsilon < 0.5)) throw std::invalid_argument("epsilon must lie in (0, 1/2)");
  } else if (!(epsilon > 0.0 && epsilon <= 2.0)) {
    throw std::invalid_argument("epsilon must lie in (0, 2]");
  }
  if (shots_per_basis && *shots_per_basis < 1) throw std::invalid_argument("shots_per_basis must be >= 1");
  if (total_shots && *total_shots < 1) throw std::invalid_argument("total_shots must be >= 1");
  if (samples && *samples < 1) throw std::invalid_argument("samples must be >= 1");
  if (kind == ExperimentKind::Overlap && (k < 1 || k > q)) throw std::invalid_argument("k must satisfy 1 <= k <= n");
  for (const Subset& s : subsets) {
    if (s.size() == 0 || s.indices().back() >= q) throw std::invalid_argument("subset " + s.str() + " invalid for n");
    if (kind == ExperimentKind::Overlap && s.size() > k)
      throw std::invalid_argument("subset " + s.str() + " larger than k");
  }
  for (const MeasurementBasis& b : bases)
    if (b.size() != q) throw std::invalid_argument("basis " + b.str() + " length differs from n");
  for (int v : n_list)
    if (v < 1) throw std::invalid_argument("n_list entries must be >= 1");
  if (kind == ExperimentKind::LowerBound && n_list.empty() && !samples && delta / q >= 0.25)
    throw std::invalid_argument("lowerbound: default samples need delta / n < 1/4; set samples explicitly");
}

std::string ExperimentConfig::canonical() const {
  std::map<std::string, std::string> kv;
  kv["kind"] = std::string(to_string(kind));
  kv["state"] = resolved_state().str();
  kv["n"] = std::to_string(qubits());
  kv["k"] = std::to_string(k);
  kv["epsilon"] = format_double(epsilon);
  kv["delta"] = format_double(delta);
  kv["trials"] = std::to_string(trials);
  kv["shots_per_basis"] = shots_per_basis ? std::to_string(*shots_per_basis) : "";
  kv["total_shots"] = total_shots ? std::to_string(*total_shots) : "";
  kv["samples"] = samples ? std::to_string(*samples) : "";
  kv["subsets"] = join_subsets(subsets);
  std::string b;
  for (std::size_t i = 0; i < bases.size(); ++i) b += (i ? "," : "") + bases[i].str();
  kv["bases"] = b;
  std::string nl;
  for (std::size_t i = 0; i < n_list.size(); ++i) nl += (i ? "," : "") + std::to_string(n_list[i]);
  kv["n_list"] = nl;
  kv["project_to_physical"] = project_to_physical ? "true" : "false";
  kv["include_smaller"] = include_smaller ? "true" : "false";
  std::string out_text;
  for (const auto& [key, value] : kv) out_text += key + "=" + value + "\n";
  return out_text;
}

std::string ExperimentConfig::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : canonical()) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

RealVector empirical_distribution(std::span<const int> samples, int alphabet_size) {
  if (samples.empty()) throw std::invalid_argument("empirical_distribution: no samples");
  if (alphabet_size <= 0) alphabet_size = *std::max_element(samples.begin(), samples.end()) + 1;
  RealVector freq = RealVector::Zero(alphabet_size);
  for (int s : samples) {
    if (s < 0 || s >= alphabet_size) throw std::invalid_argument("empirical_distribution: symbol out of range");
    freq(s) += 1.0;
  }
  return freq / static_cast<double>(samples.size());
}

std::pair<double, double> wilson_interval(std::int64_t successes, std::int64_t trials, double z) {
  if (trials <= 0) return {kNaN, kNaN};
  const double t = static_cast<double>(trials);
  const double p = static_cast<double>(successes) / t;
  const double z2 = z * z;
  const double center = (p + z2 / (2 * t)) / (1 + z2 / t);
  const double half = z / (1 + z2 / t) * std::sqrt(p * (1 - p) / t + z2 / (4 * t * t));
  return {std::max(0.0, center - half), std::min(1.0, center + half)};
}

ExperimentSummary summarize(std::string_view kind, const std::string& config_hash, std::uint64_t seed,
                            std::span<const TrialRecord> records) {
  ExperimentSummary s;
  s.kind = std::string(kind);
  s.config_hash = config_hash;
  s.seed = seed;
  s.trials = static_cast<std::int64_t>(records.size());
  for (const auto& r : records) s.successes += r.success;
  s.success_rate = s.trials ? static_cast<double>(s.successes) / static_cast<double>(s.trials) : kNaN;
  std::tie(s.wilson_low, s.wilson_high) = wilson_interval(s.successes, s.trials);

  std::vector<std::pair<std::string, std::vector<double>>> columns;
  columns.emplace_back("success", std::vector<double>{});
  columns.emplace_back("shots", std::vector<double>{});
  if (!records.empty())
    for (const auto& [name, value] : records.front().metrics) columns.emplace_back(name, std::vector<double>{});
  for (const auto& r : records) {
    columns[0].second.push_back(r.success ? 1.0 : 0.0);
    columns[1].second.push_back(static_cast<double>(r.shots));
    for (const auto& [name, value] : r.metrics) {
      auto it = std::find_if(columns.begin(), columns.end(), [&](const auto& c) { return c.first == name; });
      if (it == columns.end()) {
        columns.emplace_back(name, std::vector<double>{});
        it = std::prev(columns.end());
      }
      it->second.push_back(value);
    }
  }
  for (const auto& [name, values] : columns) {
    MetricSummary m{name, static_cast<std::int64_t>(values.size()), kNaN, kNaN};
    if (!values.empty()) {
      double sum = 0.0;
      for (double v : values) sum += v;
      m.mean = sum / static_cast<double>(values.size());
      double ss = 0.0;
      for (double v : values) ss += (v - m.mean) * (v - m.mean);
      m.stddev = values.size() > 1 ? std::sqrt(ss / static_cast<double>(values.size() - 1)) : 0.0;
    }
    s.metrics.push_back(std::move(m));
  }
  return s;
}

json matrix_to_json(ConstMatrixRef m) {
  json rows = json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Eigen::Index j = 0; j < m.cols(); ++j) row.push_back(json::array({m(i, j).real(), m(i, j).imag()}));
    rows.push_back(std::move(row));
  }
  return rows;
}

json to_json(const TrialRecord& r, std::string_view kind, const std::string& config_hash, std::uint64_t seed) {
  json j;
  j["kind"] = kind;
  j["config_hash"] = config_hash;
  j["seed"] = seed;
  j["trial"] = r.trial;
  j["success"] = r.success;
  j["shots"] = r.shots;
  for (const auto& [name, value] : r.metrics) j[name] = value;
  if (r.wall_time_s) j["wall_time_s"] = *r.wall_time_s;
  return j;
}

void write_trials_jsonl(std::ostream& os, std::span<const TrialRecord> records, std::string_view kind,
                        const std::string& config_hash, std::uint64_t seed) {
  for (const auto& r : records) os << to_json(r, kind, config_hash, seed).dump() << '\n';
}

void write_summary_csv(std::ostream& os, const ExperimentSummary& s) {
  os << "kind,config_hash,seed,metric,count,mean,stddev,ci_low,ci_high\n";
  for (const auto& m : s.metrics) {
    os << s.kind << ',' << s.config_hash << ',' << s.seed << ',' << m.name << ',' << m.count << ','
       << format_double(m.mean) << ',' << format_double(m.stddev) << ',';
    if (m.name == "success") os << format_double(s.wilson_low) << ',' << format_double(s.wilson_high);
    else os << ',';
    os << '\n';
  }
}

void write_scaling_csv(std::ostream& os, std::span<const ScalingRow> rows) {
  os << "n,m_star,trials,success_rate,stderr\n";
  for (const auto& r : rows)
    os << r.n << ',' << r.m_star << ',' << r.trials << ',' << format_double(r.success_rate) << ','
       << format_double(r.standard_error) << '\n';
}

ExperimentSummary report_from_jsonl(std::istream& is) {
  static const std::vector<std::string> kReserved = {"kind", "config_hash", "seed", "trial", "success", "shots", "wall_time_s"};
  std::vector<TrialRecord> records;
  std::string kind, config_hash, line;
  std::uint64_t seed = 0;
  std::size_t line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    json j;
    try {
      j = json::parse(line);
      TrialRecord r;
      r.trial = j.at("trial").get<std::int64_t>();
      r.success = j.at("success").get<bool>();
      r.shots = j.at("shots").get<std::int64_t>();
      if (records.empty()) {
        kind = j.at("kind").get<std::string>();
        config_hash = j.at("config_hash").get<std::string>();
        seed = j.at("seed").get<std::uint64_t>();
      } else if (j.at("config_hash").get<std::string>() != config_hash) {
        throw std::runtime_error("mixed config hashes");
      }
      for (const auto& [key, value] : j.items()) {
        if (std::find(kReserved.begin(), kReserved.end(), key) != kReserved.end()) continue;
        r.metrics.emplace_back(key, value.is_null() ? kNaN : value.get<double>());
      }
      records.push_back(std::move(r));
    } catch (const std::exception& e) {
      throw std::runtime_error("trial record line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return summarize(kind, config_hash, seed, records);
}

json oracle_report(const StateSpec& spec, std::span<const Subset> subsets, std::span<const MeasurementBasis> bases) {
  const DensityMatrix rho = make_state(spec);
  const int n = rho.qubits();
  json j;
  j["state"] = spec.str();
  j["n"] = n;
  if (n <= 6) {
    json ex = json::object();
    const RealVector alpha = pauli_decompose(rho);
    for (std::uint64_t i = 0; i < pauli_count(n); ++i)
      ex[PauliString::from_index(i, n).str()] = alpha(static_cast<Eigen::Index>(i));
    j["expectations"] = std::move(ex);
  }
  json marginals = json::array();
  for (const Subset& s : subsets) {
    json m;
    m["subset"] = s.indices();
    m["matrix"] = matrix_to_json(partial_trace(rho, s).matrix());
    marginals.push_back(std::move(m));
  }
  j["marginals"] = std::move(marginals);
  json dists = json::array();
  for (const MeasurementBasis& b : bases) {
    const RealVector p = outcome_distribution(rho, b);
    json d;
    d["basis"] = b.str();
    json probs = json::object();
    for (Eigen::Index o = 0; o < p.size(); ++o) probs[outcome_string(static_cast<std::uint32_t>(o), n)] = p(o);
    d["probabilities"] = std::move(probs);
    dists.push_back(std::move(d));
  }
  j["distributions"] = std::move(dists);
  return j;
}

ExperimentResult run_experiment(const ExperimentConfig& config) {
  config.validate();
  const std::string hash = config.hash();
  const int n = config.qubits();
  const int workers = resolve_workers(config.workers);
  const fs::path out_dir = config.out;
  if (!config.out.empty()) {
    std::error_code ec;
    fs::create_directories(out_dir, ec);
    if (ec) throw std::runtime_error("cannot create output directory '" + config.out + "': " + ec.message());
  }
  const bool write_shots = config.save_shots && !config.out.empty();
  const bool write_estimates = config.save_estimates && !config.out.empty();
  if (write_shots) fs::create_directories(out_dir / "shots");
  if (write_estimates) fs::create_directories(out_dir / "estimates");
  const auto trial_file = [&](const char* dir, std::int64_t i, const char* ext) {
    return out_dir / dir / ("trial_" + std::to_string(i) + ext);
  };

  ExperimentResult result;
  std::vector<TrialRecord>& records = result.records;

  const auto timed = [&](std::int64_t i, auto&& body) {
    const auto start = std::chrono::steady_clock::now();
    TrialRecord r = body();
    r.trial = i;
    if (config.record_timing)
      r.wall_time_s = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    records[static_cast<std::size_t>(i)] = std::move(r);
  };

  switch (config.kind) {
    case ExperimentKind::Tomo: {
      const OutcomeSampler sampler(make_state(config.resolved_state()));
      TomographyPlan plan = TomographyPlan::for_target(n, config.epsilon, config.delta);
      if (config.shots_per_basis) plan.m = *config.shots_per_basis;
      records.resize(static_cast<std::size_t>(config.trials));
      parallel_for(config.trials, workers, [&](std::int64_t i) {
        timed(i, [&] {
          Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(i));
          const auto res = run_full_tomography(sampler, plan, rng,
                                               {.keep_shots = write_shots, .project_to_physical = config.project_to_physical});
          if (write_shots) {
            const auto path = trial_file("shots", i, ".txt");
            auto os = open_output(path);
            write_shot_stream(os, res.shots);
            finish_output(os, path);
          }
          TrialRecord r;
          r.success = res.trace_error < config.epsilon;
          r.shots = res.total_shots;
          r.metrics = {{"trace_error", res.trace_error}, {"frobenius_error", res.frobenius_error}};
          if (res.physical)
            r.metrics.emplace_back("physical_trace_error",
                                   one_norm_distance(sampler.state().matrix(), res.physical->matrix()));
          return r;
        });
      });
      break;
    }

    case ExperimentKind::Overlap: {
      const OutcomeSampler sampler(make_state(config.resolved_state()));
      OverlapPlan plan = config.subsets.empty()
                             ? OverlapPlan::all_subsets(n, config.k, config.epsilon, config.delta)
                             : OverlapPlan::partial(n, config.k, config.epsilon, config.delta, config.subsets);
      if (config.total_shots) plan.total_shots = *config.total_shots;
      plan.include_smaller = config.include_smaller;
      records.resize(static_cast<std::size_t>(config.trials));
      parallel_for(config.trials, workers, [&](std::int64_t i) {
        timed(i, [&] {
          Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(i));
          const auto res = run_overlap(sampler, plan, rng, {.keep_shots = write_shots});
          if (write_shots) {
            const auto path = trial_file("shots", i, ".txt");
            auto os = open_output(path);
            write_shot_stream(os, res.shots);
            finish_output(os, path);
          }
          if (write_estimates) {
            const auto path = trial_file("estimates", i, ".jsonl");
            auto os = open_output(path);
            for (const auto& est : res.estimates) os << estimate_to_json(est).dump() << '\n';
            for (const auto& est : res.derived) os << estimate_to_json(est).dump() << '\n';
            finish_output(os, path);
          }
          double mean_error = 0.0;
          for (const auto& est : res.estimates) mean_error += *est.trace_error;
          mean_error /= static_cast<double>(res.estimates.size());
          TrialRecord r;
          r.success = res.all_within_epsilon;
          r.shots = plan.total_shots;
          r.metrics = {{"max_trace_error", res.max_trace_error}, {"mean_trace_error", mean_error}};
          return r;
        });
      });
      break;
    }

    case ExperimentKind::LowerBound: {
      if (!config.n_list.empty()) {
        Rng rng(config.seed);
        result.scaling = scaling_experiment(config.n_list, config.epsilon, config.delta, config.trials, rng);
        for (std::size_t i = 0; i < result.scaling.size(); ++i) {
          const auto& row = result.scaling[i];
          TrialRecord r;
          r.trial = static_cast<std::int64_t>(i);
          r.success = row.success_rate >= 1.0 - config.delta;
          r.shots = row.m_star;
          r.metrics = {{"n", static_cast<double>(row.n)},
                       {"m_star", static_cast<double>(row.m_star)},
                       {"success_rate", row.success_rate},
                       {"stderr", row.standard_error}};
          records.push_back(std::move(r));
        }
        if (!config.out.empty()) {
          const auto path = out_dir / "scaling.csv";
          auto os = open_output(path);
          write_scaling_csv(os, result.scaling);
          finish_output(os, path);
        }
        break;
      }
      const std::int64_t m = config.samples ? *config.samples : required_samples_single(config.epsilon, config.delta / n);
      records.resize(static_cast<std::size_t>(config.trials));
      parallel_for(config.trials, workers, [&](std::int64_t i) {
        timed(i, [&] {
          Rng rng = Rng::substream(config.seed, static_cast<std::uint64_t>(i));
          const JointDecodeStats stats = simulate_decoding(n, config.epsilon, m, 1, rng);
          TrialRecord r;
          r.success = stats.joint_successes == 1;
          r.shots = m;
          r.metrics = {{"coordinate_success_rate", stats.coordinate_rate(n)}};
          return r;
        });
      });
      break;
    }

    case ExperimentKind::Oracle: {
      result.oracle = oracle_report(config.resolved_state(), config.subsets, config.bases);
      if (!config.out.empty()) {
        const auto path = out_dir / "oracle.json";
        auto os = open_output(path);
        os << result.oracle.dump(2) << '\n';
        finish_output(os, path);
      }
      break;
    }
  }

  result.summary = summarize(to_string(config.kind), hash, config.seed, records);
  if (!config.out.empty()) {
    const auto trials_path = out_dir / "trials.jsonl";
    auto ts = open_output(trials_path);
    write_trials_jsonl(ts, records, to_string(config.kind), hash, config.seed);
    finish_output(ts, trials_path);
    const auto summary_path = out_dir / "summary.csv";
    auto ss = open_output(summary_path);
    write_summary_csv(ss, result.summary);
    finish_output(ss, summary_path);
  }
  return result;
}

}  // namespace ptomo
