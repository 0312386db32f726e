#include "qsg/harness.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <exception>
#include <fstream>
#include <map>
#include <mutex>
#include <numeric>
#include <set>
#include <thread>

#include "qsg/rng.hpp"

namespace qsg {

namespace {

const std::set<std::string> kKnownMetrics = {"w1_gauss", "dbl_gauss", "w1_semicircle", "dbl_semicircle",
                                             "tail_t"};

std::string format_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%.17g", value);
  return buffer;
}

std::string short_number(double value) {
  char buffer[64];
  std::snprintf(buffer, sizeof buffer, "%g", value);
  return buffer;
}

bool wants(const ExperimentConfig& config, const std::string& metric) {
  return std::find(config.metrics.begin(), config.metrics.end(), metric) != config.metrics.end();
}

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double residual = 0.0;  // root mean square
};

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  const auto count = static_cast<double>(x.size());
  if (x.size() < 2) throw ArgumentError("line fit needs at least two points");
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / count;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / count;
  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw ArgumentError("line fit needs distinct abscissae");
  LineFit fit;
  fit.slope = sxy / sxx;
  fit.intercept = my - fit.slope * mx;
  double ss = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double r = y[i] - (fit.intercept + fit.slope * x[i]);
    ss += r * r;
  }
  fit.residual = std::sqrt(ss / count);
  return fit;
}

// One work item per (n, replica); results are merged in index order.
struct ReplicaOutput {
  std::vector<ReportRow> rows;
  std::optional<RowError> error;
};

struct ReplicaGrid {
  std::vector<std::size_t> n_list;
  std::size_t replicas = 0;

  std::size_t size() const { return n_list.size() * replicas; }
  std::size_t n_at(std::size_t task) const { return n_list[task / replicas]; }
  std::size_t replica_at(std::size_t task) const { return task % replicas; }
};

void merge(SweepReport& report, std::vector<ReplicaOutput>& outputs) {
  for (auto& out : outputs) {
    for (auto& row : out.rows) report.rows.push_back(std::move(row));
    if (out.error) report.errors.push_back(*out.error);
  }
}

template <class Body>
std::vector<ReplicaOutput> run_replicas(const ExperimentConfig& config, const ReplicaGrid& grid, Body&& body) {
  std::vector<ReplicaOutput> outputs(grid.size());
  parallel_for(grid.size(), config.threads, [&](std::size_t task) {
    const std::size_t n = grid.n_at(task);
    const std::size_t replica = grid.replica_at(task);
    try {
      body(n, replica, outputs[task].rows);
    } catch (const std::exception& e) {
      outputs[task].rows.clear();
      outputs[task].error = RowError{n, replica, e.what()};
    }
  });
  return outputs;
}

ReportRow make_row(std::size_t n, std::size_t replica, std::string metric, double value, double slack = 0.0) {
  return ReportRow{n, replica, std::move(metric), value, slack};
}

std::string reproduce_hint(const ExperimentConfig& config, std::size_t n, std::size_t replica) {
  return "master_seed=" + std::to_string(config.master_seed) + " n=" + std::to_string(n) +
         " replica=" + std::to_string(replica) + " seed=" +
         std::to_string(replica_seed(config.master_seed, n, replica));
}

// Strictly decreasing means with the endpoints separated by one pooled standard error.
CheckResult decreasing_check(const SweepReport& report, const std::vector<std::size_t>& n_list,
                             const std::string& metric) {
  CheckResult check{metric + "_decreasing", true, ""};
  std::vector<const Aggregate*> means;
  for (std::size_t n : n_list) {
    const Aggregate* a = report.find(n, metric);
    if (a == nullptr) {
      check.passed = false;
      check.detail = "no rows for n=" + std::to_string(n);
      return check;
    }
    means.push_back(a);
  }
  std::string trail;
  for (std::size_t i = 0; i < means.size(); ++i) {
    trail += (i ? " " : "") + std::to_string(means[i]->n) + ":" + short_number(means[i]->mean);
    if (i > 0 && !(means[i]->mean < means[i - 1]->mean)) check.passed = false;
  }
  const Aggregate& first = *means.front();
  const Aggregate& last = *means.back();
  const double pooled = std::hypot(first.standard_error, last.standard_error);
  const double gap = first.mean - last.mean;
  if (!(gap >= pooled)) check.passed = false;
  check.detail = "means " + trail + "; endpoint gap " + short_number(gap) + " vs pooled se " + short_number(pooled);
  return check;
}

PiecewiseLinearFn random_bl_function(CounterRng& rng) {
  const std::size_t pieces = 2 + static_cast<std::size_t>(rng.uniform() * 8.0);
  std::vector<double> xs(pieces + 1);
  for (auto& x : xs) x = -4.0 + 8.0 * rng.uniform();
  std::sort(xs.begin(), xs.end());
  for (std::size_t i = 1; i < xs.size(); ++i) xs[i] = std::max(xs[i], xs[i - 1] + 1e-3);
  std::vector<double> ys(xs.size());
  for (auto& y : ys) y = rng.normal();
  PiecewiseLinearFn raw(xs, ys);
  const double scale = rng.uniform_open() / std::max(raw.bl_norm(), 1e-300);
  for (auto& y : ys) y *= scale;
  return PiecewiseLinearFn(std::move(xs), std::move(ys));
}

DiscreteMeasure pool_range(const std::vector<SpectralMeasure>& spectra, std::size_t begin, std::size_t end,
                           double step) {
  std::vector<SpectralMeasure> chosen(spectra.begin() + static_cast<std::ptrdiff_t>(begin),
                                      spectra.begin() + static_cast<std::ptrdiff_t>(end));
  return pooled_measure(chosen, step);
}

std::vector<SpectralMeasure> replica_spectra(const ExperimentConfig& config, std::size_t n) {
  std::vector<SpectralMeasure> spectra(config.replicas);
  parallel_for(config.replicas, config.threads, [&](std::size_t r) {
    spectra[r] = eig_dense(replica_operator(config, n, replica_seed(config.master_seed, n, r)));
  });
  return spectra;
}

}  // namespace

CouplingGeometry ModelSpec::geometry(std::size_t n) const {
  CouplingGeometry g;
  if (model == "chain") {
    g = ChainGeometry{n};
  } else if (model == "pspin") {
    g = PSpinGeometry{n, p.value_or(n)};
  } else if (model == "graph") {
    if (graph_family == "cycle") {
      g = chain_as_graph(n);
    } else if (graph_family == "complete") {
      g = complete_graph(n);
    } else if (graph_family == "edges") {
      g = GraphGeometry{n, edges};
    } else {
      throw ArgumentError("unknown graph family '" + graph_family + "'");
    }
  } else {
    throw ArgumentError("unknown model '" + model + "'");
  }
  validate(g);
  return g;
}

void ExperimentConfig::validate() const {
  if (n_list.empty()) throw ArgumentError("n_list is empty");
  if (replicas < 1) throw ArgumentError("replicas must be positive");
  if (threads < 1) throw ArgumentError("threads must be positive");
  if (!(grid_step > 0.0) || grid_step > 0.05) throw ArgumentError("grid_step must lie in (0, 0.05]");
  for (const auto& m : metrics) {
    if (!kKnownMetrics.contains(m)) throw ArgumentError("unknown metric '" + m + "'");
  }
  for (double t : t_grid) {
    if (!std::isfinite(t)) throw ArgumentError("t_grid entries must be finite");
  }
  if (R && !(*R > 0.0)) throw ArgumentError("R must be positive");
  if (law == Law::custom) CustomLawSpec::from_name(custom_law);
}

void to_json(nlohmann::json& j, const ExperimentConfig& c) {
  nlohmann::json model = {{"model", c.model.model}, {"graph_family", c.model.graph_family}};
  model["edges"] = c.model.edges;
  model["p"] = c.model.p ? nlohmann::json(*c.model.p) : nlohmann::json(nullptr);
  j = nlohmann::json{{"model", model},
                     {"law", std::string(to_string(c.law))},
                     {"custom_law", c.custom_law},
                     {"n_list", c.n_list},
                     {"replicas", c.replicas},
                     {"master_seed", c.master_seed},
                     {"t_grid", c.t_grid},
                     {"metrics", c.metrics},
                     {"output_dir", c.output_dir.string()},
                     {"threads", c.threads},
                     {"grid_step", c.grid_step},
                     {"zero_coefficients", c.zero_coefficients},
                     {"pairs", c.pairs},
                     {"f_samples", c.f_samples},
                     {"m_list", c.m_list},
                     {"R", c.R ? nlohmann::json(*c.R) : nlohmann::json(nullptr)},
                     {"g_samples", c.g_samples},
                     {"in_sample", c.in_sample},
                     {"probes", c.probes},
                     {"lanczos_iters", c.lanczos_iters}};
}

void from_json(const nlohmann::json& j, ExperimentConfig& c) {
  if (j.contains("model")) {
    const auto& m = j.at("model");
    if (m.is_string()) {
      c.model.model = m.get<std::string>();
    } else {
      c.model.model = m.value("model", c.model.model);
      c.model.graph_family = m.value("graph_family", c.model.graph_family);
      if (m.contains("edges")) c.model.edges = m.at("edges").get<decltype(c.model.edges)>();
      if (m.contains("p") && !m.at("p").is_null()) c.model.p = m.at("p").get<std::size_t>();
    }
  }
  if (j.contains("law")) c.law = parse_law(j.at("law").get<std::string>());
  c.custom_law = j.value("custom_law", c.custom_law);
  if (j.contains("n_list")) c.n_list = j.at("n_list").get<std::vector<std::size_t>>();
  c.replicas = j.value("replicas", c.replicas);
  c.master_seed = j.value("master_seed", c.master_seed);
  if (j.contains("t_grid")) c.t_grid = j.at("t_grid").get<std::vector<double>>();
  if (j.contains("metrics")) c.metrics = j.at("metrics").get<std::vector<std::string>>();
  if (j.contains("output_dir")) c.output_dir = j.at("output_dir").get<std::string>();
  c.threads = j.value("threads", c.threads);
  c.grid_step = j.value("grid_step", c.grid_step);
  c.zero_coefficients = j.value("zero_coefficients", c.zero_coefficients);
  c.pairs = j.value("pairs", c.pairs);
  c.f_samples = j.value("f_samples", c.f_samples);
  if (j.contains("m_list")) c.m_list = j.at("m_list").get<std::vector<std::size_t>>();
  if (j.contains("R") && !j.at("R").is_null()) c.R = j.at("R").get<double>();
  c.g_samples = j.value("g_samples", c.g_samples);
  c.in_sample = j.value("in_sample", c.in_sample);
  c.probes = j.value("probes", c.probes);
  c.lanczos_iters = j.value("lanczos_iters", c.lanczos_iters);
}

void SweepReport::aggregate() {
  aggregates.clear();
  std::map<std::pair<std::size_t, std::string>, std::size_t> slot;
  std::vector<std::vector<double>> values;
  for (const auto& row : rows) {
    auto [it, inserted] = slot.try_emplace({row.n, row.metric}, aggregates.size());
    if (inserted) {
      aggregates.push_back(Aggregate{row.n, row.metric});
      values.emplace_back();
    }
    values[it->second].push_back(row.value);
  }
  for (std::size_t i = 0; i < aggregates.size(); ++i) {
    const auto& v = values[i];
    Aggregate& a = aggregates[i];
    a.count = v.size();
    double sum = 0.0;
    for (double x : v) sum += x;
    a.mean = sum / static_cast<double>(v.size());
    if (v.size() > 1) {
      double ss = 0.0;
      for (double x : v) ss += (x - a.mean) * (x - a.mean);
      a.std_dev = std::sqrt(ss / static_cast<double>(v.size() - 1));
      a.standard_error = a.std_dev / std::sqrt(static_cast<double>(v.size()));
    }
  }
}

const Aggregate* SweepReport::find(std::size_t n, const std::string& metric) const {
  for (const auto& a : aggregates) {
    if (a.n == n && a.metric == metric) return &a;
  }
  return nullptr;
}

bool SweepReport::all_checks_passed() const {
  return std::all_of(checks.begin(), checks.end(), [](const CheckResult& c) { return c.passed; });
}

std::uint64_t replica_seed(std::uint64_t master, std::size_t n, std::size_t replica) {
  return derive_seed(derive_seed(master, n), replica);
}

void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body) {
  const std::size_t workers = std::max<std::size_t>(1, std::min(threads, count));
  if (workers == 1) {
    for (std::size_t i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<std::size_t> next{0};
  std::mutex failure_mutex;
  std::size_t failed_index = count;
  std::exception_ptr failure;
  auto work = [&] {
    for (std::size_t i = next++; i < count; i = next++) {
      try {
        body(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (i < failed_index) {
          failed_index = i;
          failure = std::current_exception();
        }
      }
    }
  };
  std::vector<std::jthread> pool;
  pool.reserve(workers);
  for (std::size_t w = 0; w < workers; ++w) pool.emplace_back(work);
  pool.clear();
  if (failure) std::rethrow_exception(failure);
}

HamiltonianOperator replica_operator(const ExperimentConfig& config, std::size_t n, std::uint64_t seed) {
  const CouplingGeometry geometry = config.model.geometry(n);
  const std::size_t dim = coefficient_dimension(geometry);
  if (config.zero_coefficients) {
    return HamiltonianOperator(geometry, config.law, RealVector::Zero(static_cast<Eigen::Index>(dim)));
  }
  if (config.law == Law::custom) {
    const CustomLawSpec spec = CustomLawSpec::from_name(config.custom_law);
    return build(geometry, sample_law(config.law, dim, seed, &spec));
  }
  return build(geometry, sample_law(config.law, dim, seed));
}

std::string metric_label(const std::string& base, double t) { return base + "=" + short_number(t); }

SweepReport run_distance_sweep(const ExperimentConfig& config) {
  config.validate();
  SweepReport report;
  report.experiment = "sweep";
  const ReferenceLaw gauss = ReferenceLaw::gaussian();
  const ReferenceLaw semicircle = ReferenceLaw::semicircle();
  const GridSpec grid{config.grid_step};
  const ReplicaGrid tasks{config.n_list, config.replicas};

  auto outputs = run_replicas(config, tasks, [&](std::size_t n, std::size_t r, std::vector<ReportRow>& rows) {
    if (n > kMaxDenseSites) throw SizeError("n=" + std::to_string(n) + " exceeds the dense limit");
    const SpectralMeasure mu = eig_dense(replica_operator(config, n, replica_seed(config.master_seed, n, r)));
    for (const auto& metric : config.metrics) {
      if (metric == "w1_gauss") {
        rows.push_back(make_row(n, r, metric, w1_to_law(mu, gauss)));
      } else if (metric == "w1_semicircle") {
        rows.push_back(make_row(n, r, metric, w1_to_law(mu, semicircle)));
      } else if (metric == "dbl_gauss" || metric == "dbl_semicircle") {
        const auto d = dbl_to_law(mu, metric == "dbl_gauss" ? gauss : semicircle, grid);
        rows.push_back(make_row(n, r, metric, d.value, d.slack));
      } else if (metric == "tail_t") {
        for (double t : config.t_grid) rows.push_back(make_row(n, r, metric_label("tail_t", t), tail_mass(mu, t)));
      }
    }
  });
  merge(report, outputs);
  report.aggregate();

  const bool increasing = std::is_sorted(config.n_list.begin(), config.n_list.end()) &&
                          std::adjacent_find(config.n_list.begin(), config.n_list.end()) == config.n_list.end();
  if (wants(config, "dbl_gauss") && increasing && config.n_list.size() >= 2) {
    if (config.replicas >= 50) report.checks.push_back(decreasing_check(report, config.n_list, "dbl_gauss"));
    std::vector<double> log_n;
    std::vector<double> log_mean;
    for (std::size_t n : config.n_list) {
      if (const Aggregate* a = report.find(n, "dbl_gauss"); a && a->mean > 0.0) {
        log_n.push_back(std::log(static_cast<double>(n)));
        log_mean.push_back(std::log(a->mean));
      }
    }
    if (log_n.size() >= 2) {
      const LineFit fit = fit_line(log_n, log_mean);
      FitResult result{"sweep", std::exp(fit.intercept), -fit.slope, fit.residual};
      result.details["model"] = "mean dbl_gauss = C * n^(-c)";
      report.fits.push_back(result);
    }
  }
  return report;
}

SweepReport run_concentration(const ExperimentConfig& config, std::vector<double> offsets) {
  config.validate();
  if (config.replicas < 200) throw ArgumentError("concentration needs at least 200 replicas");
  SweepReport report;
  report.experiment = "concentration";
  const ReferenceLaw gauss = ReferenceLaw::gaussian();
  const GridSpec grid{config.grid_step};
  const ReplicaGrid tasks{config.n_list, config.replicas};

  auto outputs = run_replicas(config, tasks, [&](std::size_t n, std::size_t r, std::vector<ReportRow>& rows) {
    const SpectralMeasure mu = eig_dense(replica_operator(config, n, replica_seed(config.master_seed, n, r)));
    const auto d = dbl_to_law(mu, gauss, grid);
    rows.push_back(make_row(n, r, "dbl_gauss", d.value, d.slack));
  });
  merge(report, outputs);
  report.aggregate();

  // Exceedance indicators are rows as well, so their frequencies are plain aggregates.
  std::vector<ReportRow> indicators;
  std::vector<double> x;
  std::vector<double> y;
  nlohmann::json censored = nlohmann::json::array();
  for (std::size_t n : config.n_list) {
    const Aggregate* a = report.find(n, "dbl_gauss");
    if (a == nullptr) continue;
    for (double t : offsets) {
      std::size_t hits = 0;
      std::size_t total = 0;
      for (const auto& row : report.rows) {
        if (row.n != n || row.metric != "dbl_gauss") continue;
        const bool hit = row.value >= a->mean + t;
        hits += hit ? 1 : 0;
        ++total;
        indicators.push_back(make_row(n, row.replica, metric_label("exceed_t", t), hit ? 1.0 : 0.0));
      }
      if (hits == 0) {
        censored.push_back({{"n", n}, {"t", t}});
      } else {
        x.push_back(static_cast<double>(n) * t * t);
        y.push_back(std::log(static_cast<double>(hits) / static_cast<double>(total)));
      }
    }
  }
  for (auto& row : indicators) report.rows.push_back(std::move(row));
  report.aggregate();

  CheckResult slope_check{"exceedance_slope_negative", false, ""};
  std::set<double> distinct(x.begin(), x.end());
  if (distinct.size() >= 2) {
    const LineFit fit = fit_line(x, y);
    FitResult result{"concentration", std::exp(fit.intercept), -fit.slope, fit.residual};
    result.details["model"] = "P[d >= mean + t] = C * exp(-c * n * t^2)";
    result.details["censored"] = censored;
    result.details["points"] = x.size();
    report.fits.push_back(result);
    slope_check.passed = fit.slope < 0.0;
    slope_check.detail = "slope " + short_number(fit.slope) + " over " + std::to_string(x.size()) + " points";
  } else {
    slope_check.detail = "fewer than two uncensored (n, t) points";
  }
  report.checks.push_back(slope_check);
  return report;
}

SweepReport run_lipschitz_check(const ExperimentConfig& config, std::size_t pairs, std::size_t f_samples) {
  config.validate();
  if (pairs < 1 || f_samples < 1) throw ArgumentError("pairs and f_samples must be positive");
  SweepReport report;
  report.experiment = "lipschitz";
  const DiscreteMeasure reference = discretize(ReferenceLaw::gaussian(), GridSpec{0.02});
  const ExperimentConfig pair_config = [&] {
    ExperimentConfig c = config;
    c.replicas = pairs;
    return c;
  }();
  const ReplicaGrid tasks{config.n_list, pairs};
  constexpr double kRelTol = 1e-6;

  auto outputs = run_replicas(pair_config, tasks, [&](std::size_t n, std::size_t p, std::vector<ReportRow>& rows) {
    const std::uint64_t seed = replica_seed(config.master_seed, n, p);
    const HamiltonianOperator h = replica_operator(config, n, seed);
    CounterRng rng(derive_seed(seed, 1));
    RealVector shifted = h.coefficients();
    const double step = std::pow(10.0, -3.0 * rng.uniform());
    for (Eigen::Index i = 0; i < shifted.size(); ++i) shifted[i] += step * rng.normal();
    const HamiltonianOperator h_shifted(h.geometry(), h.law(), shifted);
    const double bound = h.normalization() * (shifted - h.coefficients()).norm();

    const DiscreteMeasure mu = DiscreteMeasure::from_spectrum(eig_dense(h));
    const DiscreteMeasure mu_shifted = DiscreteMeasure::from_spectrum(eig_dense(h_shifted));
    for (std::size_t s = 0; s < f_samples; ++s) {
      const PiecewiseLinearFn f = random_bl_function(rng);
      const double gap = std::abs(mu.integrate(f) - mu_shifted.integrate(f));
      rows.push_back(make_row(n, p, "ratio_integral", bound > 0.0 ? gap / bound : 0.0));
    }
    const double gap_dbl = std::abs(dbl_discrete(mu, reference) - dbl_discrete(mu_shifted, reference));
    rows.push_back(make_row(n, p, "ratio_dbl", bound > 0.0 ? gap_dbl / bound : 0.0));
  });
  merge(report, outputs);
  report.aggregate();

  for (const std::string metric : {"ratio_integral", "ratio_dbl"}) {
    CheckResult check{metric + "_within_bound", true, ""};
    double worst = 0.0;
    std::size_t violations = 0;
    std::string first;
    for (const auto& row : report.rows) {
      if (row.metric != metric) continue;
      worst = std::max(worst, row.value);
      if (row.value > 1.0 + kRelTol) {
        if (violations++ == 0) first = "; first violation " + reproduce_hint(config, row.n, row.replica);
      }
    }
    check.passed = violations == 0 && report.errors.empty();
    check.detail = "max ratio " + short_number(worst) + ", violations " + std::to_string(violations) + first;
    report.checks.push_back(check);
  }
  return report;
}

SweepReport run_cf_check(const ExperimentConfig& config) {
  config.validate();
  std::vector<double> ts;
  for (double t : config.t_grid) {
    if (t != 0.0) ts.push_back(t);
  }
  if (ts.empty()) throw ArgumentError("t_grid has no nonzero entries");
  SweepReport report;
  report.experiment = "cf";
  const ReplicaGrid tasks{config.n_list, config.replicas};

  auto outputs = run_replicas(config, tasks, [&](std::size_t n, std::size_t r, std::vector<ReportRow>& rows) {
    const SpectralMeasure mu = eig_dense(replica_operator(config, n, replica_seed(config.master_seed, n, r)));
    for (double t : ts) {
      const Complex psi = cf_empirical(mu, t);
      rows.push_back(make_row(n, r, metric_label("cf_re_t", t), psi.real()));
      rows.push_back(make_row(n, r, metric_label("cf_im_t", t), psi.imag()));
    }
  });
  merge(report, outputs);
  report.aggregate();

  FitResult fit{"cf", 0.0, 0.0, 0.0};
  fit.details["model"] = "|psi_n(t) - exp(-t^2/2)| <= C t^2 / sqrt(n)";
  std::vector<double> stats;
  std::vector<std::string> low_power;
  for (std::size_t n : config.n_list) {
    double sup = 0.0;
    bool have = false;
    for (double t : ts) {
      const Aggregate* re = report.find(n, metric_label("cf_re_t", t));
      const Aggregate* im = report.find(n, metric_label("cf_im_t", t));
      if (re == nullptr || im == nullptr) continue;
      const double deviation = std::abs(Complex(re->mean, im->mean) - std::exp(-0.5 * t * t));
      const double se = std::hypot(re->standard_error, im->standard_error);
      if (se > 0.5 * deviation) low_power.push_back("n=" + std::to_string(n) + " t=" + short_number(t));
      const double stat = std::max(0.0, deviation - se) * std::sqrt(static_cast<double>(n)) / (t * t);
      sup = have ? std::max(sup, stat) : stat;
      have = true;
    }
    if (have) {
      stats.push_back(sup);
      fit.details["statistic"][std::to_string(n)] = sup;
    }
  }
  CheckResult stable{"cf_statistic_stable", false, ""};
  if (!stats.empty()) {
    const auto [lo, hi] = std::minmax_element(stats.begin(), stats.end());
    fit.C = *hi;
    fit.residual = *lo > 0.0 ? *hi / *lo : std::numeric_limits<double>::infinity();
    stable.passed = std::isfinite(*hi) && *lo > 0.0 && *hi <= 2.0 * *lo;
    stable.detail = "statistic range [" + short_number(*lo) + ", " + short_number(*hi) + "]";
  }
  report.fits.push_back(fit);
  report.checks.push_back(stable);
  CheckResult power{"cf_power", low_power.empty(), ""};
  for (const auto& item : low_power) power.detail += (power.detail.empty() ? "low power at " : ", ") + item;
  report.checks.push_back(power);
  return report;
}

double g_class_sup(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double R, std::size_t m) {
  if (!(R > 0.0)) throw ArgumentError("R must be positive");
  if (m == 0 || m > 2000) throw ArgumentError("m must lie in [1, 2000]");
  if (m == 1) return 0.0;
  if (m % 2 != 0) throw ArgumentError("m must be even so that 0 is a grid node");
  const double width = 4.0 * R / static_cast<double>(m);
  std::vector<double> nodes(m + 1);
  for (std::size_t k = 0; k <= m; ++k) nodes[k] = -2.0 * R + width * static_cast<double>(k);
  std::vector<double> coefficients(m + 1, 0.0);
  auto deposit = [&](const DiscreteMeasure& measure, double sign) {
    for (std::size_t i = 0; i < measure.size(); ++i) {
      const double x = measure.points()[i];
      if (x <= -2.0 * R || x >= 2.0 * R) continue;
      const double u = (x + 2.0 * R) / width;
      const auto k = std::min(static_cast<std::size_t>(u), m - 1);
      const double theta = u - static_cast<double>(k);
      coefficients[k] += sign * measure.weights()[i] * (1.0 - theta);
      coefficients[k + 1] += sign * measure.weights()[i] * theta;
    }
  };
  deposit(mu, 1.0);
  deposit(nu, -1.0);
  std::vector<double> bounds(m + 1);
  return maximize_budget_split([&](double lip) {
    std::fill(bounds.begin(), bounds.end(), 1.0 - lip);
    bounds.front() = bounds[m / 2] = bounds.back() = 0.0;
    return dbl_inner(nodes, coefficients, bounds, lip);
  });
}

DiscreteMeasure pooled_measure(const std::vector<SpectralMeasure>& spectra, double step) {
  if (spectra.empty()) throw ArgumentError("no spectra to pool");
  if (!(step > 0.0)) throw ArgumentError("bin step must be positive");
  std::map<long long, double> bins;
  const double share = 1.0 / static_cast<double>(spectra.size());
  for (const auto& s : spectra) {
    const double w = share * s.weight();
    for (double x : s.eigenvalues()) bins[std::llround(x / step)] += w;
  }
  std::vector<double> points;
  std::vector<double> weights;
  points.reserve(bins.size());
  weights.reserve(bins.size());
  double total = 0.0;
  for (const auto& [bin, w] : bins) {
    points.push_back(static_cast<double>(bin) * step);
    weights.push_back(w);
    total += w;
  }
  for (auto& w : weights) w /= total;
  return DiscreteMeasure(std::move(points), std::move(weights));
}

SweepReport run_g_class_sup(const ExperimentConfig& config, std::vector<std::size_t> m_list, std::optional<double> R) {
  config.validate();
  if (config.replicas < 2) throw ArgumentError("held-out DOS needs at least two replicas");
  for (std::size_t m : m_list) {
    if (m == 0 || m > 2000 || (m > 1 && m % 2 != 0)) throw ArgumentError("m must be 1 or even and at most 2000");
  }
  SweepReport report;
  report.experiment = "gclass";
  const std::size_t evaluated = config.replicas / 2;
  std::vector<double> fit_x;
  std::vector<double> fit_y;
  nlohmann::json bias = nlohmann::json::array();

  for (std::size_t n : config.n_list) {
    std::vector<SpectralMeasure> spectra;
    try {
      spectra = replica_spectra(config, n);
    } catch (const std::exception& e) {
      report.errors.push_back(RowError{n, 0, e.what()});
      continue;
    }
    const double radius = R.value_or(std::sqrt(static_cast<double>(n)));
    const DiscreteMeasure held_out = pool_range(spectra, evaluated, spectra.size(), 1e-12);
    const DiscreteMeasure pooled_all = pool_range(spectra, 0, spectra.size(), 1e-12);

    std::vector<std::vector<ReportRow>> per_replica(evaluated);
    parallel_for(evaluated, config.threads, [&](std::size_t r) {
      const DiscreteMeasure mu = DiscreteMeasure::from_spectrum(spectra[r]);
      CounterRng rng(derive_seed(replica_seed(config.master_seed, n, r), 2));
      for (std::size_t m : m_list) {
        per_replica[r].push_back(make_row(n, r, metric_label("gsup_m", static_cast<double>(m)),
                                          g_class_sup(mu, held_out, radius, m)));
        double sampled = 0.0;
        for (std::size_t s = 0; s < config.g_samples && m > 1; ++s) {
          const PiecewiseLinearFn g = random_g_class_member(radius, m, rng);
          sampled = std::max(sampled, mu.integrate(g) - held_out.integrate(g));
        }
        per_replica[r].push_back(make_row(n, r, metric_label("gsampled_m", static_cast<double>(m)), sampled));
        if (config.in_sample) {
          per_replica[r].push_back(make_row(n, r, metric_label("gsup_in_sample_m", static_cast<double>(m)),
                                            g_class_sup(mu, pooled_all, radius, m)));
        }
      }
    });
    for (auto& rows : per_replica) {
      for (auto& row : rows) report.rows.push_back(std::move(row));
    }
    report.aggregate();
    for (std::size_t m : m_list) {
      const Aggregate* a = report.find(n, metric_label("gsup_m", static_cast<double>(m)));
      if (a == nullptr) continue;
      fit_x.push_back(std::sqrt(static_cast<double>(m) / static_cast<double>(n)) + 4.0 * radius / static_cast<double>(m));
      fit_y.push_back(a->mean);
      if (config.in_sample) {
        const Aggregate* in = report.find(n, metric_label("gsup_in_sample_m", static_cast<double>(m)));
        bias.push_back({{"n", n}, {"m", m}, {"held_out", a->mean}, {"in_sample", in->mean}});
      }
    }
  }

  double sxx = 0.0;
  double sxy = 0.0;
  for (std::size_t i = 0; i < fit_x.size(); ++i) {
    sxx += fit_x[i] * fit_x[i];
    sxy += fit_x[i] * fit_y[i];
  }
  if (sxx > 0.0) {
    FitResult fit{"gclass", sxy / sxx, 0.0, 0.0};
    double ss = 0.0;
    for (std::size_t i = 0; i < fit_x.size(); ++i) ss += std::pow(fit_y[i] - fit.C * fit_x[i], 2);
    fit.residual = std::sqrt(ss / static_cast<double>(fit_x.size()));
    fit.details["model"] = "E sup_G = C * (sqrt(m/n) + 4R/m)";
    report.fits.push_back(fit);
  }
  if (config.in_sample) {
    // In-sample pooling shares atoms with mu_n and biases the sup downwards.
    report.checks.push_back(CheckResult{"held_out_dos", false, "in-sample DOS requested: " + bias.dump()});
  }
  return report;
}

SweepReport run_sphere_pipeline(const ExperimentConfig& config) {
  config.validate();
  if (config.law != Law::sphere) throw ArgumentError("sphere pipeline needs law = sphere");
  if (config.replicas < 2) throw ArgumentError("held-out DOS needs at least two replicas");
  SweepReport report;
  report.experiment = "sphere";
  const std::size_t evaluated = config.replicas / 2;

  for (std::size_t n : config.n_list) {
    std::vector<SpectralMeasure> spectra;
    try {
      spectra = replica_spectra(config, n);
    } catch (const std::exception& e) {
      report.errors.push_back(RowError{n, 0, e.what()});
      continue;
    }
    const DiscreteMeasure dos = pool_range(spectra, evaluated, spectra.size(), config.grid_step);
    std::vector<ReportRow> rows(evaluated);
    parallel_for(evaluated, config.threads, [&](std::size_t r) {
      const double d = dbl_discrete(DiscreteMeasure::from_spectrum(spectra[r]), dos);
      rows[r] = make_row(n, r, "dbl_dos", d, 0.5 * config.grid_step);
    });
    for (auto& row : rows) report.rows.push_back(std::move(row));
  }
  report.aggregate();

  const bool increasing = std::is_sorted(config.n_list.begin(), config.n_list.end());
  if (increasing && config.n_list.size() >= 2) report.checks.push_back(decreasing_check(report, config.n_list, "dbl_dos"));

  // Cosine surrogate against exp(-t^2/2) at N = coefficient dimension.
  FitResult cosine{"sphere_cosine_series", 0.0, 0.0, 0.0};
  cosine.details["model"] = "|series_N(t) - exp(-t^2/2)| <= C t^4 / N";
  std::vector<std::pair<std::size_t, double>> ratios;
  for (std::size_t n : config.n_list) {
    const std::size_t dim = coefficient_dimension(config.model.geometry(n));
    for (double t : config.t_grid) {
      if (t == 0.0) continue;
      const double error = std::abs(cosine_surrogate_series(dim, t) - std::exp(-0.5 * t * t));
      const double ratio = error * static_cast<double>(dim) / std::pow(t, 4);
      ratios.emplace_back(dim, ratio);
      cosine.C = std::max(cosine.C, ratio);
      cosine.details["points"].push_back({{"N", dim}, {"t", t}, {"error", error}});
    }
  }
  report.fits.push_back(cosine);
  if (!ratios.empty()) {
    // A t^4/N rate keeps the scaled error bounded as N grows.
    const auto by_dim = [](const auto& a, const auto& b) { return a.first < b.first; };
    const std::size_t smallest = std::min_element(ratios.begin(), ratios.end(), by_dim)->first;
    const std::size_t largest = std::max_element(ratios.begin(), ratios.end(), by_dim)->first;
    double small_max = 0.0;
    double large_max = 0.0;
    for (const auto& [dim, ratio] : ratios) {
      if (dim == smallest) small_max = std::max(small_max, ratio);
      if (dim == largest) large_max = std::max(large_max, ratio);
    }
    report.checks.push_back(CheckResult{"cosine_series_rate", std::isfinite(cosine.C) && large_max <= 2.0 * small_max,
                                        "scaled error " + short_number(small_max) + " at N=" +
                                            std::to_string(smallest) + ", " + short_number(large_max) +
                                            " at N=" + std::to_string(largest)});
  }
  return report;
}

SweepReport run_moments(const ExperimentConfig& config) {
  config.validate();
  SweepReport report;
  report.experiment = "moments";
  const ReplicaGrid tasks{config.n_list, config.replicas};
  auto outputs = run_replicas(config, tasks, [&](std::size_t n, std::size_t r, std::vector<ReportRow>& rows) {
    const SpectralMeasure mu = eig_dense(replica_operator(config, n, replica_seed(config.master_seed, n, r)));
    for (int k = 1; k <= 4; ++k) rows.push_back(make_row(n, r, "moment_k=" + std::to_string(k), mu.moment(k)));
  });
  merge(report, outputs);
  report.aggregate();

  for (std::size_t n : config.n_list) {
    const CouplingGeometry geometry = config.model.geometry(n);
    FitResult fit{"moments n=" + std::to_string(n), 0.0, 0.0, 0.0};
    for (int k : {2, 4}) {
      const Aggregate* a = report.find(n, "moment_k=" + std::to_string(k));
      if (a == nullptr) continue;
      ExactRational exact;
      try {
        exact = moment_exact(geometry, k, config.law);
      } catch (const std::exception& e) {
        report.errors.push_back(RowError{n, 0, std::string("moment_exact: ") + e.what()});
        continue;
      }
      const double z = a->standard_error > 0.0 ? (a->mean - exact.value()) / a->standard_error
                                               : (a->mean == exact.value() ? 0.0 : INFINITY);
      fit.details["k=" + std::to_string(k)] = {{"exact_num", exact.numerator},
                                              {"exact_den", exact.denominator},
                                              {"monte_carlo", a->mean},
                                              {"standard_error", a->standard_error}};
      if (k == 4) {
        fit.C = exact.value();
        fit.c = a->mean;
        fit.residual = z;
      }
      if (config.replicas >= 2) {
        report.checks.push_back(CheckResult{"moment_k=" + std::to_string(k) + " n=" + std::to_string(n),
                                            std::abs(z) <= 3.0, "z=" + short_number(z)});
      }
    }
    try {
      const HamiltonianOperator h = replica_operator(config, n, replica_seed(config.master_seed, n, 0));
      const StochasticMoments est =
          stochastic_moments(h, 4, config.probes, derive_seed(replica_seed(config.master_seed, n, 0), 3));
      fit.details["stochastic_replica0"] = {{"mean", est.mean}, {"standard_error", est.standard_error}};
    } catch (const std::exception& e) {
      report.errors.push_back(RowError{n, 0, std::string("stochastic_moments: ") + e.what()});
    }
    report.fits.push_back(fit);
  }
  return report;
}

SweepReport run_spectrum(const ExperimentConfig& config, bool write_files) {
  config.validate();
  SweepReport report;
  report.experiment = "spectrum";
  if (write_files) std::filesystem::create_directories(config.output_dir);
  for (std::size_t n : config.n_list) {
    std::vector<SpectralMeasure> spectra(config.replicas);
    std::vector<ReplicaOutput> outputs(config.replicas);
    parallel_for(config.replicas, config.threads, [&](std::size_t r) {
      try {
        const std::uint64_t seed = replica_seed(config.master_seed, n, r);
        const HamiltonianOperator h = replica_operator(config, n, seed);
        spectra[r] = eig_dense(h);
        auto& rows = outputs[r].rows;
        rows.push_back(make_row(n, r, "norm_dense", spectra[r].max_abs()));
        rows.push_back(make_row(n, r, "norm_lanczos",
                                lanczos_extremal(h, config.lanczos_iters, 1e-12, derive_seed(seed, 4)).value));
        rows.push_back(make_row(n, r, "moment_k=2", spectra[r].moment(2)));
      } catch (const std::exception& e) {
        outputs[r].rows.clear();
        outputs[r].error = RowError{n, r, e.what()};
      }
    });
    merge(report, outputs);
    if (write_files && std::all_of(outputs.begin(), outputs.end(), [](const auto& o) { return !o.error; })) {
      std::ofstream os(config.output_dir / ("spectra_n" + std::to_string(n) + ".csv"));
      write_spectra_csv(os, spectra);
    }
  }
  report.aggregate();
  return report;
}

void write_rows_csv(std::ostream& os, const std::vector<ReportRow>& rows) {
  os << "n,replica,metric,value,slack\n";
  for (const auto& row : rows) {
    os << row.n << ',' << row.replica << ',' << row.metric << ',' << format_number(row.value) << ','
       << format_number(row.slack) << '\n';
  }
}

void write_report(const SweepReport& report, const ExperimentConfig& config) {
  std::filesystem::create_directories(config.output_dir);
  {
    std::ofstream os(config.output_dir / "rows.csv");
    write_rows_csv(os, report.rows);
  }
  {
    std::ofstream os(config.output_dir / "aggregates.csv");
    os << "n,metric,count,mean,std,standard_error\n";
    for (const auto& a : report.aggregates) {
      os << a.n << ',' << a.metric << ',' << a.count << ',' << format_number(a.mean) << ','
         << format_number(a.std_dev) << ',' << format_number(a.standard_error) << '\n';
    }
  }
  {
    nlohmann::json fits = nlohmann::json::array();
    for (const auto& f : report.fits) {
      nlohmann::json j = {{"experiment", f.experiment}, {"C", f.C}, {"c", f.c}, {"residual", f.residual}};
      if (!f.details.empty()) j["details"] = f.details;
      fits.push_back(j);
    }
    std::ofstream(config.output_dir / "fits.json") << fits.dump(2) << '\n';
  }
  {
    nlohmann::json checks = nlohmann::json::array();
    for (const auto& c : report.checks) checks.push_back({{"name", c.name}, {"passed", c.passed}, {"detail", c.detail}});
    nlohmann::json errors = nlohmann::json::array();
    for (const auto& e : report.errors) {
      errors.push_back({{"n", e.n}, {"replica", e.replica}, {"message", e.message},
                        {"seed", replica_seed(config.master_seed, e.n, e.replica)}});
    }
    nlohmann::json meta = {{"version", kVersion}, {"experiment", report.experiment}, {"config", config},
                           {"checks", checks}, {"errors", errors}};
    std::ofstream(config.output_dir / "meta.json") << meta.dump(2) << '\n';
  }
}

}  // namespace qsg
