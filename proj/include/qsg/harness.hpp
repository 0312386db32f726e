#pragma once

// Replicated experiments and their reports.
//
// Replica r at site count n draws its coefficients from
// replica_seed(master_seed, n, r); results never depend on the thread count.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "qsg/ensembles.hpp"
#include "qsg/hamiltonian.hpp"
#include "qsg/measures.hpp"
#include "qsg/spectra.hpp"

namespace qsg {

/// Which coupling geometry to build at each site count.
struct ModelSpec {
  std::string model = "chain";        // chain | graph | pspin
  std::string graph_family = "cycle"; // cycle | complete | edges (graph only)
  std::vector<std::pair<std::size_t, std::size_t>> edges;
  std::optional<std::size_t> p;       // pspin order; defaults to n

  CouplingGeometry geometry(std::size_t n) const;
};

struct ExperimentConfig {
  ModelSpec model;
  Law law = Law::gaussian_iid;
  std::string custom_law = "rademacher";
  std::vector<std::size_t> n_list = {4, 6, 8, 10};
  std::size_t replicas = 100;
  std::uint64_t master_seed = 1;
  std::vector<double> t_grid = {0.5, 1.0, 2.0, 4.0};
  std::vector<std::string> metrics = {"w1_gauss", "dbl_gauss"};
  std::filesystem::path output_dir = "out";
  std::size_t threads = 1;

  double grid_step = 2e-3;
  bool zero_coefficients = false;

  std::size_t pairs = 100;
  std::size_t f_samples = 1;
  std::vector<std::size_t> m_list = {16, 64, 256};
  std::optional<double> R;
  std::size_t g_samples = 200;
  bool in_sample = false;
  std::size_t probes = 64;
  std::size_t lanczos_iters = 300;

  void validate() const;
};

void to_json(nlohmann::json& j, const ExperimentConfig& c);
void from_json(const nlohmann::json& j, ExperimentConfig& c);

struct ReportRow {
  std::size_t n = 0;
  std::size_t replica = 0;
  std::string metric;
  double value = 0.0;
  double slack = 0.0;
};

struct Aggregate {
  std::size_t n = 0;
  std::string metric;
  std::size_t count = 0;
  double mean = 0.0;
  double std_dev = 0.0;
  double standard_error = 0.0;
};

struct FitResult {
  std::string experiment;
  double C = 0.0;
  double c = 0.0;
  double residual = 0.0;
  nlohmann::json details = nlohmann::json::object();
};

struct CheckResult {
  std::string name;
  bool passed = false;
  std::string detail;
};

struct RowError {
  std::size_t n = 0;
  std::size_t replica = 0;
  std::string message;
};

struct SweepReport {
  std::string experiment;
  std::vector<ReportRow> rows;
  std::vector<Aggregate> aggregates;
  std::vector<FitResult> fits;
  std::vector<CheckResult> checks;
  std::vector<RowError> errors;

  /// Recomputes aggregates from rows, grouped by (n, metric) in first-seen order.
  void aggregate();
  const Aggregate* find(std::size_t n, const std::string& metric) const;
  bool all_checks_passed() const;
};

std::uint64_t replica_seed(std::uint64_t master, std::size_t n, std::size_t replica);

/// Runs body(i) for i in [0, count) on up to `threads` workers.
void parallel_for(std::size_t count, std::size_t threads, const std::function<void(std::size_t)>& body);

/// Coefficients and operator for one replica under the config.
HamiltonianOperator replica_operator(const ExperimentConfig& config, std::size_t n, std::uint64_t seed);

std::string metric_label(const std::string& base, double t);

SweepReport run_distance_sweep(const ExperimentConfig& config);
SweepReport run_concentration(const ExperimentConfig& config, std::vector<double> offsets);
SweepReport run_lipschitz_check(const ExperimentConfig& config, std::size_t pairs, std::size_t f_samples);
SweepReport run_cf_check(const ExperimentConfig& config);
SweepReport run_g_class_sup(const ExperimentConfig& config, std::vector<std::size_t> m_list,
                            std::optional<double> R);
SweepReport run_sphere_pipeline(const ExperimentConfig& config);
SweepReport run_moments(const ExperimentConfig& config);
/// Dense spectra per (n, replica); writes spectra_n<k>.csv when `write_files`.
SweepReport run_spectrum(const ExperimentConfig& config, bool write_files);

/// Exact sup over the class G(R, m) of int g d(mu - nu), with g(-2R) = g(0) = g(2R) = 0.
double g_class_sup(const DiscreteMeasure& mu, const DiscreteMeasure& nu, double R, std::size_t m);

/// Pools atoms into bins of width `step`; atoms sit at bin centres.
DiscreteMeasure pooled_measure(const std::vector<SpectralMeasure>& spectra, double step);

/// rows.csv, aggregates.csv, fits.json and meta.json under config.output_dir.
void write_report(const SweepReport& report, const ExperimentConfig& config);
void write_rows_csv(std::ostream& os, const std::vector<ReportRow>& rows);

}  // namespace qsg
