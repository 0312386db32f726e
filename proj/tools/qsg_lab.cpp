// qsg_lab: replicated spectral experiments on random Pauli Hamiltonians.

#include <cstdio>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "qsg/harness.hpp"

namespace {

struct GlobalOptions {
  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::size_t> threads;
  std::optional<std::size_t> replicas;
  std::vector<std::size_t> n_list;
  std::string law;
  std::string model;
  std::vector<double> t_grid;
  std::vector<std::string> metrics;
};

qsg::ExperimentConfig load_config(const GlobalOptions& g) {
  qsg::ExperimentConfig config;
  if (!g.config_path.empty()) {
    std::ifstream in(g.config_path);
    if (!in) throw qsg::ArgumentError("cannot open config '" + g.config_path + "'");
    config = nlohmann::json::parse(in).get<qsg::ExperimentConfig>();
  }
  if (g.seed) config.master_seed = *g.seed;
  if (g.out) config.output_dir = *g.out;
  if (g.threads) config.threads = *g.threads;
  if (g.replicas) config.replicas = *g.replicas;
  if (!g.n_list.empty()) config.n_list = g.n_list;
  if (!g.law.empty()) config.law = qsg::parse_law(g.law);
  if (!g.model.empty()) config.model.model = g.model;
  if (!g.t_grid.empty()) config.t_grid = g.t_grid;
  if (!g.metrics.empty()) config.metrics = g.metrics;
  config.validate();
  return config;
}

int finish(const qsg::SweepReport& report, const qsg::ExperimentConfig& config) {
  qsg::write_report(report, config);
  std::printf("%s: %zu rows, %zu errors -> %s\n", report.experiment.c_str(), report.rows.size(),
              report.errors.size(), config.output_dir.string().c_str());
  for (const auto& fit : report.fits) {
    std::printf("fit %s: C=%.6g c=%.6g residual=%.3g\n", fit.experiment.c_str(), fit.C, fit.c, fit.residual);
  }
  for (const auto& check : report.checks) {
    std::printf("%s %s: %s\n", check.passed ? "PASS" : "FAIL", check.name.c_str(), check.detail.c_str());
  }
  for (const auto& error : report.errors) {
    std::fprintf(stderr, "error n=%zu replica=%zu: %s\n", error.n, error.replica, error.message.c_str());
  }
  return report.all_checks_passed() ? 0 : 3;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Spectral statistics of random Pauli Hamiltonians"};
  app.set_version_flag("--version", std::string(qsg::kVersion));
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config_path, "JSON experiment config")->check(CLI::ExistingFile);
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--out", g.out, "Output directory");
  app.add_option("--threads", g.threads, "Worker threads")->check(CLI::PositiveNumber);
  app.add_option("--replicas", g.replicas, "Replicas per site count")->check(CLI::PositiveNumber);
  app.add_option("--n", g.n_list, "Site counts")->delimiter(',');
  app.add_option("--law", g.law, "Coefficient law: gaussian_iid, sphere or custom");
  app.add_option("--model", g.model, "Coupling geometry: chain, graph or pspin");
  app.add_option("--t", g.t_grid, "t grid")->delimiter(',');
  app.add_option("--metrics", g.metrics, "Distance metrics")->delimiter(',');

  auto* spectrum = app.add_subcommand("spectrum", "Dense spectra to spectra_n<k>.csv plus norm rows");
  auto* sweep = app.add_subcommand("sweep", "Distances of spectral measures to reference laws");
  auto* concentration = app.add_subcommand("concentration", "Exceedance frequencies of d_BL around its mean");
  std::vector<double> offsets = {0.005, 0.01, 0.02, 0.03};
  concentration->add_option("--offsets", offsets, "Offsets above the mean")->delimiter(',');
  auto* lipschitz = app.add_subcommand("lipschitz", "Lipschitz dependence of spectral integrals on coefficients");
  std::size_t pairs = 0;
  std::size_t f_samples = 0;
  lipschitz->add_option("--pairs", pairs, "Coefficient pairs per n");
  lipschitz->add_option("--f-samples", f_samples, "Test functions per pair");
  auto* cf = app.add_subcommand("cf", "Characteristic function against exp(-t^2/2)");
  auto* gclass = app.add_subcommand("gclass", "Sup over the piecewise-linear test class");
  std::vector<std::size_t> m_list;
  std::optional<double> radius;
  bool in_sample = false;
  gclass->add_option("--m", m_list, "Grid sizes")->delimiter(',');
  gclass->add_option("--R", radius, "Half-width R; the grid covers [-2R, 2R]");
  gclass->add_flag("--in-sample", in_sample, "Pool the DOS from the evaluated replicas too");
  auto* sphere = app.add_subcommand("sphere", "Spherical model against its held-out DOS");
  auto* moments = app.add_subcommand("moments", "Exact, Monte Carlo and stochastic moments");
  std::optional<std::size_t> probes;
  moments->add_option("--probes", probes, "Rademacher probes");

  CLI11_PARSE(app, argc, argv);

  try {
    qsg::ExperimentConfig config = load_config(g);
    if (spectrum->parsed()) return finish(qsg::run_spectrum(config, true), config);
    if (sweep->parsed()) return finish(qsg::run_distance_sweep(config), config);
    if (concentration->parsed()) return finish(qsg::run_concentration(config, offsets), config);
    if (lipschitz->parsed()) {
      if (pairs) config.pairs = pairs;
      if (f_samples) config.f_samples = f_samples;
      return finish(qsg::run_lipschitz_check(config, config.pairs, config.f_samples), config);
    }
    if (cf->parsed()) return finish(qsg::run_cf_check(config), config);
    if (gclass->parsed()) {
      if (!m_list.empty()) config.m_list = m_list;
      if (radius) config.R = radius;
      config.in_sample = config.in_sample || in_sample;
      return finish(qsg::run_g_class_sup(config, config.m_list, config.R), config);
    }
    if (sphere->parsed()) {
      if (g.law.empty() && g.config_path.empty()) config.law = qsg::Law::sphere;
      return finish(qsg::run_sphere_pipeline(config), config);
    }
    if (moments->parsed()) {
      if (probes) config.probes = *probes;
      return finish(qsg::run_moments(config), config);
    }
  } catch (const std::invalid_argument& e) {
    std::fprintf(stderr, "qsg_lab: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "qsg_lab: %s\n", e.what());
    return 1;
  }
  return 0;
}
