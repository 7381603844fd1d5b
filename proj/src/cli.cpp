#include "rmps/cli.hpp"

#include <charconv>
#include <cmath>
#include <cstdlib>
#include <iomanip>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "rmps/config.hpp"
#include "rmps/ensemble.hpp"
#include "rmps/io.hpp"
#include "rmps/mps.hpp"
#include "rmps/oracle.hpp"
#include "rmps/rng.hpp"
#include "rmps/version.hpp"

namespace rmps {
namespace {

constexpr Index kVerifyMaxSites = 12;

struct Overrides {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<unsigned> threads;
  std::optional<std::string> out;
  std::optional<std::string> sigma_mode;
};

template <typename Int>
std::optional<Int> env_integer(const char* name) {
  const char* raw = std::getenv(name);
  if (raw == nullptr || *raw == '\0') return std::nullopt;
  Int value{};
  const std::string text(raw);
  const auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), value);
  if (ec != std::errc() || ptr != text.data() + text.size())
    throw ConfigError(std::string(name) + ": expected an integer, got '" + text + "'");
  return value;
}

// Precedence for seed and threads: flag, then environment, then config file,
// then the default.
RunConfig resolve(const Overrides& o) {
  RunConfig rc = load_run_config(o.config);
  auto& c = rc.sampler;
  if (o.seed)
    c.seed = *o.seed;
  else if (auto env = env_integer<std::uint64_t>("RMPS_SEED"))
    c.seed = *env;
  if (o.threads)
    rc.threads = *o.threads;
  else if (auto env = env_integer<unsigned>("RMPS_THREADS"))
    rc.threads = *env;
  if (rc.threads && *rc.threads == 0) throw ConfigError("threads: must be >= 1");
  if (o.out) rc.output_dir = *o.out;
  if (o.sigma_mode) {
    c.sigma_mode = parse_sigma_mode(*o.sigma_mode);
    if (c.sigma_mode == SigmaMode::fixed && !c.sigma) throw ConfigError("sigma-mode: fixed needs sampler.sigma");
  }
  c.validate();
  return rc;
}

unsigned threads_of(const RunConfig& rc) { return rc.threads.value_or(default_threads()); }

void prepare_output(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error("cannot create output directory " + dir.string() + ": " + ec.message());
}

void add_common(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config, "INI run configuration")->required()->check(CLI::ExistingFile);
  cmd->add_option("--seed", o.seed, "master seed (overrides RMPS_SEED and the config)");
  cmd->add_option("--threads", o.threads, "worker threads (overrides RMPS_THREADS and the config)");
  cmd->add_option("-o,--out", o.out, "output directory");
  cmd->add_option("--sigma-mode", o.sigma_mode, "sigma choice: bound, paper, paper-coeff");
}

int cmd_sample(const Overrides& o, std::ostream& out) {
  const RunConfig rc = resolve(o);
  prepare_output(rc.output_dir);
  const auto result = run_ensemble(rc.sampler, {.magnetization = true, .correlations = {}}, threads_of(rc));
  write_file_atomic(rc.output_dir / "trace.csv", trace_table(result).str());
  write_file_atomic(rc.output_dir / "histogram.csv", histogram_table(result).str());
  write_file_atomic(rc.output_dir / "fits.csv", fits_table(result.fits).str());

  nlohmann::json extra;
  if (result.magnetization)
    extra["m_z"] = {{"mean", result.magnetization->mean},
                    {"stderr", result.magnetization->standard_error ? nlohmann::json(*result.magnetization->standard_error)
                                                                    : nlohmann::json(nullptr)}};
  write_file_atomic(rc.output_dir / "run.json", run_metadata_json(result, "sample", extra.dump()));

  for (const auto& w : result.warnings) out << "warning: " << w << "\n";
  out << "sigma " << format_double(result.sigma) << ", " << result.samples.size() - static_cast<std::size_t>(result.failed)
      << " samples ok, " << result.failed << " failed\n";
  for (const auto& f : result.fits)
    out << "k=" << f.k << " mean " << format_double(f.energy.mean) << " variance " << format_double(f.energy.variance)
        << "\n";
  out << "wrote " << rc.output_dir.string() << "\n";
  return kExitOk;
}

int cmd_sweep(const Overrides& o, const std::string& grid_spec, const std::optional<std::string>& corr_spec,
              std::ostream& out) {
  const RunConfig rc = resolve(o);
  const auto grid = parse_grid(grid_spec);
  std::vector<Index> distances;
  if (corr_spec) {
    distances = parse_index_list(*corr_spec);
    for (Index j : distances)
      if (j >= rc.sampler.model.sites) throw ConfigError("corr: distance " + std::to_string(j) + " >= N");
  }
  prepare_output(rc.output_dir);
  const auto curve = magnetization_curve(
      rc.sampler, grid, threads_of(rc),
      [&](const CurvePoint& p) {
        out << "h=" << format_double(p.h) << " m_z " << format_double(p.m_z.mean) << "\n" << std::flush;
      },
      distances);
  write_file_atomic(rc.output_dir / "curve.csv", curve_table(curve).str());
  if (!distances.empty()) {
    for (const auto& p : curve) {
      std::vector<CorrelationPoint> profile;
      for (const auto& [j, est] : p.run.correlations) profile.push_back({j, est});
      const std::string name = curve.size() == 1 ? "corr.csv" : "corr_h" + format_double(p.h) + ".csv";
      write_file_atomic(rc.output_dir / name, correlation_table(profile).str());
    }
  }
  nlohmann::json meta = nlohmann::json::parse(run_metadata_json(curve.front().run, "sweep"));
  meta["h_grid"] = grid;
  meta["seed_per_point"] = "derive_seed(seed, grid_index)";
  Index failed = 0;
  double wall = 0.0;
  for (const auto& p : curve) {
    failed += p.run.failed;
    wall += p.run.wall_seconds;
  }
  meta["failed_samples"] = failed;
  meta["wall_seconds"] = wall;
  meta.erase("failures");
  write_file_atomic(rc.output_dir / "run.json", meta.dump(2) + "\n");
  out << "wrote " << rc.output_dir.string() << "\n";
  return kExitOk;
}

struct Check {
  std::string name;
  std::string status;  // pass, FAIL or skipped
  std::string detail;
};

int cmd_verify(const Overrides& o, std::ostream& out) {
  const RunConfig rc = resolve(o);
  const auto& c = rc.sampler;
  if (c.model.sites > kVerifyMaxSites)
    throw TooLarge("verify: N=" + std::to_string(c.model.sites) + " exceeds the dense cap; verify needs N <= " +
                   std::to_string(kVerifyMaxSites));
  prepare_output(rc.output_dir);
  std::vector<Check> checks;
  const double energy = c.target_energy();
  const double sigma = c.resolved_sigma();
  const auto spectrum = diagonalize(c.model);

  {
    SamplerConfig exact = c;
    exact.chi = Index(1) << (c.model.sites / 2);
    exact.compress_tol = 1e-12;
    exact.iterations = std::max(1, std::min(c.iterations, 100));
    exact.record_every = 1;
    exact.checkpoints.clear();
    exact.track_truncation = false;
    const Sampler sampler(exact);
    double worst = 0.0;
    const int n = std::min(c.samples, 3);
    for (int s = 0; s < n; ++s) {
      const auto outcome = sampler.run(static_cast<std::uint64_t>(s));
      if (outcome.failed) throw NumericalFailure("verify: sample failed: " + outcome.failure);
      auto stream = derive_stream(exact.seed, static_cast<std::uint64_t>(s));
      const auto initial = to_dense(random_mps<Complex>(stream, exact.model.sites, 2, exact.chi));
      const auto replay = dense_power_replay(initial, exact.model, energy, sigma, exact.iterations);
      for (const auto& r : outcome.trace.records)
        if (r.k > 0) worst = std::max(worst, std::abs(r.energy - replay.energies[static_cast<std::size_t>(r.k - 1)]));
    }
    std::ostringstream d;
    d << n << " samples, chi=" << exact.chi << ", " << exact.iterations << " iterations, max |dE| = " << worst
      << " (tolerance 1e-8)";
    checks.push_back({"dense replay agreement", worst <= 1e-8 ? "pass" : "FAIL", d.str()});
  }

  if (c.samples >= 2) {
    const auto result = run_ensemble(c, {.magnetization = true, .correlations = {1}}, threads_of(rc));
    auto compare = [&](const std::string& name, const Estimate& e, double oracle) {
      const double se = e.weighted_standard_error.value_or(0.0);
      const double diff = std::abs(e.weighted_mean - oracle);
      std::ostringstream d;
      d << "ensemble " << e.weighted_mean << " +- " << se << ", oracle " << oracle << ", |diff| = " << diff
        << " (" << (se > 0 ? diff / se : 0.0) << " standard errors, limit 3)";
      checks.push_back({name, diff <= 3.0 * se + 1e-12 ? "pass" : "FAIL", d.str()});
    };
    compare("filtered average m_z", *result.magnetization,
            filtered_average(spectrum, energy, sigma, c.iterations, magnetization_diagonal(c.model.sites)));
    compare("filtered average phi(1)", result.correlations.front().second,
            filtered_average(spectrum, energy, sigma, c.iterations, zz_diagonal(c.model.sites, 1)));
  } else {
    checks.push_back({"filtered average m_z", "skipped", "needs at least 2 samples"});
  }

  std::optional<double> matched;
  if (c.model.kind == ModelKind::heisenberg) {
    try {
      matched = matching_temperature(spectrum, energy);
    } catch (const InvalidParameter&) {
    }
  }
  if (matched) {
    const double temperature = *matched;
    std::vector<double> canonical, micro;
    const auto mz = magnetization_diagonal(c.model.sites);
    for (int g = 0; g <= 10; ++g) {
      SpinModel m = c.model;
      m.field = 0.1 * g;
      const auto s = diagonalize(m);
      canonical.push_back(canonical_average(s, temperature, mz));
      const double e = c.target_density() * static_cast<double>(m.sites);
      micro.push_back(filtered_average(s, e, resolve_sigma(m, e, c.sigma_mode, c.sigma), c.iterations, mz));
    }
    bool monotone = true;
    for (std::size_t i = 1; i < canonical.size(); ++i) monotone = monotone && canonical[i] >= canonical[i - 1] - 1e-12;
    const auto peak = std::max_element(micro.begin(), micro.end()) - micro.begin();
    std::ostringstream d;
    d << "canonical m_z(h) at T=" << temperature << " over h=0..1 is " << (monotone ? "" : "not ")
      << "nondecreasing; filtered m_z(h) at u=" << c.target_density() << " peaks at h=" << 0.1 * static_cast<double>(peak)
      << (peak > 0 && peak < 10 ? " (interior)" : " (endpoint)");
    checks.push_back({"canonical monotonicity contrast", monotone ? "pass" : "FAIL", d.str()});
  } else {
    checks.push_back({"canonical monotonicity contrast", "skipped", "Heisenberg chains below infinite temperature only"});
  }

  std::ostringstream report;
  bool ok = true;
  report << "rmps verify, N=" << c.model.sites << ", E=" << energy << ", sigma=" << sigma << "\n";
  for (const auto& ch : checks) {
    ok = ok && ch.status != "FAIL";
    report << std::left << std::setw(8) << ch.status << ch.name << ": " << ch.detail << "\n";
  }
  write_file_atomic(rc.output_dir / "verify.txt", report.str());
  out << report.str();
  return ok ? kExitOk : kExitRuntime;
}

int cmd_histogram(const std::string& input, const std::optional<std::string>& out_dir, std::ostream& out) {
  const auto entries = read_histogram(input);
  if (entries.empty()) throw ConfigError("histogram: " + input + " has no rows");
  const std::filesystem::path dir = out_dir ? std::filesystem::path(*out_dir) : std::filesystem::path(input).parent_path();
  prepare_output(dir.empty() ? "." : dir);
  const auto target = (dir.empty() ? std::filesystem::path(".") : dir) / "fits.csv";
  write_file_atomic(target, fits_table(fits_from_histogram(entries)).str());
  out << "wrote " << target.string() << "\n";
  return kExitOk;
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Microcanonical sampling with random matrix product states", "rmps"};
  app.set_version_flag("--version", kVersion);
  app.require_subcommand(1);

  Overrides sample_o, sweep_o, verify_o;
  auto* sample = app.add_subcommand("sample", "run the power method on an ensemble of random MPS");
  add_common(sample, sample_o);

  auto* sweep = app.add_subcommand("sweep", "magnetization (and optional correlation) curve over a field grid");
  add_common(sweep, sweep_o);
  std::string grid;
  std::optional<std::string> corr;
  sweep->add_option("--h-grid", grid, "start:stop:step or comma list")->required();
  sweep->add_option("--corr", corr, "zz distances, e.g. 1..6 or 1,2,4");

  auto* verify = app.add_subcommand("verify", "compare the sampler with exact diagonalization (N <= 12)");
  add_common(verify, verify_o);

  auto* histogram = app.add_subcommand("histogram", "refit an existing histogram.csv into fits.csv");
  std::string histogram_in;
  std::optional<std::string> histogram_out;
  histogram->add_option("input", histogram_in, "histogram.csv")->required()->check(CLI::ExistingFile);
  histogram->add_option("-o,--out", histogram_out, "output directory (default: next to the input)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitValidation;
  }

  try {
    if (*sample) return cmd_sample(sample_o, out);
    if (*sweep) return cmd_sweep(sweep_o, grid, corr, out);
    if (*verify) return cmd_verify(verify_o, out);
    if (*histogram) return cmd_histogram(histogram_in, histogram_out, out);
  } catch (const InvalidParameter& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const TooLarge& e) {
    err << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitRuntime;
  }
  return kExitValidation;
}

}  // namespace rmps
