#ifndef FAREYPHASE_TOOLS_COMMANDS_HPP
#define FAREYPHASE_TOOLS_COMMANDS_HPP

// Command-line front end. run() is the whole program minus process exit so
// that tests can drive it in-process.
//
// Exit codes: 0 success, 1 verification failure, 2 usage error,
// 3 numeric/overflow error.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <limits>
#include <optional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include <fareyphase/fareyphase.hpp>
#include <fareyphase/io.hpp>

namespace fareyphase::cli {

enum ExitCode : int { ok = 0, verification_failed = 1, usage = 2, numeric = 3 };

struct GridSpec {
  double start = 0.0;
  double stop = 0.0;
  int count = 0;
  bool log_toward_one = false;
};

struct RunConfig {
  std::string command;
  std::string model = "knauf";
  std::optional<int> k;
  std::optional<std::pair<int, int>> k_range;
  std::optional<double> beta;
  std::optional<GridSpec> beta_grid;
  int dim = 256;
  double tol = 1e-10;
  unsigned threads = 1;
  std::string format = "csv";
  std::string out;
  std::uint64_t seed = 20240601;

  // command specific
  bool new_only = false;
  std::string source = "both";
  std::string study = "none";
  std::string mode = "curve";
  std::string suite = "all";
  std::string eps_grid = "0.003:0.03:5";
  bool summary = false;
};

inline std::pair<int, int> parse_k_range(const std::string& s) {
  const auto colon = s.find(':');
  if (colon == std::string::npos)
    throw domain_error("--k-range expects A:B, got '" + s + "'");
  const int a = std::stoi(s.substr(0, colon));
  const int b = std::stoi(s.substr(colon + 1));
  if (a > b)
    throw domain_error("--k-range: A must not exceed B");
  return {a, b};
}

inline GridSpec parse_grid(const std::string& s) {
  std::vector<std::string> parts;
  std::stringstream ss(s);
  for (std::string p; std::getline(ss, p, ':');)
    parts.push_back(p);
  if (parts.size() != 3 && parts.size() != 4)
    throw domain_error("grid expects start:stop:count[:log1], got '" + s + "'");
  GridSpec g;
  try {
    g.start = std::stod(parts[0]);
    g.stop = std::stod(parts[1]);
    g.count = std::stoi(parts[2]);
  } catch (const std::exception&) {
    throw domain_error("grid has a malformed number: '" + s + "'");
  }
  if (parts.size() == 4) {
    if (parts[3] != "log1")
      throw domain_error("grid spacing must be 'log1' when given, got '" + parts[3] + "'");
    g.log_toward_one = true;
  }
  if (g.count < 1)
    throw domain_error("grid count must be >= 1");
  if (g.log_toward_one && !(g.start < 1.0 && g.stop < 1.0))
    throw domain_error("log1 spacing needs start and stop below 1");
  return g;
}

/// Linear, or logarithmic in the distance 1 - beta.
inline std::vector<double> expand_grid(const GridSpec& g) {
  std::vector<double> out;
  for (int i = 0; i < g.count; ++i) {
    const double t = g.count == 1 ? 0.0 : static_cast<double>(i) / (g.count - 1);
    if (g.log_toward_one) {
      const double a = std::log(1.0 - g.start);
      const double b = std::log(1.0 - g.stop);
      out.push_back(1.0 - std::exp(a + t * (b - a)));
    } else {
      out.push_back(g.start + t * (g.stop - g.start));
    }
  }
  return out;
}

/// Log-spaced grid between two positive values (used for eps grids).
inline std::vector<double> log_grid(const std::string& s) {
  const GridSpec g = parse_grid(s);
  if (!(g.start > 0.0 && g.stop > 0.0))
    throw domain_error("log grid needs positive bounds");
  std::vector<double> out;
  for (int i = 0; i < g.count; ++i) {
    const double t = g.count == 1 ? 0.0 : static_cast<double>(i) / (g.count - 1);
    out.push_back(std::exp(std::log(g.start) + t * (std::log(g.stop) - std::log(g.start))));
  }
  return out;
}

inline std::vector<double> betas_of(const RunConfig& cfg, std::vector<double> fallback) {
  if (cfg.beta_grid)
    return expand_grid(*cfg.beta_grid);
  if (cfg.beta)
    return {*cfg.beta};
  return fallback;
}

inline std::vector<int> levels_of(const RunConfig& cfg, std::vector<int> fallback) {
  if (cfg.k_range) {
    std::vector<int> out;
    for (int k = cfg.k_range->first; k <= cfg.k_range->second; ++k)
      out.push_back(k);
    return out;
  }
  if (cfg.k)
    return {*cfg.k};
  return fallback;
}

inline json config_json(const RunConfig& cfg) {
  json c;
  c["model"] = cfg.model;
  c["k"] = cfg.k ? json(*cfg.k) : json();
  c["k_range"] = cfg.k_range ? json(std::to_string(cfg.k_range->first) + ":" +
                                    std::to_string(cfg.k_range->second))
                             : json();
  c["beta"] = cfg.beta ? json(*cfg.beta) : json();
  c["beta_grid"] =
      cfg.beta_grid ? json(format_double(cfg.beta_grid->start) + ":" +
                           format_double(cfg.beta_grid->stop) + ":" +
                           std::to_string(cfg.beta_grid->count) +
                           (cfg.beta_grid->log_toward_one ? ":log1" : ""))
                    : json();
  c["dim"] = cfg.dim;
  c["tol"] = cfg.tol;
  c["format"] = cfg.format;
  c["seed"] = cfg.seed;
  c["new_only"] = cfg.new_only;
  c["source"] = cfg.source;
  c["study"] = cfg.study;
  c["mode"] = cfg.mode;
  c["suite"] = cfg.suite;
  c["eps_grid"] = cfg.eps_grid;
  c["summary"] = cfg.summary;
  return c;
}

struct CommandResult {
  Table table;
  int exit_code = ok;
};

// ---------------------------------------------------------------- levels

inline CommandResult cmd_levels(const RunConfig& cfg) {
  const int k = cfg.k.value_or(2);
  Table t({"level", "index", "numerator", "denominator", "fraction"});
  auto add = [&](std::uint64_t index, const Fraction& f) {
    t.add_row({k, index, f.num, f.den, std::to_string(f.num) + "/" + std::to_string(f.den)});
  };
  if (cfg.new_only) {
    if (k > max_listed_level)
      throw level_too_large("levels: listing capped at k=" + std::to_string(max_listed_level));
    std::uint64_t n = 0;
    traverse_new_pairs(k, [&](const MediantTriple& tr) { add(2 * ++n, tr.mid); });
  } else {
    for (const auto& f : level_fractions(k))
      add(f.index, f.value());
  }
  return {std::move(t)};
}

// ------------------------------------------------------------- partition

inline CommandResult cmd_partition(const RunConfig& cfg) {
  const Model m = parse_model(cfg.model);
  const EvalOptions eval{cfg.threads, 40};
  Table t({"model", "beta", "k", "value", "terms"});
  for (int k : levels_of(cfg, {10}))
    for (double b : betas_of(cfg, {1.0})) {
      const PartitionValue v = evaluate(m, k, b, eval);
      t.add_row({std::string(to_string(v.model)), v.beta, v.level, v.value, v.terms});
    }
  return {std::move(t)};
}

// ---------------------------------------------------------------- verify

inline CommandResult cmd_verify(const RunConfig& cfg) {
  const EvalOptions eval{cfg.threads, 40};
  Table t({"suite", "case", "observed", "bound", "pass"});
  bool all_pass = true;
  auto record = [&](const std::string& suite, const std::string& c, double observed, double bound,
                    bool pass) {
    all_pass = all_pass && pass;
    t.add_row({suite, c, observed, bound, pass});
  };
  auto wants = [&](const std::string& s) { return cfg.suite == "all" || cfg.suite == s; };
  auto range = [&](int lo, int hi) {
    return cfg.k_range ? *cfg.k_range : std::pair<int, int>{lo, hi};
  };
  static const std::vector<std::string> suites{"sandwich", "telescope", "totient", "zeta",
                                               "balls", "even-bound", "knauf-bound",
                                               "presentation"};
  if (cfg.suite != "all" && std::find(suites.begin(), suites.end(), cfg.suite) == suites.end())
    throw domain_error("unknown suite '" + cfg.suite + "'");

  if (wants("sandwich")) {
    const auto [lo, hi] = range(2, 14);
    for (int k = std::max(lo, 2); k <= hi; ++k)
      for (double b : {-1.0, -0.5, -0.25, 0.0, 0.25, 0.5, 1.0, 1.5, 2.0, 3.0}) {
        const SandwichReport r = verify_sandwich(k, b, eval);
        const std::string c = "k=" + std::to_string(k) + " beta=" + format_double(b);
        record("sandwich", c + " lower", r.lower, r.value, b == 0.0 ? r.holds : r.lower < r.value);
        record("sandwich", c + " upper", r.value, r.upper, b == 0.0 ? r.holds : r.value < r.upper);
      }
  }
  if (wants("telescope")) {
    const auto [lo, hi] = range(1, 12);
    for (int k = std::max(lo, 1); k <= hi; ++k)
      for (double b : {-0.5, 0.0, 0.25, 0.5, 0.75, 1.0}) {
        const TelescopeReport r = verify_telescope(k, b, eval);
        const std::string c = "k=" + std::to_string(k) + " beta=" + format_double(b);
        record("telescope", c + " residual", r.residual, 1e-10, r.residual <= 1e-10);
        record("telescope", c + " growth", r.growth_holds ? 1.0 : 0.0, 1.0, r.growth_holds);
      }
  }
  if (wants("totient")) {
    const auto [lo, hi] = range(1, 20);
    const std::uint64_t n_max = 50;
    std::vector<std::uint64_t> prev(n_max + 1, 0);
    for (int k = std::max(lo, 0); k <= hi; ++k) {
      const DirichletTable d = dirichlet_coefficients(k, n_max);
      for (std::uint64_t n = 1; n <= n_max; ++n) {
        const std::uint64_t phi = euler_totient(n);
        const std::string c = "k=" + std::to_string(k) + " n=" + std::to_string(n);
        const bool monotone = d(n) >= prev[n];
        const bool bounded = d(n) <= phi;
        // every m/n first appears by level n-1
        const bool complete = n > static_cast<std::uint64_t>(k) + 1 || d(n) == phi;
        record("totient", c, static_cast<double>(d(n)), static_cast<double>(phi),
               monotone && bounded && complete);
        prev[n] = d(n);
      }
    }
  }
  if (wants("zeta")) {
    const auto [lo, hi] = range(1, 20);
    const double limit = zeta_ratio(2.0);
    double prev_gap = std::numeric_limits<double>::infinity();
    for (int k = std::max(lo, 1); k <= hi; ++k) {
      const double z = z_knauf(k, 4.0, eval).value;
      const double gap = limit - z;
      record("zeta", "k=" + std::to_string(k) + " gap", gap, prev_gap, gap > 0.0 && gap < prev_gap);
      prev_gap = gap;
    }
  }
  if (wants("balls")) {
    const auto [lo, hi] = range(2, 12);
    for (int k = std::max(lo, 2); k <= hi; ++k) {
      double worst = 0.0;
      compensated_sum sum;
      const std::uint64_t count = std::uint64_t{1} << (k - 2);
      for (std::uint64_t n = 1; n <= count; ++n) {
        const double exact = ball_exact(k, n);
        const double composed = ball_by_composition(ball_symbols(k, n));
        worst = std::max(worst, std::abs(composed - exact) / exact);
        sum.add(exact);
      }
      record("balls", "k=" + std::to_string(k) + " composition", worst, 1e-14, worst <= 1e-14);
      record("balls", "k=" + std::to_string(k) + " sum", sum.value(), 1.0, sum.value() < 1.0);
    }
  }
  if (wants("even-bound")) {
    const auto [lo, hi] = range(1, 24);
    const auto even = even_parts_by_level(hi, 2.0, eval);
    for (int k = std::max(lo, 1); k <= hi; ++k)
      record("even-bound", "k=" + std::to_string(k), even[k], 2.0, even[k] < 2.0);
  }
  if (wants("knauf-bound")) {
    const auto [lo, hi] = range(1, 20);
    for (int k = std::max(lo, 1); k <= hi; ++k) {
      const double z = z_knauf(k, 2.0, eval).value;
      record("knauf-bound", "k=" + std::to_string(k), z, 2.0 * k + 1.0, z <= 2.0 * k + 1.0);
    }
  }
  if (wants("presentation")) {
    std::mt19937_64 rng(cfg.seed);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    double worst = 0.0;
    for (int i = 0; i < 10000; ++i) {
      const double x = u(rng);
      for (int e : {0, 1})
        worst = std::max(worst, std::abs(farey_map(presentation(e, x)) - x));
    }
    record("presentation", "farey_map(F_e(x)) - x, 10^4 samples", worst, 1e-14, worst <= 1e-14);
  }
  return {std::move(t), all_pass ? ok : verification_failed};
}

// ----------------------------------------------------------------- eigen

inline CommandResult cmd_eigen(const RunConfig& cfg) {
  if (cfg.source != "matrix" && cfg.source != "ratio" && cfg.source != "both")
    throw domain_error("--source must be matrix, ratio or both");
  if (cfg.study != "none" && cfg.study != "dims" && cfg.study != "levels")
    throw domain_error("--study must be none, dims or levels");
  const EvalOptions eval{cfg.threads, 40};
  SpectralOptions sopts;
  sopts.tol = cfg.tol;
  const int ratio_k = cfg.k.value_or(24);
  const double nan = std::numeric_limits<double>::quiet_NaN();

  Table t({"beta", "source", "M", "k", "lambda", "residual", "iterations",
           "truncation_uncertainty"});
  auto matrix_row = [&](double b, int M) {
    const SpectralResult r = solve_spectrum(b, M, sopts);
    t.add_row({b, "matrix", r.dim, json(), r.lambda, r.residual, r.iterations,
               r.truncation_uncertainty});
  };
  auto ratio_row = [&](double b, int k) {
    const double lam = lambda_from_ratio(b, k, eval);
    const double prev = lambda_from_ratio(b, k - 1, eval);
    t.add_row({b, "ratio", json(), k, lam, nan, 0, std::abs(lam - prev)});
  };

  for (double b : betas_of(cfg, {0.5})) {
    if (cfg.source != "ratio") {
      if (cfg.study == "dims")
        for (int M = cfg.dim; M <= max_transfer_dim; M *= 2)
          matrix_row(b, M);
      else
        matrix_row(b, cfg.dim);
    }
    if (cfg.source != "matrix") {
      if (cfg.study == "levels")
      {
        const auto [lo, hi] = cfg.k_range.value_or(std::pair{4, ratio_k});
        for (int k = std::max(lo, 4); k <= hi; ++k)
          ratio_row(b, k);
      }
      else
        ratio_row(b, ratio_k);
    }
  }
  return {std::move(t)};
}

// ---------------------------------------------------------------- thermo

inline CommandResult cmd_thermo(const RunConfig& cfg) {
  ThermoOptions opts;
  opts.threads = cfg.threads;
  opts.eval.threads = 1;
  opts.spectral.tol = std::min(cfg.tol, 1e-12);
  if (cfg.k)
    opts.ratio_level = *cfg.k;

  if (cfg.mode == "curve") {
    const std::string src = cfg.source == "both" ? "matrix" : cfg.source;
    const LambdaSource source = parse_lambda_source(src);
    const auto grid = betas_of(cfg, expand_grid(parse_grid("0.1:0.99:12:log1")));
    const ThermoCurve curve = thermo_curve(grid, source, opts);
    Table t({"beta", "f", "u", "c", "lambda", "source", "uncertainty"});
    for (const auto& p : curve.points)
      t.add_row({p.beta, p.f, p.u, p.c, p.lambda, std::string(to_string(p.source)), p.uncertainty});
    return {std::move(t)};
  }
  if (cfg.mode == "fit") {
    const TransitionFit fit = prellberg_fit(log_grid(cfg.eps_grid), opts);
    Table t({"eps", "beta", "beta_f", "c_eps", "specific_heat", "scaled_heat", "uncertainty", "M",
             "c_hat", "stability", "heat_spread"});
    for (const auto& p : fit.points)
      t.add_row({p.eps, p.beta, p.beta_f, p.c_eps, p.specific_heat, p.scaled_heat, p.uncertainty,
                 p.dim, fit.c_hat, fit.stability, fit.heat_spread});
    return {std::move(t)};
  }
  if (cfg.mode == "hausdorff") {
    const EvalOptions eval{cfg.threads, 40};
    std::vector<int> levels = levels_of(cfg, {10, 12, 14, 16, 18, 20});
    const HausdorffReport rep = hausdorff_check(betas_of(cfg, {0.9, 1.0, 1.1}), levels, eval);
    Table t({"beta", "k", "z_farey_tree"});
    for (const auto& r : rep.rows)
      t.add_row({r.beta, r.level, r.z});
    return {std::move(t), rep.consistent ? ok : verification_failed};
  }
  throw domain_error("--mode must be curve, fit or hausdorff");
}

// ----------------------------------------------------------------- balls

inline std::string symbol_string(const std::vector<int>& s) {
  std::string out;
  for (int e : s)
    out += static_cast<char>('0' + e);
  return out;
}

inline CommandResult cmd_balls(const RunConfig& cfg) {
  if (cfg.summary) {
    Table t({"k", "beta", "z_farey_tree", "approx_partition", "relative_error"});
    for (int k : levels_of(cfg, {6, 10, 14}))
      for (double b : betas_of(cfg, {1.0})) {
        const double z = z_farey_tree(k, b).value;
        const double a = approx_partition(k, b);
        t.add_row({k, b, z, a, std::abs(a - z) / z});
      }
    return {std::move(t)};
  }
  Table t({"level", "index", "symbols", "exact", "composed", "approx", "approx_over_exact"});
  for (const auto& r : ball_records(cfg.k.value_or(4)))
    t.add_row({r.level, r.index, symbol_string(r.symbols), r.exact_diameter, r.composed_diameter,
               r.approx_diameter, r.approx_diameter / r.exact_diameter});
  return {std::move(t)};
}

// ------------------------------------------------------------------ main

inline unsigned env_threads() {
  if (const char* s = std::getenv("FAREYPHASE_THREADS")) {
    try {
      const int n = std::stoi(s);
      if (n >= 1)
        return static_cast<unsigned>(n);
    } catch (const std::exception&) {
    }
  }
  return default_thread_count();
}

inline int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Farey-fraction statistical models: partition functions, transfer-operator "
               "spectra and the phase transition"};
  app.set_version_flag("--version", std::string(version));
  app.require_subcommand(1);

  RunConfig cfg;
  cfg.threads = env_threads();
  std::string k_range, beta_grid;

  auto common = [&](CLI::App* sub) {
    sub->add_option("--k", cfg.k, "level k");
    sub->add_option("--k-range", k_range, "level range A:B");
    sub->add_option("--beta", cfg.beta, "inverse temperature");
    sub->add_option("--beta-grid", beta_grid, "start:stop:count[:log1]");
    sub->add_option("--model", cfg.model,
                    "farey-chain | knauf | knauf-even | knauf-odd | farey-tree");
    sub->add_option("--dim", cfg.dim, "transfer-matrix truncation M")->check(CLI::Range(2, max_transfer_dim));
    sub->add_option("--tol", cfg.tol, "eigen residual tolerance")->check(CLI::PositiveNumber);
    sub->add_option("--threads", cfg.threads, "worker threads (default: FAREYPHASE_THREADS or all cores)")
        ->check(CLI::Range(1u, 1024u));
    sub->add_option("--format", cfg.format, "csv | json")->check(CLI::IsMember({"csv", "json"}));
    sub->add_option("--out", cfg.out, "output file (default stdout)");
    sub->add_option("--seed", cfg.seed, "seed for sampled diagnostics");
  };

  auto* levels = app.add_subcommand("levels", "list the fractions of a Farey level");
  common(levels);
  levels->add_flag("--new-only", cfg.new_only, "only the new (even-index) fractions");

  auto* partition = app.add_subcommand("partition", "evaluate partition functions");
  common(partition);

  auto* verify = app.add_subcommand("verify", "check identities and inequalities");
  common(verify);
  verify->add_option("--suite", cfg.suite,
                     "all | sandwich | telescope | totient | zeta | balls | even-bound | "
                     "knauf-bound | presentation");

  auto* eigen = app.add_subcommand("eigen", "leading transfer-operator eigenvalue");
  common(eigen);
  eigen->add_option("--source", cfg.source, "matrix | ratio | both");
  eigen->add_option("--study", cfg.study, "none | dims | levels");

  auto* thermo = app.add_subcommand("thermo", "free energy, specific heat, transition fit");
  common(thermo);
  thermo->add_option("--mode", cfg.mode, "curve | fit | hausdorff");
  thermo->add_option("--source", cfg.source, "matrix | ratio");
  thermo->add_option("--eps-grid", cfg.eps_grid, "eps grid start:stop:count (log spaced)");

  auto* balls = app.add_subcommand("balls", "Farey-tree ball diameters");
  common(balls);
  balls->add_flag("--summary", cfg.summary, "partition sums instead of per-ball rows");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? ok : usage;
  }

  try {
    cfg.command = app.get_subcommands().front()->get_name();
    if (!k_range.empty())
      cfg.k_range = parse_k_range(k_range);
    if (!beta_grid.empty())
      cfg.beta_grid = parse_grid(beta_grid);
    if (cfg.k && *cfg.k < 0)
      throw domain_error("--k must be non-negative");

    CommandResult result = [&]() -> CommandResult {
      if (cfg.command == "levels") return cmd_levels(cfg);
      if (cfg.command == "partition") return cmd_partition(cfg);
      if (cfg.command == "verify") return cmd_verify(cfg);
      if (cfg.command == "eigen") return cmd_eigen(cfg);
      if (cfg.command == "thermo") return cmd_thermo(cfg);
      return cmd_balls(cfg);
    }();

    const OutputFormat fmt = cfg.format == "json" ? OutputFormat::json : OutputFormat::csv;
    if (cfg.out.empty()) {
      result.table.write(out, fmt, cfg.command, config_json(cfg));
    } else {
      std::ofstream file(cfg.out, std::ios::binary);
      if (!file)
        throw domain_error("cannot open output file '" + cfg.out + "'");
      result.table.write(file, fmt, cfg.command, config_json(cfg));
    }
    if (result.exit_code == verification_failed)
      err << "fareyphase: verification failed\n";
    return result.exit_code;
  } catch (const domain_error& e) {
    err << "fareyphase: " << e.what() << '\n';
    return usage;
  } catch (const level_too_large& e) {
    err << "fareyphase: " << e.what() << '\n';
    return usage;
  } catch (const error& e) {
    err << "fareyphase: " << e.what() << '\n';
    return numeric;
  } catch (const std::invalid_argument& e) {
    err << "fareyphase: malformed number (" << e.what() << ")\n";
    return usage;
  } catch (const std::out_of_range& e) {
    err << "fareyphase: number out of range (" << e.what() << ")\n";
    return usage;
  }
}

} // namespace fareyphase::cli

#endif
