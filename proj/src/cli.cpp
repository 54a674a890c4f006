#include "tlreg/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>

#include "tlreg/act.hpp"
#include "tlreg/app.hpp"
#include "tlreg/csv.hpp"
#include "tlreg/multisource.hpp"
#include "tlreg/sim.hpp"
#include "tlreg/svg.hpp"

namespace tlreg::cli {

namespace fs = std::filesystem;

namespace {

struct CommonCi {
  double constant = 2.0;
  bool tune = false;
  std::string bias = "decaying";
  std::string cell_solve = "stabilized";

  void attach(CLI::App& cmd) {
    cmd.add_option("--ci-const", constant, "Confidence-interval constant C")->check(CLI::PositiveNumber);
    cmd.add_flag("--tune-ci", tune, "Tune C over {0.5, 1, 2, 4} on the validation half");
    cmd.add_option("--ci-bias", bias, "Bias term of the interval: decaying (b^beta) or literal (b^-beta)")
        ->check(CLI::IsMember({"decaying", "literal"}));
    cmd.add_option("--cell-solve", cell_solve,
                   "Per-cell solve: stabilized (lower the degree on ill-conditioned cells) or min-norm")
        ->check(CLI::IsMember({"stabilized", "min-norm"}));
  }
  [[nodiscard]] LprOptions lpr() const { return {cell_solve == "stabilized" ? CellSolve::stabilized : CellSolve::min_norm}; }
  [[nodiscard]] CiSpec spec() const {
    CiSpec ci;
    ci.constant = constant;
    ci.bias = bias == "literal" ? BiasTerm::literal_inverse : BiasTerm::decaying;
    return ci;
  }
  [[nodiscard]] std::vector<double> grid() const { return tune ? default_ci_tuning_grid() : std::vector<double>{}; }
};

struct SimulateArgs {
  int series = 1;
  int reps = 200;
  std::uint64_t seed = 42;
  std::string out;
  std::vector<double> np_grid{300, 600, 1200, 2400, 4800};
  std::vector<double> lwid_grid{0.0, 0.005, 0.01, 0.015, 0.02};
  int degree = 1;
  int test_points = 2000;
  int threads = 0;
  CommonCi ci;
};

struct FitArgs {
  std::string target;
  std::vector<std::string> sources;
  std::string response = "y";
  int degree = 1;
  int grid = 101;
  std::string out;
  std::string summary;
  bool normalize = false;
  std::uint64_t seed = 0;
  char delimiter = ',';
  CommonCi ci;
};

struct WineArgs {
  std::string red;
  std::string white;
  std::vector<std::size_t> nq_grid{100, 200, 300, 400};
  int reps = 20;
  std::uint64_t seed = 7;
  std::string out;
  std::string feature = "alcohol";
  int threads = 0;
  CommonCi ci;
};

struct PlotArgs {
  std::string in;
  std::string x = "param";
  std::string y = "mean_mse";
  std::string group = "method";
  std::string out;
  bool log_x = false;
  bool log_y = false;
  int width = 640;
  int height = 420;
};

std::string default_out_dir() {
  const char* env = std::getenv("TLREG_OUT_DIR");
  return env != nullptr ? std::string(env) : std::string();
}

fs::path require_out_dir(const std::string& flag) {
  std::string dir = flag.empty() ? default_out_dir() : flag;
  if (dir.empty()) throw CLI::RequiredError("--out (or TLREG_OUT_DIR)");
  fs::create_directories(dir);
  return dir;
}

void write_file(const fs::path& path, const std::string& content) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw std::runtime_error("cannot write " + path.string());
  f << content;
  if (!f) throw std::runtime_error("write failed: " + path.string());
}

void write_tables(const ExperimentTable& table, const fs::path& dir, const std::string& stem, PlotSpec plot) {
  std::ostringstream raw, agg;
  table.write_raw_csv(raw);
  table.write_aggregate_csv(agg);
  write_file(dir / (stem + "_raw.csv"), raw.str());
  write_file(dir / (stem + "_agg.csv"), agg.str());
  write_file(dir / (stem + ".svg"), render_svg(parse_csv(agg.str()), plot));
}

int cmd_simulate(const SimulateArgs& a, std::ostream& out) {
  const fs::path dir = require_out_dir(a.out);
  std::vector<GridPoint> grid;
  std::vector<std::string> methods{method::lpr_target, method::act};
  PlotSpec plot;
  if (a.series == 1) {
    for (double np : a.np_grid) {
      if (!(np >= 1) || np != std::floor(np)) throw std::invalid_argument("--np-grid values must be positive integers");
      grid.push_back({np, series1_scenario(static_cast<std::size_t>(np))});
    }
    plot.x_label = "n_P";
    plot.log_x = true;
  } else {
    for (double w : a.lwid_grid) grid.push_back({w, series2_scenario(w)});
    methods.emplace_back(method::lpr_source);
    plot.x_label = "l_wid";
  }
  plot.y_label = "mean MSE";
  plot.title = "Series " + std::to_string(a.series);

  MethodConfig config;
  config.degree = a.degree;
  config.ci = a.ci.spec();
  config.ci_grid = a.ci.grid();
  config.lpr = a.ci.lpr();
  const auto table = run_experiment(grid, methods, a.reps, a.seed, a.test_points, config, a.threads);
  const std::string stem = "series" + std::to_string(a.series);
  write_tables(table, dir, stem, plot);
  for (const auto& row : table.aggregate()) {
    out << row.method << " param=" << format_double(row.param) << " mse=" << format_double(row.mean_mse)
        << " se=" << format_double(row.std_error) << '\n';
  }
  out << "wrote " << (dir / stem).string() << "_{raw,agg}.csv and " << stem << ".svg\n";
  return kExitOk;
}

struct Normalizer {
  std::vector<AffineMap> maps;
  [[nodiscard]] double apply(std::size_t j, double v) const { return maps.empty() ? v : maps[j](v); }
  [[nodiscard]] double invert(std::size_t j, double u) const {
    return maps.empty() ? u : maps[j].lo + u * (maps[j].hi - maps[j].lo);
  }
};

std::vector<std::size_t> covariate_columns(const RawTable& t, const std::string& response, const std::string& file) {
  if (t.column_index(response) < 0) throw std::runtime_error(file + ": no response column '" + response + "'");
  std::vector<std::size_t> cols;
  for (std::size_t j = 0; j < t.columns.size(); ++j) {
    if (t.columns[j] != response) cols.push_back(j);
  }
  if (cols.empty()) throw std::runtime_error(file + ": no covariate columns");
  return cols;
}

Dataset to_dataset(const RawTable& t, const std::vector<std::string>& names, const std::string& response,
                   const Normalizer& norm, DomainTag tag) {
  const auto y_col = static_cast<std::size_t>(t.column_index(response));
  std::vector<std::size_t> cols;
  for (const auto& n : names) cols.push_back(static_cast<std::size_t>(t.column_index(n)));
  Dataset data(static_cast<int>(names.size()), tag);
  data.reserve(t.size());
  std::vector<double> x(names.size());
  for (const auto& row : t.rows) {
    for (std::size_t j = 0; j < cols.size(); ++j) x[j] = std::clamp(norm.apply(j, row[cols[j]]), -1e300, 1e300);
    data.add(x, row[y_col]);
  }
  return data;
}

int cmd_fit(const FitArgs& a, std::ostream& out) {
  const RawTable target = load_csv(a.target, a.delimiter);
  std::vector<RawTable> sources;
  for (const auto& s : a.sources) sources.push_back(load_csv(s, a.delimiter));

  std::vector<std::string> names;
  for (std::size_t j : covariate_columns(target, a.response, a.target)) names.push_back(target.columns[j]);
  for (std::size_t k = 0; k < sources.size(); ++k) {
    covariate_columns(sources[k], a.response, a.sources[k]);
    for (const auto& n : names) {
      if (sources[k].column_index(n) < 0) throw std::runtime_error(a.sources[k] + ": missing covariate '" + n + "'");
    }
  }

  Normalizer norm;
  if (a.normalize) {
    for (const auto& n : names) {
      AffineMap m{std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity()};
      auto scan = [&](const RawTable& t) {
        for (double v : t.column(n)) {
          m.lo = std::min(m.lo, v);
          m.hi = std::max(m.hi, v);
        }
      };
      scan(target);
      for (const auto& s : sources) scan(s);
      if (!(m.hi > m.lo)) throw std::runtime_error("covariate '" + n + "' has zero range");
      norm.maps.push_back(m);
    }
  }

  const Dataset dq = to_dataset(target, names, a.response, norm, DomainTag::target());
  std::vector<Dataset> dps;
  for (std::size_t k = 0; k < sources.size(); ++k) {
    dps.push_back(to_dataset(sources[k], names, a.response, norm, DomainTag::source(static_cast<int>(k) + 1)));
  }

  ActOptions opts;
  opts.split_seed = a.seed;
  opts.ci_grid = a.ci.grid();
  opts.lpr = a.ci.lpr();
  const CiSpec ci = a.ci.spec();
  const int d = static_cast<int>(names.size());
  ActModel model = [&] {
    if (dps.empty()) return fit_act(dq, Dataset(d, DomainTag::source(1)), a.degree, ci, opts);
    if (dps.size() == 1) return fit_act(dq, dps.front(), a.degree, ci, opts);
    return fit_act_multi({dq, dps}, a.degree, ci, opts);
  }();

  // Predictions on a K^d equispaced grid including the corners.
  const double total = std::pow(static_cast<double>(a.grid), d);
  if (total > 1e6) throw std::runtime_error("prediction grid too large (K^d > 1e6)");
  std::ostringstream pred;
  for (const auto& n : names) pred << n << ',';
  pred << "prediction\n";
  std::vector<int> idx(static_cast<std::size_t>(d), 0);
  std::vector<double> u(static_cast<std::size_t>(d));
  const auto count = static_cast<std::size_t>(total);
  for (std::size_t p = 0; p < count; ++p) {
    for (int j = 0; j < d; ++j) {
      u[static_cast<std::size_t>(j)] = a.grid == 1 ? 0.5 : static_cast<double>(idx[static_cast<std::size_t>(j)]) / (a.grid - 1);
      pred << format_double(norm.invert(static_cast<std::size_t>(j), u[static_cast<std::size_t>(j)])) << ',';
    }
    pred << format_double(predict_act(model, u)) << '\n';
    for (int j = d - 1; j >= 0; --j) {
      if (++idx[static_cast<std::size_t>(j)] < a.grid) break;
      idx[static_cast<std::size_t>(j)] = 0;
    }
  }
  write_file(a.out, pred.str());

  nlohmann::ordered_json summary;
  const CtModel& ct = model.chosen;
  summary["raw_domain"] = ct.raw_domain.label();
  summary["beta_q_star"] = model.beta_q_star;
  summary["beta_max_star"] = model.beta_max_star;
  summary["ci_constant"] = ct.ci_constant;
  summary["e1"] = ct.e1;
  summary["truncation"] = ct.truncation;
  summary["validation_loss"] = model.validation_loss;
  summary["ref_cells_per_axis"] = ct.f_ref->partition().cells_per_axis();
  summary["raw_cells_per_axis"] = ct.f_raw->partition().cells_per_axis();
  nlohmann::ordered_json psi = nlohmann::ordered_json::array();
  for (std::size_t k = 0; k < ct.psi.basis().size(); ++k) {
    psi.push_back({{"exponents", ct.psi.basis()[k].exponents}, {"coefficient", ct.psi.coefficients()[k]}});
  }
  summary["psi"] = psi;
  std::vector<std::string> families;
  for (const auto& c : model.candidate_losses) {
    const std::string label = c.raw_domain.label();
    if (std::find(families.begin(), families.end(), label) == families.end()) families.push_back(label);
  }
  summary["raw_domain_candidates"] = families;
  summary["n_candidates"] = model.candidate_losses.size();
  summary["covariates"] = names;
  if (a.normalize) {
    nlohmann::ordered_json maps = nlohmann::ordered_json::array();
    for (const auto& m : norm.maps) maps.push_back({{"min", m.lo}, {"max", m.hi}});
    summary["normalization"] = maps;
  }
  fs::path summary_path = a.summary.empty() ? fs::path(a.out).replace_extension(".summary.json") : fs::path(a.summary);
  write_file(summary_path, summary.dump(2) + "\n");
  out << "selected " << ct.raw_domain.label() << " beta_q=" << format_double(model.beta_q_star)
      << " beta_max=" << format_double(model.beta_max_star) << "; wrote " << a.out << " and "
      << summary_path.string() << '\n';
  return kExitOk;
}

int cmd_wine(const WineArgs& a, std::ostream& out) {
  const fs::path dir = require_out_dir(a.out);
  const RawTable red = load_csv(a.red, ';');
  const RawTable white = load_csv(a.white, ';');
  WineConfig cfg;
  cfg.feature = a.feature;
  cfg.n_q_grid = a.nq_grid;
  cfg.ci = a.ci.spec();
  cfg.ci_grid = a.ci.grid();
  cfg.lpr = a.ci.lpr();
  cfg.threads = a.threads;
  const auto table = run_wine(red, white, cfg, a.seed, a.reps);
  PlotSpec plot;
  plot.x_label = "n_Q";
  plot.y_label = "mean test MSE";
  plot.title = "Wine quality (" + a.feature + ")";
  write_tables(table, dir, "wine", plot);
  for (const auto& row : table.aggregate()) {
    out << row.method << " n_q=" << format_double(row.param) << " mse=" << format_double(row.mean_mse)
        << " se=" << format_double(row.std_error) << '\n';
  }
  return kExitOk;
}

int cmd_plot(const PlotArgs& a, std::ostream& out) {
  PlotSpec spec;
  spec.x_column = a.x;
  spec.y_column = a.y;
  spec.group_column = a.group;
  spec.log_x = a.log_x;
  spec.log_y = a.log_y;
  spec.width = a.width;
  spec.height = a.height;
  const std::string svg = render_svg(read_csv(a.in), spec);
  if (const auto parent = fs::path(a.out).parent_path(); !parent.empty()) fs::create_directories(parent);
  write_file(a.out, svg);
  out << "wrote " << a.out << '\n';
  return kExitOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Transfer learning for nonparametric regression under posterior drift", "tlreg"};
  app.require_subcommand(1);

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Run a seeded simulation series");
  simulate->add_option("--series", sim.series, "1: source sample size grid, 2: spike width grid")
      ->required()
      ->check(CLI::IsMember({1, 2}));
  simulate->add_option("--reps", sim.reps, "Repetitions per grid point")->check(CLI::PositiveNumber);
  simulate->add_option("--seed", sim.seed, "Master seed");
  simulate->add_option("--out", sim.out, "Output directory (default $TLREG_OUT_DIR)");
  simulate->add_option("--np-grid", sim.np_grid, "Source sample sizes (series 1)")->expected(1, -1);
  simulate->add_option("--lwid-grid", sim.lwid_grid, "Spike base widths (series 2)")
      ->expected(1, -1)
      ->check(CLI::NonNegativeNumber);
  simulate->add_option("--degree", sim.degree, "Local polynomial degree")->check(CLI::Range(0, 3));
  simulate->add_option("--test-points", sim.test_points, "MSE test grid size")->check(CLI::Range(1000, 10000000));
  simulate->add_option("--threads", sim.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  sim.ci.attach(*simulate);

  FitArgs fit;
  auto* fitcmd = app.add_subcommand("fit", "Fit ACT on user CSV files");
  fitcmd->add_option("--target", fit.target, "Target CSV")->required()->check(CLI::ExistingFile);
  fitcmd->add_option("--source", fit.sources, "Source CSV (repeatable)")->check(CLI::ExistingFile);
  fitcmd->add_option("--response", fit.response, "Response column name");
  fitcmd->add_option("--degree", fit.degree, "Local polynomial degree")->check(CLI::Range(0, 3));
  fitcmd->add_option("--predict-grid", fit.grid, "Prediction points per axis")->check(CLI::Range(1, 1000000));
  fitcmd->add_option("--out", fit.out, "Predictions CSV")->required();
  fitcmd->add_option("--summary", fit.summary, "Model summary JSON (default: <out>.summary.json)");
  fitcmd->add_flag("--normalize", fit.normalize, "Min-max scale covariates over target and sources");
  fitcmd->add_option("--seed", fit.seed, "Seed of the target split");
  fitcmd->add_option("--delimiter", fit.delimiter, "Field delimiter");
  fit.ci.attach(*fitcmd);

  WineArgs wine;
  auto* winecmd = app.add_subcommand("wine", "Red/white wine-quality transfer experiment");
  winecmd->add_option("--red", wine.red, "winequality-red.csv")->required()->check(CLI::ExistingFile);
  winecmd->add_option("--white", wine.white, "winequality-white.csv")->required()->check(CLI::ExistingFile);
  winecmd->add_option("--nq-grid", wine.nq_grid, "Target training sizes")->expected(1, -1)->check(CLI::PositiveNumber);
  winecmd->add_option("--reps", wine.reps, "Repetitions per n_q")->check(CLI::PositiveNumber);
  winecmd->add_option("--seed", wine.seed, "Master seed");
  winecmd->add_option("--out", wine.out, "Output directory (default $TLREG_OUT_DIR)");
  winecmd->add_option("--feature", wine.feature, "Covariate column");
  winecmd->add_option("--threads", wine.threads, "Worker threads (0: all cores)")->check(CLI::NonNegativeNumber);
  wine.ci.attach(*winecmd);

  PlotArgs plot;
  auto* plotcmd = app.add_subcommand("plot", "Render a CSV table as an SVG line chart");
  plotcmd->add_option("--in", plot.in, "Input CSV")->required()->check(CLI::ExistingFile);
  plotcmd->add_option("--x", plot.x, "x column");
  plotcmd->add_option("--y", plot.y, "y column");
  plotcmd->add_option("--group", plot.group, "Group column (one line per value)");
  plotcmd->add_option("--out", plot.out, "Output SVG")->required();
  plotcmd->add_flag("--logx", plot.log_x, "Logarithmic x axis");
  plotcmd->add_flag("--logy", plot.log_y, "Logarithmic y axis");
  plotcmd->add_option("--width", plot.width, "Width in pixels")->check(CLI::Range(100, 10000));
  plotcmd->add_option("--height", plot.height, "Height in pixels")->check(CLI::Range(100, 10000));

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return kExitOk;
  } catch (const CLI::ParseError& e) {
    err << "tlreg: " << e.what() << '\n';
    return kExitUsage;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(sim, out);
    if (fitcmd->parsed()) return cmd_fit(fit, out);
    if (winecmd->parsed()) return cmd_wine(wine, out);
    return cmd_plot(plot, out);
  } catch (const CLI::RequiredError& e) {
    err << "tlreg: " << e.what() << '\n';
    return kExitUsage;
  } catch (const std::exception& e) {
    err << "tlreg: " << e.what() << '\n';
    return kExitRuntime;
  }
}

}  // namespace tlreg::cli
