#include "semisar/cli.hpp"

#include <omp.h>

#include <filesystem>
#include <iostream>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "semisar/baselines.hpp"
#include "semisar/errors.hpp"
#include "semisar/evaluation.hpp"
#include "semisar/io.hpp"

namespace semisar {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// Reads JSON configs. Nested objects address subcommands, e.g.
// {"seed": 3, "simulate": {"n": 625}}. Underscores in keys map to dashes.
class JsonConfig : public CLI::Config {
 public:
  std::string to_config(const CLI::App*, bool, bool, std::string) const override { return "{}"; }

  std::vector<CLI::ConfigItem> from_config(std::istream& input) const override {
    json j;
    try {
      input >> j;
    } catch (const json::exception& e) {
      throw CLI::ConversionError(std::string("config: ") + e.what());
    }
    if (!j.is_object()) throw CLI::ConversionError("config: top level must be an object");
    std::vector<CLI::ConfigItem> items;
    collect(j, {}, items);
    return items;
  }

 private:
  static std::string scalar(const json& v) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_boolean()) return v.get<bool>() ? "true" : "false";
    if (v.is_number_integer() || v.is_number_unsigned()) return v.dump();
    if (v.is_number()) return io::format_exact(v.get<double>());
    throw CLI::ConversionError("config: unsupported value " + v.dump());
  }

  static void collect(const json& j, std::vector<std::string> parents, std::vector<CLI::ConfigItem>& items) {
    for (auto it = j.begin(); it != j.end(); ++it) {
      std::string key = it.key();
      std::replace(key.begin(), key.end(), '_', '-');
      if (it->is_object()) {
        auto sub = parents;
        sub.push_back(key);
        collect(*it, sub, items);
        continue;
      }
      CLI::ConfigItem item;
      item.parents = parents;
      item.name = key;
      if (it->is_array())
        for (const auto& v : *it) item.inputs.push_back(scalar(v));
      else
        item.inputs.push_back(scalar(*it));
      items.push_back(std::move(item));
    }
  }
};

struct Globals {
  std::uint64_t seed = 1;
  int threads = 0;
  bool strict = false;
};

struct DataFlags {
  std::string path;
  io::LoadOptions load;
  std::string coords = "x,y";

  void add(CLI::App* app, const std::string& flag, const std::string& what) {
    app->add_option(flag, path, what)->required()->check(CLI::ExistingFile);
    app->add_option("--response", load.response, "Response column");
    app->add_option("--covariates", load.covariates, "Covariate columns (default: all remaining)")->delimiter(',');
    app->add_option("--coords", coords, "Coordinate columns as x,y");
  }

  io::LoadOptions options() const {
    io::LoadOptions o = load;
    const auto comma = coords.find(',');
    if (comma == std::string::npos || comma == 0 || comma + 1 == coords.size())
      throw ValidationError("coords: expected two column names separated by a comma");
    o.coords = {coords.substr(0, comma), coords.substr(comma + 1)};
    return o;
  }
};

struct SimFlags {
  SimConfig cfg;
  std::string design = "regular";

  void add(CLI::App* app) {
    app->add_option("--design", design, "regular, irregular or clustered");
    app->add_option("--n", cfg.n, "Number of sampled sites");
    app->add_option("--p", cfg.p, "Number of covariates");
    app->add_option("--rho", cfg.rho, "Spatial dependence of the response");
    app->add_option("--beta-sd", cfg.beta_sd, "Standard deviation of the true coefficients");
    app->add_option("--v-bandwidth", cfg.v_bandwidth, "Bandwidth of the generating neighbourhood matrix");
    app->add_option("--parent-count", cfg.parent_count, "Size of the field the sample is nested in (0: none)");
  }

  SimConfig resolve(std::uint64_t seed) const {
    SimConfig c = cfg;
    c.design = parse_design(design);
    c.seed = seed;
    c.validate();
    return c;
  }
};

struct SearchFlags {
  std::vector<double> h1_set, h2_set;
  std::vector<int> k_set;
  int folds = 5;
  bool loo = false;
  std::string kernel1 = "truncated_linear", kernel2 = "truncated_linear";

  void add(CLI::App* app) {
    app->add_option("--h1-set", h1_set, "Candidate geographic bandwidths")->delimiter(',');
    app->add_option("--h2-set", h2_set, "Candidate median-similarity bandwidths")->delimiter(',');
    app->add_option("--k-set", k_set, "Candidate neighbourhood sizes")->delimiter(',');
    app->add_option("--folds", folds, "Cross-validation folds");
    app->add_flag("--loo", loo, "Leave-one-out scoring instead of folds");
    app->add_option("--kernel1", kernel1, "Geographic kernel");
    app->add_option("--kernel2", kernel2, "Median-similarity kernel");
  }

  SearchSpace resolve(WeightVariant v) const {
    SearchSpace s = SearchSpace::defaults(v);
    if (!h1_set.empty()) s.h1_set = h1_set;
    if (!h2_set.empty()) s.h2_set = h2_set;
    if (!k_set.empty()) s.k_set = k_set;
    s.folds = folds;
    s.loo = loo;
    s.kernel1 = parse_kernel(kernel1);
    s.kernel2 = parse_kernel(kernel2);
    s.normalize();
    return s;
  }
};

std::vector<Method> parse_methods(const std::vector<std::string>& names) {
  if (names.empty()) return ExperimentConfig{}.methods;
  std::vector<Method> out;
  for (const auto& n : names) out.push_back(parse_method(n));
  return out;
}

void write_experiment(const ExperimentSummary& s, const std::string& dir) {
  const fs::path d(dir);
  io::write_file_atomic(d / "replications.csv", io::replications_csv(s));
  io::write_file_atomic(d / "summary.csv", io::summary_csv(s));
  io::write_file_atomic(d / "boxplot.csv", io::boxplot_csv(s));
}

void report_failures(const ExperimentSummary& s, std::ostream& err) {
  for (const auto& a : s.aggregates)
    if (a.failures > 0) err << to_string(a.method) << ": " << a.failures << " replication(s) failed\n";
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Semiparametric spatial regression with neighbourhood-based kernel weights"};
  app.config_formatter(std::make_shared<JsonConfig>());
  app.allow_config_extras(CLI::config_extras_mode::error);
  app.require_subcommand(1);
  app.fallthrough();  // global flags may follow the subcommand

  Globals g;
  app.set_config("--config", "", "JSON configuration file; command-line flags take precedence");
  app.add_option("--seed", g.seed, "Master seed");
  app.add_option("--threads", g.threads, "Worker threads (0: runtime default)");
  app.add_flag("--strict-weights", g.strict, "Fail instead of falling back on empty neighbourhoods");

  // simulate
  auto* sim_cmd = app.add_subcommand("simulate", "Simulate a dataset");
  SimFlags sim_flags;
  sim_flags.add(sim_cmd);
  std::string sim_out;
  sim_cmd->add_option("--out", sim_out, "Output CSV; the sidecar JSON is written next to it")->required();

  // fit
  auto* fit_cmd = app.add_subcommand("fit", "Fit the semiparametric model");
  DataFlags fit_data;
  fit_data.add(fit_cmd, "--data", "Input CSV");
  std::string variant = "K2ME";
  BandwidthConfig fit_cfg;
  bool use_cv = false;
  SearchFlags fit_search;
  std::string fit_out, fit_scores, dump_weights;
  fit_cmd->add_option("--variant", variant, "K1S, K1ME, K2ME or K1M");
  fit_cmd->add_option("--h1", fit_cfg.h1, "Geographic bandwidth");
  fit_cmd->add_option("--h2", fit_cfg.h2, "Median-similarity bandwidth");
  fit_cmd->add_option("--k", fit_cfg.k, "Neighbourhood size");
  fit_cmd->add_flag("--cv", use_cv, "Select (h1, h2, k) by cross-validation");
  fit_search.add(fit_cmd);
  fit_cmd->add_option("--out", fit_out, "Fit result JSON")->required();
  fit_cmd->add_option("--scores", fit_scores, "Cross-validation score table CSV");
  fit_cmd->add_option("--dump-weights", dump_weights, "Write the weight matrix as CSV");

  // predict
  auto* pred_cmd = app.add_subcommand("predict", "Predict at new sites");
  DataFlags pred_data;
  pred_data.add(pred_cmd, "--data", "Training CSV used for the fit");
  std::string pred_fit, pred_sites, pred_out;
  pred_cmd->add_option("--fit", pred_fit, "Fit result JSON")->required()->check(CLI::ExistingFile);
  pred_cmd->add_option("--sites", pred_sites, "CSV of new sites with coordinates and covariates")
      ->required()
      ->check(CLI::ExistingFile);
  pred_cmd->add_option("--out", pred_out, "Predictions CSV")->required();

  // evaluate
  auto* eval_cmd = app.add_subcommand("evaluate", "Run a simulation experiment");
  SimFlags eval_sim;
  eval_sim.add(eval_cmd);
  SearchFlags eval_search;
  eval_search.add(eval_cmd);
  std::vector<std::string> eval_methods;
  int eval_reps = 50;
  double train_frac = 0.7;
  std::string eval_out;
  eval_cmd->add_option("--methods", eval_methods, "Methods to compare")->delimiter(',');
  eval_cmd->add_option("--reps", eval_reps, "Replications");
  eval_cmd->add_option("--train-frac", train_frac, "Training fraction");
  eval_cmd->add_option("--out-dir", eval_out, "Directory for the summary CSVs")->required();

  // reproduce table1
  auto* repro_cmd = app.add_subcommand("reproduce", "Rerun cells of the simulation table");
  repro_cmd->require_subcommand(1);
  auto* t1_cmd = repro_cmd->add_subcommand("table1", "One coefficient-error cell of the simulation table");
  double t1_rho = 0.0;
  std::string t1_design = "regular";
  int t1_n = 625, t1_reps = 50;
  std::vector<std::string> t1_methods;
  std::string t1_out;
  t1_cmd->add_option("--rho", t1_rho, "Spatial dependence");
  t1_cmd->add_option("--design", t1_design, "regular, irregular or clustered");
  t1_cmd->add_option("--n", t1_n, "Number of sites");
  t1_cmd->add_option("--reps", t1_reps, "Replications");
  t1_cmd->add_option("--method", t1_methods, "Methods (default: all)")->delimiter(',');
  t1_cmd->add_option("--out-dir", t1_out, "Optional directory for the summary CSVs");

  std::vector<std::string> rev(args.rbegin(), args.rend());
  try {
    app.parse(rev);
  } catch (const CLI::CallForHelp& e) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp& e) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    std::string msg = e.what();
    const std::string extras = "INI was not able to parse ";
    if (msg.rfind(extras, 0) == 0) msg = "config: unknown key '" + msg.substr(extras.size()) + "'";
    err << "error: " << msg << '\n';
    return 1;
  }

  try {
    if (g.threads < 0) throw ValidationError("threads: must be nonnegative");
    if (g.threads > 0) omp_set_num_threads(g.threads);
    WeightOptions wopts;
    wopts.strict = g.strict;

    if (*sim_cmd) {
      const SimConfig cfg = sim_flags.resolve(g.seed);
      const SimulatedData data = simulate(cfg);
      io::save_simulation(sim_out, data, cfg);
      return 0;
    }

    if (*fit_cmd) {
      const auto loaded = io::load_observations(fit_data.path, fit_data.options());
      if (loaded.meta.collapsed_duplicates > 0)
        err << "collapsed " << loaded.meta.collapsed_duplicates << " duplicate-coordinate row(s)\n";
      if (loaded.meta.rescaled) err << "coordinates rescaled into the unit square\n";
      const WeightVariant v = parse_variant(variant);
      BandwidthConfig cfg = fit_cfg;
      std::optional<SelectionResult> sel;
      if (use_cv) {
        const SearchSpace space = fit_search.resolve(v);
        sel = cv_select(loaded.obs, space, g.seed, wopts);
        cfg = sel->best;
        if (sel->ties > 0) err << "cross-validation: " << sel->ties << " tied configuration(s) resolved by order\n";
      } else {
        cfg.variant = v;
        cfg.kernel1 = parse_kernel(fit_search.kernel1);
        cfg.kernel2 = parse_kernel(fit_search.kernel2);
        cfg.validate();
      }
      const SpatialDataset data = SpatialDataset::build(loaded.obs, cfg.k);
      const FitResult fr = fit(data, cfg, wopts);
      json j = io::to_json(fr, data.obs);
      j["rescaled"] = loaded.meta.rescaled;
      j["collapsed_duplicates"] = loaded.meta.collapsed_duplicates;
      if (sel) j["cv_rmse"] = sel->best_score;
      io::write_file_atomic(fit_out, j.dump(2) + "\n");
      if (!fit_scores.empty()) {
        if (!sel) throw ValidationError("scores: requires --cv");
        io::write_file_atomic(fit_scores, io::score_table_csv(*sel));
      }
      if (!dump_weights.empty())
        io::write_file_atomic(dump_weights, io::weights_csv(weight_matrix(data.sites(), data.T, cfg, wopts)));
      return 0;
    }

    if (*pred_cmd) {
      const FitResult fr = io::fit_result_from_json(json::parse(io::read_file(pred_fit)));
      const auto opts = pred_data.options();
      const auto loaded = io::load_observations(pred_data.path, opts);
      if (fr.beta_hat.size() != loaded.obs.p())
        throw ValidationError("fit: coefficient count does not match the covariates of --data");
      const SpatialDataset data = SpatialDataset::build(loaded.obs, fr.cfg.k);

      // New sites: the response column is optional and ignored.
      const io::CsvTable t = io::read_csv(pred_sites);
      const std::size_t cx = t.column(opts.coords.first), cy = t.column(opts.coords.second);
      std::vector<std::size_t> cc;
      for (const auto& name : data.obs.covariate_names) cc.push_back(t.column(name));
      const bool has_id = t.has_column(opts.id_column);
      SiteSet targets;
      targets.design = Design::Irregular;
      Eigen::MatrixXd X0(static_cast<Eigen::Index>(t.rows.size()), data.p());
      for (std::size_t r = 0; r < t.rows.size(); ++r) {
        const auto& row = t.rows[r];
        const std::string ctx = "sites row " + std::to_string(r + 1);
        Site s;
        s.index = has_id ? static_cast<long>(io::parse_double(row[t.column(opts.id_column)], ctx)) : static_cast<long>(r);
        s.x = (io::parse_double(row[cx], ctx) - loaded.meta.x_offset) / loaded.meta.scale;
        s.y = (io::parse_double(row[cy], ctx) - loaded.meta.y_offset) / loaded.meta.scale;
        targets.sites.push_back(s);
        for (std::size_t j = 0; j < cc.size(); ++j)
          X0(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(j)) = io::parse_double(row[cc[j]], ctx);
      }
      // r_hat in the fit file is tied to the training responses; predictions
      // are recomputed from the stored coefficients and this training set.
      FitResult use = fr;
      use.r_hat = fit_r(weight_matrix(data.sites(), data.T, fr.cfg, wopts), data.Y(), data.X(), fr.beta_hat);
      const Eigen::VectorXd yhat = predict_many(X0, targets, data, use, wopts);
      std::string csv = "site_id,prediction\n";
      for (Eigen::Index i = 0; i < yhat.size(); ++i)
        csv += std::to_string(targets[static_cast<std::size_t>(i)].index) + ',' + io::format_report(yhat(i)) + '\n';
      io::write_file_atomic(pred_out, csv);
      return 0;
    }

    if (*eval_cmd) {
      ExperimentConfig cfg;
      cfg.sim = eval_sim.resolve(g.seed);
      cfg.methods = parse_methods(eval_methods);
      cfg.replications = eval_reps;
      cfg.train_frac = train_frac;
      cfg.search = eval_search.resolve(WeightVariant::K2ME);
      cfg.master_seed = g.seed;
      cfg.weights = wopts;
      const ExperimentSummary s = run_experiment(cfg);
      report_failures(s, err);
      write_experiment(s, eval_out);
      return 0;
    }

    if (*t1_cmd) {
      ExperimentConfig cfg;
      cfg.sim.design = parse_design(t1_design);
      cfg.sim.n = t1_n;
      cfg.sim.rho = t1_rho;
      cfg.sim.seed = g.seed;
      cfg.methods = parse_methods(t1_methods);
      cfg.replications = t1_reps;
      cfg.master_seed = g.seed;
      cfg.weights = wopts;
      const ExperimentSummary s = run_experiment(cfg);
      report_failures(s, err);
      out << "method,mae_mean,mae_sd,rmse_mean,rmse_sd\n";
      for (const auto& a : s.aggregates)
        out << to_string(a.method) << ',' << io::format_report(a.mae_mean) << ',' << io::format_report(a.mae_sd) << ','
            << io::format_report(a.rmse_mean) << ',' << io::format_report(a.rmse_sd) << '\n';
      if (!t1_out.empty()) write_experiment(s, t1_out);
      return 0;
    }
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << '\n';
    return 2;
  } catch (const json::exception& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return 1;
  }
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args;
  for (int i = 1; i < argc; ++i) args.emplace_back(argv[i]);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace semisar
