#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "sparsepls.h"

namespace {

using nlohmann::json;

// 0 success, 1 computation failure, 2 usage/config error.
int exit_code_for(spls_status st) {
  switch (st) {
    case SPLS_OK: return 0;
    case SPLS_ERR_NUMERIC:
    case SPLS_ERR_INTERNAL: return 1;
    default: return 2;
  }
}

int report_error(spls_status st) {
  std::fprintf(stderr, "error: %s\n", spls_last_error());
  return exit_code_for(st);
}

int usage_error(const std::string& msg) {
  std::fprintf(stderr, "error: %s\n", msg.c_str());
  return 2;
}

bool write_text_file(const std::string& path, const std::string& text, std::string& err) {
  std::ofstream out(path, std::ios::binary);
  if (!out) {
    err = "cannot open file for writing: " + path;
    return false;
  }
  out << text;
  if (!out) {
    err = "write failed: " + path;
    return false;
  }
  return true;
}

// Emit to the path when given, stdout otherwise.
int emit(const std::string& path, const std::string& text) {
  if (path.empty()) {
    std::fputs(text.c_str(), stdout);
    if (!text.empty() && text.back() != '\n') std::fputc('\n', stdout);
    return 0;
  }
  std::string err;
  if (!write_text_file(path, text, err)) return usage_error(err);
  return 0;
}

bool parse_int_list(const std::string& text, std::vector<int>& out) {
  out.clear();
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(tok, &used));
      if (used != tok.size()) return false;
    } catch (...) {
      return false;
    }
  }
  return !out.empty();
}

bool parse_double_list(const std::string& text, std::vector<double>& out) {
  out.clear();
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) {
    try {
      size_t used = 0;
      out.push_back(std::stod(tok, &used));
      if (used != tok.size()) return false;
    } catch (...) {
      return false;
    }
  }
  return !out.empty();
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> out;
  std::stringstream ss(text);
  std::string tok;
  while (std::getline(ss, tok, ',')) out.push_back(tok);
  return out;
}

// Flags shared by the config-driven subcommands. Values are applied on top
// of the (optional) JSON config file.
struct ExperimentFlags {
  std::string config_path;
  int model = 0;
  std::int64_t n = 100, p = 5000;
  std::string x, y, subjects;
  double test_fraction = 0.25;
  bool no_header = false;
  std::string methods;
  std::string k_grid, lambda_grid;
  int lambda_points = 8, folds = 10, trials = 1, threads = 1;
  std::uint64_t seed = 0;
  bool scale = false;
  std::string mse_mode;
  double mu0 = 2000.0, mu_growth = 1.01;
  std::string dual_rescale;  // on|off
  double kappa = 0.5 - 1e-6;
  std::string timing;  // on|off
  std::string out;
};

void add_admm_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--mu0", f.mu0, "initial penalty weight of the row-sparse fit");
  cmd->add_option("--mu-growth", f.mu_growth, "per-iteration penalty growth factor");
  cmd->add_option("--dual-rescale", f.dual_rescale, "rescale the dual on penalty growth")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--kappa", f.kappa, "entrywise-sparse baseline mixing weight");
}

void add_experiment_flags(CLI::App* cmd, ExperimentFlags& f) {
  cmd->add_option("--config", f.config_path, "JSON config file (flags override it)")
      ->check(CLI::ExistingFile);
  cmd->add_option("--model", f.model, "synthetic design 1..4")->check(CLI::Range(1, 4));
  cmd->add_option("--n", f.n, "synthetic sample count");
  cmd->add_option("--p", f.p, "synthetic predictor count");
  cmd->add_option("--x", f.x, "predictor csv path");
  cmd->add_option("--y", f.y, "response csv path");
  cmd->add_option("--subjects", f.subjects, "subject label file (group-aware splits)");
  cmd->add_option("--test-fraction", f.test_fraction, "held-out share for csv trials");
  cmd->add_flag("--no-header", f.no_header, "csv files carry no header row");
  cmd->add_option("--methods", f.methods, "comma list: nipals,simpls,global_simpls,l1_spls");
  cmd->add_option("--k-grid", f.k_grid, "comma list of component counts");
  cmd->add_option("--lambda-grid", f.lambda_grid, "comma list of penalties");
  cmd->add_option("--lambda-points", f.lambda_points, "size of the default penalty grid");
  cmd->add_option("--folds", f.folds, "cross-validation folds");
  cmd->add_option("--seed", f.seed, "master seed");
  cmd->add_option("--trials", f.trials, "number of train/test trials");
  cmd->add_option("--threads", f.threads, "parallel trials");
  cmd->add_flag("--scale", f.scale, "scale predictor columns to unit variance");
  cmd->add_option("--mse-mode", f.mse_mode, "mse aggregation across responses")
      ->check(CLI::IsMember({"mean", "sum"}));
  add_admm_flags(cmd, f);
  cmd->add_option("--timing", f.timing, "include wall-clock fields in the report")
      ->check(CLI::IsMember({"on", "off"}));
  cmd->add_option("--out", f.out, "output path (stdout when omitted)");
}

// Returns false (with message) when the merged config cannot be assembled.
bool build_config_json(const CLI::App* cmd, const ExperimentFlags& f, json& cfg,
                       std::string& err) {
  cfg = json::object();
  if (cmd->count("--config")) {
    std::ifstream in(f.config_path, std::ios::binary);
    std::ostringstream ss;
    ss << in.rdbuf();
    try {
      cfg = json::parse(ss.str());
    } catch (const json::exception& e) {
      err = "config file " + f.config_path + ": " + e.what();
      return false;
    }
    if (!cfg.is_object()) {
      err = "config file " + f.config_path + ": expected a JSON object";
      return false;
    }
  }
  const bool csv_flags = cmd->count("--x") || cmd->count("--y");
  if (cmd->count("--model") && csv_flags) {
    err = "--model and --x/--y are mutually exclusive";
    return false;
  }
  if (cmd->count("--model")) {
    json source{{"type", "sim"}, {"model", f.model}};
    source["n"] = cmd->count("--n") ? f.n
                   : (cfg.contains("source") && cfg["source"].value("type", "") == "sim" &&
                      cfg["source"].contains("n"))
                       ? cfg["source"]["n"].get<std::int64_t>()
                       : f.n;
    source["p"] = cmd->count("--p") ? f.p
                   : (cfg.contains("source") && cfg["source"].value("type", "") == "sim" &&
                      cfg["source"].contains("p"))
                       ? cfg["source"]["p"].get<std::int64_t>()
                       : f.p;
    cfg["source"] = source;
  } else if (csv_flags) {
    if (!cmd->count("--x") || !cmd->count("--y")) {
      err = "csv source needs both --x and --y";
      return false;
    }
    json source{{"type", "csv"}, {"x", f.x}, {"y", f.y}, {"has_header", !f.no_header},
                {"test_fraction", f.test_fraction}};
    if (cmd->count("--subjects")) source["subjects"] = f.subjects;
    cfg["source"] = source;
  } else {
    if (cmd->count("--n")) cfg["source"]["n"] = f.n;
    if (cmd->count("--p")) cfg["source"]["p"] = f.p;
    if (cmd->count("--test-fraction")) cfg["source"]["test_fraction"] = f.test_fraction;
    if (cmd->count("--subjects")) cfg["source"]["subjects"] = f.subjects;
    if (cmd->count("--no-header")) cfg["source"]["has_header"] = false;
  }
  if (cmd->count("--methods")) cfg["methods"] = split_list(f.methods);
  if (cmd->count("--k-grid")) {
    std::vector<int> ks;
    if (!parse_int_list(f.k_grid, ks)) {
      err = "--k-grid expects a comma list of integers";
      return false;
    }
    cfg["k_grid"] = ks;
  }
  if (cmd->count("--lambda-grid")) {
    std::vector<double> ls;
    if (!parse_double_list(f.lambda_grid, ls)) {
      err = "--lambda-grid expects a comma list of numbers";
      return false;
    }
    cfg["lambda_grid"] = ls;
  }
  if (cmd->count("--lambda-points")) cfg["lambda_points"] = f.lambda_points;
  if (cmd->count("--folds")) cfg["folds"] = f.folds;
  if (cmd->count("--seed")) cfg["seed"] = f.seed;
  if (cmd->count("--trials")) cfg["trials"] = f.trials;
  if (cmd->count("--threads")) cfg["threads"] = f.threads;
  if (cmd->count("--scale")) cfg["scale"] = true;
  if (cmd->count("--mse-mode")) cfg["mse_mode"] = f.mse_mode;
  if (cmd->count("--mu0")) cfg["admm"]["mu0"] = f.mu0;
  if (cmd->count("--mu-growth")) cfg["admm"]["mu_growth"] = f.mu_growth;
  if (cmd->count("--dual-rescale")) cfg["admm"]["dual_rescale"] = f.dual_rescale == "on";
  if (cmd->count("--kappa")) cfg["l1"]["kappa"] = f.kappa;
  if (cmd->count("--timing")) cfg["include_timing"] = f.timing == "on";
  return true;
}

// Flags for the single-dataset subcommands (fit, cv).
struct DataFlags {
  int model = 0;
  std::int64_t n = 100, p = 5000;
  std::uint64_t seed = 0;
  std::string x, y, subjects;
  bool no_header = false;
};

void add_data_flags(CLI::App* cmd, DataFlags& f) {
  cmd->add_option("--model", f.model, "synthetic design 1..4")->check(CLI::Range(1, 4));
  cmd->add_option("--n", f.n, "synthetic sample count");
  cmd->add_option("--p", f.p, "synthetic predictor count");
  cmd->add_option("--x", f.x, "predictor csv path")->check(CLI::ExistingFile);
  cmd->add_option("--y", f.y, "response csv path")->check(CLI::ExistingFile);
  cmd->add_option("--subjects", f.subjects, "subject label file")->check(CLI::ExistingFile);
  cmd->add_flag("--no-header", f.no_header, "csv files carry no header row");
}

// Builds the dataset; returns nonzero exit code on failure.
int make_dataset(const CLI::App* cmd, const DataFlags& f, std::uint64_t sim_seed,
                 spls_dataset** out) {
  const bool csv_flags = cmd->count("--x") || cmd->count("--y");
  if (cmd->count("--model") && csv_flags) return usage_error("--model and --x/--y are mutually exclusive");
  if (csv_flags) {
    if (!cmd->count("--x") || !cmd->count("--y")) return usage_error("csv source needs both --x and --y");
    const spls_status st = spls_dataset_from_csv(
        f.x.c_str(), f.y.c_str(), f.no_header ? 0 : 1,
        f.subjects.empty() ? nullptr : f.subjects.c_str(), out);
    return st == SPLS_OK ? 0 : report_error(st);
  }
  if (!cmd->count("--model")) return usage_error("no data source: pass --model or --x/--y");
  const spls_status st = spls_dataset_simulate(f.model, f.n, f.p, sim_seed, out);
  return st == SPLS_OK ? 0 : report_error(st);
}

json options_json(const CLI::App* cmd, bool scale, double mu0, double mu_growth,
                  const std::string& dual_rescale, double kappa) {
  json j = json::object();
  if (cmd->count("--scale")) j["scale"] = scale;
  if (cmd->count("--mu0")) j["admm"]["mu0"] = mu0;
  if (cmd->count("--mu-growth")) j["admm"]["mu_growth"] = mu_growth;
  if (cmd->count("--dual-rescale")) j["admm"]["dual_rescale"] = dual_rescale == "on";
  if (cmd->count("--kappa")) j["l1"]["kappa"] = kappa;
  return j;
}

int run_simulate(const CLI::App* cmd, const DataFlags& f, const std::string& x_out,
                 const std::string& y_out, const std::string& beta_out) {
  if (!cmd->count("--model")) return usage_error("simulate needs --model");
  spls_dataset* data = nullptr;
  spls_status st = spls_dataset_simulate(f.model, f.n, f.p, f.seed, &data);
  if (st != SPLS_OK) return report_error(st);
  st = spls_dataset_save_csv(data, x_out.empty() ? nullptr : x_out.c_str(),
                             y_out.empty() ? nullptr : y_out.c_str(),
                             beta_out.empty() ? nullptr : beta_out.c_str());
  spls_dataset_free(data);
  return st == SPLS_OK ? 0 : report_error(st);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse partial least squares toolkit"};
  app.require_subcommand(1);

  // simulate
  DataFlags sim_flags;
  std::string sim_x_out, sim_y_out, sim_beta_out;
  CLI::App* sim = app.add_subcommand("simulate", "draw a synthetic dataset and write csv files");
  sim->add_option("--model", sim_flags.model, "synthetic design 1..4")
      ->required()
      ->check(CLI::Range(1, 4));
  sim->add_option("--n", sim_flags.n, "sample count");
  sim->add_option("--p", sim_flags.p, "predictor count");
  sim->add_option("--seed", sim_flags.seed, "generator seed");
  sim->add_option("--x-out", sim_x_out, "predictor csv output path");
  sim->add_option("--y-out", sim_y_out, "response csv output path");
  sim->add_option("--beta-out", sim_beta_out, "generating coefficient csv output path");

  // fit
  DataFlags fit_data;
  ExperimentFlags fit_opts;
  std::string fit_method_name;
  int fit_k = 1;
  double fit_lambda = 0.0;
  CLI::App* fit = app.add_subcommand("fit", "fit one model and dump it as JSON");
  add_data_flags(fit, fit_data);
  fit->add_option("--seed", fit_data.seed, "synthetic data seed");
  fit->add_option("--method", fit_method_name, "nipals|simpls|global_simpls|l1_spls")->required();
  fit->add_option("-k,--components", fit_k, "component count")->required();
  fit->add_option("--lambda", fit_lambda, "sparsity penalty");
  fit->add_flag("--scale", fit_opts.scale, "scale predictor columns to unit variance");
  add_admm_flags(fit, fit_opts);
  fit->add_option("--out", fit_opts.out, "model JSON path (stdout when omitted)");

  // cv
  DataFlags cv_data;
  ExperimentFlags cv_opts;
  std::string cv_method_name;
  CLI::App* cv = app.add_subcommand("cv", "grid-searched cross validation on one dataset");
  add_data_flags(cv, cv_data);
  cv->add_option("--method", cv_method_name, "nipals|simpls|global_simpls|l1_spls")->required();
  cv->add_option("--k-grid", cv_opts.k_grid, "comma list of component counts");
  cv->add_option("--lambda-grid", cv_opts.lambda_grid, "comma list of penalties");
  cv->add_option("--lambda-points", cv_opts.lambda_points, "size of the default penalty grid");
  cv->add_option("--folds", cv_opts.folds, "fold count");
  cv->add_option("--seed", cv_opts.seed, "fold/simulation seed");
  cv->add_option("--threads", cv_opts.threads, "parallel folds");
  cv->add_flag("--scale", cv_opts.scale, "scale predictor columns to unit variance");
  cv->add_option("--mse-mode", cv_opts.mse_mode, "mean|sum")
      ->check(CLI::IsMember({"mean", "sum"}));
  add_admm_flags(cv, cv_opts);
  cv->add_option("--out", cv_opts.out, "result JSON path (stdout when omitted)");

  // experiment
  ExperimentFlags exp_flags;
  CLI::App* exp = app.add_subcommand("experiment", "multi-trial method comparison with a report");
  add_experiment_flags(exp, exp_flags);

  // selection-frequency
  ExperimentFlags freq_flags;
  CLI::App* freq = app.add_subcommand("selection-frequency",
                                      "per-variable selection counts across trials (csv)");
  add_experiment_flags(freq, freq_flags);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  if (sim->parsed()) return run_simulate(sim, sim_flags, sim_x_out, sim_y_out, sim_beta_out);

  if (fit->parsed()) {
    spls_dataset* data = nullptr;
    int rc = make_dataset(fit, fit_data, fit_data.seed, &data);
    if (rc != 0) return rc;
    const json opts = options_json(fit, fit_opts.scale, fit_opts.mu0, fit_opts.mu_growth,
                                   fit_opts.dual_rescale, fit_opts.kappa);
    spls_model* model = nullptr;
    spls_status st =
        spls_fit(data, fit_method_name.c_str(), fit_k, fit_lambda, opts.dump().c_str(), &model);
    spls_dataset_free(data);
    if (st != SPLS_OK) return report_error(st);
    char* text = nullptr;
    st = spls_model_to_json(model, &text);
    spls_model_free(model);
    if (st != SPLS_OK) return report_error(st);
    rc = emit(fit_opts.out, text);
    spls_string_free(text);
    return rc;
  }

  if (cv->parsed()) {
    spls_dataset* data = nullptr;
    int rc = make_dataset(cv, cv_data, cv_opts.seed, &data);
    if (rc != 0) return rc;
    json cfg{{"method", cv_method_name}};
    if (cv->count("--k-grid")) {
      std::vector<int> ks;
      if (!parse_int_list(cv_opts.k_grid, ks)) {
        spls_dataset_free(data);
        return usage_error("--k-grid expects a comma list of integers");
      }
      cfg["k_grid"] = ks;
    }
    if (cv->count("--lambda-grid")) {
      std::vector<double> ls;
      if (!parse_double_list(cv_opts.lambda_grid, ls)) {
        spls_dataset_free(data);
        return usage_error("--lambda-grid expects a comma list of numbers");
      }
      cfg["lambda_grid"] = ls;
    }
    if (cv->count("--lambda-points")) cfg["lambda_points"] = cv_opts.lambda_points;
    if (cv->count("--folds")) cfg["folds"] = cv_opts.folds;
    if (cv->count("--seed")) cfg["seed"] = cv_opts.seed;
    if (cv->count("--threads")) cfg["threads"] = cv_opts.threads;
    if (cv->count("--mse-mode")) cfg["mse_mode"] = cv_opts.mse_mode;
    const json opts = options_json(cv, cv_opts.scale, cv_opts.mu0, cv_opts.mu_growth,
                                   cv_opts.dual_rescale, cv_opts.kappa);
    cfg.update(opts);
    char* text = nullptr;
    const spls_status st = spls_cross_validate(data, cfg.dump().c_str(), &text);
    spls_dataset_free(data);
    if (st != SPLS_OK) return report_error(st);
    const int out_rc = emit(cv_opts.out, text);
    spls_string_free(text);
    return out_rc;
  }

  const bool freq_mode = freq->parsed();
  const CLI::App* cmd = freq_mode ? freq : exp;
  const ExperimentFlags& flags = freq_mode ? freq_flags : exp_flags;

  json cfg;
  std::string err;
  if (!build_config_json(cmd, flags, cfg, err)) return usage_error(err);

  if (freq_mode) {
    char* csv_text = nullptr;
    const spls_status st = spls_selection_frequency_run(cfg.dump().c_str(), &csv_text);
    if (st != SPLS_OK) return report_error(st);
    const int rc = emit(flags.out, csv_text);
    spls_string_free(csv_text);
    return rc;
  }

  char* report_text = nullptr;
  char* table_text = nullptr;
  const spls_status st = spls_experiment_run(cfg.dump().c_str(), &report_text, &table_text);
  if (st != SPLS_OK) return report_error(st);

  int rc = emit(flags.out, report_text);
  if (rc == 0 && !flags.out.empty()) std::fputs(table_text, stdout);

  int failures = 0;
  bool all_failed = false;
  try {
    const json r = json::parse(report_text);
    all_failed = r.at("all_failed").get<bool>();
    for (const auto& [name, entry] : r.at("methods").items())
      failures += entry.at("aggregates").at("failures").get<int>();
  } catch (const json::exception&) {
    // report shape is produced by this library; treat surprises as fatal
    spls_string_free(report_text);
    spls_string_free(table_text);
    return usage_error("malformed report");
  }
  spls_string_free(report_text);
  spls_string_free(table_text);
  if (rc != 0) return rc;
  if (all_failed) {
    std::fprintf(stderr, "error: every trial failed\n");
    return 1;
  }
  if (failures > 0) std::fprintf(stderr, "warning: %d trial fits failed\n", failures);
  return 0;
}
