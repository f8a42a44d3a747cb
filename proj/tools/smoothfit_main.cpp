// smoothfit command-line tool: fit, select, simulate. Uses only the C API.
#include <CLI11.hpp>
#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include "smoothfit/smoothfit.h"

namespace {

constexpr int exit_input = 2;
constexpr int exit_numeric = 3;

struct CliFailure {
  int code;
  std::string message;
};

int exit_code_of(sf_status s) {
  switch (s) {
    case SF_ERR_INVALID_INPUT:
    case SF_ERR_INVALID_BANDWIDTH:
    case SF_ERR_DOMAIN:
    case SF_ERR_IO: return exit_input;
    default: return exit_numeric;
  }
}

void check(sf_status s) {
  if (s != SF_OK)
    throw CliFailure{exit_code_of(s), std::string(sf_status_name(s)) + ": " + sf_last_error()};
}

std::vector<double> parse_list(const std::string& text, const char* what) {
  std::vector<double> out;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find(',', start);
    if (end == std::string::npos) end = text.size();
    std::string item = text.substr(start, end - start);
    char* stop = nullptr;
    errno = 0;
    double v = std::strtod(item.c_str(), &stop);
    if (item.empty() || *stop != '\0' || errno == ERANGE)
      throw CliFailure{exit_input, std::string("cannot parse ") + what + " value '" + item + "'"};
    out.push_back(v);
    start = end + 1;
  }
  return out;
}

void write_output(const std::string& path, const char* text) {
  if (path.empty() || path == "-") {
    std::cout << text << '\n';
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw CliFailure{exit_input, "cannot open '" + path + "' for writing"};
  f << text << '\n';
  if (!f) throw CliFailure{exit_input, "failed writing '" + path + "'"};
}

struct OwnedString {
  char* s = nullptr;
  ~OwnedString() { sf_string_free(s); }
};

struct Dataset {
  sf_dataset* h = nullptr;
  ~Dataset() { sf_dataset_free(h); }
};

struct SearchArgs {
  std::string smoother = "ll";
  std::string kernel = "biweight";
  int grid_points = 25;
  int candidates = 25;
  double pilot_factor = 1.5;
  std::string box;
  double h0 = 0.1;
  double outer_tol = 1e-3;
  int max_outer = 25;
  double tol = 1e-6;
  int max_sweeps = 200;
};

void add_search_flags(CLI::App* cmd, SearchArgs& a) {
  cmd->add_option("--smoother", a.smoother, "nw or ll")
      ->check(CLI::IsMember({"nw", "ll"}))
      ->capture_default_str();
  cmd->add_option("--kernel", a.kernel, "kernel name")
      ->check(CLI::IsMember({"biweight", "epanechnikov"}))
      ->capture_default_str();
  cmd->add_option("--grid,--grid-points", a.grid_points, "estimation grid points")->capture_default_str();
  cmd->add_option("--candidates", a.candidates, "candidate bandwidths per axis")
      ->capture_default_str();
  cmd->add_option("--pilot-factor", a.pilot_factor, "curvature pilot g = factor * h")
      ->capture_default_str();
  cmd->add_option("--box", a.box, "candidate box LO,HI in units of n^(-1/5)");
  cmd->add_option("--h0", a.h0, "starting bandwidth")->capture_default_str();
  cmd->add_option("--outer-tol", a.outer_tol, "outer relative tolerance")->capture_default_str();
  cmd->add_option("--max-outer", a.max_outer, "outer iteration cap")->capture_default_str();
  cmd->add_option("--tol", a.tol, "backfitting tolerance")->capture_default_str();
  cmd->add_option("--max-sweeps", a.max_sweeps, "backfitting sweep cap")->capture_default_str();
}

sf_select_options select_options(const SearchArgs& a, const std::string& method) {
  sf_select_options o;
  sf_select_options_default(&o);
  o.fit.smoother = a.smoother == "nw" ? SF_SMOOTHER_NW : SF_SMOOTHER_LL;
  o.fit.kernel = a.kernel.c_str();
  o.fit.grid_points = a.grid_points;
  o.fit.tol = a.tol;
  o.fit.max_sweeps = a.max_sweeps;
  o.n_candidates = a.candidates;
  o.pilot_factor = a.pilot_factor;
  o.h0 = a.h0;
  o.outer_tol = a.outer_tol;
  o.max_outer = a.max_outer;
  if (!a.box.empty()) {
    auto b = parse_list(a.box, "--box");
    if (b.size() != 2) throw CliFailure{exit_input, "--box needs LO,HI"};
    o.box_lo = b[0];
    o.box_hi = b[1];
  }
  if (method == "pls")
    o.method = SF_SELECT_PLS;
  else if (method == "pl")
    o.method = SF_SELECT_PL;
  else if (method == "pl-coord")
    o.method = SF_SELECT_PL_COORD;
  else
    o.method = SF_SELECT_PL_STAR;
  if (o.method != SF_SELECT_PLS && o.fit.smoother != SF_SMOOTHER_LL)
    throw CliFailure{exit_input, "plug-in requires local linear"};
  return o;
}

void load(Dataset& data, const std::string& input, const std::string& rescale) {
  check(sf_dataset_read_csv(input.c_str(), &data.h));
  if (rescale == "minmax") check(sf_dataset_rescale_minmax(data.h));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Smooth backfitting for additive models with automatic bandwidth selection"};
  app.require_subcommand(1);
  app.set_version_flag("--version", sf_version());

  std::string input, out, rescale, method = "pls", select_method, h_text;
  SearchArgs search;

  auto* fit = app.add_subcommand("fit", "fit an additive model");
  fit->set_help_flag("--help", "print this help message and exit");
  fit->add_option("--input", input, "CSV with header x1,...,xd,y")->required();
  fit->add_option("--out", out, "output JSON path (default stdout)");
  auto* h_opt = fit->add_option("--h", h_text, "bandwidths h1,...,hd; skips selection");
  fit->add_option("--select", select_method, "selector when --h is absent")
      ->check(CLI::IsMember({"pls", "pl", "pl-coord", "pl-star"}))
      ->excludes(h_opt);
  fit->add_option("--rescale", rescale, "minmax")->check(CLI::IsMember({"minmax"}));
  add_search_flags(fit, search);

  SearchArgs sel_search;
  std::string sel_input, sel_out, sel_rescale;
  auto* select = app.add_subcommand("select", "select bandwidths");
  select->add_option("--input", sel_input, "CSV with header x1,...,xd,y")->required();
  select->add_option("--out", sel_out, "output JSON path (default stdout)");
  select->add_option("--method", method, "pls, pl, pl-coord or pl-star")
      ->check(CLI::IsMember({"pls", "pl", "pl-coord", "pl-star"}))
      ->capture_default_str();
  select->add_option("--rescale", sel_rescale, "minmax")->check(CLI::IsMember({"minmax"}));
  add_search_flags(select, sel_search);

  std::string model = "m1", centering = "population", sim_out, methods, quantiles_csv, logdiff_csv;
  int n = 200, reps = 100, threads = 0;
  double rho = 0.0, cov_var = 0.5, sigma2 = 0.01;
  std::uint64_t seed = 1;
  SearchArgs sim_search;
  auto* sim = app.add_subcommand("simulate", "run the Monte Carlo study");
  sim->add_option("--model", model, "m1 or m2")
      ->check(CLI::IsMember({"m1", "m2"}))
      ->capture_default_str();
  sim->add_option("--n", n, "sample size")->capture_default_str();
  sim->add_option("--rho", rho, "common covariate correlation")->capture_default_str();
  sim->add_option("--reps", reps, "replicates")->capture_default_str();
  sim->add_option("--seed", seed, "master seed")->capture_default_str();
  sim->add_option("--out", sim_out, "report JSON path (default stdout)");
  sim->add_option("--cov-var", cov_var, "variance of the untruncated covariates")
      ->capture_default_str();
  sim->add_option("--centering", centering, "population or sample")
      ->check(CLI::IsMember({"population", "sample"}))
      ->capture_default_str();
  sim->add_option("--sigma2", sigma2, "noise variance")->capture_default_str();
  sim->add_option("--methods", methods, "comma list of selectors");
  sim->add_option("--threads", threads, "worker threads (0: automatic)")->capture_default_str();
  sim->add_option("--quantiles-csv", quantiles_csv, "write quantile-plot rows");
  sim->add_option("--logdiff-csv", logdiff_csv, "write log-bandwidth differences");
  add_search_flags(sim, sim_search);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return exit_input;
  }

  try {
    if (*fit) {
      Dataset data;
      load(data, input, rescale);
      size_t nrow = 0, d = 0;
      check(sf_dataset_shape(data.h, &nrow, &d));
      sf_select_options o = select_options(search, select_method.empty() ? "pls" : select_method);
      std::vector<double> h;
      sf_selection* selection = nullptr;
      if (!h_text.empty()) {
        h = parse_list(h_text, "--h");
        if (h.size() != d)
          throw CliFailure{exit_input, "--h needs " + std::to_string(d) + " values"};
      } else {
        check(sf_select_run(data.h, &o, &selection));
        h.resize(d);
        sf_status s = sf_selection_bandwidths(selection, h.data(), d);
        if (s != SF_OK) sf_selection_free(selection);
        check(s);
      }
      sf_fit* f = nullptr;
      sf_status s = sf_fit_run(data.h, h.data(), d, &o.fit, &f);
      OwnedString json;
      if (s == SF_OK) s = sf_fit_to_json(f, selection, &json.s);
      sf_fit_free(f);
      sf_selection_free(selection);
      check(s);
      write_output(out, json.s);
    } else if (*select) {
      Dataset data;
      load(data, sel_input, sel_rescale);
      sf_select_options o = select_options(sel_search, method);
      sf_selection* selection = nullptr;
      check(sf_select_run(data.h, &o, &selection));
      OwnedString json;
      sf_status s = sf_selection_to_json(selection, &json.s);
      sf_selection_free(selection);
      check(s);
      write_output(sel_out, json.s);
    } else if (*sim) {
      if (reps < 1) throw CliFailure{exit_input, "--reps must be at least 1"};
      if (sim_search.smoother != "ll")
        throw CliFailure{exit_input, "the simulation study uses local linear"};
      sf_sim_options o;
      sf_sim_options_default(&o);
      o.model = model == "m1" ? SF_MODEL_M1 : SF_MODEL_M2;
      o.n = n;
      o.rho = rho;
      o.sigma2 = sigma2;
      o.cov_var = cov_var;
      o.replicates = reps;
      o.seed = seed;
      o.centering = centering == "population" ? SF_CENTER_POPULATION : SF_CENTER_SAMPLE;
      o.threads = threads;
      o.methods = methods.empty() ? nullptr : methods.c_str();
      o.search = select_options(sim_search, "pls");
      sf_report* report = nullptr;
      check(sf_simulate_run(&o, &report));
      OwnedString json, q, l;
      sf_status s = sf_report_to_json(report, &json.s);
      if (s == SF_OK && !quantiles_csv.empty()) s = sf_report_quantiles_csv(report, &q.s);
      if (s == SF_OK && !logdiff_csv.empty()) s = sf_report_logdiff_csv(report, &l.s);
      sf_report_free(report);
      check(s);
      write_output(sim_out, json.s);
      if (q.s) write_output(quantiles_csv, q.s);
      if (l.s) write_output(logdiff_csv, l.s);
    }
  } catch (const CliFailure& f) {
    std::cerr << "smoothfit: " << f.message << '\n';
    return f.code;
  }
  return 0;
}
