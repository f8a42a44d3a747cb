#include "smoothfit/smoothfit.h"

#include <cstdlib>
#include <cstring>
#include <new>
#include <optional>
#include <sstream>
#include <string>

#include "smoothfit/backfit_ll.hpp"
#include "smoothfit/error.hpp"
#include "smoothfit/selectors.hpp"
#include "smoothfit/serialize.hpp"
#include "smoothfit/simulate.hpp"

struct sf_dataset {
  smoothfit::Dataset data;
  std::optional<smoothfit::AffineMap> rescale;
};

struct sf_fit {
  smoothfit::AdditiveFit fit;
  std::optional<smoothfit::AffineMap> rescale;
};

struct sf_selection {
  smoothfit::SelectionResult result;
  std::optional<smoothfit::AffineMap> rescale;
};

struct sf_report {
  smoothfit::SimReport report;
};

namespace {

thread_local std::string last_error;

sf_status code_of(smoothfit::ErrorCode c) {
  using smoothfit::ErrorCode;
  switch (c) {
    case ErrorCode::invalid_input: return SF_ERR_INVALID_INPUT;
    case ErrorCode::invalid_bandwidth: return SF_ERR_INVALID_BANDWIDTH;
    case ErrorCode::domain: return SF_ERR_DOMAIN;
    case ErrorCode::empty_neighborhood: return SF_ERR_EMPTY_NEIGHBORHOOD;
    case ErrorCode::singular_moment: return SF_ERR_SINGULAR_MOMENT;
    case ErrorCode::non_convergence: return SF_ERR_NON_CONVERGENCE;
    case ErrorCode::selector_failure: return SF_ERR_SELECTOR_FAILURE;
    case ErrorCode::sampler_degenerate: return SF_ERR_SAMPLER_DEGENERATE;
    case ErrorCode::numeric: return SF_ERR_NUMERIC;
    case ErrorCode::io: return SF_ERR_IO;
  }
  return SF_ERR_INTERNAL;
}

sf_status fail(sf_status s, std::string msg) {
  last_error = std::move(msg);
  return s;
}

template <class F>
sf_status guarded(F&& f) {
  try {
    last_error.clear();
    f();
    return SF_OK;
  } catch (const smoothfit::Error& e) {
    return fail(code_of(e.code()), e.what());
  } catch (const std::bad_alloc&) {
    return fail(SF_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(SF_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(SF_ERR_INTERNAL, "unknown error");
  }
}

void require(bool ok, const char* what) {
  if (!ok) throw smoothfit::Error(smoothfit::ErrorCode::invalid_input, what);
}

char* dup(const std::string& s) {
  char* p = static_cast<char*>(std::malloc(s.size() + 1));
  if (!p) throw std::bad_alloc();
  std::memcpy(p, s.c_str(), s.size() + 1);
  return p;
}

smoothfit::BackfitOptions backfit_options(const sf_fit_options& o) {
  smoothfit::BackfitOptions b;
  b.kernel = smoothfit::Kernel::by_name(o.kernel ? o.kernel : "biweight");
  b.max_sweeps = o.max_sweeps;
  b.tol = o.tol;
  require(o.max_sweeps >= 1, "max_sweeps must be at least 1");
  require(o.tol > 0.0, "tol must be positive");
  return b;
}

smoothfit::Smoother smoother_of(int s) {
  require(s == SF_SMOOTHER_NW || s == SF_SMOOTHER_LL, "unknown smoother");
  return s == SF_SMOOTHER_NW ? smoothfit::Smoother::nw : smoothfit::Smoother::ll;
}

smoothfit::BandwidthSearchSpec search_spec(const sf_select_options& o) {
  smoothfit::BandwidthSearchSpec s;
  s.n_candidates = o.n_candidates;
  s.box_lo = o.box_lo;
  s.box_hi = o.box_hi;
  s.h0 = Eigen::VectorXd::Constant(1, o.h0);
  s.outer_tol = o.outer_tol;
  s.max_outer = o.max_outer;
  s.pilot_factor = o.pilot_factor;
  s.trim_cut = o.trim_cut;
  s.grid_size = o.fit.grid_points;
  s.backfit = backfit_options(o.fit);
  require(o.max_outer >= 1, "max_outer must be at least 1");
  require(o.outer_tol > 0.0, "outer_tol must be positive");
  require(o.pilot_factor > 0.0, "pilot factor must be positive");
  return s;
}

smoothfit::Method method_by_name(const std::string& s) {
  using smoothfit::Method;
  for (Method m : {Method::pls, Method::pl_grid, Method::pl_coord, Method::pl_star,
                   Method::ase_oracle, Method::ase_j_oracle, Method::pls1, Method::pl1})
    if (s == smoothfit::to_string(m)) return m;
  throw smoothfit::Error(smoothfit::ErrorCode::invalid_input, "unknown selector '" + s + "'");
}

}  // namespace

extern "C" {

const char* sf_version(void) { return "0.1.0"; }

const char* sf_last_error(void) { return last_error.c_str(); }

const char* sf_status_name(sf_status status) {
  switch (status) {
    case SF_OK: return "ok";
    case SF_ERR_INVALID_INPUT: return "invalid-input";
    case SF_ERR_INVALID_BANDWIDTH: return "invalid-bandwidth";
    case SF_ERR_DOMAIN: return "domain";
    case SF_ERR_EMPTY_NEIGHBORHOOD: return "empty-neighborhood";
    case SF_ERR_SINGULAR_MOMENT: return "singular-moment";
    case SF_ERR_NON_CONVERGENCE: return "non-convergence";
    case SF_ERR_SELECTOR_FAILURE: return "selector-failure";
    case SF_ERR_SAMPLER_DEGENERATE: return "sampler-degenerate";
    case SF_ERR_NUMERIC: return "numeric";
    case SF_ERR_IO: return "io";
    case SF_ERR_INTERNAL: return "internal";
  }
  return "unknown";
}

void sf_string_free(char* s) { std::free(s); }

sf_status sf_dataset_from_arrays(const double* x, const double* y, size_t n, size_t d,
                                 sf_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    *out = nullptr;
    require(x && y, "null data array");
    require(n > 0 && d > 0, "dataset needs n > 0 and d > 0");
    auto* h = new sf_dataset;
    h->data.x = Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                               Eigen::RowMajor>>(x, n, d);
    h->data.y = Eigen::Map<const Eigen::VectorXd>(y, n);
    *out = h;
  });
}

sf_status sf_dataset_read_csv(const char* path, sf_dataset** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    *out = nullptr;
    require(path != nullptr, "path is null");
    auto* h = new sf_dataset;
    try {
      h->data = smoothfit::read_csv(path);
    } catch (...) {
      delete h;
      throw;
    }
    *out = h;
  });
}

sf_status sf_dataset_shape(const sf_dataset* data, size_t* n, size_t* d) {
  return guarded([&] {
    require(data != nullptr, "dataset is null");
    if (n) *n = static_cast<size_t>(data->data.n());
    if (d) *d = static_cast<size_t>(data->data.d());
  });
}

sf_status sf_dataset_rescale_minmax(sf_dataset* data) {
  return guarded([&] {
    require(data != nullptr, "dataset is null");
    smoothfit::AffineMap map = smoothfit::rescale_minmax(data->data);
    if (data->rescale) {
      // Compose with an earlier map so the record still refers to raw units.
      map.offset = data->rescale->offset + data->rescale->scale.cwiseProduct(map.offset);
      map.scale = data->rescale->scale.cwiseProduct(map.scale);
    }
    data->rescale = map;
  });
}

void sf_dataset_free(sf_dataset* data) { delete data; }

void sf_fit_options_default(sf_fit_options* opts) {
  if (!opts) return;
  opts->smoother = SF_SMOOTHER_LL;
  opts->kernel = "biweight";
  opts->grid_points = smoothfit::Grid::default_size;
  opts->max_sweeps = smoothfit::BackfitOptions{}.max_sweeps;
  opts->tol = smoothfit::BackfitOptions{}.tol;
}

sf_status sf_fit_run(const sf_dataset* data, const double* h, size_t d, const sf_fit_options* opts,
                     sf_fit** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    *out = nullptr;
    require(data && h, "null argument");
    require(d == static_cast<size_t>(data->data.d()), "need one bandwidth per covariate");
    smoothfit::require_unit_cube(data->data);
    sf_fit_options o;
    sf_fit_options_default(&o);
    if (opts) o = *opts;
    smoothfit::Grid grid(o.grid_points);
    Eigen::VectorXd hv = Eigen::Map<const Eigen::VectorXd>(h, d);
    auto* f = new sf_fit;
    try {
      f->fit = smoothfit::backfit(smoother_of(o.smoother), data->data, hv, grid, backfit_options(o));
    } catch (...) {
      delete f;
      throw;
    }
    f->rescale = data->rescale;
    *out = f;
  });
}

sf_status sf_fit_predict(const sf_fit* fit, const double* x, size_t m, double* out) {
  return guarded([&] {
    require(fit && x && out, "null argument");
    const auto d = static_cast<Eigen::Index>(fit->fit.d());
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>> xm(
        x, static_cast<Eigen::Index>(m), d);
    for (size_t i = 0; i < m; ++i) {
      Eigen::VectorXd row = xm.row(static_cast<Eigen::Index>(i)).transpose();
      out[i] = smoothfit::predict(fit->fit, row);
    }
  });
}

sf_status sf_fit_bandwidths(const sf_fit* fit, double* out, size_t d) {
  return guarded([&] {
    require(fit && out, "null argument");
    require(d == static_cast<size_t>(fit->fit.d()), "buffer length must equal d");
    for (size_t j = 0; j < d; ++j) out[j] = fit->fit.bandwidths[static_cast<Eigen::Index>(j)];
  });
}

sf_status sf_fit_to_json(const sf_fit* fit, const sf_selection* selection, char** json) {
  return guarded([&] {
    require(fit && json, "null argument");
    *json = dup(smoothfit::fit_to_json(fit->fit, fit->rescale ? &*fit->rescale : nullptr,
                                       selection ? &selection->result : nullptr));
  });
}

void sf_fit_free(sf_fit* fit) { delete fit; }

void sf_select_options_default(sf_select_options* opts) {
  if (!opts) return;
  smoothfit::BandwidthSearchSpec s;
  opts->method = SF_SELECT_PLS;
  sf_fit_options_default(&opts->fit);
  opts->n_candidates = s.n_candidates;
  opts->box_lo = s.box_lo;
  opts->box_hi = s.box_hi;
  opts->h0 = s.h0[0];
  opts->outer_tol = s.outer_tol;
  opts->max_outer = s.max_outer;
  opts->pilot_factor = s.pilot_factor;
  opts->trim_cut = s.trim_cut;
}

sf_status sf_select_run(const sf_dataset* data, const sf_select_options* opts,
                        sf_selection** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    *out = nullptr;
    require(data != nullptr, "dataset is null");
    smoothfit::require_unit_cube(data->data);
    sf_select_options o;
    sf_select_options_default(&o);
    if (opts) o = *opts;
    smoothfit::BandwidthSearchSpec spec = search_spec(o);
    smoothfit::Smoother sm = smoother_of(o.fit.smoother);
    if (o.method != SF_SELECT_PLS && sm != smoothfit::Smoother::ll)
      throw smoothfit::Error(smoothfit::ErrorCode::invalid_input, "plug-in requires local linear");
    smoothfit::SelectionResult r;
    switch (o.method) {
      case SF_SELECT_PLS: r = smoothfit::select_pls(data->data, sm, spec); break;
      case SF_SELECT_PL: r = smoothfit::select_pl(data->data, spec, smoothfit::PlMode::full_grid); break;
      case SF_SELECT_PL_COORD:
        r = smoothfit::select_pl(data->data, spec, smoothfit::PlMode::coordinate);
        break;
      case SF_SELECT_PL_STAR: r = smoothfit::select_pl_star(data->data, spec); break;
      default: require(false, "unknown selection method");
    }
    *out = new sf_selection{std::move(r), data->rescale};
  });
}

sf_status sf_selection_bandwidths(const sf_selection* sel, double* out, size_t d) {
  return guarded([&] {
    require(sel && out, "null argument");
    require(d == static_cast<size_t>(sel->result.bandwidths.size()), "buffer length must equal d");
    for (size_t j = 0; j < d; ++j) out[j] = sel->result.bandwidths[static_cast<Eigen::Index>(j)];
  });
}

sf_status sf_selection_to_json(const sf_selection* sel, char** json) {
  return guarded([&] {
    require(sel && json, "null argument");
    *json = dup(smoothfit::selection_to_json(sel->result, sel->rescale ? &*sel->rescale : nullptr));
  });
}

void sf_selection_free(sf_selection* sel) { delete sel; }

void sf_sim_options_default(sf_sim_options* opts) {
  if (!opts) return;
  smoothfit::SimConfig c;
  opts->model = SF_MODEL_M1;
  opts->n = c.n;
  opts->rho = c.rho;
  opts->sigma2 = c.sigma2;
  opts->cov_var = c.cov_var;
  opts->replicates = c.replicates;
  opts->seed = c.seed;
  opts->centering = SF_CENTER_POPULATION;
  opts->threads = 0;
  opts->methods = nullptr;
  sf_select_options_default(&opts->search);
}

sf_status sf_simulate_run(const sf_sim_options* opts, sf_report** out) {
  return guarded([&] {
    require(out != nullptr, "output handle is null");
    *out = nullptr;
    sf_sim_options o;
    sf_sim_options_default(&o);
    if (opts) o = *opts;
    require(o.model == SF_MODEL_M1 || o.model == SF_MODEL_M2, "unknown model");
    require(o.search.fit.smoother == SF_SMOOTHER_LL, "the simulation study uses local linear");
    smoothfit::SimConfig c;
    c.model = o.model == SF_MODEL_M1 ? smoothfit::Model::m1 : smoothfit::Model::m2;
    c.n = o.n;
    c.rho = o.rho;
    c.sigma2 = o.sigma2;
    c.cov_var = o.cov_var;
    c.replicates = o.replicates;
    c.seed = o.seed;
    require(o.centering == SF_CENTER_POPULATION || o.centering == SF_CENTER_SAMPLE,
            "unknown centering");
    c.centering = o.centering == SF_CENTER_POPULATION ? smoothfit::Centering::population
                                                      : smoothfit::Centering::sample;
    c.threads = o.threads;
    c.search = search_spec(o.search);
    if (o.methods && *o.methods) {
      std::stringstream ss(o.methods);
      std::string item;
      while (std::getline(ss, item, ','))
        if (!item.empty()) c.methods.push_back(method_by_name(item));
    }
    *out = new sf_report{smoothfit::run_study(c)};
  });
}

sf_status sf_report_replicates(const sf_report* report, size_t* count, size_t* failed) {
  return guarded([&] {
    require(report != nullptr, "report is null");
    if (count) *count = report->report.replicates.size();
    if (failed) *failed = static_cast<size_t>(report->report.failed);
  });
}

sf_status sf_report_to_json(const sf_report* report, char** json) {
  return guarded([&] {
    require(report && json, "null argument");
    *json = dup(smoothfit::report_to_json(report->report));
  });
}

sf_status sf_report_quantiles_csv(const sf_report* report, char** csv) {
  return guarded([&] {
    require(report && csv, "null argument");
    *csv = dup(smoothfit::report_quantiles_csv(report->report));
  });
}

sf_status sf_report_logdiff_csv(const sf_report* report, char** csv) {
  return guarded([&] {
    require(report && csv, "null argument");
    *csv = dup(smoothfit::report_logdiff_csv(report->report));
  });
}

void sf_report_free(sf_report* report) { delete report; }

}  // extern "C"
