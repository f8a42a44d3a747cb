#include "smoothfit/serialize.hpp"

#include <cmath>
#include <iomanip>
#include <json.hpp>
#include <sstream>

namespace smoothfit {

namespace {

using nlohmann::json;

json vec(const Eigen::VectorXd& v) {
  json a = json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    if (std::isfinite(v[i]))
      a.push_back(v[i]);
    else
      a.push_back(nullptr);
  }
  return a;
}

json num(double v) { return std::isfinite(v) ? json(v) : json(nullptr); }

json header(const char* kind) {
  json j;
  j["schema"] = kind;
  j["schema_version"] = schema_version;
  return j;
}

json rescale_json(const AffineMap& map) {
  return {{"offset", vec(map.offset)}, {"scale", vec(map.scale)}};
}

json selection_body(const SelectionResult& sel, const AffineMap* rescale) {
  json j;
  j["method"] = to_string(sel.method);
  j["smoother"] = to_string(sel.smoother);
  j["bandwidths"] = vec(sel.bandwidths);
  if (rescale) j["bandwidths_original_units"] = vec(sel.bandwidths.cwiseProduct(rescale->scale));
  j["outer_iterations"] = sel.outer_iterations;
  j["converged"] = sel.converged;
  j["failed_candidates"] = sel.failed_candidates;
  j["flags"] = sel.flags;
  json trace = json::array();
  for (const auto& t : sel.trace)
    trace.push_back({{"bandwidths", vec(t.bandwidths)},
                     {"criterion", num(t.criterion)},
                     {"start_criterion", num(t.start_criterion)}});
  j["trace"] = std::move(trace);
  return j;
}

json config_json(const SimConfig& c) {
  json methods = json::array();
  for (Method m : c.effective_methods()) methods.push_back(to_string(m));
  return {{"model", to_string(c.model)},
          {"n", c.n},
          {"rho", c.rho},
          {"sigma2", c.sigma2},
          {"cov_var", c.cov_var},
          {"replicates", c.replicates},
          {"seed", c.seed},
          {"centering", to_string(c.centering)},
          {"methods", methods},
          {"pilot_factor", c.search.pilot_factor},
          {"grid_points", c.search.grid_size},
          {"box", {c.search.box_lo, c.search.box_hi}},
          {"outer_tol", c.search.outer_tol},
          {"kernel", c.search.backfit.kernel.name()}};
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

}  // namespace

std::string fit_to_json(const AdditiveFit& fit, const AffineMap* rescale,
                        const SelectionResult* selection) {
  json j = header("smoothfit.fit");
  j["smoother"] = to_string(fit.smoother);
  j["intercept"] = fit.intercept;
  j["bandwidths"] = vec(fit.bandwidths);
  j["grid"] = vec(fit.grid.points());
  json comps = json::array();
  for (int k = 0; k < fit.d(); ++k) {
    json c = {{"axis", k + 1}, {"bandwidth", fit.bandwidths[k]}, {"values", vec(fit.components[k])}};
    if (!fit.slopes.empty()) c["slopes"] = vec(fit.slopes[k]);
    comps.push_back(std::move(c));
  }
  j["components"] = std::move(comps);
  j["iterations"] = fit.iterations;
  j["converged"] = fit.converged;
  if (rescale) j["rescale"] = rescale_json(*rescale);
  if (selection) j["selection"] = selection_body(*selection, rescale);
  return j.dump(2);
}

std::string selection_to_json(const SelectionResult& sel, const AffineMap* rescale) {
  json j = header("smoothfit.selection");
  j.update(selection_body(sel, rescale));
  if (rescale) j["rescale"] = rescale_json(*rescale);
  return j.dump(2);
}

std::string report_to_json(const SimReport& report) {
  json j = header("smoothfit.report");
  j["config"] = config_json(report.config);
  j["failed"] = report.failed;

  json summaries = json::array();
  for (const auto& s : report.summaries) {
    json log_diff = json::array();
    for (const auto& v : s.log_differences) log_diff.push_back(vec(v));
    json sorted_j = json::array();
    for (const auto& v : s.sorted_ase_j) sorted_j.push_back(vec(v));
    summaries.push_back({{"method", to_string(s.method)},
                         {"mean_ase", s.mean_ase},
                         {"se_ase", s.se_ase},
                         {"mean_ase_j", vec(s.mean_ase_j)},
                         {"se_ase_j", vec(s.se_ase_j)},
                         {"mean_bandwidth", vec(s.mean_bandwidth)},
                         {"mean_iterations", s.mean_iterations},
                         {"max_iterations", s.max_iterations},
                         {"sorted_ase", s.sorted_ase},
                         {"sorted_ase_j", sorted_j},
                         {"log_differences", log_diff}});
  }
  j["summaries"] = std::move(summaries);

  json reps = json::array();
  for (std::size_t r = 0; r < report.replicates.size(); ++r) {
    const auto& rec = report.replicates[r];
    json e = {{"replicate", r}, {"failed", rec.failed}};
    if (rec.failed) {
      e["failure"] = rec.failure;
    } else {
      json per = json::object();
      for (std::size_t k = 0; k < report.methods.size(); ++k)
        per[to_string(report.methods[k])] = {{"bandwidths", vec(rec.bandwidths[k])},
                                             {"ase", rec.ase[k]},
                                             {"ase_j", vec(rec.ase_j[k])},
                                             {"outer_iterations", rec.iterations[k]}};
      e["methods"] = std::move(per);
      if (rec.oracle_bandwidths.size()) e["oracle_bandwidths"] = vec(rec.oracle_bandwidths);
    }
    reps.push_back(std::move(e));
  }
  j["replicates"] = std::move(reps);
  return j.dump(2);
}

std::string report_quantiles_csv(const SimReport& report) {
  std::ostringstream os;
  os << "method,criterion,i,p,value\n";
  for (const auto& s : report.summaries) {
    auto emit = [&](const std::string& crit, const double* v, std::size_t count) {
      for (std::size_t i = 0; i < count; ++i)
        os << to_string(s.method) << ',' << crit << ',' << i + 1 << ','
           << fmt((static_cast<double>(i) + 0.5) / static_cast<double>(count)) << ','
           << fmt(v[i]) << '\n';
    };
    emit("ase", s.sorted_ase.data(), s.sorted_ase.size());
    for (std::size_t j = 0; j < s.sorted_ase_j.size(); ++j)
      emit("ase_" + std::to_string(j + 1), s.sorted_ase_j[j].data(),
           static_cast<std::size_t>(s.sorted_ase_j[j].size()));
  }
  return os.str();
}

std::string report_logdiff_csv(const SimReport& report) {
  std::ostringstream os;
  os << "replicate,method,axis,log_diff\n";
  for (std::size_t r = 0; r < report.replicates.size(); ++r) {
    const auto& rec = report.replicates[r];
    if (rec.failed || rec.oracle_bandwidths.size() == 0) continue;
    for (std::size_t k = 0; k < report.methods.size(); ++k) {
      if (report.methods[k] == Method::ase_oracle) continue;
      for (Eigen::Index j = 0; j < rec.bandwidths[k].size(); ++j)
        os << r << ',' << to_string(report.methods[k]) << ',' << j + 1 << ','
           << fmt(std::log(rec.bandwidths[k][j]) - std::log(rec.oracle_bandwidths[j])) << '\n';
    }
  }
  return os.str();
}

}  // namespace smoothfit
