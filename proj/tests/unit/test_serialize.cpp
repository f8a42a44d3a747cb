#include "doctest.h"

#include <cmath>
#include <limits>
#include <sstream>

#include "json.hpp"
#include "smoothfit/backfit_ll.hpp"
#include "smoothfit/serialize.hpp"

using namespace smoothfit;
using nlohmann::json;

namespace {

Dataset small() {
  Eigen::MatrixXd x(40, 2);
  Eigen::VectorXd y(40);
  for (int i = 0; i < 40; ++i) {
    x(i, 0) = (i + 0.5) / 40.0;
    x(i, 1) = std::fmod(0.37 * i, 1.0);
    y[i] = x(i, 0) * x(i, 0) + 0.1 * std::sin(7.0 * i);
  }
  return Dataset(x, y);
}

std::size_t lines(const std::string& s) {
  std::size_t c = 0;
  for (char ch : s) c += ch == '\n';
  return c;
}

}  // namespace

TEST_CASE("fit document") {
  Dataset d = small();
  AdditiveFit f = backfit_ll(d, Eigen::Vector2d(0.2, 0.3), Grid());
  json j = json::parse(fit_to_json(f));
  CHECK(j["schema"] == "smoothfit.fit");
  CHECK(j["schema_version"] == schema_version);
  CHECK(j["smoother"] == "ll");
  CHECK(j["intercept"].get<double>() == f.intercept);
  REQUIRE(j["components"].size() == 2);
  CHECK(j["components"][1]["axis"] == 2);
  CHECK(j["components"][0]["values"].size() == 25);
  CHECK(j["components"][0]["slopes"].size() == 25);
  CHECK(j["components"][0]["values"][3].get<double>() == f.components[0][3]);
  CHECK(j["bandwidths"][1].get<double>() == 0.3);
  CHECK(j["grid"].size() == 25);
  CHECK(j.contains("iterations"));
  CHECK(j["converged"] == true);
  CHECK_FALSE(j.contains("rescale"));

  AffineMap m{Eigen::Vector2d(1.0, 2.0), Eigen::Vector2d(3.0, 4.0)};
  SelectionResult sel;
  sel.bandwidths = f.bandwidths;
  sel.trace.push_back({f.bandwidths, std::numeric_limits<double>::infinity()});
  json k = json::parse(fit_to_json(f, &m, &sel));
  CHECK(k["rescale"]["scale"][1] == 4.0);
  CHECK(k["selection"]["method"] == "pls");
  CHECK(k["selection"]["trace"][0]["criterion"].is_null());
  CHECK(k["selection"]["bandwidths_original_units"][0].get<double>() == doctest::Approx(0.6));
}

TEST_CASE("selection document") {
  Dataset d = small();
  SelectionResult r = select_pls(d, Smoother::nw);
  json j = json::parse(selection_to_json(r));
  CHECK(j["schema"] == "smoothfit.selection");
  CHECK(j["schema_version"] == schema_version);
  CHECK(j["method"] == "pls");
  CHECK(j["smoother"] == "nw");
  CHECK(j["bandwidths"].size() == 2);
  CHECK(j["trace"].size() == r.trace.size());
  for (const char* key : {"outer_iterations", "converged", "failed_candidates", "flags"})
    CHECK(j.contains(key));
}

TEST_CASE("report document and csv exports") {
  SimConfig cfg;
  cfg.n = 80;
  cfg.replicates = 2;
  cfg.methods = {Method::ase_oracle, Method::pls};
  SimReport r = run_study(cfg);
  json j = json::parse(report_to_json(r));
  CHECK(j["schema"] == "smoothfit.report");
  CHECK(j["schema_version"] == schema_version);
  CHECK(j["config"]["n"] == 80);
  CHECK(j["config"]["centering"] == "population");
  CHECK(j["replicates"].size() == 2);
  CHECK(j["replicates"][0]["methods"]["pls"]["bandwidths"].size() == 3);
  CHECK(j["summaries"].size() == 2);
  CHECK(j["summaries"][1]["method"] == "pls");

  std::string q = report_quantiles_csv(r);
  CHECK(q.rfind("method,criterion,i,p,value\n", 0) == 0);
  // 2 methods x (ase + 3 components) x 2 replicates.
  CHECK(lines(q) == 1 + 2 * 4 * 2);
  CHECK(q.find("pls,ase_2,2,0.75,") != std::string::npos);

  std::string l = report_logdiff_csv(r);
  CHECK(l.rfind("replicate,method,axis,log_diff\n", 0) == 0);
  CHECK(lines(l) == 1 + 2 * 3);
}
