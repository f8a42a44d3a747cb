#include "smoothfit/simulate.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdlib>
#include <exception>
#include <map>
#include <mutex>
#include <thread>

#include "smoothfit/error.hpp"

namespace smoothfit {

namespace {

std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

bool is_single(Method m) { return m == Method::pls1 || m == Method::pl1; }

double mean_of(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return v.empty() ? 0.0 : s / static_cast<double>(v.size());
}

double se_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  double m = mean_of(v), s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1) / static_cast<double>(v.size()));
}

constexpr int design_dim = 3;

}  // namespace

const char* to_string(Model m) noexcept { return m == Model::m1 ? "m1" : "m2"; }

const char* to_string(Centering c) noexcept {
  return c == Centering::population ? "population" : "sample";
}

void SimConfig::validate() const {
  if (n < 20) throw Error(ErrorCode::invalid_input, "n must be at least 20");
  if (!(std::abs(rho) < 1.0)) throw Error(ErrorCode::invalid_input, "rho must satisfy |rho| < 1");
  if (!(sigma2 > 0.0)) throw Error(ErrorCode::invalid_input, "sigma2 must be positive");
  if (!(cov_var > 0.0)) throw Error(ErrorCode::invalid_input, "covariate variance must be positive");
  if (replicates < 1) throw Error(ErrorCode::invalid_input, "replicates must be at least 1");
  if (threads < 0) throw Error(ErrorCode::invalid_input, "threads must be non-negative");
  for (Method m : effective_methods()) {
    if (is_single(m) != (model == Model::m2))
      throw Error(ErrorCode::invalid_input, std::string("selector ") + to_string(m) +
                                                " is not available for model " + to_string(model));
  }
}

std::vector<Method> SimConfig::effective_methods() const {
  if (!methods.empty()) return methods;
  if (model == Model::m1) return {Method::ase_oracle, Method::pls, Method::pl_grid, Method::pl_star};
  return {Method::pls1, Method::pl1};
}

std::mt19937_64 replicate_engine(std::uint64_t seed, std::uint64_t replicate) {
  std::uint64_t state = seed;
  std::uint64_t a = splitmix64(state);
  state = a ^ (replicate * 0xd1b54a32d192ed03ULL);
  std::uint64_t b = splitmix64(state);
  std::uint64_t c = splitmix64(state);
  std::seed_seq seq{static_cast<std::uint32_t>(b), static_cast<std::uint32_t>(b >> 32),
                    static_cast<std::uint32_t>(c), static_cast<std::uint32_t>(c >> 32)};
  return std::mt19937_64(seq);
}

Eigen::MatrixXd sample_covariates(int n, int d, double rho, std::mt19937_64& rng, double cov_var) {
  if (n < 1 || d < 1) throw Error(ErrorCode::invalid_input, "need n >= 1 and d >= 1");
  if (!(cov_var > 0.0)) throw Error(ErrorCode::invalid_input, "covariate variance must be positive");
  Eigen::MatrixXd sigma = Eigen::MatrixXd::Constant(d, d, rho * cov_var);
  sigma.diagonal().setConstant(cov_var);
  Eigen::LLT<Eigen::MatrixXd> llt(sigma);
  if (llt.info() != Eigen::Success || !(rho < 1.0))
    throw Error(ErrorCode::invalid_input, "correlation matrix is not positive definite");
  const Eigen::MatrixXd L = llt.matrixL();

  std::normal_distribution<double> z01;
  Eigen::MatrixXd out(n, d);
  Eigen::VectorXd z(d), x(d);
  long long attempts = 0;
  int accepted = 0;
  while (accepted < n) {
    for (int k = 0; k < d; ++k) z[k] = z01(rng);
    x = (L * z).array() + 0.5;
    ++attempts;
    if ((x.array() >= 0.0).all() && (x.array() <= 1.0).all()) out.row(accepted++) = x.transpose();
    if (attempts >= 10000 && static_cast<double>(accepted) < 1e-3 * static_cast<double>(attempts))
      throw Error(ErrorCode::sampler_degenerate,
                  "rejection sampler acceptance rate fell below 1e-3");
  }
  return out;
}

Eigen::MatrixXd sample_covariates(int n, int d, double rho, std::uint64_t seed, double cov_var) {
  std::mt19937_64 rng = replicate_engine(seed, 0);
  return sample_covariates(n, d, rho, rng, cov_var);
}

namespace {

std::vector<std::function<double(double)>> design_components() {
  return {
      [](double u) { return u * u; },
      [](double u) { return u * u * u; },
      [](double u) { return u * u * u * u; },
  };
}

}  // namespace

Eigen::VectorXd design_component_means(double rho, double cov_var) {
  static std::mutex mutex;
  static std::map<std::pair<double, double>, Eigen::VectorXd> cache;
  std::lock_guard<std::mutex> lock(mutex);
  auto key = std::make_pair(rho, cov_var);
  if (auto it = cache.find(key); it != cache.end()) return it->second;

  const int total = 1000000, batch = 100000;
  std::mt19937_64 rng = replicate_engine(0x5eed, 0);
  auto m = design_components();
  Eigen::VectorXd sum = Eigen::VectorXd::Zero(design_dim);
  for (int done = 0; done < total; done += batch) {
    Eigen::MatrixXd x = sample_covariates(batch, design_dim, rho, rng, cov_var);
    for (int j = 0; j < design_dim; ++j)
      for (int i = 0; i < batch; ++i) sum[j] += m[j](x(i, j));
  }
  Eigen::VectorXd means = sum / static_cast<double>(total);
  cache.emplace(key, means);
  return means;
}

GeneratedData generate(const SimConfig& config, std::mt19937_64& rng) {
  Eigen::MatrixXd x = sample_covariates(config.n, design_dim, config.rho, rng, config.cov_var);
  std::vector<std::function<double(double)>> m = design_components();
  const int d = config.model == Model::m1 ? design_dim : 1;
  m.resize(static_cast<std::size_t>(d));

  std::normal_distribution<double> noise(0.0, std::sqrt(config.sigma2));
  GeneratedData g;
  g.data.x = x.leftCols(d);
  g.data.y.resize(config.n);
  for (int i = 0; i < config.n; ++i) {
    double s = 0.0;
    for (int j = 0; j < d; ++j) s += m[j](x(i, j));
    g.data.y[i] = s + noise(rng);
  }
  g.truth.regression = [m](const Eigen::Ref<const Eigen::VectorXd>& u) {
    double s = 0.0;
    for (std::size_t j = 0; j < m.size(); ++j) s += m[j](u[static_cast<Eigen::Index>(j)]);
    return s;
  };
  Eigen::VectorXd population;
  if (config.centering == Centering::population) {
    population = design_component_means(config.rho, config.cov_var);
    g.truth.intercept = population.head(d).sum();
  }
  for (int j = 0; j < d; ++j) {
    double mean = 0.0;
    if (config.centering == Centering::population) {
      mean = population[j];
    } else {
      for (int i = 0; i < config.n; ++i) mean += m[j](x(i, j));
      mean /= config.n;
    }
    auto fj = m[j];
    g.truth.centered.push_back([fj, mean](double u) { return fj(u) - mean; });
  }
  g.components = std::move(m);
  return g;
}

namespace {

ReplicateRecord run_replicate(const SimConfig& config, const std::vector<Method>& methods,
                              std::uint64_t rep) {
  ReplicateRecord rec;
  std::mt19937_64 rng = replicate_engine(config.seed, rep);
  try {
    GeneratedData g = generate(config, rng);
    const Dataset& data = g.data;
    const BandwidthSearchSpec& spec = config.search;

    if (config.model == Model::m2) {
      Grid grid(spec.grid_size);
      for (Method m : methods) {
        SelectionResult sel = select_single(
            data, m == Method::pls1 ? SingleMethod::pls1 : SingleMethod::pl1, spec);
        AdditiveFit fit = single_ll_fit(data, sel.bandwidths[0], grid, spec.backfit);
        // The single fit carries the intercept, so compare with the uncentered m1.
        double a1 = ase_j(data, fit, 0, g.components[0]).value;
        rec.bandwidths.push_back(sel.bandwidths);
        rec.ase.push_back(a1);
        rec.ase_j.push_back(Eigen::VectorXd::Constant(1, a1));
        rec.iterations.push_back(sel.outer_iterations);
      }
      return rec;
    }

    FitEvaluator eval(data, Smoother::ll, spec, &g.truth);
    for (Method m : methods) {
      SelectionResult sel;
      switch (m) {
        case Method::ase_oracle:
          sel = coordinate_search(
              eval, spec, [](const Evaluation& e, int) { return e.ase; }, m);
          rec.oracle_bandwidths = sel.bandwidths;
          break;
        case Method::ase_j_oracle:
          sel = coordinate_search(
              eval, spec,
              [](const Evaluation& e, int a) { return a < 0 ? e.ase_j.sum() : e.ase_j[a]; }, m);
          break;
        case Method::pls:
          sel = coordinate_search(
              eval, spec, [](const Evaluation& e, int) { return e.pls; }, m);
          break;
        case Method::pl_grid: sel = select_pl(data, spec, PlMode::full_grid); break;
        case Method::pl_coord: sel = select_pl(data, spec, PlMode::coordinate); break;
        case Method::pl_star: sel = select_pl_star(data, spec); break;
        default: throw Error(ErrorCode::invalid_input, "selector not available for model m1");
      }
      const Evaluation& e = eval.evaluate(sel.bandwidths);
      if (!e.ok)
        throw Error(ErrorCode::selector_failure, "backfit failed at the selected bandwidth");
      rec.bandwidths.push_back(sel.bandwidths);
      rec.ase.push_back(e.ase);
      rec.ase_j.push_back(e.ase_j);
      rec.iterations.push_back(sel.outer_iterations);
    }
  } catch (const Error& ex) {
    // Bad configuration aborts the study; only fitting failures are per replicate.
    if (ex.code() == ErrorCode::invalid_input || ex.code() == ErrorCode::sampler_degenerate) throw;
    rec = ReplicateRecord{};
    rec.failed = true;
    rec.failure = std::string(to_string(ex.code())) + ": " + ex.what();
  }
  return rec;
}

}  // namespace

int resolve_threads(int requested) {
  int hw = static_cast<int>(std::max(1u, std::thread::hardware_concurrency()));
  if (requested > 0) return requested;
  if (const char* env = std::getenv("SMOOTHFIT_THREADS")) {
    char* end = nullptr;
    long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v > 0) return static_cast<int>(std::min<long>(v, hw));
  }
  return hw;
}

const MethodSummary& SimReport::summary(Method m) const {
  for (const auto& s : summaries)
    if (s.method == m) return s;
  throw Error(ErrorCode::invalid_input, std::string("no summary for selector ") + to_string(m));
}

void summarize(SimReport& report) {
  report.summaries.clear();
  report.failed = 0;
  for (const auto& r : report.replicates) report.failed += r.failed ? 1 : 0;

  for (std::size_t k = 0; k < report.methods.size(); ++k) {
    MethodSummary s;
    s.method = report.methods[k];
    std::vector<double> a;
    std::vector<std::vector<double>> aj;
    Eigen::VectorXd hsum;
    double iters = 0.0;
    for (const auto& r : report.replicates) {
      if (r.failed) continue;
      a.push_back(r.ase[k]);
      const Eigen::VectorXd& ej = r.ase_j[k];
      if (aj.empty()) aj.resize(static_cast<std::size_t>(ej.size()));
      for (Eigen::Index j = 0; j < ej.size(); ++j) aj[j].push_back(ej[j]);
      hsum = hsum.size() ? Eigen::VectorXd(hsum + r.bandwidths[k]) : r.bandwidths[k];
      iters += r.iterations[k];
      s.max_iterations = std::max(s.max_iterations, r.iterations[k]);
      if (r.oracle_bandwidths.size() == r.bandwidths[k].size())
        s.log_differences.push_back(
            (r.bandwidths[k].array().log() - r.oracle_bandwidths.array().log()).matrix());
    }
    const double count = static_cast<double>(a.size());
    s.mean_ase = mean_of(a);
    s.se_ase = se_of(a);
    s.mean_ase_j.resize(static_cast<Eigen::Index>(aj.size()));
    s.se_ase_j.resize(static_cast<Eigen::Index>(aj.size()));
    for (std::size_t j = 0; j < aj.size(); ++j) {
      s.mean_ase_j[j] = mean_of(aj[j]);
      s.se_ase_j[j] = se_of(aj[j]);
      std::sort(aj[j].begin(), aj[j].end());
      s.sorted_ase_j.push_back(Eigen::Map<Eigen::VectorXd>(aj[j].data(), aj[j].size()));
    }
    s.mean_bandwidth = count > 0 ? Eigen::VectorXd(hsum / count) : Eigen::VectorXd();
    s.mean_iterations = count > 0 ? iters / count : 0.0;
    std::sort(a.begin(), a.end());
    s.sorted_ase = std::move(a);
    report.summaries.push_back(std::move(s));
  }
}

SimReport run_study(const SimConfig& config) {
  config.validate();
  SimReport report;
  report.config = config;
  report.methods = config.effective_methods();
  report.replicates.resize(static_cast<std::size_t>(config.replicates));

  const int workers = std::min(resolve_threads(config.threads), config.replicates);
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto work = [&] {
    for (int r = next++; r < config.replicates; r = next++) {
      try {
        report.replicates[r] = run_replicate(config, report.methods, static_cast<std::uint64_t>(r));
      } catch (...) {
        std::lock_guard<std::mutex> lock(error_mutex);
        if (!error) error = std::current_exception();
        next = config.replicates;
      }
    }
  };
  if (workers <= 1) {
    work();
  } else {
    std::vector<std::thread> pool;
    for (int t = 0; t < workers; ++t) pool.emplace_back(work);
    for (auto& t : pool) t.join();
  }
  if (error) std::rethrow_exception(error);
  summarize(report);
  return report;
}

}  // namespace smoothfit
