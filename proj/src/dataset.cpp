#include "smoothfit/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>
#include <string_view>

#include "smoothfit/error.hpp"

namespace smoothfit {

Dataset::Dataset(Eigen::MatrixXd covariates, Eigen::VectorXd response)
    : x(std::move(covariates)), y(std::move(response)) {
  if (x.rows() != y.size())
    throw Error(ErrorCode::invalid_input, "covariate and response lengths differ");
}

Dataset Dataset::select_columns(const std::vector<int>& columns) const {
  Eigen::MatrixXd sub(n(), static_cast<Eigen::Index>(columns.size()));
  for (std::size_t c = 0; c < columns.size(); ++c) {
    if (columns[c] < 0 || columns[c] >= d())
      throw Error(ErrorCode::invalid_input, "column index out of range");
    sub.col(static_cast<Eigen::Index>(c)) = x.col(columns[c]);
  }
  return Dataset(std::move(sub), y);
}

void require_unit_cube(const Dataset& data) {
  if (data.n() == 0) throw Error(ErrorCode::invalid_input, "dataset is empty");
  for (Eigen::Index i = 0; i < data.n(); ++i) {
    for (Eigen::Index j = 0; j < data.d(); ++j) {
      double v = data.x(i, j);
      if (!(v >= 0.0 && v <= 1.0))
        throw Error(ErrorCode::invalid_input,
                    "row " + std::to_string(i + 1) + ": x" + std::to_string(j + 1) +
                        " = " + std::to_string(v) + " is outside [0,1]");
    }
    if (!std::isfinite(data.y[i]))
      throw Error(ErrorCode::invalid_input, "row " + std::to_string(i + 1) + ": y is not finite");
  }
}

AffineMap rescale_minmax(Dataset& data) {
  AffineMap map{Eigen::VectorXd(data.d()), Eigen::VectorXd(data.d())};
  for (Eigen::Index j = 0; j < data.d(); ++j) {
    double lo = data.x.col(j).minCoeff();
    double hi = data.x.col(j).maxCoeff();
    if (!(hi > lo))
      throw Error(ErrorCode::invalid_input,
                  "x" + std::to_string(j + 1) + " is constant; cannot rescale");
    map.offset[j] = lo;
    map.scale[j] = hi - lo;
    data.x.col(j) = ((data.x.col(j).array() - lo) / (hi - lo)).cwiseMax(0.0).cwiseMin(1.0);
  }
  return map;
}

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t')) s.remove_prefix(1);
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r'))
    s.remove_suffix(1);
  return s;
}

std::vector<std::string_view> split(std::string_view line) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (true) {
    std::size_t comma = line.find(',', start);
    out.push_back(trim(line.substr(start, comma - start)));
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return out;
}

[[noreturn]] void fail(std::size_t line, const std::string& msg) {
  throw Error(ErrorCode::invalid_input, "line " + std::to_string(line) + ": " + msg);
}

}  // namespace

Dataset parse_csv(const std::string& text) {
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  std::size_t d = 0;
  bool have_header = false;
  std::vector<double> xs, ys;

  while (std::getline(in, raw)) {
    ++line_no;
    std::string_view line = trim(raw);
    if (line_no == 1 && line.size() >= 3 && line.substr(0, 3) == "\xEF\xBB\xBF")
      line.remove_prefix(3);
    if (line.empty()) continue;
    auto fields = split(line);
    if (!have_header) {
      if (fields.size() < 2) fail(line_no, "header needs at least x1,y");
      d = fields.size() - 1;
      for (std::size_t j = 0; j < d; ++j)
        if (fields[j] != "x" + std::to_string(j + 1))
          fail(line_no, "expected header column 'x" + std::to_string(j + 1) + "', got '" +
                            std::string(fields[j]) + "'");
      if (fields[d] != "y") fail(line_no, "last header column must be 'y'");
      have_header = true;
      continue;
    }
    if (fields.size() != d + 1)
      fail(line_no, "expected " + std::to_string(d + 1) + " fields, found " +
                        std::to_string(fields.size()));
    for (std::size_t c = 0; c <= d; ++c) {
      double v = 0.0;
      auto f = fields[c];
      auto res = std::from_chars(f.data(), f.data() + f.size(), v);
      if (f.empty() || res.ec != std::errc() || res.ptr != f.data() + f.size() ||
          !std::isfinite(v))
        fail(line_no, "cannot parse '" + std::string(f) + "' as a number");
      (c < d ? xs : ys).push_back(v);
    }
  }
  if (!have_header) throw Error(ErrorCode::invalid_input, "line 1: missing header");
  if (ys.empty()) throw Error(ErrorCode::invalid_input, "no data rows");

  const auto n = static_cast<Eigen::Index>(ys.size());
  Eigen::MatrixXd x(n, static_cast<Eigen::Index>(d));
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < x.cols(); ++j) x(i, j) = xs[i * d + j];
  return Dataset(std::move(x), Eigen::Map<Eigen::VectorXd>(ys.data(), n));
}

Dataset read_csv(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::io, "cannot open '" + path + "'");
  std::ostringstream ss;
  ss << f.rdbuf();
  return parse_csv(ss.str());
}

}  // namespace smoothfit
