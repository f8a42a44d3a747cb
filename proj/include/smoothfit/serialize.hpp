#pragma once

#include <string>

#include "smoothfit/additive_fit.hpp"
#include "smoothfit/dataset.hpp"
#include "smoothfit/selectors.hpp"
#include "smoothfit/simulate.hpp"

// JSON forms of the result types. Every document carries "schema" and
// "schema_version" keys; see docs/schema.md.
namespace smoothfit {

inline constexpr int schema_version = 1;

std::string fit_to_json(const AdditiveFit& fit, const AffineMap* rescale = nullptr,
                        const SelectionResult* selection = nullptr);
std::string selection_to_json(const SelectionResult& sel, const AffineMap* rescale = nullptr);
std::string report_to_json(const SimReport& report);

/// Quantile-plot rows: method,criterion,i,p,value.
std::string report_quantiles_csv(const SimReport& report);
/// Log-difference rows: replicate,method,axis,log_diff.
std::string report_logdiff_csv(const SimReport& report);

}  // namespace smoothfit
