#pragma once

#include <string>

#include "ebvs/pipeline.hpp"
#include "ebvs/selector.hpp"
#include "ebvs/simulate.hpp"

namespace ebvs {

// Human-readable fit report: selected columns with signs and refit
// coefficients, fit quality, neighbor table, warnings.  When a
// standardization transform is supplied, coefficients are also shown mapped
// back to the original scale.
std::string text_report(const FitResult& result, const Dataset& data,
                        const Standardization* std_info = nullptr);

// Study table: one row per method (selector, BH baseline) with median
// TP/FP, plus per-replication counts.
std::string text_report(const StudyResult& result);
std::string tsv_report(const StudyResult& result);

}  // namespace ebvs
