#pragma once

#include <map>
#include <optional>
#include <vector>

#include "impdist/calibration.hpp"
#include "impdist/validation.hpp"

namespace impdist {

struct AnalysisOptions {
    bool restrict_four_source = false;  // drop points built from a single leg
};

/// Everything one maturity of one snapshot yields: the ATM regression, the
/// combined put curve and both fits.
struct ChainAnalysis {
    std::chrono::year_month_day maturity;
    std::int64_t snapshot_time = 0;
    double tau_minutes = 0.0;
    AtmEstimate atm;
    std::vector<CombinedPutPoint> points;
    FitResult fit3;
    FitResult fit1;
};

/// Run parity, ATM regression, put combination and both fits on a filtered
/// chain. Module errors propagate.
ChainAnalysis analyze_chain(const OptionChain& chain, const AnalysisOptions& options = {});

/// Per-snapshot analyses assembled into the inputs the validation module
/// consumes. Snapshots are ordered by snapshot time.
struct SeriesAnalysis {
    AtmSeries series;
    std::map<std::int64_t, SnapshotFit> fits;
};

SeriesAnalysis analyze_series(const std::vector<std::vector<QuoteRecord>>& snapshots,
                              std::chrono::year_month_day maturity, FitMode mode,
                              const AnalysisOptions& options = {}, int jobs = 1);

}  // namespace impdist
