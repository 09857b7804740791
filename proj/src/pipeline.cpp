#include "impdist/pipeline.hpp"

#include <algorithm>
#include <future>

namespace impdist {

ChainAnalysis analyze_chain(const OptionChain& chain, const AnalysisOptions& options) {
    ChainAnalysis out;
    out.maturity = chain.maturity;
    out.snapshot_time = chain.snapshot_time;
    out.tau_minutes = chain.time_to_maturity_minutes;

    const auto parity_points = synthetic_forward_points(chain);
    out.atm = estimate_atm(parity_points);
    out.points = combine_puts(chain, out.atm.atm);
    if (options.restrict_four_source) {
        std::erase_if(out.points, [](const CombinedPutPoint& p) { return p.n_sources != 4; });
        if (out.points.empty()) throw NoCombinedPoints();
    }
    out.fit3 = fit_three_param(out.points, out.atm.atm);
    out.fit1 = fit_one_param(out.points, out.atm.atm);
    return out;
}

SeriesAnalysis analyze_series(const std::vector<std::vector<QuoteRecord>>& snapshots,
                              std::chrono::year_month_day maturity, FitMode mode,
                              const AnalysisOptions& options, int jobs) {
    std::vector<ChainAnalysis> analyses(snapshots.size());
    auto run = [&](std::size_t i) {
        analyses[i] = analyze_chain(filter_chain(snapshots[i], maturity), options);
    };
    if (jobs > 1) {
        std::atomic<std::size_t> next{0};
        std::vector<std::future<void>> workers;
        const int n_workers = std::min<int>(jobs, static_cast<int>(snapshots.size()));
        for (int w = 0; w < n_workers; ++w)
            workers.push_back(std::async(std::launch::async, [&] {
                for (std::size_t i = next++; i < snapshots.size(); i = next++) run(i);
            }));
        for (auto& f : workers) f.get();  // rethrows the first worker error
    } else {
        for (std::size_t i = 0; i < snapshots.size(); ++i) run(i);
    }

    std::sort(analyses.begin(), analyses.end(),
              [](const ChainAnalysis& a, const ChainAnalysis& b) {
                  return a.snapshot_time < b.snapshot_time;
              });

    SeriesAnalysis out;
    out.series.maturity = maturity;
    for (const ChainAnalysis& a : analyses) {
        if (!out.series.timestamps.empty() && out.series.timestamps.back() == a.snapshot_time)
            throw Error("duplicate snapshot timestamp in series");
        out.series.timestamps.push_back(a.snapshot_time);
        out.series.atm_values.push_back(a.atm.atm);
        out.fits[a.snapshot_time] =
            SnapshotFit{mode == FitMode::ThreeParam ? a.fit3 : a.fit1, a.tau_minutes};
    }
    return out;
}

}  // namespace impdist
