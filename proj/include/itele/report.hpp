#pragma once

#include <string>
#include <utility>
#include <vector>

#include "itele/replay.hpp"

namespace itele::report {

/// P(X > x) at each distinct x, ascending in x and non-increasing in p.
std::vector<std::pair<double, double>> ccdf(std::vector<double> values);

/// Writes the replay output bundle into `out_dir`: verdicts.tsv, flows.tsv,
/// provider_bytes.tsv, mirror_load.tsv, entry_count.tsv, summary.json.
void write_replay_report(const replay::Engine& eng, const replay::ReplaySummary& summary,
                         const std::string& out_dir);

/// Derives the analytics tables from a replay report directory into
/// `out_dir`: provider_share.tsv (share of video-classified flows),
/// resolution_hourly.tsv (per-hour verdict fractions), res_change_ccdf.tsv
/// (changes per hour of playback), duration_ccdf.tsv, rate_ccdf.tsv.
/// Throws DataError when the verdict log is empty.
void write_analytics(const std::string& report_dir, const std::string& out_dir);

}  // namespace itele::report
