#pragma once

// Running a scenario end to end, trace persistence, and the metrics summary
// (always recomputed from trace records, never from live entity state).

#include <nrsec/engine.hpp>

#include <iosfwd>

namespace nrsec::sim
{

struct RunOutput
{
    Scenario scenario; // as provisioned
    std::vector<TraceRecord> trace;
    json summary;
};

/// Provisions, runs and summarizes. The scenario must already be validated.
RunOutput run_scenario(Scenario s);

json summarize(const std::vector<TraceRecord> &trace);

void write_trace(std::ostream &out, const std::vector<TraceRecord> &trace);
std::vector<TraceRecord> read_trace(std::istream &in);

/// Number of cleartext-flagged records whose serialized form contains the
/// canonical text of any of `supis`.
std::size_t count_cleartext_supi(const std::vector<TraceRecord> &trace, const std::vector<kh::Supi> &supis);

} // namespace nrsec::sim

namespace nrsec::sim
{

/// Flattens the comparable numbers of one summary: honest-path counters plus
/// every attack outcome field, keyed "attacker.field".
json flat_metrics(const json &summary);

/// Per-metric baseline vs tss table across seeds. `baseline[i]` and `tss[i]`
/// must come from the same seed. Booleans aggregate to a rate, integers to a
/// total, reals to a mean; `identical` is true when every seed agreed.
json compare_summaries(const std::vector<json> &baseline, const std::vector<json> &tss);

/// Fixed-width text rendering of compare_summaries output.
std::string render_comparison(const json &cmp);

} // namespace nrsec::sim
