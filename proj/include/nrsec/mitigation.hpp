#pragma once

// Handover verification against a per-slot pseudorandom tag that genuine cells
// bind to their synchronization signals. The UE echoes the tag it observed in
// its measurement report; the network only hands over when the echo is a
// correct, fresh tag for the reported PCI.

#include <nrsec/radio.hpp>
#include <nrsec/tss_tag.hpp>

namespace nrsec::tss
{

enum class Verdict
{
    Accept,
    Stale,
    WrongTag,
    Missing,
};

const char *to_string(Verdict v);

/// Returns `report` with the observed tag attached to the entry for observed.pci.
radio::MeasurementReport attach_observed_tag(radio::MeasurementReport report, const TssTag &observed);

/// Verifies one report entry at network time `now`. A tag is fresh when its
/// slot is the current slot or the one before it.
Verdict verify_entry(const TssConfig &cfg, const radio::ReportEntry &entry, Tick now);

/// Verifies the entry for `target_pci`; Missing when the report has none.
Verdict network_verify_report(const TssConfig &cfg, const radio::MeasurementReport &report,
                              std::uint16_t target_pci, Tick now);

} // namespace nrsec::tss
