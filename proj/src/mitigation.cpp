#include <nrsec/crypto.hpp>
#include <nrsec/mitigation.hpp>

#include <stdexcept>

namespace nrsec::tss
{

void TssConfig::validate() const
{
    if (tag_bits < 16 || tag_bits > 256)
        throw std::invalid_argument("tss.tag_bits must be in [16, 256]");
    if (slot_length == 0)
        throw std::invalid_argument("tss.slot_length must be positive");
}

std::uint64_t slot_of(const TssConfig &cfg, Tick now)
{
    return now / cfg.slot_length;
}

Bytes truncate_bits(ByteView full, unsigned bits)
{
    const std::size_t nbytes = (bits + 7) / 8;
    if (nbytes > full.size())
        throw std::invalid_argument("not enough input bits to truncate");
    Bytes out(full.begin(), full.begin() + static_cast<std::ptrdiff_t>(nbytes));
    if (unsigned rem = bits % 8; rem != 0)
        out.back() &= static_cast<std::uint8_t>(0xff << (8 - rem));
    return out;
}

TssTag generate_tss(const TssConfig &cfg, std::uint16_t pci, std::uint64_t slot)
{
    if (!cfg.enabled)
        throw std::logic_error("generate_tss called with TSS disabled");
    auto d = crypto::prf(cfg.network_secret.view(), "TSS", {be_bytes(pci, 2), be_bytes(slot, 8)});
    return TssTag{pci, slot, truncate_bits(d, cfg.tag_bits)};
}

const char *to_string(Verdict v)
{
    switch (v)
    {
    case Verdict::Accept:
        return "accept";
    case Verdict::Stale:
        return "stale";
    case Verdict::WrongTag:
        return "wrong_tag";
    case Verdict::Missing:
        return "missing";
    }
    return "?";
}

radio::MeasurementReport attach_observed_tag(radio::MeasurementReport report, const TssTag &observed)
{
    for (auto &e : report.neighbors)
        if (e.pci == observed.pci)
            e.tss = observed;
    return report;
}

Verdict verify_entry(const TssConfig &cfg, const radio::ReportEntry &entry, Tick now)
{
    if (!cfg.enabled)
        throw std::logic_error("verify called with TSS disabled");
    if (!entry.tss)
        return Verdict::Missing;
    const auto &seen = *entry.tss;
    const std::uint64_t current = slot_of(cfg, now);
    // The tag is checked against the PCI the UE measured, not the PCI the tag claims.
    if (seen.slot > current)
        return Verdict::WrongTag;
    auto expected = generate_tss(cfg, entry.pci, seen.slot);
    if (!crypto::equal_ct(expected.tag, seen.tag))
        return Verdict::WrongTag;
    if (current - seen.slot > 1)
        return Verdict::Stale;
    return Verdict::Accept;
}

Verdict network_verify_report(const TssConfig &cfg, const radio::MeasurementReport &report,
                              std::uint16_t target_pci, Tick now)
{
    for (const auto &e : report.neighbors)
        if (e.pci == target_pci)
            return verify_entry(cfg, e, now);
    return Verdict::Missing;
}

} // namespace nrsec::tss
