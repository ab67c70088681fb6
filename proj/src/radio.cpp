#include <nrsec/radio.hpp>

#include <algorithm>
#include <stdexcept>

namespace nrsec::radio
{

const char *to_string(MibField f)
{
    switch (f)
    {
    case MibField::Sfn:
        return "sfn";
    case MibField::CellBarred:
        return "cell_barred";
    case MibField::Coreset0:
        return "coreset0_locator";
    }
    return "?";
}

MibField mib_field_from_string(const std::string &name)
{
    if (name == "sfn")
        return MibField::Sfn;
    if (name == "cell_barred")
        return MibField::CellBarred;
    if (name == "coreset0_locator")
        return MibField::Coreset0;
    throw std::invalid_argument("unknown MIB field '" + name + "'");
}

void SsbFrame::validate() const
{
    if (pci > kMaxPci)
        throw std::invalid_argument("PCI out of range");
    if (beam_index >= kMaxBeams)
        throw std::invalid_argument("beam index out of range");
    if (is_overlay && overlay_fields.empty())
        throw std::invalid_argument("overlay frame without overlay fields");
    if (!is_overlay && !overlay_fields.empty())
        throw std::invalid_argument("full frame carrying overlay fields");
    if (sib1 && sib1->ra.preamble_pool < 1)
        throw std::invalid_argument("SIB1 preamble pool must be non-empty");
}

void RadioEnvironment::set_link(const EntityId &tx, const EntityId &rx, double dbm)
{
    links_[{tx, rx}] = dbm;
}

std::optional<double> RadioEnvironment::power(const EntityId &tx, const EntityId &rx) const
{
    auto it = links_.find({tx, rx});
    if (it == links_.end())
        return std::nullopt;
    return it->second;
}

std::optional<double> RadioEnvironment::audible(const EntityId &tx, const EntityId &rx) const
{
    auto p = power(tx, rx);
    if (!p || *p < noise_floor_dbm)
        return std::nullopt;
    return p;
}

double RadioEnvironment::max_link_power() const
{
    double best = noise_floor_dbm;
    for (const auto &[key, p] : links_)
        best = std::max(best, p);
    return best;
}

namespace
{

struct Heard
{
    const SsbFrame *frame;
    double power;
};

// Strongest first; equal powers resolved by origin id so the outcome never
// depends on the order frames were produced in.
bool stronger(const Heard &a, const Heard &b)
{
    if (a.power != b.power)
        return a.power > b.power;
    return a.frame->origin < b.frame->origin;
}

void apply_overlay(Mib &base, const SsbFrame &overlay)
{
    for (auto field : overlay.overlay_fields)
    {
        switch (field)
        {
        case MibField::Sfn:
            base.sfn = overlay.mib.sfn;
            break;
        case MibField::CellBarred:
            base.cell_barred = overlay.mib.cell_barred;
            break;
        case MibField::Coreset0:
            base.coreset0_locator = overlay.mib.coreset0_locator;
            break;
        }
    }
}

std::map<std::uint16_t, std::pair<std::vector<Heard>, std::vector<Heard>>> group_audible(
    const RadioEnvironment &env, const std::vector<SsbFrame> &frames, const EntityId &rx)
{
    std::map<std::uint16_t, std::pair<std::vector<Heard>, std::vector<Heard>>> by_pci;
    for (const auto &f : frames)
    {
        auto p = env.audible(f.origin, rx);
        if (!p)
            continue;
        auto &slot = by_pci[f.pci];
        (f.is_overlay ? slot.second : slot.first).push_back(Heard{&f, *p});
    }
    for (auto &[pci, lists] : by_pci)
    {
        std::sort(lists.first.begin(), lists.first.end(), stronger);
        std::sort(lists.second.begin(), lists.second.end(), stronger);
    }
    return by_pci;
}

} // namespace

std::vector<DecodedFrame> deliver_ssb(const RadioEnvironment &env, const std::vector<SsbFrame> &frames,
                                      const EntityId &rx)
{
    std::vector<DecodedFrame> out;
    for (const auto &[pci, lists] : group_audible(env, frames, rx))
    {
        const auto &[full, overlays] = lists;
        // An overlay alone carries no PSS/SSS, so there is nothing to lock onto.
        if (full.empty())
            continue;
        const Heard &base = full.front();
        DecodedFrame d{*base.frame, base.power, false};
        for (const auto &ov : overlays)
        {
            if (ov.power >= base.power + env.capture_margin_db)
            {
                apply_overlay(d.frame.mib, *ov.frame);
                d.overlay_captured = true;
                break;
            }
        }
        out.push_back(std::move(d));
    }
    return out;
}

std::vector<CellMeasurement> measure_cells(const RadioEnvironment &env, const std::vector<SsbFrame> &frames,
                                           const EntityId &rx, Tick now)
{
    std::vector<CellMeasurement> out;
    for (const auto &[pci, lists] : group_audible(env, frames, rx))
    {
        const auto &full = lists.first;
        if (full.empty())
            continue;
        const Heard &best = full.front();
        out.push_back(CellMeasurement{pci, best.power, now, best.frame->tss, best.frame->origin});
    }
    return out;
}

std::optional<std::uint16_t> evaluate_report_trigger(const CellMeasurement &serving,
                                                     const std::vector<CellMeasurement> &neighbors, double margin_db)
{
    if (!(margin_db > 0))
        throw std::invalid_argument("trigger margin must be positive");
    const CellMeasurement *best = nullptr;
    for (const auto &n : neighbors)
    {
        if (n.pci == serving.pci || n.power_dbm < serving.power_dbm + margin_db)
            continue;
        if (!best || n.power_dbm > best->power_dbm || (n.power_dbm == best->power_dbm && n.pci < best->pci))
            best = &n;
    }
    if (!best)
        return std::nullopt;
    return best->pci;
}

} // namespace nrsec::radio
