#include <nrsec/metrics.hpp>

#include <iomanip>
#include <istream>
#include <ostream>
#include <set>
#include <sstream>

namespace nrsec::sim
{

RunOutput run_scenario(Scenario s)
{
    provision(s);
    Simulation sim(s);
    sim.run();
    RunOutput out{s, sim.records(), json()};
    out.summary = summarize(out.trace);
    return out;
}

namespace
{

void bump(json &obj, const std::string &key)
{
    obj[key] = obj.value(key, 0) + 1;
}

bool starts_with(const std::string &s, std::string_view prefix)
{
    return s.compare(0, prefix.size(), prefix) == 0;
}

} // namespace

json summarize(const std::vector<TraceRecord> &trace)
{
    json run = json::object();
    json reg{{"attempted", 0}, {"succeeded", 0}, {"failed", 0}, {"by_type", json::object()},
             {"failure_reasons", json::object()}};
    json auth{{"ok", 0}, {"mac_failures", 0}, {"sync_failures", 0}, {"network_failures", json::object()}};
    json ho{{"initiated", 0}, {"completed", 0}, {"failed", 0}, {"rejected", json::object()}};
    json paging{{"issued", 0}, {"answered", 0}, {"reachable", 0}, {"missed", 0}, {"missed_by_reason", json::object()}};
    json attacks = json::array();
    json ues = json::object();
    std::uint64_t sent = 0, dropped = 0, expired = 0, delivered = 0;

    // Per-UE unreachability: opens at the first missed page, closes when the UE answers again.
    std::map<std::string, std::optional<Tick>> open_since;
    json intervals = json::array();

    for (const auto &r : trace)
    {
        const auto &k = r.kind;
        const auto &p = r.payload;
        if (k == "start")
            run = json{{"scenario", p["scenario"]}, {"seed", p["seed"]}, {"mode", p["mode"]},
                       {"max_ticks", p["max_ticks"]}};
        else if (starts_with(k, "air:") || starts_with(k, "net:"))
        {
            ++sent;
            if (starts_with(p.value("fate", ""), "dropped"))
                ++dropped;
        }
        else if (k == "expired")
            ++expired;
        else if (k == "engine_stats")
            delivered = p["delivered"].get<std::uint64_t>();
        else if (k == "registration_attempt")
        {
            bump(reg, "attempted");
            bump(reg["by_type"], p["type"].get<std::string>());
        }
        else if (k == "registration_accepted")
            bump(reg, "succeeded");
        else if (k == "registration_failed")
        {
            bump(reg, "failed");
            bump(reg["failure_reasons"], p["reason"].get<std::string>());
        }
        else if (k == "aka_result")
        {
            const auto o = p["outcome"].get<std::string>();
            bump(auth, o == "ok" ? "ok" : o == "mac_failure" ? "mac_failures" : "sync_failures");
        }
        else if (k == "auth_failed")
            bump(auth["network_failures"], p["reason"].get<std::string>());
        else if (k == "handover_decision")
            bump(ho, "initiated");
        else if (k == "handover_complete")
            bump(ho, "completed");
        else if (k == "handover_failure")
            bump(ho, "failed");
        else if (k == "handover_rejected")
            bump(ho["rejected"], p["reason"].get<std::string>());
        else if (k == "page_issued")
            bump(paging, "issued");
        else if (k == "page_reachable" || k == "page_answered")
        {
            bump(paging, k == "page_reachable" ? "reachable" : "answered");
            const auto ue = p["ue"].get<std::string>();
            if (auto &o = open_since[ue]; o)
            {
                intervals.push_back(json{{"ue", ue}, {"from", *o}, {"until", r.tick}});
                o.reset();
            }
        }
        else if (k == "page_missed")
        {
            bump(paging, "missed");
            bump(paging["missed_by_reason"], p["reason"].get<std::string>());
            auto &o = open_since[p["ue"].get<std::string>()];
            if (!o)
                o = p["issued_at"].get<Tick>();
        }
        else if (k == "attack_outcome")
        {
            json a{{"attacker", r.entity}};
            a.update(p);
            attacks.push_back(std::move(a));
        }
        else if (k == "ue_final")
            ues[r.entity] = json{{"mode", p["mode"]},
                                 {"registered", p["registered"]},
                                 {"sqn", p["sqn"]},
                                 {"nhcc", p["nhcc"]},
                                 {"serving_pci", p["serving_pci"]}};
    }
    for (const auto &[ue, o] : open_since)
        if (o)
            intervals.push_back(json{{"ue", ue}, {"from", *o}, {"until", nullptr}});
    paging["unreachable_intervals"] = intervals;

    json out = run;
    out["registrations"] = reg;
    out["auth"] = auth;
    out["handovers"] = ho;
    out["paging"] = paging;
    out["attacks"] = attacks;
    out["ues"] = ues;
    out["messages"] = json{{"sent", sent},
                           {"delivered", delivered},
                           {"dropped", dropped},
                           {"expired", expired},
                           {"balanced", sent == delivered + dropped + expired}};
    return out;
}

void write_trace(std::ostream &out, const std::vector<TraceRecord> &trace)
{
    for (const auto &r : trace)
        out << r.line() << '\n';
}

std::vector<TraceRecord> read_trace(std::istream &in)
{
    std::vector<TraceRecord> out;
    std::string line;
    while (std::getline(in, line))
        if (!line.empty())
            out.push_back(TraceRecord::from_json(json::parse(line)));
    return out;
}

std::size_t count_cleartext_supi(const std::vector<TraceRecord> &trace, const std::vector<kh::Supi> &supis)
{
    std::size_t n = 0;
    for (const auto &r : trace)
    {
        if (!r.cleartext)
            continue;
        const auto text = r.line();
        for (const auto &s : supis)
            if (text.find(s.str()) != std::string::npos)
            {
                ++n;
                break;
            }
    }
    return n;
}

json flat_metrics(const json &summary)
{
    json m = json::object();
    m["registrations.succeeded"] = summary["registrations"]["succeeded"];
    m["registrations.failed"] = summary["registrations"]["failed"];
    m["auth.ok"] = summary["auth"]["ok"];
    m["handovers.initiated"] = summary["handovers"]["initiated"];
    m["handovers.completed"] = summary["handovers"]["completed"];
    m["handovers.failed"] = summary["handovers"]["failed"];
    m["paging.answered"] = summary["paging"]["answered"];
    m["paging.missed"] = summary["paging"]["missed"];
    m["messages.balanced"] = summary["messages"]["balanced"];
    for (const auto &a : summary["attacks"])
    {
        const auto prefix = a["attacker"].get<std::string>() + ".";
        for (const auto &[key, value] : a.items())
        {
            if (key == "target_pci")
                continue;
            if (value.is_boolean() || value.is_number())
                m[prefix + key] = value;
            else if (value.is_object())
                for (const auto &[sub, v] : value.items())
                    if (v.is_boolean() || v.is_number())
                        m[prefix + key + "." + sub] = v;
        }
    }
    return m;
}

namespace
{

json aggregate(const std::vector<json> &values, std::string &how)
{
    double sum = 0;
    std::size_t n = 0;
    bool all_bool = true, all_int = true;
    for (const auto &v : values)
    {
        if (v.is_null())
            continue;
        all_bool = all_bool && v.is_boolean();
        all_int = all_int && (v.is_number_integer() || v.is_number_unsigned());
        sum += v.is_boolean() ? (v.get<bool>() ? 1.0 : 0.0) : v.get<double>();
        ++n;
    }
    if (n == 0)
    {
        how = "none";
        return nullptr;
    }
    if (all_bool)
    {
        how = "rate";
        return sum / static_cast<double>(n);
    }
    if (all_int)
    {
        how = "total";
        return static_cast<std::int64_t>(sum);
    }
    how = "mean";
    return sum / static_cast<double>(n);
}

} // namespace

json compare_summaries(const std::vector<json> &baseline, const std::vector<json> &tss)
{
    std::vector<json> fb, ft;
    std::set<std::string> names;
    std::vector<std::string> order;
    for (const auto *side : {&baseline, &tss})
        for (const auto &s : *side)
        {
            auto f = flat_metrics(s);
            for (const auto &[k, v] : f.items())
                if (names.insert(k).second)
                    order.push_back(k);
            (side == &baseline ? fb : ft).push_back(std::move(f));
        }

    json rows = json::array();
    for (const auto &name : order)
    {
        std::vector<json> vb, vt;
        bool identical = fb.size() == ft.size();
        for (std::size_t i = 0; i < fb.size(); ++i)
        {
            vb.push_back(fb[i].value(name, json()));
            if (i < ft.size())
                identical = identical && vb.back() == ft[i].value(name, json());
        }
        for (const auto &f : ft)
            vt.push_back(f.value(name, json()));
        std::string how_b, how_t;
        auto ab = aggregate(vb, how_b);
        auto at = aggregate(vt, how_t);
        rows.push_back(json{{"metric", name},
                            {"aggregate", how_b != "none" ? how_b : how_t},
                            {"baseline", ab},
                            {"tss", at},
                            {"identical", identical}});
    }

    json notes = json::array();
    std::set<std::string> modes;
    for (const auto &s : baseline)
        for (const auto &a : s["attacks"])
            modes.insert(a["mode"].get<std::string>());
    if (modes.count("ssb_spoof"))
        notes.push_back(json{{"flag", "identical_in_both_modes"},
                             {"text", "ssb_spoof acts on cell acquisition; the tag check only gates handover, so "
                                      "both modes are expected to match"}});
    if (modes.empty())
        notes.push_back(json{{"flag", "attack_free"}, {"text", "no attacker configured; rows are honest-path metrics"}});

    return json{{"seeds", baseline.size()}, {"rows", rows}, {"notes", notes}};
}

std::string render_comparison(const json &cmp)
{
    auto cell = [](const json &v) {
        if (v.is_null())
            return std::string("-");
        if (v.is_number_float())
        {
            std::ostringstream o;
            o << std::fixed << std::setprecision(3) << v.get<double>();
            return o.str();
        }
        return v.dump();
    };
    std::size_t width = 6;
    for (const auto &r : cmp["rows"])
        width = std::max(width, r["metric"].get<std::string>().size());

    std::ostringstream out;
    out << std::left << std::setw(static_cast<int>(width)) << "metric" << "  " << std::setw(6) << "agg"
        << "  " << std::setw(10) << "baseline" << "  " << std::setw(10) << "tss" << "  same\n";
    for (const auto &r : cmp["rows"])
        out << std::setw(static_cast<int>(width)) << r["metric"].get<std::string>() << "  " << std::setw(6)
            << r["aggregate"].get<std::string>() << "  " << std::setw(10) << cell(r["baseline"]) << "  "
            << std::setw(10) << cell(r["tss"]) << "  " << (r["identical"].get<bool>() ? "yes" : "no") << '\n';
    for (const auto &n : cmp["notes"])
        out << "note[" << n["flag"].get<std::string>() << "]: " << n["text"].get<std::string>() << '\n';
    return out.str();
}

} // namespace nrsec::sim
