#include <nrsec/rng.hpp>
#include <nrsec/scenario.hpp>

#include <yaml-cpp/yaml.h>

#include <fstream>
#include <set>
#include <sstream>

namespace nrsec::sim
{

const char *to_string(Mode m)
{
    return m == Mode::Baseline ? "baseline" : "tss";
}

Mode mode_from_string(const std::string &s)
{
    if (s == "baseline")
        return Mode::Baseline;
    if (s == "tss")
        return Mode::Tss;
    throw std::invalid_argument("mode must be 'baseline' or 'tss', got '" + s + "'");
}

const char *to_string(AttackMode m)
{
    switch (m)
    {
    case AttackMode::SsbSpoof:
        return "ssb_spoof";
    case AttackMode::SqnLinkability:
        return "sqn_linkability";
    case AttackMode::FakeBsHandover:
        return "fake_bs_handover";
    }
    return "?";
}

const char *to_string(TagStrategy t)
{
    switch (t)
    {
    case TagStrategy::Replay:
        return "replay";
    case TagStrategy::Guess:
        return "guess";
    case TagStrategy::None:
        return "none";
    }
    return "?";
}

const AmfSpec &Scenario::default_amf() const
{
    for (const auto &a : amfs)
        if (a.is_default)
            return a;
    return amfs.front();
}

const UeSpec *Scenario::find_ue(const EntityId &id) const
{
    for (const auto &u : ues)
        if (u.id == id)
            return &u;
    return nullptr;
}

const GnbSpec *Scenario::find_gnb(const EntityId &id) const
{
    for (const auto &g : gnbs)
        if (g.id == id)
            return &g;
    return nullptr;
}

const GnbSpec *Scenario::gnb_by_pci(std::uint16_t pci) const
{
    for (const auto &g : gnbs)
        if (g.pci == pci)
            return &g;
    return nullptr;
}

std::string default_sn_name(const std::string &plmn)
{
    // PLMN "00101" -> mcc 001, mnc 01 (zero-padded to three digits)
    std::string mcc = plmn.substr(0, 3);
    std::string mnc = plmn.size() > 3 ? plmn.substr(3) : "";
    while (mnc.size() < 3)
        mnc.insert(mnc.begin(), '0');
    return "5G:mnc" + mnc + ".mcc" + mcc + ".3gppnetwork.org";
}

ScenarioError::ScenarioError(std::vector<ValidationIssue> issues)
    : std::runtime_error("invalid scenario"), issues_(std::move(issues))
{
}

std::string ScenarioError::report() const
{
    std::ostringstream out;
    for (const auto &i : issues_)
        out << (i.path.empty() ? "<root>" : i.path) << ": " << i.message << "\n";
    return out.str();
}

namespace
{

class Reader
{
  public:
    std::vector<ValidationIssue> issues;

    void fail(const std::string &path, const std::string &msg) { issues.push_back({path, msg}); }

    template <typename T>
    void get(const YAML::Node &node, const std::string &key, const std::string &path, T &out)
    {
        auto child = node[key];
        if (!child || child.IsNull())
            return;
        try
        {
            out = child.as<T>();
        }
        catch (const YAML::Exception &)
        {
            fail(join(path, key), "wrong type");
        }
    }

    template <typename T>
    void require(const YAML::Node &node, const std::string &key, const std::string &path, T &out)
    {
        if (!node[key] || node[key].IsNull())
        {
            fail(join(path, key), "required");
            return;
        }
        get(node, key, path, out);
    }

    void get_u16(const YAML::Node &node, const std::string &key, const std::string &path, std::uint16_t &out)
    {
        unsigned v = out;
        get(node, key, path, v);
        if (v > 0xffff)
            fail(join(path, key), "out of range");
        out = static_cast<std::uint16_t>(v);
    }

    void get_key256(const YAML::Node &node, const std::string &key, const std::string &path,
                    std::optional<Key256> &out)
    {
        std::string hex;
        get(node, key, path, hex);
        if (hex.empty())
            return;
        try
        {
            out = octets_from_hex<Key256>(hex);
        }
        catch (const std::exception &e)
        {
            fail(join(path, key), e.what());
        }
    }

    void check_keys(const YAML::Node &node, const std::string &path, std::initializer_list<const char *> allowed)
    {
        if (!node.IsMap())
        {
            fail(path, "expected a mapping");
            return;
        }
        for (const auto &kv : node)
        {
            auto k = kv.first.as<std::string>();
            bool ok = false;
            for (const char *a : allowed)
                ok = ok || k == a;
            if (!ok)
                fail(join(path, k), "unknown key");
        }
    }

    static std::string join(const std::string &path, const std::string &key)
    {
        return path.empty() ? key : path + "." + key;
    }
    static std::string index(const std::string &path, std::size_t i)
    {
        return path + "[" + std::to_string(i) + "]";
    }
};

LinkSpec read_link(Reader &r, const YAML::Node &n, const std::string &p)
{
    LinkSpec l;
    r.require(n, "tx", p, l.tx);
    r.require(n, "rx", p, l.rx);
    r.require(n, "dbm", p, l.dbm);
    r.get(n, "symmetric", p, l.symmetric);
    return l;
}

radio::RaConfig read_ra(Reader &r, const YAML::Node &n, const std::string &p, radio::RaConfig ra)
{
    if (!n)
        return ra;
    r.check_keys(n, p, {"preambles", "max_attempts"});
    r.get(n, "preambles", p, ra.preamble_pool);
    r.get(n, "max_attempts", p, ra.max_attempts);
    return ra;
}

Scenario parse(const YAML::Node &root, Reader &r)
{
    Scenario s;
    if (!root || root.IsNull())
    {
        r.fail("", "empty scenario");
        return s;
    }
    r.check_keys(root, "", {"name", "seed", "max_ticks", "mode", "concealment", "timing", "radio", "home", "amfs",
                            "gnbs", "ues", "tss", "attackers", "paging"});
    if (!root.IsMap())
        return s;
    r.get(root, "name", "", s.name);
    r.get(root, "seed", "", s.seed);
    r.get(root, "max_ticks", "", s.max_ticks);
    r.get(root, "concealment", "", s.concealment);
    if (root["mode"])
    {
        std::string m;
        r.get(root, "mode", "", m);
        try
        {
            s.mode = mode_from_string(m);
        }
        catch (const std::exception &e)
        {
            r.fail("mode", e.what());
        }
    }

    if (auto t = root["timing"])
    {
        r.check_keys(t, "timing",
                     {"air_latency", "net_latency", "ra_occasion_period", "ra_response_window", "paging_cycle",
                      "paging_timeout", "report_interval", "handover_guard", "registration_guard",
                      "registration_backoff"});
        auto &tm = s.timing;
        r.get(t, "air_latency", "timing", tm.air_latency);
        r.get(t, "net_latency", "timing", tm.net_latency);
        r.get(t, "ra_occasion_period", "timing", tm.ra_occasion_period);
        r.get(t, "ra_response_window", "timing", tm.ra_response_window);
        r.get(t, "paging_cycle", "timing", tm.paging_cycle);
        r.get(t, "paging_timeout", "timing", tm.paging_timeout);
        r.get(t, "report_interval", "timing", tm.report_interval);
        r.get(t, "handover_guard", "timing", tm.handover_guard);
        r.get(t, "registration_guard", "timing", tm.registration_guard);
        r.get(t, "registration_backoff", "timing", tm.registration_backoff);
    }

    if (auto rad = root["radio"])
    {
        r.check_keys(rad, "radio", {"noise_floor_dbm", "capture_margin_db", "trigger_margin_db", "links", "changes"});
        r.get(rad, "noise_floor_dbm", "radio", s.radio.noise_floor_dbm);
        r.get(rad, "capture_margin_db", "radio", s.radio.capture_margin_db);
        r.get(rad, "trigger_margin_db", "radio", s.radio.trigger_margin_db);
        if (auto links = rad["links"])
            for (std::size_t i = 0; i < links.size(); ++i)
            {
                auto p = Reader::index("radio.links", i);
                r.check_keys(links[i], p, {"tx", "rx", "dbm", "symmetric"});
                s.radio.links.push_back(read_link(r, links[i], p));
            }
        if (auto ch = rad["changes"])
            for (std::size_t i = 0; i < ch.size(); ++i)
            {
                auto p = Reader::index("radio.changes", i);
                r.check_keys(ch[i], p, {"at", "tx", "rx", "dbm", "symmetric"});
                LinkChange c;
                r.require(ch[i], "at", p, c.at);
                c.link = read_link(r, ch[i], p);
                s.radio.changes.push_back(c);
            }
    }

    if (auto h = root["home"])
    {
        r.check_keys(h, "home", {"id", "plmn", "key_id", "private_key"});
        r.get(h, "id", "home", s.home.id);
        r.get(h, "plmn", "home", s.home.plmn);
        unsigned kid = s.home.key_id;
        r.get(h, "key_id", "home", kid);
        if (kid > 255)
            r.fail("home.key_id", "out of range");
        s.home.key_id = static_cast<std::uint8_t>(kid);
        std::optional<Key256> pk;
        r.get_key256(h, "private_key", "home", pk);
        if (pk)
            s.home.private_key = pk->v;
    }

    if (auto amfs = root["amfs"])
        for (std::size_t i = 0; i < amfs.size(); ++i)
        {
            auto p = Reader::index("amfs", i);
            r.check_keys(amfs[i], p, {"id", "plmn", "sn_name", "default"});
            AmfSpec a;
            r.require(amfs[i], "id", p, a.id);
            r.get(amfs[i], "plmn", p, a.plmn);
            r.get(amfs[i], "sn_name", p, a.sn_name);
            r.get(amfs[i], "default", p, a.is_default);
            s.amfs.push_back(a);
        }

    if (auto gnbs = root["gnbs"])
        for (std::size_t i = 0; i < gnbs.size(); ++i)
        {
            auto p = Reader::index("gnbs", i);
            const auto &n = gnbs[i];
            r.check_keys(n, p,
                         {"id", "gnb_id", "pci", "freq", "tac", "plmn", "amf", "amfs", "ncl", "ra", "overload", "barred",
                          "inactivity_release"});
            GnbSpec g;
            r.require(n, "id", p, g.id);
            g.gnb_id = static_cast<std::uint32_t>(i + 1);
            r.get(n, "gnb_id", p, g.gnb_id);
            r.require(n, "pci", p, g.pci);
            g.freq = 632628;
            r.get(n, "freq", p, g.freq);
            g.tac = 1;
            r.get(n, "tac", p, g.tac);
            r.get(n, "plmn", p, g.plmn);
            r.get(n, "amf", p, g.amf);
            r.get(n, "amfs", p, g.amfs);
            r.get(n, "ncl", p, g.ncl);
            g.ra = read_ra(r, n["ra"], p + ".ra", g.ra);
            r.get(n, "overload", p, g.overload);
            r.get(n, "barred", p, g.barred);
            r.get(n, "inactivity_release", p, g.inactivity_release);
            s.gnbs.push_back(g);
        }

    if (auto ues = root["ues"])
        for (std::size_t i = 0; i < ues.size(); ++i)
        {
            auto p = Reader::index("ues", i);
            const auto &n = ues[i];
            r.check_keys(n, p,
                         {"id", "supi", "k", "sqn", "preferred_plmns", "forbidden_plmns", "power_on",
                          "periodic_registration"});
            UeSpec u;
            r.require(n, "id", p, u.id);
            if (auto supi = n["supi"])
            {
                r.check_keys(supi, p + ".supi", {"plmn", "msin"});
                r.require(supi, "plmn", p + ".supi", u.supi.plmn_id);
                r.require(supi, "msin", p + ".supi", u.supi.msin);
            }
            else
                r.fail(p + ".supi", "required");
            r.get_key256(n, "k", p, u.k);
            r.get(n, "sqn", p, u.sqn);
            r.get(n, "preferred_plmns", p, u.preferred_plmns);
            r.get(n, "forbidden_plmns", p, u.forbidden_plmns);
            r.get(n, "power_on", p, u.power_on);
            r.get(n, "periodic_registration", p, u.periodic_registration);
            s.ues.push_back(u);
        }

    if (auto t = root["tss"])
    {
        r.check_keys(t, "tss", {"tag_bits", "slot_length", "secret", "ue_verify"});
        r.get(t, "tag_bits", "tss", s.tss.tag_bits);
        r.get(t, "slot_length", "tss", s.tss.slot_length);
        r.get(t, "ue_verify", "tss", s.tss.ue_verify);
        std::optional<Key256> secret;
        r.get_key256(t, "secret", "tss", secret);
        if (secret)
        {
            s.tss.network_secret = *secret;
            s.tss_secret_given = true;
        }
    }

    if (auto atk = root["attackers"])
        for (std::size_t i = 0; i < atk.size(); ++i)
        {
            auto p = Reader::index("attackers", i);
            const auto &n = atk[i];
            r.check_keys(n, p,
                         {"id", "mode", "start", "stop", "victim", "target_pci", "victim_source_pci", "overlay",
                          "full_ssb", "variant", "tag_strategy", "probe_targets", "probes_per_target"});
            AttackerSpec a;
            r.require(n, "id", p, a.id);
            std::string mode;
            r.require(n, "mode", p, mode);
            if (mode == "ssb_spoof")
                a.mode = AttackMode::SsbSpoof;
            else if (mode == "sqn_linkability")
                a.mode = AttackMode::SqnLinkability;
            else if (mode == "fake_bs_handover")
                a.mode = AttackMode::FakeBsHandover;
            else if (!mode.empty())
                r.fail(p + ".mode", "unknown attack mode '" + mode + "'");
            r.get(n, "start", p, a.start);
            r.get(n, "stop", p, a.stop);
            r.get(n, "victim", p, a.victim);
            r.get_u16(n, "target_pci", p, a.target_pci);
            if (n["victim_source_pci"])
            {
                std::uint16_t v = 0;
                r.get_u16(n, "victim_source_pci", p, v);
                a.victim_source_pci = v;
            }
            if (auto ov = n["overlay"])
            {
                r.check_keys(ov, p + ".overlay", {"cell_barred", "sfn", "coreset0_locator"});
                if (ov["cell_barred"])
                {
                    bool b = false;
                    r.get(ov, "cell_barred", p + ".overlay", b);
                    a.overlay_cell_barred = b;
                }
                if (ov["sfn"])
                {
                    std::uint32_t v = 0;
                    r.get(ov, "sfn", p + ".overlay", v);
                    a.overlay_sfn = v;
                }
                if (ov["coreset0_locator"])
                {
                    std::string v;
                    r.get(ov, "coreset0_locator", p + ".overlay", v);
                    a.overlay_coreset0 = v;
                }
            }
            r.get(n, "full_ssb", p, a.full_ssb);
            std::string variant = "dos";
            r.get(n, "variant", p, variant);
            if (variant == "mim")
                a.mim = true;
            else if (variant != "dos")
                r.fail(p + ".variant", "must be 'dos' or 'mim'");
            std::string strategy = "replay";
            r.get(n, "tag_strategy", p, strategy);
            if (strategy == "replay")
                a.tag_strategy = TagStrategy::Replay;
            else if (strategy == "guess")
                a.tag_strategy = TagStrategy::Guess;
            else if (strategy == "none")
                a.tag_strategy = TagStrategy::None;
            else
                r.fail(p + ".tag_strategy", "must be 'replay', 'guess' or 'none'");
            r.get(n, "probe_targets", p, a.probe_targets);
            r.get(n, "probes_per_target", p, a.probes_per_target);
            s.attackers.push_back(a);
        }

    if (auto pg = root["paging"])
        for (std::size_t i = 0; i < pg.size(); ++i)
        {
            auto p = Reader::index("paging", i);
            const auto &n = pg[i];
            r.check_keys(n, p, {"ue", "amf", "at", "from", "every", "until"});
            PagingSpec ps;
            r.require(n, "ue", p, ps.ue);
            r.get(n, "amf", p, ps.amf);
            if (n["at"])
            {
                r.get(n, "at", p, ps.from);
                ps.until = ps.from;
            }
            else
            {
                r.require(n, "from", p, ps.from);
                r.require(n, "every", p, ps.every);
                ps.until = ps.from;
                r.get(n, "until", p, ps.until);
            }
            s.paging.push_back(ps);
        }
    return s;
}

void fill_defaults(Scenario &s)
{
    if (s.home.plmn.empty() && !s.ues.empty())
        s.home.plmn = s.ues.front().supi.plmn_id;
    std::string serving_plmn = s.home.plmn;
    bool any_default = false;
    for (auto &a : s.amfs)
    {
        if (a.plmn.empty())
            a.plmn = serving_plmn;
        if (a.sn_name.empty())
            a.sn_name = default_sn_name(a.plmn);
        any_default = any_default || a.is_default;
    }
    if (!any_default && !s.amfs.empty())
        s.amfs.front().is_default = true;
    for (auto &g : s.gnbs)
    {
        if (g.amf.empty() && !s.amfs.empty())
            g.amf = s.default_amf().id;
        if (g.plmn.empty())
        {
            for (const auto &a : s.amfs)
                if (a.id == g.amf)
                    g.plmn = a.plmn;
        }
        if (g.amfs.empty() && !g.amf.empty())
            g.amfs.push_back(g.amf);
        if (std::find(g.amfs.begin(), g.amfs.end(), g.amf) == g.amfs.end())
            g.amfs.insert(g.amfs.begin(), g.amf);
    }
    for (auto &p : s.paging)
        if (p.amf.empty() && !s.amfs.empty())
            p.amf = s.default_amf().id;
}

void check(const Scenario &s, std::vector<ValidationIssue> &issues)
{
    auto fail = [&](std::string path, std::string msg) { issues.push_back({std::move(path), std::move(msg)}); };

    if (s.max_ticks == 0)
        fail("max_ticks", "must be positive");
    if (s.amfs.empty())
        fail("amfs", "at least one AMF is required");
    if (!(s.radio.capture_margin_db > 0))
        fail("radio.capture_margin_db", "must be positive");
    if (!(s.radio.trigger_margin_db > 0))
        fail("radio.trigger_margin_db", "must be positive");
    const auto &t = s.timing;
    if (t.air_latency == 0)
        fail("timing.air_latency", "must be at least 1");
    if (t.net_latency == 0)
        fail("timing.net_latency", "must be at least 1");
    if (t.ra_occasion_period == 0)
        fail("timing.ra_occasion_period", "must be positive");
    if (t.paging_cycle == 0)
        fail("timing.paging_cycle", "must be positive");
    if (t.report_interval == 0)
        fail("timing.report_interval", "must be positive");
    if (t.ra_response_window < 4 * t.air_latency)
        fail("timing.ra_response_window", "shorter than a four-step random access exchange");

    std::map<std::string, std::string> ids; // id -> path of first definition
    auto claim = [&](const std::string &id, const std::string &path) {
        if (id.empty())
            return;
        auto [it, fresh] = ids.emplace(id, path);
        if (!fresh)
            fail(path + ".id", "duplicate entity id '" + id + "' (also " + it->second + ")");
    };
    claim(s.home.id, "home");
    for (std::size_t i = 0; i < s.amfs.size(); ++i)
        claim(s.amfs[i].id, "amfs[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < s.gnbs.size(); ++i)
        claim(s.gnbs[i].id, "gnbs[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < s.ues.size(); ++i)
        claim(s.ues[i].id, "ues[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < s.attackers.size(); ++i)
        claim(s.attackers[i].id, "attackers[" + std::to_string(i) + "]");

    auto amf_known = [&](const std::string &id) {
        return std::any_of(s.amfs.begin(), s.amfs.end(), [&](const AmfSpec &a) { return a.id == id; });
    };

    std::map<std::uint16_t, std::string> pcis;
    std::set<std::uint32_t> gnb_ids;
    std::set<std::string> served_plmns;
    for (std::size_t i = 0; i < s.gnbs.size(); ++i)
    {
        const auto &g = s.gnbs[i];
        std::string p = "gnbs[" + std::to_string(i) + "]";
        if (g.pci > radio::kMaxPci)
            fail(p + ".pci", "PCI must be in 0..1007");
        auto [it, fresh] = pcis.emplace(g.pci, g.id);
        if (!fresh)
            fail(p + ".pci", "duplicate PCI " + std::to_string(g.pci) + " on gNBs '" + it->second + "' and '" + g.id +
                                 "'");
        if (!gnb_ids.insert(g.gnb_id).second)
            fail(p + ".gnb_id", "duplicate gnb_id " + std::to_string(g.gnb_id));
        for (const auto &a : g.amfs)
            if (!amf_known(a))
                fail(p + ".amfs", "unknown AMF '" + a + "'");
        if (!g.amf.empty() && !amf_known(g.amf))
            fail(p + ".amf", "unknown AMF '" + g.amf + "'");
        if (g.ra.preamble_pool < 1)
            fail(p + ".ra.preambles", "must be at least 1");
        if (g.ra.max_attempts < 1)
            fail(p + ".ra.max_attempts", "must be at least 1");
        served_plmns.insert(g.plmn);
    }
    for (std::size_t i = 0; i < s.gnbs.size(); ++i)
        for (auto n : s.gnbs[i].ncl)
            if (!pcis.count(n))
                fail("gnbs[" + std::to_string(i) + "].ncl", "neighbor PCI " + std::to_string(n) +
                                                                 " is not a configured gNB");

    for (std::size_t i = 0; i < s.ues.size(); ++i)
    {
        const auto &u = s.ues[i];
        std::string p = "ues[" + std::to_string(i) + "]";
        if (u.supi.plmn_id.size() < 5 || u.supi.plmn_id.size() > 6)
            fail(p + ".supi.plmn", "PLMN id must be 5 or 6 digits");
        if (u.supi.msin.empty())
            fail(p + ".supi.msin", "required");
        for (const auto &ch : u.supi.plmn_id + u.supi.msin)
            if (ch < '0' || ch > '9')
            {
                fail(p + ".supi", "SUPI digits only");
                break;
            }
        if (std::find(u.forbidden_plmns.begin(), u.forbidden_plmns.end(), u.supi.plmn_id) != u.forbidden_plmns.end())
            fail(p + ".forbidden_plmns", "home PLMN cannot be forbidden");
        if (u.sqn == 0 || u.sqn > kh::kSqnMax)
            fail(p + ".sqn", "must be in 1..2^48-1");
        bool reachable = served_plmns.count(u.supi.plmn_id) > 0;
        for (const auto &pp : u.preferred_plmns)
            reachable = reachable || served_plmns.count(pp) > 0;
        if (!reachable && !s.gnbs.empty())
            fail(p + ".supi.plmn", "home PLMN " + u.supi.plmn_id + " is not served and no preferred PLMN is");
        if (u.supi.plmn_id != s.home.plmn)
            fail(p + ".supi.plmn", "subscriber does not belong to home network PLMN " + s.home.plmn);
    }

    std::set<std::string> ue_ids;
    for (const auto &u : s.ues)
        ue_ids.insert(u.id);

    try
    {
        s.tss.validate();
    }
    catch (const std::exception &e)
    {
        fail("tss", e.what());
    }

    for (std::size_t i = 0; i < s.attackers.size(); ++i)
    {
        const auto &a = s.attackers[i];
        std::string p = "attackers[" + std::to_string(i) + "]";
        if (a.stop <= a.start)
            fail(p + ".stop", "must be after start");
        if (a.mode == AttackMode::SsbSpoof || a.mode == AttackMode::FakeBsHandover)
        {
            if (a.target_pci > radio::kMaxPci)
                fail(p + ".target_pci", "PCI must be in 0..1007");
            else if (!pcis.count(a.target_pci) && !a.full_ssb)
                fail(p + ".target_pci", "unknown target PCI " + std::to_string(a.target_pci));
        }
        if (a.mode == AttackMode::SsbSpoof && !a.full_ssb && !a.overlay_cell_barred && !a.overlay_sfn &&
            !a.overlay_coreset0)
            fail(p + ".overlay", "an overlay needs at least one field");
        if (a.mode == AttackMode::FakeBsHandover)
        {
            if (a.victim.empty())
                fail(p + ".victim", "required for fake_bs_handover");
            if (a.victim_source_pci && !pcis.count(*a.victim_source_pci))
                fail(p + ".victim_source_pci", "unknown PCI " + std::to_string(*a.victim_source_pci));
            if (a.victim_source_pci)
            {
                const auto *src = s.gnb_by_pci(*a.victim_source_pci);
                if (src && std::find(src->ncl.begin(), src->ncl.end(), a.target_pci) == src->ncl.end())
                    fail(p + ".target_pci", "target PCI is not in the source gNB's neighbor cell list");
            }
        }
        if (!a.victim.empty() && !ue_ids.count(a.victim))
            fail(p + ".victim", "unknown UE '" + a.victim + "'");
        if (a.mode == AttackMode::SqnLinkability)
        {
            if (a.probe_targets.empty())
                fail(p + ".probe_targets", "required for sqn_linkability");
            for (const auto &t : a.probe_targets)
                if (!ue_ids.count(t))
                    fail(p + ".probe_targets", "unknown UE '" + t + "'");
        }
    }

    for (std::size_t i = 0; i < s.paging.size(); ++i)
    {
        const auto &pg = s.paging[i];
        std::string p = "paging[" + std::to_string(i) + "]";
        if (!ue_ids.count(pg.ue))
            fail(p + ".ue", "unknown UE '" + pg.ue + "'");
        if (!pg.amf.empty() && !amf_known(pg.amf))
            fail(p + ".amf", "unknown AMF '" + pg.amf + "'");
        if (pg.until < pg.from)
            fail(p + ".until", "before 'from'");
    }

    std::set<std::string> all_ids;
    for (const auto &[id, path] : ids)
        all_ids.insert(id);
    auto check_link = [&](const LinkSpec &l, const std::string &p) {
        if (!all_ids.count(l.tx))
            fail(p + ".tx", "unknown entity '" + l.tx + "'");
        if (!all_ids.count(l.rx))
            fail(p + ".rx", "unknown entity '" + l.rx + "'");
    };
    for (std::size_t i = 0; i < s.radio.links.size(); ++i)
        check_link(s.radio.links[i], "radio.links[" + std::to_string(i) + "]");
    for (std::size_t i = 0; i < s.radio.changes.size(); ++i)
        check_link(s.radio.changes[i].link, "radio.changes[" + std::to_string(i) + "]");
}

} // namespace

void validate(const Scenario &s)
{
    std::vector<ValidationIssue> issues;
    check(s, issues);
    if (!issues.empty())
        throw ScenarioError(std::move(issues));
}

Scenario load_scenario(const std::string &text)
{
    YAML::Node root;
    try
    {
        root = YAML::Load(text);
    }
    catch (const YAML::Exception &e)
    {
        throw ScenarioError({{"", std::string("malformed YAML: ") + e.what()}});
    }
    Reader r;
    Scenario s = parse(root, r);
    fill_defaults(s);
    check(s, r.issues);
    if (!r.issues.empty())
        throw ScenarioError(std::move(r.issues));
    return s;
}

Scenario load_scenario_file(const std::string &path)
{
    std::ifstream in(path);
    if (!in)
        throw std::ios_base::failure("cannot read scenario file " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return load_scenario(buf.str());
}

void provision(Scenario &s)
{
    for (auto &u : s.ues)
        if (!u.k)
            u.k = Rng(s.seed, "provision/k/" + u.id).octets<Key256>();
    if (!s.home.private_key)
        s.home.private_key = Rng(s.seed, "provision/home").octets<Key256>().v;
    if (!s.tss_secret_given)
    {
        s.tss.network_secret = Rng(s.seed, "provision/tss").octets<Key256>();
        s.tss_secret_given = true;
    }
    s.tss.enabled = s.mode == Mode::Tss;
}

namespace
{

template <typename T>
void emit_list(YAML::Emitter &out, const char *key, const std::vector<T> &v)
{
    out << YAML::Key << key << YAML::Value << YAML::Flow << YAML::BeginSeq;
    for (const auto &x : v)
        out << x;
    out << YAML::EndSeq;
}

void emit_link(YAML::Emitter &out, const LinkSpec &l)
{
    out << YAML::Key << "tx" << YAML::Value << l.tx << YAML::Key << "rx" << YAML::Value << l.rx;
    out << YAML::Key << "dbm" << YAML::Value << l.dbm << YAML::Key << "symmetric" << YAML::Value << l.symmetric;
}

} // namespace

std::string normalized_yaml(const Scenario &s)
{
    YAML::Emitter out;
    out << YAML::BeginMap;
    out << YAML::Key << "name" << YAML::Value << s.name;
    out << YAML::Key << "seed" << YAML::Value << s.seed;
    out << YAML::Key << "max_ticks" << YAML::Value << s.max_ticks;
    out << YAML::Key << "mode" << YAML::Value << to_string(s.mode);
    out << YAML::Key << "concealment" << YAML::Value << s.concealment;

    const auto &t = s.timing;
    out << YAML::Key << "timing" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "air_latency" << YAML::Value << t.air_latency;
    out << YAML::Key << "net_latency" << YAML::Value << t.net_latency;
    out << YAML::Key << "ra_occasion_period" << YAML::Value << t.ra_occasion_period;
    out << YAML::Key << "ra_response_window" << YAML::Value << t.ra_response_window;
    out << YAML::Key << "paging_cycle" << YAML::Value << t.paging_cycle;
    out << YAML::Key << "paging_timeout" << YAML::Value << t.paging_timeout;
    out << YAML::Key << "report_interval" << YAML::Value << t.report_interval;
    out << YAML::Key << "handover_guard" << YAML::Value << t.handover_guard;
    out << YAML::Key << "registration_guard" << YAML::Value << t.registration_guard;
    out << YAML::Key << "registration_backoff" << YAML::Value << t.registration_backoff;
    out << YAML::EndMap;

    out << YAML::Key << "radio" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "noise_floor_dbm" << YAML::Value << s.radio.noise_floor_dbm;
    out << YAML::Key << "capture_margin_db" << YAML::Value << s.radio.capture_margin_db;
    out << YAML::Key << "trigger_margin_db" << YAML::Value << s.radio.trigger_margin_db;
    out << YAML::Key << "links" << YAML::Value << YAML::BeginSeq;
    for (const auto &l : s.radio.links)
    {
        out << YAML::Flow << YAML::BeginMap;
        emit_link(out, l);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::Key << "changes" << YAML::Value << YAML::BeginSeq;
    for (const auto &c : s.radio.changes)
    {
        out << YAML::Flow << YAML::BeginMap << YAML::Key << "at" << YAML::Value << c.at;
        emit_link(out, c.link);
        out << YAML::EndMap;
    }
    out << YAML::EndSeq << YAML::EndMap;

    out << YAML::Key << "home" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "id" << YAML::Value << s.home.id;
    out << YAML::Key << "plmn" << YAML::Value << s.home.plmn;
    out << YAML::Key << "key_id" << YAML::Value << static_cast<unsigned>(s.home.key_id);
    if (s.home.private_key)
        out << YAML::Key << "private_key" << YAML::Value << to_hex(ByteView(*s.home.private_key));
    out << YAML::EndMap;

    out << YAML::Key << "amfs" << YAML::Value << YAML::BeginSeq;
    for (const auto &a : s.amfs)
    {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << a.id;
        out << YAML::Key << "plmn" << YAML::Value << a.plmn;
        out << YAML::Key << "sn_name" << YAML::Value << a.sn_name;
        out << YAML::Key << "default" << YAML::Value << a.is_default;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "gnbs" << YAML::Value << YAML::BeginSeq;
    for (const auto &g : s.gnbs)
    {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << g.id;
        out << YAML::Key << "gnb_id" << YAML::Value << g.gnb_id;
        out << YAML::Key << "pci" << YAML::Value << g.pci;
        out << YAML::Key << "freq" << YAML::Value << g.freq;
        out << YAML::Key << "tac" << YAML::Value << g.tac;
        out << YAML::Key << "plmn" << YAML::Value << g.plmn;
        out << YAML::Key << "amf" << YAML::Value << g.amf;
        emit_list(out, "amfs", g.amfs);
        emit_list(out, "ncl", g.ncl);
        out << YAML::Key << "ra" << YAML::Value << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "preambles" << YAML::Value << g.ra.preamble_pool;
        out << YAML::Key << "max_attempts" << YAML::Value << g.ra.max_attempts;
        out << YAML::EndMap;
        out << YAML::Key << "overload" << YAML::Value << g.overload;
        out << YAML::Key << "barred" << YAML::Value << g.barred;
        out << YAML::Key << "inactivity_release" << YAML::Value << g.inactivity_release;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "ues" << YAML::Value << YAML::BeginSeq;
    for (const auto &u : s.ues)
    {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << u.id;
        out << YAML::Key << "supi" << YAML::Value << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "plmn" << YAML::Value << YAML::DoubleQuoted << u.supi.plmn_id;
        out << YAML::Key << "msin" << YAML::Value << YAML::DoubleQuoted << u.supi.msin << YAML::EndMap;
        if (u.k)
            out << YAML::Key << "k" << YAML::Value << to_hex(*u.k);
        out << YAML::Key << "sqn" << YAML::Value << u.sqn;
        emit_list(out, "preferred_plmns", u.preferred_plmns);
        emit_list(out, "forbidden_plmns", u.forbidden_plmns);
        out << YAML::Key << "power_on" << YAML::Value << u.power_on;
        out << YAML::Key << "periodic_registration" << YAML::Value << u.periodic_registration;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "tss" << YAML::Value << YAML::BeginMap;
    out << YAML::Key << "tag_bits" << YAML::Value << s.tss.tag_bits;
    out << YAML::Key << "slot_length" << YAML::Value << s.tss.slot_length;
    if (s.tss_secret_given)
        out << YAML::Key << "secret" << YAML::Value << to_hex(s.tss.network_secret);
    out << YAML::Key << "ue_verify" << YAML::Value << s.tss.ue_verify;
    out << YAML::EndMap;

    out << YAML::Key << "attackers" << YAML::Value << YAML::BeginSeq;
    for (const auto &a : s.attackers)
    {
        out << YAML::BeginMap;
        out << YAML::Key << "id" << YAML::Value << a.id;
        out << YAML::Key << "mode" << YAML::Value << to_string(a.mode);
        out << YAML::Key << "start" << YAML::Value << a.start;
        if (a.stop != kForever)
            out << YAML::Key << "stop" << YAML::Value << a.stop;
        if (!a.victim.empty())
            out << YAML::Key << "victim" << YAML::Value << a.victim;
        if (a.mode != AttackMode::SqnLinkability)
            out << YAML::Key << "target_pci" << YAML::Value << a.target_pci;
        if (a.victim_source_pci)
            out << YAML::Key << "victim_source_pci" << YAML::Value << *a.victim_source_pci;
        if (a.mode == AttackMode::SsbSpoof)
        {
            out << YAML::Key << "overlay" << YAML::Value << YAML::Flow << YAML::BeginMap;
            if (a.overlay_cell_barred)
                out << YAML::Key << "cell_barred" << YAML::Value << *a.overlay_cell_barred;
            if (a.overlay_sfn)
                out << YAML::Key << "sfn" << YAML::Value << *a.overlay_sfn;
            if (a.overlay_coreset0)
                out << YAML::Key << "coreset0_locator" << YAML::Value << *a.overlay_coreset0;
            out << YAML::EndMap;
            out << YAML::Key << "full_ssb" << YAML::Value << a.full_ssb;
        }
        if (a.mode == AttackMode::FakeBsHandover)
        {
            out << YAML::Key << "variant" << YAML::Value << (a.mim ? "mim" : "dos");
            out << YAML::Key << "tag_strategy" << YAML::Value << to_string(a.tag_strategy);
        }
        if (a.mode == AttackMode::SqnLinkability)
        {
            emit_list(out, "probe_targets", a.probe_targets);
            out << YAML::Key << "probes_per_target" << YAML::Value << a.probes_per_target;
        }
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;

    out << YAML::Key << "paging" << YAML::Value << YAML::BeginSeq;
    for (const auto &p : s.paging)
    {
        out << YAML::Flow << YAML::BeginMap;
        out << YAML::Key << "ue" << YAML::Value << p.ue << YAML::Key << "amf" << YAML::Value << p.amf;
        out << YAML::Key << "from" << YAML::Value << p.from << YAML::Key << "every" << YAML::Value << p.every;
        out << YAML::Key << "until" << YAML::Value << p.until;
        out << YAML::EndMap;
    }
    out << YAML::EndSeq;
    out << YAML::EndMap;
    return std::string(out.c_str()) + "\n";
}

} // namespace nrsec::sim
