// Acceptance suite. Prints one PASS/FAIL line per criterion with the pinned
// tolerance and the measured value, and exits nonzero if any line fails.
//
//   acceptance --scenarios DIR --oracle PATH --python EXE [--work DIR]

#include <nrsec/metrics.hpp>
#include <nrsec/mitigation.hpp>
#include <nrsec/rng.hpp>
#include <nrsec/scenario.hpp>
#include <nrsec/vectors.hpp>

#include <CLI11.hpp>

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace nrsec;
using namespace nrsec::sim;

namespace
{

struct Config
{
    std::string scenarios;
    std::string oracle;
    std::string python = "python3";
    std::string work = "acceptance_work";
};

struct Result
{
    bool pass = false;
    std::string detail;
};

Scenario load(const Config &cfg, const std::string &stem, std::uint64_t seed, Mode mode = Mode::Baseline)
{
    auto s = load_scenario_file(cfg.scenarios + "/" + stem + ".yaml");
    s.seed = seed;
    s.mode = mode;
    return s;
}

std::vector<const TraceRecord *> records(const RunOutput &o, const std::string &entity, const std::string &kind)
{
    std::vector<const TraceRecord *> v;
    for (const auto &r : o.trace)
        if (r.entity == entity && r.kind == kind)
            v.push_back(&r);
    return v;
}

std::string trace_text(const RunOutput &o)
{
    std::ostringstream s;
    write_trace(s, o.trace);
    return s.str();
}

std::vector<std::string> corpus(const Config &cfg)
{
    std::vector<std::string> stems;
    for (const auto &e : fs::directory_iterator(cfg.scenarios))
        if (e.path().extension() == ".yaml")
            stems.push_back(e.path().stem().string());
    std::sort(stems.begin(), stems.end());
    return stems;
}

// Returns an empty string when the run satisfies every honest-path property.
std::string honest_violation(const RunOutput &o)
{
    auto accepted = records(o, "ue1", "registration_accepted");
    auto aka = records(o, "ue1", "aka_result");
    auto ue_ctx = records(o, "ue1", "security_context");
    auto amf_ctx = records(o, "amf1", "authenticated");
    auto arpf = records(o, "home", "arpf_sqn_advanced");
    auto ue_ho = records(o, "ue1", "handover_complete");
    auto gnb_ho = records(o, "gnb2", "handover_arrived");
    auto ue_as = records(o, "ue1", "as_keys");
    auto gnb_as = records(o, "gnb1", "as_keys");
    auto final_state = records(o, "ue1", "ue_final");

    if (accepted.empty())
        return "no registration";
    if (aka.size() != 1 || aka[0]->payload["outcome"] != "ok")
        return "AKA did not succeed exactly once";
    if (ue_ctx.size() != 1 || amf_ctx.size() != 1 || ue_ctx[0]->payload["k_amf"] != amf_ctx[0]->payload["k_amf"])
        return "K_AMF mismatch";
    if (ue_as.empty() || gnb_as.empty() || ue_as[0]->payload["k_gnb"] != gnb_as[0]->payload["k_gnb"])
        return "K_gNB mismatch";
    const auto before = aka[0]->payload["sqn_before"].get<std::uint64_t>();
    const auto after = aka[0]->payload["sqn_after"].get<std::uint64_t>();
    if (after != before + 1 || arpf.size() != 1 || arpf[0]->payload["after"].get<std::uint64_t>() != after ||
        arpf[0]->payload["before"].get<std::uint64_t>() != before)
        return "SQN pair did not advance in lockstep by one";
    if (ue_ho.size() != 1 || gnb_ho.size() != 1)
        return "handover did not complete exactly once";
    if (ue_ho[0]->payload["k_gnb_star"] != gnb_ho[0]->payload["k_gnb"])
        return "K_gNB* mismatch";
    if (final_state.size() != 1 || final_state[0]->payload["nhcc"] != ue_ho.size() ||
        gnb_ho[0]->payload["nhcc"] != ue_ho.size())
        return "NHCC differs from the handover count";
    return {};
}

Result honest_path(const Config &cfg)
{
    const auto t0 = std::chrono::steady_clock::now();
    unsigned ok = 0;
    std::string first_bad;
    for (std::uint64_t seed = 1; seed <= 100; ++seed)
    {
        auto why = honest_violation(run_scenario(load(cfg, "honest_handover", seed)));
        if (why.empty())
            ++ok;
        else if (first_bad.empty())
            first_bad = "seed " + std::to_string(seed) + ": " + why;
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::ostringstream d;
    d << ok << "/100 seeds, " << std::fixed << std::setprecision(2) << secs << " s (limit 10 s)";
    if (!first_bad.empty())
        d << "; " << first_bad;
    return {ok == 100 && secs < 10.0, d.str()};
}

Result oracle_vectors(const Config &cfg)
{
    fs::create_directories(cfg.work);
    const auto dump = fs::path(cfg.work) / "vectors.jsonl";
    {
        std::ofstream out(dump);
        vectors::emit({{20251015, 1000}}, out);
    }
    const auto log = fs::path(cfg.work) / "oracle.log";
    const std::string cmd =
        "\"" + cfg.python + "\" \"" + cfg.oracle + "\" check \"" + dump.string() + "\" > \"" + log.string() + "\" 2>&1";
    const int rc = std::system(cmd.c_str());
    std::ifstream in(log);
    std::string last, line;
    while (std::getline(in, line))
        last = line;
    return {rc == 0, "1000 vectors, oracle says: " + (last.empty() ? std::string("no output") : last)};
}

Result ssb_spoof_threshold(const Config &cfg)
{
    // Genuine cell at -80 dBm; the capture margin is the scenario's δ.
    const std::vector<double> offsets_at_or_above{0.0, 0.5, 3.0, 20.0};
    const std::vector<double> offsets_below{-0.01, -1.0, -10.0, -40.0};
    unsigned violations = 0, runs = 0;
    std::string first;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
    {
        for (int above = 1; above >= 0; --above)
            for (double off : above ? offsets_at_or_above : offsets_below)
            {
                auto s = load(cfg, "ssb_spoof", seed);
                double genuine = 0;
                for (const auto &l : s.radio.links)
                    if (l.tx == "gnb1" && l.rx == "ue1")
                        genuine = l.dbm;
                for (auto &l : s.radio.links)
                    if (l.tx == "spoofer" && l.rx == "ue1")
                        l.dbm = genuine + s.radio.capture_margin_db + off;
                auto o = run_scenario(s);
                bool camped = false;
                for (const auto *r : records(o, "ue1", "camp"))
                    camped = camped || r->payload["pci"] == 101;
                const bool outcome = o.summary["attacks"][0]["camped_on_target"]["ue1"].get<bool>();
                ++runs;
                if (camped != outcome || camped == static_cast<bool>(above))
                {
                    ++violations;
                    if (first.empty())
                        first = "seed " + std::to_string(seed) + " offset " + std::to_string(off);
                }
            }
    }
    std::string d = std::to_string(runs - violations) + "/" + std::to_string(runs) +
                    " runs as expected (never camps at >= genuine+delta, always below)";
    if (!first.empty())
        d += "; first violation " + first;
    return {violations == 0, d};
}

Result linkability(const Config &cfg)
{
    unsigned probes = 0, correct = 0, runs_without_probe = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
    {
        auto o = run_scenario(load(cfg, "sqn_linkability", seed));
        std::set<std::string> probed;
        for (const auto *r : records(o, "sniffer", "linkability_probe"))
            probed.insert(r->payload["target"].get<std::string>());
        const auto &a = o.summary["attacks"][0];
        probes += a["probes"].get<unsigned>();
        correct += a["correct"].get<unsigned>();
        runs_without_probe += probed.size() != 2;
    }
    std::ostringstream d;
    d << correct << "/" << probes << " probes classified correctly over 50 seeds (required 100%)";
    if (runs_without_probe)
        d << "; " << runs_without_probe << " runs did not probe both UEs";
    return {probes > 0 && correct == probes && runs_without_probe == 0, d.str()};
}

Result fake_bs(const Config &cfg)
{
    unsigned base_runs = 0, base_report = 0, base_ho = 0, dos_runs = 0, dos_missed = 0;
    unsigned tss_runs = 0, tss_ho = 0, control_same = 0, control_ok = 0;
    for (std::uint64_t seed = 1; seed <= 50; ++seed)
    {
        for (const char *stem : {"fake_bs_dos", "fake_bs_mim", "fake_bs_guess"})
        {
            auto b = run_scenario(load(cfg, stem, seed, Mode::Baseline));
            const auto &a = b.summary["attacks"][0];
            ++base_runs;
            base_report += a["report_triggered"].get<bool>();
            base_ho += a["handover_initiated"].get<bool>();
            if (a["variant"] == "dos")
            {
                ++dos_runs;
                dos_missed += a["pages_missed"].get<unsigned>() > 0;
            }
            auto t = run_scenario(load(cfg, stem, seed, Mode::Tss));
            ++tss_runs;
            tss_ho += t.summary["attacks"][0]["handover_initiated"].get<bool>();
        }
        auto cb = run_scenario(load(cfg, "attack_free_control", seed, Mode::Baseline)).summary;
        auto ct = run_scenario(load(cfg, "attack_free_control", seed, Mode::Tss)).summary;
        control_same += cb["handovers"] == ct["handovers"] && cb["registrations"] == ct["registrations"];
        control_ok += cb["handovers"]["completed"] == 1 && ct["handovers"]["completed"] == 1;
    }
    std::ostringstream d;
    d << "baseline report_triggered " << base_report << "/" << base_runs << ", handover_initiated " << base_ho << "/"
      << base_runs << ", dos pages_missed>0 " << dos_missed << "/" << dos_runs << "; tss handover_initiated "
      << tss_ho << "/" << tss_runs << "; attack-free control identical " << control_same << "/50, completed "
      << control_ok << "/50";
    const bool pass = base_report == base_runs && base_ho == base_runs && dos_missed == dos_runs && tss_ho == 0 &&
                      control_same == 50 && control_ok == 50;
    return {pass, d.str()};
}

Result forged_tags()
{
    tss::TssConfig cfg;
    cfg.enabled = true;
    cfg.tag_bits = 64;
    cfg.slot_length = 10;
    cfg.network_secret = Rng(1, "acceptance/secret").octets<Key256>();
    Rng guess(2, "acceptance/guess");
    unsigned accepts = 0;
    for (unsigned i = 0; i < 10000; ++i)
    {
        const std::uint64_t slot = guess.below(1000);
        radio::ReportEntry e{102, -60, tss::TssTag{102, slot, Bytes(8)}, "attacker"};
        guess.fill(e.tss->tag);
        accepts += tss::verify_entry(cfg, e, slot * cfg.slot_length) == tss::Verdict::Accept;
    }
    return {accepts == 0, std::to_string(accepts) + " accepts in 10000 guesses at L=64 (required 0)"};
}

Result determinism(const Config &cfg)
{
    unsigned pairs = 0, identical = 0;
    std::string first;
    for (const auto &stem : corpus(cfg))
        for (std::uint64_t seed = 1; seed <= 3; ++seed)
            for (auto mode : {Mode::Baseline, Mode::Tss})
            {
                auto a = trace_text(run_scenario(load(cfg, stem, seed, mode)));
                auto b = trace_text(run_scenario(load(cfg, stem, seed, mode)));
                ++pairs;
                if (a == b)
                    ++identical;
                else if (first.empty())
                    first = stem + " seed " + std::to_string(seed);
            }
    std::string d = std::to_string(identical) + "/" + std::to_string(pairs) + " (scenario, seed, mode) reruns byte-identical";
    if (!first.empty())
        d += "; first difference " + first;
    return {pairs > 0 && identical == pairs, d};
}

Result confidentiality(const Config &cfg)
{
    std::size_t leaks = 0, control_hits = 0, runs = 0;
    std::string first;
    for (const auto &stem : corpus(cfg))
        for (std::uint64_t seed = 1; seed <= 5; ++seed)
            for (auto mode : {Mode::Baseline, Mode::Tss})
            {
                auto o = run_scenario(load(cfg, stem, seed, mode));
                std::vector<kh::Supi> supis;
                for (const auto &u : o.scenario.ues)
                    supis.push_back(u.supi);
                const auto hits = count_cleartext_supi(o.trace, supis);
                if (!o.scenario.concealment)
                {
                    control_hits += hits;
                    continue;
                }
                ++runs;
                leaks += hits;
                if (hits && first.empty())
                    first = stem + " seed " + std::to_string(seed);
            }
    std::string d = std::to_string(leaks) + " cleartext SUPI records over " + std::to_string(runs) +
                    " concealed runs (required 0); negative control " + std::to_string(control_hits) +
                    " (required >= 1)";
    if (!first.empty())
        d += "; first leak " + first;
    return {runs > 0 && leaks == 0 && control_hits >= 1, d};
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Acceptance criteria"};
    Config cfg;
    app.add_option("--scenarios", cfg.scenarios, "Scenario corpus directory")->required();
    app.add_option("--oracle", cfg.oracle, "Key hierarchy oracle script")->required();
    app.add_option("--python", cfg.python, "Python interpreter");
    app.add_option("--work", cfg.work, "Scratch directory");
    CLI11_PARSE(app, argc, argv);

    struct Criterion
    {
        const char *name;
        std::function<Result()> run;
    };
    const std::vector<Criterion> criteria{
        {"1 honest path: registration, AKA, handover, key agreement, SQN, NHCC", [&] { return honest_path(cfg); }},
        {"2 key hierarchy vs independent oracle", [&] { return oracle_vectors(cfg); }},
        {"3 barred-cell overlay capture threshold", [&] { return ssb_spoof_threshold(cfg); }},
        {"4 SQN linkability classification", [&] { return linkability(cfg); }},
        {"5 fake base station handover, baseline vs tss", [&] { return fake_bs(cfg); }},
        {"6 forged tag soundness", [] { return forged_tags(); }},
        {"7 trace determinism across the corpus", [&] { return determinism(cfg); }},
        {"8 no SUPI in cleartext records", [&] { return confidentiality(cfg); }},
    };

    bool all = true;
    for (const auto &c : criteria)
    {
        Result r;
        try
        {
            r = c.run();
        }
        catch (const std::exception &e)
        {
            r = {false, std::string("exception: ") + e.what()};
        }
        all = all && r.pass;
        std::cout << (r.pass ? "PASS" : "FAIL") << "  " << c.name << " | " << r.detail << std::endl;
    }
    return all ? 0 : 1;
}
