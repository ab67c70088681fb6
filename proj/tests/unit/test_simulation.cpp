#include <doctest.h>

#include <nrsec/metrics.hpp>
#include <nrsec/scenario.hpp>

#include <sstream>

using namespace nrsec;
using namespace nrsec::sim;

namespace
{

Scenario scenario(const std::string &stem, std::uint64_t seed, Mode mode = Mode::Baseline)
{
    auto s = load_scenario_file(std::string(NRSEC_SCENARIO_DIR) + "/" + stem + ".yaml");
    s.seed = seed;
    s.mode = mode;
    return s;
}

std::vector<const TraceRecord *> find(const RunOutput &out, const std::string &entity, const std::string &kind)
{
    std::vector<const TraceRecord *> v;
    for (const auto &r : out.trace)
        if (r.entity == entity && r.kind == kind)
            v.push_back(&r);
    return v;
}

} // namespace

TEST_CASE("honest handover: keys agree on both sides")
{
    auto out = run_scenario(scenario("honest_handover", 11));
    auto ue_keys = find(out, "ue1", "security_context");
    auto amf_keys = find(out, "amf1", "authenticated");
    REQUIRE(ue_keys.size() == 1);
    REQUIRE(amf_keys.size() == 1);
    CHECK(ue_keys[0]->payload["k_amf"] == amf_keys[0]->payload["k_amf"]);

    auto ue_ho = find(out, "ue1", "handover_complete");
    auto gnb_ho = find(out, "gnb2", "handover_arrived");
    REQUIRE(ue_ho.size() == 1);
    REQUIRE(gnb_ho.size() == 1);
    CHECK(ue_ho[0]->payload["k_gnb_star"] == gnb_ho[0]->payload["k_gnb"]);
    CHECK(ue_ho[0]->payload["nhcc"] == 1);

    auto aka = find(out, "ue1", "aka_result");
    REQUIRE(aka.size() == 1);
    CHECK(aka[0]->payload["sqn_before"] == 1);
    CHECK(aka[0]->payload["sqn_after"] == 2);

    const auto &sum = out.summary;
    CHECK(sum["registrations"]["succeeded"] == 1);
    CHECK(sum["handovers"]["completed"] == 1);
    CHECK(sum["messages"]["balanced"] == true);
}

TEST_CASE("same seed, same trace; different seed, different trace")
{
    auto line_dump = [](const RunOutput &o) {
        std::ostringstream s;
        write_trace(s, o.trace);
        return s.str();
    };
    auto a = line_dump(run_scenario(scenario("idle_paging", 5)));
    auto b = line_dump(run_scenario(scenario("idle_paging", 5)));
    auto c = line_dump(run_scenario(scenario("idle_paging", 6)));
    CHECK(a == b);
    CHECK(a != c);
}

TEST_CASE("trace round trip")
{
    auto out = run_scenario(scenario("honest_registration", 1));
    std::ostringstream s;
    write_trace(s, out.trace);
    std::istringstream in(s.str());
    auto back = read_trace(in);
    REQUIRE(back.size() == out.trace.size());
    std::ostringstream again;
    write_trace(again, back);
    CHECK(again.str() == s.str());
    CHECK(summarize(back) == out.summary);
}

TEST_CASE("empty scenario trace holds only broadcasts and bookkeeping")
{
    auto out = run_scenario(scenario("empty", 1));
    for (const auto &r : out.trace)
        CHECK_MESSAGE((r.kind == "ssb" || r.kind == "start" || r.kind == "engine_stats"), r.kind);
    CHECK(find(out, "engine", "start").size() == 1);
    CHECK(find(out, "engine", "engine_stats").size() == 1);
}

TEST_CASE("paging answered when the UE is idle")
{
    auto out = run_scenario(scenario("idle_paging", 2));
    CHECK(out.summary["paging"]["answered"].get<int>() >= 4);
    CHECK(out.summary["paging"]["missed"] == 0);
    CHECK(out.summary["paging"]["unreachable_intervals"].empty());
}

TEST_CASE("fake base station outcomes by mode")
{
    auto base = run_scenario(scenario("fake_bs_dos", 3));
    REQUIRE(base.summary["attacks"].size() == 1);
    const auto &a = base.summary["attacks"][0];
    CHECK(a["report_triggered"] == true);
    CHECK(a["handover_initiated"] == true);
    CHECK(a["pages_missed"].get<int>() > 0);
    CHECK(base.summary["paging"]["unreachable_intervals"].size() == 1);

    auto tss = run_scenario(scenario("fake_bs_dos", 3, Mode::Tss));
    const auto &t = tss.summary["attacks"][0];
    CHECK(t["report_triggered"] == true);
    CHECK(t["handover_initiated"] == false);
    CHECK(tss.summary["handovers"]["rejected"]["stale"].get<int>() > 0);

    auto guess = run_scenario(scenario("fake_bs_guess", 3, Mode::Tss));
    CHECK(guess.summary["attacks"][0]["handover_initiated"] == false);
    CHECK(guess.summary["handovers"]["rejected"]["wrong_tag"].get<int>() > 0);
}

TEST_CASE("man in the middle completes the fake handover in baseline")
{
    auto out = run_scenario(scenario("fake_bs_mim", 4));
    CHECK(out.summary["attacks"][0]["relay_established"] == true);
    CHECK(out.summary["messages"]["balanced"] == true);
    bool mirrored = false;
    for (const auto &r : out.trace)
        mirrored = mirrored || (r.kind == "mim_session" && r.payload["mirrored"] == true);
    CHECK(mirrored);
}

TEST_CASE("handover requests are mirrored only to the man in the middle")
{
    auto dos = run_scenario(scenario("fake_bs_dos", 4));
    for (const auto &r : dos.trace)
        CHECK(r.kind != "mim_mirror");
}

TEST_CASE("linkability classification")
{
    auto out = run_scenario(scenario("sqn_linkability", 8));
    const auto &a = out.summary["attacks"][0];
    CHECK(a["challenge_captured"] == true);
    CHECK(a["probes"].get<int>() == 4);
    CHECK(a["correct"] == a["probes"]);
}

TEST_CASE("identity exposure")
{
    auto on = run_scenario(scenario("honest_registration", 1));
    auto off = run_scenario(scenario("concealment_off", 1));
    std::vector<kh::Supi> supis{on.scenario.ues[0].supi};
    CHECK(count_cleartext_supi(on.trace, supis) == 0);
    CHECK(count_cleartext_supi(off.trace, supis) >= 1);
}

TEST_CASE("comparison table")
{
    std::vector<json> b, t;
    for (std::uint64_t seed : {1, 2})
    {
        b.push_back(run_scenario(scenario("ssb_spoof", seed, Mode::Baseline)).summary);
        t.push_back(run_scenario(scenario("ssb_spoof", seed, Mode::Tss)).summary);
    }
    auto cmp = compare_summaries(b, t);
    CHECK(cmp["seeds"] == 2);
    for (const auto &row : cmp["rows"])
        CHECK_MESSAGE(row["identical"] == true, row["metric"]);
    REQUIRE(cmp["notes"].size() == 1);
    CHECK(cmp["notes"][0]["flag"] == "identical_in_both_modes");
    CHECK(render_comparison(cmp).find("spoofer.camped_on_target.ue1") != std::string::npos);
}
