#include <doctest.h>

#include <nrsec/adversary.hpp>
#include <nrsec/network.hpp>
#include <nrsec/rng.hpp>

using namespace nrsec;

namespace
{

net::HandoverPolicy policy(sim::Mode mode)
{
    net::HandoverPolicy p;
    p.mode = mode;
    p.trigger_margin_db = 3;
    p.ncl = {102, 103};
    p.tss.enabled = mode == sim::Mode::Tss;
    p.tss.network_secret.v.fill(0x77);
    p.tss.slot_length = 10;
    p.tss.tag_bits = 64;
    return p;
}

radio::MeasurementReport report(std::uint16_t pci, double dbm)
{
    return radio::MeasurementReport{101, -80, {{pci, dbm, {}, "x"}}};
}

} // namespace

TEST_CASE("initial UE message routing")
{
    std::vector<sim::EntityId> reach{"amf1", "amf2"};
    auto r = net::forward_initial_ue_message(std::string("amf2"), reach, "amf1");
    CHECK(r.amf == "amf2");
    CHECK(r.previous);
    r = net::forward_initial_ue_message(std::string("amf9"), reach, "amf1");
    CHECK(r.amf == "amf1");
    CHECK_FALSE(r.previous);
    r = net::forward_initial_ue_message(std::nullopt, reach, "amf1");
    CHECK(r.amf == "amf1");
}

TEST_CASE("AMF registration decision")
{
    wire::RegistrationRequest req;
    CHECK(net::amf_handle_registration(req, "amf1", true, true) == net::RegistrationDecision::Authenticate);

    req.ksi = 2;
    req.guti = wire::Guti{"amf1", 77};
    CHECK(net::amf_handle_registration(req, "amf1", true, false) == net::RegistrationDecision::ReuseContext);
    CHECK(net::amf_handle_registration(req, "amf1", false, false) == net::RegistrationDecision::Authenticate);

    req.guti = wire::Guti{"amf2", 77};
    CHECK(net::amf_handle_registration(req, "amf1", false, true) == net::RegistrationDecision::ContextTransfer);
    CHECK(net::amf_handle_registration(req, "amf1", false, false) == net::RegistrationDecision::Authenticate);

    req.ksi = kh::kKsiNoContext;
    CHECK(net::amf_handle_registration(req, "amf1", true, true) == net::RegistrationDecision::Authenticate);
}

TEST_CASE("HXRES* gate")
{
    Rand128 rand;
    rand.v.fill(9);
    Res128 res;
    res.v.fill(4);
    auto h = kh::hash_response(res, rand);
    CHECK(net::hres_matches(res, rand, h));
    res.v[0] ^= 1;
    CHECK_FALSE(net::hres_matches(res, rand, h));
}

TEST_CASE("baseline handover decision")
{
    auto p = policy(sim::Mode::Baseline);
    auto plan = net::decide_handover(p, report(102, -70), true, 50);
    CHECK(plan.target_pci == 102);
    CHECK(plan.reason == "plan");
    CHECK_FALSE(plan.verdict);

    CHECK(net::decide_handover(p, report(102, -78), true, 50).reason == "no_trigger");
    CHECK(net::decide_handover(p, report(102, -70), false, 50).reason == "unprotected");
    CHECK(net::decide_handover(p, report(104, -70), true, 50).reason == "not_in_ncl");

    radio::MeasurementReport two{101, -80, {{103, -70, {}, "a"}, {102, -70, {}, "b"}}};
    CHECK(net::decide_handover(p, two, true, 50).target_pci == 102);
}

TEST_CASE("tss handover decision")
{
    auto p = policy(sim::Mode::Tss);
    auto r = report(102, -70);
    auto plan = net::decide_handover(p, r, true, 50);
    CHECK(plan.reason == "missing");
    CHECK(plan.verdict == tss::Verdict::Missing);

    r = tss::attach_observed_tag(r, tss::generate_tss(p.tss, 102, 5));
    plan = net::decide_handover(p, r, true, 50);
    CHECK(plan.target_pci == 102);
    CHECK(plan.verdict == tss::Verdict::Accept);

    plan = net::decide_handover(p, r, true, 70);
    CHECK(plan.reason == "stale");
}

TEST_CASE("SSB overlay construction")
{
    sim::AttackerSpec spec;
    spec.target_pci = 101;
    spec.overlay_cell_barred = true;
    auto f = adv::spoof_ssb(spec, 1030);
    CHECK(f.is_overlay);
    CHECK(f.mib.cell_barred);
    CHECK(f.mib.sfn == 6);
    CHECK(f.overlay_fields == std::set<radio::MibField>{radio::MibField::CellBarred});
    CHECK_FALSE(f.sib1);
    CHECK_NOTHROW(f.validate());

    spec.full_ssb = true;
    CHECK_FALSE(adv::spoof_ssb(spec, 0).is_overlay);
}

TEST_CASE("cell cloning and tag strategies")
{
    adv::ReconEntry cell;
    cell.sib1 = radio::Sib1{"00101", 1, 2, 632640, {}, true};
    cell.mib.cell_barred = true;
    tss::TssConfig params;
    params.tag_bits = 64;
    params.slot_length = 10;
    cell.tag = tss::TssTag{102, 0, Bytes(8, 0xab)};
    Rng rng(1, "t");

    auto replay = adv::clone_ssb(cell, 102, 95, sim::TagStrategy::Replay, params, rng);
    CHECK(replay.sib1 == cell.sib1);
    CHECK_FALSE(replay.mib.cell_barred);
    CHECK(replay.tss == cell.tag);

    auto guess = adv::clone_ssb(cell, 102, 95, sim::TagStrategy::Guess, params, rng);
    REQUIRE(guess.tss);
    CHECK(guess.tss->slot == 9);
    CHECK(guess.tss->tag.size() == 8);

    CHECK_FALSE(adv::clone_ssb(cell, 102, 95, sim::TagStrategy::None, params, rng).tss);

    cell.sib1.tss_announce = false;
    CHECK_FALSE(adv::clone_ssb(cell, 102, 95, sim::TagStrategy::Guess, params, rng).tss);
}

TEST_CASE("recon keeps the first sighting")
{
    adv::ReconMap map;
    radio::DecodedFrame d;
    d.frame.pci = 102;
    d.frame.sib1 = radio::Sib1{"00101", 1, 2, 632640, {}, true};
    d.frame.tss = tss::TssTag{102, 0, Bytes(8, 1)};
    d.power_dbm = -80;
    adv::update_recon(map, {d}, 0);
    d.frame.tss = tss::TssTag{102, 3, Bytes(8, 2)};
    d.power_dbm = -75;
    adv::update_recon(map, {d}, 30);
    REQUIRE(map.count(102));
    CHECK(map[102].first_seen == 0);
    CHECK(map[102].tag->slot == 0);
    CHECK(map[102].power_dbm == -75);
}

TEST_CASE("probe classification")
{
    CHECK(std::string(adv::classify_probe(wire::AuthFailureCause::SyncFailure)) == "victim");
    CHECK(std::string(adv::classify_probe(wire::AuthFailureCause::MacFailure)) == "not_victim");
}
