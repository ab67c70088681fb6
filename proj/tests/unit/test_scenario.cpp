#include <doctest.h>

#include <nrsec/scenario.hpp>

using namespace nrsec::sim;

namespace
{

const char *kMinimal = R"(
name: t
amfs: [{id: amf1}]
gnbs: [{id: gnb1, pci: 101, freq: 632628, tac: 1}]
ues: [{id: ue1, supi: {plmn: "00101", msin: "0000000001"}}]
radio:
  links: [{tx: gnb1, rx: ue1, dbm: -70}]
)";

std::vector<std::string> issue_paths(const std::string &text)
{
    try
    {
        load_scenario(text);
    }
    catch (const ScenarioError &e)
    {
        std::vector<std::string> out;
        for (const auto &i : e.issues())
            out.push_back(i.path);
        return out;
    }
    return {};
}

bool has(const std::vector<std::string> &v, const std::string &s)
{
    return std::find(v.begin(), v.end(), s) != v.end();
}

} // namespace

TEST_CASE("minimal scenario loads with defaults")
{
    auto s = load_scenario(kMinimal);
    CHECK(s.name == "t");
    CHECK(s.mode == Mode::Baseline);
    CHECK(s.concealment);
    REQUIRE(s.gnbs.size() == 1);
    CHECK(s.gnbs[0].amfs == std::vector<EntityId>{"amf1"});
    CHECK(s.amfs[0].is_default);
}

TEST_CASE("normalized form reloads to the same normalized form")
{
    auto s = load_scenario(kMinimal);
    auto once = normalized_yaml(s);
    CHECK(normalized_yaml(load_scenario(once)) == once);
}

TEST_CASE("provisioning is seed-determined")
{
    auto a = load_scenario(kMinimal);
    auto b = a;
    provision(a);
    provision(b);
    CHECK(a.ues[0].k == b.ues[0].k);
    auto c = load_scenario(kMinimal);
    c.seed = 2;
    provision(c);
    CHECK(a.ues[0].k != c.ues[0].k);
}

TEST_CASE("validation reports every problem with its path")
{
    auto paths = issue_paths(R"(
name: bad
amfs: [{id: amf1}]
gnbs:
  - {id: gnb1, pci: 2000, freq: 1, tac: 1}
  - {id: gnb1, pci: 102, freq: 1, tac: 1, ncl: [999]}
ues: [{id: ue1, supi: {plmn: "0010", msin: "12ab"}}]
bogus: 1
)");
    CHECK(paths.size() >= 4);
    CHECK(has(paths, "gnbs[0].pci"));
    CHECK(has(paths, "bogus"));
}

TEST_CASE("structural errors")
{
    CHECK_FALSE(issue_paths("amfs: [").empty());
    CHECK_FALSE(issue_paths("name: x\n").empty());
    CHECK_FALSE(issue_paths(std::string(kMinimal) + "max_ticks: 0\n").empty());
    CHECK_FALSE(issue_paths(std::string(kMinimal) + "mode: strict\n").empty());
    CHECK_FALSE(issue_paths(std::string(kMinimal) + "tss: {tag_bits: 8}\n").empty());
    CHECK_FALSE(issue_paths(std::string(kMinimal) + "attackers: [{id: a, mode: fake_bs_handover, target_pci: 101}]\n")
                    .empty());
    CHECK_FALSE(issue_paths(std::string(kMinimal) + "attackers: [{id: a, mode: ssb_spoof, target_pci: 101}]\n").empty());
    CHECK_FALSE(issue_paths(std::string(kMinimal) + "paging: [{ue: nobody, amf: amf1, at: 5}]\n").empty());
}

TEST_CASE("an entity-only scenario is valid")
{
    CHECK(issue_paths("name: e\namfs: [{id: amf1}]\ngnbs: [{id: gnb1, pci: 1, freq: 1, tac: 1}]\n").empty());
}
