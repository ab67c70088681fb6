#include <doctest.h>

#include <nrsec/vectors.hpp>

#include <sstream>

using namespace nrsec::vectors;

TEST_CASE("seed file parsing")
{
    auto s = parse_seed_file("# comment\n1\n\n42 7  # trailing\n");
    REQUIRE(s.size() == 2);
    CHECK(s[0].seed == 1);
    CHECK(s[0].count == 1000);
    CHECK(s[1].seed == 42);
    CHECK(s[1].count == 7);
    CHECK_THROWS_AS(parse_seed_file("1 2 3\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_seed_file("x\n"), std::invalid_argument);
    CHECK_THROWS_AS(parse_seed_file("-4\n"), std::invalid_argument);
}

TEST_CASE("dump is deterministic per seed")
{
    auto dump = [](std::uint64_t seed) {
        std::ostringstream out;
        emit({{seed, 5}}, out);
        return out.str();
    };
    CHECK(dump(1) == dump(1));
    CHECK(dump(1) != dump(2));
}

TEST_CASE("vector self-consistency")
{
    for (std::size_t i = 0; i < 20; ++i)
    {
        auto v = make_vector(9, i);
        const auto &o = v["output"];
        CHECK(o["xres_star"] == o["res_star"]);
        CHECK(o["suci_roundtrip"] == true);
        CHECK(o["verify_fresh"] == "ok");
        CHECK(o["verify_replay"] == "sync_failure");
        CHECK(o["verify_tampered"] == "mac_failure");
        CHECK(o["tss_tag"].get<std::string>().size() == 2 * ((v["input"]["tag_bits"].get<unsigned>() + 7) / 8));
    }
}
