// nrsim: run scenarios, compare baseline against tss, dump key-hierarchy vectors.

#include <nrsec/metrics.hpp>
#include <nrsec/scenario.hpp>
#include <nrsec/vectors.hpp>

#include <CLI11.hpp>

#include <charconv>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using nrsec::sim::json;

namespace
{

enum Exit : int
{
    Ok = 0,
    Usage = 2,
    Invalid = 3,
    Io = 4,
};

struct IoError : std::runtime_error
{
    using std::runtime_error::runtime_error;
};

struct SeedRange
{
    std::uint64_t first = 0;
    std::uint64_t last = 0;
};

std::uint64_t parse_u64(std::string_view s)
{
    std::uint64_t v = 0;
    auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || end != s.data() + s.size() || s.empty())
        throw CLI::ValidationError("seed", "not an unsigned integer: " + std::string(s));
    return v;
}

SeedRange parse_seeds(const std::string &text)
{
    const auto dots = text.find("..");
    if (dots == std::string::npos)
    {
        auto v = parse_u64(text);
        return {v, v};
    }
    SeedRange r{parse_u64(std::string_view(text).substr(0, dots)),
                parse_u64(std::string_view(text).substr(dots + 2))};
    if (r.last < r.first)
        throw CLI::ValidationError("seed", "empty seed range " + text);
    return r;
}

std::string read_file(const std::string &path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw IoError("cannot read " + path);
    std::stringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

void write_file(const fs::path &path, const std::string &text)
{
    std::ofstream out(path, std::ios::binary);
    out << text;
    out.close();
    if (!out)
        throw IoError("cannot write " + path.string());
}

// First of base, base.1, base.2, ... that does not exist yet.
fs::path fresh_dir(const fs::path &parent, const std::string &base)
{
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec)
        throw IoError("cannot create " + parent.string() + ": " + ec.message());
    for (unsigned n = 0;; ++n)
    {
        auto p = parent / (n ? base + "." + std::to_string(n) : base);
        if (fs::create_directory(p, ec))
            return p;
        if (ec)
            throw IoError("cannot create " + p.string() + ": " + ec.message());
    }
}

nrsec::sim::Scenario load(const std::string &path)
{
    return nrsec::sim::load_scenario(read_file(path));
}

json write_run(const fs::path &dir, nrsec::sim::Scenario s)
{
    auto out = nrsec::sim::run_scenario(std::move(s));
    write_file(dir / "scenario.yaml", nrsec::sim::normalized_yaml(out.scenario));
    std::ostringstream trace;
    nrsec::sim::write_trace(trace, out.trace);
    write_file(dir / "trace.jsonl", trace.str());
    write_file(dir / "summary.json", out.summary.dump(2) + "\n");
    return out.summary;
}

struct Options
{
    std::string scenario;
    std::string seeds;
    std::string mode;
    std::string out = ".";
    std::string seed_file;
    int verbose = 0;
};

int cmd_run(const Options &o)
{
    const auto range = parse_seeds(o.seeds);
    auto base = load(o.scenario);
    if (!o.mode.empty())
        base.mode = nrsec::sim::mode_from_string(o.mode);
    const auto stem = fs::path(o.scenario).stem().string();
    for (auto seed = range.first;; ++seed)
    {
        auto s = base;
        s.seed = seed;
        const auto dir = fresh_dir(o.out, stem + "_seed" + std::to_string(seed));
        const auto summary = write_run(dir, std::move(s));
        if (o.verbose)
            std::cerr << dir.string() << ": registrations " << summary["registrations"]["succeeded"]
                      << ", handovers " << summary["handovers"]["completed"] << '\n';
        std::cout << dir.string() << '\n';
        if (seed == range.last)
            break;
    }
    return Ok;
}

int cmd_compare(const Options &o)
{
    const auto range = parse_seeds(o.seeds);
    const auto base = load(o.scenario);
    const auto stem = fs::path(o.scenario).stem().string();
    const auto root = fresh_dir(o.out, stem + "_seeds" + std::to_string(range.first) + "-" +
                                           std::to_string(range.last) + "_compare");
    std::vector<json> baseline, tss;
    for (auto seed = range.first;; ++seed)
    {
        for (auto mode : {nrsec::sim::Mode::Baseline, nrsec::sim::Mode::Tss})
        {
            auto s = base;
            s.seed = seed;
            s.mode = mode;
            const auto dir = fresh_dir(root, stem + "_seed" + std::to_string(seed) + "_" + to_string(mode));
            auto summary = write_run(dir, std::move(s));
            (mode == nrsec::sim::Mode::Baseline ? baseline : tss).push_back(std::move(summary));
        }
        if (o.verbose)
            std::cerr << "seed " << seed << " done\n";
        if (seed == range.last)
            break;
    }
    const auto cmp = nrsec::sim::compare_summaries(baseline, tss);
    const auto table = nrsec::sim::render_comparison(cmp);
    write_file(root / "compare.json", cmp.dump(2) + "\n");
    write_file(root / "compare.txt", table);
    std::cout << table;
    return Ok;
}

int cmd_vectors(const Options &o)
{
    std::vector<nrsec::vectors::SeedLine> seeds;
    try
    {
        seeds = nrsec::vectors::parse_seed_file(read_file(o.seed_file));
    }
    catch (const std::invalid_argument &e)
    {
        throw IoError(e.what());
    }
    const auto dir = fresh_dir(o.out, "vectors_" + fs::path(o.seed_file).stem().string());
    std::ostringstream dump;
    nrsec::vectors::emit(seeds, dump);
    write_file(dir / "vectors.jsonl", dump.str());
    std::cout << (dir / "vectors.jsonl").string() << '\n';
    return Ok;
}

} // namespace

int main(int argc, char **argv)
{
    CLI::App app{"Simulate 5G access, handover and radio attacks; compare with the tag-based mitigation"};
    app.require_subcommand(1);
    Options o;

    auto *run = app.add_subcommand("run", "Run one scenario for a seed or seed range");
    run->add_option("--scenario", o.scenario, "Scenario YAML")->required();
    run->add_option("--seed", o.seeds, "Seed N or range N..M")->required();
    run->add_option("--mode", o.mode, "Override the scenario mode")->check(CLI::IsMember({"baseline", "tss"}));
    run->add_option("--out", o.out, "Output directory");
    run->add_flag("-v,--verbose", o.verbose, "Progress on stderr");

    auto *compare = app.add_subcommand("compare", "Run a seed range in both modes and tabulate the metrics");
    compare->add_option("--scenario", o.scenario, "Scenario YAML")->required();
    compare->add_option("--seeds", o.seeds, "Seed range N..M")->required();
    compare->add_option("--out", o.out, "Output directory");
    compare->add_flag("-v,--verbose", o.verbose, "Progress on stderr");

    auto *vectors = app.add_subcommand("vectors", "Dump key-hierarchy test vectors");
    vectors->add_option("--seed-file", o.seed_file, "Lines of '<seed> [count]'")->required();
    vectors->add_option("--out", o.out, "Output directory");

    try
    {
        app.parse(argc, argv);
    }
    catch (const CLI::ParseError &e)
    {
        return app.exit(e) == 0 ? Ok : Usage;
    }

    try
    {
        if (run->parsed())
            return cmd_run(o);
        if (compare->parsed())
            return cmd_compare(o);
        return cmd_vectors(o);
    }
    catch (const CLI::ValidationError &e)
    {
        std::cerr << "nrsim: " << e.what() << '\n';
        return Usage;
    }
    catch (const nrsec::sim::ScenarioError &e)
    {
        std::cerr << e.report();
        return Invalid;
    }
    catch (const IoError &e)
    {
        std::cerr << "nrsim: " << e.what() << '\n';
        return Io;
    }
    catch (const fs::filesystem_error &e)
    {
        std::cerr << "nrsim: " << e.what() << '\n';
        return Io;
    }
}
