#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>

#include <nlohmann/json.hpp>

namespace {

struct Run {
    int status;
    std::string out;
};

// Runs the CLI with stderr discarded.
Run idsc(const std::string& args)
{
    const std::string cmd = std::string(IDSC_CLI_PATH) + " " + args + " 2>/dev/null";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {-1, ""};
    std::string out;
    std::array<char, 4096> buf{};
    std::size_t n;
    while ((n = std::fread(buf.data(), 1, buf.size(), pipe)) > 0) out.append(buf.data(), n);
    const int st = pclose(pipe);
    return {WIFEXITED(st) ? WEXITSTATUS(st) : -1, out};
}

bool has_line(const std::string& text, const std::string& line)
{
    return ("\n" + text).find("\n" + line + "\n") != std::string::npos;
}

std::filesystem::path scratch_dir()
{
    auto dir = std::filesystem::temp_directory_path() / ("idsc_cli_test_" + std::to_string(::getpid()));
    std::filesystem::create_directories(dir);
    return dir;
}

} // namespace

TEST(Cli, OverlapExample)
{
    auto r = idsc("overlap --q 2 --r 3 --psi const:1/4 --y zero");
    EXPECT_EQ(r.status, 0);
    EXPECT_TRUE(has_line(r.out, "q,r,ell,m,n,D,exact_overlap,addend1,addend2,M,trivial_rhs,window_count_ok"));
    EXPECT_TRUE(has_line(r.out, "2,3,1,1,6,3/2,1/12,1/24,1/12,1/24,7/48,true")) << r.out;
}

TEST(Cli, CounterexampleExample)
{
    auto r = idsc("counterexample --blocks 1 --eps 1/2 --verify");
    EXPECT_EQ(r.status, 0);
    EXPECT_TRUE(has_line(r.out, "1,2 3,6,1/2,1/3,3,true,1/3,1/3,true")) << r.out;
    EXPECT_TRUE(has_line(r.out, "# summary divergence_sum=5/12"));
}

TEST(Cli, ExitStatuses)
{
    EXPECT_EQ(idsc("measure --q 0").status, 2);
    EXPECT_EQ(idsc("measure --q 5 --no-such-flag").status, 2);
    EXPECT_EQ(idsc("frobnicate").status, 2);
    EXPECT_EQ(idsc("").status, 2);
    EXPECT_EQ(idsc("measure --q 5 --psi nope:1").status, 2);
    EXPECT_EQ(idsc("pairwise --Q 600").status, 3);
    EXPECT_EQ(idsc("counterexample --blocks 1 --eps 1/2 --max-pieces 1 --verify").status, 3);
    EXPECT_EQ(idsc("measure --help").status, 0);
    // psi > 1/2: arcs merge and the closed form is only an upper bound; not a failure.
    auto big = idsc("measure --q 3 --psi const:3/4");
    EXPECT_EQ(big.status, 0);
    EXPECT_TRUE(has_line(big.out, "3,3/4,0/1,5/6,1/1,false,5/6")) << big.out;
    EXPECT_TRUE(has_line(idsc("measure --q 5 --psi const:3/4").out, "5,3/4,0/1,9/10,6/5,false,9/10"));
}

TEST(Cli, OutputIsByteIdenticalAcrossRunsAndWorkers)
{
    const std::string base = "pairwise --Q 40 --m 3 --psi div:3 --y rnd:99,64 --ladder 16,32";
    auto a = idsc(base + " --workers 1");
    auto b = idsc(base + " --workers 1");
    auto c = idsc(base + " --workers 4");
    ASSERT_EQ(a.status, 0);
    EXPECT_EQ(a.out, b.out);
    // Only the echoed worker count differs.
    auto strip = [](std::string s) {
        const auto pos = s.find("# workers=");
        return s.erase(pos, s.find('\n', pos) - pos);
    };
    EXPECT_EQ(strip(a.out), strip(c.out));
    auto m1 = idsc("mc --q-lo 2 --q-hi 20 --m 2 --psi pow:1/2,1/2 --y rnd:3,17 --seed 9 --samples 20000");
    auto m3 = idsc("mc --q-lo 2 --q-hi 20 --m 2 --psi pow:1/2,1/2 --y rnd:3,17 --seed 9 --samples 20000 --workers 3");
    EXPECT_EQ(strip(m1.out), strip(m3.out));
}

TEST(Cli, EchoesResolvedConfig)
{
    auto r = idsc("mc --q-lo 1 --q-hi 6 --psi cx:1/2 --y cx:1/2 --exact --seed 7");
    EXPECT_EQ(r.status, 0);
    for (const char* line : {"# seed=7", "# samples=100000", "# grid=false", "# exact=true", "# psi=cx:1/2"})
        EXPECT_TRUE(has_line(r.out, line)) << line;
    EXPECT_NE(r.out.find("# fixture_version=1-"), std::string::npos);
    EXPECT_NE(r.out.find(",1/3,true\n"), std::string::npos) << r.out;
}

TEST(Cli, ConfigFileWithFlagPrecedence)
{
    const auto dir = scratch_dir();
    const auto cfg = dir / "run.cfg";
    std::ofstream(cfg) << "# comment\npsi = const:1/3\nQ=12\nm=2\n";
    auto r = idsc("pairwise --config " + cfg.string() + " --Q 8");
    EXPECT_EQ(r.status, 0);
    EXPECT_TRUE(has_line(r.out, "# Q=8"));
    EXPECT_TRUE(has_line(r.out, "# psi=const:1/3"));
    EXPECT_TRUE(has_line(r.out, "# m=2"));
    std::ofstream(dir / "bad.cfg") << "no_such_key=1\n";
    EXPECT_EQ(idsc("pairwise --config " + (dir / "bad.cfg").string()).status, 2);
    std::ofstream(dir / "garbage.cfg") << "just words\n";
    EXPECT_EQ(idsc("pairwise --config " + (dir / "garbage.cfg").string()).status, 2);
    std::filesystem::remove_all(dir);
}

TEST(Cli, JsonReportAndOutFile)
{
    const auto dir = scratch_dir();
    const auto out = dir / "m.json";
    auto r = idsc("measure --q 3 --q-max 5 --psi const:1/3 --y const:1/7 --format json --out " + out.string());
    EXPECT_EQ(r.status, 0);
    EXPECT_TRUE(r.out.empty());
    std::ifstream in(out);
    auto j = nlohmann::json::parse(in);
    EXPECT_EQ(j["command"], "measure");
    EXPECT_EQ(j["config"]["psi"], "const:1/3");
    ASSERT_EQ(j["rows"].size(), 3u);
    EXPECT_EQ(j["rows"][0][3], "4/9");
    EXPECT_EQ(j["rows"][2][3], "8/15");
    EXPECT_TRUE(j["ok"].get<bool>());
    std::filesystem::remove_all(dir);
}

TEST(Cli, CounterexampleSaveAndReload)
{
    const auto dir = scratch_dir();
    const auto inst = dir / "cx.json";
    ASSERT_EQ(idsc("counterexample --primes 2,3,5 --eps 1/2 --save " + inst.string()).status, 0);
    auto r = idsc("mc --q-lo 1 --q-hi 30 --psi cx:" + inst.string() + " --y cx:" + inst.string() + " --exact");
    EXPECT_EQ(r.status, 0);
    EXPECT_NE(r.out.find(",4/15,true\n"), std::string::npos) << r.out;
    std::filesystem::remove_all(dir);
}

TEST(Cli, OtherSubcommands)
{
    auto s = idsc("sift --X -7/2 --Y 100 --n 30");
    EXPECT_EQ(s.status, 0);
    EXPECT_TRUE(has_line(s.out, "-7/2,100/1,30,27,138/5,3/5,3,8/1,true")) << s.out;
    auto p = idsc("phigcd --q 6 --m 3");
    EXPECT_TRUE(has_line(p.out, "6,3,20,20,true"));
    auto m = idsc("msum --Q 16 --m 1 --psi const:1/4");
    EXPECT_NE(m.out.find("# summary M_sum=18934362833/2885762880"), std::string::npos) << m.out;
    auto e = idsc("equidist --q-lo 7 --q-hi 7 --psi const:1/7 --window 0,1/2");
    EXPECT_TRUE(has_line(e.out, "7,0/1;1/2,1/2,0/1")) << e.out;
}

TEST(Cli, VerifyMapsFailureToExitOne)
{
    auto ok = idsc("verify --suite 5");
    EXPECT_EQ(ok.status, 0);
    EXPECT_TRUE(has_line(ok.out, "criterion,name,ok,detail"));
    // A baseline far below the observed phi(gcd) maximum must fail suite 6.
    const auto dir = scratch_dir();
    std::ifstream in(IDSC_DEFAULT_FIXTURES);
    auto j = nlohmann::json::parse(in);
    j["phigcd"]["max_ratio"] = "1/1";
    j["phigcd"]["Q"] = 1000;
    std::ofstream(dir / "tight.json") << j.dump();
    auto bad = idsc("verify --suite 6 --fixtures " + (dir / "tight.json").string());
    EXPECT_EQ(bad.status, 1);
    EXPECT_TRUE(has_line(bad.out, "# ok=false"));
    EXPECT_EQ(idsc("verify --suite 10").status, 2);
    std::filesystem::remove_all(dir);
}
