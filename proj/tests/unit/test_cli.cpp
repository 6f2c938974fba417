#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/wait.h>

#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "cvqkd/protocol.hpp"

namespace {

struct CmdResult {
    int code = -1;
    std::string out;
};

CmdResult run_cli(const std::string& args) {
    const std::string cmd = std::string(CVQKD_CLI_PATH) + " " + args + " 2>&1";
    FILE* pipe = popen(cmd.c_str(), "r");
    if (!pipe) return {};
    CmdResult r;
    char buf[4096];
    size_t n = 0;
    while ((n = fread(buf, 1, sizeof buf, pipe)) > 0) r.out.append(buf, n);
    const int status = pclose(pipe);
    r.code = WIFEXITED(status) ? WEXITSTATUS(status) : -1;
    return r;
}

std::vector<std::string> lines_of(const std::string& s) {
    std::vector<std::string> out;
    std::istringstream in(s);
    std::string line;
    while (std::getline(in, line)) out.push_back(line);
    return out;
}

std::vector<std::string> fields_of(const std::string& line) {
    // manual split so a trailing empty field (blank note column) still counts
    std::vector<std::string> out;
    std::size_t start = 0;
    while (true) {
        const std::size_t comma = line.find(',', start);
        if (comma == std::string::npos) {
            out.push_back(line.substr(start));
            break;
        }
        out.push_back(line.substr(start, comma - start));
        start = comma + 1;
    }
    return out;
}

const char* kHeader = "loss_db,e_b_1,e_p_1,R_1,e_b_2,e_p_2,R_2,R_total,note";

std::string write_config(const cvqkd::SessionConfig& cfg, const std::string& name) {
    const std::string path = "/tmp/" + name;
    std::ofstream out(path);
    out << nlohmann::json(cfg).dump(2) << '\n';
    return path;
}

cvqkd::SessionConfig shipped_config() {
    cvqkd::SessionConfig cfg;
    cfg.test_centers = {0.0, 0.6, -0.6};
    return cfg;
}

}  // namespace

TEST_CASE("version flag") {
    auto r = run_cli("--version");
    CHECK(r.code == 0);
    CHECK_FALSE(r.out.empty());
}

TEST_CASE("bare invocation demands a subcommand") {
    auto r = run_cli("");
    CHECK(r.code != 0);
}

TEST_CASE("rate table: default five rows under the benchmark attenuations") {
    auto r = run_cli("table");
    REQUIRE(r.code == 0);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 6);
    CHECK(rows[0] == kHeader);
    const char* losses[5] = {"0", "0.4", "0.7", "1", "1.4"};
    for (int i = 0; i < 5; ++i) {
        auto f = fields_of(rows[static_cast<size_t>(i + 1)]);
        REQUIRE(f.size() == 9);
        CHECK(f[0] == losses[i]);
        CHECK(std::stod(f[1]) > 0.0);  // computed slice-1 bit error
    }
    // without the correction the 0 dB row carries the inconsistency note
    auto zero = fields_of(rows[1]);
    CHECK(zero[8].find("inconsistent") != std::string::npos);
    // the deepest row has no published slice-1 phase error and no positive
    // slice-2 rate from the computed bit error
    auto deep = fields_of(rows[5]);
    CHECK(deep[2] == "-");
    CHECK(deep[3] == "-");
    CHECK(deep[6] == "-");
    CHECK(std::stod(deep[7]) == 0.0);
    CHECK(deep[8].find("no positive rate") != std::string::npos);
}

TEST_CASE("rate table: corrected column reproduces the benchmark total") {
    auto r = run_cli("table --corrected-ep1");
    REQUIRE(r.code == 0);
    auto rows = lines_of(r.out);
    REQUIRE(rows.size() == 6);
    auto zero = fields_of(rows[1]);
    REQUIRE(zero.size() == 9);
    CHECK(std::stod(zero[2]) == doctest::Approx(0.00533));
    const double total = std::stod(zero[7]);
    CHECK(std::abs(total - 1.69) <= 0.01);
    CHECK(zero[8].find("corrected") != std::string::npos);

    // byte-identical on rerun
    auto again = run_cli("table --corrected-ep1");
    CHECK(again.code == 0);
    CHECK(again.out == r.out);
}

TEST_CASE("rate table: edge cases") {
    auto header_only = run_cli("table --loss-db \"\"");
    CHECK(header_only.code == 0);
    auto rows = lines_of(header_only.out);
    REQUIRE(rows.size() == 1);
    CHECK(rows[0] == kHeader);

    auto unknown = run_cli("table --loss-db 2.2");
    CHECK(unknown.code == 1);
    CHECK(unknown.out.find("no published phase-error column") != std::string::npos);

    auto reserved = run_cli("table --ep-source simulated");
    CHECK(reserved.code == 1);
    CHECK(reserved.out.find("reserved") != std::string::npos);

    auto subset = run_cli("table --loss-db 0.4,0.7");
    CHECK(subset.code == 0);
    CHECK(lines_of(subset.out).size() == 3);
}

TEST_CASE("rates subcommand computes per-slice and total rates") {
    auto r = run_cli("rates --e-b 0.0311,0.0000401 --e-p 0.00533,0.0071");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("1.69067") != std::string::npos);

    auto j = run_cli("rates --json --e-b 0.0311,0.0000401 --e-p 0.00533,0.0071");
    REQUIRE(j.code == 0);
    auto parsed = nlohmann::json::parse(j.out);
    REQUIRE(parsed.at("per_slice").size() == 2);
    CHECK(parsed.at("total").get<double>() == doctest::Approx(1.6906722271848511).epsilon(1e-9));

    auto mismatched = run_cli("rates --e-b 0.1 --e-p 0.1,0.2");
    CHECK(mismatched.code == 1);
}

TEST_CASE("threshold subcommand prints the break-even point") {
    auto r = run_cli("threshold");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("0.110028") != std::string::npos);
    CHECK(r.out.find("2.1107") != std::string::npos);
    auto bad = run_cli("threshold --model cubic");
    CHECK(bad.code == 1);
}

TEST_CASE("probe design subcommand reports the solved grid") {
    auto r = run_cli("probe-design --cutoff 1 --seed 3");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("4") != std::string::npos);
    CHECK(r.out.find("condition") != std::string::npos);
}

TEST_CASE("estimate demo stays inside its stated band") {
    auto r = run_cli("estimate-demo --loss-db 1.0 --samples 20000 --seed 2");
    REQUIRE(r.code == 0);
    CHECK(r.out.find("within band") != std::string::npos);
}

TEST_CASE("simulate: honest, attacked, and malformed sessions") {
    auto cfg = shipped_config();
    cfg.seed = 1;
    const auto honest = write_config(cfg, "cvqkd_cli_honest.json");

    auto r = run_cli("simulate --config " + honest + " --report /tmp/cvqkd_cli_report.json" +
                     " --transcript /tmp/cvqkd_cli_transcript.ndjson");
    CHECK(r.code == 0);
    std::ifstream rep("/tmp/cvqkd_cli_report.json");
    REQUIRE(rep.good());
    nlohmann::json report = nlohmann::json::parse(rep);
    CHECK(report.at("verdict") == "key_ok");
    CHECK(report.at("key_agreement") == true);
    std::ifstream tran("/tmp/cvqkd_cli_transcript.ndjson");
    REQUIRE(tran.good());
    std::string first_line;
    std::getline(tran, first_line);
    auto msg = nlohmann::json::parse(first_line);
    CHECK(msg.at("kind") == "batch_sent");

    // seed override changes the report seed
    auto r2 = run_cli("simulate --config " + honest +
                      " --seed 4 --report /tmp/cvqkd_cli_report2.json");
    CHECK(r2.code == 0);
    std::ifstream rep2("/tmp/cvqkd_cli_report2.json");
    CHECK(nlohmann::json::parse(rep2).at("seed") == 4);

    auto attack = shipped_config();
    attack.channel = cvqkd::ChannelModel::intercept_resend();
    attack.seed = 7;
    const auto attacked = write_config(attack, "cvqkd_cli_attack.json");
    auto ra = run_cli("simulate --config " + attacked + " --report /tmp/cvqkd_cli_report3.json");
    CHECK(ra.code == 2);

    // malformed: unknown decode rule string
    nlohmann::json broken = nlohmann::json(shipped_config());
    broken["slices"]["rule"] = "nearest_boundary";
    {
        std::ofstream out("/tmp/cvqkd_cli_broken.json");
        out << broken.dump() << '\n';
    }
    auto rb = run_cli("simulate --config /tmp/cvqkd_cli_broken.json");
    CHECK(rb.code == 1);
    CHECK(rb.out.find("unknown decode rule") != std::string::npos);

    auto missing = run_cli("simulate");
    CHECK(missing.code != 0);
    auto nofile = run_cli("simulate --config /tmp/cvqkd_cli_absent.json");
    CHECK(nofile.code == 1);
}
