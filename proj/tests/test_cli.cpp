#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "twistframe/report.hpp"

#ifndef TF_CLI_PATH
#error "TF_CLI_PATH must point at the twistframe binary"
#endif

namespace {

int run_cli(const std::string& args) {
    const std::string cmd = std::string(TF_CLI_PATH) + " " + args + " >/dev/null 2>&1";
    const int status = std::system(cmd.c_str());
    if (status < 0) return -1;
    return WEXITSTATUS(status);
}

std::string slurp(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    REQUIRE(in.good());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

}  // namespace

TEST_CASE("usage errors exit with code 1") {
    CHECK(run_cli("frobnicate") == 1);
    CHECK(run_cli("reproduce example-9") == 1);
    CHECK(run_cli("") == 1);
}

TEST_CASE("weight command emits the documented CSV") {
    REQUIRE(run_cli("weight --phi unit-square --M 256 --out w.csv --out-dir /tmp/tfcli_w") == 0);
    std::ifstream csv("/tmp/tfcli_w/w.csv");
    REQUIRE(csv.good());
    std::string header;
    std::getline(csv, header);
    CHECK(header == "xi,w");
    int rows = 0;
    std::string line;
    while (std::getline(csv, line)) {
        const auto comma = line.find(',');
        REQUIRE(comma != std::string::npos);
        const double w = std::stod(line.substr(comma + 1));
        CHECK(std::abs(w - 1.0) <= 1e-2);
        ++rows;
    }
    CHECK(rows == 32);
}

TEST_CASE("refusal paths exit with code 2") {
    CHECK(run_cli("dual --phi comb --out-dir /tmp/tfcli_refuse") == 2);
    auto j = nlohmann::json::parse(slurp("/tmp/tfcli_refuse/report.json"));
    bool saw_refused = false;
    for (const auto& v : j["verdicts"]) {
        if (v["name"] == "canonical-dual") {
            CHECK(v["status"] == "refused");
            saw_refused = true;
        }
        if (v["name"] == "reciprocal-integrability") {
            CHECK(v["status"] == "divergent");
        }
    }
    CHECK(saw_refused);
}

TEST_CASE("dual of the rect generator passes biorthogonality") {
    REQUIRE(run_cli("dual --phi rect --out-dir /tmp/tfcli_dual") == 0);
    auto j = nlohmann::json::parse(slurp("/tmp/tfcli_dual/report.json"));
    double dev = 1.0;
    for (const auto& r : j["results"]) {
        if (r["name"] == "biorthogonality_deviation") dev = r["value"];
    }
    CHECK(dev <= 1e-2);
}

TEST_CASE("reproduce classifies example 1 and emits the residual") {
    REQUIRE(run_cli("reproduce example-1 --out-dir /tmp/tfcli_r1") == 0);
    auto j = nlohmann::json::parse(slurp("/tmp/tfcli_r1/report.json"));
    CHECK(j["verdicts"][0]["name"] == "condition-c");
    CHECK(j["verdicts"][0]["status"] == "satisfied");
    CHECK(j["results"][0]["value"].get<double>() <= 1e-10);
}

TEST_CASE("identical runs produce byte-identical reports") {
    REQUIRE(run_cli("reproduce example-2 --out-dir /tmp/tfcli_det") == 0);
    const std::string a = slurp("/tmp/tfcli_det/report.json");
    REQUIRE(run_cli("reproduce example-2 --out-dir /tmp/tfcli_det") == 0);
    const std::string b = slurp("/tmp/tfcli_det/report.json");
    CHECK(a == b);
    CHECK(a.find("\"seconds\": null") != std::string::npos);
}

TEST_CASE("an empty report serializes to valid JSON with empty arrays") {
    twistframe::cli::Report rep;
    rep.command = "noop";
    const auto j = rep.to_json();
    CHECK(j["results"].is_array());
    CHECK(j["results"].empty());
    CHECK(j["verdicts"].empty());
    CHECK(j["files"].empty());
    CHECK(j["seconds"].is_null());
    const auto reparsed = nlohmann::json::parse(j.dump(2));
    CHECK(reparsed["command"] == "noop");
}

TEST_CASE("kernel CSV and sidecar emitters") {
    using namespace twistframe;
    AxisGrid ax = make_grid(2.0, 4);
    auto f = sample_separable(
        {Factor1D::gaussian(kPi), Factor1D::gaussian(kPi)},
        phase_plane_spec(ax, ax));
    auto k = weyl::weyl_kernel(f, 1.0);
    cli::write_kernel_csv("/tmp/tfcli_kernel.csv", k);
    cli::write_kernel_sidecar("/tmp/tfcli_kernel.json", k);
    std::ifstream csv("/tmp/tfcli_kernel.csv");
    std::string header;
    std::getline(csv, header);
    CHECK(header == "xi,eta,re,im");
    auto j = nlohmann::json::parse(slurp("/tmp/tfcli_kernel.json"));
    CHECK(j["lambda"] == 1.0);
    CHECK(j["xi_grid"]["count"] == 16);
    CHECK(j["analytic_model"] == true);
}

TEST_CASE("config file values round-trip and flags override them") {
    {
        std::ofstream cfg("/tmp/tfcli_cfg.json");
        cfg << "{\"m_radius\": 128, \"l_max\": 3, \"out_dir\": \"/tmp/tfcli_cfgout\"}\n";
    }
    REQUIRE(run_cli("--config /tmp/tfcli_cfg.json condition-c --phi rect") == 0);
    auto j = nlohmann::json::parse(slurp("/tmp/tfcli_cfgout/report.json"));
    CHECK(j["config"]["m_radius"] == 128);
    CHECK(j["config"]["l_max"] == 3);

    REQUIRE(run_cli("--config /tmp/tfcli_cfg.json condition-c --phi rect --M 64 "
                    "--out-dir /tmp/tfcli_cfgout2") == 0);
    auto j2 = nlohmann::json::parse(slurp("/tmp/tfcli_cfgout2/report.json"));
    CHECK(j2["config"]["m_radius"] == 64);
}
