#include "access_world.hpp"

#include "fairhub/pidreg/handle_protocol.hpp"
#include "fairhub/util/crypto.hpp"
#include "fairhub/util/http.hpp"
#include "fairhub/util/text.hpp"

#include <gtest/gtest.h>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <set>
#include <sstream>
#include <sys/wait.h>

using namespace fairhub;

namespace {

struct CliRun {
    int status = -1;
    std::string out;
};

class CliTest : public ::testing::Test {
protected:
    std::filesystem::path dir = std::filesystem::temp_directory_path() /
                                ("fairhub-cli-" + crypto::random_string(10, "abcdefghijklmnopqrstuvwxyz"));

    void TearDown() override { std::filesystem::remove_all(dir); }

    CliRun run(const std::string& args) {
        const std::string cmd = std::string(FAIRHUB_CLI) + " --data-dir " + dir.string() + " " + args + " 2>/dev/null";
        CliRun r;
        FILE* p = ::popen(cmd.c_str(), "r");
        char buf[4096];
        std::size_t n = 0;
        while ((n = std::fread(buf, 1, sizeof buf, p)) > 0) r.out.append(buf, n);
        const int raw = ::pclose(p);
        r.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
        return r;
    }
};

std::vector<std::string> lines(const std::string& s) {
    std::vector<std::string> out;
    for (auto& l : text::split(s, "\n")) {
        if (!l.empty() && l.back() == '\r') l.pop_back();
        if (!l.empty()) out.push_back(l);
    }
    return out;
}

} // namespace

TEST_F(CliTest, UsageErrorsExitNonZero) {
    EXPECT_NE(run("").status, 0);
    EXPECT_NE(run("frobnicate").status, 0);
    EXPECT_NE(run("tan-batch mint").status, 0);
    EXPECT_NE(run("tan-batch mint 0").status, 0);
    EXPECT_NE(run("pid-endpoint assign NoSuchKind embedded").status, 0);
}

TEST_F(CliTest, TanBatchPrintsManifest) {
    const auto r = run("tan-batch mint 10");
    ASSERT_EQ(r.status, 0);
    const auto rows = lines(r.out);
    ASSERT_EQ(rows.size(), 11u);
    EXPECT_EQ(rows[0], "pid,tan");
    std::set<std::string> pids;
    for (std::size_t i = 1; i < rows.size(); ++i) {
        const auto cells = text::split(rows[i], ",");
        ASSERT_EQ(cells.size(), 2u);
        EXPECT_EQ(cells[0].rfind("21.11124/", 0), 0u);
        EXPECT_FALSE(cells[1].empty());
        pids.insert(cells[0]);
    }
    EXPECT_EQ(pids.size(), 10u);
    // The batch survives in the state file.
    std::ifstream in(dir / "state.json");
    std::stringstream ss;
    ss << in.rdbuf();
    for (const auto& p : pids) EXPECT_NE(ss.str().find(p.substr(9)), std::string::npos);
}

TEST_F(CliTest, AssignedEndpointReceivesNotebookPids) {
    pidreg::HandleServiceMock remote;
    http::Server server(remote.handler());
    const int port = server.start("127.0.0.1", 0);
    const std::string url = "http://127.0.0.1:" + std::to_string(port);

    ASSERT_EQ(run("pid-endpoint add --name remote --base-url " + url + " --prefix 21.99999").status, 0);
    ASSERT_EQ(run("pid-endpoint assign Notebook remote").status, 0);
    const auto listing = run("pid-endpoint list");
    EXPECT_NE(listing.out.find("remote\t21.99999\t" + url + "\tNotebook"), std::string::npos) << listing.out;

    const auto notebooks = lines(run("tan-batch mint 3 --kind Notebook").out);
    ASSERT_EQ(notebooks.size(), 4u);
    for (std::size_t i = 1; i < notebooks.size(); ++i) {
        const auto handle = text::split(notebooks[i], ",")[0];
        ASSERT_EQ(handle.rfind("21.99999/", 0), 0u);
        http::LoopbackTransport probe(remote.handler());
        http::Request get;
        get.target = "/handles/" + handle;
        EXPECT_EQ(probe.send(get).status, 200);
    }
    const auto antibodies = lines(run("tan-batch mint 2 --kind Antibody").out);
    ASSERT_EQ(antibodies.size(), 3u);
    EXPECT_EQ(antibodies[1].rfind("21.11124/", 0), 0u);
    server.stop();
}

TEST_F(CliTest, UsersAndGroups) {
    ASSERT_EQ(run("group create 'Cardiology Lab'").status, 0);
    const auto orcid = testkit::make_orcid(777);
    const auto created = run("user create --family Keller --given Anna --orcid " + orcid +
                             " --password s3cret --group 'Cardiology Lab' --role PrincipalInvestigator");
    ASSERT_EQ(created.status, 0);
    EXPECT_FALSE(lines(created.out).empty());
    EXPECT_NE(run("user create --family X --given Y --orcid " + orcid + " --password p").status, 0);
    EXPECT_EQ(run("user deactivate " + orcid).status, 0);
    EXPECT_NE(run("user deactivate 0000-0000-0000-0000").status, 0);
}
