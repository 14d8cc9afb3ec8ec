// fairhub: server entry point and operator commands.

#include "fairhub/gateway/api.hpp"
#include "fairhub/gateway/config.hpp"
#include "fairhub/pubreg/registry.hpp"

#include <CLI11.hpp>

#include <csignal>
#include <fstream>
#include <iostream>

using namespace fairhub;

namespace {

http::Server* running_server = nullptr;

void on_signal(int) {
    if (running_server) running_server->stop();
}

gateway::Config load_config(const std::string& data_dir) {
    auto c = gateway::config_from_process_env();
    if (!data_dir.empty()) c.data_dir = data_dir;
    return c;
}

std::unique_ptr<gateway::App> open_app(const gateway::Config& c) {
    return std::make_unique<gateway::App>(gateway::options_from_config(c));
}

pidreg::ObjectKind object_kind_arg(const std::string& text) {
    const auto k = pidreg::parse_object_kind(text);
    if (!k) throw Error(Errc::InvalidArgument, "unknown object kind " + text);
    return *k;
}

UserId user_arg(const core::Directory& d, const std::string& who) {
    if (const auto u = d.find_by_orcid(who)) return u->user_id;
    if (const auto u = d.find_user(UserId{who})) return u->user_id;
    throw Error(Errc::UnknownUser, "no user " + who);
}

} // namespace

int main(int argc, char** argv) {
    CLI::App cli{"fairhub research data portal"};
    cli.require_subcommand(1);
    std::string data_dir;
    cli.add_option("--data-dir", data_dir, "Overrides FAIRHUB_DATA_DIR");

    auto* serve = cli.add_subcommand("serve", "Run the HTTP gateway");

    auto* endpoint = cli.add_subcommand("pid-endpoint", "Configure PID service endpoints");
    endpoint->require_subcommand(1);
    pidreg::Endpoint new_endpoint;
    auto* ep_add = endpoint->add_subcommand("add", "Register an endpoint");
    ep_add->add_option("--name", new_endpoint.name)->required();
    ep_add->add_option("--base-url", new_endpoint.base_url, "Service URL, or \"embedded\"")->required();
    ep_add->add_option("--prefix", new_endpoint.prefix)->required();
    ep_add->add_option("--credentials", new_endpoint.credentials, "Bearer token for the service");
    auto* ep_list = endpoint->add_subcommand("list", "Show endpoints and assignments");
    std::string assign_kind;
    std::string assign_to;
    auto* ep_assign = endpoint->add_subcommand("assign", "Route PIDs of one object kind to an endpoint");
    ep_assign->add_option("kind", assign_kind)->required();
    ep_assign->add_option("endpoint", assign_to, "Endpoint name or base URL")->required();

    auto* group = cli.add_subcommand("group", "Manage research groups");
    group->require_subcommand(1);
    std::string group_name;
    std::string group_description;
    auto* group_create = group->add_subcommand("create", "Create a group");
    group_create->add_option("name", group_name)->required();
    group_create->add_option("--description", group_description);

    auto* user = cli.add_subcommand("user", "Manage user accounts");
    user->require_subcommand(1);
    std::string family;
    std::string given;
    std::string orcid;
    std::string password;
    std::string member_of;
    std::string role_name = "Member";
    auto* user_create = user->add_subcommand("create", "Create a user");
    user_create->add_option("--family", family)->required();
    user_create->add_option("--given", given)->required();
    user_create->add_option("--orcid", orcid)->required();
    user_create->add_option("--password", password)->required();
    user_create->add_option("--group", member_of, "Group name to join");
    user_create->add_option("--role", role_name, "Member, PrincipalInvestigator, FacilityStaff or Admin");
    std::string target_user;
    auto* user_deactivate = user->add_subcommand("deactivate", "Block a user from logging in");
    user_deactivate->add_option("user", target_user, "ORCID or user id")->required();

    auto* tan = cli.add_subcommand("tan-batch", "Pre-mint PIDs with one-time codes for labels");
    tan->require_subcommand(1);
    std::size_t tan_count = 0;
    std::string tan_kind = "Notebook";
    std::string tan_prefix;
    std::string tan_output;
    auto* tan_mint = tan->add_subcommand("mint", "Mint a batch and print the pid,tan manifest");
    tan_mint->add_option("count", tan_count)->required()->check(CLI::Range(1, 100000));
    tan_mint->add_option("--kind", tan_kind);
    tan_mint->add_option("--prefix", tan_prefix, "Defaults to the kind's assigned endpoint");
    tan_mint->add_option("--output", tan_output, "Write the CSV here instead of stdout");

    auto* tier = cli.add_subcommand("tier-migrate", "Move cold files to archive storage");
    tier->require_subcommand(1);
    pkgstore::TierPolicy policy;
    auto* tier_run = tier->add_subcommand("run", "Run one migration pass");
    tier_run->add_option("--hot-capacity", policy.hot_capacity_bytes, "Bytes allowed on the hot tier")->required();
    tier_run->add_option("--min-size", policy.min_candidate_size_bytes, "Smaller files stay hot");

    auto* fixture = cli.add_subcommand("fixture", "Capture upstream responses for replay");
    fixture->require_subcommand(1);
    std::vector<std::string> pmids;
    std::vector<std::string> dois;
    std::string europepmc_base = gateway::kEuropePmcBase;
    std::string datacite_base = gateway::kDataCiteBase;
    auto* fixture_record = fixture->add_subcommand("record", "Fetch records and store the exchanges");
    fixture_record->add_option("--pmid", pmids);
    fixture_record->add_option("--doi", dois);
    fixture_record->add_option("--europepmc-base", europepmc_base);
    fixture_record->add_option("--datacite-base", datacite_base);

    auto* mock = cli.add_subcommand("pid-mock", "Stand-alone Handle service mock");
    mock->require_subcommand(1);
    std::string mock_host = "127.0.0.1";
    int mock_port = 8000;
    auto* mock_serve = mock->add_subcommand("serve", "Serve the mock until interrupted");
    mock_serve->add_option("--host", mock_host);
    mock_serve->add_option("--port", mock_port);

    CLI11_PARSE(cli, argc, argv);

    try {
        const auto config = load_config(data_dir);

        if (*serve) {
            auto app = open_app(config);
            gateway::Api api(*app);
            http::Server server(api.handler());
            running_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "fairhub listening on " << config.listen_host << ":" << config.listen_port << "\n";
            server.run(config.listen_host, config.listen_port);
            app->save_state();
            return 0;
        }

        if (*mock_serve) {
            pidreg::HandleServiceMock handles;
            http::Server server(handles.handler());
            running_server = &server;
            std::signal(SIGINT, on_signal);
            std::signal(SIGTERM, on_signal);
            std::cerr << "handle mock listening on " << mock_host << ":" << mock_port << "\n";
            server.run(mock_host, mock_port);
            return 0;
        }

        if (*fixture_record) {
            if (pmids.empty() && dois.empty()) throw Error(Errc::InvalidArgument, "give --pmid or --doi");
            auto capture = [&](const std::string& base, const std::string& service, const std::string& target) {
                http::NetworkTransport net(base);
                http::Request r;
                r.target = target;
                r.headers["Accept"] = "application/json";
                const auto res = net.send(r);
                std::filesystem::create_directories(config.fixture_dir() / service);
                std::cout << http::save_fixture(config.fixture_dir() / service, {r, res}).string() << "\n";
            };
            for (const auto& p : pmids) capture(europepmc_base, "europepmc", pubreg::europepmc_target(p));
            for (const auto& d : dois) capture(datacite_base, "datacite", pubreg::datacite_target(d));
            return 0;
        }

        auto app = open_app(config);

        if (*ep_add) {
            app->pids.add_endpoint(new_endpoint);
        } else if (*ep_list) {
            const auto assigned = app->pids.assignments();
            for (const auto& e : app->pids.endpoints()) {
                std::cout << e.name << "\t" << e.prefix << "\t" << e.base_url;
                for (const auto& [kind, name] : assigned) {
                    if (name == e.name) std::cout << "\t" << pidreg::to_string(kind);
                }
                std::cout << "\n";
            }
            return 0;
        } else if (*ep_assign) {
            app->pids.assign(object_kind_arg(assign_kind), assign_to);
        } else if (*group_create) {
            std::cout << app->directory.create_group(group_name, group_description).group_id.str() << "\n";
        } else if (*user_create) {
            std::optional<GroupId> g;
            if (!member_of.empty()) {
                const auto found = app->directory.find_group_by_name(member_of);
                if (!found) throw Error(Errc::UnknownGroup, "no group named " + member_of);
                g = found->group_id;
            }
            const auto role = core::parse_role(role_name);
            if (!role) throw Error(Errc::InvalidArgument, "unknown role " + role_name);
            const auto u = app->directory.create_user(family, given, orcid, password);
            if (g) app->directory.set_membership(u.user_id, *g, *role);
            std::cout << u.user_id.str() << "\n";
        } else if (*user_deactivate) {
            app->directory.set_active(user_arg(app->directory, target_user), false);
        } else if (*tan_mint) {
            const auto kind = object_kind_arg(tan_kind);
            const auto prefix = tan_prefix.empty() ? app->pids.prefix_for(kind) : tan_prefix;
            const auto csv = pidreg::tan_manifest_csv(app->pids.mint_tan_batch(prefix, tan_count, kind));
            if (tan_output.empty()) {
                std::cout << csv;
            } else {
                std::ofstream(tan_output, std::ios::binary) << csv;
            }
        } else if (*tier_run) {
            const nlohmann::json report = app->store.migrate_tiers(policy);
            std::cout << report.dump(2) << "\n";
        }
        app->save_state();
        return 0;
    } catch (const Error& e) {
        std::cerr << "fairhub: " << to_string(e.code()) << ": " << e.what() << "\n";
        return 2;
    } catch (const std::exception& e) {
        std::cerr << "fairhub: " << e.what() << "\n";
        return 2;
    }
}
