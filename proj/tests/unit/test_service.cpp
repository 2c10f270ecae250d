#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <thread>

#include <httplib.h>

#include "dime/service/server.hpp"
#include "dime/service/session.hpp"

using namespace dime;
using nlohmann::json;

namespace {

json fig1_json() {
    std::ifstream in(std::filesystem::path(DIME_DATA_DIR) / "fig1.json");
    return json::parse(in);
}

json create_body(const std::string& planner = "dc", int k = 2, int rounds = 2) {
    return {{"network", fig1_json()},
            {"config", {{"K", k}, {"T", rounds}, {"L", 1}, {"planner", planner}, {"seed", 42}, {"particles", 32}}}};
}

// Reports every requested edge as present.
json all_present(const json& rec) {
    json obs = json::array();
    for (const auto& e : rec.at("observe_edges")) obs.push_back({{"edge", e}, {"present", true}});
    return {{"observations", obs}};
}

struct TempDir {
    std::filesystem::path path;
    TempDir() {
        path = std::filesystem::temp_directory_path() /
               ("dime-test-" + std::to_string(std::hash<std::thread::id>{}(std::this_thread::get_id())) + "-" +
                std::to_string(reinterpret_cast<std::uintptr_t>(this)));
        std::filesystem::remove_all(path);
    }
    ~TempDir() { std::filesystem::remove_all(path); }
};

}  // namespace

TEST_CASE("session lifecycle") {
    SessionStore store;
    const auto id = store.create(create_body());
    auto st = store.state(id);
    CHECK(st.at("status") == "awaiting_recommendation");
    CHECK(st.at("network").at("nodes").size() == 6);
    CHECK(st.at("uncertain_edges") == 4);
    CHECK(st.at("resolved_edges") == 0);

    CHECK_THROWS_AS(store.observe(id, {{"observations", json::array()}}), ConflictError);
    const auto rec = store.recommendation(id);
    CHECK(rec.at("action") == json::array({0, 1}));
    CHECK(rec.at("observe_edges") == json::array({1, 4}));
    CHECK(store.recommendation(id) == rec);
    CHECK(store.state(id).at("status") == "awaiting_observation");

    // Must cover exactly the observable edges.
    CHECK_THROWS_AS(store.observe(id, {{"observations", {{{"edge", 1}, {"present", true}}}}}), ValidationError);
    CHECK_THROWS_AS(store.observe(id, {{"observations",
                                        {{{"edge", 1}, {"present", true}},
                                         {{"edge", 4}, {"present", false}},
                                         {{"edge", 5}, {"present", true}}}}}),
                    ValidationError);
    CHECK_THROWS_AS(store.observe(id, {{"observations", {{{"edge", 1}, {"present", 1}}, {{"edge", 4}, {"present", true}}}}}),
                    ValidationError);
    json partial = {{"observations", {{{"edge", 1}, {"present", true}}, {{"edge", 4}, {"present", false}}}},
                    {"attended", {1}}};
    CHECK_THROWS_AS(store.observe(id, json{{"observations", partial["observations"]}, {"attended", {3}}}),
                    ValidationError);
    const auto next = store.observe(id, partial);
    CHECK(next.at("status") == "awaiting_recommendation");
    CHECK(next.at("round") == 2);

    st = store.state(id);
    CHECK(st.at("resolved_edges") == 2);
    CHECK(st.at("network").at("nodes")[0].at("chosen") == false);  // no-show
    CHECK(st.at("network").at("nodes")[1].at("chosen") == true);
    for (const auto& e : st.at("network").at("edges")) {
        if (e.at("id") == 1) CHECK(e.at("observed") == true);
        if (e.at("id") == 4) CHECK(e.at("observed") == false);
        if (e.at("id") == 5) CHECK(e.at("observed").is_null());
    }

    const auto rec2 = store.recommendation(id);
    for (const auto& v : rec2.at("action")) CHECK(v != 1);
    const auto done = store.observe(id, all_present(rec2));
    CHECK(done.at("status") == "complete");
    CHECK_THROWS_AS(store.recommendation(id), ConflictError);

    const auto ex = store.export_record(id);
    CHECK(ex.at("rounds").size() == 2);
    CHECK(ex.at("true_f").empty());
    CHECK(ex.at("rounds")[0].at("hidden_w") == json::array({1}));
    CHECK(ex.at("status") == "complete");

    CHECK_THROWS_AS(store.state("missing"), NotFoundError);
    CHECK_THROWS_AS(store.create(json{{"config", json::object()}}), ValidationError);
    CHECK_THROWS_AS(store.create(create_body("dc", 7)), ValidationError);
}

TEST_CASE("a conflicting bit for an already observed edge is rejected") {
    SessionStore store;
    // K = 1 over three rounds with DC: round 1 picks A, so A's edge is known
    // when A is recommended again after a no-show.
    const auto id = store.create(create_body("dc", 1, 3));
    const auto rec = store.recommendation(id);
    REQUIRE(rec.at("action") == json::array({0}));
    store.observe(id, {{"observations", {{{"edge", 1}, {"present", true}}}}, {"attended", json::array()}});
    const auto again = store.recommendation(id);
    REQUIRE(again.at("action") == json::array({0}));
    CHECK_THROWS_AS(store.observe(id, {{"observations", {{{"edge", 1}, {"present", false}}}}}), ValidationError);
    CHECK(store.observe(id, {{"observations", {{{"edge", 1}, {"present", true}}}}}).at("round") == 3);
}

TEST_CASE("sessions are rebuilt from their logs") {
    TempDir dir;
    std::string id;
    json state_before, export_before;
    {
        SessionStore store(SessionStore::Options{dir.path, planner_spec_from_name("heal")});
        json body = create_body("heal");
        id = store.create(body);
        store.observe(id, all_present(store.recommendation(id)));
        store.recommendation(id);
        state_before = store.state(id);
        export_before = store.export_record(id);
    }
    SessionStore reloaded(SessionStore::Options{dir.path, planner_spec_from_name("heal")});
    CHECK(reloaded.ids() == std::vector<std::string>{id});
    CHECK(reloaded.state(id) == state_before);
    CHECK(reloaded.export_record(id) == export_before);

    // A tampered action must not replay silently.
    const auto log = dir.path / (id + ".jsonl");
    std::ifstream in(log);
    std::string text((std::istreambuf_iterator<char>(in)), {});
    in.close();
    std::vector<std::string> lines;
    std::istringstream ss(text);
    for (std::string l; std::getline(ss, l);) lines.push_back(l);
    auto ev = json::parse(lines[1]);
    REQUIRE(ev.at("event") == "recommendation");
    ev["action"] = json::array({4, 5});
    lines[1] = ev.dump();
    std::ofstream out(log);
    for (const auto& l : lines) out << l << '\n';
    out.close();
    CHECK_THROWS_AS(SessionStore(SessionStore::Options{dir.path, planner_spec_from_name("heal")}), StateError);
}

TEST_CASE("HTTP API") {
    SessionStore store;
    httplib::Server server;
    mount_session_api(server, store);
    const int port = server.bind_to_any_port("127.0.0.1");
    REQUIRE(port > 0);
    std::thread th([&] { server.listen_after_bind(); });
    server.wait_until_ready();
    httplib::Client cli("127.0.0.1", port);

    auto created = cli.Post("/sessions", create_body().dump(), "application/json");
    REQUIRE(created);
    CHECK(created->status == 201);
    CHECK(created->get_header_value("Access-Control-Allow-Origin") == "*");
    const std::string id = json::parse(created->body).at("id");

    auto list = cli.Get("/sessions");
    CHECK(json::parse(list->body).at("sessions") == json::array({id}));
    auto snap = cli.Get("/sessions/" + id);
    CHECK(snap->status == 200);
    CHECK(json::parse(snap->body).at("status") == "awaiting_recommendation");

    auto early = cli.Post("/sessions/" + id + "/observation", R"({"observations": []})", "application/json");
    CHECK(early->status == 409);
    auto rec = cli.Get("/sessions/" + id + "/recommendation");
    CHECK(rec->status == 200);
    const auto rj = json::parse(rec->body);
    auto bad = cli.Post("/sessions/" + id + "/observation", "{nope", "application/json");
    CHECK(bad->status == 400);
    auto incomplete = cli.Post("/sessions/" + id + "/observation", R"({"observations": []})", "application/json");
    CHECK(incomplete->status == 400);
    auto ok = cli.Post("/sessions/" + id + "/observation", all_present(rj).dump(), "application/json");
    CHECK(ok->status == 200);
    CHECK(json::parse(ok->body).at("round") == 2);
    auto ex = cli.Get("/sessions/" + id + "/export");
    CHECK(ex->status == 200);
    CHECK(json::parse(ex->body).at("rounds").size() == 1);

    CHECK(cli.Get("/sessions/nope")->status == 404);
    CHECK(cli.Get("/sessions/nope/recommendation")->status == 404);
    CHECK(cli.Post("/sessions", R"({"network": {"nodes": -1}})", "application/json")->status == 400);
    auto pre = cli.Options("/sessions");
    CHECK(pre->status == 204);

    server.stop();
    th.join();
}
