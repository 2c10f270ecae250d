#include "dime/service/server.hpp"

#include <httplib.h>

namespace dime {
namespace {

void send_json(httplib::Response& res, int status, const nlohmann::json& body) {
    res.status = status;
    res.set_content(body.dump(), "application/json");
}

template <class Fn>
void guarded(httplib::Response& res, Fn&& fn) {
    try {
        fn();
    } catch (const NotFoundError& e) {
        send_json(res, 404, {{"error", e.what()}});
    } catch (const ConflictError& e) {
        send_json(res, 409, {{"error", e.what()}});
    } catch (const ParseError& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const ValidationError& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const nlohmann::json::exception& e) {
        send_json(res, 400, {{"error", e.what()}});
    } catch (const std::exception& e) {
        send_json(res, 500, {{"error", e.what()}});
    }
}

nlohmann::json parse_body(const httplib::Request& req) {
    try {
        return nlohmann::json::parse(req.body);
    } catch (const nlohmann::json::parse_error& e) {
        throw ParseError(std::string("request body: ") + e.what());
    }
}

}  // namespace

void mount_session_api(httplib::Server& server, SessionStore& store) {
    server.set_default_headers({{"Access-Control-Allow-Origin", "*"}});
    server.Options(R"(/sessions.*)", [](const httplib::Request&, httplib::Response& res) {
        res.set_header("Access-Control-Allow-Methods", "GET, POST, OPTIONS");
        res.set_header("Access-Control-Allow-Headers", "Content-Type");
        res.status = 204;
    });
    server.Post("/sessions", [&store](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 201, {{"id", store.create(parse_body(req))}}); });
    });
    server.Get("/sessions", [&store](const httplib::Request&, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, {{"sessions", store.ids()}}); });
    });
    server.Get(R"(/sessions/([0-9A-Za-z_-]+))", [&store](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, store.state(req.matches[1])); });
    });
    server.Get(R"(/sessions/([0-9A-Za-z_-]+)/recommendation)",
               [&store](const httplib::Request& req, httplib::Response& res) {
                   guarded(res, [&] { send_json(res, 200, store.recommendation(req.matches[1])); });
               });
    server.Post(R"(/sessions/([0-9A-Za-z_-]+)/observation)",
                [&store](const httplib::Request& req, httplib::Response& res) {
                    guarded(res, [&] { send_json(res, 200, store.observe(req.matches[1], parse_body(req))); });
                });
    server.Get(R"(/sessions/([0-9A-Za-z_-]+)/export)", [&store](const httplib::Request& req, httplib::Response& res) {
        guarded(res, [&] { send_json(res, 200, store.export_record(req.matches[1])); });
    });
}

}  // namespace dime
