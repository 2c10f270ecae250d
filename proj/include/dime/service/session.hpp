#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dime/core/error.hpp"
#include "dime/harness/planners.hpp"

namespace dime {

class NotFoundError : public Error {
public:
    using Error::Error;
};

// Request is valid but not in the session's current status.
class ConflictError : public Error {
public:
    using Error::Error;
};

enum class SessionStatus { awaiting_recommendation, awaiting_observation, complete };
const char* status_name(SessionStatus s);

struct SessionConfig {
    int k = 1;
    int rounds = 1;
    int steps = 1;
    PlannerSpec planner;
    std::uint64_t seed = 0;
    int particles = kDefaultParticles;
    bool attendees_only = true;  // only attendees count as influenced

    static SessionConfig from_json(const nlohmann::json& j, const PlannerSpec& default_planner);
    nlohmann::json to_json() const;
};

struct Recommendation {
    Action action;
    std::vector<EdgeId> observe;   // Theta(action): edges whose bits the operator must report
    double expected_spread = 0.0;  // belief mean after the action and L cascade rounds
    nlohmann::json rationale = nlohmann::json::object();
};

// Persistent planning sessions. Each session has its own lock; different
// sessions proceed in parallel. With a data directory every mutation is
// appended to <dir>/<id>.jsonl and sessions are rebuilt from those logs.
class SessionStore {
public:
    struct Options {
        std::optional<std::filesystem::path> data_dir;
        PlannerSpec default_planner = planner_spec_from_name("heal");
    };

    SessionStore();
    explicit SessionStore(Options opts);
    ~SessionStore();

    // Returns the new session id. Body: {"network": {...}, "config": {...}}.
    std::string create(const nlohmann::json& body);
    nlohmann::json state(const std::string& id) const;
    // Computes (first call) or replays the cached recommendation.
    nlohmann::json recommendation(const std::string& id);
    // Body: {"observations": [{"edge": id, "present": bool}, ...], "attended": [...]}.
    nlohmann::json observe(const std::string& id, const nlohmann::json& body);
    nlohmann::json export_record(const std::string& id) const;

    std::vector<std::string> ids() const;

private:
    struct Session;
    std::shared_ptr<Session> find(const std::string& id) const;
    void append(const Session& s, const nlohmann::json& event) const;
    void replay(const std::filesystem::path& log);

    Options opts_;
    mutable std::mutex mu_;
    std::map<std::string, std::shared_ptr<Session>> sessions_;
};

}  // namespace dime
