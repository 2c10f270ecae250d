#include "dime/service/session.hpp"

#include <algorithm>
#include <chrono>
#include <fstream>
#include <random>
#include <set>

#include <fmt/chrono.h>
#include <fmt/format.h>

#include "dime/netcore/network_io.hpp"

namespace dime {
namespace {

std::string now_iso() {
    const auto now = std::chrono::system_clock::now();
    const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
    return fmt::format("{:%Y-%m-%dT%H:%M:%S}.{:03d}Z", fmt::gmtime(std::chrono::system_clock::to_time_t(now)), ms);
}

std::string new_id() {
    static std::mutex mu;
    static std::mt19937_64 gen{std::random_device{}()};
    std::lock_guard lock(mu);
    return fmt::format("{:016x}", gen());
}

nlohmann::json obs_json(const Observation& o) {
    nlohmann::json j = nlohmann::json::array();
    for (const ObservedEdge& e : o.entries) j.push_back({{"edge", e.edge}, {"present", e.bit != 0}});
    return j;
}

}  // namespace

const char* status_name(SessionStatus s) {
    switch (s) {
        case SessionStatus::awaiting_recommendation:
            return "awaiting_recommendation";
        case SessionStatus::awaiting_observation:
            return "awaiting_observation";
        case SessionStatus::complete:
            return "complete";
    }
    return "?";
}

SessionConfig SessionConfig::from_json(const nlohmann::json& j, const PlannerSpec& default_planner) {
    SessionConfig c;
    c.planner = default_planner;
    try {
        c.k = j.value("K", c.k);
        c.rounds = j.value("T", c.rounds);
        c.steps = j.value("L", c.steps);
        if (j.contains("planner")) c.planner = parse_planner_spec(j.at("planner"));
        if (j.contains("seed")) {
            c.seed = j.at("seed").get<std::uint64_t>();
        } else {
            c.seed = std::random_device{}();
            c.seed = c.seed << 32 | std::random_device{}();
        }
        c.particles = j.value("particles", c.particles);
        c.attendees_only = j.value("attendees_only", c.attendees_only);
    } catch (const nlohmann::json::exception& e) {
        throw ValidationError(fmt::format("session config: {}", e.what()));
    }
    if (c.k < 1) throw ValidationError("session config: K must be >= 1");
    if (c.rounds < 1) throw ValidationError("session config: T must be >= 1");
    if (c.steps < 0) throw ValidationError("session config: L must be >= 0");
    if (c.particles < 1) throw ValidationError("session config: particles must be >= 1");
    return c;
}

nlohmann::json SessionConfig::to_json() const {
    return {{"K", k},
            {"T", rounds},
            {"L", steps},
            {"planner", dime::to_json(planner)},
            {"seed", seed},
            {"particles", particles},
            {"attendees_only", attendees_only}};
}

struct SessionStore::Session {
    struct Entry {
        int round = 0;
        Action action;
        std::vector<NodeId> attended;
        Observation obs;
        std::string ts;
    };

    mutable std::mutex mu;
    std::string id;
    std::string created;
    nlohmann::json network_json;
    UncertainNetwork net;
    SessionConfig cfg;
    Belief belief;
    int round = 1;
    SessionStatus status = SessionStatus::awaiting_recommendation;
    std::optional<Recommendation> rec;
    std::vector<Entry> history;

    nlohmann::json rec_json() const {
        return {{"round", round},
                {"action", rec->action.nodes()},
                {"observe_edges", rec->observe},
                {"expected_spread", rec->expected_spread},
                {"rationale", rec->rationale}};
    }

    void apply_observation(const nlohmann::json& body, const std::string& ts) {
        if (status != SessionStatus::awaiting_observation) {
            throw ConflictError(fmt::format("session {} is {}, not awaiting an observation", id, status_name(status)));
        }
        const Action& a = rec->action;
        if (!body.is_object() || !body.contains("observations") || !body.at("observations").is_array()) {
            throw ValidationError("observation body needs an \"observations\" list");
        }
        std::map<EdgeId, std::uint8_t> bits;
        for (const auto& e : body.at("observations")) {
            if (!e.is_object() || !e.contains("edge") || !e.contains("present") || !e.at("present").is_boolean() ||
                !e.at("edge").is_number_integer()) {
                throw ValidationError("each observation needs an integer \"edge\" and a boolean \"present\"");
            }
            const EdgeId id = e.at("edge").get<EdgeId>();
            if (!bits.emplace(id, e.at("present").get<bool>() ? 1 : 0).second) {
                throw ValidationError(fmt::format("edge {} reported twice", id));
            }
        }
        std::vector<EdgeId> missing, extra;
        for (EdgeId id : rec->observe) {
            if (!bits.count(id)) missing.push_back(id);
        }
        for (const auto& [id, bit] : bits) {
            if (std::find(rec->observe.begin(), rec->observe.end(), id) == rec->observe.end()) extra.push_back(id);
        }
        if (!missing.empty() || !extra.empty()) {
            throw ValidationError(fmt::format("observation must cover exactly edges [{}]; missing [{}], not observable [{}]",
                                              fmt::join(rec->observe, ","), fmt::join(missing, ","),
                                              fmt::join(extra, ",")));
        }
        Observation obs;
        for (EdgeId id : rec->observe) {
            const auto idx = *net.uncertain_index_of(id);
            const std::int8_t prior = belief.known[idx];
            if (prior >= 0 && prior != bits[id]) {
                throw ValidationError(fmt::format("edge {} was already observed as {}", id, prior ? "present" : "absent"));
            }
            obs.entries.push_back({id, bits[id]});
        }
        std::vector<NodeId> attended(a.nodes().begin(), a.nodes().end());
        if (body.contains("attended")) {
            try {
                attended = body.at("attended").get<std::vector<NodeId>>();
            } catch (const nlohmann::json::exception&) {
                throw ValidationError("\"attended\" must be a list of node ids");
            }
            std::sort(attended.begin(), attended.end());
            if (std::adjacent_find(attended.begin(), attended.end()) != attended.end()) {
                throw ValidationError("\"attended\" lists a node twice");
            }
            for (NodeId v : attended) {
                if (!a.contains(v)) throw ValidationError(fmt::format("attended node {} was not recommended", v));
            }
        }
        Rng rng = make_rng(derive_seed(cfg.seed, 7, static_cast<std::uint64_t>(round)));
        std::optional<std::vector<NodeId>> marked;
        if (cfg.attendees_only) marked = attended;
        belief = belief_update(net, belief, a, obs, cfg.steps, rng, marked);
        history.push_back({round, a, attended, obs, ts});
        rec.reset();
        if (round == cfg.rounds) {
            status = SessionStatus::complete;
        } else {
            ++round;
            status = SessionStatus::awaiting_recommendation;
        }
    }

    Recommendation compute_recommendation() const {
        auto planner = make_planner(cfg.planner);
        PlanContext ctx{net, belief, cfg.k, cfg.rounds, cfg.steps, round, {}};
        Rng rng = make_rng(derive_seed(cfg.seed, 11, static_cast<std::uint64_t>(round)));
        PlanOutput out = planner->plan(ctx, rng);
        Recommendation r;
        r.action = out.action;
        r.observe = observed_edge_set(r.action, net);
        r.rationale = std::move(out.details);
        r.rationale["planner"] = planner->name();
        // Expected influenced count after this round, over the belief particles.
        double total = 0.0;
        const std::uint64_t stream = derive_seed(cfg.seed, 13, static_cast<std::uint64_t>(round));
        for (std::size_t i = 0; i < belief.particles.size(); ++i) {
            NodeMask w = belief.particles[i].w;
            for (NodeId v : r.action.nodes()) w.set(v);
            CascadeModel(net, belief.particles[i].f).run(w, cfg.steps, derive_seed(stream, i));
            total += w.count();
        }
        r.expected_spread = total / static_cast<double>(belief.particles.size());
        return r;
    }
};

SessionStore::SessionStore() : SessionStore(Options{}) {}

SessionStore::SessionStore(Options opts) : opts_(std::move(opts)) {
    if (!opts_.data_dir) return;
    std::filesystem::create_directories(*opts_.data_dir);
    std::vector<std::filesystem::path> logs;
    for (const auto& entry : std::filesystem::directory_iterator(*opts_.data_dir)) {
        if (entry.path().extension() == ".jsonl") logs.push_back(entry.path());
    }
    std::sort(logs.begin(), logs.end());
    for (const auto& log : logs) replay(log);
}

SessionStore::~SessionStore() = default;

std::shared_ptr<SessionStore::Session> SessionStore::find(const std::string& id) const {
    std::lock_guard lock(mu_);
    auto it = sessions_.find(id);
    if (it == sessions_.end()) throw NotFoundError(fmt::format("no session '{}'", id));
    return it->second;
}

std::vector<std::string> SessionStore::ids() const {
    std::lock_guard lock(mu_);
    std::vector<std::string> out;
    for (const auto& [id, s] : sessions_) out.push_back(id);
    return out;
}

void SessionStore::append(const Session& s, const nlohmann::json& event) const {
    if (!opts_.data_dir) return;
    const auto path = *opts_.data_dir / (s.id + ".jsonl");
    std::ofstream out(path, std::ios::app);
    if (!out) throw IoError(fmt::format("cannot append to {}", path.string()));
    out << event.dump() << '\n';
    out.flush();
    if (!out) throw IoError(fmt::format("write to {} failed", path.string()));
}

std::string SessionStore::create(const nlohmann::json& body) {
    if (!body.is_object() || !body.contains("network")) throw ValidationError("body needs a \"network\" object");
    auto s = std::make_shared<Session>();
    s->network_json = body.at("network");
    s->net = parse_network(s->network_json.is_string() ? s->network_json.get<std::string>() : s->network_json.dump());
    s->cfg = SessionConfig::from_json(body.value("config", nlohmann::json::object()), opts_.default_planner);
    if (s->cfg.k > s->net.size()) {
        throw ValidationError(fmt::format("K={} exceeds the network's {} nodes", s->cfg.k, s->net.size()));
    }
    s->id = new_id();
    s->created = now_iso();
    Rng rng = make_rng(derive_seed(s->cfg.seed, 5));
    s->belief = initial_belief(s->net, s->cfg.particles, rng);
    append(*s, {{"event", "create"},
                {"id", s->id},
                {"ts", s->created},
                {"network", nlohmann::json::parse(serialize_network(s->net))},
                {"config", s->cfg.to_json()}});
    std::lock_guard lock(mu_);
    sessions_[s->id] = s;
    return s->id;
}

nlohmann::json SessionStore::state(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    const UncertainNetwork& net = s->net;
    nlohmann::json nodes = nlohmann::json::array();
    for (NodeId v = 0; v < net.size(); ++v) {
        nodes.push_back({{"id", v}, {"label", net.label(v)}, {"chosen", s->belief.chosen.test(v)}});
    }
    nlohmann::json edges = nlohmann::json::array();
    for (const Edge& e : net.certain_edges()) {
        edges.push_back({{"id", e.id}, {"src", e.src}, {"dst", e.dst}, {"p", e.p}, {"kind", "certain"}});
    }
    int resolved = 0;
    auto unc = net.uncertain_edges();
    for (std::size_t i = 0; i < unc.size(); ++i) {
        const Edge& e = unc[i];
        nlohmann::json je{{"id", e.id}, {"src", e.src}, {"dst", e.dst}, {"p", e.p}, {"u", *e.u}, {"kind", "uncertain"}};
        if (s->belief.known[i] >= 0) {
            je["observed"] = s->belief.known[i] == 1;
            ++resolved;
        } else {
            je["observed"] = nullptr;
        }
        edges.push_back(std::move(je));
    }
    nlohmann::json history = nlohmann::json::array();
    for (const auto& h : s->history) {
        history.push_back({{"round", h.round},
                           {"action", h.action.nodes()},
                           {"attended", h.attended},
                           {"observation", obs_json(h.obs)},
                           {"ts", h.ts}});
    }
    nlohmann::json j{{"id", s->id},
                     {"name", net.meta().name},
                     {"created", s->created},
                     {"status", status_name(s->status)},
                     {"round", s->round},
                     {"config", s->cfg.to_json()},
                     {"network", {{"n_nodes", net.size()}, {"nodes", std::move(nodes)}, {"edges", std::move(edges)}}},
                     {"resolved_edges", resolved},
                     {"uncertain_edges", unc.size()},
                     {"history", std::move(history)},
                     {"spread_estimate", s->belief.expected_influenced()}};
    if (s->rec) j["recommendation"] = s->rec_json();
    return j;
}

nlohmann::json SessionStore::recommendation(const std::string& id) {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    if (s->status == SessionStatus::complete) throw ConflictError(fmt::format("session {} is complete", id));
    if (!s->rec) {
        s->rec = s->compute_recommendation();
        append(*s, {{"event", "recommendation"},
                    {"ts", now_iso()},
                    {"round", s->round},
                    {"action", s->rec->action.nodes()},
                    {"expected_spread", s->rec->expected_spread},
                    {"rationale", s->rec->rationale}});
        s->status = SessionStatus::awaiting_observation;
    }
    return s->rec_json();
}

nlohmann::json SessionStore::observe(const std::string& id, const nlohmann::json& body) {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    const std::string ts = now_iso();
    const int round = s->round;
    s->apply_observation(body, ts);
    const auto& h = s->history.back();
    append(*s, {{"event", "observation"},
                {"ts", ts},
                {"round", round},
                {"observations", obs_json(h.obs)},
                {"attended", h.attended}});
    return {{"status", status_name(s->status)}, {"round", s->round}, {"spread_estimate", s->belief.expected_influenced()}};
}

nlohmann::json SessionStore::export_record(const std::string& id) const {
    auto s = find(id);
    std::lock_guard lock(s->mu);
    nlohmann::json rounds = nlohmann::json::array();
    std::vector<NodeId> influenced;
    for (const auto& h : s->history) {
        influenced.insert(influenced.end(), h.attended.begin(), h.attended.end());
        std::sort(influenced.begin(), influenced.end());
        rounds.push_back({{"round", h.round},
                          {"action", h.action.nodes()},
                          {"attended", h.attended},
                          {"observation", obs_json(h.obs)},
                          {"hidden_w", influenced},
                          {"ts", h.ts}});
    }
    return {{"network", s->net.meta().name},
            {"planner", s->cfg.planner.label()},
            {"K", s->cfg.k},
            {"T", s->cfg.rounds},
            {"L", s->cfg.steps},
            {"root_seed", s->cfg.seed},
            {"true_f", nlohmann::json::array()},
            {"observed_f", s->belief.known},
            {"rounds", std::move(rounds)},
            {"final_spread", static_cast<int>(influenced.size())},
            {"expected_spread", s->belief.expected_influenced()},
            {"status", status_name(s->status)},
            {"dnf", false},
            {"ground_truth_isolated", true}};
}

void SessionStore::replay(const std::filesystem::path& log) {
    std::ifstream in(log);
    if (!in) throw IoError(fmt::format("cannot read {}", log.string()));
    std::shared_ptr<Session> s;
    std::string line;
    int lineno = 0;
    try {
        while (std::getline(in, line)) {
            ++lineno;
            if (line.empty()) continue;
            const auto ev = nlohmann::json::parse(line);
            const std::string kind = ev.at("event").get<std::string>();
            if (kind == "create") {
                s = std::make_shared<Session>();
                s->id = ev.at("id").get<std::string>();
                s->created = ev.at("ts").get<std::string>();
                s->network_json = ev.at("network");
                s->net = parse_network(s->network_json.dump());
                s->cfg = SessionConfig::from_json(ev.at("config"), opts_.default_planner);
                Rng rng = make_rng(derive_seed(s->cfg.seed, 5));
                s->belief = initial_belief(s->net, s->cfg.particles, rng);
            } else if (!s) {
                throw ParseError("log does not start with a create event");
            } else if (kind == "recommendation") {
                // Recomputed, not trusted: the log must reproduce the action.
                Recommendation r = s->compute_recommendation();
                const auto logged = ev.at("action").get<std::vector<NodeId>>();
                if (std::vector<NodeId>(r.action.nodes().begin(), r.action.nodes().end()) != logged) {
                    throw StateError(fmt::format("replay of {} diverged in round {}", s->id, s->round));
                }
                s->rec = std::move(r);
                s->status = SessionStatus::awaiting_observation;
            } else if (kind == "observation") {
                s->apply_observation(ev, ev.at("ts").get<std::string>());
            } else {
                throw ParseError(fmt::format("unknown event '{}'", kind));
            }
        }
    } catch (const nlohmann::json::exception& e) {
        throw ParseError(fmt::format("{}:{}: {}", log.string(), lineno, e.what()));
    }
    if (s) {
        std::lock_guard lock(mu_);
        sessions_[s->id] = s;
    }
}

}  // namespace dime
