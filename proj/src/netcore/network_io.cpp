#include "dime/netcore/network_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include <fmt/format.h>
#include <json.hpp>

#include "dime/core/error.hpp"

namespace dime {
namespace {

using json = nlohmann::json;

std::pair<std::size_t, std::size_t> line_col(std::string_view text, std::size_t byte) {
    std::size_t line = 1, col = 1;
    for (std::size_t i = 0; i < std::min(byte, text.size()); ++i) {
        if (text[i] == '\n') {
            ++line;
            col = 1;
        } else {
            ++col;
        }
    }
    return {line, col};
}

template <typename T>
T field(const json& obj, const char* key, const std::string& where) {
    if (!obj.is_object()) throw ParseError(fmt::format("{}: expected an object", where));
    auto it = obj.find(key);
    if (it == obj.end()) throw ParseError(fmt::format("{}.{}: missing field", where, key));
    try {
        return it->template get<T>();
    } catch (const json::exception&) {
        throw ParseError(fmt::format("{}.{}: wrong type ({})", where, key, it->type_name()));
    }
}

void read_edges(const json& doc, const char* key, bool uncertain, std::int64_t& next_id, std::vector<Edge>& out) {
    auto it = doc.find(key);
    if (it == doc.end()) return;
    if (!it->is_array()) throw ParseError(fmt::format("{}: expected an array", key));
    for (std::size_t i = 0; i < it->size(); ++i) {
        const json& entry = (*it)[i];
        const std::string where = fmt::format("{}[{}]", key, i);
        Edge e;
        e.src = field<NodeId>(entry, "src", where);
        e.dst = field<NodeId>(entry, "dst", where);
        e.p = field<double>(entry, "p", where);
        if (uncertain) {
            e.u = field<double>(entry, "u", where);
        } else if (entry.contains("u")) {
            throw ValidationError(fmt::format("{}: certain edge carries field u", where));
        }
        const bool undirected = entry.value("undirected", false);
        if (undirected) {
            if (entry.contains("id")) throw ValidationError(fmt::format("{}: undirected entries cannot carry an id", where));
            e.id = next_id++;
            out.push_back(e);
            std::swap(e.src, e.dst);
            e.id = next_id++;
            out.push_back(e);
        } else {
            e.id = entry.contains("id") ? field<EdgeId>(entry, "id", where) : next_id;
            ++next_id;
            out.push_back(e);
        }
    }
}

}  // namespace

UncertainNetwork parse_network(std::string_view text) {
    json doc;
    try {
        doc = json::parse(text.begin(), text.end());
    } catch (const json::parse_error& err) {
        auto [line, col] = line_col(text, err.byte == 0 ? 0 : err.byte - 1);
        throw ParseError(fmt::format("line {}, column {}: {}", line, col, err.what()));
    }
    if (!doc.is_object()) throw ParseError("network document must be a JSON object");
    const int version = doc.value("version", kNetworkFormatVersion);
    if (version != kNetworkFormatVersion) throw ParseError(fmt::format("unsupported network format version {}", version));
    const int n = field<int>(doc, "n_nodes", "network");

    NetworkMeta meta;
    meta.name = doc.value("name", std::string{});
    meta.generator = doc.value("generator", std::string{});
    if (auto it = doc.find("node_labels"); it != doc.end() && !it->is_null()) {
        try {
            meta.node_labels = it->get<std::vector<std::string>>();
        } catch (const json::exception&) {
            throw ParseError("node_labels: expected an array of strings");
        }
    }
    std::vector<Edge> certain, uncertain;
    std::int64_t next_id = 0;
    read_edges(doc, "certain_edges", false, next_id, certain);
    read_edges(doc, "uncertain_edges", true, next_id, uncertain);
    return UncertainNetwork(n, std::move(certain), std::move(uncertain), std::move(meta));
}

std::string serialize_network(const UncertainNetwork& net) {
    json doc;
    doc["version"] = kNetworkFormatVersion;
    doc["name"] = net.meta().name;
    doc["generator"] = net.meta().generator;
    doc["n_nodes"] = net.size();
    if (!net.meta().node_labels.empty()) doc["node_labels"] = net.meta().node_labels;
    json certain = json::array(), uncertain = json::array();
    for (const Edge& e : net.certain_edges()) certain.push_back({{"id", e.id}, {"src", e.src}, {"dst", e.dst}, {"p", e.p}});
    for (const Edge& e : net.uncertain_edges()) {
        uncertain.push_back({{"id", e.id}, {"src", e.src}, {"dst", e.dst}, {"p", e.p}, {"u", *e.u}});
    }
    doc["certain_edges"] = std::move(certain);
    doc["uncertain_edges"] = std::move(uncertain);
    return doc.dump(1) + "\n";
}

UncertainNetwork load_network(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError(fmt::format("cannot open network file {}", path.string()));
    std::ostringstream buf;
    buf << in.rdbuf();
    try {
        return parse_network(buf.str());
    } catch (const ParseError& err) {
        throw ParseError(fmt::format("{}: {}", path.string(), err.what()));
    }
}

void save_network(const UncertainNetwork& net, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError(fmt::format("cannot write network file {}", path.string()));
    out << serialize_network(net);
    out.flush();
    if (!out) throw IoError(fmt::format("write failed for {}", path.string()));
}

}  // namespace dime
