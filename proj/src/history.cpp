#include "nicrep/history.hpp"

#include <fstream>
#include <istream>
#include <ostream>

#include "json.hpp"

namespace nicrep {

using json = nlohmann::ordered_json;

std::string_view to_string(OpResult result) {
    switch (result) {
        case OpResult::Ok: return "ok";
        case OpResult::Value: return "value";
        case OpResult::NotFound: return "not_found";
        case OpResult::Superseded: return "superseded";
        case OpResult::Error: return "error";
        case OpResult::Pending: return "pending";
    }
    return "?";
}

OpResult parse_op_result(std::string_view text) {
    for (OpResult r : {OpResult::Ok, OpResult::Value, OpResult::NotFound, OpResult::Superseded, OpResult::Error,
                       OpResult::Pending})
        if (to_string(r) == text) return r;
    throw Error("unknown op result '" + std::string(text) + "'");
}

std::optional<Value> History::initial_value(Key key) const {
    auto it = initial.find(key);
    return it == initial.end() ? std::nullopt : it->second;
}

std::map<Key, std::vector<HistoryEvent>> History::by_key() const {
    std::map<Key, std::vector<HistoryEvent>> out;
    for (const auto& e : events) out[e.key].push_back(e);
    return out;
}

void write_history_jsonl(const History& history, std::ostream& out) {
    for (const auto& [key, value] : history.initial) {
        json line;
        line["type"] = "init";
        line["key"] = key;
        line["value"] = value ? json(*value) : json(nullptr);
        out << line.dump() << '\n';
    }
    for (const auto& e : history.events) {
        json line;
        line["type"] = "op";
        line["session"] = e.session;
        line["request"] = e.request;
        line["op"] = e.op == OpKind::Read ? "read" : "write";
        line["key"] = e.key;
        line["value"] = e.value ? json(*e.value) : json(nullptr);
        line["invoke_time"] = e.invoke.time;
        line["invoke_seq"] = e.invoke.seq;
        line["response_time"] = e.response ? json(e.response->time) : json(nullptr);
        line["response_seq"] = e.response ? json(e.response->seq) : json(nullptr);
        line["result"] = to_string(e.result);
        out << line.dump() << '\n';
    }
}

History read_history_jsonl(std::istream& in) {
    History history;
    std::string text;
    std::size_t line_no = 0;
    while (std::getline(in, text)) {
        ++line_no;
        if (text.empty()) continue;
        try {
            const json line = json::parse(text);
            const std::string type = line.at("type").get<std::string>();
            if (type == "init") {
                const auto& v = line.at("value");
                history.initial[line.at("key").get<Key>()] =
                    v.is_null() ? std::nullopt : std::optional<Value>(v.get<std::string>());
            } else if (type == "op") {
                HistoryEvent e;
                e.session = line.at("session").get<SessionId>();
                e.request = line.at("request").get<RequestId>();
                const std::string op = line.at("op").get<std::string>();
                if (op != "read" && op != "write") throw Error("bad op '" + op + "'");
                e.op = op == "read" ? OpKind::Read : OpKind::Write;
                e.key = line.at("key").get<Key>();
                if (const auto& v = line.at("value"); !v.is_null()) e.value = v.get<std::string>();
                e.invoke = {line.at("invoke_time").get<SimTime>(), line.at("invoke_seq").get<std::uint64_t>()};
                if (const auto& t = line.at("response_time"); !t.is_null())
                    e.response = HistoryPoint{t.get<SimTime>(), line.at("response_seq").get<std::uint64_t>()};
                e.result = parse_op_result(line.at("result").get<std::string>());
                history.events.push_back(std::move(e));
            } else {
                throw Error("unknown record type '" + type + "'");
            }
        } catch (const json::exception& ex) {
            throw Error("history line " + std::to_string(line_no) + ": " + ex.what());
        } catch (const Error& ex) {
            throw Error("history line " + std::to_string(line_no) + ": " + ex.what());
        }
    }
    return history;
}

void save_history(const History& history, const std::string& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw Error("cannot open '" + path + "' for writing");
    write_history_jsonl(history, out);
    if (!out) throw Error("write to '" + path + "' failed");
}

History load_history(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw Error("cannot open history '" + path + "'");
    return read_history_jsonl(in);
}

}  // namespace nicrep
