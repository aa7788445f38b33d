#include "snmpp/dataset.hpp"

#include <charconv>
#include <fstream>
#include <stdexcept>
#include <system_error>

#include <json.hpp>

namespace snmpp {

namespace {

// Shortest decimal digits that parse back to the same double.
void append_double(std::string& out, double x) {
    char buf[32];
    auto res = std::to_chars(buf, buf + sizeof(buf), x);
    out.append(buf, res.ptr);
}

}  // namespace

std::string sequence_to_json_line(const EventSequence& seq) {
    std::string line = "{\"T\": ";
    append_double(line, seq.horizon);
    line += ", \"events\": [";
    bool first = true;
    for (const Event& e : seq.events) {
        if (!first) line += ", ";
        first = false;
        line += "{\"t\": ";
        append_double(line, e.t);
        line += ", \"k\": ";
        line += std::to_string(e.k);
        line += "}";
    }
    line += "]}";
    return line;
}

EventSequence sequence_from_json_line(const std::string& line, int num_types) {
    nlohmann::json j = nlohmann::json::parse(line);
    EventSequence seq;
    seq.horizon = j.at("T").get<double>();
    for (const auto& e : j.at("events")) {
        seq.events.push_back({e.at("t").get<double>(), e.at("k").get<int>()});
    }
    seq.validate(num_types);
    return seq;
}

void save_sequences(const std::string& path, const std::vector<EventSequence>& data) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dataset: cannot open for writing: " + path);
    for (const auto& seq : data) {
        out << sequence_to_json_line(seq) << '\n';
    }
    if (!out) throw std::runtime_error("dataset: write failed: " + path);
}

std::vector<EventSequence> load_sequences(const std::string& path, int num_types) {
    std::ifstream in(path);
    if (!in) throw std::runtime_error("dataset: cannot open: " + path);
    std::vector<EventSequence> data;
    std::string line;
    std::size_t lineno = 0;
    while (std::getline(in, line)) {
        ++lineno;
        if (line.empty()) continue;
        try {
            data.push_back(sequence_from_json_line(line, num_types));
        } catch (const std::exception& e) {
            throw std::runtime_error(path + ":" + std::to_string(lineno) + ": " + e.what());
        }
    }
    return data;
}

}  // namespace snmpp
