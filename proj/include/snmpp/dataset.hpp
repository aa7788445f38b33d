#pragma once

#include <string>
#include <vector>

#include "snmpp/events.hpp"

namespace snmpp {

// Native dataset format: JSON Lines, one sequence per line,
//   {"T": <real>, "events": [{"t": <real>, "k": <int>}, ...]}
// with 0-based marks. Numbers are written with enough digits to round-trip
// exactly, so identical sequences produce identical bytes.
void save_sequences(const std::string& path, const std::vector<EventSequence>& data);
std::vector<EventSequence> load_sequences(const std::string& path, int num_types = -1);

std::string sequence_to_json_line(const EventSequence& seq);
EventSequence sequence_from_json_line(const std::string& line, int num_types = -1);

}  // namespace snmpp
