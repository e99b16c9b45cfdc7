#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <string>
#include <string_view>
#include <variant>

#include "streamfid/model.hpp"

namespace streamfid::jsonl {

// One line of a bundle file. A line is a message iff it has key "rl_ts_ms".
using Record = std::variant<Event, RateLimitMessage>;

// Throws ParseError (carrying `line_no`) on malformed JSON or schema violations.
Record parse_record(std::string_view line, std::size_t line_no = 0);

std::string to_line(const Event& event);
std::string to_line(const RateLimitMessage& message);

// Calls `fn` for every non-blank line in order; single pass, constant memory.
void for_each_record(std::istream& in, const std::function<void(Record&&)>& fn);
void for_each_record(const std::filesystem::path& path, const std::function<void(Record&&)>& fn);

StreamBundle read_bundle(std::istream& in);
StreamBundle read_bundle(const std::filesystem::path& path);

// Events and messages interleaved by timestamp; at equal timestamps events
// come first, since a message closes its window.
void write_bundle(std::ostream& out, const StreamBundle& bundle);
void write_bundle(const std::filesystem::path& path, const StreamBundle& bundle);

}  // namespace streamfid::jsonl
