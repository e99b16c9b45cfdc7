#include "streamfid/jsonl.hpp"

#include <fstream>
#include <nlohmann/json.hpp>

#include "streamfid/error.hpp"

namespace streamfid::jsonl {

using nlohmann::json;
using nlohmann::ordered_json;

namespace {

template <typename T>
T require(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end()) throw ParseError(std::string("missing key '") + key + "'", line_no);
  try {
    return it->get<T>();
  } catch (const json::exception&) {
    throw ParseError(std::string("bad value for '") + key + "'", line_no);
  }
}

std::vector<std::string> string_list(const json& obj, const char* key, std::size_t line_no) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_array()) throw ParseError(std::string("'") + key + "' must be an array", line_no);
  std::vector<std::string> out;
  out.reserve(it->size());
  for (const auto& v : *it) {
    if (!v.is_string()) throw ParseError(std::string("'") + key + "' must hold strings", line_no);
    out.push_back(v.get<std::string>());
  }
  return out;
}

bool blank(std::string_view line) {
  return line.find_first_not_of(" \t\r") == std::string_view::npos;
}

}  // namespace

Record parse_record(std::string_view line, std::size_t line_no) {
  json obj;
  try {
    obj = json::parse(line);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("invalid JSON: ") + e.what(), line_no);
  }
  if (!obj.is_object()) throw ParseError("record is not a JSON object", line_no);

  if (obj.contains("rl_ts_ms")) {
    RateLimitMessage m;
    m.timestamp_ms = require<TimestampMs>(obj, "rl_ts_ms", line_no);
    auto missed = require<std::int64_t>(obj, "missed", line_no);
    if (missed < 0) throw ParseError("negative 'missed'", line_no);
    m.cumulative_missed = static_cast<std::uint64_t>(missed);
    return m;
  }

  Event e;
  auto id = require<std::int64_t>(obj, "id", line_no);
  if (id < 0) throw ParseError("negative 'id'", line_no);
  e.id = static_cast<EventId>(id);
  e.timestamp_ms = require<TimestampMs>(obj, "ts_ms", line_no);
  auto user = require<std::int64_t>(obj, "user", line_no);
  if (user < 0) throw ParseError("negative 'user'", line_no);
  e.user_id = static_cast<UserId>(user);
  try {
    e.type = parse_event_type(require<std::string>(obj, "type", line_no));
  } catch (const InvalidArgument& ex) {
    throw ParseError(ex.what(), line_no);
  }
  if (auto it = obj.find("root_id"); it != obj.end() && !it->is_null()) {
    if (!it->is_number_integer() || it->get<std::int64_t>() < 0) {
      throw ParseError("bad value for 'root_id'", line_no);
    }
    e.root_id = it->get<EventId>();
  }
  e.hashtags = string_list(obj, "hashtags", line_no);
  e.urls = string_list(obj, "urls", line_no);
  auto followers = require<std::int64_t>(obj, "followers", line_no);
  if (followers < 0) throw ParseError("negative 'followers'", line_no);
  e.follower_count = static_cast<std::uint64_t>(followers);
  e.lang = require<std::string>(obj, "lang", line_no);
  try {
    validate(e);
  } catch (const InvalidArgument& ex) {
    throw ParseError(ex.what(), line_no);
  }
  return e;
}

std::string to_line(const Event& e) {
  ordered_json obj;
  obj["id"] = e.id;
  obj["ts_ms"] = e.timestamp_ms;
  obj["user"] = e.user_id;
  obj["type"] = to_string(e.type);
  if (e.root_id) obj["root_id"] = *e.root_id;
  obj["hashtags"] = e.hashtags;
  obj["urls"] = e.urls;
  obj["followers"] = e.follower_count;
  obj["lang"] = e.lang;
  return obj.dump();
}

std::string to_line(const RateLimitMessage& m) {
  ordered_json obj;
  obj["rl_ts_ms"] = m.timestamp_ms;
  obj["missed"] = m.cumulative_missed;
  return obj.dump();
}

void for_each_record(std::istream& in, const std::function<void(Record&&)>& fn) {
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (blank(line)) continue;
    fn(parse_record(line, line_no));
  }
}

void for_each_record(const std::filesystem::path& path,
                     const std::function<void(Record&&)>& fn) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  for_each_record(in, fn);
}

StreamBundle read_bundle(std::istream& in) {
  std::vector<Event> events;
  std::vector<RateLimitMessage> messages;
  for_each_record(in, [&](Record&& r) {
    if (auto* e = std::get_if<Event>(&r)) {
      events.push_back(std::move(*e));
    } else {
      messages.push_back(std::get<RateLimitMessage>(r));
    }
  });
  return StreamBundle(std::move(events), std::move(messages));
}

StreamBundle read_bundle(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open '" + path.string() + "'");
  return read_bundle(in);
}

void write_bundle(std::ostream& out, const StreamBundle& bundle) {
  const auto& events = bundle.events();
  const auto& messages = bundle.messages();
  std::size_t i = 0;
  std::size_t j = 0;
  while (i < events.size() || j < messages.size()) {
    const bool take_event =
        j == messages.size() ||
        (i < events.size() && events[i].timestamp_ms <= messages[j].timestamp_ms);
    if (take_event) {
      out << to_line(events[i++]) << '\n';
    } else {
      out << to_line(messages[j++]) << '\n';
    }
  }
}

void write_bundle(const std::filesystem::path& path, const StreamBundle& bundle) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot write '" + path.string() + "'");
  write_bundle(out, bundle);
}

}  // namespace streamfid::jsonl
