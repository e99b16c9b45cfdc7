#include "report.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "streamfid/error.hpp"
#include "version.hpp"

namespace streamfid::cli {

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n\r") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

}  // namespace

Json Manifest::to_json() const {
  Json m;
  m["tool"] = "streamfid";
  m["version"] = kVersion;
  m["command"] = command;
  m["inputs"] = inputs;
  Json f = Json::object();
  for (const auto& [k, v] : flags) f[k] = v;
  m["flags"] = std::move(f);
  m["seed"] = seed ? Json(*seed) : Json(nullptr);
  return m;
}

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  auto [end, ec] = std::to_chars(buf, buf + sizeof buf, v);
  return std::string(buf, end);
}

std::string render_csv(const Manifest& manifest, const CsvRow& header,
                       const std::vector<CsvRow>& rows, const std::vector<std::string>& notes) {
  std::ostringstream out;
  out << "# manifest: " << manifest.to_json().dump() << '\n';
  for (const auto& n : notes) out << "# " << n << '\n';
  auto line = [&out](const CsvRow& r) {
    for (std::size_t i = 0; i < r.size(); ++i) out << (i ? "," : "") << csv_field(r[i]);
    out << '\n';
  };
  line(header);
  for (const auto& r : rows) line(r);
  return out.str();
}

std::string render_json(const Manifest& manifest, Json report) {
  report["manifest"] = manifest.to_json();
  return report.dump(2) + "\n";
}

void emit(const std::string& path, const std::string& text, std::ostream& fallback) {
  if (path.empty()) {
    fallback << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot write '" + path + "'");
  out << text;
}

}  // namespace streamfid::cli
