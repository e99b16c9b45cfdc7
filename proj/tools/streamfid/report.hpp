#pragma once

#include <cstdint>
#include <nlohmann/json.hpp>
#include <optional>
#include <ostream>
#include <string>
#include <utility>
#include <vector>

namespace streamfid::cli {

using Json = nlohmann::ordered_json;

// What produced a report. Holds no timestamps or host details so reruns are
// byte-identical.
struct Manifest {
  std::string command;
  std::vector<std::string> inputs;
  std::vector<std::pair<std::string, std::string>> flags;
  std::optional<std::uint64_t> seed;

  Json to_json() const;
};

// Shortest round-trip decimal form; "nan" and "inf" spelled out.
std::string format_double(double v);

using CsvRow = std::vector<std::string>;

// "# manifest: {...}", one "# " line per note, the column header, the rows.
std::string render_csv(const Manifest& manifest, const CsvRow& header,
                       const std::vector<CsvRow>& rows, const std::vector<std::string>& notes = {});

// The report object with the manifest under key "manifest", pretty printed.
std::string render_json(const Manifest& manifest, Json report);

// Writes to `path`, or to `fallback` when the path is empty.
void emit(const std::string& path, const std::string& text, std::ostream& fallback);

}  // namespace streamfid::cli
