#include "cli.hpp"

#include <CLI11.hpp>
#include <algorithm>
#include <charconv>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "report.hpp"
#include "streamfid/bowtie.hpp"
#include "streamfid/breakdown.hpp"
#include "streamfid/cascade.hpp"
#include "streamfid/entity.hpp"
#include "streamfid/error.hpp"
#include "streamfid/graph.hpp"
#include "streamfid/jsonl.hpp"
#include "streamfid/ranking.hpp"
#include "streamfid/ratelimit.hpp"
#include "streamfid/simulate.hpp"
#include "version.hpp"

namespace streamfid::cli {

namespace {

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct InputError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

void require(bool ok, const std::string& message) {
  if (!ok) throw UsageError(message);
}

// Every flag any command may take. Each subcommand registers the subset it uses.
struct Flags {
  std::vector<std::string> inputs;
  std::string output;
  std::uint64_t seed = 1;
  std::optional<double> rate;
  int threshold = sim::kDefaultThreshold;
  int anchor_ms = sim::kDefaultAnchorMs;
  std::string key = "user";
  std::string granularity = "hour";
  std::size_t k = 100;
  std::vector<std::string> windows{"600", "3600", "inf"};
  std::string format;

  std::string mode;
  std::string by = "hour";
  int utc_offset = 0;
  std::uint32_t k_max = 100;
  int max_iterations = 10'000;
  std::size_t large_threshold = 50;
  std::size_t min_retweets = 1;
  bool exclude_root_gap = false;
  bool include_quotes = false;
  bool no_quotes = false;
  bool include_replies = false;

  sim::GeneratorConfig gen;
};

// ---------------------------------------------------------------- input

StreamBundle load_bundle(const std::string& path) {
  try {
    return jsonl::read_bundle(std::filesystem::path(path));
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

void stream_events(const std::string& path, const std::function<void(const Event&)>& fn) {
  try {
    jsonl::for_each_record(std::filesystem::path(path), [&](jsonl::Record&& r) {
      if (const auto* e = std::get_if<Event>(&r)) fn(*e);
    });
  } catch (const ParseError& e) {
    throw InputError(path + ": " + e.what());
  } catch (const Error& e) {
    throw InputError(path + ": " + e.what());
  }
}

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out(1);
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        out.back() += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        out.back() += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.emplace_back();
    } else if (c != '\r') {
      out.back() += c;
    }
  }
  return out;
}

// Rows of a CSV written by this tool: '#' lines skipped, header returned separately.
struct CsvTable {
  std::vector<std::string> header;
  std::vector<std::pair<std::size_t, std::vector<std::string>>> rows;  // (line number, fields)
};

CsvTable read_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open '" + path + "'");
  CsvTable t;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty() || line[0] == '#') continue;
    auto fields = split_csv_line(line);
    if (t.header.empty()) {
      t.header = std::move(fields);
    } else {
      if (fields.size() != t.header.size()) {
        throw InputError(path + ": line " + std::to_string(line_no) + ": expected " +
                         std::to_string(t.header.size()) + " fields");
      }
      t.rows.emplace_back(line_no, std::move(fields));
    }
  }
  if (t.header.empty()) throw InputError(path + ": no header line");
  return t;
}

std::uint64_t parse_u64(const std::string& s, const std::string& path, std::size_t line_no) {
  std::uint64_t v = 0;
  auto [end, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || end != s.data() + s.size()) {
    throw InputError(path + ": line " + std::to_string(line_no) + ": bad integer '" + s + "'");
  }
  return v;
}

// ---------------------------------------------------------------- helpers

double window_value(const std::string& s) {
  if (s == "inf") return cascade::kUnboundedWindow;
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  require(end && *end == '\0' && !s.empty() && v > 0,
          "--window-s must be a positive number of seconds or 'inf'");
  return v;
}

std::string window_label(double w) { return w < 0 ? "inf" : format_double(w); }

std::string u64(std::uint64_t v) { return std::to_string(v); }

Json optional_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

// ---------------------------------------------------------------- commands

int cmd_simulate(const Flags& f, const Manifest&, std::ostream& out) {
  auto c = f.gen;
  c.seed = f.seed;
  try {
    sim::validate(c);
  } catch (const InvalidArgument& e) {
    throw UsageError(e.what());
  }
  const auto bundle = sim::generate_stream(c);
  std::ostringstream s;
  jsonl::write_bundle(s, bundle);
  emit(f.output, s.str(), out);
  return kExitOk;
}

int cmd_sample(const Flags& f, const Manifest&, std::ostream& out) {
  require(f.inputs.size() == 1, "sample takes exactly one --input");
  require(f.mode != "bernoulli" || f.rate.has_value(), "--mode bernoulli needs --rate");
  const auto complete = load_bundle(f.inputs[0]);
  StreamBundle sampled;
  if (f.mode == "ratelimit") {
    auto s = sim::rate_limited_sample(complete.events(), f.threshold, f.anchor_ms);
    sampled = StreamBundle(std::move(s.events), std::move(s.messages));
  } else {
    sampled = StreamBundle(sim::bernoulli_sample(complete.events(), *f.rate, f.seed));
  }
  std::ostringstream s;
  jsonl::write_bundle(s, sampled);
  emit(f.output, s.str(), out);
  return kExitOk;
}

int cmd_merge(const Flags& f, const Manifest&, std::ostream& out) {
  require(!f.inputs.empty(), "merge needs at least one --input");
  std::vector<StreamBundle> bundles;
  for (const auto& p : f.inputs) bundles.push_back(load_bundle(p));
  std::ostringstream s;
  try {
    jsonl::write_bundle(s, merge_streams(bundles));
  } catch (const DataError& e) {
    throw InputError(e.what());
  }
  emit(f.output, s.str(), out);
  return kExitOk;
}

int cmd_validate_ratelimit(const Flags& f, const Manifest& m, std::ostream& out) {
  require(f.inputs.size() == 2, "validate-ratelimit takes --input COMPLETE --input SAMPLE");
  const auto complete = load_bundle(f.inputs[0]);
  const auto sample = load_bundle(f.inputs[1]);
  const auto segments = ratelimit::segment_stream(complete, sample);
  std::uint64_t truth = 0;
  std::uint64_t estimate = 0;
  std::vector<CsvRow> rows;
  ratelimit::ValidationReport v;
  if (!segments.empty()) v = ratelimit::validate(segments);
  for (std::size_t i = 0; i < segments.size(); ++i) {
    const auto& seg = segments[i];
    const auto est = ratelimit::estimate_missing(seg);
    truth += seg.true_missing();
    estimate += est;
    rows.push_back({std::to_string(seg.start_ms), std::to_string(seg.end_ms),
                    u64(seg.sample_event_count), u64(seg.complete_event_count),
                    u64(seg.true_missing()), u64(est), format_double(v.ape[i])});
  }
  if (f.format == "csv") {
    emit(f.output,
         render_csv(m,
                    {"start_ms", "end_ms", "sample_events", "complete_events", "true_missing",
                     "estimated_missing", "ape"},
                    rows),
         out);
    return kExitOk;
  }
  Json r;
  r["segments"] = segments.size();
  r["median_ape"] = segments.empty() ? Json(nullptr) : Json(v.median_ape);
  r["mean_ape"] = segments.empty() ? Json(nullptr) : Json(v.mean_ape);
  r["true_missing"] = truth;
  r["estimated_missing"] = estimate;
  emit(f.output, render_json(m, std::move(r)), out);
  return kExitOk;
}

int cmd_breakdown(const Flags& f, const Manifest& m, std::ostream& out) {
  require(f.inputs.size() == 2, "breakdown takes --input COMPLETE --input SAMPLE");
  const auto complete = load_bundle(f.inputs[0]);
  const auto sample = load_bundle(f.inputs[1]);
  breakdown::BreakdownOptions opt;
  opt.utc_offset_hours = f.utc_offset;
  const auto rows = breakdown::sampling_rate_breakdown(complete, sample,
                                                       breakdown::parse_breakdown_key(f.by), opt);
  if (f.format == "json") {
    Json r;
    r["by"] = f.by;
    r["rows"] = Json::array();
    for (const auto& row : rows) {
      r["rows"].push_back({{"bucket", row.bucket},
                           {"complete_count", row.complete_count},
                           {"sample_count", row.sample_count},
                           {"rate", row.rate}});
    }
    emit(f.output, render_json(m, std::move(r)), out);
    return kExitOk;
  }
  std::vector<CsvRow> csv;
  for (const auto& row : rows) {
    csv.push_back(
        {row.bucket, u64(row.complete_count), u64(row.sample_count), format_double(row.rate)});
  }
  emit(f.output, render_csv(m, {"bucket", "complete_count", "sample_count", "rate"}, csv), out);
  return kExitOk;
}

// Sample frequency vector, plus complete-side aggregates when a second input is given.
struct EntityCounts {
  FrequencyVector sample;
  std::optional<FrequencyVector> complete;
  std::uint64_t sample_events = 0;
  std::uint64_t complete_events = 0;
  std::optional<std::uint64_t> true_missing;
};

std::vector<std::string> entity_keys(const Event& e, entity::EntityKey key) {
  if (key == entity::EntityKey::user) return {std::to_string(e.user_id)};
  const auto& tags = key == entity::EntityKey::hashtag ? e.hashtags : e.urls;
  return tags;
}

EntityCounts count_entities(const Flags& f, entity::EntityKey key) {
  require(f.inputs.size() == 1 || f.inputs.size() == 2,
          "takes --input SAMPLE, optionally preceded by --input COMPLETE");
  EntityCounts c;
  const auto& sample_path = f.inputs.back();
  entity::FrequencyCounter sample_counter(key);
  std::unordered_set<std::string> seen;
  const bool with_complete = f.inputs.size() == 2;
  stream_events(sample_path, [&](const Event& e) {
    sample_counter.add(e);
    ++c.sample_events;
    if (with_complete) {
      for (auto& k : entity_keys(e, key)) seen.insert(std::move(k));
    }
  });
  c.sample = sample_counter.result();
  if (with_complete) {
    entity::FrequencyCounter complete_counter(key);
    std::unordered_set<std::string> missing;
    stream_events(f.inputs[0], [&](const Event& e) {
      complete_counter.add(e);
      ++c.complete_events;
      for (auto& k : entity_keys(e, key)) {
        if (!seen.contains(k)) missing.insert(std::move(k));
      }
    });
    c.complete = complete_counter.result();
    c.true_missing = missing.size();
  }
  return c;
}

struct EntityEstimate {
  EntityCounts counts;
  double rate = 0;
  entity::InversionResult inversion;
  double missing = 0;
  double truncation_mass = 0;
};

EntityEstimate estimate_entities(const Flags& f) {
  EntityEstimate r;
  const auto key = entity::parse_entity_key(f.key);
  r.counts = count_entities(f, key);
  if (f.rate) {
    r.rate = *f.rate;
  } else {
    require(r.counts.complete.has_value(), "--rate is required without a complete input");
    require(r.counts.complete_events > 0, "complete input holds no events");
    r.rate =
        static_cast<double>(r.counts.sample_events) / static_cast<double>(r.counts.complete_events);
  }
  require(r.rate > 0 && r.rate <= 1, "sampling rate must be in (0,1]");
  entity::InversionOptions opt;
  opt.k_max = f.k_max;
  opt.max_iterations = f.max_iterations;
  r.inversion = entity::estimate_complete_frequency_vector(r.counts.sample, r.rate, opt);
  r.missing = entity::estimate_missing_entities(r.inversion.f_hat, r.rate);
  const double entities = r.counts.sample.entities();
  r.truncation_mass = entities > 0 ? r.inversion.clamped_entities / entities : 0.0;
  return r;
}

Json estimate_summary(const Flags& f, const EntityEstimate& r) {
  Json s;
  s["key"] = f.key;
  s["rate"] = r.rate;
  s["sample_entities"] = r.counts.sample.entities();
  s["estimated_missing"] = r.missing;
  s["estimated_total"] = r.inversion.f_hat.entities();
  s["residual"] = r.inversion.residual_norm;
  s["iterations"] = r.inversion.iterations;
  s["truncation_mass"] = r.truncation_mass;
  if (r.counts.true_missing) {
    s["true_missing"] = *r.counts.true_missing;
    s["complete_entities"] = r.counts.complete->entities();
  }
  s["warnings"] = r.inversion.warnings;
  return s;
}

int cmd_entity_stats(const Flags& f, const Manifest& m, std::ostream& out) {
  const auto r = estimate_entities(f);
  const bool with_complete = r.counts.complete.has_value();
  if (f.format == "json") {
    Json j;
    j["summary"] = estimate_summary(f, r);
    j["rows"] = Json::array();
    for (std::uint32_t k = 1; k <= f.k_max; ++k) {
      Json row{{"k", k}, {"F_sample", r.counts.sample.at(k)}, {"F_hat", r.inversion.f_hat.at(k)}};
      if (with_complete) row["F_complete"] = r.counts.complete->at(k);
      j["rows"].push_back(std::move(row));
    }
    emit(f.output, render_json(m, std::move(j)), out);
    return kExitOk;
  }
  CsvRow header{"k", "F_sample", "F_hat"};
  if (with_complete) header.push_back("F_complete");
  std::vector<CsvRow> rows;
  for (std::uint32_t k = 1; k <= f.k_max; ++k) {
    CsvRow row{std::to_string(k), format_double(r.counts.sample.at(k)),
               format_double(r.inversion.f_hat.at(k))};
    if (with_complete) row.push_back(format_double(r.counts.complete->at(k)));
    rows.push_back(std::move(row));
  }
  std::vector<std::string> notes{"estimated_missing=" + format_double(r.missing) +
                                 " residual=" + format_double(r.inversion.residual_norm) +
                                 " truncation_mass=" + format_double(r.truncation_mass)};
  emit(f.output, render_csv(m, header, rows, notes), out);
  return kExitOk;
}

int cmd_estimate_missing(const Flags& f, const Manifest& m, std::ostream& out) {
  const auto r = estimate_entities(f);
  if (f.format == "csv") {
    CsvRow header{"key",      "rate",           "sample_entities", "estimated_missing",
                  "residual", "truncation_mass"};
    CsvRow row{f.key,
               format_double(r.rate),
               format_double(r.counts.sample.entities()),
               format_double(r.missing),
               format_double(r.inversion.residual_norm),
               format_double(r.truncation_mass)};
    if (r.counts.true_missing) {
      header.push_back("true_missing");
      row.push_back(u64(*r.counts.true_missing));
    }
    emit(f.output, render_csv(m, header, {row}), out);
    return kExitOk;
  }
  emit(f.output, render_json(m, estimate_summary(f, r)), out);
  return kExitOk;
}

int cmd_rank(const Flags& f, const Manifest& m, std::ostream& out) {
  require(f.inputs.size() == 2, "rank takes --input COMPLETE --input SAMPLE");
  const auto complete = load_bundle(f.inputs[0]);
  const auto sample = load_bundle(f.inputs[1]);
  const auto profile =
      ranking::temporal_rates_from_messages(sample, parse_granularity(f.granularity));
  const auto report = ranking::top_k_rank_table(complete, sample, profile, f.k);
  if (f.format == "json") {
    Json j;
    j["kendall_observed"] = report.kendall_observed;
    j["kendall_estimated"] = report.kendall_estimated;
    j["warnings"] = report.warnings;
    j["rows"] = Json::array();
    for (const auto& r : report.rows) {
      j["rows"].push_back({{"entity", r.entity},
                           {"observed_rank", r.observed_rank},
                           {"true_rank", r.true_rank},
                           {"estimated_rank", r.estimated_rank},
                           {"n_s", r.n_s},
                           {"n_c", r.n_c},
                           {"estimated_volume", r.estimated_volume}});
    }
    emit(f.output, render_json(m, std::move(j)), out);
    return kExitOk;
  }
  std::vector<CsvRow> rows;
  for (const auto& r : report.rows) {
    rows.push_back({u64(r.entity), std::to_string(r.observed_rank), std::to_string(r.true_rank),
                    std::to_string(r.estimated_rank), u64(r.n_s), u64(r.n_c),
                    format_double(r.estimated_volume)});
  }
  std::vector<std::string> notes{"kendall_observed=" + format_double(report.kendall_observed) +
                                 " kendall_estimated=" + format_double(report.kendall_estimated)};
  for (const auto& w : report.warnings) notes.push_back("warning: " + w);
  emit(f.output,
       render_csv(m,
                  {"entity", "observed_rank", "true_rank", "estimated_rank", "n_s", "n_c",
                   "estimated_volume"},
                  rows, notes),
       out);
  return kExitOk;
}

// ---------------------------------------------------------------- graph

std::vector<Event> load_events(const std::string& path) {
  std::vector<Event> events;
  stream_events(path, [&](const Event& e) { events.push_back(e); });
  std::sort(events.begin(), events.end(), event_order);
  return events;
}

bool is_csv(const std::string& path) { return std::filesystem::path(path).extension() == ".csv"; }

int cmd_graph_bipartite(const Flags& f, const Manifest& m, std::ostream& out) {
  require(f.inputs.size() == 1, "graph bipartite takes exactly one --input");
  const auto g = graph::build_bipartite(load_events(f.inputs[0]));
  std::vector<CsvRow> rows;
  for (const auto& e : g.edges) {
    rows.push_back({graph::user_node(g.users[e.user]), graph::hashtag_node(g.hashtags[e.hashtag]),
                    u64(e.weight)});
  }
  emit(f.output, render_csv(m, {"src", "dst", "weight"}, rows), out);
  return kExitOk;
}

int cmd_graph_cocluster(const Flags& f, const Manifest& m, std::ostream& out) {
  require(f.inputs.size() == 1, "graph cocluster takes exactly one --input");
  const auto g = graph::build_bipartite(load_events(f.inputs[0]));
  require(f.k <= g.node_count(), "--k exceeds the number of graph nodes");
  const auto labels = graph::spectral_cocluster(g, f.k, f.seed);
  std::vector<CsvRow> rows;
  for (const auto& [node, cluster] : labels) rows.push_back({node, std::to_string(cluster)});
  emit(f.output, render_csv(m, {"node", "cluster"}, rows), out);
  return kExitOk;
}

graph::RetweetNetworkOptions retweet_options(const Flags& f) {
  graph::RetweetNetworkOptions opt;
  opt.quotes_as_retweets = !f.no_quotes;
  opt.include_replies = f.include_replies;
  return opt;
}

int cmd_graph_retweet(const Flags& f, const Manifest& m, std::ostream& out) {
  require(f.inputs.size() == 1, "graph retweet takes exactly one --input");
  const auto net = graph::build_retweet_network(load_events(f.inputs[0]), retweet_options(f));
  std::vector<CsvRow> rows;
  for (const auto& [edge, w] : net.graph.edges)
    rows.push_back({u64(edge.first), u64(edge.second), u64(w)});
  emit(f.output,
       render_csv(m, {"src", "dst", "weight"}, rows, {"unresolved=" + u64(net.unresolved)}), out);
  return kExitOk;
}

graph::Digraph read_edge_list(const std::string& path) {
  const auto t = read_csv(path);
  require(t.header.size() == 3 && t.header[0] == "src" && t.header[1] == "dst",
          path + ": expected columns src,dst,weight");
  graph::Digraph g;
  std::set<UserId> nodes;
  for (const auto& [line, row] : t.rows) {
    const auto a = parse_u64(row[0], path, line);
    const auto b = parse_u64(row[1], path, line);
    const auto w = parse_u64(row[2], path, line);
    if (w == 0) throw InputError(path + ": line " + std::to_string(line) + ": zero weight");
    nodes.insert(a);
    nodes.insert(b);
    g.edges[{a, b}] += w;
  }
  g.nodes.assign(nodes.begin(), nodes.end());
  return g;
}

int cmd_graph_bowtie(const Flags& f, const Manifest& m, std::ostream& out) {
  require(f.inputs.size() == 1, "graph bowtie takes exactly one --input");
  const auto g =
      is_csv(f.inputs[0])
          ? read_edge_list(f.inputs[0])
          : graph::build_retweet_network(load_events(f.inputs[0]), retweet_options(f)).graph;
  const auto assignment = graph::bowtie_decompose(g);
  std::map<graph::Component, std::uint64_t> sizes;
  std::vector<CsvRow> rows;
  for (const auto& [node, c] : assignment) {
    rows.push_back({u64(node), std::string(graph::to_string(c))});
    ++sizes[c];
  }
  std::string summary;
  for (auto c : graph::kComponents) {
    summary +=
        (summary.empty() ? "" : " ") + std::string(graph::to_string(c)) + "=" + u64(sizes[c]);
  }
  emit(f.output, render_csv(m, {"node", "component"}, rows, {summary}), out);
  return kExitOk;
}

graph::Component parse_component(const std::string& s, const std::string& path, std::size_t line) {
  for (auto c : graph::kComponents) {
    if (graph::to_string(c) == s) return c;
  }
  throw InputError(path + ": line " + std::to_string(line) + ": unknown component '" + s + "'");
}

int cmd_graph_flow(const Flags& f, const Manifest& m, std::ostream& out) {
  require(f.inputs.size() == 2, "graph flow takes --input COMPLETE.csv --input SAMPLE.csv");
  const auto a = read_csv(f.inputs[0]);
  const auto b = read_csv(f.inputs[1]);
  if (!(a.header == b.header && a.header.size() == 2 &&
        (a.header[1] == "cluster" || a.header[1] == "component"))) {
    throw InputError("flow inputs must both be node,cluster or both node,component assignments");
  }
  graph::FlowMatrix flow;
  if (a.header[1] == "cluster") {
    auto labels = [](const CsvTable& t, const std::string& path) {
      graph::Labels l;
      for (const auto& [line, row] : t.rows) {
        l[row[0]] = static_cast<int>(parse_u64(row[1], path, line));
      }
      return l;
    };
    flow = graph::cluster_flow(labels(a, f.inputs[0]), labels(b, f.inputs[1]));
  } else {
    auto assignment = [](const CsvTable& t, const std::string& path) {
      graph::BowtieAssignment out;
      for (const auto& [line, row] : t.rows) {
        out[parse_u64(row[0], path, line)] = parse_component(row[1], path, line);
      }
      return out;
    };
    flow = graph::bowtie_flow(assignment(a, f.inputs[0]), assignment(b, f.inputs[1]));
  }
  std::vector<CsvRow> rows;
  for (std::size_t i = 0; i < flow.row_labels.size(); ++i) {
    for (std::size_t j = 0; j <= flow.col_labels.size(); ++j) {
      const auto& to = j < flow.col_labels.size() ? flow.col_labels[j] : std::string("missing");
      rows.push_back(
          {flow.row_labels[i], to, u64(flow.counts[i][j]), format_double(flow.ratios[i][j])});
    }
  }
  emit(f.output, render_csv(m, {"from", "to", "count", "ratio"}, rows), out);
  return kExitOk;
}

// ---------------------------------------------------------------- cascade

int cmd_cascade(const Flags& f, const Manifest& m, std::ostream& out) {
  require(f.inputs.size() == 2, "cascade takes --input COMPLETE --input SAMPLE");
  require(!f.output.empty(), "cascade writes several files and needs --output SUMMARY.json");
  std::vector<double> windows;
  for (const auto& w : f.windows) windows.push_back(window_value(w));

  cascade::CascadeOptions copt;
  copt.include_quotes = f.include_quotes;
  const auto complete = cascade::reconstruct_cascades(load_events(f.inputs[0]), copt);
  const auto sample = cascade::reconstruct_cascades(load_events(f.inputs[1]), copt);
  cascade::CompareOptions opt;
  opt.large_threshold = f.large_threshold;
  opt.min_retweets = f.min_retweets;
  opt.windows_s = windows;
  opt.inter_arrival.include_root_gap = !f.exclude_root_gap;
  const auto cmp = cascade::compare_cascades(complete, sample, opt);
  const auto dt_complete = cascade::inter_arrival_distribution(complete, opt.inter_arrival);
  const auto dt_sample = cascade::inter_arrival_distribution(sample, opt.inter_arrival);

  std::filesystem::path base(f.output);
  if (base.extension() == ".json") base.replace_extension();
  auto side = [&](const std::string& suffix) { return base.string() + "." + suffix + ".csv"; };
  Json files = Json::array();
  auto write_ccdf = [&](const std::string& suffix, const std::vector<cascade::CcdfPoint>& pts) {
    std::vector<CsvRow> rows;
    for (const auto& p : pts) rows.push_back({format_double(p.x), format_double(p.ccdf)});
    const auto path = side(suffix);
    emit(path, render_csv(m, {"x", "ccdf"}, rows), out);
    files.push_back(std::filesystem::path(path).filename().string());
  };
  write_ccdf("dt_complete", dt_complete.ccdf);
  write_ccdf("dt_sample", dt_sample.ccdf);
  for (std::size_t w = 0; w < windows.size(); ++w) {
    std::vector<double> reach;
    for (const auto& row : cmp.rows) {
      if (row.relative_reach[w]) reach.push_back(*row.relative_reach[w]);
    }
    write_ccdf("reach_" + window_label(windows[w]), cascade::ccdf_of(std::move(reach)));
  }

  const auto& s = cmp.summary;
  Json j;
  j["complete_cascades"] = s.complete_cascades;
  j["sample_cascades"] = s.sample_cascades;
  j["fully_observed"] = s.fully_observed;
  j["large_threshold"] = f.large_threshold;
  j["complete_large"] = s.complete_large;
  j["sample_large"] = s.sample_large;
  j["fully_observed_large"] = s.fully_observed_large;
  j["complete_mean_retweets"] = s.complete_mean_retweets;
  j["sample_mean_retweets"] = s.sample_mean_retweets;
  j["complete_median_inter_arrival_s"] = optional_json(s.complete_median_inter_arrival_s);
  j["sample_median_inter_arrival_s"] = optional_json(s.sample_median_inter_arrival_s);
  Json labels = Json::array();
  for (double w : windows) labels.push_back(window_label(w));
  j["reach_windows_s"] = std::move(labels);
  Json warnings = dt_complete.warnings;
  for (const auto& w : dt_sample.warnings) warnings.push_back(w);
  j["warnings"] = std::move(warnings);
  j["files"] = std::move(files);
  emit(f.output, render_json(m, std::move(j)), out);
  return kExitOk;
}

// ---------------------------------------------------------------- wiring

using Handler = std::function<int(const Flags&, const Manifest&, std::ostream&)>;

struct Command {
  CLI::App* app;
  std::string name;
  Handler run;
  bool seeded = false;
};

void add_inputs(CLI::App* app, Flags& f, const std::string& help) {
  app->add_option("-i,--input", f.inputs, help)->required();
}

void add_output(CLI::App* app, Flags& f) {
  app->add_option("-o,--output", f.output, "Output path (default: stdout)");
}

void add_seed(CLI::App* app, Flags& f) {
  app->add_option("--seed", f.seed, "Random seed")
      ->envname("STREAMFID_SEED")
      ->capture_default_str();
}

// The default differs per command, so it is applied after parsing.
void add_format(CLI::App* app, Flags& f, const std::string& fallback) {
  app->add_option("--format", f.format, "Report format")
      ->check(CLI::IsMember({"json", "csv"}))
      ->default_str(fallback);
}

void add_key(CLI::App* app, Flags& f) {
  app->add_option("--key", f.key, "Entity kind")
      ->check(CLI::IsMember({"user", "hashtag", "url"}))
      ->capture_default_str();
}

void add_rate(CLI::App* app, Flags& f, const std::string& help) {
  app->add_option("--rate", f.rate, help)->check(CLI::Range(0.0, 1.0));
}

void add_entity_flags(CLI::App* app, Flags& f) {
  add_inputs(app, f, "Sample bundle, or COMPLETE then SAMPLE");
  add_output(app, f);
  add_key(app, f);
  add_rate(app, f, "Sampling rate (default: empirical rate from COMPLETE)");
  app->add_option("--k-max", f.k_max, "Largest sample frequency modelled")
      ->check(CLI::Range(1u, 100'000u))
      ->capture_default_str();
  app->add_option("--max-iterations", f.max_iterations, "Inversion iteration limit")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
}

void add_network_flags(CLI::App* app, Flags& f) {
  app->add_flag("--no-quotes", f.no_quotes, "Do not treat quotes as retweets")
      ->default_str("false");
  app->add_flag("--include-replies", f.include_replies, "Add reply edges")->default_str("false");
}

Manifest manifest_of(const Command& c, const Flags& f) {
  Manifest m;
  m.command = c.name;
  m.inputs = f.inputs;
  for (const auto* opt : c.app->get_options()) {
    const auto& name = opt->get_single_name();
    if (name == "help" || name == "input" || name == "output") continue;
    std::string value;
    if (opt->count() > 0) {
      for (const auto& r : opt->results()) value += (value.empty() ? "" : ",") + r;
    } else {
      value = opt->get_default_str();
    }
    if (!value.empty()) m.flags.emplace_back(name, value);
  }
  if (c.seeded) m.seed = f.seed;
  return m;
}

}  // namespace

int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  Flags f;
  CLI::App app{"Rate-limited stream sampling: simulation, estimation and distortion reports",
               "streamfid"};
  app.set_version_flag("--version", std::string("streamfid ") + kVersion);
  app.require_subcommand(1);
  std::vector<Command> commands;

  auto* simulate = app.add_subcommand("simulate", "Generate a synthetic complete stream (JSONL)");
  add_output(simulate, f);
  add_seed(simulate, f);
  simulate->add_option("--duration", f.gen.duration_s, "Seconds of stream")->capture_default_str();
  simulate->add_option("--rate", f.gen.base_rate, "Base arrival rate, events per second")
      ->capture_default_str();
  simulate->add_option("--start-ms", f.gen.start_ms, "Timestamp of the first second")
      ->capture_default_str();
  simulate->add_option("--users", f.gen.user_population, "User population")->capture_default_str();
  simulate->add_option("--diurnal-amplitude", f.gen.diurnal_amplitude, "Hour-of-day modulation")
      ->capture_default_str();
  simulate->add_option("--cascade-fraction", f.gen.cascade_fraction, "Share of retweetable roots")
      ->capture_default_str();
  simulate->add_option("--burst-probability", f.gen.burst_probability, "Per-second burst chance")
      ->capture_default_str();
  simulate->add_option("--burst-multiplier", f.gen.burst_multiplier, "Intensity inside a burst")
      ->capture_default_str();
  commands.push_back({simulate, "simulate", cmd_simulate, true});

  auto* sample = app.add_subcommand("sample", "Sample a complete stream (JSONL)");
  add_inputs(sample, f, "Complete bundle");
  add_output(sample, f);
  add_seed(sample, f);
  sample->add_option("--mode", f.mode, "Sampling mechanism")
      ->required()
      ->check(CLI::IsMember({"ratelimit", "bernoulli"}));
  sample->add_option("--threshold", f.threshold, "Events delivered per window (ratelimit)")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sample->add_option("--anchor-ms", f.anchor_ms, "Window start within the second (ratelimit)")
      ->check(CLI::Range(0, 999))
      ->capture_default_str();
  add_rate(sample, f, "Keep probability (bernoulli)");
  commands.push_back({sample, "sample", cmd_sample, true});

  auto* merge = app.add_subcommand("merge", "Union of bundles by event id (JSONL)");
  add_inputs(merge, f, "Bundles to merge");
  add_output(merge, f);
  commands.push_back({merge, "merge", cmd_merge});

  auto* validate = app.add_subcommand("validate-ratelimit",
                                      "Per-segment accuracy of rate limit message accounting");
  add_inputs(validate, f, "COMPLETE then SAMPLE bundle");
  add_output(validate, f);
  add_format(validate, f, "json");
  commands.push_back({validate, "validate-ratelimit", cmd_validate_ratelimit});

  auto* breakdown =
      app.add_subcommand("breakdown", "Sampling rate per time, language or type bucket");
  add_inputs(breakdown, f, "COMPLETE then SAMPLE bundle");
  add_output(breakdown, f);
  add_format(breakdown, f, "csv");
  breakdown->add_option("--by", f.by, "Bucket key")
      ->check(CLI::IsMember({"hour", "minute", "second", "millisecond", "lang", "type"}))
      ->capture_default_str();
  breakdown->add_option("--utc-offset", f.utc_offset, "Hours added before hour bucketing")
      ->check(CLI::Range(-12, 14))
      ->capture_default_str();
  commands.push_back({breakdown, "breakdown", cmd_breakdown});

  auto* stats =
      app.add_subcommand("entity-stats", "Sample and estimated complete frequency vectors");
  add_entity_flags(stats, f);
  add_format(stats, f, "csv");
  commands.push_back({stats, "entity-stats", cmd_entity_stats});

  auto* missing =
      app.add_subcommand("estimate-missing", "Estimated entities absent from the sample");
  add_entity_flags(missing, f);
  add_format(missing, f, "json");
  commands.push_back({missing, "estimate-missing", cmd_estimate_missing});

  auto* rank = app.add_subcommand("rank", "Top-k users: observed, true and corrected ranks");
  add_inputs(rank, f, "COMPLETE then SAMPLE bundle");
  add_output(rank, f);
  add_format(rank, f, "csv");
  rank->add_option("--k", f.k, "Number of users")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  rank->add_option("--granularity", f.granularity, "Rate profile resolution")
      ->check(CLI::IsMember({"hour", "minute", "second", "millisecond"}))
      ->capture_default_str();
  commands.push_back({rank, "rank", cmd_rank});

  auto* graph = app.add_subcommand("graph", "Network construction and distortion");
  graph->require_subcommand(1);
  auto* bipartite = graph->add_subcommand("bipartite", "User-hashtag edge list");
  add_inputs(bipartite, f, "Bundle");
  add_output(bipartite, f);
  commands.push_back({bipartite, "graph bipartite", cmd_graph_bipartite});

  auto* cocluster =
      graph->add_subcommand("cocluster", "Spectral co-clustering of the user-hashtag graph");
  add_inputs(cocluster, f, "Bundle");
  add_output(cocluster, f);
  add_seed(cocluster, f);
  cocluster->add_option("--k", f.k, "Number of clusters")->required()->check(CLI::PositiveNumber);
  commands.push_back({cocluster, "graph cocluster", cmd_graph_cocluster, true});

  auto* retweet = graph->add_subcommand("retweet", "Retweeter to author edge list");
  add_inputs(retweet, f, "Bundle");
  add_output(retweet, f);
  add_network_flags(retweet, f);
  commands.push_back({retweet, "graph retweet", cmd_graph_retweet});

  auto* bowtie = graph->add_subcommand("bowtie", "Bow-tie components of the retweet network");
  add_inputs(bowtie, f, "Bundle, or an edge list CSV (src,dst,weight)");
  add_output(bowtie, f);
  add_network_flags(bowtie, f);
  commands.push_back({bowtie, "graph bowtie", cmd_graph_bowtie});

  auto* flow = graph->add_subcommand("flow", "Flow of nodes between two assignments");
  add_inputs(flow, f, "COMPLETE then SAMPLE assignment CSV");
  add_output(flow, f);
  commands.push_back({flow, "graph flow", cmd_graph_flow});

  auto* cascade = app.add_subcommand("cascade", "Cascade size, reach and inter-arrival distortion");
  add_inputs(cascade, f, "COMPLETE then SAMPLE bundle");
  add_output(cascade, f);
  cascade->add_option("--window-s", f.windows, "Reach windows in seconds, or 'inf'")
      ->capture_default_str();
  cascade->add_option("--large-threshold", f.large_threshold, "Retweets for a large cascade")
      ->capture_default_str();
  cascade->add_option("--min-retweets", f.min_retweets, "Skip smaller complete cascades")
      ->capture_default_str();
  cascade
      ->add_flag("--exclude-root-gap", f.exclude_root_gap,
                 "Leave the root to first retweet gap out of inter-arrival times")
      ->default_str("false");
  cascade->add_flag("--include-quotes", f.include_quotes, "Count quotes as cascade members")
      ->default_str("false");
  commands.push_back({cascade, "cascade", cmd_cascade});

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e, out, err);
  } catch (const CLI::CallForVersion& e) {
    return app.exit(e, out, err);
  } catch (const CLI::ParseError& e) {
    app.exit(e, out, err);
    return kExitUsage;
  }

  const auto it = std::find_if(commands.begin(), commands.end(),
                               [](const Command& c) { return c.app->parsed(); });
  if (it == commands.end()) {
    err << app.help();
    return kExitUsage;
  }
  if (const auto* fmt = it->app->get_option_no_throw("--format"); fmt && fmt->count() == 0) {
    f.format = fmt->get_default_str();
  }
  try {
    return it->run(f, manifest_of(*it, f), out);
  } catch (const UsageError& e) {
    err << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  } catch (const ConvergenceError& e) {
    err << "error: " << e.what() << " (residual " << format_double(e.residual()) << ")\n";
    return kExitInput;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitInput;
  }
}

}  // namespace streamfid::cli
