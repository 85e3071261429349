#include "dmt/dataset_io.hpp"

#include <fstream>
#include <ostream>
#include <sstream>

#include <nlohmann/json.hpp>

#include "dmt/errors.hpp"

namespace dmt {

using nlohmann::json;

namespace {

json bits_to_json(const Instance& x) {
  json bits = json::array();
  for (const Position& p : x.active()) bits.push_back({p.feature, p.value});
  return bits;
}

Instance bits_from_json(const json& node, std::size_t m, std::size_t n, long record) {
  Instance x(m, n);
  if (node.contains("bits")) {
    for (const json& pair : node.at("bits")) {
      if (!pair.is_array() || pair.size() != 2) {
        throw ParseError("bits entries must be [m, n] pairs", record);
      }
      const auto fm = pair[0].get<long long>();
      const auto fn = pair[1].get<long long>();
      if (fm < 0 || fn < 0 || static_cast<std::size_t>(fm) >= m ||
          static_cast<std::size_t>(fn) >= n) {
        throw ParseError("bit position outside the schema shape", record);
      }
      x.set(static_cast<std::size_t>(fm), static_cast<std::size_t>(fn), true);
    }
  } else if (node.contains("dense")) {
    const json& rows = node.at("dense");
    if (!rows.is_array() || rows.size() != m) {
      throw ParseError("dense bits must have one row per feature", record);
    }
    for (std::size_t r = 0; r < m; ++r) {
      if (!rows[r].is_array() || rows[r].size() != n) {
        throw ParseError("dense row has the wrong arity", record);
      }
      for (std::size_t c = 0; c < n; ++c) {
        const json& v = rows[r][c];
        if (!v.is_number_integer() || (v.get<long long>() != 0 && v.get<long long>() != 1)) {
          throw ParseError("bit value other than 0/1", record);
        }
        x.set(r, c, v.get<long long>() == 1);
      }
    }
  } else {
    throw ParseError("record has neither 'bits' nor 'dense'", record);
  }
  return x;
}

json provenance_to_json(const Provenance& p) {
  if (!p.perturbed) return json{{"kind", "clean"}};
  json flips = json::array();
  for (const Flip& f : p.flips) {
    flips.push_back({f.position.feature, f.position.value,
                     f.direction == FlipDirection::Insert ? "insert" : "delete"});
  }
  return json{{"kind", "perturbed"}, {"origin", p.origin_id}, {"flips", flips}};
}

Provenance provenance_from_json(const json& node, long record) {
  const std::string kind = node.at("kind").get<std::string>();
  if (kind == "clean") return Provenance::clean();
  if (kind != "perturbed") throw ParseError("unknown provenance kind '" + kind + "'", record);
  FlipList flips;
  for (const json& f : node.at("flips")) {
    if (!f.is_array() || f.size() != 3) throw ParseError("flip entries must be [m, n, dir]", record);
    const std::string dir = f[2].get<std::string>();
    if (dir != "insert" && dir != "delete") {
      throw ParseError("flip direction must be insert or delete", record);
    }
    flips.push_back({{f[0].get<std::uint32_t>(), f[1].get<std::uint32_t>()},
                     dir == "insert" ? FlipDirection::Insert : FlipDirection::Delete});
  }
  return Provenance::from_origin(node.at("origin").get<std::int64_t>(), std::move(flips));
}

json parse_document(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw ParseError(std::string("malformed JSON: ") + e.what(),
                     static_cast<long>(e.byte));
  }
}

}  // namespace

std::string dataset_to_json(const Dataset& d) {
  const DatasetSchema& s = d.schema();
  json schema{{"m", s.num_features}, {"n", s.arity}, {"c", s.num_classes},
              {"mode", to_string(s.mode)}, {"names", s.feature_names}};
  if (!s.feature_arities.empty()) schema["arities"] = s.feature_arities;
  json items = json::array();
  for (const LabeledInstance& item : d.items()) {
    items.push_back({{"id", item.id},
                     {"label", item.label},
                     {"provenance", provenance_to_json(item.provenance)},
                     {"bits", bits_to_json(item.instance)}});
  }
  return json{{"schema", schema}, {"items", items}}.dump() + "\n";
}

Dataset dataset_from_json(const std::string& text) {
  const json doc = parse_document(text);
  DatasetSchema schema;
  try {
    const json& s = doc.at("schema");
    schema.num_features = s.at("m").get<std::size_t>();
    schema.arity = s.at("n").get<std::size_t>();
    schema.num_classes = s.at("c").get<std::size_t>();
    schema.mode = parse_encoding_mode(s.value("mode", std::string("multihot")));
    if (s.contains("names")) schema.feature_names = s.at("names").get<std::vector<std::string>>();
    if (s.contains("arities")) {
      schema.feature_arities = s.at("arities").get<std::vector<std::size_t>>();
    }
    schema.validate();
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad schema: ") + e.what());
  } catch (const ConfigError& e) {
    throw ParseError(std::string("bad schema: ") + e.what());
  }

  Dataset d(schema);
  long record = 0;
  try {
    for (const json& node : doc.at("items")) {
      LabeledInstance item;
      item.id = node.at("id").get<std::int64_t>();
      item.label = node.at("label").get<int>();
      if (item.label < 0 || static_cast<std::size_t>(item.label) >= schema.num_classes) {
        throw ParseError("item " + std::to_string(item.id) + " has label " +
                             std::to_string(item.label) + " but the schema declares C=" +
                             std::to_string(schema.num_classes),
                         record);
      }
      item.provenance = node.contains("provenance")
                            ? provenance_from_json(node.at("provenance"), record)
                            : Provenance::clean();
      item.instance = bits_from_json(node, schema.num_features, schema.arity, record);
      try {
        validate_instance(schema, item.instance);
        d.add_item(std::move(item));
      } catch (const Error& e) {
        throw ParseError(e.what(), record);
      }
      ++record;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad item: ") + e.what(), record);
  }
  return d;
}

std::string read_text_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open '" + path.string() + "' for reading");
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_text_file(const std::filesystem::path& path, const std::string& text) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot open '" + path.string() + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path.string() + "' failed");
}

void save_dataset(const Dataset& d, const std::filesystem::path& path) {
  write_text_file(path, dataset_to_json(d));
}

Dataset load_dataset(const std::filesystem::path& path) {
  return dataset_from_json(read_text_file(path));
}

void export_csv(const Dataset& d, std::ostream& out) {
  const DatasetSchema& s = d.schema();
  out << "id,label,provenance";
  for (std::size_t m = 0; m < s.num_features; ++m) {
    for (std::size_t n = 0; n < s.arity; ++n) out << ",bit_" << m << '_' << n;
  }
  out << '\n';
  for (const LabeledInstance& item : d.items()) {
    out << item.id << ',' << item.label << ','
        << (item.provenance.perturbed ? "perturbed:" + std::to_string(item.provenance.origin_id)
                                      : std::string("clean"));
    for (std::uint8_t b : item.instance.bits()) out << ',' << static_cast<int>(b);
    out << '\n';
  }
}

std::string targets_to_json(const TargetSpec& t) {
  json targets = json::array();
  std::size_t m = 0;
  std::size_t n = 0;
  for (const Target& target : t.targets) {
    m = target.instance.num_features();
    n = target.instance.arity();
    json node{{"target_label", target.target_label}, {"bits", bits_to_json(target.instance)}};
    if (target.original_label) node["original_label"] = *target.original_label;
    targets.push_back(node);
  }
  return json{{"task", to_string(t.task)}, {"m", m}, {"n", n}, {"targets", targets}}.dump(2) +
         "\n";
}

TargetSpec targets_from_json(const std::string& text) {
  const json doc = parse_document(text);
  TargetSpec spec;
  long record = 0;
  try {
    spec.task = parse_task_kind(doc.at("task").get<std::string>());
    const auto m = doc.at("m").get<std::size_t>();
    const auto n = doc.at("n").get<std::size_t>();
    for (const json& node : doc.at("targets")) {
      Target t;
      t.target_label = node.at("target_label").get<int>();
      if (node.contains("original_label")) t.original_label = node.at("original_label").get<int>();
      t.instance = bits_from_json(node, m, n, record);
      spec.targets.push_back(std::move(t));
      ++record;
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("bad target record: ") + e.what(), record);
  } catch (const ConfigError& e) {
    throw ParseError(e.what(), record);
  }
  return spec;
}

void save_targets(const TargetSpec& t, const std::filesystem::path& path) {
  write_text_file(path, targets_to_json(t));
}

TargetSpec load_targets(const std::filesystem::path& path) {
  return targets_from_json(read_text_file(path));
}

}  // namespace dmt
