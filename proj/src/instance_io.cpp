#include "bpac/instance_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "json.hpp"

#include "bpac/errors.hpp"

namespace bpac {

using nlohmann::json;

namespace {

std::string position_of(std::string_view text, std::size_t byte) {
  byte = std::min(byte, text.size());
  const auto prefix = text.substr(0, byte);
  const auto line = 1 + std::count(prefix.begin(), prefix.end(), '\n');
  const auto last_newline = prefix.rfind('\n');
  const auto column = last_newline == std::string_view::npos ? byte + 1 : byte - last_newline;
  return "line " + std::to_string(line) + ", column " + std::to_string(column);
}

// Line on which the n-th occurrence of `key` appears, for locating entries
// that parsed fine but failed validation.
std::string locate_nth_key(std::string_view text, std::string_view key, std::size_t n) {
  const std::string needle = "\"" + std::string(key) + "\"";
  std::size_t pos = 0;
  for (std::size_t i = 0; i <= n; ++i) {
    pos = text.find(needle, i == 0 ? 0 : pos + 1);
    if (pos == std::string_view::npos) return "unknown line";
  }
  return position_of(text, pos);
}

template <typename T>
T get_field(const json& j, const char* key, const std::string& where) {
  if (!j.contains(key)) throw ValidationError(where + ": missing field \"" + key + "\"");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ValidationError(where + ": field \"" + key + "\" has the wrong type");
  }
}

}  // namespace

Instance parse_instance(std::string_view text) {
  json doc;
  try {
    doc = json::parse(text.begin(), text.end());
  } catch (const json::parse_error& e) {
    const std::string where = position_of(text, e.byte == 0 ? 0 : e.byte - 1);
    throw ValidationError("instance JSON syntax error at " + where, {where + ": " + e.what()});
  }
  if (!doc.is_object()) throw ValidationError("instance JSON must be an object");

  const auto k = get_field<long long>(doc, "K", "instance");
  const auto m = get_field<long long>(doc, "m", "instance");
  if (k < 1) throw ValidationError("instance: K must be positive");
  if (m < 1) throw ValidationError("instance: m must be positive");

  if (!doc.contains("hypotheses")) throw ValidationError("instance: missing field \"hypotheses\"");
  const auto& rows = doc.at("hypotheses");
  if (!rows.is_array() || rows.empty()) {
    throw ValidationError("instance: \"hypotheses\" must be a nonempty array");
  }
  std::vector<Label> table;
  table.reserve(rows.size() * static_cast<std::size_t>(m));
  for (std::size_t h = 0; h < rows.size(); ++h) {
    const auto& row = rows[h];
    if (!row.is_array() || row.size() != static_cast<std::size_t>(m)) {
      throw ValidationError("instance: hypotheses[" + std::to_string(h) + "] must have m = " +
                            std::to_string(m) + " entries");
    }
    for (const auto& v : row) {
      if (!v.is_number_integer() || v.get<long long>() < 0) {
        throw ValidationError("instance: hypotheses[" + std::to_string(h) +
                              "] holds a non-label entry");
      }
      table.push_back(static_cast<Label>(v.get<unsigned long long>()));
    }
  }

  if (!doc.contains("support") || !doc.at("support").is_array()) {
    throw ValidationError("instance: \"support\" must be an array");
  }
  std::vector<SupportPoint> support;
  for (std::size_t i = 0; i < doc.at("support").size(); ++i) {
    const auto& s = doc.at("support")[i];
    const std::string where = "support[" + std::to_string(i) + "]";
    const auto x = get_field<long long>(s, "x", where);
    const auto y = get_field<long long>(s, "y", where);
    if (x < 0 || y < 0) throw ValidationError(where + ": negative index");
    support.push_back({static_cast<std::size_t>(x), static_cast<Label>(y),
                       get_field<double>(s, "p", where)});
  }

  Instance instance{HypothesisClass(static_cast<std::size_t>(k), rows.size(),
                                    static_cast<std::size_t>(m), std::move(table)),
                    std::move(support)};
  auto errors = validate_instance(instance);
  if (!errors.empty()) {
    // Attach a source position to support-level violations.
    for (auto& e : errors) {
      const auto open = e.find("support[");
      if (open == std::string::npos) continue;
      const auto index = std::stoul(e.substr(open + 8));
      e = locate_nth_key(text, "x", index) + ": " + e;
    }
    std::string what = "invalid instance: " + errors.front();
    throw ValidationError(what, std::move(errors));
  }
  return instance;
}

Instance load_instance(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ValidationError("cannot open instance file " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_instance(buffer.str());
}

std::string dump_instance(const Instance& instance) {
  const auto& cls = instance.hypotheses;
  std::ostringstream out;
  out.precision(17);
  out << "{\n  \"K\": " << cls.num_labels() << ",\n  \"m\": " << cls.num_examples()
      << ",\n  \"hypotheses\": [\n";
  for (std::size_t h = 0; h < cls.size(); ++h) {
    out << "    [";
    for (std::size_t x = 0; x < cls.num_examples(); ++x) {
      out << (x ? "," : "") << cls(h, x);
    }
    out << "]" << (h + 1 < cls.size() ? "," : "") << "\n";
  }
  out << "  ],\n  \"support\": [\n";
  for (std::size_t i = 0; i < instance.support.size(); ++i) {
    const auto& s = instance.support[i];
    // json's number serializer prints the shortest round-tripping form.
    out << "    {\"x\": " << s.x << ", \"y\": " << s.y << ", \"p\": " << json(s.p).dump() << "}"
        << (i + 1 < instance.support.size() ? "," : "") << "\n";
  }
  out << "  ]\n}\n";
  return out.str();
}

void save_instance(const Instance& instance, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write instance file " + path.string());
  out << dump_instance(instance);
  if (!out) throw std::runtime_error("failed writing instance file " + path.string());
}

}  // namespace bpac
