#ifndef FAREYPHASE_IO_HPP
#define FAREYPHASE_IO_HPP

// Tabular output shared by the CLI: CSV (17 significant digits, LF, header
// comments carrying the run configuration) or JSON ({"header", "records"}).

#include <cmath>
#include <cstdio>
#include <ostream>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "version.hpp"

namespace fareyphase {

using json = nlohmann::ordered_json;

/// Round-trip representation of a double.
inline std::string format_double(double x) {
  if (std::isnan(x))
    return "nan";
  if (std::isinf(x))
    return x > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

enum class OutputFormat { csv, json };

class Table {
public:
  explicit Table(std::vector<std::string> columns) : columns_(std::move(columns)) {}

  /// Values in column order; numbers stay numbers in JSON.
  void add_row(std::vector<json> row) {
    if (row.size() != columns_.size())
      throw std::logic_error("row width does not match the table header");
    rows_.push_back(std::move(row));
  }

  const std::vector<std::string>& columns() const noexcept { return columns_; }
  std::size_t size() const noexcept { return rows_.size(); }
  const std::vector<json>& row(std::size_t i) const { return rows_.at(i); }

  /// `config` is echoed verbatim into the header of the output.
  void write(std::ostream& os, OutputFormat fmt, const std::string& command,
             const json& config) const {
    if (fmt == OutputFormat::json)
      write_json(os, command, config);
    else
      write_csv(os, command, config);
  }

private:
  static std::string cell(const json& v) {
    if (v.is_number_float())
      return format_double(v.get<double>());
    if (v.is_string()) {
      const auto& s = v.get_ref<const std::string&>();
      if (s.find_first_of(",\"\n") == std::string::npos)
        return s;
      std::string q = "\"";
      for (char c : s) {
        if (c == '"')
          q += '"';
        q += c;
      }
      return q + '"';
    }
    if (v.is_null())
      return "nan";
    return v.dump();
  }

  void write_csv(std::ostream& os, const std::string& command, const json& config) const {
    os << "# fareyphase " << version << '\n';
    os << "# command=" << command << '\n';
    for (const auto& [key, value] : config.items())
      os << "# " << key << '=' << (value.is_string() ? value.get<std::string>() : value.dump())
         << '\n';
    for (std::size_t c = 0; c < columns_.size(); ++c)
      os << (c ? "," : "") << columns_[c];
    os << '\n';
    for (const auto& r : rows_) {
      for (std::size_t c = 0; c < r.size(); ++c)
        os << (c ? "," : "") << cell(r[c]);
      os << '\n';
    }
  }

  void write_json(std::ostream& os, const std::string& command, const json& config) const {
    json doc;
    doc["header"] = {{"tool", "fareyphase"}, {"version", version}, {"command", command},
                     {"config", config}};
    json records = json::array();
    for (const auto& r : rows_) {
      json rec = json::object();
      for (std::size_t c = 0; c < r.size(); ++c) {
        const json& v = r[c];
        rec[columns_[c]] = (v.is_number_float() && !std::isfinite(v.get<double>())) ? json() : v;
      }
      records.push_back(std::move(rec));
    }
    doc["records"] = std::move(records);
    os << doc.dump(2) << '\n';
  }

  std::vector<std::string> columns_;
  std::vector<std::vector<json>> rows_;
};

} // namespace fareyphase

#endif
