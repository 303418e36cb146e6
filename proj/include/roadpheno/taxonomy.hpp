#pragma once

// Crop/BBCH class codes. A label is a 3-letter crop code plus a BBCH stage
// string ("0".."9" or a two-digit sub-stage like "39"). Stages stay strings:
// one- and two-digit codes coexist and are never compared numerically.

#include <array>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "roadpheno/csv.hpp"
#include "roadpheno/util.hpp"

namespace roadpheno::tax {

inline const std::set<std::string>& registered_crops() {
  static const std::set<std::string> crops = {
      "BSO", "CAR", "GMA", "GRA", "GRS", "MAI", "ONI", "OTH", "POT",
      "SBA", "SBT", "SCR", "SWH", "TLP", "VEG", "WBA", "WCR", "WWH"};
  return crops;
}

struct ClassLabel {
  std::string crop;   // 3 uppercase letters
  std::string stage;  // 1-2 digits

  std::string text() const { return crop + stage; }

  auto operator<=>(const ClassLabel&) const = default;
};

inline ClassLabel parse_label(const std::string& text) {
  bool shape_ok = (text.size() == 4 || text.size() == 5);
  if (shape_ok) {
    for (std::size_t i = 0; i < 3; ++i)
      shape_ok &= text[i] >= 'A' && text[i] <= 'Z';
    for (std::size_t i = 3; i < text.size(); ++i)
      shape_ok &= text[i] >= '0' && text[i] <= '9';
  }
  if (!shape_ok)
    throw input_error("malformed class label '" + text +
                      "' (want 3 letters + 1-2 digits)");
  ClassLabel label{text.substr(0, 3), text.substr(3)};
  if (!registered_crops().count(label.crop))
    throw input_error("unknown crop code '" + label.crop + "' in label '" +
                      text + "'");
  return label;
}

inline std::string crop_of(const ClassLabel& label) { return label.crop; }

// old label -> new label; labels absent from the table map to themselves.
// Idempotent by construction: no mapped-to label is itself a key.
class GeneralizationTable {
 public:
  static GeneralizationTable builtin() {
    static const std::array<std::pair<const char*, const char*>, 16> rows = {{
        {"BSO1", "BSO0"},
        {"BSO3", "BSO0"},
        {"BSO4", "BSO0"},
        {"BSO5", "BSO0"},
        {"BSO6", "BSO0"},
        {"ONI0", "BSO0"},
        {"POT0", "BSO0"},
        {"SBT0", "BSO0"},
        {"WWH0", "BSO0"},
        {"BSO2", "GMA2"},
        {"GRA2", "GRA1"},
        {"GRA3", "GRA1"},
        {"ONI41", "ONI4"},
        {"ONI45", "ONI48"},
        {"SBT11", "SBT1"},
        {"WWH9", "WWH8"},
    }};
    GeneralizationTable t;
    for (const auto& [from, to] : rows)
      t.add(parse_label(from), parse_label(to));
    return t;
  }

  // CSV override with columns old_label,new_label
  static GeneralizationTable from_csv(const std::filesystem::path& path) {
    csv::Table table = csv::read_table(path);
    std::size_t c_old = table.column("old_label");
    std::size_t c_new = table.column("new_label");
    GeneralizationTable t;
    for (std::size_t i = 0; i < table.rows.size(); ++i) {
      try {
        t.add(parse_label(table.rows[i][c_old]),
              parse_label(table.rows[i][c_new]));
      } catch (const input_error& e) {
        throw input_error(strprintf("%s line %zu: %s", path.string().c_str(),
                                    csv::Table::line_of(i), e.what()));
      }
    }
    return t;
  }

  void add(const ClassLabel& from, const ClassLabel& to) {
    if (map_.count(to))
      throw input_error("generalization target " + to.text() +
                        " is itself generalized; table would not be "
                        "idempotent");
    for (const auto& [k, v] : map_)
      if (v == from)
        throw input_error("generalization source " + from.text() +
                          " is already a target; table would not be "
                          "idempotent");
    map_[from] = to;
  }

  ClassLabel apply(const ClassLabel& label) const {
    auto it = map_.find(label);
    return it == map_.end() ? label : it->second;
  }

  std::size_t size() const { return map_.size(); }
  const std::map<ClassLabel, ClassLabel>& entries() const { return map_; }

 private:
  std::map<ClassLabel, ClassLabel> map_;
};

}  // namespace roadpheno::tax
