#pragma once

#include <cstdio>
#include <cstdlib>
#include <string>

#include <json.hpp>

#include "embcomm/cost_model.hpp"

namespace embcomm::cli {

// Report floats are rounded to 12 significant digits before serialization so
// repeated runs and golden files compare byte-for-byte across platforms.
inline double round12(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return std::strtod(buf, nullptr);
}

inline std::string csv_number(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

inline nlohmann::ordered_json cost_to_json(const CostBreakdown& cost) {
  nlohmann::ordered_json doc;
  doc["index"] = round12(cost.index_cost);
  doc["embedding"] = round12(cost.embedding_cost);
  doc["total"] = round12(cost.total);
  doc["units_note"] = cost.units_note;
  return doc;
}

}  // namespace embcomm::cli
