#include "tsr/config.hpp"

#include <cctype>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include "tsr/error.hpp"
#include "tsr/odr.hpp"

namespace tsr {

PipelineParams::PipelineParams()
    : eu_values(default_values(RegionMode::EU)),
      us_values(default_values(RegionMode::US)) {}

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0;
  std::size_t e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

[[noreturn]] void bad_value(const std::string& key, const std::string& value) {
  throw ConfigError("config: bad value '" + value + "' for key '" + key + "'");
}

int parse_int(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v.empty()) bad_value(key, value);
  char* end = nullptr;
  const long parsed = std::strtol(v.c_str(), &end, 10);
  if (end != v.c_str() + v.size()) bad_value(key, value);
  return static_cast<int>(parsed);
}

double parse_double(const std::string& key, const std::string& value) {
  const std::string v = trim(value);
  if (v.empty()) bad_value(key, value);
  char* end = nullptr;
  const double parsed = std::strtod(v.c_str(), &end);
  if (end != v.c_str() + v.size()) bad_value(key, value);
  return parsed;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& value) {
  std::vector<int> out;
  std::stringstream ss(value);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_int(key, item));
  if (out.empty()) bad_value(key, value);
  return out;
}

void apply(PipelineParams& params, const std::string& key,
           const std::string& value) {
  if (key == "detector.r_min")
    params.detector.r_min = parse_int(key, value);
  else if (key == "detector.r_max")
    params.detector.r_max = parse_int(key, value);
  else if (key == "detector.magnitude_threshold")
    params.detector.magnitude_threshold =
        static_cast<float>(parse_double(key, value));
  else if (key == "detector.vote_threshold")
    params.detector.vote_threshold = parse_double(key, value);
  else if (key == "detector.aspect_min")
    params.detector.aspect_min = parse_double(key, value);
  else if (key == "detector.aspect_max")
    params.detector.aspect_max = parse_double(key, value);
  else if (key == "detector.nms_overlap")
    params.detector.nms_overlap = parse_double(key, value);
  else if (key == "detector.rect_min_side")
    params.detector.rect_min_side = parse_int(key, value);
  else if (key == "detector.rect_max_side")
    params.detector.rect_max_side = parse_int(key, value);
  else if (key == "segment.offset")
    params.segment.offset = parse_int(key, value);
  else if (key == "odr.reject_threshold")
    params.reject_threshold = parse_double(key, value);
  else if (key == "odr.margin")
    params.margin = parse_double(key, value);
  else if (key == "odr.header_min_height")
    params.header_min_height = parse_int(key, value);
  else if (key == "tracker.min_hits")
    params.tracker.min_hits = parse_int(key, value);
  else if (key == "tracker.confidence_threshold")
    params.tracker.confidence_threshold = parse_double(key, value);
  else if (key == "tracker.max_gap")
    params.tracker.max_gap = parse_int(key, value);
  else if (key == "tracker.gate_scale")
    params.tracker.gate_scale = parse_double(key, value);
  else if (key == "tracker.max_growth")
    params.tracker.max_growth = parse_double(key, value);
  else if (key == "values.eu")
    params.eu_values = parse_int_list(key, value);
  else if (key == "values.us")
    params.us_values = parse_int_list(key, value);
  else
    throw ConfigError("config: unknown key '" + key + "'");
}

}  // namespace

PipelineParams parse_config(const std::string& text) {
  PipelineParams params;
  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const std::string stripped = trim(line);
    if (stripped.empty() || stripped.front() == '#') continue;
    const std::size_t eq = stripped.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config line " + std::to_string(line_no) +
                        ": expected key=value, got '" + stripped + "'");
    const std::string key = trim(stripped.substr(0, eq));
    const std::string value = trim(stripped.substr(eq + 1));
    if (key.empty())
      throw ConfigError("config line " + std::to_string(line_no) + ": empty key");
    apply(params, key, value);
  }
  return params;
}

PipelineParams load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config(buffer.str());
}

}  // namespace tsr
