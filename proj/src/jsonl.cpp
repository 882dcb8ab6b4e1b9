#include "tsr/jsonl.hpp"

#include <fstream>
#include <sstream>

#include <json.hpp>

#include "tsr/error.hpp"

namespace tsr {

namespace {

using nlohmann::json;

json bbox_to_json(const Rect& r) { return json::array({r.x, r.y, r.w, r.h}); }

Rect bbox_from_json(const json& j, const char* where, std::size_t line_no) {
  if (!j.is_array() || j.size() != 4) {
    std::ostringstream oss;
    oss << where << " line " << line_no << ": bbox must be [x, y, w, h]";
    throw ParseError(oss.str());
  }
  Rect r;
  r.x = j[0].get<int>();
  r.y = j[1].get<int>();
  r.w = j[2].get<int>();
  r.h = j[3].get<int>();
  return r;
}

[[noreturn]] void parse_fail(const std::string& path, std::size_t line_no,
                             const std::string& detail) {
  std::ostringstream oss;
  oss << path << " line " << line_no << ": " << detail;
  throw ParseError(oss.str());
}

}  // namespace

void append_detection(std::ostream& out, const DetectionRow& row) {
  json j;
  j["bbox"] = bbox_to_json(row.bbox);
  j["confidence"] = row.confidence;
  j["frame"] = row.frame;
  j["kind"] = row.kind;
  j["shape"] = row.shape;
  if (row.value.has_value())
    j["value"] = *row.value;
  else
    j["value"] = nullptr;
  out << j.dump() << '\n';
}

std::vector<DetectionRow> read_detections(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open detection stream: " + path);
  std::vector<DetectionRow> rows;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      parse_fail(path, line_no, e.what());
    }
    try {
      DetectionRow row;
      row.frame = j.at("frame").get<std::int64_t>();
      row.kind = j.at("kind").get<std::string>();
      row.shape = j.at("shape").get<std::string>();
      row.bbox = bbox_from_json(j.at("bbox"), path.c_str(), line_no);
      const auto& v = j.at("value");
      if (!v.is_null()) row.value = v.get<int>();
      row.confidence = j.at("confidence").get<double>();
      rows.push_back(std::move(row));
    } catch (const json::exception& e) {
      parse_fail(path, line_no, e.what());
    }
  }
  return rows;
}

void write_truth(const std::string& path, const std::vector<GroundTruth>& signs) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot open truth file for writing: " + path);
  for (const auto& sign : signs) {
    json frames = json::array();
    for (const auto& [frame, bbox] : sign.frames) {
      json f;
      f["bbox"] = bbox_to_json(bbox);
      f["frame"] = frame;
      frames.push_back(std::move(f));
    }
    json j;
    j["frames"] = std::move(frames);
    j["sign_id"] = sign.sign_id;
    j["value"] = sign.value;
    out << j.dump() << '\n';
  }
  if (!out.flush()) throw IoError("failed writing truth file: " + path);
}

std::vector<GroundTruth> read_truth(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open truth file: " + path);
  std::vector<GroundTruth> signs;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) continue;
    json j;
    try {
      j = json::parse(line);
    } catch (const json::exception& e) {
      parse_fail(path, line_no, e.what());
    }
    try {
      GroundTruth sign;
      sign.sign_id = j.at("sign_id").get<int>();
      sign.value = j.at("value").get<int>();
      for (const auto& f : j.at("frames")) {
        std::int64_t frame = f.at("frame").get<std::int64_t>();
        Rect bbox = bbox_from_json(f.at("bbox"), path.c_str(), line_no);
        sign.frames.emplace_back(frame, bbox);
      }
      signs.push_back(std::move(sign));
    } catch (const json::exception& e) {
      parse_fail(path, line_no, e.what());
    }
  }
  return signs;
}

}  // namespace tsr
