#include "tsr/pgm.hpp"

#include <fstream>
#include <string>

#include "tsr/error.hpp"

namespace tsr {

namespace {

// Reads one whitespace-delimited header token, allowing one '#' comment line
// directly after the magic (comment_ok).  PGM headers end each token with a
// single whitespace byte, after which raw pixel data begins.
std::string next_token(std::istream& in, bool comment_ok) {
  std::string tok;
  char c;
  while (in.get(c)) {
    if (c == '#' && comment_ok && tok.empty()) {
      std::string dump;
      std::getline(in, dump);
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r' || c == '\n') {
      if (!tok.empty()) return tok;
      continue;
    }
    tok.push_back(c);
  }
  return tok;
}

int parse_dim(const std::string& tok, const char* what) {
  if (tok.empty()) {
    throw FormatError(std::string("pgm: missing ") + what + " token");
  }
  for (char c : tok) {
    if (c < '0' || c > '9') {
      throw FormatError(std::string("pgm: bad ") + what + " token '" + tok +
                        "'");
    }
  }
  long v = 0;
  for (char c : tok) {
    v = v * 10 + (c - '0');
    if (v > 1 << 20) throw FormatError(std::string("pgm: ") + what + " too large '" + tok + "'");
  }
  return static_cast<int>(v);
}

}  // namespace

GrayFrame load_frame(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("pgm: cannot open '" + path + "'");

  const std::string magic = next_token(in, false);
  if (magic != "P5") {
    throw FormatError("pgm: expected magic P5, got '" + magic + "'");
  }
  const int w = parse_dim(next_token(in, true), "width");
  const int h = parse_dim(next_token(in, false), "height");
  if (w < 1 || h < 1) {
    throw FormatError("pgm: dimensions must be positive, got " +
                      std::to_string(w) + "x" + std::to_string(h));
  }
  const std::string maxval = next_token(in, false);
  if (maxval != "255") {
    throw UnsupportedDepthError("pgm: only maxval 255 supported, got '" +
                                maxval + "'");
  }

  GrayFrame frame;
  frame.pixels.resize(h, w);
  in.read(reinterpret_cast<char*>(frame.pixels.data()),
          static_cast<std::streamsize>(w) * h);
  if (in.gcount() != static_cast<std::streamsize>(w) * h) {
    throw FormatError("pgm: truncated pixel data in '" + path + "'");
  }
  return frame;
}

void save_frame(const GrayFrame& frame, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("pgm: cannot create '" + path + "'");
  out << "P5\n" << frame.width() << " " << frame.height() << "\n255\n";
  out.write(reinterpret_cast<const char*>(frame.pixels.data()),
            static_cast<std::streamsize>(frame.width()) * frame.height());
  if (!out) throw IoError("pgm: write failed for '" + path + "'");
}

}  // namespace tsr
