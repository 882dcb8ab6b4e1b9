#include "font.hpp"

#include <array>
#include <map>

#include "tsr/error.hpp"

namespace tsr::fontdata {

namespace {

using Pts = std::vector<std::pair<double, double>>;

StrokePoly poly(Pts pts) { return StrokePoly{std::move(pts)}; }

// ============================================================================
// Digit skeletons
// ============================================================================
//
// Each digit is a handful of polylines inside the unit box, y pointing down.
// Variants restyle a few strokes (serif bar on '1', crossbar on '7', open or
// closed '4') so the recognizer sees real intra-class variation.

std::vector<StrokePoly> digit_strokes(int digit, int variant) {
  switch (digit) {
    case 0:
      return {poly({{0.32, 0.05}, {0.68, 0.05}, {0.95, 0.30}, {0.95, 0.70},
                    {0.68, 0.95}, {0.32, 0.95}, {0.05, 0.70}, {0.05, 0.30},
                    {0.32, 0.05}})};
    case 1: {
      std::vector<StrokePoly> s;
      s.push_back(poly({{0.22, 0.28}, {0.55, 0.05}}));
      s.push_back(poly({{0.55, 0.05}, {0.55, 0.95}}));
      if (variant == 2) s.push_back(poly({{0.25, 0.95}, {0.85, 0.95}}));
      return s;
    }
    case 2:
      return {poly({{0.08, 0.26}, {0.16, 0.10}, {0.38, 0.04}, {0.66, 0.05},
                    {0.88, 0.14}, {0.93, 0.32}, {0.83, 0.50}, {0.55, 0.66},
                    {0.28, 0.80}, {0.08, 0.95}, {0.93, 0.95}})};
    case 3:
      return {poly({{0.10, 0.14}, {0.30, 0.04}, {0.60, 0.04}, {0.85, 0.12},
                    {0.90, 0.28}, {0.78, 0.42}, {0.52, 0.48}, {0.82, 0.54},
                    {0.93, 0.70}, {0.84, 0.87}, {0.58, 0.96}, {0.28, 0.95},
                    {0.08, 0.83}})};
    case 4: {
      std::vector<StrokePoly> s;
      if (variant == 2) {
        s.push_back(poly({{0.56, 0.08}, {0.08, 0.62}}));
        s.push_back(poly({{0.04, 0.62}, {0.95, 0.62}}));
        s.push_back(poly({{0.72, 0.04}, {0.72, 0.96}}));
      } else {
        s.push_back(poly({{0.66, 0.04}, {0.07, 0.62}}));
        s.push_back(poly({{0.07, 0.62}, {0.95, 0.62}}));
        s.push_back(poly({{0.68, 0.04}, {0.68, 0.96}}));
      }
      return s;
    }
    case 5:
      return {poly({{0.88, 0.05}, {0.14, 0.05}, {0.11, 0.44}, {0.35, 0.38},
                    {0.62, 0.40}, {0.86, 0.52}, {0.93, 0.70}, {0.82, 0.88},
                    {0.55, 0.96}, {0.26, 0.94}, {0.07, 0.82}})};
    case 6:
      return {poly({{0.82, 0.10}, {0.62, 0.04}, {0.38, 0.08}, {0.18, 0.28},
                    {0.08, 0.52}, {0.09, 0.74}, {0.22, 0.90}, {0.45, 0.96},
                    {0.68, 0.93}, {0.86, 0.80}, {0.90, 0.62}, {0.80, 0.48},
                    {0.60, 0.42}, {0.38, 0.44}, {0.20, 0.54}, {0.11, 0.68}})};
    case 7: {
      std::vector<StrokePoly> s;
      s.push_back(poly({{0.06, 0.05}, {0.93, 0.05}, {0.70, 0.35}, {0.48, 0.65},
                        {0.38, 0.95}}));
      if (variant == 2) s.push_back(poly({{0.28, 0.48}, {0.74, 0.48}}));
      return s;
    }
    case 8:
      return {poly({{0.50, 0.04}, {0.76, 0.10}, {0.84, 0.24}, {0.74, 0.38},
                    {0.50, 0.45}, {0.26, 0.38}, {0.16, 0.24}, {0.24, 0.10},
                    {0.50, 0.04}}),
              poly({{0.50, 0.45}, {0.80, 0.52}, {0.92, 0.66}, {0.84, 0.84},
                    {0.60, 0.96}, {0.40, 0.96}, {0.16, 0.84}, {0.08, 0.66},
                    {0.20, 0.52}, {0.50, 0.45}})};
    case 9:
      return {poly({{0.88, 0.34}, {0.80, 0.16}, {0.60, 0.05}, {0.36, 0.06},
                    {0.15, 0.18}, {0.09, 0.36}, {0.16, 0.50}, {0.38, 0.57},
                    {0.62, 0.55}, {0.80, 0.45}, {0.89, 0.28}, {0.90, 0.50},
                    {0.84, 0.74}, {0.66, 0.90}, {0.42, 0.96}})};
    default:
      throw ArgumentError("digit_strokes: digit out of range");
  }
}

// ============================================================================
// Caption letters (block capitals)
// ============================================================================

std::vector<StrokePoly> letter_strokes(char ch) {
  switch (ch) {
    case 'S':
      return {poly({{0.90, 0.16}, {0.70, 0.06}, {0.42, 0.04}, {0.18, 0.10},
                    {0.08, 0.26}, {0.16, 0.40}, {0.40, 0.48}, {0.66, 0.54},
                    {0.88, 0.62}, {0.94, 0.78}, {0.82, 0.92}, {0.55, 0.97},
                    {0.26, 0.94}, {0.08, 0.84}})};
    case 'P':
      return {poly({{0.10, 0.04}, {0.10, 0.96}}),
              poly({{0.10, 0.04}, {0.60, 0.04}, {0.88, 0.12}, {0.92, 0.28},
                    {0.82, 0.44}, {0.55, 0.50}, {0.10, 0.50}})};
    case 'E':
      return {poly({{0.10, 0.04}, {0.10, 0.96}}),
              poly({{0.10, 0.04}, {0.92, 0.04}}),
              poly({{0.10, 0.50}, {0.78, 0.50}}),
              poly({{0.10, 0.96}, {0.92, 0.96}})};
    case 'D':
      return {poly({{0.10, 0.04}, {0.10, 0.96}}),
              poly({{0.10, 0.04}, {0.50, 0.04}, {0.82, 0.16}, {0.94, 0.40},
                    {0.94, 0.60}, {0.82, 0.84}, {0.50, 0.96}, {0.10, 0.96}})};
    case 'L':
      return {poly({{0.12, 0.04}, {0.12, 0.96}, {0.90, 0.96}})};
    case 'I':
      return {poly({{0.50, 0.04}, {0.50, 0.96}}),
              poly({{0.18, 0.04}, {0.82, 0.04}}),
              poly({{0.18, 0.96}, {0.82, 0.96}})};
    case 'M':
      return {poly({{0.06, 0.96}, {0.06, 0.04}, {0.50, 0.58}, {0.94, 0.04},
                    {0.94, 0.96}})};
    case 'T':
      return {poly({{0.06, 0.04}, {0.94, 0.04}}),
              poly({{0.50, 0.04}, {0.50, 0.96}})};
    case 'R':
      return {poly({{0.10, 0.04}, {0.10, 0.96}}),
              poly({{0.10, 0.04}, {0.60, 0.04}, {0.88, 0.12}, {0.92, 0.28},
                    {0.82, 0.44}, {0.55, 0.50}, {0.10, 0.50}}),
              poly({{0.45, 0.50}, {0.92, 0.96}})};
    case 'U':
      return {poly({{0.08, 0.04}, {0.08, 0.72}, {0.20, 0.92}, {0.50, 0.97},
                    {0.80, 0.92}, {0.92, 0.72}, {0.92, 0.04}})};
    case 'C':
      return {poly({{0.90, 0.18}, {0.72, 0.06}, {0.45, 0.03}, {0.20, 0.12},
                    {0.07, 0.34}, {0.06, 0.62}, {0.18, 0.85}, {0.45, 0.97},
                    {0.72, 0.94}, {0.90, 0.82}})};
    case 'K':
      return {poly({{0.10, 0.04}, {0.10, 0.96}}),
              poly({{0.90, 0.04}, {0.12, 0.56}}),
              poly({{0.38, 0.44}, {0.92, 0.96}})};
    default:
      throw ArgumentError(std::string("letter_strokes: unsupported glyph '") +
                          ch + "'");
  }
}

constexpr std::array<double, 3> kAspectScale = {1.0, 0.88, 1.15};
constexpr std::array<double, 3> kStrokeFactor = {1.0, 0.80, 1.25};

Glyph build(char ch, int variant) {
  Glyph g;
  double base_aspect;
  if (ch >= '0' && ch <= '9') {
    g.strokes = digit_strokes(ch - '0', variant);
    base_aspect = (ch == '1') ? 0.45 : 0.58;
  } else {
    g.strokes = letter_strokes(ch);
    base_aspect = 0.62;
  }
  g.aspect = base_aspect * kAspectScale[static_cast<std::size_t>(variant)];
  g.stroke_factor = kStrokeFactor[static_cast<std::size_t>(variant)];
  return g;
}

}  // namespace

const Glyph& lookup(char ch, int variant) {
  if (variant < 0 || variant > 2)
    throw ArgumentError("font lookup: variant must be 0, 1 or 2");
  static std::map<std::pair<char, int>, Glyph> cache;
  auto key = std::make_pair(ch, variant);
  auto it = cache.find(key);
  if (it == cache.end()) it = cache.emplace(key, build(ch, variant)).first;
  return it->second;
}

}  // namespace tsr::fontdata
