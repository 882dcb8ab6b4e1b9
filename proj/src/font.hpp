#pragma once

#include <utility>
#include <vector>

namespace tsr::fontdata {

/// One pen stroke: a polyline in the unit glyph box (x right, y down).
struct StrokePoly {
  std::vector<std::pair<double, double>> pts;
};

struct Glyph {
  std::vector<StrokePoly> strokes;
  double aspect;         ///< width / height of the glyph box
  double stroke_factor;  ///< multiplier on the nominal stroke width
};

/// Embedded stroke font: digits 0-9 in three style variants (0..2) plus the
/// capital letters used by U.S. sign captions.  Letters share shapes across
/// variants; only width/weight change.  Throws ArgumentError for characters
/// outside the repertoire.
const Glyph& lookup(char ch, int variant);

}  // namespace tsr::fontdata
