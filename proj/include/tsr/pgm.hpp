#pragma once

#include <string>

#include "tsr/image.hpp"

namespace tsr {

/// Load a binary PGM (P5, maxval 255).  One '#' comment line is tolerated
/// between the magic and the dimensions.  Throws FormatError naming the
/// offending token on malformed input, UnsupportedDepthError when maxval is
/// not 255, IoError when the file cannot be opened.
GrayFrame load_frame(const std::string& path);

/// Write `frame` as binary PGM (P5, maxval 255).  Throws IoError on failure.
void save_frame(const GrayFrame& frame, const std::string& path);

}  // namespace tsr
