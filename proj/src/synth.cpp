#include "tsr/synth.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <string>
#include <utility>
#include <vector>

#include "font.hpp"
#include "tsr/detect.hpp"
#include "tsr/error.hpp"
#include "tsr/jsonl.hpp"
#include "tsr/odr.hpp"
#include "tsr/pgm.hpp"
#include "tsr/rng.hpp"
#include "tsr/segment.hpp"

namespace tsr {

namespace {

// ============================================================================
// Small math helpers
// ============================================================================

constexpr double kPi = 3.14159265358979323846;

std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t salt) {
  Rng r(seed ^ (salt * 0x9e3779b97f4a7c15ull));
  return r.next_u64();
}

double mix(double a, double b, double t) { return a + (b - a) * t; }

double clamp01(double v) { return std::clamp(v, 0.0, 1.0); }

std::uint8_t to_u8(double v) {
  return static_cast<std::uint8_t>(std::lround(std::clamp(v, 0.0, 255.0)));
}

/// Signed distance to an axis-aligned box centered at the origin.
double box_sd(double x, double y, double hw, double hh) {
  const double ax = std::abs(x) - hw;
  const double ay = std::abs(y) - hh;
  const double ox = std::max(ax, 0.0);
  const double oy = std::max(ay, 0.0);
  return std::hypot(ox, oy) + std::min(std::max(ax, ay), 0.0);
}

double segment_distance(double px, double py, double x0, double y0, double x1,
                        double y1) {
  const double dx = x1 - x0;
  const double dy = y1 - y0;
  const double len2 = dx * dx + dy * dy;
  double t = 0.0;
  if (len2 > 0.0) t = std::clamp(((px - x0) * dx + (py - y0) * dy) / len2, 0.0, 1.0);
  const double ex = x0 + t * dx - px;
  const double ey = y0 + t * dy - py;
  return std::hypot(ex, ey);
}

// ============================================================================
// Ink geometry
// ============================================================================

/// One placed glyph: its stroke polylines in sign-space coordinates plus the
/// stroke half-width.  digit_slot indexes RenderedSign::glyph_boxes; captions
/// and decorations use -1.
struct InkGlyph {
  std::vector<std::vector<std::pair<double, double>>> polylines;
  double half_width = 0.6;
  int digit_slot = -1;
  // Conservative sign-space bounds for cheap sample rejection.
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
};

double ink_distance(const InkGlyph& g, double px, double py) {
  double best = 1e30;
  for (const auto& poly : g.polylines) {
    if (poly.size() == 1) {
      best = std::min(best, std::hypot(px - poly[0].first, py - poly[0].second));
      continue;
    }
    for (std::size_t i = 0; i + 1 < poly.size(); ++i) {
      best = std::min(best, segment_distance(px, py, poly[i].first,
                                             poly[i].second, poly[i + 1].first,
                                             poly[i + 1].second));
      if (best <= 0.0) return 0.0;
    }
  }
  return best;
}

double ink_coverage(const InkGlyph& g, double px, double py) {
  if (px < g.x0 || px > g.x1 || py < g.y0 || py > g.y1) return 0.0;
  return clamp01(g.half_width + 0.5 - ink_distance(g, px, py));
}

/// Place one font glyph into the box [x, x+w] x [y, y+h] (sign space).
InkGlyph place_glyph(const fontdata::Glyph& f, double x, double y, double w,
                     double h, double half_width, int digit_slot) {
  InkGlyph g;
  g.half_width = half_width;
  g.digit_slot = digit_slot;
  g.x0 = 1e30;
  g.y0 = 1e30;
  g.x1 = -1e30;
  g.y1 = -1e30;
  for (const auto& stroke : f.strokes) {
    std::vector<std::pair<double, double>> pts;
    pts.reserve(stroke.pts.size());
    for (const auto& [u, v] : stroke.pts) {
      const double gx = x + u * w;
      const double gy = y + v * h;
      pts.emplace_back(gx, gy);
      g.x0 = std::min(g.x0, gx);
      g.y0 = std::min(g.y0, gy);
      g.x1 = std::max(g.x1, gx);
      g.y1 = std::max(g.y1, gy);
    }
    g.polylines.push_back(std::move(pts));
  }
  const double pad = half_width + 1.2;
  g.x0 -= pad;
  g.y0 -= pad;
  g.x1 += pad;
  g.y1 += pad;
  return g;
}

// ============================================================================
// Sign layout
// ============================================================================

struct SignLayout {
  RegionMode mode = RegionMode::EU;
  // EU geometry (sign space centered on the disc).
  double outer_radius = 0.0;
  double rim_inner = 0.0;
  // US geometry (sign space centered on the plate).
  double plate_hw = 0.0, plate_hh = 0.0;
  double border_center_hw = 0.0, border_center_hh = 0.0;
  double border_half_stroke = 0.0;
  double border_outer_hw = 0.0, border_outer_hh = 0.0;
  // Colors.
  double fg = 30.0, bg = 230.0, rim_value = 90.0;
  std::vector<InkGlyph> ink;
  int digit_count = 0;
};

/// Lay out the value digits centered at (0, center_y), total height `hd`.
void layout_digits(SignLayout& layout, const SignSpec& spec, double hd,
                   double center_y) {
  const std::string digits = std::to_string(spec.value);
  layout.digit_count = static_cast<int>(digits.size());
  std::vector<const fontdata::Glyph*> glyphs;
  double total_w = 0.0;
  // Wide enough that neighboring strokes stay 8-disconnected after
  // binarization even at small scales and heavy stroke weights.
  const double gap = 0.28 * hd;
  for (char ch : digits) {
    const auto& f = fontdata::lookup(ch, spec.font_variant);
    glyphs.push_back(&f);
    total_w += f.aspect * hd;
  }
  total_w += gap * (layout.digit_count - 1);
  double cur = -0.5 * total_w;
  const double y0 = center_y - 0.5 * hd;
  for (int i = 0; i < layout.digit_count; ++i) {
    const auto& f = *glyphs[static_cast<std::size_t>(i)];
    const double w = f.aspect * hd;
    const double hw = std::max(0.6, 0.08 * hd * f.stroke_factor * spec.stroke_scale);
    layout.ink.push_back(place_glyph(f, cur, y0, w, hd, hw, i));
    cur += w + gap;
  }
}

/// Lay out one caption word centered at (0, center_y), letter height `hl`.
void layout_word(SignLayout& layout, const SignSpec& spec, const char* word,
                 double hl, double center_y) {
  std::vector<const fontdata::Glyph*> glyphs;
  double total_w = 0.0;
  double gap = 0.0;
  for (const char* p = word; *p; ++p) {
    const auto& f = fontdata::lookup(*p, spec.font_variant);
    glyphs.push_back(&f);
    total_w += f.aspect * hl;
    gap = 0.30 * f.aspect * hl;
  }
  total_w += gap * (static_cast<double>(glyphs.size()) - 1.0);
  double cur = -0.5 * total_w;
  const double y0 = center_y - 0.5 * hl;
  for (const auto* f : glyphs) {
    const double w = f->aspect * hl;
    const double hw = std::max(0.5, 0.07 * hl * f->stroke_factor * spec.stroke_scale);
    layout.ink.push_back(place_glyph(*f, cur, y0, w, hl, hw, -1));
    cur += w + gap;
  }
}

SignLayout build_layout(const SignSpec& spec) {
  SignLayout layout;
  layout.mode = spec.mode;
  layout.fg = spec.foreground;
  layout.bg = spec.background;
  layout.rim_value = 0.3 * spec.background + 0.7 * spec.foreground;
  if (spec.mode == RegionMode::EU) {
    const double R = 0.5 * spec.scale;
    layout.outer_radius = R;
    layout.rim_inner = 0.82 * R;
    const std::string digits = std::to_string(spec.value);
    const double hd = (digits.size() >= 3 ? 0.38 : 0.50) * R;
    layout_digits(layout, spec, hd, 0.0);
  } else {
    const double s = spec.scale;
    layout.plate_hw = 0.40 * s;
    layout.plate_hh = 0.50 * s;
    layout.border_outer_hw = 0.35 * s;
    layout.border_outer_hh = 0.45 * s;
    layout.border_half_stroke = std::max(0.55, 0.5 * 0.035 * s);
    layout.border_center_hw = layout.border_outer_hw - layout.border_half_stroke;
    layout.border_center_hh = layout.border_outer_hh - layout.border_half_stroke;
    const char* line1 = spec.us_header == UsHeader::TruckSpeed ? "TRUCK" : "SPEED";
    const char* line2 = spec.us_header == UsHeader::TruckSpeed ? "SPEED" : "LIMIT";
    const double hl = 0.09 * s;
    layout_word(layout, spec, line1, hl, -0.28 * s);
    layout_word(layout, spec, line2, hl, -0.15 * s);
    layout_digits(layout, spec, 0.28 * s, 0.17 * s);
  }
  return layout;
}

void validate_spec(const SignSpec& spec) {
  const auto& legal = default_values(spec.mode);
  if (std::find(legal.begin(), legal.end(), spec.value) == legal.end())
    throw ArgumentError("render_sign: value " + std::to_string(spec.value) +
                        " is not legal for the selected region");
  if (std::abs(spec.tilt_deg) > 15.0)
    throw ArgumentError("render_sign: |tilt_deg| must be <= 15");
  if (spec.scale < 16.0 || spec.scale > 400.0)
    throw ArgumentError("render_sign: scale must be in [16, 400] pixels");
  if (spec.font_variant < 0 || spec.font_variant > 2)
    throw ArgumentError("render_sign: font_variant must be 0, 1 or 2");
  if (spec.stroke_scale <= 0.0 || spec.stroke_scale > 3.0)
    throw ArgumentError("render_sign: stroke_scale must be in (0, 3]");
  if (spec.foreground < 0 || spec.background > 255 ||
      spec.background - spec.foreground < 40)
    throw ArgumentError("render_sign: need 0 <= foreground <= background - 40 <= 215");
  if (spec.noise_sigma < 0.0)
    throw ArgumentError("render_sign: noise_sigma must be >= 0");
}

}  // namespace

// ============================================================================
// Sign rasterizer
// ============================================================================

RenderedSign render_sign(const SignSpec& spec) {
  validate_spec(spec);
  const SignLayout layout = build_layout(spec);

  const double pad = std::max(6.0, 0.15 * spec.scale);
  const int pw = static_cast<int>(std::ceil(
      (spec.mode == RegionMode::EU ? spec.scale : 0.8 * spec.scale) + 2 * pad));
  const int ph = static_cast<int>(std::ceil(spec.scale + 2 * pad));
  const double cx = 0.5 * pw;
  const double cy = 0.5 * ph;

  const double theta = spec.tilt_deg * kPi / 180.0;
  const double ct = std::cos(theta);
  const double st = std::sin(theta);

  RenderedSign out;
  out.patch.pixels.resize(ph, pw);
  out.alpha.resize(ph, pw);

  static constexpr double kOffsets[3] = {-1.0 / 3.0, 0.0, 1.0 / 3.0};

  for (int y = 0; y < ph; ++y) {
    for (int x = 0; x < pw; ++x) {
      double acc_color = 0.0;
      double acc_alpha = 0.0;
      for (double oy : kOffsets) {
        for (double ox : kOffsets) {
          const double dx = x + 0.5 + ox - cx;
          const double dy = y + 0.5 + oy - cy;
          // Patch -> upright sign space (undo the tilt).
          const double qx = ct * dx + st * dy;
          const double qy = -st * dx + ct * dy;

          double body_alpha;
          double color;
          if (spec.mode == RegionMode::EU) {
            const double d = std::hypot(qx, qy);
            body_alpha = clamp01(layout.outer_radius + 0.5 - d);
            if (body_alpha <= 0.0) {
              acc_color += layout.bg;
              continue;
            }
            const double rim_t = clamp01(d - (layout.rim_inner - 0.5));
            color = mix(layout.bg, layout.rim_value, rim_t);
          } else {
            const double sd = box_sd(qx, qy, layout.plate_hw, layout.plate_hh);
            body_alpha = clamp01(0.5 - sd);
            if (body_alpha <= 0.0) {
              acc_color += layout.bg;
              continue;
            }
            const double db =
                std::abs(box_sd(qx, qy, layout.border_center_hw, layout.border_center_hh));
            const double border_a = clamp01(layout.border_half_stroke + 0.5 - db);
            color = mix(layout.bg, layout.fg, border_a);
          }

          double ink_a = 0.0;
          for (const auto& glyph : layout.ink) {
            ink_a = std::max(ink_a, ink_coverage(glyph, qx, qy));
            if (ink_a >= 1.0) break;
          }
          color = mix(color, layout.fg, ink_a);

          acc_color += mix(layout.bg, color, body_alpha);
          acc_alpha += body_alpha;
        }
      }
      out.patch.pixels(y, x) = to_u8(acc_color / 9.0);
      out.alpha(y, x) = static_cast<float>(acc_alpha / 9.0);
    }
  }

  if (spec.noise_sigma > 0.0) {
    Rng rng(spec.seed);
    for (int y = 0; y < ph; ++y)
      for (int x = 0; x < pw; ++x)
        out.patch.pixels(y, x) =
            to_u8(out.patch.pixels(y, x) + rng.gaussian(0.0, spec.noise_sigma));
  }

  // --------------------------------------------------------------------------
  // Ground truth: per-digit tight ink boxes and the detector-level shape.
  // --------------------------------------------------------------------------
  out.glyph_boxes.assign(static_cast<std::size_t>(layout.digit_count), Rect{});
  for (const auto& glyph : layout.ink) {
    if (glyph.digit_slot < 0) continue;
    // Patch-space window of this glyph: rotate its sign-space bounds.
    double wx0 = 1e30, wy0 = 1e30, wx1 = -1e30, wy1 = -1e30;
    const double corners[4][2] = {{glyph.x0, glyph.y0},
                                  {glyph.x1, glyph.y0},
                                  {glyph.x1, glyph.y1},
                                  {glyph.x0, glyph.y1}};
    for (const auto& c : corners) {
      // Sign -> patch: apply the tilt.
      const double px = cx + ct * c[0] - st * c[1];
      const double py = cy + st * c[0] + ct * c[1];
      wx0 = std::min(wx0, px);
      wy0 = std::min(wy0, py);
      wx1 = std::max(wx1, px);
      wy1 = std::max(wy1, py);
    }
    const int ix0 = std::max(0, static_cast<int>(std::floor(wx0)) - 1);
    const int iy0 = std::max(0, static_cast<int>(std::floor(wy0)) - 1);
    const int ix1 = std::min(pw - 1, static_cast<int>(std::ceil(wx1)) + 1);
    const int iy1 = std::min(ph - 1, static_cast<int>(std::ceil(wy1)) + 1);
    int bx0 = pw, by0 = ph, bx1 = -1, by1 = -1;
    for (int y = iy0; y <= iy1; ++y) {
      for (int x = ix0; x <= ix1; ++x) {
        double cov = 0.0;
        for (double oy : kOffsets) {
          for (double ox : kOffsets) {
            const double dx = x + 0.5 + ox - cx;
            const double dy = y + 0.5 + oy - cy;
            const double qx = ct * dx + st * dy;
            const double qy = -st * dx + ct * dy;
            cov += ink_coverage(glyph, qx, qy);
          }
        }
        if (cov / 9.0 >= 0.5) {
          bx0 = std::min(bx0, x);
          by0 = std::min(by0, y);
          bx1 = std::max(bx1, x);
          by1 = std::max(by1, y);
        }
      }
    }
    if (bx1 < bx0)
      throw ShapeError("render_sign: a digit rasterized to no ink; scale too small");
    out.glyph_boxes[static_cast<std::size_t>(glyph.digit_slot)] =
        Rect{bx0, by0, bx1 - bx0 + 1, by1 - by0 + 1};
  }

  if (spec.mode == RegionMode::EU) {
    out.circle_cx = cx;
    out.circle_cy = cy;
    out.circle_radius = layout.outer_radius;
    const int x0 = static_cast<int>(std::lround(cx - layout.outer_radius));
    const int y0 = static_cast<int>(std::lround(cy - layout.outer_radius));
    const int side = static_cast<int>(std::lround(2.0 * layout.outer_radius));
    out.sign_bbox = Rect{x0, y0, side, side};
  } else {
    const double hw = layout.border_outer_hw;
    const double hh = layout.border_outer_hh;
    const double corners[4][2] = {{-hw, -hh}, {hw, -hh}, {hw, hh}, {-hw, hh}};
    double minx = 1e30, miny = 1e30, maxx = -1e30, maxy = -1e30;
    for (int i = 0; i < 4; ++i) {
      const double px = cx + ct * corners[i][0] - st * corners[i][1];
      const double py = cy + st * corners[i][0] + ct * corners[i][1];
      out.rect_corners[static_cast<std::size_t>(i)] = {px, py};
      minx = std::min(minx, px);
      miny = std::min(miny, py);
      maxx = std::max(maxx, px);
      maxy = std::max(maxy, py);
    }
    const int x0 = static_cast<int>(std::lround(minx));
    const int y0 = static_cast<int>(std::lround(miny));
    out.sign_bbox = Rect{x0, y0, static_cast<int>(std::lround(maxx)) - x0,
                         static_cast<int>(std::lround(maxy)) - y0};
  }
  return out;
}

// ============================================================================
// Digit corpus
// ============================================================================

namespace {

Eigen::VectorXd glyph_features(const DigitGlyph& glyph) {
  Eigen::VectorXd f(kGlyphSize * kGlyphSize);
  int i = 0;
  for (int y = 0; y < kGlyphSize; ++y)
    for (int x = 0; x < kGlyphSize; ++x) f(i++) = glyph.bitmap(y, x);
  return f;
}

/// Shape candidate built from render truth plus detector-like jitter, so the
/// corpus sees exactly the crops the live pipeline would produce.
ShapeCandidate truth_candidate(const RenderedSign& sign, const SignSpec& spec,
                               Rng& rng) {
  const double jx = static_cast<double>(rng.uniform_int(-2, 2));
  const double jy = static_cast<double>(rng.uniform_int(-2, 2));
  if (spec.mode == RegionMode::EU) {
    CircleCandidate c;
    c.cx = sign.circle_cx + jx;
    c.cy = sign.circle_cy + jy;
    c.radius = sign.circle_radius + static_cast<double>(rng.uniform_int(-1, 1));
    c.score = 1.0;
    return make_shape(c);
  }
  RectCandidate r;
  r.x = sign.sign_bbox.x + static_cast<int>(jx);
  r.y = sign.sign_bbox.y + static_cast<int>(jy);
  r.w = sign.sign_bbox.w + static_cast<int>(rng.uniform_int(-2, 2));
  r.h = sign.sign_bbox.h + static_cast<int>(rng.uniform_int(-2, 2));
  r.score = 1.0;
  return make_shape(r);
}

/// A small value-noise lattice for textured fills.
struct NoiseLattice {
  Plane<double> grid;
  double ox = 0.0, oy = 0.0;
  double cell = 4.0;

  double at(double x, double y) const {
    const double gx = std::clamp((x - ox) / cell, 0.0,
                                 static_cast<double>(grid.cols()) - 1.001);
    const double gy = std::clamp((y - oy) / cell, 0.0,
                                 static_cast<double>(grid.rows()) - 1.001);
    const int x0 = static_cast<int>(gx);
    const int y0 = static_cast<int>(gy);
    const double fx = gx - x0;
    const double fy = gy - y0;
    return grid(y0, x0) * (1 - fx) * (1 - fy) + grid(y0, x0 + 1) * fx * (1 - fy) +
           grid(y0 + 1, x0) * (1 - fx) * fy + grid(y0 + 1, x0 + 1) * fx * fy;
  }
};

NoiseLattice make_lattice(Rng& rng, double ox, double oy, double w, double h,
                          double cell, double base, double amp) {
  NoiseLattice lat;
  lat.ox = ox;
  lat.oy = oy;
  lat.cell = cell;
  const int gw = static_cast<int>(std::ceil(w / cell)) + 2;
  const int gh = static_cast<int>(std::ceil(h / cell)) + 2;
  lat.grid.resize(gh, gw);
  for (int y = 0; y < gh; ++y)
    for (int x = 0; x < gw; ++x) lat.grid(y, x) = base + rng.uniform(-amp, amp);
  return lat;
}

/// Non-digit tile families for NEGATIVE training examples: dark blob scatter,
/// partial rim arcs, and thresholdable texture.
Plane<std::uint8_t> negative_tile(int kind, Rng& rng) {
  const int side = static_cast<int>(rng.uniform_int(36, 56));
  Plane<std::uint8_t> tile(side, side);
  tile.setConstant(230);
  const double c = 0.5 * side;
  switch (kind % 3) {
    case 0: {
      const int blobs = static_cast<int>(rng.uniform_int(3, 6));
      for (int b = 0; b < blobs; ++b) {
        const double bx = rng.uniform(4.0, side - 4.0);
        const double by = rng.uniform(4.0, side - 4.0);
        const double br = rng.uniform(2.0, 6.0);
        const double bv = rng.uniform(20.0, 90.0);
        for (int y = 0; y < side; ++y)
          for (int x = 0; x < side; ++x) {
            const double d = std::hypot(x + 0.5 - bx, y + 0.5 - by);
            const double cov = clamp01(br + 0.5 - d);
            if (cov > 0.0)
              tile(y, x) = to_u8(tile(y, x) * (1 - cov) + bv * cov);
          }
      }
      break;
    }
    case 1: {
      const double r = rng.uniform(0.28 * side, 0.42 * side);
      const double hs = rng.uniform(1.0, 2.2);
      const double ang0 = rng.uniform(0.0, 2 * kPi);
      const double span = rng.uniform(kPi / 3.0, 5.0 * kPi / 6.0);
      const double ink = rng.uniform(25.0, 70.0);
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x) {
          const double dx = x + 0.5 - c;
          const double dy = y + 0.5 - c;
          const double ring = clamp01(hs + 0.5 - std::abs(std::hypot(dx, dy) - r));
          if (ring <= 0.0) continue;
          double delta = std::fmod(std::atan2(dy, dx) - ang0, 2 * kPi);
          if (delta < 0) delta += 2 * kPi;
          if (delta <= span)
            tile(y, x) = to_u8(tile(y, x) * (1 - ring) + ink * ring);
        }
      break;
    }
    default: {
      const auto lat = make_lattice(rng, 0, 0, side, side, 4.0, 150.0, 80.0);
      for (int y = 0; y < side; ++y)
        for (int x = 0; x < side; ++x)
          tile(y, x) = to_u8(lat.at(x + 0.5, y + 0.5));
      break;
    }
  }
  return tile;
}

/// Threshold a tile and normalize its most digit-like component, if any.
std::optional<DigitGlyph> tile_glyph(const Plane<std::uint8_t>& tile) {
  GrayFrame frame;
  frame.pixels = tile;
  const Rect all{0, 0, frame.width(), frame.height()};
  const int window = std::max(3, 2 * (frame.height() / 4) + 1);
  const BinaryImage binary = adaptive_threshold(frame, all, window, 8);
  const auto components = label_components(binary);
  const Component* best = nullptr;
  for (const auto& comp : components) {
    if (comp.bbox.h < 6 || comp.bbox.w < 2 || comp.area < 10) continue;
    if (best == nullptr || comp.area > best->area) best = &comp;
  }
  if (best == nullptr) return std::nullopt;
  return normalize_glyph(*best);
}

struct DigitSource {
  RegionMode mode;
  int value;
  int position;  ///< which digit of the value's decimal string
};

std::array<std::vector<DigitSource>, 10> digit_sources() {
  std::array<std::vector<DigitSource>, 10> sources;
  for (RegionMode mode : {RegionMode::EU, RegionMode::US}) {
    for (int value : default_values(mode)) {
      const std::string s = std::to_string(value);
      for (int pos = 0; pos < static_cast<int>(s.size()); ++pos)
        sources[static_cast<std::size_t>(s[static_cast<std::size_t>(pos)] - '0')]
            .push_back(DigitSource{mode, value, pos});
    }
  }
  return sources;
}

}  // namespace

DigitDataset generate_digit_corpus(int n_per_class, const CorpusRanges& ranges,
                                   std::uint64_t seed) {
  if (n_per_class < 1)
    throw ArgumentError("generate_digit_corpus: n_per_class must be >= 1");
  if (ranges.scale_min < 20.0 || ranges.scale_max < ranges.scale_min)
    throw ArgumentError("generate_digit_corpus: bad scale range");

  DigitDataset ds;
  ds.feature_dim = kGlyphSize * kGlyphSize;
  ds.num_classes = 10;

  const auto sources = digit_sources();
  Rng rng(mix_seed(seed, 0xD161));

  for (int digit = 0; digit < 10; ++digit) {
    const auto& options = sources[static_cast<std::size_t>(digit)];
    int made = 0;
    std::uint64_t attempt = 0;
    const std::uint64_t attempt_limit =
        8ull * static_cast<std::uint64_t>(n_per_class) + 100;
    while (made < n_per_class) {
      if (attempt > attempt_limit)
        throw Error("generate_digit_corpus: segmentation kept missing digit " +
                    std::to_string(digit));
      const auto& src =
          options[(static_cast<std::size_t>(made) + attempt) % options.size()];
      SignSpec spec;
      spec.mode = src.mode;
      spec.value = src.value;
      spec.font_variant = made % 3;
      spec.stroke_scale = rng.uniform(0.85, 1.15);
      spec.tilt_deg = rng.uniform(-ranges.tilt_max, ranges.tilt_max);
      spec.scale = rng.uniform(ranges.scale_min, ranges.scale_max);
      spec.noise_sigma = rng.uniform(0.0, ranges.noise_max);
      spec.seed = mix_seed(seed, 0x1000003ull * static_cast<std::uint64_t>(digit) +
                                     37ull * static_cast<std::uint64_t>(made) +
                                     attempt);
      const RenderedSign sign = render_sign(spec);

      const ShapeCandidate cand = truth_candidate(sign, spec, rng);
      const auto glyphs = segment_roi(sign.patch, cand, SegmentConfig{});
      const Rect want = sign.glyph_boxes[static_cast<std::size_t>(src.position)];
      const DigitGlyph* hit = nullptr;
      double best_iou = 0.0;
      for (const auto& glyph : glyphs) {
        const double overlap = iou(glyph.source_bbox, want);
        if (overlap > best_iou) {
          best_iou = overlap;
          hit = &glyph;
        }
      }
      if (hit == nullptr || best_iou < 0.4) {
        ++attempt;
        continue;
      }
      ds.features.push_back(glyph_features(*hit));
      ds.labels.push_back(digit);
      ++made;
    }
  }

  const int total_negative = 10 * n_per_class;
  int made = 0;
  std::uint64_t salt = 0;
  while (made < total_negative) {
    if (salt > 40ull * static_cast<std::uint64_t>(total_negative) + 1000)
      throw Error("generate_digit_corpus: negative tiles kept yielding no components");
    Rng trng(mix_seed(seed, 0x4E60000 + salt));
    const auto glyph = tile_glyph(negative_tile(made + static_cast<int>(salt % 3), trng));
    ++salt;
    if (!glyph.has_value()) continue;
    ds.features.push_back(glyph_features(*glyph));
    ds.labels.push_back(kNegativeLabel);
    ++made;
  }
  return ds;
}

// ============================================================================
// Header corpus
// ============================================================================

DigitDataset generate_header_corpus(int n_per_class, const CorpusRanges& ranges,
                                    std::uint64_t seed) {
  if (n_per_class < 1)
    throw ArgumentError("generate_header_corpus: n_per_class must be >= 1");

  DigitDataset ds;
  ds.feature_dim = kHeaderFeatureDim;
  ds.num_classes = 2;

  Rng rng(mix_seed(seed, 0x8EAD));
  const auto& us_values = default_values(RegionMode::US);

  auto header_from_sign = [&](UsHeader caption, int index) {
    SignSpec spec;
    spec.mode = RegionMode::US;
    spec.value = us_values[static_cast<std::size_t>(index) % us_values.size()];
    spec.font_variant = index % 3;
    spec.stroke_scale = rng.uniform(0.85, 1.15);
    spec.tilt_deg = rng.uniform(-ranges.tilt_max, ranges.tilt_max);
    spec.scale = rng.uniform(ranges.scale_min, ranges.scale_max);
    spec.noise_sigma = rng.uniform(0.0, ranges.noise_max);
    spec.seed = mix_seed(seed, 0xCAB0000ull + static_cast<std::uint64_t>(index) * 11 +
                                   (caption == UsHeader::TruckSpeed ? 5 : 0));
    spec.us_header = caption;
    const RenderedSign sign = render_sign(spec);
    const ShapeCandidate cand = truth_candidate(sign, spec, rng);
    if (!cand.header.has_value() ||
        !cand.header->inside(sign.patch.width(), sign.patch.height()))
      return Eigen::VectorXd();  // retry marker
    return header_features(sign.patch, *cand.header);
  };

  const int attempt_limit = 8 * n_per_class + 100;

  // Class 0: genuine speed-limit captions.
  int made = 0;
  int index = 0;
  while (made < n_per_class) {
    if (index > attempt_limit)
      throw Error("generate_header_corpus: header crops kept leaving the patch");
    const Eigen::VectorXd f = header_from_sign(UsHeader::SpeedLimit, index++);
    if (f.size() == 0) continue;
    ds.features.push_back(f);
    ds.labels.push_back(0);
    ++made;
  }

  // Class 1: everything else the verifier must turn away.
  made = 0;
  index = 0;
  while (made < n_per_class) {
    if (index > attempt_limit)
      throw Error("generate_header_corpus: header crops kept leaving the patch");
    const int kind = made % 3;
    Eigen::VectorXd f;
    if (kind == 0) {
      f = header_from_sign(UsHeader::TruckSpeed, index++);
      if (f.size() == 0) continue;
    } else if (kind == 1) {
      // Blank plate: flat luminance, below the contrast floor.
      GrayFrame frame;
      frame.pixels.resize(26, 72);
      const double base = rng.uniform(200.0, 240.0);
      for (int y = 0; y < 26; ++y)
        for (int x = 0; x < 72; ++x)
          frame.pixels(y, x) = to_u8(base + rng.uniform(-3.0, 3.0));
      f = header_features(frame, Rect{0, 0, 72, 26});
    } else {
      // Texture crop with caption-scale contrast.
      GrayFrame frame;
      frame.pixels.resize(26, 72);
      Rng trng(mix_seed(seed, 0x7E70000ull + static_cast<std::uint64_t>(made)));
      const auto lat = make_lattice(trng, 0, 0, 72, 26, 5.0, 150.0, 75.0);
      for (int y = 0; y < 26; ++y)
        for (int x = 0; x < 72; ++x)
          frame.pixels(y, x) = to_u8(lat.at(x + 0.5, y + 0.5));
      f = header_features(frame, Rect{0, 0, 72, 26});
    }
    ds.features.push_back(f);
    ds.labels.push_back(1);
    ++made;
  }
  return ds;
}

// ============================================================================
// Scenario generation
// ============================================================================

namespace {

void blend_pixel(Plane<std::uint8_t>& img, int x, int y, double value,
                 double cov) {
  if (cov <= 0.0) return;
  if (x < 0 || y < 0 || x >= img.cols() || y >= img.rows()) return;
  img(y, x) = to_u8(img(y, x) * (1.0 - cov) + value * cov);
}

void draw_disc(Plane<std::uint8_t>& img, double cx, double cy, double r,
               double value) {
  const int x0 = static_cast<int>(std::floor(cx - r - 1));
  const int x1 = static_cast<int>(std::ceil(cx + r + 1));
  const int y0 = static_cast<int>(std::floor(cy - r - 1));
  const int y1 = static_cast<int>(std::ceil(cy + r + 1));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      blend_pixel(img, x, y, value, clamp01(r + 0.5 - d));
    }
}

void draw_arc(Plane<std::uint8_t>& img, double cx, double cy, double r,
              double hs, double ang0, double span, double value) {
  const double reach = r + hs + 1;
  const int x0 = static_cast<int>(std::floor(cx - reach));
  const int x1 = static_cast<int>(std::ceil(cx + reach));
  const int y0 = static_cast<int>(std::floor(cy - reach));
  const int y1 = static_cast<int>(std::ceil(cy + reach));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double dx = x + 0.5 - cx;
      const double dy = y + 0.5 - cy;
      const double ring = clamp01(hs + 0.5 - std::abs(std::hypot(dx, dy) - r));
      if (ring <= 0.0) continue;
      double delta = std::fmod(std::atan2(dy, dx) - ang0, 2 * kPi);
      if (delta < 0) delta += 2 * kPi;
      if (delta <= span) blend_pixel(img, x, y, value, ring);
    }
}

/// Full dark ring whose interior carries a faint texture: a circle candidate
/// the recognizer must reject.
void draw_textured_ring(Plane<std::uint8_t>& img, double cx, double cy,
                        double r, double hs, double value, Rng& rng) {
  const auto lat = make_lattice(rng, cx - r, cy - r, 2 * r, 2 * r, 3.0, 215.0, 7.0);
  const double reach = r + hs + 1;
  const int x0 = static_cast<int>(std::floor(cx - reach));
  const int x1 = static_cast<int>(std::ceil(cx + reach));
  const int y0 = static_cast<int>(std::floor(cy - reach));
  const int y1 = static_cast<int>(std::ceil(cy + reach));
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double d = std::hypot(x + 0.5 - cx, y + 0.5 - cy);
      if (d <= r - hs - 0.5) {
        blend_pixel(img, x, y, lat.at(x + 0.5, y + 0.5), 1.0);
      } else {
        blend_pixel(img, x, y, value, clamp01(hs + 0.5 - std::abs(d - r)));
      }
    }
}

void draw_rect_outline(Plane<std::uint8_t>& img, double cx, double cy,
                       double hw, double hh, double hs, double value,
                       Rng& rng, bool textured) {
  const auto lat =
      make_lattice(rng, cx - hw, cy - hh, 2 * hw, 2 * hh, 3.0, 215.0, 7.0);
  const int x0 = static_cast<int>(std::floor(cx - hw - 1));
  const int x1 = static_cast<int>(std::ceil(cx + hw + 1));
  const int y0 = static_cast<int>(std::floor(cy - hh - 1));
  const int y1 = static_cast<int>(std::ceil(cy + hh + 1));
  const double chw = hw - hs;
  const double chh = hh - hs;
  for (int y = y0; y <= y1; ++y)
    for (int x = x0; x <= x1; ++x) {
      const double sd = box_sd(x + 0.5 - cx, y + 0.5 - cy, chw, chh);
      if (textured && sd <= -(hs + 0.5)) {
        blend_pixel(img, x, y, lat.at(x + 0.5, y + 0.5), 1.0);
      } else {
        blend_pixel(img, x, y, value, clamp01(hs + 0.5 - std::abs(sd)));
      }
    }
}

void draw_clutter(Plane<std::uint8_t>& img, const Rect& area, Rng& rng) {
  const int segments = static_cast<int>(rng.uniform_int(3, 6));
  for (int s = 0; s < segments; ++s) {
    const double ax = rng.uniform(area.x, area.right());
    const double ay = rng.uniform(area.y, area.bottom());
    const double bx = rng.uniform(area.x, area.right());
    const double by = rng.uniform(area.y, area.bottom());
    const double hs = rng.uniform(0.6, 1.3);
    const double value = rng.uniform(30.0, 90.0);
    const int x0 = static_cast<int>(std::floor(std::min(ax, bx) - hs - 1));
    const int x1 = static_cast<int>(std::ceil(std::max(ax, bx) + hs + 1));
    const int y0 = static_cast<int>(std::floor(std::min(ay, by) - hs - 1));
    const int y1 = static_cast<int>(std::ceil(std::max(ay, by) + hs + 1));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x) {
        const double d = segment_distance(x + 0.5, y + 0.5, ax, ay, bx, by);
        blend_pixel(img, x, y, value, clamp01(hs + 0.5 - d));
      }
  }
}

void draw_stripes(Plane<std::uint8_t>& img, const Rect& area, int period,
                  double v0, double v1) {
  for (int y = std::max(0, area.y); y < std::min<int>(img.rows(), area.bottom()); ++y)
    for (int x = std::max(0, area.x); x < std::min<int>(img.cols(), area.right()); ++x)
      img(y, x) = to_u8(((x - area.x) % period) * 2 < period ? v0 : v1);
}

bool intersects_any(const Rect& r, const std::vector<Rect>& zones) {
  for (const auto& z : zones)
    if (!r.intersect(z).empty()) return true;
  return false;
}

/// One random roadside distraction drawn into `img`, avoiding `forbidden`.
void place_distractor(Plane<std::uint8_t>& img, Rng& rng,
                      const std::vector<Rect>& forbidden) {
  const int w = static_cast<int>(img.cols());
  const int h = static_cast<int>(img.rows());
  for (int attempt = 0; attempt < 60; ++attempt) {
    const int type = static_cast<int>(rng.uniform_int(0, 5));
    double size = rng.uniform(24.0, 64.0);
    const double half = 0.5 * size + 4.0;
    const double cx = rng.uniform(half, w - half);
    const double cy = rng.uniform(half, h - half);
    const Rect bbox{static_cast<int>(cx - half), static_cast<int>(cy - half),
                    static_cast<int>(2 * half), static_cast<int>(2 * half)};
    if (intersects_any(bbox, forbidden)) continue;
    // One rng draw per statement: argument evaluation order is unspecified,
    // and generated scenes must be bit-identical everywhere.
    switch (type) {
      case 0: {
        const double r = rng.uniform(10.0, 0.45 * size);
        const double v = rng.uniform(40.0, 120.0);
        draw_disc(img, cx, cy, r, v);
        break;
      }
      case 1: {
        const double r = rng.uniform(12.0, 0.5 * size);
        const double hs = rng.uniform(1.0, 2.2);
        const double ang0 = rng.uniform(0.0, 2 * kPi);
        const double span = rng.uniform(kPi / 3, 5 * kPi / 6);
        const double v = rng.uniform(25.0, 70.0);
        draw_arc(img, cx, cy, r, hs, ang0, span, v);
        break;
      }
      case 2: {
        const double r = rng.uniform(12.0, 0.5 * size);
        const double hs = rng.uniform(1.0, 2.4);
        const double v = rng.uniform(30.0, 60.0);
        draw_textured_ring(img, cx, cy, r, hs, v, rng);
        break;
      }
      case 3: {
        const double hh = 0.5 * rng.uniform(0.7 * size, size);
        const double hw = hh * rng.uniform(0.6, 1.05);
        const double hs = rng.uniform(0.8, 1.4);
        const double v = rng.uniform(30.0, 70.0);
        draw_rect_outline(img, cx, cy, hw, hh, hs, v, rng, true);
        break;
      }
      case 4:
        draw_clutter(img,
                     Rect{static_cast<int>(cx - 0.5 * size),
                          static_cast<int>(cy - 0.5 * size),
                          static_cast<int>(size), static_cast<int>(size)},
                     rng);
        break;
      default:
        draw_stripes(img,
                     Rect{static_cast<int>(cx - 0.5 * size),
                          static_cast<int>(cy - 0.5 * size),
                          static_cast<int>(size), static_cast<int>(size)},
                     static_cast<int>(rng.uniform_int(4, 8)), 120.0, 210.0);
        break;
    }
    return;
  }
}

}  // namespace

std::vector<TrajectoryPoint> make_approach(const ScenarioSpec& spec,
                                           double scale_from, double scale_to) {
  if (spec.frame_count < 1)
    throw ArgumentError("make_approach: frame_count must be >= 1");
  if (scale_from <= 0 || scale_to <= 0)
    throw ArgumentError("make_approach: scales must be positive");
  Rng rng(mix_seed(spec.seed, 0xA993));
  const double w = spec.width;
  const double h = spec.height;

  auto clamp_margin = [](double c, double margin, double extent) {
    return std::clamp(c, margin, extent - margin);
  };
  const double m_from = 0.75 * scale_from + 12.0;
  const double m_to = 0.75 * scale_to + 12.0;

  double cx_end = clamp_margin(w * rng.uniform(0.52, 0.70), m_to, w);
  double cy_end = clamp_margin(h * rng.uniform(0.34, 0.48), m_to, h);
  double cx_start = clamp_margin(cx_end + w * rng.uniform(-0.06, 0.06), m_from, w);
  double cy_start = clamp_margin(cy_end + h * rng.uniform(-0.05, 0.05), m_from, h);

  std::vector<TrajectoryPoint> traj;
  traj.reserve(static_cast<std::size_t>(spec.frame_count));
  for (int i = 0; i < spec.frame_count; ++i) {
    const double t =
        spec.frame_count == 1 ? 1.0 : static_cast<double>(i) / (spec.frame_count - 1);
    TrajectoryPoint p;
    p.cx = mix(cx_start, cx_end, t);
    p.cy = mix(cy_start, cy_end, t);
    p.scale = mix(scale_from, scale_to, t);
    traj.push_back(p);
  }
  return traj;
}

GeneratedSequence generate_sequence(const ScenarioSpec& spec,
                                    const std::string& out_dir,
                                    const std::string& truth_path) {
  if (spec.frame_count < 1)
    throw ArgumentError("generate_sequence: frame_count must be >= 1");
  if (spec.width < 64 || spec.height < 64)
    throw ArgumentError("generate_sequence: frame must be at least 64x64");
  if (spec.sign.has_value() &&
      static_cast<int>(spec.trajectory.size()) != spec.frame_count)
    throw ArgumentError("generate_sequence: need one trajectory point per frame");
  if (spec.noise_sigma < 0)
    throw ArgumentError("generate_sequence: noise_sigma must be >= 0");

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec)
    throw IoError("generate_sequence: cannot create directory " + out_dir + ": " +
                  ec.message());

  // Static scene: smooth background plus persistent roadside distractors.
  Plane<std::uint8_t> base(spec.height, spec.width);
  {
    Rng brng(mix_seed(spec.seed, 0xBA5E));
    const auto lat =
        make_lattice(brng, 0, 0, spec.width, spec.height, 16.0, 165.0, 25.0);
    for (int y = 0; y < spec.height; ++y)
      for (int x = 0; x < spec.width; ++x)
        base(y, x) = to_u8(lat.at(x + 0.5, y + 0.5));
  }

  std::vector<Rect> forbidden;
  if (spec.sign.has_value()) {
    for (const auto& p : spec.trajectory) {
      const int half = static_cast<int>(std::ceil(0.8 * p.scale)) + 6;
      forbidden.push_back(Rect{static_cast<int>(p.cx) - half,
                               static_cast<int>(p.cy) - half, 2 * half, 2 * half});
    }
  }
  {
    Rng drng(mix_seed(spec.seed, 0xD157));
    for (int k = 0; k < spec.distractor_count; ++k)
      place_distractor(base, drng, forbidden);
  }

  const bool counts_as_sign =
      spec.sign.has_value() && !(spec.sign->mode == RegionMode::US &&
                                 spec.sign->us_header == UsHeader::TruckSpeed);
  GroundTruth truth;
  truth.sign_id = 0;
  truth.value = spec.sign.has_value() ? spec.sign->value : 0;

  GeneratedSequence result;
  for (int i = 0; i < spec.frame_count; ++i) {
    GrayFrame frame;
    frame.pixels = base;
    frame.frame_index = i;

    if (spec.sign.has_value()) {
      SignSpec ss = *spec.sign;
      ss.scale = spec.trajectory[static_cast<std::size_t>(i)].scale;
      ss.noise_sigma = 0.0;
      ss.seed = mix_seed(spec.seed, 0x516E00ull + static_cast<std::uint64_t>(i));
      const RenderedSign sign = render_sign(ss);
      const int ox = static_cast<int>(
          std::lround(spec.trajectory[static_cast<std::size_t>(i)].cx -
                      0.5 * sign.patch.width()));
      const int oy = static_cast<int>(
          std::lround(spec.trajectory[static_cast<std::size_t>(i)].cy -
                      0.5 * sign.patch.height()));
      for (int y = 0; y < sign.patch.height(); ++y) {
        const int fy = y + oy;
        if (fy < 0 || fy >= spec.height) continue;
        for (int x = 0; x < sign.patch.width(); ++x) {
          const int fx = x + ox;
          if (fx < 0 || fx >= spec.width) continue;
          const double a = sign.alpha(y, x);
          if (a <= 0.0) continue;
          frame.pixels(fy, fx) =
              to_u8(sign.patch.pixels(y, x) * a + frame.pixels(fy, fx) * (1.0 - a));
        }
      }
      if (counts_as_sign) {
        Rect bbox = sign.sign_bbox;
        bbox.x += ox;
        bbox.y += oy;
        truth.frames.emplace_back(i, bbox);
      }
    }

    if (spec.noise_sigma > 0.0) {
      Rng nrng(mix_seed(spec.seed, 0xF00D00ull + static_cast<std::uint64_t>(i)));
      for (int y = 0; y < spec.height; ++y)
        for (int x = 0; x < spec.width; ++x)
          frame.pixels(y, x) =
              to_u8(frame.pixels(y, x) + nrng.gaussian(0.0, spec.noise_sigma));
    }

    char name[32];
    std::snprintf(name, sizeof(name), "frame_%06d.pgm", i);
    save_frame(frame, (std::filesystem::path(out_dir) / name).string());
    ++result.frames_written;
  }

  std::vector<GroundTruth> truth_list;
  if (counts_as_sign) {
    result.truth = truth;
    truth_list.push_back(truth);
  }
  if (!truth_path.empty()) write_truth(truth_path, truth_list);
  return result;
}

}  // namespace tsr
