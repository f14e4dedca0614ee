#pragma once

// Independent test oracles. These deliberately use naive algorithms so they
// share no code with the implementations they check.

#include <cmath>
#include <random>
#include <vector>

#include "fmo/geometry.hpp"
#include "fmo/image.hpp"

namespace oracle {

// Recursive flood fill component count (8-connectivity).
int flood_fill_component_count(const fmo::BinaryImage& b);

// O(n^2) exact Euclidean distance: for each mask pixel, min distance to any
// non-mask pixel center within the given rect (everything outside the rect is
// background too).
fmo::GrayImage brute_force_edt(const std::vector<fmo::Pixel>& mask, const fmo::Rect& rect);

// Alpha matte by brute force: the segment is sampled at 4x supersampling and
// each sample deposits a disc indicator; the average over samples approximates
// the normalized path-disc convolution.
double brute_force_alpha(fmo::Vec2 p, fmo::Vec2 seg_start, fmo::Vec2 seg_end, double r,
                         int samples_per_px = 4);

// Paints an ideal motion streak into `img`: each pixel blended with `color`
// by the closed-form alpha of a swept disc. Used to build detector/tracker
// inputs without going through the renderer under test.
void paint_streak(fmo::Frame& img, fmo::Vec2 s, fmo::Vec2 e, double r, fmo::Rgb color);

// Paints a solid disc (hard indicator).
void paint_disc(fmo::Frame& img, fmo::Vec2 c, double r, fmo::Rgb color);

// Uniformly colored frame with optional seeded Gaussian noise.
fmo::Frame flat_frame(int w, int h, fmo::Rgb c, double sigma = 0.0, unsigned seed = 0);

// Capsule outline polygon (stadium shape) around segment [s,e] with radius r.
std::vector<fmo::Vec2> capsule_polygon(fmo::Vec2 s, fmo::Vec2 e, double r, int arc_steps = 16);

}  // namespace oracle
