#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "fmo/blur_operator.hpp"
#include "fmo/eval.hpp"

namespace fmo {

// Scene description for the forward-model renderer. Text form: key=value
// lines plus one `point=x,y` line per trajectory control point.
struct SceneSpec {
    int width = 0;
    int height = 0;
    int frame_count = 0;
    double epsilon = 0.5;
    double noise_sigma = 0.0;
    bool half_px_jitter = false;   // decouples render/estimation discretization

    Rgb bg_color{0.3, 0.5, 0.4};
    std::string background_file;   // optional PPM; overrides bg_color

    bool spherical = false;
    double radius = 8.0;
    Rgb color{0.8, 0.2, 0.2};
    std::string texture_file;      // optional PPM appearance/texture
    std::optional<RotationParams> rotation;

    std::vector<Vec2> trajectory;  // control points over [0, frame_count]

    // Object center at continuous frame time tau in [0, frame_count].
    Vec2 position(double tau) const;
};

SceneSpec parse_scene(std::istream& in, const std::string& name);
SceneSpec read_scene(const std::string& path);

struct RenderedSequence {
    std::vector<Frame> frames;
    std::vector<GrayImage> alphas;              // full-frame alpha per frame
    std::vector<LinearSegment> segments;        // exposed segment per frame
    std::vector<FrameAnnotation> annotations;   // capsule regions, eval format
    std::vector<DetectionRecord> truth;         // ground truth in detection format
};

// Renders the scene per the formation model: each frame composites the
// object swept along the exposed fraction of its inter-frame displacement
// over the background, then seeded Gaussian noise is added and clamped.
// Throws std::invalid_argument when the trajectory leaves the frame.
RenderedSequence render_sequence(const SceneSpec& spec, std::uint64_t seed);

// The appearance used for re-rendering in super-resolution and highlighting.
struct RenderAppearance {
    const FlatAppearance* flat = nullptr;       // exactly one of these set
    const SphereTexture* sphere = nullptr;
    std::optional<RotationParams> rotation;     // used with sphere
};

struct SuperresResult {
    std::vector<Frame> frames;         // frame_count * factor images
    std::vector<bool> synthesized;     // false where the input frame passed through
};

// n-fold temporal super-resolution: each original frame becomes n frames,
// frame j re-rendering the path fraction [j/n,(j+1)/n] over an inpainted
// background (temporal median of neighboring frames outside their streak
// masks). Frames without a detection pass through unchanged.
SuperresResult temporal_superres(const std::vector<Frame>& frames,
                                 const std::vector<DetectionRecord>& dets,
                                 const RenderAppearance& appearance, int factor);

struct HighlightStyle {
    enum class Kind { recolor, scale } kind = Kind::recolor;
    Rgb color;            // recolor target
    double factor = 1.0;  // radius scale
};

// Streak highlighting: re-renders each detection's streak with a replaced
// color or scaled radius; pixels outside both the old and new streak are
// bit-identical to the input.
std::vector<Frame> highlight(const std::vector<Frame>& frames,
                             const std::vector<DetectionRecord>& dets,
                             const HighlightStyle& style);

// Background estimate used by superres/highlight: per-pixel temporal median
// of frames t-2..t+2, excluding each frame's streak mask.
Frame inpaint_background(const std::vector<Frame>& frames,
                         const std::vector<DetectionRecord>& dets, size_t t);

}  // namespace fmo
