#pragma once

#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "stroke_painter/geometry.hpp"
#include "stroke_painter/image.hpp"

namespace stroke_painter {

/// Binary region masks S[1..L], ranked in increasing order of saliency (maps[0] is S[1]).
struct RankedSaliency {
  std::vector<Plane> maps;
};

struct LayeredMask {
  Plane values;
  int layer = 0;
};

/// Two-layer mask: 1 - saliency * (1 - layer).
LayeredMask layered_mask(const SaliencyMap& saliency, int layer, int num_layers = 2);

/// L-layer mask: 1 - union_{k=1}^{L-layer} S[k], union taken as the pixelwise max.
LayeredMask layered_mask_ranked(const RankedSaliency& ranked, int layer, int num_layers);

/// Mean over pixels and channels of ((image - canvas) * mask)^2.
double masked_distance(const Canvas& image, const Canvas& canvas, const Plane& mask);

/// Distance between image and canvas under a mask; lower is closer.
using MaskedDistance = std::function<double(const Canvas&, const Canvas&, const Plane&)>;

/// Improvement of the masked distance from canvas_before to canvas_after (positive is
/// better). The distance is pluggable; masked mean squared error by default.
double layer_reward(const Canvas& image, const Canvas& canvas_before, const Canvas& canvas_after,
                    const Plane& mask, const MaskedDistance& distance = masked_distance);

/// Spectral-residual saliency, normalized to [0, 1]. All zeros when the image (or the
/// response) has dynamic range below 1e-9.
SaliencyMap heuristic_saliency(const Canvas& image);

/// Mean saliency inside a window; 0 for windows covering no pixel centers.
double mean_saliency(const SaliencyMap& saliency, const Window& box);

/// Tight box around saliency > threshold, or nullopt when nothing exceeds it.
std::optional<Window> saliency_box(const SaliencyMap& saliency, double threshold = 0.5);

Plane binarize(const Plane& values, double threshold = 0.5);

/// Object boxes sorted by descending mean saliency; ties by larger area, then index.
std::vector<std::size_t> rank_boxes(const SaliencyMap& saliency, std::span<const Window> boxes);

/// Splits ranked objects into num_layers - 1 foreground groups and builds S[1..L] so that
/// layer l reveals groups 1..l (most salient first). S[1] is empty, so the last layer is
/// unmasked. Salient pixels outside every box fall into the last group.
RankedSaliency build_ranked_saliency(const SaliencyMap& saliency, std::span<const Window> boxes,
                                     int num_layers, double threshold = 0.5);

/// Which ranked objects (indices into boxes) are painted in foreground layer `layer`.
std::vector<std::size_t> objects_for_layer(const SaliencyMap& saliency,
                                           std::span<const Window> boxes, int layer,
                                           int num_layers);

}  // namespace stroke_painter
