#pragma once

#include <cstddef>
#include <vector>

#include "stroke_painter/geometry.hpp"

namespace stroke_painter {

struct SequenceEntry {
  int layer = 0;
  int timestep = 0;
  Stroke stroke;
  /// Importance gate; 0 marks a pruned stroke.
  double importance = 1.0;
  Window window = Window::full();

  bool active() const { return importance > 0.0; }
  bool operator==(const SequenceEntry&) const = default;
};

/// Ordered painting sequence, sorted by (layer, timestep).
struct StrokeSequence {
  std::vector<SequenceEntry> entries;

  std::size_t size() const { return entries.size(); }
  bool empty() const { return entries.empty(); }
  std::size_t active_count() const;
  int layer_count() const;
  bool is_sorted() const;

  /// Copy with importance == 0 entries removed.
  StrokeSequence without_pruned() const;

  bool operator==(const StrokeSequence&) const = default;
};

}  // namespace stroke_painter
