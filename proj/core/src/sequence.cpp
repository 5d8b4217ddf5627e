#include "stroke_painter/sequence.hpp"

#include <algorithm>

namespace stroke_painter {

std::size_t StrokeSequence::active_count() const {
  return static_cast<std::size_t>(
      std::count_if(entries.begin(), entries.end(), [](const SequenceEntry& e) { return e.active(); }));
}

int StrokeSequence::layer_count() const {
  int layers = 0;
  for (const auto& e : entries) layers = std::max(layers, e.layer + 1);
  return layers;
}

bool StrokeSequence::is_sorted() const {
  return std::is_sorted(entries.begin(), entries.end(),
                        [](const SequenceEntry& a, const SequenceEntry& b) {
                          return a.layer != b.layer ? a.layer < b.layer : a.timestep < b.timestep;
                        });
}

StrokeSequence StrokeSequence::without_pruned() const {
  StrokeSequence out;
  std::copy_if(entries.begin(), entries.end(), std::back_inserter(out.entries),
               [](const SequenceEntry& e) { return e.active(); });
  return out;
}

}  // namespace stroke_painter
