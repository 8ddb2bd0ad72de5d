#pragma once

#include <span>
#include <string>

#include "uca/angle.hpp"
#include "uca/raster.hpp"

namespace uca {

/// Overlay in raster pixel coordinates: lines coloured by region, landmarks as
/// dots, and each curve's two contributing lines highlighted and labelled with
/// its angle.
std::string render_overlay_svg(int width, int height, std::span<const Landmark> landmarks,
                               std::span<const VertebraLine> lines, const UcaResult& uca);

}  // namespace uca
