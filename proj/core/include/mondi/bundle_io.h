#pragma once

#include <filesystem>
#include <map>
#include <string>

#include "mondi/bundle.h"
#include "mondi/ensemble.h"

namespace mondi {

// Line-oriented key=value text. Blank lines and lines starting with '#' are
// ignored. Duplicate keys are a FormatError.
using KeyValues = std::map<std::string, std::string>;
KeyValues parse_key_values(const std::string& text);

// Shortest decimal text that reads back to the same double.
std::string format_double(double v);
double parse_double(const std::string& text, const std::string& key);

// Bundle directory layout: manifest.txt plus one PFM per grid. Poses and
// intrinsics are stored in the manifest as exact decimal text.
void write_bundle(const std::filesystem::path& dir, const SceneBundle& bundle);
SceneBundle read_bundle(const std::filesystem::path& dir);

// Distillation outputs: distilled, residual, monitor and selection PFMs plus
// product.txt with per-teacher beta and Z. Residual validity is implied by a
// non-zero selection.
void write_product(const std::filesystem::path& dir, const DistillationProduct& product);
DistillationProduct read_product(const std::filesystem::path& dir);

// Rounds the product's grids to float precision so that it matches what
// write_product stores.
void quantize_to_float(DistillationProduct& product);

}  // namespace mondi
