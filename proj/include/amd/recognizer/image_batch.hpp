// Copyright 2026 The AMD Toolkit Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstddef>
#include <vector>

namespace amd::model {

/// Height-normalized grayscale images right-padded to a common width.
/// Pixels are row-major per sample: pixels[(b * height + y) * width + x].
struct ImageBatch {
  std::size_t height = 0;
  std::size_t width = 0;
  std::vector<double> pixels;
  std::vector<std::size_t> widths;      // true width of every sample
  std::vector<double> pad_values;       // background level used for padding

  std::size_t size() const { return widths.size(); }
};

}  // namespace amd::model
