#pragma once

#include <vector>

#include "vqa/frame_io.hpp"

namespace vqa {

// The four half-resolution components of the orthonormal 2x2 Haar transform,
// applied per channel. With kernels built from L = (1/sqrt 2)[1,1]^T and
// H = (1/sqrt 2)[1,-1]^T, each non-overlapping 2x2 block [[a,b],[c,d]] maps to
//   avg = (a+b+c+d)/2   low-pass (LL): 2x the 2x2 mean
//   h1  = (a+b-c-d)/2   HL: vertical frequency, horizontal edges
//   h2  = (a-b+c-d)/2   LH: horizontal frequency, vertical edges
//   h3  = (a-b-c+d)/2   HH: diagonal
// The map is orthonormal: it conserves energy and its adjoint inverts it
// exactly. Source values in [0,1] give component values in [-2,2].
struct FreqMaps {
  int source_size = 0;  // l; each component is kChannels x l/2 x l/2, planar
  std::vector<double> avg, h1, h2, h3;

  int half() const { return source_size / 2; }
};

// patch must be square with an even side.
FreqMaps haar_forward(const Frame& patch);

// Adjoint of haar_forward; haar_inverse(haar_forward(p)) == p to rounding.
Frame haar_inverse(const FreqMaps& maps);

}  // namespace vqa
