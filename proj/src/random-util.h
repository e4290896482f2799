// src/random-util.h

// Copyright 2026  The scorematch Authors

// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//  http://www.apache.org/licenses/LICENSE-2.0
//
// THIS CODE IS PROVIDED *AS IS* BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY
// KIND, EITHER EXPRESS OR IMPLIED, INCLUDING WITHOUT LIMITATION ANY IMPLIED
// WARRANTIES OR CONDITIONS OF TITLE, FITNESS FOR A PARTICULAR PURPOSE,
// MERCHANTABLITY OR NON-INFRINGEMENT.
// See the Apache 2 License for the specific language governing permissions and
// limitations under the License.

#ifndef SCOREMATCH_SRC_RANDOM_UTIL_H_
#define SCOREMATCH_SRC_RANDOM_UTIL_H_

#include <cstddef>
#include <random>

namespace scorematch {

// Uniform in [0, 1) from the top 53 bits of the engine output. Unlike the
// standard distributions this is identical across library implementations.
inline double Uniform01(std::mt19937_64 &rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Uniform integer in [lo, hi].
inline std::size_t UniformIndex(std::mt19937_64 &rng, std::size_t lo,
                                std::size_t hi) {
  return lo + static_cast<std::size_t>(Uniform01(rng) * (hi - lo + 1));
}

}  // namespace scorematch

#endif  // SCOREMATCH_SRC_RANDOM_UTIL_H_
