// Copyright 2026 The qmq Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

// Unit system: energies in micro-electronvolts, times in nanoseconds.

namespace qmq {

inline constexpr double kHbar = 0.6582119569;              // ueV * ns
inline constexpr double kElementaryCharge = 1.602176634e-19;  // C
inline constexpr double kMuB = 57.88381806;                 // ueV / T
inline constexpr double kPi = 3.14159265358979323846;

inline constexpr double kHermiticityTol = 1e-12;
inline constexpr double kUnitarityTol = 1e-10;
inline constexpr double kOracleTol = 1e-9;
inline constexpr double kCompletenessTol = 1e-8;

}  // namespace qmq
