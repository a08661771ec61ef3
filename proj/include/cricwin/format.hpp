// Copyright 2026 The cricwin Authors
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

namespace cricwin {

// Versions of every on-disk document. A reader refuses any other value.
inline constexpr int kManifestFormatVersion = 1;
inline constexpr int kLayoutVersion = 1;
inline constexpr int kCheckpointFormatVersion = 1;
inline constexpr int kBoostedModelFormatVersion = 1;

// Legal deliveries in one ODI innings.
inline constexpr int kMaxBalls = 300;

}  // namespace cricwin
