// Copyright 2026 The SpecTTM Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SPECTTM_SPECTTM_HPP
#define SPECTTM_SPECTTM_HPP

#include "specttm/assignment.hpp"
#include "specttm/config.hpp"
#include "specttm/csv.hpp"
#include "specttm/matrix_pencil.hpp"
#include "specttm/noise_models.hpp"
#include "specttm/pauli.hpp"
#include "specttm/pipeline.hpp"
#include "specttm/protocol.hpp"
#include "specttm/pta.hpp"
#include "specttm/spectral_ttm.hpp"
#include "specttm/twirl.hpp"

#endif  // SPECTTM_SPECTTM_HPP
