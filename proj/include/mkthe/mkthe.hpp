/*
 * Copyright 2026 The mkthe Authors
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#pragma once

// Umbrella header: ring arithmetic, the leveled scheme, gadget ciphertexts,
// threshold keys, the multi-key layer, the protocol simulator, and the
// serialization format.

#include "mkthe/bgv.hpp"
#include "mkthe/errors.hpp"
#include "mkthe/mkbgv.hpp"
#include "mkthe/noise.hpp"
#include "mkthe/params.hpp"
#include "mkthe/presets.hpp"
#include "mkthe/protocol.hpp"
#include "mkthe/rgsw.hpp"
#include "mkthe/ring.hpp"
#include "mkthe/rng.hpp"
#include "mkthe/serialize.hpp"
#include "mkthe/threshold.hpp"
