/*
 * Copyright 2026 The afcc Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

/// @file afcc.hpp
/// @brief Umbrella header for the simulation library (no JSON dependency).
#pragma once

#include "afcc/baselines.hpp"
#include "afcc/bc_capacity.hpp"
#include "afcc/caching.hpp"
#include "afcc/channel.hpp"
#include "afcc/feasibility.hpp"
#include "afcc/policy_lyapunov.hpp"
#include "afcc/sim_engine.hpp"
#include "afcc/subset.hpp"
