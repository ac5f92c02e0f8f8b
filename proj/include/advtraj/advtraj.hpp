// Copyright 2026 The advtraj Authors
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

#include "advtraj/scalar.hpp"
#include "advtraj/gradtape.hpp"
#include "advtraj/core.hpp"
#include "advtraj/dynamics.hpp"
#include "advtraj/predictor.hpp"
#include "advtraj/objectives.hpp"
#include "advtraj/barriers.hpp"
#include "advtraj/attack.hpp"
#include "advtraj/metrics.hpp"
#include "advtraj/scenario_io.hpp"
#include "advtraj/runner.hpp"
