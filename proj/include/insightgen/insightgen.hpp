// Copyright 2026 The insightgen Authors.
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

// Everything except the HTTP service (include insightgen/service.hpp for that).

#include "insightgen/dataset.hpp"
#include "insightgen/error.hpp"
#include "insightgen/features.hpp"
#include "insightgen/feedback.hpp"
#include "insightgen/filter.hpp"
#include "insightgen/hash.hpp"
#include "insightgen/pipeline.hpp"
#include "insightgen/random.hpp"
#include "insightgen/realization.hpp"
#include "insightgen/recommender.hpp"
#include "insightgen/schema.hpp"
#include "insightgen/scoring.hpp"
#include "insightgen/stats.hpp"
#include "insightgen/synthetic.hpp"
#include "insightgen/usefulness_model.hpp"
