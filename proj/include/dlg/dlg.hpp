// Copyright 2026 The DLG Authors.
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

// Umbrella header.

#include "dlg/checkpoint.hpp"
#include "dlg/config.hpp"
#include "dlg/dataset_io.hpp"
#include "dlg/encoder.hpp"
#include "dlg/errors.hpp"
#include "dlg/experiment.hpp"
#include "dlg/finite_diff.hpp"
#include "dlg/generate.hpp"
#include "dlg/graph.hpp"
#include "dlg/matrix.hpp"
#include "dlg/modifier.hpp"
#include "dlg/motifs.hpp"
#include "dlg/objectives.hpp"
#include "dlg/param_store.hpp"
#include "dlg/rng.hpp"
#include "dlg/tape.hpp"
#include "dlg/text.hpp"
#include "dlg/trainer.hpp"
