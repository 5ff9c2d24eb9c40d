// SPDX-License-Identifier: Apache-2.0
//
// isacbench: OFDM ISAC radar simulation and peak-detection benchmark
// Copyright (C) 2026 The isacbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------


#pragma once

#include "analog_frontend.hpp"
#include "bench.hpp"
#include "cfar.hpp"
#include "channel.hpp"
#include "common.hpp"
#include "csi.hpp"
#include "fft.hpp"
#include "metrics.hpp"
#include "periodogram.hpp"
#include "radio_frame.hpp"
#include "windows.hpp"
