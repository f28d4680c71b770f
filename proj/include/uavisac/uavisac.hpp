// SPDX-License-Identifier: Apache-2.0
//
// uavisac: trajectory and beamforming planner for secure UAV sensing/communication
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

#include "uavisac/bcd.hpp"
#include "uavisac/channel.hpp"
#include "uavisac/conic.hpp"
#include "uavisac/experiments.hpp"
#include "uavisac/metrics.hpp"
#include "uavisac/rx_beamform.hpp"
#include "uavisac/scenario.hpp"
#include "uavisac/traj_opt.hpp"
#include "uavisac/tx_beamform.hpp"
#include "uavisac/types.hpp"
