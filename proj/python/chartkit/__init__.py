# SPDX-License-Identifier: Apache-2.0
#
# chartkit - channel charting from CSI datasets with triplet-loss networks
# Copyright (C) 2026 The chartkit contributors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------
"""Channel charting from CSI datasets with triplet-loss networks."""

from ._chartkit import (
    ChartingNetwork,
    ConfigError,
    Dataset,
    DivergenceError,
    Error,
    InvalidArgument,
    IoError,
    LoadError,
    ReducedDataset,
    SelectionError,
    StageError,
    centre_window_start,
    continuity,
    default_neighbourhood,
    evaluate,
    featurize,
    kruskal_stress,
    load_container,
    load_container_reduced,
    load_weights,
    rank_matrix,
    render_plot,
    run,
    save_container,
    scaled_r2m,
    select_genie,
    select_sim_trajectory,
    select_time_based,
    subcarrier_average,
    synthesize,
    train,
    transfer,
    trustworthiness,
    violation_rate,
)

__version__ = "0.1.0"
