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

import json
import math

import numpy as np
import pytest

import chartkit as ck

SMALL = {"n": 300, "antennas": 6, "subcarriers": 4, "seed": 3}


@pytest.fixture(scope="module")
def dataset():
    return ck.synthesize(json.dumps(SMALL))


def test_synthesize_and_container_round_trip(dataset, tmp_path):
    assert len(dataset) == 300
    assert dataset.antenna_count == 6
    path = tmp_path / "d.ccds"
    ck.save_container(dataset, path)
    back = ck.load_container(path)
    np.testing.assert_array_equal(back.positions(), dataset.positions())
    np.testing.assert_array_equal(back.csi(7), dataset.csi(7))
    assert back.csi(0).dtype == np.complex64


def test_bad_container(tmp_path):
    path = tmp_path / "junk.ccds"
    path.write_bytes(b"XXXXXXXX")
    with pytest.raises(ck.LoadError):
        ck.load_container(path)
    with pytest.raises(ck.Error):
        ck.load_container(tmp_path / "missing.ccds")


def test_features():
    f = ck.scaled_r2m(np.array([2.0 + 0j]))
    assert f[0] == pytest.approx(math.sqrt(2.0))


def test_reduced_features(dataset):
    reduced = ck.subcarrier_average(dataset, 0, 4)
    f = ck.featurize(reduced)
    assert f.shape == (300, 36)
    assert f.dtype == np.float32


def test_triplets_and_violation_rate(dataset):
    x = dataset.positions()
    t = ck.select_genie(x, d_c=1.5, count=1000, seed=1)
    assert t.shape == (1000, 3)
    d = np.linalg.norm(x[t[:, 0]] - x[t[:, 1]], axis=1)
    assert (d <= 1.5).all()
    assert 0.0 <= ck.violation_rate(t, x) <= 1.0
    times = ck.select_time_based(dataset.timestamps(), t_c=1.5, count=100, seed=1)
    assert times.shape == (100, 3)
    sim = ck.select_sim_trajectory(x, r=50, count=100, seed=1)
    assert sim.shape == (100, 3)


def test_metrics_identity():
    rng = np.random.default_rng(0)
    x = rng.uniform(0, 10, size=(100, 2))
    report = ck.evaluate(x, x)
    assert report["ct"] == 1.0 and report["tw"] == 1.0 and report["ks"] == 0.0
    assert ck.continuity(x, x * 2, 5) == 1.0
    r = ck.rank_matrix(np.array([[0.0], [1.0], [3.0]]))
    assert r[0].tolist() == [0, 1, 2]


def test_train_and_forward(dataset, tmp_path):
    reduced = ck.subcarrier_average(dataset, 0, 4)
    f = ck.featurize(reduced)
    t = ck.select_genie(dataset.positions(), count=2000, seed=2)
    net, loss = ck.train(f, t, hidden=[16, 8], epochs=2, batch_size=128, seed=3)
    assert len(loss) == 2
    z = net.forward(f)
    assert z.shape == (300, 2)
    net.save(tmp_path / "w.ccnn")
    again = ck.load_weights(tmp_path / "w.ccnn")
    np.testing.assert_array_equal(again.forward(f), z)
    with pytest.raises(ck.InvalidArgument):
        net.forward(f[:, :5])


def test_run_pipeline_deterministic():
    config = json.dumps(
        {
            "synth": SMALL,
            "triplets": {"rule": "genie", "count": 2000},
            "network": {"hidden": [16, 8]},
            "training": {"epochs": 1, "batch_size": 128},
            "seed": 5,
        }
    )
    a = ck.run(config)
    b = ck.run(config)
    assert a["digest"] == b["digest"]
    np.testing.assert_array_equal(a["chart"], b["chart"])
    assert set(a["metrics"]) == {"ct", "tw", "ks", "k_used", "n_used", "seed"}
    assert "<svg" in ck.render_plot(a["chart"], a["truth"])


def test_config_errors():
    with pytest.raises(ck.ConfigError):
        ck.run("{}")
    with pytest.raises(ck.StageError):
        ck.run(json.dumps({"synth": SMALL, "triplets": {"dc": 1e-6}}))
