"""End-to-end smoke checks of the python bindings.

Runs as a plain script (no test framework) so it can sit directly under
ctest: any failed assert exits nonzero.
"""

import math
import os
import shutil
import tempfile

import beamfill as bf


def test_geometry_roundtrip():
    geom = bf.build_geometry(math.radians(20.0))
    v = [0.8, -0.2, 0.05]
    beams = bf.project_to_beams(geom, v)
    assert len(beams) == 4
    back = bf.solve_velocity(geom, beams, [True, True, True, True])
    assert all(abs(a - b) < 1e-9 for a, b in zip(v, back))
    # three beams are still enough
    back3 = bf.solve_velocity(geom, beams, [True, True, True, False])
    assert all(abs(a - b) < 1e-9 for a, b in zip(v, back3))


def test_corruption_is_seed_deterministic():
    geom = bf.build_geometry(math.radians(20.0))
    params = bf.ErrorParams()
    params.bias = [0.001] * 4
    params.noise_std = 0.001
    params.seed = 7
    vel = [[1.0, 0.0, 0.05]] * 20
    first = bf.corrupt_series(geom, vel, params)
    second = bf.corrupt_series(geom, vel, params)
    assert first == second
    params.seed = 8
    assert bf.corrupt_series(geom, vel, params) != first


def test_metrics_identities():
    assert abs(bf.rmse([1, 2, 3], [2, 2, 2]) - math.sqrt(2.0 / 3.0)) < 1e-12
    assert abs(bf.mae([1, 2, 3], [2, 2, 2]) - 2.0 / 3.0) < 1e-12
    assert abs(bf.r_squared([1, 2, 3], [2, 2, 2])) < 1e-12
    assert abs(bf.vaf([1, 2, 3], [2, 2, 2])) < 1e-12
    assert abs(bf.improvement_percent(0.0794, 0.0653) - 17.758) < 0.01
    try:
        bf.rmse([], [])
    except bf.Error:
        pass
    else:
        raise AssertionError("empty series must raise")


def test_average_baseline():
    pred = bf.average_predict(
        [[0, 0, 1, 4], [0, 0, 2, 5], [0, 0, 3, 6]],
        [False, False, True, True],
    )
    assert pred == [2.0, 5.0]


def test_trajectory_length():
    v = bf.synth_trajectory("sinusoidal-sway", 120, seed=3)
    assert len(v) == 120
    assert all(len(row) == 3 for row in v)


def test_pipeline(tmp):
    config_path = os.path.join(tmp, "exp.ini")
    with open(config_path, "w") as f:
        f.write(
            "[synthetic]\n"
            "train_count = 2\n"
            "test_count = 1\n"
            "duration_s = 30\n"
            "[libeamsnet]\n"
            "fc1_width = 8\n"
            "fc2_width = 6\n"
            "[missbeamnet]\n"
            "hidden = 12\n"
            "[train]\n"
            "epochs = 3\n"
            "decay_epoch = 2\n"
            "[run]\n"
            f"out_dir = {os.path.join(tmp, 'out')}\n"
        )
    cfg = bf.load_config(config_path)
    assert bf.validate_config(cfg) == []

    results = bf.run_train(cfg)
    assert [r["estimator"] for r in results] == ["libeamsnet", "missbeamnet"]
    for r in results:
        assert len(r["train_loss"]) == 3
        assert os.path.isfile(r["checkpoint"])

    report = bf.run_eval(cfg, oracle=True)
    pooled = report["scopes"][0]
    assert pooled["scope"] == "pooled"
    names = [row["strategy"] for row in pooled["rows"]]
    assert names == ["average", "libeamsnet", "missbeamnet", "oracle"]
    oracle = pooled["rows"][-1]
    assert oracle["rmse_mps"] == 0.0
    assert oracle["vaf_pct"] == 100.0
    assert pooled["rows"][0]["rmse_improvement_pct"] is None
    assert pooled["rows"][1]["rmse_improvement_pct"] is not None

    # invalid config surfaces as the bound exception, not a crash
    try:
        bf.load_config(config_path, ["window.missing_beams=9"])
    except bf.Error:
        pass
    else:
        raise AssertionError("bad override must raise")


def main():
    test_geometry_roundtrip()
    test_corruption_is_seed_deterministic()
    test_metrics_identities()
    test_average_baseline()
    test_trajectory_length()
    tmp = tempfile.mkdtemp(prefix="beamfill_smoke_")
    try:
        test_pipeline(tmp)
    finally:
        shutil.rmtree(tmp, ignore_errors=True)
    print("python smoke: ok")


if __name__ == "__main__":
    main()
