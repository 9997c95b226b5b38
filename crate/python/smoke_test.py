"""Smoke test for the Python bindings.

Build and install first:
    pip install maturin
    maturin build --release -m crates/py/Cargo.toml -o dist
    pip install dist/wsn_game_py-*.whl
"""

import os
import tempfile

import wsn_game_py as wg


def main():
    tc = wg.transmission_cost(31, 1024)
    assert abs(tc - 2.13846e-4) < 1e-12, tc
    assert wg.forgiveness_round(3, 10) == 33
    assert wg.reliability(40, 100) == 0.4
    x3 = wg.punishment("NB", "D", 40, 100)
    assert x3 == wg.punishment("NB", "ND", 40, 100) + wg.punishment("B", "D", 40, 100)
    assert wg.punishment("B", "ND", 100, 100) == 0.0
    assert wg.direction_coefficient(0.0, 0.004, 0.3) == 1.0
    assert wg.path_loss("UL", 125.0) > 0

    cfg = wg.Config(seed=7, malicious=[3], hw_fault_fraction=0.2)
    assert cfg.n_rounds == 110
    res = wg.run_simulation(cfg)
    assert res.n_rounds == 110
    assert len(res.dt_series) == 110
    assert res.classifications[2] == "malicious"
    assert sorted(res.hwl) == sorted(res.faulty_ids), (res.hwl, res.faulty_ids)
    assert res.dt == wg.run_simulation(cfg).dt

    results = wg.compare(wg.Config(seed=1))
    assert set(results) == {"repeated", "oneshot_nb_nd", "oneshot_b_d", "oneshot_nb_d", "nodefense"}
    assert results["repeated"].dt > results["oneshot_nb_nd"].dt
    assert results["nodefense"].lost_power > results["repeated"].lost_power

    with tempfile.TemporaryDirectory() as d:
        path = os.path.join(d, "run.csv")
        res.to_csv(path)
        with open(path) as f:
            assert sum(1 for _ in f) == 1 + 1100

    for bad in ({"c_factor": 5}, {"env": "XX"}, {"nonsense": 1}):
        try:
            wg.Config(**bad)
        except ValueError as e:
            assert str(e)
        else:
            raise AssertionError(f"accepted {bad}")
    try:
        wg.run_one_shot("repeated", cfg)
    except ValueError:
        pass
    else:
        raise AssertionError("repeated is not a one-shot scenario")

    print(f"ok: equilibrium round {res.equilibrium_round}, HWL {res.hwl}, DT {res.dt:.3f}")


if __name__ == "__main__":
    main()
