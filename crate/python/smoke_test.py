"""Smoke test for the hrtf_lab extension module."""

import math
import os
import random
import tempfile

import hrtf_lab as hl

FS = 44100.0


def body(n):
    return [math.exp(-i / 6.0) * math.cos(0.7 * i) for i in range(n)]


def main():
    rng = random.Random(3)
    h = [rng.gauss(0.0, 1.0) * math.exp(-i / 30.0) for i in range(200)]
    d = hl.decompose(h, FS)
    assert d.round_trip_error < 1e-8, d.round_trip_error
    assert d.all_pass_flatness < 1e-6, d.all_pass_flatness
    gd_c, gd_m, gd_a = d.group_delays()
    assert len(gd_c) == len(gd_m) == len(gd_a) == 200
    assert len(hl.minimum_phase(h, FS)) == 200

    spec = hl.ApfSpec(0.96, 6991.0, FS)
    assert abs(spec.peak_delay() - 49.03) <= 0.05, spec.peak_delay()
    assert abs(hl.solve_r(6991.0, spec.peak_delay(), FS) - 0.96) < 1e-9
    assert abs(hl.ApfSpec.from_peak_delay(6991.0, 20.0, FS).peak_delay() - 20.0) < 1e-9
    b, a = spec.coefficients()
    assert a[0] == 1.0 and abs(b[2] - 1.0) < 1e-15

    pure = body(200)
    assert hl.classify(pure, FS)[0] == "pure_min_phase"
    shifted = [0.0] * 5 + pure[:195]
    hap = [0.0] * 200
    ir = spec.impulse_response()
    for i, x in enumerate(shifted):
        for j, c in enumerate(ir[: 200 - i]):
            hap[i + j] += x * c
    cls, depth = hl.classify(hap, FS)
    assert cls == "min_phase_allpass" and depth < -0.8, (cls, depth)
    notches = hl.notches(hap, FS, source="all-pass")
    assert any(abs(n.frequency_hz - 6991.0) < 400.0 for n in notches), notches

    m_hrtf, flavor = hl.reconstruct(hap, FS, mode="m-hrtf")
    mpd, _ = hl.reconstruct(hap, FS, mode="min-pd")
    assert flavor == "min_phase_allpass"
    assert hl.psi_d(hap, m_hrtf, mpd) > 0.0

    psi, lag = hl.ncc(h, h, 10)
    assert abs(psi - 1.0) < 1e-12 and lag == 0

    labels, centroids = hl.kmeans3([-1.0, -0.9, 0.0, 0.05, 1.0, 1.1])
    assert labels == ["mpd_better"] * 2 + ["similar"] * 2 + ["apf_better"] * 2, labels
    assert centroids[0] < centroids[1] < centroids[2]

    thetas = [2.0 * math.pi * j / 36 for j in range(36)]
    hrirs = [[math.exp(-i / 8.0) * (1.0 + 0.3 * math.cos(t + 0.1 * i)) for i in range(64)] for t in thetas]
    model = hl.FbsModel.fit(hrirs, thetas, FS, m_max=3, k_min=1, k_max=20, f_max=FS)
    assert model.m_max == 3 and model.k_range == (1, 20)
    assert isinstance(model.coefficient(0, 1), complex)
    assert model.coefficient(9, 1) is None
    assert len(model.hrir(0.3, 64)) == 64

    recs = [(az, 0.0, ear, body(64)) for az in range(0, 360, 30) for ear in ("left", "right")]
    ds = hl.Dataset.from_records("smoke", recs, FS, "vertical-polar")
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "smoke.json")
        ds.save(path)
        back = hl.Dataset.load(path)
        model.save(os.path.join(tmp, "m.fbsm"))
        assert hl.FbsModel.load(os.path.join(tmp, "m.fbsm")).k_range == (1, 20)
    assert len(back) == 24 and back.hrir_length == 64
    assert back.hrir(30.0, 0.0, "right") is not None
    assert back.hrir(31.0, 0.0) is None
    circle, angles = back.circle("horizontal", "left")
    assert len(circle) == len(angles) == 12

    x = [rng.uniform(-0.1, 0.1) for _ in range(2000)]
    left, right = hl.render_binaural(x, back, [(0, 0.0, 0.0), (1000, 90.0, 0.0)], block_size=256, xfade=64)
    assert len(left) == len(right) == 2000 + 63

    try:
        hl.ApfSpec(1.5, 1000.0, FS)
    except hl.HrtfError as e:
        assert str(e).startswith("InvalidSpec"), e
    else:
        raise AssertionError("expected HrtfError")

    print("smoke test passed")


if __name__ == "__main__":
    main()
