#!/usr/bin/env python3
"""Smoke test for the rescon_py extension module.

Builds the extension if needed, loads it, and exercises the main pipeline:
generate -> archive round-trip -> bin -> relative control -> pulse
realization -> propagation -> diagnostics -> simplification.

Usage: python3 python/smoke_test.py
"""

import math
import shutil
import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load_module():
    lib = None
    for profile in ("release", "debug"):
        cand = ROOT / "target" / profile / "librescon_py.so"
        if cand.exists():
            lib = cand
            break
    if lib is None:
        subprocess.run(
            ["cargo", "build", "-p", "rescon-py"], cwd=ROOT, check=True
        )
        lib = ROOT / "target" / "debug" / "librescon_py.so"
    stage = Path(tempfile.mkdtemp(prefix="rescon-py-"))
    shutil.copy(lib, stage / "rescon_py.so")
    sys.path.insert(0, str(stage))
    import rescon_py

    return rescon_py


def approx(a, b, rel=1e-9):
    return abs(a - b) <= rel * max(abs(a), abs(b), 1e-300)


def main():
    rp = load_module()
    print(f"hbar = {rp.HBAR_EV_FS} eV*fs")
    assert approx(rp.HBAR_EV_FS, 0.6582119569)

    # generate + archive round-trip
    sys_a = rp.System.generate(
        n_alpha=2048,
        energy_window=(4.5, 5.5),
        widths=[0.02] * 4,
        centers=[5.0, 5.01, 5.02, 5.03],
        dipole_magnitudes=[1.0, 0.9, 1.1, 1.0],
        seed=77,
    )
    print(sys_a)
    assert sys_a.n_states == 2048 and sys_a.n_resonances == 4

    with tempfile.TemporaryDirectory(prefix="rescon-smoke-") as tmp:
        path = str(Path(tmp) / "system.json")
        sys_a.save(path)
        sys_b = rp.System.load(path)
    assert sys_b.e_alpha == sys_a.e_alpha

    # overlap diagnostics
    om = sys_a.overlap_matrix((4.968, 5.032))
    assert len(om) == 4 and all(om[i][i] > 0 for i in range(4))

    # binning
    binned = sys_a.bin((4.968, 5.032), 8)
    print(binned)
    assert binned.n_bins == 8 and len(binned.omega_grid) == 8

    # relative control: eigenvalues ascending, ratio realized by propagation
    t1, t2 = 150.0, 250.0
    sols = binned.relative_control(t1, t2)
    lams = [s.lam for s in sols]
    print(f"relative-control ratios: min={lams[0]:.4e} max={lams[-1]:.4e}")
    assert lams == sorted(lams) and lams[0] > 0
    assert all(s.kind == "relative" and s.cond_k_t1 >= 1.0 for s in sols)

    for sol in (sols[0], sols[-1]):
        field = rp.realize(binned, sol.field_vector, alpha_a=30.0)
        ratio = field.population(binned, t2) / field.population(binned, t1)
        assert approx(ratio, sol.lam, rel=1e-6), (ratio, sol.lam)
    print("propagated ratios match the eigenvalues")

    # absolute control (single resonance: the kernel is rank-1)
    single = rp.System.generate(
        n_alpha=512,
        energy_window=(4.0, 6.0),
        widths=[0.1],
        centers=[5.0],
        dipole_magnitudes=[1.0],
        seed=3,
    )
    sbinned = single.bin((4.5, 5.5), 8)
    abs_sols = sbinned.absolute_control(t1, e0=1.0)
    assert len(abs_sols) == sbinned.n_bins
    assert abs_sols[-1].lam >= abs_sols[0].lam >= -1e-12
    assert abs_sols[0].e0 == 1.0 and abs_sols[0].kind == "absolute"
    scaled = abs_sols[-1].energy_scaled_field()
    norm = math.sqrt(sum(abs(c) ** 2 for c in scaled))
    assert approx(norm, math.sqrt(2.0 * math.pi))

    # field evaluation
    f_max = rp.realize(binned, sols[-1].field_vector, alpha_a=30.0)
    spec = f_max.spectral_values()
    assert len(spec) == 8
    assert all(
        approx(abs(s), abs(v), rel=1e-8)
        for s, v in zip(spec, sols[-1].field_vector)
    )
    assert isinstance(f_max.time_value(0.0), complex)
    assert f_max.t_over > 0

    # simplification
    f_min = rp.realize(binned, sols[0].field_vector, alpha_a=30.0)
    averaged = f_min.local_average(4)
    smoothed = averaged.smooth_expand(4)
    truncated = f_min.truncate_amplitudes(4)
    for f in (averaged, smoothed, truncated):
        assert f.population(binned, t1) > 0
    rows = rp.retention_sweep(binned, f_min, f_max, [8, 6, 4], t1, t2)
    assert [r.n_r for r in rows] == [8, 6, 4]
    assert approx(rows[0].achieved_min, lams[0], rel=1e-6)
    print(f"retention sweep: {rows}")

    # correlation report
    reports = sys_a.correlation_report([(4.968, 5.032)], t1, t2, n_a=4)
    assert len(reports) == 1
    rep = reports[0]
    print(rep)
    assert 0.0 <= rep.h_omega <= 1.0 and rep.lambda_max >= rep.lambda_min > 0

    # errors surface as Python exceptions
    try:
        sys_a.bin((5.0, 4.0), 8)
    except ValueError as e:
        print(f"expected validation error: {e}")
    else:
        raise AssertionError("inverted window should raise ValueError")

    print("smoke test OK")


if __name__ == "__main__":
    main()
