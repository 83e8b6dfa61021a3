"""Acceptance gate: every criterion at its stated tolerance.

Each test prints one PASS line when its criterion holds; run with
``pytest tests/test_acceptance.py -v -s`` to see them. Criteria 7-9 share
one full-scale pipeline fixture (synthetic corpus, decomposition, mode
export, dataset assembly).
"""

import time

import numpy as np
import pytest
from oracles import (exact_dmd_eigenvalues, match_multisets, nearest_recovered,
                     random_linear_system, recovered_positive_frequencies,
                     scalar_rank_signal)
from PIL import Image

from modalaug.datasets import (DatasetLayout, audit_no_duplicates,
                               audit_sample_separation, build_dataset01,
                               build_dataset02, build_testing_I, parse_artifact_name)
from modalaug.errors import DataError
from modalaug.hodmd import HodmdParams, analyze, dmd_d, retain_modes, truncated_svd
from modalaug.kernels import quantize_u8
from modalaug.modes import SelectionPolicy, export_modes
from modalaug.snapshots import SnapshotMatrix, load_sequence, to_snapshot_matrix
from modalaug.synth import SynthMode, SynthSpec, bundled_spec, generate, generate_class_corpus

FOUR_FREQS_HZ = [1.1, 2.3, 3.7, 5.2]


def as_matrix(data, dt):
    return SnapshotMatrix(data=data, nx=1, ny=data.shape[0], dt=dt)


def report(n, message):
    print(f"\nACCEPTANCE {n} PASS: {message}")


def test_criterion_1_d1_equivalence_with_exact_dmd():
    start = time.monotonic()
    worst = 0.0
    for trial in range(20):
        rng = np.random.default_rng(1000 + trial)
        data, _ = random_linear_system(rng, j=30, k=60, n_pairs=2, n_real=2)
        params = HodmdParams(dt=0.1, d=1, eps_svd=1e-12, eps_dmd=1e-12)
        _, spectrum = analyze(as_matrix(data, 0.1), params)
        worst = max(worst, match_multisets(spectrum.eigenvalues(),
                                           exact_dmd_eigenvalues(data)))
    elapsed = time.monotonic() - start
    assert worst <= 1e-9
    assert elapsed < 10.0
    report(1, f"20 random linear systems, worst eigenvalue gap {worst:.2e}, "
              f"{elapsed:.1f}s < 10s")


def test_criterion_2_clean_three_mode_recovery():
    start = time.monotonic()
    spec = SynthSpec(modes=(
        SynthMode(0.0, 0.0, 1.0, "gaussian_blob", {"cx": 0.45, "cy": 0.5, "sigma": 0.22}),
        SynthMode(-0.1, 2 * np.pi * 3, 0.6 + 0.2j, "plane_wave", {"kx": 2, "ky": 1}),
        SynthMode(-0.3, 2 * np.pi * 7, 0.3 - 0.1j, "checkerboard", {"period": 4}),
    ), nx=32, ny=32, k=200, dt=0.01)
    res = generate(spec)
    v = res.float_frames.reshape(spec.k, -1).T
    assert v.shape == (1024, 200)
    _, spectrum = analyze(as_matrix(v, spec.dt),
                          HodmdParams(dt=spec.dt, d=20, eps_svd=1e-10, eps_dmd=1e-8))

    worst_w = worst_d = worst_a = 0.0
    for i in range(res.truth.m_retained):
        d, w = res.truth.growth_rates[i], res.truth.frequencies[i]
        a = abs(res.truth.amplitudes[i])
        j = nearest_recovered(spectrum, d, w)
        worst_d = max(worst_d, abs(spectrum.growth_rates[j] - d))
        if w != 0.0:
            worst_w = max(worst_w, abs(spectrum.frequencies[j] - w) / abs(w))
        else:
            assert abs(spectrum.frequencies[j]) <= 1e-6
        worst_a = max(worst_a, abs(abs(spectrum.amplitudes[j]) - a) / a)
    elapsed = time.monotonic() - start
    assert worst_w <= 1e-6 and worst_d <= 1e-6 and worst_a <= 1e-6
    assert elapsed < 5.0
    report(2, f"J=1024 K=200 clean recovery: dw<={worst_w:.1e} rel, "
              f"dd<={worst_d:.1e} abs, d|a|<={worst_a:.1e} rel, {elapsed:.1f}s < 5s")


def test_criterion_3_delay_embedding_necessity():
    rng = np.random.default_rng(77)
    dt = 0.01
    data = scalar_rank_signal(rng, FOUR_FREQS_HZ, j=4, k=200, dt=dt)
    expected = 2 * np.pi * np.asarray(FOUR_FREQS_HZ)

    def recovered(d):
        params = HodmdParams(dt=dt, d=d, eps_svd=1e-10, eps_dmd=1e-8)
        spectrum = dmd_d(truncated_svd(data, params.eps_svd), params)
        got = recovered_positive_frequencies(spectrum)
        return sum(1 for w in expected
                   if got.size and np.min(np.abs(got - w)) <= 1e-6 * w)

    shallow, deep = recovered(1), recovered(10)
    assert shallow < 4
    assert deep == 4
    report(3, f"rank-1 signal, 4 tones: d=1 finds {shallow} < 4, d=10 finds all 4 "
              f"within 1e-6")


def test_criterion_4_noise_robustness_over_seeds():
    dt = 0.01
    expected = 2 * np.pi * np.asarray(FOUR_FREQS_HZ)
    good = 0
    for seed in range(10):
        rng = np.random.default_rng(9000 + seed)
        data = scalar_rank_signal(rng, FOUR_FREQS_HZ, j=4, k=200, dt=dt, noise=1e-3)
        params = HodmdParams(dt=dt, d=66, eps_svd=1e-4, eps_dmd=1e-4)
        _, spectrum = analyze(as_matrix(data, dt), params)
        ok = all(
            abs(spectrum.frequencies[nearest_recovered(spectrum, 0.0, w)] - w) <= 1e-2 * w
            for w in expected
        )
        good += ok
    assert good >= 8
    report(4, f"uniform noise 1e-3: all four tones within 1e-2 relative in "
              f"{good}/10 seeds (need >= 8)")


def test_criterion_5_truncation_rule_and_bound():
    rng = np.random.default_rng(55)
    for eps in (1e-2, 1e-4, 1e-8):
        for _ in range(10):
            a = rng.standard_normal((int(rng.integers(10, 60)), int(rng.integers(8, 40))))
            red = truncated_svd(a, eps)
            s = np.linalg.svd(a, compute_uv=False)
            n = red.n_retained
            assert s[n - 1] / s[0] > eps
            assert n == len(s) or eps >= s[n] / s[0]

    # exactly-low-rank inputs: modal reconstruction within 10 * eps_svd
    spec = SynthSpec(modes=(
        SynthMode(0.0, 0.0, 1.0, "gaussian_blob", {"cx": 0.3, "cy": 0.35, "sigma": 0.15}),
        SynthMode(0.0, 5.0, 0.4, "plane_wave", {"kx": 1, "ky": 2}),
        SynthMode(-0.05, 11.0, 1e-3, "gaussian_blob", {"cx": 0.7, "cy": 0.6, "sigma": 0.1}),
        SynthMode(-0.02, 23.0, 1e-6, "checkerboard", {"period": 2}),
    ), nx=12, ny=12, k=120, dt=0.02)
    res = generate(spec)
    v = res.float_frames.reshape(spec.k, -1).T
    from modalaug.hodmd import evolve
    for eps in (1e-2, 1e-4, 1e-8):
        _, spectrum = analyze(as_matrix(v, spec.dt),
                              HodmdParams(dt=spec.dt, d=12, eps_svd=eps, eps_dmd=1e-12))
        recon = evolve(spectrum, np.arange(spec.k) * spec.dt)
        err = np.linalg.norm(recon - v) / np.linalg.norm(v)
        assert err <= 10 * eps
    report(5, "retained N matches the threshold count exactly; low-rank "
              "reconstruction within 10*eps_svd for eps in {1e-2, 1e-4, 1e-8}")


def test_criterion_6_invariant_suite_100_cases():
    cases = 0
    for trial in range(100):
        rng = np.random.default_rng(3000 + trial)
        data, _ = random_linear_system(
            rng, j=int(rng.integers(8, 20)), k=int(rng.integers(20, 44)),
            n_pairs=int(rng.integers(1, 3)), n_real=int(rng.integers(1, 3)))
        data = data + rng.uniform(-1e-5, 1e-5, data.shape)
        dt = float(rng.uniform(0.05, 0.2))
        d = int(rng.integers(1, 4))
        params = HodmdParams(dt=dt, d=d, eps_svd=1e-9, eps_dmd=1e-9)
        _, base = analyze(as_matrix(data, dt), params)

        # amplitude sort order
        mags = np.abs(base.amplitudes)
        assert np.all(np.diff(mags) <= 1e-10 * (mags[0] + 1e-300))

        # conjugate closure on real input
        nyquist = np.pi / dt
        for i in range(base.m_retained):
            w = base.frequencies[i]
            if w == 0.0 or abs(abs(w) - nyquist) <= 1e-9 * nyquist:
                continue
            j = nearest_recovered(base, base.growth_rates[i], -w)
            assert abs(base.frequencies[j] + w) <= 1e-6 * (1 + abs(w))
            assert abs(base.amplitudes[j] - np.conj(base.amplitudes[i])) <= 1e-6 * mags[0]
            assert np.linalg.norm(base.modes[:, j] - np.conj(base.modes[:, i])) <= 1e-6

        # scale equivariance with an exactly representable factor
        _, scaled = analyze(as_matrix(2.0 * data, dt), params)
        assert scaled.m_retained == base.m_retained
        np.testing.assert_allclose(scaled.growth_rates, base.growth_rates, atol=1e-9)
        np.testing.assert_allclose(np.abs(scaled.frequencies), np.abs(base.frequencies),
                                   atol=1e-9)
        np.testing.assert_allclose(np.abs(scaled.amplitudes), 2.0 * np.abs(base.amplitudes),
                                   rtol=1e-9, atol=1e-12)
        for i in range(base.m_retained):
            j = nearest_recovered(scaled, base.growth_rates[i], base.frequencies[i])
            assert abs(np.vdot(scaled.modes[:, j], base.modes[:, i])) == pytest.approx(
                1.0, abs=1e-9)

        # retention monotonicity
        raw = dmd_d(truncated_svd(data, params.eps_svd), params)
        sizes = [retain_modes(raw, eps).m_retained for eps in (1e-1, 1e-2, 1e-4, 1e-9)]
        assert sizes == sorted(sizes)
        cases += 1
    assert cases == 100
    report(6, "closure, scale equivariance, retention monotonicity and sort "
              "order hold in 100/100 random cases")


# ---------------------------------------------------------------------------
# Full-scale pipeline: criteria 7, 8, 9
# ---------------------------------------------------------------------------

N_CLASSES = 5
SAMPLES_PER_CLASS = 26
FRAMES = 100
DT = 0.02
ANALYSIS = HodmdParams(dt=DT, d=10, eps_svd=1e-3, eps_dmd=1e-3)


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory):
    root = tmp_path_factory.mktemp("full_scale")
    corpus = root / "corpus"
    templates = bundled_spec(N_CLASSES, nx=32, ny=32, k=FRAMES, dt=DT,
                             noise_amplitude=0.01)
    generate_class_corpus(templates, SAMPLES_PER_CLASS, corpus, seed=42)

    layout = DatasetLayout(classes=tuple(sorted(templates)), scale=1.0)
    build_start = time.monotonic()
    ds01_manifest = build_dataset01(corpus, layout, 7, root / "ds01")
    build_testing_I(corpus, layout, 7, root / "ds01")
    ds01_elapsed = time.monotonic() - build_start

    modes_dir = root / "modes"
    for label, info in ds01_manifest["classes"].items():
        for sid in info["training_pool"]:
            seq = load_sequence(corpus / label / sid, DT, source_id=sid)
            matrix = to_snapshot_matrix(seq)
            _, spectrum = analyze(matrix, ANALYSIS)
            export_modes(spectrum, (matrix.nx, matrix.ny), modes_dir / label / sid,
                         sid, policy=SelectionPolicy(count=10), params=ANALYSIS,
                         class_label=label)

    build_start = time.monotonic()
    build_dataset02(root / "ds01", modes_dir, layout, 7, root / "ds02")
    build_testing_I(corpus, layout, 7, root / "ds02")
    ds02_elapsed = time.monotonic() - build_start
    return {
        "root": root, "corpus": corpus, "layout": layout,
        "manifest": ds01_manifest, "modes": modes_dir,
        "build_seconds": ds01_elapsed + ds02_elapsed,
    }


def count_pngs(directory):
    return len(list(directory.glob("*.png")))


def test_criterion_7_dataset_accounting_at_full_scale(pipeline):
    root = pipeline["root"]
    classes = pipeline["layout"].classes
    per_class = {"train": 1400, "validation": 500, "test": 100}
    per_class_aug = {"train": 1540, "validation": 550, "test": 110}

    for label in classes:
        for split, expected in per_class.items():
            assert count_pngs(root / "ds01" / split / label) == expected
        for split, expected in per_class_aug.items():
            assert count_pngs(root / "ds02" / split / label) == expected
        assert count_pngs(root / "ds01" / "testing_I" / label) == 540
        assert count_pngs(root / "ds02" / "testing_I" / label) == 540

    ds01_total = sum(count_pngs(root / "ds01" / split / label)
                     for split in per_class for label in classes)
    ds02_total = sum(count_pngs(root / "ds02" / split / label)
                     for split in per_class for label in classes)
    testing_total = sum(count_pngs(root / "ds01" / "testing_I" / label)
                        for label in classes)
    assert ds01_total == 10000
    assert ds02_total == 11000
    assert testing_total == 2700

    # four-class variant (healthy-style exclusion): 4 x 540 = 2160
    four = DatasetLayout(classes=classes[1:], scale=1.0)
    build_testing_I(pipeline["corpus"], four, 7, root / "ds4")
    four_total = sum(count_pngs(root / "ds4" / "testing_I" / label)
                     for label in classes[1:])
    assert four_total == 2160

    assert pipeline["build_seconds"] < 120.0
    report(7, f"dataset accounting exact at full scale (1400/500/100/540, "
              f"1540/550/110/540, totals 10000/11000/2700, 4-class 2160); "
              f"builds took {pipeline['build_seconds']:.0f}s < 120s")


def test_criterion_8_leak_audit_and_injection(pipeline):
    root = pipeline["root"]
    for ds in ("ds01", "ds02"):
        audit_sample_separation(root / ds)
        audit_no_duplicates(root / ds)

    # injected violation: modes claiming to come from a held-out sample
    manifest = pipeline["manifest"]
    label = pipeline["layout"].classes[0]
    heldout = manifest["classes"][label]["heldout"][0]
    poisoned = root / "poisoned_modes"
    import shutil
    shutil.copytree(pipeline["modes"], poisoned)
    victim = manifest["classes"][label]["training_pool"][0]
    leak_dir = poisoned / label / heldout
    shutil.copytree(poisoned / label / victim, leak_dir)
    payload = (leak_dir / "modes.json").read_text().replace(victim, heldout)
    (leak_dir / "modes.json").write_text(payload)
    for png in leak_dir.glob("*.png"):
        png.rename(leak_dir / png.name.replace(victim, heldout))

    with pytest.raises(DataError, match="leak"):
        build_dataset02(root / "ds01", poisoned, pipeline["layout"], 7, root / "ds02_leak")
    report(8, "no source overlap between training artifacts and testing I; "
              "injected held-out mode source rejected")


def test_criterion_9_mode_export_contract(pipeline):
    modes_dir = pipeline["modes"]
    sample_dirs = sorted(p.parent for p in modes_dir.rglob("modes.json"))
    assert len(sample_dirs) == N_CLASSES * 20
    for d in sample_dirs:
        assert count_pngs(d) == 10

    # render -> decode -> renormalize stays within one quantization level
    probe = next(sample_dirs[0].glob("*.png"))
    decoded = np.asarray(Image.open(probe), dtype=np.float64)
    requantized, _, _ = quantize_u8(decoded)
    assert np.max(np.abs(requantized.astype(int)
                         - decoded.astype(int))) <= 1

    # deterministic bytes: re-export one sample and compare
    label = pipeline["layout"].classes[0]
    sid = pipeline["manifest"]["classes"][label]["training_pool"][0]
    seq = load_sequence(pipeline["corpus"] / label / sid, DT, source_id=sid)
    matrix = to_snapshot_matrix(seq)
    _, spectrum = analyze(matrix, ANALYSIS)
    redo = pipeline["root"] / "re_export"
    export_modes(spectrum, (matrix.nx, matrix.ny), redo, sid,
                 policy=SelectionPolicy(count=10), params=ANALYSIS)
    for png in redo.glob("*.png"):
        original = modes_dir / label / sid / png.name
        assert png.read_bytes() == original.read_bytes()
    report(9, "10 PNGs per sample by default; round-trip within 1 level; "
              "export bytes deterministic")
