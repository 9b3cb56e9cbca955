"""End-to-end acceptance criteria, one test per criterion.

Each test prints a single ``criterion N: PASS|FAIL`` line and the same line
is repeated in pytest's terminal summary.
"""

import math
import time
from contextlib import contextmanager
from fractions import Fraction

import numpy as np
import pytest

from conftest import TRIANGLE, VERDICTS, iou_masks
from topofeat.complex import build_alpha, build_cech, build_rips
from topofeat.evaluation import (ScheduleState, cosine_lr, evaluate, iou_scores, stratified_split, synth_dataset,
                                 train_logistic, write_dataset)
from topofeat.metrics import bottleneck, bottleneck_oracle, stability_probe
from topofeat.persistence import count_pairs, diagram, persistent_betti
from topofeat.pipeline import TRANSFORMERS, extract_batch, read_features_csv
from topofeat.pointcloud import PointCloud, sample_annulus, sample_disc
from topofeat.signature import shuffle_product, signature, signature_feature
from topofeat.vectorize import landscapes, silhouette
from topofeat.persistence import PersistenceDiagram, PersistencePair

pytestmark = pytest.mark.acceptance

EXPECTED_TRIANGLE = [(0, 0.0, 1.25), (0, 0.0, 2.0), (0, 0.0, math.inf), (1, 2.25, 2.5)]


@contextmanager
def criterion(n: int, title: str):
    """Record and print a verdict line for criterion ``n``; failures still raise."""
    notes: dict = {}
    start = time.perf_counter()
    try:
        yield notes
    except BaseException as exc:
        line = f"criterion {n}: FAIL  {title}  ({type(exc).__name__}: {str(exc).splitlines()[0][:120] if str(exc) else ''})"
        VERDICTS[n] = line
        print(line)
        raise
    detail = ", ".join(f"{k}={v}" for k, v in notes.items())
    line = f"criterion {n}: PASS  {title}  [{detail}; {time.perf_counter() - start:.2f}s]"
    VERDICTS[n] = line
    print(line)


def triples_close(dgm, expected, tol):
    got = dgm.sorted_triples()
    if len(got) != len(expected):
        return False
    for (d, b, e), (d2, b2, e2) in zip(got, sorted(expected)):
        if d != d2 or abs(b - b2) > tol:
            return False
        if math.isinf(e2) != math.isinf(e) or (not math.isinf(e2) and abs(e - e2) > tol):
            return False
    return True


def make_diagram(intervals):
    return PersistenceDiagram(tuple(PersistencePair(1, float(b), float(d), -1) for b, d in intervals))


# 1 -------------------------------------------------------------------------------------

def test_c01_triangle_diagrams():
    with criterion(1, "triangle Cech (squared) and alpha diagrams") as notes:
        t0 = time.perf_counter()
        pc = PointCloud.from_xy(TRIANGLE)
        cech = diagram(build_cech(pc)).squared()
        alpha = diagram(build_alpha(pc))
        elapsed = time.perf_counter() - t0
        assert triples_close(cech, EXPECTED_TRIANGLE, 1e-9), cech.sorted_triples()
        assert triples_close(alpha, EXPECTED_TRIANGLE, 1e-9), alpha.sorted_triples()
        assert elapsed < 1.0
        notes["runtime_s"] = f"{elapsed:.3f}"


# 2 -------------------------------------------------------------------------------------

def test_c02_disc_versus_annulus():
    with criterion(2, "annulus loop dominates disc loops") as notes:
        t0 = time.perf_counter()
        disc = diagram(build_alpha(sample_disc(200, 42)))
        ann = diagram(build_alpha(sample_annulus(200, 0.5, 1.0, 42)))
        elapsed = time.perf_counter() - t0
        disc_max = max(p.persistence for p in disc.in_dim(1))
        top = max(ann.in_dim(1), key=lambda p: p.persistence)
        notes.update(ratio=f"{top.persistence / disc_max:.1f}", death=f"{top.death:.4f}")
        assert top.persistence >= 5 * disc_max
        assert abs(top.death - 0.25) <= 0.10
        assert elapsed < 5.0


# 3 -------------------------------------------------------------------------------------

def test_c03_pair_counts_equal_persistent_betti():
    with criterion(3, "diagram pair counts equal rank oracle") as notes:
        t0 = time.perf_counter()
        checks = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(3, 9))
            pc = PointCloud.from_xy(rng.uniform(0, 1, size=(n, 2)))
            fc = build_rips(pc, max_dim=2, max_value=float(rng.uniform(0.4, 1.5)))
            dgm = diagram(fc)
            crit = sorted(set(fc.values.tolist()))
            for dim in range(fc.max_dim):
                for a, i in enumerate(crit):
                    for j in crit[a:]:
                        assert count_pairs(dgm, dim, i, j) == persistent_betti(fc, dim, i, j), (seed, dim, i, j)
                        checks += 1
        elapsed = time.perf_counter() - t0
        notes["checks"] = checks
        assert elapsed < 30.0


# 4 -------------------------------------------------------------------------------------

def test_c04_bottleneck_against_exhaustive_oracle():
    with criterion(4, "bottleneck equals exhaustive oracle; metric axioms") as notes:
        rng = np.random.default_rng(2024)

        def rand_dgm(k):
            b = rng.choice([rng.uniform(0, 3, k), np.floor(rng.uniform(0, 4, k))])
            return np.column_stack([b, b + rng.choice([rng.uniform(0, 3, k), np.ceil(rng.uniform(0, 3, k))])])

        worst = 0.0
        for _ in range(200):
            total = int(rng.integers(0, 7))
            ka = int(rng.integers(0, total + 1))
            D, E = rand_dgm(ka), rand_dgm(total - ka)
            fast, exact = bottleneck(D, E), bottleneck_oracle(D, E)
            worst = max(worst, abs(fast - exact))
            assert abs(fast - exact) <= 1e-12
            assert bottleneck(D, E) == bottleneck(E, D)
            assert bottleneck_oracle(D, E) == bottleneck_oracle(E, D)
        for _ in range(200):
            D, E, F = (rand_dgm(int(rng.integers(0, 10))) for _ in range(3))
            assert bottleneck(D, F) <= bottleneck(D, E) + bottleneck(E, F) + 1e-9
        notes["max_abs_diff"] = worst


# 5 -------------------------------------------------------------------------------------

def test_c05_stability_probe():
    with criterion(5, "Cech bottleneck within sqrt(2) * noise") as notes:
        violations, tightest = 0, 0.0
        for trial in range(100):
            rng = np.random.default_rng(trial)
            noise = float(rng.uniform(0.001, 0.05))
            res = stability_probe(sample_disc(50, trial), noise, seed=1000 + trial)
            violations += res.violated
            tightest = max(tightest, max(res.distances.values()) / res.bound)
        notes.update(violations=violations, max_ratio=f"{tightest:.3f}")
        assert violations == 0


# 6 -------------------------------------------------------------------------------------

def test_c06_landscape_identities():
    with criterion(6, "landscapes are k-th largest tents; silhouette of one bar is lambda_1") as notes:
        samples = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            k = int(rng.integers(1, 15))
            b = rng.uniform(0, 2, k)
            bars = np.column_stack([b, b + rng.uniform(0, 2, k)])
            L = landscapes(make_diagram(bars), 1, k_max=6, resolution=64)
            for n, t in enumerate(L.t_grid):
                tents = sorted((max(0.0, min(t - lo, hi - t)) for lo, hi in bars), reverse=True)
                tents += [0.0] * 6
                assert L.values[:, n].tolist() == tents[:6]
                samples += 1
            assert np.all(L.values[:-1] >= L.values[1:])
            one = make_diagram(bars[:1])
            assert np.array_equal(silhouette(one, 1, resolution=64).values, landscapes(one, 1, 1, 64).values[0])
        notes["grid_points"] = samples


# 7 -------------------------------------------------------------------------------------

def test_c07_signature_identities():
    with criterion(7, "shuffle, refinement and Chen identities; feature shapes") as notes:
        worst_shuffle = worst_refine = worst_chen = 0.0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = 2 + seed % 2
            path = rng.normal(size=(int(rng.integers(2, 8)), n))
            S = signature(path, 3)
            for _ in range(5):
                I = tuple(rng.integers(1, n + 1, size=int(rng.integers(1, 3))))
                J = tuple(rng.integers(1, n + 1, size=int(rng.integers(1, 4 - len(I)))))
                diff = abs(S[I] * S[J] - sum(S[K] for K in shuffle_product(I, J)))
                worst_shuffle = max(worst_shuffle, diff)
            k = int(rng.integers(0, len(path) - 1))
            extra = path[k] + np.sort(rng.uniform(0, 1, 3))[:, None] * (path[k + 1] - path[k])
            refined = np.vstack([path[:k + 1], extra, path[k + 1:]])
            worst_refine = max(worst_refine, np.max(np.abs(signature(refined, 3).flatten() - S.flatten())))
            tail = rng.normal(size=(4, n))
            tail = tail - tail[0] + path[-1]
            joined = signature(np.vstack([path, tail[1:]]), 3).flatten()
            worst_chen = max(worst_chen, np.max(np.abs(joined - (S @ signature(tail, 3)).flatten())))
        notes.update(shuffle=f"{worst_shuffle:.1e}", refine=f"{worst_refine:.1e}", chen=f"{worst_chen:.1e}")
        assert worst_shuffle <= 1e-9
        assert worst_refine <= 1e-12
        assert worst_chen <= 1e-12
        dgm = diagram(build_alpha(sample_annulus(100, 0.5, 1.0, 3)))
        assert signature_feature(dgm).shape == (2, 155)
        assert TRANSFORMERS["Resize_silhouette"].shape == (2, 200)
        assert np.vstack([silhouette(dgm, d).values for d in (0, 1)]).shape == (2, 200)


# 8 -------------------------------------------------------------------------------------

def test_c08_iou_golden_values():
    with criterion(8, "IoU of the two-class example masks") as notes:
        rep = iou_scores(*iou_masks(), 2)
        notes.update(per_class=" ".join(map(str, rep.per_class)), mean=f"{float(rep.total):.4f}")
        assert rep.per_class[1] == Fraction(1, 2)
        assert rep.per_class[0] == Fraction(13, 19)
        assert abs(float(rep.total) - 0.5921) < 5e-5


# 9 -------------------------------------------------------------------------------------

def test_c09_cosine_schedule():
    with criterion(9, "cosine annealing endpoints, midpoint, monotone") as notes:
        hi, lo, T = 0.1, 0.001, 100
        assert cosine_lr(ScheduleState(hi, lo, T, 0)) == hi
        assert cosine_lr(ScheduleState(hi, lo, T, T)) == lo
        assert abs(cosine_lr(ScheduleState(hi, lo, T, T / 2)) - (hi + lo) / 2) <= 1e-17
        sweep = [cosine_lr(ScheduleState(hi, lo, T, t)) for t in np.linspace(0, T, 1001)]
        assert all(a >= b for a, b in zip(sweep, sweep[1:]))
        notes["sweep_points"] = len(sweep)


# 10 / 11 ---------------------------------------------------------------------------------

@pytest.fixture(scope="module")
def synthetic_features(tmp_path_factory):
    """300 images per class written to disk, then featurised by both transformers."""
    root = tmp_path_factory.mktemp("synthetic")
    t0 = time.perf_counter()
    write_dataset(synth_dataset(300, seed=7), root / "images")
    out = {}
    for name in ("Resize_silhouette", "Contour_signature"):
        csv_path = root / f"{name}.csv"
        extract_batch(root / "images", TRANSFORMERS[name], csv_path, workers=1)
        out[name] = csv_path
    return root, out, time.perf_counter() - t0


def classify(csv_path):
    data = read_features_csv(csv_path)
    train, test = stratified_split(data, test_fraction=0.2, seed=7)
    model = train_logistic(train, epochs=100, batch=32, eta_max=0.1, eta_min=0.0, seed=7)
    return evaluate(model, test).accuracy


def test_c10_synthetic_classification(synthetic_features):
    with criterion(10, "synthetic three-class accuracy") as notes:
        _, csvs, extract_time = synthetic_features
        t0 = time.perf_counter()
        resize = classify(csvs["Resize_silhouette"])
        contour = classify(csvs["Contour_signature"])
        total = extract_time + time.perf_counter() - t0
        notes.update(Resize_silhouette=f"{resize:.3f}", Contour_signature=f"{contour:.3f}",
                     total_s=f"{total:.0f}")
        assert resize >= 0.80
        assert resize >= contour
        assert total < 300


def test_c11_batch_determinism(synthetic_features):
    with criterion(11, "byte-identical CSV with 1 and 8 workers") as notes:
        root, csvs, _ = synthetic_features
        parallel = root / "parallel.csv"
        extract_batch(root / "images", TRANSFORMERS["Resize_silhouette"], parallel, workers=8)
        a, b = csvs["Resize_silhouette"].read_bytes(), parallel.read_bytes()
        notes.update(rows=a.count(b"\n") - 1, bytes=len(a))
        assert a == b
