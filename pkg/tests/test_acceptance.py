"""Acceptance gate: numbered end-to-end checks, one PASS line each.

Each test covers one acceptance criterion at its stated tolerance and prints
a single line on success, so `pytest -sv tests/test_acceptance.py` reads as a
checklist. Library-level criteria recompute their expectations with
independent arithmetic (double loops, enumeration, central differences); the
pipeline criteria run the real command-line entry point on a planted
landscape written to disk.
"""

import itertools
import json
import math
import time

import numpy as np
import pytest
import scipy.stats

from domainscale.cli import main
from domainscale.embeddings import (
    EmbeddingStore,
    apply_whitening,
    cosine_distance,
    fit_whitening,
)
from domainscale.grouping import (
    CategoryDistanceMatrix,
    average_linkage_cluster,
    category_distance,
)
from domainscale.labeling import (
    accuracy,
    logreg_loss_and_grad,
    train_logreg,
    train_majority,
)
from domainscale.scaling import classical_mds_axis1, load_rile_codes, mantel, pearson, rile
from domainscale.similarity import PartyDistanceMatrix, labels_from_codes
from domainscale.synthetic import corrupt_labels, make_blobs, write_planted_landscape

from conftest import random_corpus_with_store


def ok(num: int, text: str) -> None:
    print(f"PASS [{num:02d}] {text}")


def fresh_rng(tag: int):
    return np.random.Generator(np.random.Philox(986100 + tag))


# ------------------------------------------------------------ 1 whitening


def test_criterion_01_whitening_yields_identity_covariance():
    rng = fresh_rng(1)
    mixing = rng.normal(size=(32, 32))
    x = rng.normal(size=(500, 32)) @ mixing + rng.normal(size=32)
    ids = tuple(f"v{i:04d}" for i in range(500))
    store = EmbeddingStore(ids, x)

    start = time.perf_counter()
    w = fit_whitening(store, ids)
    elapsed = time.perf_counter() - start

    y = apply_whitening(w, x)
    cov = np.cov(y, rowvar=False, ddof=1)
    worst = float(np.max(np.abs(cov - np.eye(32))))
    assert worst <= 1e-6
    assert elapsed < 1.0
    ok(1, f"whitening: 500x32 covariance within {worst:.2e} of identity in {elapsed:.3f}s")


# ------------------------------------------------------------ 2 clustering


def naive_average_linkage(codes, d):
    """Cubic-cost reference recomputing every cluster-pair mean from leaves."""
    n = len(codes)
    clusters = {i: frozenset([i]) for i in range(n)}
    next_id = n
    merges = []
    while len(clusters) > 1:
        best = None
        for a, b in itertools.combinations(sorted(clusters), 2):
            total = sum(d[x][y] for x in clusters[a] for y in clusters[b])
            avg = total / (len(clusters[a]) * len(clusters[b]))
            rep_a = min(codes[x] for x in clusters[a])
            rep_b = min(codes[x] for x in clusters[b])
            key = (avg, tuple(sorted((rep_a, rep_b))))
            if best is None or key < best[0]:
                best = (key, a, b)
        (avg, _), a, b = best
        members = clusters.pop(a) | clusters.pop(b)
        clusters[next_id] = members
        next_id += 1
        merges.append((frozenset(codes[x] for x in members), avg))
    return merges


def test_criterion_02_clustering_matches_naive_reference():
    rng = fresh_rng(2)
    codes = tuple(f"c{i}" for i in range(8))
    worst = 0.0
    for _ in range(25):
        raw = rng.uniform(0.1, 2.0, size=(8, 8))
        d = (raw + raw.T) / 2.0
        np.fill_diagonal(d, 0.0)
        dgram = average_linkage_cluster(CategoryDistanceMatrix(codes=codes, d=d))
        reference = naive_average_linkage(codes, d)
        heights = [m[2] for m in dgram.merges]
        assert heights == sorted(heights), "merge heights must be non-decreasing"
        for i, (want_members, want_height) in enumerate(reference):
            assert dgram.members(8 + i) == want_members
            worst = max(worst, abs(dgram.merges[i][2] - want_height))
            assert abs(dgram.merges[i][2] - want_height) <= 1e-12
    ok(2, f"clustering: 25 random 8-leaf trees match naive reference within {worst:.2e}")


# ------------------------------------------------------------ 3 category distance


def test_criterion_03_category_distance_matches_double_loop():
    rng = fresh_rng(3)
    codes = tuple(f"c{i:02d}" for i in range(11))
    corpus, store = random_corpus_with_store(
        rng, parties=("x",), codes=codes, dim=6, per_code=(2, 10)
    )
    w = fit_whitening(store, [s.id for s in corpus])
    by_code = {c: [s.id for s in corpus if s.code == c] for c in codes}

    pairs = list(itertools.combinations(codes, 2))
    assert len(pairs) >= 50
    worst = 0.0
    for p, q in pairs:
        fast = category_distance(corpus, store, w, p, q)
        total = 0.0
        for a in by_code[p]:
            va = apply_whitening(w, store.vector(a))
            for b in by_code[q]:
                total += cosine_distance(va, apply_whitening(w, store.vector(b)))
        slow = total / (len(by_code[p]) * len(by_code[q]))
        worst = max(worst, abs(fast - slow))
        assert abs(fast - slow) <= 1e-12
    ok(3, f"category distance: {len(pairs)} random pairs match brute force within {worst:.2e}")


# ------------------------------------------------------------ 4 scaling


def test_criterion_04_mds_recovers_colinear_and_two_party_geometry():
    pts = np.array([0.0, 1.0, 2.5, 4.0, 7.0, 11.0])
    d = np.abs(pts[:, None] - pts[None, :])
    m = PartyDistanceMatrix(
        parties=tuple(f"p{i}" for i in range(6)), values=d, tag="t", coverage={}
    )
    result = classical_mds_axis1(m)
    recon = np.abs(result.positions[:, None] - result.positions[None, :])
    err = float(np.max(np.abs(recon - d)))
    assert err <= 1e-9

    t = 3.0
    two = PartyDistanceMatrix(
        parties=("a", "b"), values=np.array([[0.0, t], [t, 0.0]]), tag="t", coverage={}
    )
    pair = classical_mds_axis1(two)
    assert abs(abs(pair.position_of("a")) - t / 2) <= 1e-12
    assert abs(abs(pair.position_of("b")) - t / 2) <= 1e-12
    ok(4, f"scaling: colinear points reconstructed within {err:.2e}, pair at +-t/2")


# ------------------------------------------------------------ 5 mantel


def test_criterion_05_mantel_exact_p_matches_enumeration():
    rng = fresh_rng(5)

    def rand_matrix(n):
        raw = rng.uniform(0.1, 2.0, size=(n, n))
        d = (raw + raw.T) / 2.0
        np.fill_diagonal(d, 0.0)
        return d

    iu = np.triu_indices(4, k=1)
    for _ in range(10):
        a, b = rand_matrix(4), rand_matrix(4)
        result = mantel(a, b)
        r_obs = scipy.stats.pearsonr(a[iu], b[iu]).statistic
        count = 0
        for perm in itertools.permutations(range(4)):
            idx = np.array(perm)
            permuted = b[np.ix_(idx, idx)]
            if scipy.stats.pearsonr(a[iu], permuted[iu]).statistic >= r_obs:
                count += 1
        assert result.exact and result.n_perm == 24
        assert result.p == count / 24

    d = rand_matrix(5)
    assert mantel(d, d).r == 1.0
    ok(5, "mantel: exact p equals full enumeration on 10 random 4x4 pairs, self r = 1")


# ------------------------------------------------------------ 6 left-right index


def test_criterion_06_left_right_index_textbook_value():
    right, left = load_rile_codes()
    counts = {"104": 30, "105": 10, "501": 60}
    assert "104" in right and "105" in left and "501" not in right | left
    score = rile(counts, right, left)
    assert score == 0.2
    doubled = {k: 2 * v for k, v in counts.items()}
    assert rile(doubled, right, left) == score
    ok(6, "left-right index: (30-10)/100 scores 0.2 exactly, duplication invariant")


# ------------------------------------------------------------ 7 classifier


def test_criterion_07_classifier_accuracy_gradient_and_baseline():
    x_train, y_train, x_test, y_test = make_blobs(n_train=200, n_test=100, dim=8)
    model = train_logreg(x_train, y_train)
    acc = accuracy(model.predict(x_test), y_test)
    assert acc >= 0.95

    rng = fresh_rng(7)
    xs = rng.normal(size=(15, 4))
    ys = np.zeros((15, 3))
    ys[np.arange(15), rng.integers(0, 3, size=15)] = 1.0
    wgt = rng.normal(size=(3, 4)) * 0.3
    bias = rng.normal(size=3) * 0.3
    _, grad_w, grad_b = logreg_loss_and_grad(wgt, bias, xs, ys, 1e-3)
    eps = 1e-6
    worst = 0.0
    for idx in np.ndindex(wgt.shape):
        wp, wm = wgt.copy(), wgt.copy()
        wp[idx] += eps
        wm[idx] -= eps
        fd = (
            logreg_loss_and_grad(wp, bias, xs, ys, 1e-3)[0]
            - logreg_loss_and_grad(wm, bias, xs, ys, 1e-3)[0]
        ) / (2 * eps)
        rel = abs(fd - grad_w[idx]) / max(abs(fd), abs(grad_w[idx]), 1e-8)
        worst = max(worst, rel)
        assert rel <= 1e-4
    for i in range(3):
        bp, bm = bias.copy(), bias.copy()
        bp[i] += eps
        bm[i] -= eps
        fd = (
            logreg_loss_and_grad(wgt, bp, xs, ys, 1e-3)[0]
            - logreg_loss_and_grad(wgt, bm, xs, ys, 1e-3)[0]
        ) / (2 * eps)
        rel = abs(fd - grad_b[i]) / max(abs(fd), abs(grad_b[i]), 1e-8)
        worst = max(worst, rel)
        assert rel <= 1e-4

    baseline = train_majority(y_train, dim=8)
    base_acc = accuracy(baseline.predict(x_test), y_test)
    majority_class = baseline.metadata["majority_class"]
    assert base_acc == y_test.count(majority_class) / len(y_test)
    assert base_acc == max(y_test.count(c) for c in set(y_test)) / len(y_test)
    ok(
        7,
        f"classifier: blob accuracy {acc:.3f} >= 0.95, gradient error {worst:.2e}, "
        f"majority baseline exact",
    )


# ------------------------------------------------------------ 8-10 pipeline

STAGES = ("group", "train", "predict", "leval", "similarity", "evaluate")


@pytest.fixture(scope="module")
def pipeline(tmp_path_factory, planted):
    root = tmp_path_factory.mktemp("acceptance")
    paths = write_planted_landscape(planted, root / "data")
    config = {
        "corpus": "data/corpus.jsonl",
        "embeddings": "data/embeddings.emb1",
        "scheme": "data/scheme.json",
        "n_domains": 4,
        "epochs": 150,
        "holdout": 0.1,
    }
    cfg = root / "config.json"
    cfg.write_text(json.dumps(config, indent=2), encoding="utf-8")

    base = ["--config", str(cfg)]
    timings: dict[tuple[str, str], float] = {}
    outs: dict[tuple[str, str], object] = {}

    def run(stage, variant, argv):
        out = root / f"{stage}_{variant}"
        start = time.perf_counter()
        rc = main(argv + ["--out", str(out)])
        timings[(stage, variant)] = time.perf_counter() - start
        assert rc == 0, f"{stage} run {variant} failed"
        return out

    for variant, threads in (("a", "1"), ("b", "1"), ("c", "8")):
        t = ["--threads", threads]
        outs[("group", variant)] = run("group", variant, ["group", *base, *t])
        outs[("train", variant)] = run("train", variant, ["label", "train", *base, *t])
        model = ["--model", str(outs[("train", "a")] / "model.json")]
        outs[("predict", variant)] = run(
            "predict", variant, ["label", "predict", *base, *model, *t]
        )
        outs[("leval", variant)] = run(
            "leval", variant, ["label", "eval", *base, *model, *t]
        )
        outs[("similarity", variant)] = run(
            "similarity", variant, ["similarity", *base, *t]
        )
        outs[("evaluate", variant)] = run(
            "evaluate",
            variant,
            [
                "evaluate",
                *base,
                "--reference",
                str(paths["planted_aggregate"]),
                *t,
            ],
        )

    return {
        "root": root,
        "config": cfg,
        "paths": paths,
        "outs": outs,
        "timings": timings,
    }


def test_criterion_08_planted_landscape_recovered(pipeline, planted):
    report = json.loads(
        (pipeline["outs"][("evaluate", "a")] / "report.json").read_text(encoding="utf-8")
    )
    worst_r = 1.0
    for domain, block in report["domains"].items():
        parties = block["scaling"]["parties"]
        axis = block["scaling"]["positions"]
        truth = [planted.positions[domain][p] for p in parties]
        r, _ = pearson(axis, truth)
        worst_r = min(worst_r, abs(r))
        assert abs(r) >= 0.95, f"{domain}: |r|={abs(r):.4f}"

    agg = report["aggregate"]["mantel_vs_reference"]
    assert agg["exact"] is True
    assert agg["r"] >= 0.9
    assert agg["p"] <= 0.05

    elapsed = pipeline["timings"][("similarity", "a")] + pipeline["timings"][("evaluate", "a")]
    assert elapsed < 60.0
    ok(
        8,
        f"planted landscape: per-domain |r| >= {worst_r:.4f}, aggregate mantel "
        f"r={agg['r']:.4f} p={agg['p']:.5f}, pipeline {elapsed:.1f}s",
    )


def test_criterion_09_label_coherence(pipeline, planted):
    root = pipeline["root"]
    gold = labels_from_codes(planted.corpus, planted.scheme)

    gold_path = root / "gold_predictions.jsonl"
    with gold_path.open("w", encoding="utf-8") as fh:
        for s in planted.corpus:
            rec = {"id": s.id, "predicted_domain": gold[s.id]}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    base = ["--config", str(pipeline["config"])]
    sim_gold = root / "sim_goldpred"
    rc = main(
        [
            "similarity",
            *base,
            "--labels",
            "predicted",
            "--predictions",
            str(gold_path),
            "--out",
            str(sim_gold),
        ]
    )
    assert rc == 0

    annotated = pipeline["outs"][("similarity", "a")]
    domains = sorted(planted.scheme.domain_names())
    matrix_files = [f"domain_{d}.{ext}" for d in domains for ext in ("json", "csv")]
    matrix_files += ["aggregate.json", "aggregate.csv"]
    for name in matrix_files:
        assert (sim_gold / name).read_bytes() == (annotated / name).read_bytes(), name

    corrupted = corrupt_labels(gold, 0.3, choices=domains, seed=4)
    assert sum(corrupted[k] != gold[k] for k in gold) == round(0.3 * len(gold))
    corrupt_path = root / "corrupt_predictions.jsonl"
    with corrupt_path.open("w", encoding="utf-8") as fh:
        for s in planted.corpus:
            rec = {"id": s.id, "predicted_domain": corrupted[s.id]}
            fh.write(json.dumps(rec, sort_keys=True) + "\n")

    sim_corrupt = root / "sim_corrupt"
    rc = main(
        [
            "similarity",
            *base,
            "--labels",
            "predicted",
            "--predictions",
            str(corrupt_path),
            "--out",
            str(sim_corrupt),
        ]
    )
    assert rc == 0

    drops = []
    for domain in domains:
        m_gold = PartyDistanceMatrix.from_json(annotated / f"domain_{domain}.json")
        m_corr = PartyDistanceMatrix.from_json(sim_corrupt / f"domain_{domain}.json")
        r_self = mantel(m_gold, m_gold).r
        r_corr = mantel(m_corr, m_gold).r
        assert r_corr < r_self, f"{domain}: {r_corr} !< {r_self}"
        drops.append(r_self - r_corr)
    ok(
        9,
        f"label coherence: gold predictions byte-identical, 30% corruption drops "
        f"every domain mantel r by >= {min(drops):.4f}",
    )


def test_criterion_10_reruns_and_threading_byte_identical(pipeline):
    def snapshot(out):
        return {p.name: p.read_bytes() for p in sorted(out.iterdir()) if p.is_file()}

    for stage in STAGES:
        a = snapshot(pipeline["outs"][(stage, "a")])
        b = snapshot(pipeline["outs"][(stage, "b")])
        c = snapshot(pipeline["outs"][(stage, "c")])
        assert a.keys() == b.keys() == c.keys(), stage
        for name in a:
            assert a[name] == b[name], f"{stage}/{name} differs between reruns"
            assert a[name] == c[name], f"{stage}/{name} differs across thread counts"
    ok(10, f"determinism: {len(STAGES)} subcommands byte-identical across reruns and threads 1/8")
