"""Acceptance criteria 1-11, each tagged for the PASS/FAIL summary."""
import io
import json
import subprocess
import sys
import time
from pathlib import Path

import numpy as np
import pytest

from gibbsgate.chain import ChainConfig, simulate, slln_estimate
from gibbsgate.cli import main
from gibbsgate.ergodic import check_aperiodic, compute_s0, doeblin_bruteforce, doeblin_certificate, tv_curve
from gibbsgate.fileformat import dumps_joint
from gibbsgate.fixtures import fixture_a, fixture_b, lower_triangle
from gibbsgate.kernel import (
    bc_iterates,
    build_kernel,
    check_corollary_21,
    limit_conditional_d,
    verify_theorem_41,
)
from gibbsgate.kgibbs import (
    build_k_kernel,
    build_kjoint,
    check_k_admissible,
    embed,
    oracle_d_trivial,
    oracle_theorem_32,
    uniform_supports,
)
from gibbsgate.sigma import (
    check_condition_4,
    check_gibbs_admissible,
    common_coarsening,
    complete,
    d_atoms,
    generated_completion,
    intersect_completed,
    j_class,
    oracle_condition_6,
)
from gibbsgate.space import build_joint
from gibbsgate.tip import (
    communicates,
    gen_example_316,
    gen_example_317,
    is_tip,
    tip_with_nontip_complement,
)

from helpers import mixed_joint, random_joint, random_weights, uniform_support_joints

DATA = Path(__file__).resolve().parent.parent / "data"
CORNER = np.array([[1.0, 0.0], [0.0, 0.0]])


def mixed_suite(count=120, seed=2024):
    rng = np.random.default_rng(seed)
    return [mixed_joint(rng, 8) for _ in range(count)], rng


@pytest.mark.criterion(1, "oracle equivalence (admissibility vs rectangle scan)")
def test_criterion_1_oracle_equivalence():
    rng = np.random.default_rng(1)
    t0 = time.perf_counter()
    disagree = 0
    kinds = set()
    for _ in range(1000):
        J = random_joint(rng, 5, 5)
        a = check_gibbs_admissible(J).admissible
        kinds.add(a)
        disagree += a != oracle_condition_6(J)
    patterns = 0
    for J in uniform_support_joints((3, 3)):
        patterns += 1
        disagree += check_gibbs_admissible(J).admissible != oracle_condition_6(J)
    elapsed = time.perf_counter() - t0
    assert patterns == 2**9 - 1
    assert kinds == {True, False}
    assert disagree == 0
    assert elapsed < 10.0, f"{elapsed:.2f} s"


def _random_partition_instance(rng):
    shapes = [(m, n) for m in range(1, 4) for n in range(1, 4)] + [(1, 9), (2, 4), (4, 2)]
    shape = shapes[rng.integers(len(shapes))]
    w = (rng.random(shape) < rng.uniform(0.3, 1.0)).astype(float)
    if not w.any():
        w[0, 0] = 1.0
    J = build_joint(w)
    piA = rng.integers(0, rng.integers(1, 5), shape)
    piB = rng.integers(0, rng.integers(1, 5), shape)
    return J, piA, piB


@pytest.mark.criterion(2, "completion of intersections vs the null-set condition, J class")
def test_criterion_2_theorem_31():
    rng = np.random.default_rng(2)
    outcomes = set()
    for _ in range(300):
        J, piA, piB = _random_partition_instance(rng)
        inter = intersect_completed(complete(J, piA), complete(J, piB))
        plain = complete(J, common_coarsening(piA, piB))
        holds = bool(check_condition_4(J, piA, piB))
        outcomes.add(holds)
        assert (inter == plain) == holds
        assert generated_completion(J, j_class(J, piA, piB)) == inter
    assert outcomes == {True, False}


@pytest.mark.criterion(3, "K^n phi equals phi_2n")
def test_criterion_3_theorem_41():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(120):
        J = build_joint(random_weights(rng, 8, 8))
        phi = rng.normal(size=J.shape)
        worst = max(worst, verify_theorem_41(J, phi, 20))
    assert worst <= 1e-10
    tr = bc_iterates(fixture_a(), CORNER, 4)
    assert np.max(np.abs(tr.steps[2][:, 0] - [0.5, 0.0])) <= 1e-12
    assert np.max(np.abs(tr.steps[4][:, 0] - [0.375, 0.25])) <= 1e-12


@pytest.mark.criterion(4, "alternating projections converge iff admissible")
def test_criterion_4_corollary_21():
    joints, rng = mixed_suite(seed=4)
    seen = set()
    for J in joints:
        adm = check_gibbs_admissible(J).admissible
        seen.add(adm)
        for _ in range(20):
            phi = rng.random(J.shape)
            assert check_corollary_21(J, phi, 1e-8, 500) == adm
    assert seen == {True, False}
    B = fixture_b()
    assert not check_corollary_21(B, CORNER, 1e-8, 500)
    lim = limit_conditional_d(B, CORNER)
    assert (lim[0, 0], lim[1, 1]) == (1.0, 0.0)
    tr = bc_iterates(B, CORNER, 500)
    assert (tr.steps[500][0, 0], tr.steps[500][1, 1]) == (1.0, 0.0)


@pytest.mark.criterion(5, "TV ergodicity iff admissible; S0 full; aperiodic")
def test_criterion_5_ergodicity():
    joints, _ = mixed_suite(seed=4)
    seen = set()
    for J in joints:
        adm = check_gibbs_admissible(J).admissible
        seen.add(adm)
        K = build_kernel(J)
        assert compute_s0(J, K).all()
        assert (tv_curve(J, K, 200).values[-1] < 1e-9) == adm
        if adm:
            assert check_aperiodic(J, K)
    assert seen == {True, False}


@pytest.mark.criterion(6, "Doeblin certificates and TV domination")
def test_criterion_6_doeblin():
    ca = doeblin_certificate(fixture_a())
    assert ca.epsilon == pytest.approx(0.5, abs=1e-15)
    ct = doeblin_certificate(lower_triangle(3))
    assert ct.epsilon == pytest.approx(1 / 3, abs=1e-15)
    assert ct.rate_bound == pytest.approx(2 / 3, abs=1e-15)
    for J, cert in ((fixture_a(), ca), (lower_triangle(3), ct)):
        assert doeblin_bruteforce(J) == pytest.approx(cert.epsilon, abs=1e-15)
        c = tv_curve(J, build_kernel(J), 30)
        assert np.all(c.values <= cert.rate_bound ** c.steps + 1e-12)


def _random_tip_pair(rng):
    m, n = (int(v) for v in rng.integers(2, 7, 2))
    p = rng.uniform(0.15, 0.6)
    F = rng.random((m, n)) < p
    G = rng.random((m, n)) < p
    return m, n, F, G


@pytest.mark.criterion(7, "TIP calculus and counterexample generators")
def test_criterion_7_tip():
    rng = np.random.default_rng(7)
    pairs = 0
    while pairs < 500:
        m, n, F, G = _random_tip_pair(rng)
        if not F.any() or not G.any():
            continue
        mu, nu = rng.uniform(0.5, 2, m), rng.uniform(0.5, 2, n)
        if not (is_tip(mu, nu, F).tip and is_tip(mu, nu, G).tip and communicates(mu, nu, F, G)):
            continue
        pairs += 1
        assert is_tip(mu, nu, F | G).tip
    for size in (2, 3, 4, 6, 8):
        H_list, inter = gen_example_316(size)
        ones = np.ones(size)
        assert all(is_tip(ones, ones, H).tip for H in H_list)
        assert all((b <= a).all() for a, b in zip(H_list, H_list[1:]))
        assert not is_tip(ones, ones, inter).tip
    for size in range(2, 8):
        for bits in range(1, 2**size - 1):
            I = np.array([(bits >> k) & 1 for k in range(size)], dtype=bool)
            rep = check_gibbs_admissible(gen_example_317(size, I))
            assert not rep.admissible and rep.atom_count == 2
    H = tip_with_nontip_complement()
    ones = np.ones(H.shape[0])
    assert is_tip(ones, ones, H).tip and not is_tip(ones, ones, ~H).tip


@pytest.mark.criterion(8, "SLLN simulation")
def test_criterion_8_slln():
    t0 = time.perf_counter()
    rep = slln_estimate(fixture_a(), CORNER, ChainConfig(seed=7, steps=1_000_000))
    elapsed = time.perf_counter() - t0
    assert abs(rep.finals[0] - 1 / 3) <= 1e-2
    assert elapsed < 5.0, f"{elapsed:.2f} s"
    rb = slln_estimate(fixture_b(), CORNER, ChainConfig(seed=7, steps=100_000, start=(0, 0)))
    assert np.all(rb.running_means[0] == 1.0)
    Q = np.array([[0.0, 0.9], [0.0, 0.1]])  # charges only support cells, so Q << P
    rq = slln_estimate(fixture_a(), CORNER, ChainConfig(seed=7, steps=1_000_000, start=Q))
    assert abs(rq.finals[0] - 1 / 3) <= 1e-2


@pytest.mark.criterion(9, "k-component admissibility, oracles and k = 2 kernel")
def test_criterion_9_kgibbs():
    count = 0
    for KJ in uniform_supports((2, 2, 2)):
        count += 1
        assert check_k_admissible(KJ).admissible == oracle_d_trivial(KJ)
    assert count == 255
    rng = np.random.default_rng(9)
    shapes = [(2, 2, 2), (3, 2, 2), (2, 3, 2), (2, 2, 2, 2)]
    for k in range(240):
        shape = shapes[k % len(shapes)]
        w = rng.uniform(0.1, 1.0, shape) * (rng.random(shape) >= rng.uniform(0, 0.8))
        if not w.any():
            w.flat[0] = 1.0
        KJ = build_kjoint(w)
        assert check_k_admissible(KJ).admissible == oracle_d_trivial(KJ)
    for _ in range(100):
        w = (rng.random((2, 2)) < 0.7).astype(float)
        if not w.any():
            w[1, 1] = 1.0
        J = build_joint(w)
        piA, piB = rng.integers(0, 3, (2, 2)), rng.integers(0, 3, (2, 2))
        assert oracle_theorem_32(embed(J), [piA, piB]) == bool(check_condition_4(J, piA, piB))
    for _ in range(50):
        J = build_joint(random_weights(rng, 5, 5))
        K2, K = build_k_kernel(embed(J)), build_kernel(J)
        assert K2.states == K.states and np.array_equal(K2.matrix, K.matrix)


@pytest.mark.criterion(10, "atomicity of D-measurable events")
def test_criterion_10_atomicity():
    rng = np.random.default_rng(10)
    checked = 0
    for _ in range(150):
        J = random_joint(rng, 5, 5)
        S = J.support
        m, n = J.shape
        atoms = d_atoms(J)
        # events measurable for both completions: unions of row traces that
        # are also unions of column traces
        for bits in range(1 << m):
            rows = np.array([(bits >> i) & 1 for i in range(m)], dtype=bool)
            F = S & rows[:, None]
            cols_hit = F.any(axis=0)
            if not np.array_equal(F, S & cols_hit[None, :]):
                continue
            for a in range(int(atoms.max()) + 1):
                K = atoms == a
                inside = (F & K).sum()
                assert inside == 0 or inside == K.sum()
                checked += 1
    assert checked > 500


def _run(argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], out=out)
    return code, out.getvalue()


@pytest.mark.criterion(11, "CLI determinism and oracle agreement")
def test_criterion_11_cli(tmp_path):
    commands = [
        ["check", DATA / "fixture_b.json", "--witness", "--atoms", "--oracle", "--format", "json"],
        ["atoms", DATA / "fixture_a.json"],
        ["iterate", DATA / "fixture_a.json", "--phi", DATA / "corner.json", "--steps", "12", "--csv", "{csv}"],
        ["ergodic", DATA / "triangle.json", "--doeblin", "--spectral", "--csv", "{csv}"],
        ["simulate", DATA / "fixture_a.json", "--phi", DATA / "corner.json", "--steps", "50000", "--seed", "9", "--chains", "3", "--csv", "{csv}", "--stride", "10"],
        ["kcheck", DATA / "cube_staircase.json", "--oracle", "--atoms"],
        ["tip", DATA / "fixture_a.json", "--sets", DATA / "bands.json", "--format", "json"],
    ]
    for k, cmd in enumerate(commands):
        results = []
        for rep in range(2):
            csv_path = tmp_path / f"out{k}_{rep}.csv"
            argv = [str(csv_path) if a == "{csv}" else a for a in cmd]
            code, out = _run(argv)
            data = csv_path.read_bytes() if csv_path.exists() else b""
            results.append((code, out, data))
        assert results[0] == results[1], cmd
    rng = np.random.default_rng(11)
    for k in range(60):
        J = random_joint(rng, 5, 5)
        p = tmp_path / f"j{k}.json"
        p.write_text(dumps_joint(J))
        code, out = _run(["check", p, "--oracle", "--witness", "--format", "json"])
        assert code == 0 and json.loads(out)["oracle"] == "agree"
    args = [sys.executable, "-m", "gibbsgate.cli", "simulate", str(DATA / "fixture_a.json"), "--phi", str(DATA / "corner.json"), "--steps", "20000", "--chains", "4"]
    outs = {subprocess.run(args, capture_output=True, check=True, env={"GIBBSGATE_THREADS": t, "PATH": ""}).stdout for t in ("1", "3")}
    assert len(outs) == 1
