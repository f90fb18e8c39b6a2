"""Acceptance suite: one test per criterion, printing one line per criterion.

The two sweep-scale criteria (memory-capacity trend and NARMA trend) share
per-trial runs of five reservoirs; multiplexing orders 1..5 are evaluated as
nested column prefixes of the order-5 ensemble, which keeps the order
comparison paired while every system still has fresh random couplings.
"""

import concurrent.futures
import multiprocessing
import time

import numpy as np
import pytest
from scipy.linalg import expm

import qrmux.qcore as qc
from qrmux import readout
from qrmux.harness import PAPER_TRIALS, derive_seed
from qrmux.reservoir import (
    ESNConfig,
    EnsembleConfig,
    QRSystem,
    QRSystemConfig,
    esn_run,
    run_ensemble,
)
from qrmux.tasks import (
    NARMA_ORDERS,
    NarmaSpec,
    PhaseProtocol,
    delay_targets,
    evaluate_features,
    generate_input,
    narma_targets,
)
from qrmux.theory import RegressionInstance, combination_bounds, residual_sq

ACCEPTANCE_SEED = 2026
TRIALS = 20
ORDERS = (1, 2, 3, 4, 5)
N_QUBITS = 5
VIRTUAL = 25
BLOCK = N_QUBITS * VIRTUAL
PROTOCOL = PhaseProtocol()  # default 2000/2000/2000
WORKERS = 2


def _report(name, ok, detail=""):
    status = "PASS" if ok else "FAIL"
    print(f"ACCEPTANCE {name}: {status} {detail}".rstrip())
    return ok


def _nested_trial(args):
    """One trial: five fresh systems, metrics for every order prefix."""
    tau, task, trial = args
    inputs = generate_input(PROTOCOL.total,
                            derive_seed(ACCEPTANCE_SEED, "input", tau, task, trial))
    blocks = []
    for c in range(5):
        cfg = QRSystemConfig(
            n_qubits=N_QUBITS, tau=tau, virtual_nodes=VIRTUAL,
            coupling_seed=derive_seed(ACCEPTANCE_SEED, "coupling", tau, task,
                                      trial, c))
        blocks.append(QRSystem(cfg).run(inputs))
    x_full = np.hstack(blocks)
    tr, ev = PROTOCOL.train_slice, PROTOCOL.eval_slice

    if task == "mc":
        targets = np.column_stack([delay_targets(inputs, d)
                                   for d in range(readout.MAX_DELAY + 1)])
    else:
        targets = np.column_stack([narma_targets(NarmaSpec(n), inputs)
                                   for n in NARMA_ORDERS])

    metrics = []
    residuals = []
    for order in ORDERS:
        x = x_full[:, :BLOCK * order]
        fits = readout.fit_many(x[tr], targets[tr])
        residuals.append([w.residual_sq for w in fits])
        coeffs = np.column_stack([w.as_vector() for w in fits])
        preds = np.hstack([np.ones((ev.stop - ev.start, 1)), x[ev]]) @ coeffs
        if task == "mc":
            mf = np.array([readout.memory_function(preds[:, d], targets[ev, d])
                           for d in range(readout.MAX_DELAY + 1)])
            metrics.append(readout.memory_capacity(mf))
        else:
            metrics.append([readout.nmse(preds[:, i], targets[ev, i])
                            for i in range(len(NARMA_ORDERS))])
    return metrics, residuals


def _run_trials(tau, task):
    jobs = [(tau, task, trial) for trial in range(TRIALS)]
    if WORKERS > 1:
        ctx = multiprocessing.get_context("fork")
        with concurrent.futures.ProcessPoolExecutor(max_workers=WORKERS,
                                                    mp_context=ctx) as pool:
            return list(pool.map(_nested_trial, jobs))
    return [_nested_trial(job) for job in jobs]


@pytest.fixture(scope="module")
def mc_runs():
    start = time.perf_counter()
    results = _run_trials(tau=1.0, task="mc")
    return results, time.perf_counter() - start


@pytest.fixture(scope="module")
def narma_runs():
    start = time.perf_counter()
    results = _run_trials(tau=2.0, task="narma")
    return results, time.perf_counter() - start


def test_quantum_core_invariants():
    # 1000 randomized inject+evolve steps across N = 2..5 preserve the
    # density-matrix invariants; propagators are unitary and compose
    start = time.perf_counter()
    rng = np.random.default_rng(ACCEPTANCE_SEED)
    steps_per_n = 250
    worst_trace = worst_herm = 0.0
    worst_eig = np.inf
    for n in (2, 3, 4, 5):
        h = qc.build_ising_hamiltonian(n, rng_seed=int(rng.integers(1 << 30)))
        prop = qc.propagator(h, float(rng.uniform(0.5, 4.0)))
        dim = 2**n
        assert np.max(np.abs(prop.matrix @ prop.matrix.conj().T
                             - np.eye(dim))) < 1e-9
        u1 = qc.propagator(h, 0.9).matrix
        u2 = qc.propagator(h, 1.7).matrix
        assert np.max(np.abs(u1 @ u2 - qc.propagator(h, 2.6).matrix)) < 1e-9

        rho = qc.random_density(n, rng)
        for _ in range(steps_per_n):
            rho = qc.evolve(qc.inject_input(rho, float(rng.random())), prop)
            arr = rho.entries
            worst_trace = max(worst_trace, abs(np.trace(arr).real - 1.0))
            worst_herm = max(worst_herm, float(np.max(np.abs(arr - arr.conj().T))))
            worst_eig = min(worst_eig, float(np.linalg.eigvalsh(arr)[0]))
    elapsed = time.perf_counter() - start
    ok = worst_trace < 1e-9 and worst_herm < 1e-9 and worst_eig > -1e-9 \
        and elapsed < 10.0
    assert _report("quantum-core-invariants", ok,
                   f"(trace {worst_trace:.1e}, herm {worst_herm:.1e}, "
                   f"min-eig {worst_eig:.1e}, {elapsed:.1f}s)")


def test_ptm_oracle_equivalence():
    # the 4^N transfer-matrix path and the density-matrix path agree per
    # coefficient over 100 random cases at N = 1, 2, 3
    start = time.perf_counter()
    rng = np.random.default_rng(ACCEPTANCE_SEED + 1)
    worst = 0.0
    cases = [1] * 34 + [2] * 33 + [3] * 33
    for n in cases:
        h = qc.build_ising_hamiltonian(n, rng_seed=int(rng.integers(1 << 30)))
        prop = qc.propagator(h, float(rng.uniform(0.1, 3.0)))
        u_val = float(rng.random())
        step = (qc.channel_to_ptm(qc.unitary_channel(prop.matrix), n).entries
                @ qc.channel_to_ptm(qc.injection_channel(u_val, 0, n), n).entries)
        rho = qc.random_density(n, rng)
        via_ptm = step @ qc.pauli_vector(rho)
        via_density = qc.pauli_vector(qc.evolve(qc.inject_input(rho, u_val), prop))
        worst = max(worst, float(np.max(np.abs(via_ptm - via_density))))
    elapsed = time.perf_counter() - start
    ok = worst < 1e-8 and elapsed < 30.0
    assert _report("ptm-oracle-equivalence", ok,
                   f"(100 cases, worst {worst:.1e}, {elapsed:.1f}s)")


def test_theory_exactness():
    start = time.perf_counter()
    rng = np.random.default_rng(ACCEPTANCE_SEED + 2)

    def oracle(design, target):
        design = np.atleast_2d(np.asarray(design, float))
        if design.shape[0] == 1:
            design = design.T
        coef = np.linalg.lstsq(design, target, rcond=None)[0]
        r = target - design @ coef
        return float(r @ r)

    ok = True
    for _ in range(200):
        x = rng.standard_normal((40, 4))
        b = rng.standard_normal((40, 4))
        y = rng.standard_normal(40)
        inst = RegressionInstance(x, y)
        bounds = combination_bounds(inst, b)
        exact = oracle(np.hstack([x, b]), y)
        r_a = residual_sq(inst)
        r_b = residual_sq(RegressionInstance(b, y))
        ok &= exact <= min(r_a, r_b) + 1e-9
        ok &= bounds.residual_lower - 1e-9 <= exact <= bounds.residual_upper + 1e-9
        ok &= abs(bounds.residual_combined - exact) < 1e-9

    # published counterexample: better solo partner, worse combination
    y3 = np.array([1.0, 1.0, 1.0])
    xa = np.array([0.25, 1.0, 0.0])
    xb = np.array([1.0, 0.0, 0.0])
    xc = np.array([0.0, 1.0, -1.0])
    inst = RegressionInstance(xa, y3)
    r_b = residual_sq(RegressionInstance(xb, y3))
    r_c = residual_sq(RegressionInstance(xc, y3))
    r_ab = combination_bounds(inst, xb).residual_combined
    r_ac = combination_bounds(inst, xc).residual_combined
    ok &= abs(r_b - oracle(xb, y3)) < 1e-9 and abs(r_b - 2.0) < 1e-9
    ok &= abs(r_c - oracle(xc, y3)) < 1e-9 and abs(r_c - 3.0) < 1e-9
    ok &= abs(r_ab - oracle(np.column_stack([xa, xb]), y3)) < 1e-9
    ok &= abs(r_ab - 1.0) < 1e-9
    ok &= abs(r_ac - oracle(np.column_stack([xa, xc]), y3)) < 1e-9
    ok &= abs(r_ac - 2.0 / 9.0) < 1e-9
    ok &= r_b <= r_c and r_ab > r_ac

    elapsed = time.perf_counter() - start
    ok = ok and elapsed < 10.0
    assert _report("theory-exactness", ok,
                   f"(200 instances + counterexample, {elapsed:.1f}s)")


def test_memory_capacity_trend(mc_runs):
    # averaged memory capacity strictly increases with the multiplexing
    # order and gains at least 1.3x from order 1 to order 5
    results, elapsed = mc_runs
    mcs = np.array([metrics for metrics, _residuals in results])  # (trials, 5)
    means = mcs.mean(axis=0)
    strictly_increasing = bool(np.all(np.diff(means) > 0))
    ratio = float(means[-1] / means[0])
    ok = strictly_increasing and ratio >= 1.3 and elapsed < 900.0
    assert _report(
        "memory-capacity-trend", ok,
        f"(means {np.array2string(means, precision=2)}, ratio {ratio:.2f}, "
        f"{elapsed:.0f}s)")


def test_narma_trend(narma_runs):
    # averaged NMSE for NARMA2/5/10 decreasing from order 1 to order 5,
    # NARMA5 improvement ratio at most 0.8, and difficulty ordering
    # NARMA2 < NARMA10 < NARMA20 on the averaged values
    results, elapsed = narma_runs
    nmse = np.array([metrics for metrics, _residuals in results])
    means = nmse.mean(axis=0)  # (orders, tasks) averaged over trials
    by_task = {n: means[:, i] for i, n in enumerate(NARMA_ORDERS)}

    checks = []
    for n in (2, 5, 10):
        decreasing = bool(by_task[n][-1] < by_task[n][0])
        checks.append(_report(
            f"narma-trend[narma{n}-decreasing]", decreasing,
            f"(order1 {by_task[n][0]:.3e} -> order5 {by_task[n][-1]:.3e})"))
    ratio5 = float(by_task[5][-1] / by_task[5][0])
    checks.append(_report("narma-trend[narma5-ratio<=0.8]", ratio5 <= 0.8,
                          f"(ratio {ratio5:.3f})"))
    ordering = bool(np.all(by_task[2] < by_task[10])
                    and np.all(by_task[10] < by_task[20]))
    checks.append(_report("narma-trend[difficulty-ordering]", ordering,
                          f"(order-wise means: narma2 {by_task[2].mean():.2e} "
                          f"< narma10 {by_task[10].mean():.2e} "
                          f"< narma20 {by_task[20].mean():.2e})"))
    checks.append(_report("narma-trend[runtime]", elapsed < 1200.0,
                          f"({elapsed:.0f}s)"))
    assert all(checks), "see ACCEPTANCE narma-trend lines above"


def test_training_window_monotonicity(mc_runs, narma_runs):
    # nested ensembles on a shared input: training residual per task is
    # non-increasing in the multiplexing order, for every trial
    tolerance = 1e-8
    worst = -np.inf
    for results in (mc_runs[0], narma_runs[0]):
        for _metrics, residuals in results:
            res = np.array(residuals)  # (orders, tasks)
            worst = max(worst, float(np.max(np.diff(res, axis=0))))
    ok = worst <= tolerance
    assert _report("training-window-monotonicity", ok,
                   f"(max residual increase {worst:.2e})")


def test_degenerate_duplication():
    # duplicating an identical reservoir (common-input synchronization
    # limit) must not change the training residual or crash the fit
    protocol = PhaseProtocol(washout=300, train=500, eval=400)
    base = QRSystemConfig(n_qubits=3, tau=1.0, virtual_nodes=5, coupling_seed=4)
    single = EnsembleConfig((base,))
    duplicated = EnsembleConfig((base, base))
    inputs = generate_input(protocol.total, ACCEPTANCE_SEED + 3)
    targets = narma_targets(NarmaSpec(10), inputs)
    tr = protocol.train_slice

    x1 = run_ensemble(single, inputs).values
    x2 = run_ensemble(duplicated, inputs).values
    assert np.array_equal(x2[:, :15], x2[:, 15:])
    w1 = readout.fit(x1[tr], targets[tr])
    w2 = readout.fit(x2[tr], targets[tr])
    gap = abs(w1.residual_sq - w2.residual_sq)
    ok = gap < 1e-8 and np.all(np.isfinite(w2.as_vector()))
    assert _report("degenerate-duplication", ok, f"(residual change {gap:.2e})")


def test_esn_baseline_sanity():
    # reference network: finite memory capacity within the node bound, and
    # more nodes give more capacity on average
    mcs = {20: [], 100: []}
    for n_nodes in (20, 100):
        for trial in range(TRIALS):
            cfg = ESNConfig(n_nodes=n_nodes, spectral_radius=0.9,
                            input_scale=0.01,
                            weight_seed=derive_seed(ACCEPTANCE_SEED, "esn-w",
                                                    n_nodes, trial))
            inputs = generate_input(PROTOCOL.total,
                                    derive_seed(ACCEPTANCE_SEED, "esn-i",
                                                n_nodes, trial))
            features = esn_run(cfg, inputs)
            result = evaluate_features(features, inputs, "memory_capacity",
                                       PROTOCOL)
            mcs[n_nodes].append(result.mc)
    mean20 = float(np.mean(mcs[20]))
    mean100 = float(np.mean(mcs[100]))
    finite = all(np.isfinite(v) and 5.0 < v < 101.0 for v in mcs[100])
    ok = finite and mean100 > mean20
    assert _report("esn-baseline-sanity", ok,
                   f"(MC 20 nodes {mean20:.1f}, 100 nodes {mean100:.1f})")


def test_paper_scale_note():
    # the full 100-trial grid of the original figures is not part of the
    # default acceptance run; it stays reachable through --paper-scale
    from qrmux.cli import build_parser

    args = build_parser().parse_args(["run", "--preset", "appendix",
                                      "--paper-scale", "--out", "x"])
    assert args.paper_scale and PAPER_TRIALS == 100
    _report("paper-scale-note", True,
            "(full-scale reproduction via: qrmux run --preset appendix "
            "--paper-scale)")
