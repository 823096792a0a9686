import numpy as np
import pytest

from pird import (
    ArgumentError,
    Scenario,
    VarModel,
    build_scenario,
    coarse_grained,
    default_submodel_order,
    gaussian_mi,
    instantaneous_info,
    integrate_full,
    mir_decomposition,
    psd_from_var,
    spectral_mir,
    static_pid,
    submodel_innovation,
    te_pid,
    transfer_entropy,
)
from pird.baselines import baseline_rows

from conftest import make_model_set

COR08 = np.eye(3) * 0.2 + 0.8


# ---------------------------------------------------------------------------
# Gaussian MI


def test_gaussian_mi_independence():
    assert gaussian_mi(np.diag([1.0, 2.0, 3.0]), 0, [1, 2]) == pytest.approx(0.0, abs=1e-14)


def test_gaussian_mi_bivariate_correlation():
    cov = np.array([[1.0, 0.8], [0.8, 1.0]])
    assert gaussian_mi(cov, 0, [1]) == pytest.approx(-0.5 * np.log(0.36), abs=1e-14)


def test_gaussian_mi_joint_three_way():
    assert gaussian_mi(COR08, 0, [1, 2]) == pytest.approx(
        0.5 * np.log(0.36 / 0.104), abs=1e-13
    )


def test_gaussian_mi_input_validation():
    with pytest.raises(ArgumentError, match="positive definite"):
        gaussian_mi(np.array([[1.0, 1.0], [1.0, 1.0]]), 0, [1])
    with pytest.raises(ArgumentError, match="symmetric"):
        gaussian_mi(np.array([[1.0, 0.5], [0.1, 1.0]]), 0, [1])
    with pytest.raises(ArgumentError):
        gaussian_mi(np.eye(2), 0, [0])


def test_gaussian_mi_nonnegative_on_random_covariances():
    rng = np.random.default_rng(11)
    for _ in range(20):
        w = rng.standard_normal((4, 4))
        cov = w @ w.T + 0.5 * np.eye(4)
        assert gaussian_mi(cov, 0, [1, 2, 3]) >= -1e-12


# ---------------------------------------------------------------------------
# static PID


def test_static_pid_sim1_c0(grid):
    m = build_scenario(Scenario("sim1", {"c": 0.0}))
    res = static_pid(m, 0)
    assert res.redundancy == pytest.approx(-0.5 * np.log(0.36), abs=1e-12)
    assert res.unique == pytest.approx((0.0, 0.0), abs=1e-12)
    assert res.synergy == pytest.approx(
        0.5 * np.log(0.36 / 0.104) + 0.5 * np.log(0.36), abs=1e-12
    )
    # identical to the spectral route in the absence of dynamics
    pird = coarse_grained(psd_from_var(m, grid), 0).terms["FULL"]
    assert abs(res.redundancy - pird.redundancy) < 1e-6
    assert abs(res.synergy - pird.synergy) < 1e-6


def test_static_pid_uncorrelated_white_is_zero():
    m = VarModel(coeffs=np.zeros((0, 3, 3)), sigma=np.eye(3))
    res = static_pid(m, 0)
    for v in (res.mi_joint, res.redundancy, res.synergy, *res.unique):
        assert abs(v) < 1e-12


def test_static_pid_additivity_identity():
    for m in make_model_set(count=6, seed=3):
        if m.dim < 3:
            continue
        res = static_pid(m, 0)
        total = sum(res.unique) + res.redundancy + res.synergy
        assert abs(total - res.mi_joint) < 1e-10
        for u, mi in zip(res.unique, res.mi_marginals):
            assert u == pytest.approx(mi - res.redundancy, abs=1e-12)


# ---------------------------------------------------------------------------
# transfer entropy


def test_te_joint_sim2_c0_closed_form():
    m = build_scenario(Scenario("sim2", {"c": 0.0}))
    te = transfer_entropy(m, [1, 2], 0)
    assert te == pytest.approx(0.5 * np.log(4.2), abs=1e-10)


def test_te_vanishes_without_coupling():
    m = build_scenario(Scenario("sim2", {"c": 0.8}))  # X -> Y links zeroed
    assert transfer_entropy(m, [1, 2], 0) < 1e-6
    assert transfer_entropy(m, [1], 0) < 1e-6


def test_te_marginal_sim2_c0_closed_forms():
    # the bivariate sub-models are exact here: var(Y)=4.2, and conditioning
    # on one source's past removes its own contribution
    m = build_scenario(Scenario("sim2", {"c": 0.0}))
    te1 = transfer_entropy(m, [1], 0)
    te2 = transfer_entropy(m, [2], 0)
    assert te1 == pytest.approx(0.5 * np.log(4.2 / (4.2 - 0.64)), abs=1e-10)
    assert te2 == pytest.approx(0.5 * np.log(4.2 / (4.2 - 2.56)), abs=1e-10)


def test_te_precondition_errors():
    m = build_scenario(Scenario("sim2", {"c": 0.2}))
    with pytest.raises(ArgumentError, match="target and source"):
        transfer_entropy(m, [0, 1], 0)
    with pytest.raises(ArgumentError):
        transfer_entropy(m, [], 0)
    with pytest.raises(ArgumentError, match="conditioning"):
        transfer_entropy(m, [1], 0, conditioning=[1])
    with pytest.raises(ArgumentError):
        submodel_innovation(m, [0], 0)


def test_te_vector_target(sim3_model):
    # transfer to a group: reduces the group's innovation determinant
    te = transfer_entropy(sim3_model, [1], [0, 2])
    assert te > 0.1
    no_link = transfer_entropy(sim3_model, [2], [3])
    assert no_link < 1e-8


def test_te_conditioning_changes_marginals(sim3_model):
    biv = transfer_entropy(sim3_model, [2], 0)
    cond = transfer_entropy(sim3_model, [2], 0, conditioning=[1, 3])
    # X2's apparent influence on Y disappears given X1 and X3
    assert biv > 0.01
    assert cond < 1e-6


def test_te_reduced_order_convergence(sim3_model, benchmark_models):
    for m in [sim3_model, benchmark_models[1]]:
        q_star = None
        for q in (8, 16, 32, 64):
            a = transfer_entropy(m, list(range(1, m.dim)), 0, q=q)
            b = transfer_entropy(m, list(range(1, m.dim)), 0, q=2 * q)
            if abs(a - b) < 1e-6:
                q_star = q
                break
        assert q_star is not None, "no convergence below q=64"
        print(f"sub-model order converged at q*={q_star}")


def test_te_szegoe_quadrature_oracle(sim3_model):
    # independent route: innovation variances from the log-spectrum integral
    grid_n = 16385
    from pird import FrequencyGrid

    grid = FrequencyGrid(fs=1.0, n_points=grid_n)
    psd = psd_from_var(sim3_model, grid)

    def szegoe_logdet(channels):
        sub = psd.mats[np.ix_(range(grid_n), channels, channels)]
        sign, logdet = np.linalg.slogdet(sub)
        return np.trapezoid(logdet, grid.omegas) / np.pi

    # T_{X->Y}: reduced = {Y}, full = all channels
    ld_red = szegoe_logdet([0])
    ld_full_joint = szegoe_logdet([0, 1, 2, 3])
    ld_sources = szegoe_logdet([1, 2, 3])
    # det of the Y-innovation given everything = det(joint)/det(sources)
    te_oracle = 0.5 * (ld_red - (ld_full_joint - ld_sources))
    te = transfer_entropy(sim3_model, [1, 2, 3], 0, q=64)
    assert te == pytest.approx(te_oracle, abs=1e-7)


def test_submodel_innovation_full_set_recovers_sigma(sim3_model):
    sig = submodel_innovation(sim3_model, range(4), q=32)
    assert np.max(np.abs(sig - sim3_model.sigma)) < 1e-10


def test_default_submodel_order():
    m = build_scenario(Scenario("sim3"))
    assert default_submodel_order(m) == 32
    m2 = VarModel(coeffs=np.zeros((8, 2, 2)), sigma=np.eye(2))
    assert default_submodel_order(m2) == 64


# ---------------------------------------------------------------------------
# instantaneous information


def test_instantaneous_info_diagonal_is_zero():
    m = build_scenario(Scenario("sim2", {"c": 0.5}))
    assert instantaneous_info(m, [1, 2], 0) == pytest.approx(0.0, abs=1e-14)


def test_instantaneous_info_sim1_c0_equals_joint_mir():
    m = build_scenario(Scenario("sim1", {"c": 0.0}))
    inst = instantaneous_info(m, [1, 2], 0)
    assert inst == pytest.approx(0.5 * np.log(0.36 / 0.104), abs=1e-13)


# ---------------------------------------------------------------------------
# TE PID


def test_te_pid_sim2_extremes():
    m8 = build_scenario(Scenario("sim2", {"c": 0.8}))
    res8 = te_pid(m8, 0)
    for v in (res8.te_joint, res8.redundancy, res8.synergy, *res8.unique):
        assert abs(v) < 1e-6
    m0 = build_scenario(Scenario("sim2", {"c": 0.0}))
    res0 = te_pid(m0, 0)
    assert res0.te_joint == pytest.approx(0.5 * np.log(4.2), abs=1e-9)
    total = sum(res0.unique) + res0.redundancy + res0.synergy
    assert abs(total - res0.te_joint) < 1e-12


def test_te_pid_symmetric_sources_have_no_unique_share():
    # two identical sources both driving the target the same way
    a = np.zeros((1, 3, 3))
    a[0][0, 1] = 0.5
    a[0][0, 2] = 0.5
    m = VarModel(coeffs=a, sigma=np.eye(3))
    res = te_pid(m, 0)
    assert res.unique[0] == pytest.approx(0.0, abs=1e-10)
    assert res.unique[1] == pytest.approx(0.0, abs=1e-10)


def test_te_pid_conditioned_variant(sim3_model):
    biv = te_pid(sim3_model, 0)
    cond = te_pid(sim3_model, 0, conditioned=True)
    assert biv.te_joint == pytest.approx(cond.te_joint, abs=1e-12)
    assert biv.redundancy != pytest.approx(cond.redundancy, abs=1e-6)


def test_te_nonnegative_across_models():
    for m in make_model_set(count=8, seed=71):
        srcs = list(range(1, m.dim))
        assert transfer_entropy(m, srcs, 0) >= -1e-10
        assert transfer_entropy(m, [0], srcs) >= -1e-10


# ---------------------------------------------------------------------------
# additive MIR split (the Geweke-style identity)


def test_mir_identity_on_benchmarks(grid, benchmark_models):
    for m in benchmark_models:
        psd = psd_from_var(m, grid)
        mir = integrate_full(spectral_mir(psd, 0, list(range(1, m.dim))))
        tx, ty, inst = mir_decomposition(m, 0)
        assert abs(mir - (tx + ty + inst)) < 1e-4


def test_mir_identity_on_random_models(grid):
    for m in make_model_set(count=10, seed=2025):
        psd = psd_from_var(m, grid)
        mir = integrate_full(spectral_mir(psd, 0, list(range(1, m.dim))))
        tx, ty, inst = mir_decomposition(m, 0)
        assert abs(mir - (tx + ty + inst)) < 1e-4
        assert tx >= -1e-10 and ty >= -1e-10 and inst >= -1e-10


# ---------------------------------------------------------------------------
# export rows


def test_baseline_rows_schema():
    m = build_scenario(Scenario("sim1", {"c": 0.0}))
    rows = baseline_rows(static_pid(m, 0), ("X1", "X2"), "staticPID")
    terms = [r[0] for r in rows]
    assert terms == [
        "staticPID:U_X1",
        "staticPID:U_X2",
        "staticPID:R",
        "staticPID:S",
        "staticPID:Delta",
        "staticPID:JointMIR",
    ]
    assert all(band == "FULL" for _, band, _ in rows)
