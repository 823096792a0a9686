"""Reference decompositions: static zero-lag Gaussian PID, transfer-entropy
PID via Granger causality on VAR sub-models, and the additive split of the
mutual information rate into directed transfers plus instantaneous sharing.

All sub-model quantities are computed analytically: the exact autocovariance
sequence of the retained channels is extracted from the full model and a
block Yule-Walker system of order ``q`` gives the one-step prediction error
covariance of the sub-process. No Monte-Carlo simulation is involved.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np
import scipy.linalg

from .errors import ArgumentError, EstimationError, NumericalError
from .var import VarModel, autocovariance_sequence


def default_submodel_order(model: VarModel) -> int:
    """Yule-Walker order used for sub-model refits: ``max(32, 8p)``."""
    return max(32, 8 * model.order)


@dataclass(frozen=True)
class StaticPidResult:
    """Minimum-MI PID of the zero-lag Gaussian mutual information."""

    mi_joint: float
    mi_marginals: tuple[float, ...]
    unique: tuple[float, ...]
    redundancy: float
    synergy: float

    @property
    def delta(self) -> float:
        return self.redundancy - self.synergy


@dataclass(frozen=True)
class TePidResult:
    """Minimum-MI PID of the joint transfer entropy from sources to target."""

    te_joint: float
    te_marginals: tuple[float, ...]
    unique: tuple[float, ...]
    redundancy: float
    synergy: float

    @property
    def delta(self) -> float:
        return self.redundancy - self.synergy


def _logdet_spd(mat: np.ndarray, what: str, err=NumericalError) -> float:
    sign, logdet = np.linalg.slogdet(mat)
    if sign <= 0:
        raise err(f"{what} is not positive definite")
    return float(logdet)


def gaussian_mi(cov: np.ndarray, target: int, sources: Sequence[int]) -> float:
    """Mutual information (nats) between blocks of a Gaussian covariance.

        I = 1/2 * ln( sigma2_T * det(Sigma_S) / det(Sigma_[TS]) ).

    Raises
    ------
    ArgumentError
        If the covariance is not symmetric positive definite, or the
        channel indices are invalid.
    """
    cov = np.asarray(cov, dtype=float)
    q = cov.shape[0]
    if cov.shape != (q, q) or np.max(np.abs(cov - cov.T)) > 1e-8 * max(
        1.0, np.max(np.abs(cov))
    ):
        raise ArgumentError("covariance must be a symmetric square matrix")
    if np.linalg.eigvalsh(cov)[0] <= 0.0:
        raise ArgumentError("covariance must be positive definite")
    srcs = sorted(set(int(s) for s in sources))
    if not srcs or target in srcs:
        raise ArgumentError("sources must be nonempty and exclude the target")
    if any(not 0 <= c < q for c in srcs + [target]):
        raise ArgumentError(f"channel indices out of range 0..{q - 1}")
    joint = [target, *srcs]
    ld_s = _logdet_spd(cov[np.ix_(srcs, srcs)], "source covariance", ArgumentError)
    ld_j = _logdet_spd(cov[np.ix_(joint, joint)], "joint covariance", ArgumentError)
    return 0.5 * (ld_s + np.log(cov[target, target]) - ld_j)


def static_pid(
    model: VarModel, target: int, sources: Sequence[int] | None = None
) -> StaticPidResult:
    """Zero-lag minimum-MI PID from the model's stationary covariance.

    The stationary covariance comes from the companion-form Lyapunov
    equation; redundancy is the minimum single-source MI, and the unique
    and synergistic terms follow from the additive identities.
    """
    from .var import zero_lag_covariance

    srcs = _source_list(model.dim, target, sources)
    if len(srcs) < 2:
        raise ArgumentError("static PID needs at least two sources")
    gamma0 = zero_lag_covariance(model)
    marginals = tuple(gaussian_mi(gamma0, target, (s,)) for s in srcs)
    joint = gaussian_mi(gamma0, target, srcs)
    r = min(marginals)
    unique = tuple(mi - r for mi in marginals)
    s = joint - r - sum(unique)
    return StaticPidResult(
        mi_joint=joint,
        mi_marginals=marginals,
        unique=unique,
        redundancy=r,
        synergy=s,
    )


def _source_list(
    dim: int, target: int, sources: Sequence[int] | None
) -> tuple[int, ...]:
    if not 0 <= target < dim:
        raise ArgumentError(f"target channel {target} out of range 0..{dim - 1}")
    if sources is None:
        return tuple(c for c in range(dim) if c != target)
    srcs = tuple(sorted(set(int(s) for s in sources)))
    if not srcs:
        raise ArgumentError("need at least one source channel")
    if target in srcs:
        raise ArgumentError("target cannot be one of the sources")
    if any(not 0 <= s < dim for s in srcs):
        raise ArgumentError(f"source channels {srcs} out of range 0..{dim - 1}")
    return srcs


def submodel_innovation(
    model: VarModel, channels: Sequence[int], q: int
) -> np.ndarray:
    """One-step prediction error covariance of a channel subset.

    Fits, analytically, an order-``q`` VAR to the sub-process formed by
    ``channels``: the block Yule-Walker system built from the exact
    autocovariances of the full model is solved by Cholesky factorization,
    and the residual covariance ``C_0 - sum_j B_j C_j.T`` is returned.

    Raises
    ------
    EstimationError
        If the block Toeplitz covariance is not positive definite at this
        order (numerical conditioning).
    """
    chans = tuple(dict.fromkeys(int(c) for c in channels))
    if not chans:
        raise ArgumentError("need at least one channel")
    if q < 1:
        raise ArgumentError("sub-model order must be >= 1")
    d = len(chans)
    gammas = autocovariance_sequence(model, q)
    sub = [g[np.ix_(chans, chans)] for g in gammas]
    # c_all[k + q - 1] = C_k with C_{-k} = C_k.T
    c_all = np.empty((2 * q - 1, d, d))
    for k in range(q):
        c_all[q - 1 + k] = sub[k]
        c_all[q - 1 - k] = sub[k].T
    idx = np.arange(q)[None, :] - np.arange(q)[:, None]  # (i, j) -> j - i
    g = c_all[idx + q - 1].transpose(0, 2, 1, 3).reshape(q * d, q * d)
    g = (g + g.T) / 2.0
    b = np.hstack([sub[k] for k in range(1, q + 1)])  # (d, q*d)
    try:
        cho = scipy.linalg.cho_factor(g)
    except np.linalg.LinAlgError as exc:
        raise EstimationError(
            f"order-{q} Yule-Walker system for channels {chans} is not positive "
            f"definite ({exc})"
        ) from exc
    coefs = scipy.linalg.cho_solve(cho, b.T).T  # (d, q*d)
    resid = sub[0] - coefs @ b.T
    return (resid + resid.T) / 2.0


def transfer_entropy(
    model: VarModel,
    sources: Sequence[int],
    target: int | Sequence[int],
    q: int | None = None,
    conditioning: Sequence[int] = (),
) -> float:
    """Transfer entropy (nats) from ``sources`` to ``target``.

    Computed as half the Granger-causality log variance ratio,

        TE = 1/2 * ln( det Sigma_reduced[T] / det Sigma_full[T] ),

    where the full sub-model retains ``target + conditioning + sources``
    and the reduced sub-model drops the sources; both are refit at order
    ``q`` (default :func:`default_submodel_order`) via Yule-Walker on the
    model's analytic autocovariances. ``target`` may be a channel group,
    in which case determinants of its innovation block are used.
    """
    targets = (target,) if isinstance(target, (int, np.integer)) else tuple(target)
    if not targets:
        raise ArgumentError("need at least one target channel")
    srcs = tuple(dict.fromkeys(int(s) for s in sources))
    cond = tuple(dict.fromkeys(int(c) for c in conditioning))
    if not srcs:
        raise ArgumentError("need at least one source channel")
    overlap = set(srcs) & set(targets)
    if overlap:
        raise ArgumentError(f"channels {sorted(overlap)} are both target and source")
    if set(cond) & (set(srcs) | set(targets)):
        raise ArgumentError("conditioning set overlaps target or sources")
    if q is None:
        q = default_submodel_order(model)
    reduced_set = tuple(sorted(set(targets) | set(cond)))
    full_set = tuple(sorted(set(reduced_set) | set(srcs)))
    sig_full = submodel_innovation(model, full_set, q)
    sig_red = submodel_innovation(model, reduced_set, q)
    t_full = [full_set.index(t) for t in targets]
    t_red = [reduced_set.index(t) for t in targets]
    ld_full = _logdet_spd(
        sig_full[np.ix_(t_full, t_full)], "full-model innovation block"
    )
    ld_red = _logdet_spd(
        sig_red[np.ix_(t_red, t_red)], "reduced-model innovation block"
    )
    return 0.5 * (ld_red - ld_full)


def instantaneous_info(
    model: VarModel, sources: Sequence[int], target: int
) -> float:
    """Zero-lag information shared between target and sources given both
    pasts: the Gaussian MI between the corresponding innovation blocks."""
    srcs = _source_list(model.dim, target, sources)
    sig = model.sigma
    joint = [target, *srcs]
    ld_s = _logdet_spd(sig[np.ix_(srcs, srcs)], "innovation source block")
    ld_j = _logdet_spd(sig[np.ix_(joint, joint)], "innovation joint block")
    return 0.5 * (ld_s + np.log(sig[target, target]) - ld_j)


def te_pid(
    model: VarModel,
    target: int,
    sources: Sequence[int] | None = None,
    q: int | None = None,
    conditioned: bool = False,
) -> TePidResult:
    """Minimum-MI PID applied to the joint transfer entropy.

    Marginal transfers are bivariate by default (each source against the
    target's own past only); ``conditioned=True`` conditions each marginal
    on the remaining sources instead.
    """
    srcs = _source_list(model.dim, target, sources)
    if len(srcs) < 2:
        raise ArgumentError("TE PID needs at least two sources")
    te_joint = transfer_entropy(model, srcs, target, q)
    marginals = []
    for s in srcs:
        cond = tuple(o for o in srcs if o != s) if conditioned else ()
        marginals.append(transfer_entropy(model, (s,), target, q, conditioning=cond))
    marginals = tuple(marginals)
    r = min(marginals)
    unique = tuple(te - r for te in marginals)
    s_term = te_joint - r - sum(unique)
    return TePidResult(
        te_joint=te_joint,
        te_marginals=marginals,
        unique=unique,
        redundancy=r,
        synergy=s_term,
    )


def mir_decomposition(
    model: VarModel, target: int, sources: Sequence[int] | None = None, q: int | None = None
) -> tuple[float, float, float]:
    """The additive split of the mutual information rate: transfer from
    sources to target, transfer from target to sources, and instantaneous
    sharing. Their sum equals the integrated joint spectral MIR."""
    srcs = _source_list(model.dim, target, sources)
    te_to_target = transfer_entropy(model, srcs, target, q)
    te_to_sources = transfer_entropy(model, (target,), srcs, q)
    inst = instantaneous_info(model, srcs, target)
    return te_to_target, te_to_sources, inst


def baseline_rows(
    result: StaticPidResult | TePidResult,
    source_names: Sequence[str],
    prefix: str,
    scale: float = 1.0,
) -> list[tuple[str, str, str]]:
    """Coarse-table rows ``(term, band, value)`` for a baseline result,
    using the shared schema with a ``prefix:`` on every term (full axis
    only, since the baselines are time-domain quantities)."""
    joint = result.mi_joint if isinstance(result, StaticPidResult) else result.te_joint
    rows = []
    for name, value in zip(source_names, result.unique):
        rows.append((f"{prefix}:U_{name}", "FULL", f"{value / scale:.12g}"))
    rows.append((f"{prefix}:R", "FULL", f"{result.redundancy / scale:.12g}"))
    rows.append((f"{prefix}:S", "FULL", f"{result.synergy / scale:.12g}"))
    rows.append((f"{prefix}:Delta", "FULL", f"{result.delta / scale:.12g}"))
    rows.append((f"{prefix}:JointMIR", "FULL", f"{joint / scale:.12g}"))
    return rows
