"""Experiment drivers behind the command line: evolve, theorem, minimize, axioms."""

from __future__ import annotations

import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from . import io
from .coding import CodingParams, encode
from .complexity import (
    AXIOM_COLUMNS,
    ESTIMATORS,
    check_axioms,
    information_content_split,
    k3_exhaustive,
    random_corpus,
)
from .config import (
    STREAM_AXIOMS,
    STREAM_CALIBRATION,
    STREAM_INITIAL,
    STREAM_MINIMIZE,
    STREAM_SAMPLER,
    STREAM_TAIL,
    ConfigError,
    ExperimentConfig,
    stream,
)
from .evolution import TRAJECTORY_COLUMNS, evolve, trajectory_rows
from .field import (
    ComplexField,
    ShapeField,
    charge,
    charge_complex,
    energy_complex,
    internal_energy,
    kinetic_energy,
    polar_decompose,
)
from .macrostate import (
    CHAIN_COLUMNS,
    AdmissibilityError,
    ChainStageError,
    MacroParams,
    TheoremParams,
    admissible_params,
    classify,
    largest_n,
    theorem_chain,
    theorem_params_violations,
)
from .sampling import SamplerConfig, sample_field
from .variational import (
    MinimizeConfig,
    ground_state,
    hylomorphy_witness,
    write_ground_state,
)
from .io import append_jsonl

SERIES_COLUMNS = (
    "t", "J", "K_kinetic", "E", "C", "I_N", "I_N_plus", "I_N_minus",
    "n_tall_components", "macrostate_kind",
)
SUMMARY_COLUMNS = (
    "member", "passed", "failed_stage", "J_initial", "J_final", "C_initial", "C_final",
    "complexity_initial", "complexity_final", "final_kind", "ejected",
)


def macro_params(cfg: ExperimentConfig) -> MacroParams:
    return MacroParams(cfg.macro.alpha, cfg.macro.beta, cfg.macro.m, cfg.sigma)


# ------------------------------------------------------------------- evolve


def initial_condition(cfg: ExperimentConfig) -> ComplexField:
    p = cfg.lattice
    ev = cfg.evolution
    if ev.initial == "zero":
        return ComplexField(p, np.zeros(p.size, dtype=complex))
    if ev.initial == "file":
        fld = io.read_field(ev.initial_file)
        if fld.params != p:
            raise ConfigError(f"initial field window {fld.params} differs from [lattice] {p}")
        if isinstance(fld, ShapeField):
            return ComplexField(p, fld.values.astype(complex))
        return fld
    if ev.initial == "ground_state":
        gs = _ground_state(cfg)
        return ComplexField(p, gs.u.values.astype(complex))
    rng = stream(cfg.seed, STREAM_INITIAL)
    x = np.arange(p.size, dtype=float)
    amp = np.zeros(p.size)
    for _ in range(int(rng.integers(1, 4))):
        c = rng.uniform(0.3, 0.7) * p.size
        w = rng.uniform(0.7, 2.5)
        amp += rng.uniform(0.5, 1.5) * np.exp(-0.5 * ((x - c) / w) ** 2)
    amp += 0.1 * rng.random(p.size) * np.exp(-0.5 * ((x - p.size / 2) / (p.size / 6)) ** 2)
    amp *= cfg.sigma / math.sqrt(math.fsum(amp**2))
    phase = rng.uniform(-np.pi, np.pi, p.size)
    return ComplexField(p, amp * np.exp(1j * phase))


def series_row(t: float, psi: ComplexField, cfg: ExperimentConfig, cp: CodingParams, est):
    nl = cfg.nl
    u, theta = polar_decompose(psi)
    i_plus, i_minus = information_content_split(u, nl, cp, est)
    label = classify(u, nl, macro_params(cfg))
    return (
        t,
        internal_energy(u, nl),
        kinetic_energy(u, theta),
        energy_complex(psi, nl),
        charge_complex(psi),
        est(encode(u, cp).s_string),
        i_plus,
        i_minus,
        label.n_tall,
        label.kind.value,
    )


def run_evolve(cfg: ExperimentConfig, out: Path) -> list[tuple]:
    nl = cfg.nl
    psi0 = initial_condition(cfg)
    samples = evolve(psi0, nl, cfg.evolution.integrator(), cfg.evolution.t_end)
    cp = CodingParams(cfg.sigma, cfg.coding.N)
    est = ESTIMATORS[cfg.axioms.estimator]
    rows = [series_row(s.t, s.psi, cfg, cp, est) for s in samples]
    c0 = samples[0].charge
    for prev, cur in zip(samples, samples[1:]):
        if not cur.t > prev.t:
            raise RuntimeError(f"sample times not increasing at t={cur.t}")
        if abs(cur.charge - c0) > 1e-8 * max(1.0, c0):
            raise RuntimeError(f"charge drifted by {cur.charge - c0:.3g} at t={cur.t}")
    io.write_csv(out / "complexity_series.csv", SERIES_COLUMNS, rows)
    io.write_csv(out / "trajectory.csv", TRAJECTORY_COLUMNS, trajectory_rows(samples))
    return rows


# ------------------------------------------------------------------ theorem


def theorem_setup(cfg: ExperimentConfig) -> tuple[TheoremParams, CodingParams]:
    nl = cfg.nl
    mp = macro_params(cfg)
    bad = mp.theorem_violations(nl)
    if bad:
        raise ConfigError("theorem parameters violate: " + "; ".join(bad))
    th = cfg.theorem
    h = cfg.lattice.h
    calibration = None
    if th.gamma is None:
        scfg = SamplerConfig(width=th.width)
        calibration = [
            sample_field(stream(cfg.seed, STREAM_CALIBRATION, i), th.kind, nl, mp, h, scfg)
            for i in range(th.calibration_size)
        ]
    if th.mu is None:
        tp = admissible_params(cfg.sigma, h, nl, mp.alpha, mp.beta, calibration,
                               n_target=th.n_target, a=th.a, gamma=th.gamma)
    else:
        gamma = th.gamma
        if gamma is None:
            gamma = admissible_params(cfg.sigma, h, nl, mp.alpha, mp.beta, calibration,
                                      n_target=th.n_target, a=th.a).gamma
        N = cfg.coding.N
        n = th.n if th.n is not None else max(1, largest_n(cfg.sigma, h, nl, th.mu, N, th.a))
        tp = TheoremParams(gamma, th.mu, N, n, th.a)
        bad = theorem_params_violations(tp, cfg.sigma, h, nl, mp.alpha, mp.beta)
        if bad:
            raise AdmissibilityError("; ".join(bad))
    return tp, CodingParams(cfg.sigma, tp.N)


@dataclass
class MemberResult:
    member: int
    rows: list
    summary: tuple


def run_member(cfg: ExperimentConfig, tp: TheoremParams, cp: CodingParams, i: int) -> MemberResult:
    nl = cfg.nl
    mp = macro_params(cfg)
    est = ESTIMATORS[cfg.axioms.estimator]
    v = sample_field(stream(cfg.seed, STREAM_SAMPLER, i), cfg.theorem.kind, nl, mp,
                     cfg.lattice.h, SamplerConfig(width=cfg.theorem.width))
    try:
        _, rep = theorem_chain(v, nl, mp, tp, cp, est, rng=stream(cfg.seed, STREAM_TAIL, i))
    except ChainStageError as exc:
        rows = [(i, exc.stage, math.nan, math.nan, math.nan, None, False)]
        summary = (i, False, exc.stage, internal_energy(v, nl), math.nan, charge(v), math.nan,
                   None, None, "", None)
        return MemberResult(i, rows, summary)
    rows = [
        (i, r.stage, r.dJ_claimed, r.dJ_actual, r.dC, r.dcomplexity, r.bound_satisfied)
        for r in rep.rows
    ]
    summary = (i, rep.passed, rep.failed_stage or "", rep.J_initial, rep.J_final,
               rep.C_initial, rep.C_final, rep.complexity_initial, rep.complexity_final,
               rep.final_kind, rep.ejected)
    return MemberResult(i, rows, summary)


def _member_task(args):
    return run_member(*args)


def run_theorem(cfg: ExperimentConfig, out: Path, jobs: int = 1) -> dict:
    tp, cp = theorem_setup(cfg)
    size = cfg.theorem.ensemble_size
    tasks = [(cfg, tp, cp, i) for i in range(size)]
    if jobs > 1 and size > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_member_task, tasks, chunksize=max(1, size // (4 * jobs))))
    else:
        results = [_member_task(t) for t in tasks]
    results.sort(key=lambda r: r.member)
    io.write_csv(out / "chain_report.csv", ("member",) + CHAIN_COLUMNS,
                 (row for r in results for row in r.rows))
    io.write_csv(out / "chain_summary.csv", SUMMARY_COLUMNS, (r.summary for r in results))

    passed = sum(1 for r in results if r.summary[1])
    by_stage: dict[str, int] = {}
    for r in results:
        if not r.summary[1]:
            by_stage[r.summary[2]] = by_stage.get(r.summary[2], 0) + 1
    margins = [row[3] - row[2] for r in results for row in r.rows
               if row[1] in ("merge", "regularize")]
    hist = {}
    if margins:
        dec = np.floor(np.log10(np.maximum(margins, 1e-300))).astype(int)
        for k in sorted(set(dec.tolist())):
            hist[f"1e{k}"] = int(np.count_nonzero(dec == k))
    summary = {
        "ensemble_size": size,
        "passed": passed,
        "pass_rate": passed / size if size else None,
        "failures_by_stage": by_stage,
        "certificate_margin_decades": hist,
        "theorem_params": {"gamma": float(tp.gamma), "mu": float(tp.mu), "N": tp.N,
                           "n": tp.n, "a": tp.a},
        "seed": cfg.seed,
    }
    (out / "theorem_summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    return summary


# ----------------------------------------------------------------- minimize


def _minimize_config(cfg: ExperimentConfig) -> MinimizeConfig:
    m = cfg.minimize
    try:
        return MinimizeConfig(cfg.sigma, m.step, m.max_iters, m.tol)
    except ValueError as exc:
        raise ConfigError(f"[minimize] {exc}") from None


def _ground_state(cfg: ExperimentConfig):
    seed = int(stream(cfg.seed, STREAM_MINIMIZE).integers(2**32))
    return ground_state(cfg.sigma**2, cfg.nl, _minimize_config(cfg), cfg.lattice, seed)


def run_minimize(cfg: ExperimentConfig, out: Path):
    gs = _ground_state(cfg)
    write_ground_state(out, gs)
    w = hylomorphy_witness(cfg.sigma**2, cfg.nl, cfg.lattice)
    append_jsonl(out / "ground_state.jsonl", {
        "sigma2": cfg.sigma**2,
        "m_sigma_upper_bound": gs.J_value,
        "witness_J": None if w is None else internal_energy(w, cfg.nl),
    })
    return gs


# ------------------------------------------------------------------- axioms


def run_axioms(cfg: ExperimentConfig, out: Path):
    ax = cfg.axioms
    if ax.estimator not in ESTIMATORS:
        raise ConfigError(f"[axioms] unknown estimator {ax.estimator!r}")
    est = ESTIMATORS[ax.estimator]
    corpus = random_corpus(stream(cfg.seed, STREAM_AXIOMS, 0), ax.corpus_size, ax.max_len)
    if ax.field_codings:
        nl, mp = cfg.nl, macro_params(cfg)
        cp = CodingParams(cfg.sigma, cfg.coding.N)
        for i in range(ax.field_codings):
            v = sample_field(stream(cfg.seed, STREAM_AXIOMS, 1 + i), "mixed", nl, mp, cfg.lattice.h)
            corpus.append(encode(v, cp).s_string)
    if not corpus:
        raise ConfigError("[axioms] corpus is empty (corpus_size and field_codings are both 0)")
    rep = check_axioms(est, corpus, rng=stream(cfg.seed, STREAM_AXIOMS, 10**6),
                       splits_per_string=ax.splits_per_string)
    rows = list(rep.rows())
    if ax.exhaustive_len >= 2:
        k3, mono, pairs = k3_exhaustive(est, ax.exhaustive_len)
        rows.append(("K3_exhaustive", k3, pairs, 0.0))
        rows.append(("monotone_exhaustive", mono, pairs, 0.0))
    io.write_csv(out / "axioms.csv", AXIOM_COLUMNS, rows)
    return rep, rows
