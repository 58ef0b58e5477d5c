"""Instance generation, campaign orchestration, and flat-file formats.

Everything is deterministic in the seeds: per-instance seeds are derived
from (campaign seed, cell index, instance index), so the schedule -
sequential or thread pool - cannot affect any reported number except wall
clock.  The SELMER_LAB_THREADS environment variable caps the pool size.
"""

from __future__ import annotations

import json
import os
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

from . import gf
from .bipartite import (
    BipartiteSystem,
    basis_extract,
    canonical_system,
    check_equivalences,
    connect_path,
    heart,
    scan_heart_supports,
    validate_path,
    verify_rl1,
    verify_rl2,
)
from .errors import (
    BoundExceeded,
    DualityViolation,
    ParityMismatch,
    PrimesExhausted,
)
from .hyperbolic import HyperbolicSpace, Lagrangian, random_lagrangian
from .oracle import DEFAULT_CEILING, brute_oracle
from .selmer import (
    SelmerInstance,
    SquarefreeProduct,
    all_products,
    parity_class,
    rhombus,
    selmer_group,
    sign_class,
)

FORMAT_VERSION = 1
THREADS_ENV = "SELMER_LAB_THREADS"

_MASK64 = (1 << 64) - 1


def _mix64(x: int) -> int:
    x &= _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return x ^ (x >> 31)


def derive_seed(*parts: int) -> int:
    """Decorrelated 64-bit seed from a tuple of integers (splitmix mixing)."""
    acc = 0x9E3779B97F4A7C15
    for part in parts:
        acc = _mix64(acc ^ ((part + 0x9E3779B97F4A7C15) & _MASK64))
    return acc


def default_labels(m: int) -> tuple[str, ...]:
    return tuple(f"l{i + 1}" for i in range(m))


def generate_instance(
    p: int,
    m: int,
    epsilon_mode: str = "match",
    seed: int = 0,
    word_length: int | None = None,
) -> SelmerInstance:
    """Seeded instance whose parity flag is forced to match or mismatch
    the sampled Lagrangian's parity class, as requested."""
    if epsilon_mode not in ("match", "mismatch"):
        raise ValueError(f"epsilon_mode must be 'match' or 'mismatch', got {epsilon_mode!r}")
    space = HyperbolicSpace(p, m)
    lagrangian = random_lagrangian(space, derive_seed(seed, p, m), word_length)
    labels = default_labels(m)
    probe = SelmerInstance(space, labels, lagrangian, epsilon=0)
    constant = (selmer_group(probe, ()).dim) % 2
    epsilon = (constant + 1) % 2 if epsilon_mode == "match" else constant
    if epsilon == 0:
        return probe
    return SelmerInstance(space, labels, lagrangian, epsilon=1)


# ---------------------------------------------------------------------------
# flat-file formats


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def instance_to_dict(inst: SelmerInstance) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "p": inst.p,
        "m": inst.m,
        "labels": list(inst.labels),
        "epsilon": inst.epsilon,
        "lagrangian": [list(row) for row in inst.lagrangian.subspace.rows],
    }


def instance_from_dict(data: dict) -> SelmerInstance:
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {data.get('format_version')!r}")
    p, m = data["p"], data["m"]
    space = HyperbolicSpace(p, m)
    labels = tuple(data["labels"])
    # rows are re-canonicalized on read; canonical rows are required on write
    rows = gf.rref(p, data["lagrangian"], 2 * m)
    return SelmerInstance(space, labels, Lagrangian(space, rows), epsilon=data["epsilon"])


def instance_to_json(inst: SelmerInstance) -> str:
    return _dumps(instance_to_dict(inst))


def instance_from_json(text: str) -> SelmerInstance:
    return instance_from_dict(json.loads(text))


def system_to_dict(z: BipartiteSystem) -> dict:
    plus = [
        {"primes": list(k), "value": v}
        for k, v in sorted(z.plus_values.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]
    minus = [
        {"primes": list(k), "vector": list(v)}
        for k, v in sorted(z.minus_values.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]
    return {
        "format_version": FORMAT_VERSION,
        "bound": z.bound,
        "plus": plus,
        "minus": minus,
    }


def system_from_dict(data: dict) -> BipartiteSystem:
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {data.get('format_version')!r}")
    plus = {tuple(entry["primes"]): entry["value"] for entry in data["plus"]}
    minus = {tuple(entry["primes"]): tuple(entry["vector"]) for entry in data["minus"]}
    return BipartiteSystem.build(data["bound"], plus, minus)


def system_to_json(z: BipartiteSystem) -> str:
    return _dumps(system_to_dict(z))


def system_from_json(text: str) -> BipartiteSystem:
    return system_from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# campaigns


@dataclass(frozen=True)
class CampaignConfig:
    primes: tuple[int, ...]
    m_values: tuple[int, ...]
    instances_per_cell: int
    seed: int
    bound: int | None = None  # None means bound = m, per cell
    oracle_ceiling: int = DEFAULT_CEILING
    parity_mode: str = "both"  # match | mismatch | both
    paths_per_instance: int = 20
    pattern_limit: int = 4096
    word_length: int | None = None

    def validate(self) -> None:
        for p in self.primes:
            gf.validate_prime(p)
        if any(m < 1 for m in self.m_values):
            raise ValueError("m values must be >= 1")
        if self.instances_per_cell < 0:
            raise ValueError("instances_per_cell must be >= 0")
        if self.parity_mode not in ("match", "mismatch", "both"):
            raise ValueError(f"bad parity_mode {self.parity_mode!r}")
        if self.bound is not None and self.bound < 0:
            raise ValueError("bound must be >= 0")

    def cells(self) -> list[tuple[int, int]]:
        return [(p, m) for p in self.primes for m in self.m_values]

    def to_dict(self) -> dict:
        return {
            "primes": list(self.primes),
            "m_values": list(self.m_values),
            "instances_per_cell": self.instances_per_cell,
            "seed": self.seed,
            "bound": self.bound,
            "oracle_ceiling": self.oracle_ceiling,
            "parity_mode": self.parity_mode,
            "paths_per_instance": self.paths_per_instance,
            "pattern_limit": self.pattern_limit,
            "word_length": self.word_length,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "CampaignConfig":
        return cls(
            primes=tuple(data["primes"]),
            m_values=tuple(data["m_values"]),
            instances_per_cell=data["instances_per_cell"],
            seed=data["seed"],
            bound=data["bound"],
            oracle_ceiling=data["oracle_ceiling"],
            parity_mode=data["parity_mode"],
            paths_per_instance=data["paths_per_instance"],
            pattern_limit=data["pattern_limit"],
            word_length=data["word_length"],
        )


def _product_key(product: SquarefreeProduct) -> list[str]:
    return list(product)


@dataclass
class InstanceOutcome:
    parity_match: bool = False
    selmer_rank: int = 0
    heart_size: int = 0
    rhombus_checks: int = 0
    rl_checks: int = 0
    equivalence_checks: int = 0
    parity_checks: int = 0
    oracle_cells: int = 0
    pattern_scans: int = 0
    path_attempts: int = 0
    path_successes: int = 0
    basis_attempts: int = 0
    basis_successes: int = 0
    bound_exceeded: int = 0
    primes_exhausted: list[str] = field(default_factory=list)
    violations: list[dict] = field(default_factory=list)


def _violation(kind: str, **data) -> dict:
    out = {"kind": kind}
    out.update(data)
    return out


def examine_instance(
    inst: SelmerInstance,
    bound: int,
    *,
    oracle_ceiling: int = DEFAULT_CEILING,
    paths_per_instance: int = 20,
    pattern_limit: int = 4096,
    rng_seed: int = 0,
) -> InstanceOutcome:
    """Run the whole battery on one instance: rhombus sweep, parity table,
    canonical construction or the mismatch branch, reciprocity and
    equivalence checks, path sampling, basis extraction, and the
    enumeration cross-check when the ambient space is inside the ceiling.
    Violations are collected, never raised."""
    out = InstanceOutcome()
    base_rank = selmer_group(inst, ()).dim
    out.selmer_rank = base_rank

    # rhombus sweep plus the one-step and lower-bound rank identities
    for product in all_products(inst, bound):
        d = selmer_group(inst, product).dim
        if d < base_rank - len(product):
            out.violations.append(
                _violation("rank-lower-bound", product=_product_key(product), dim=d)
            )
        for ell in inst.labels:
            if ell in product:
                continue
            try:
                report = rhombus(inst, product, ell)
            except DualityViolation as exc:
                out.violations.append(
                    _violation(
                        "rhombus", product=_product_key(product), ell=ell, error=str(exc)
                    )
                )
                continue
            out.rhombus_checks += 1
            if abs(report.dim_adjoined - report.dim_selmer) != 1:
                out.violations.append(
                    _violation(
                        "rank-step", product=_product_key(product), ell=ell,
                        dims=[report.dim_selmer, report.dim_adjoined],
                    )
                )

    # parity table
    try:
        parity = parity_class(inst, bound)
        out.parity_checks = len(parity.dims)
        out.parity_match = parity.matches
    except DualityViolation as exc:
        out.violations.append(_violation("parity-constancy", error=str(exc)))
        return out

    hearts = heart(inst, bound)
    out.heart_size = len(hearts)

    system: BipartiteSystem | None = None
    if parity.matches:
        system = canonical_system(inst, bound, value_picker_seed=derive_seed(rng_seed, 1))
        certs = verify_rl1(inst, system) + verify_rl2(inst, system)
        out.rl_checks = _count_rl_pairs(inst, bound)
        for cert in certs:
            out.violations.append(
                _violation(
                    "reciprocity", law=cert.law, product=_product_key(cert.product),
                    ell=cert.ell, loc_vanishes=cert.loc_vanishes,
                    partner_vanishes=cert.partner_vanishes,
                )
            )
        equiv = check_equivalences(inst, system, bound)
        out.equivalence_checks = sum(1 for _ in all_products(inst, bound))
        for failure in equiv.failures:
            out.violations.append(
                _violation(
                    "equivalence", direction=failure.direction,
                    product=_product_key(failure.product),
                )
            )
    else:
        try:
            canonical_system(inst, bound, value_picker_seed=derive_seed(rng_seed, 1))
            out.violations.append(_violation("parity-mismatch-not-refused"))
        except ParityMismatch:
            pass
        if 2 ** len(hearts) <= pattern_limit:
            scan = scan_heart_supports(inst, bound, max_patterns=pattern_limit)
            out.pattern_scans = scan.patterns_checked
            for support in scan.consistent_nontrivial:
                out.violations.append(
                    _violation(
                        "parity-contrapositive",
                        support=sorted(_product_key(prod) for prod in support),
                    )
                )

    # path sampling over random heart pairs
    rng = random.Random(derive_seed(rng_seed, 2))
    if hearts:
        for _ in range(paths_per_instance):
            start = hearts[rng.randrange(len(hearts))]
            end = hearts[rng.randrange(len(hearts))]
            out.path_attempts += 1
            try:
                path = connect_path(inst, start, end, bound)
            except PrimesExhausted as exc:
                out.primes_exhausted.append(f"path {start}->{end}: {exc}")
                continue
            except BoundExceeded:
                out.bound_exceeded += 1
                continue
            ok = validate_path(inst, path, bound)
            if ok and system is not None:
                ok = all(not system.is_zero_at(inst, node) for node in path.nodes)
            if ok:
                out.path_successes += 1
            else:
                out.violations.append(
                    _violation(
                        "path-invalid",
                        start=_product_key(start), end=_product_key(end),
                        nodes=[_product_key(n) for n in path.nodes],
                    )
                )

    # basis extraction
    if system is not None and not system.is_trivial() and base_rank <= min(inst.m - 1, bound):
        out.basis_attempts = 1
        try:
            extraction = basis_extract(inst, system)
            independent_rank = gf.rref(
                inst.p, extraction.classes, inst.space.ambient_dim
            ).dim
            base = selmer_group(inst, ())
            in_selmer = all(gf.contains(base, v) for v in extraction.classes)
            if independent_rank == base_rank and in_selmer:
                out.basis_successes = 1
            else:
                out.violations.append(
                    _violation("basis-rank", rank=independent_rank, expected=base_rank)
                )
        except PrimesExhausted as exc:
            out.primes_exhausted.append(f"basis: {exc}")
        except AssertionError as exc:
            out.violations.append(_violation("basis-invariant", error=str(exc)))

    # enumeration cross-check
    if inst.p ** (2 * inst.m) <= oracle_ceiling:
        try:
            table = brute_oracle(inst, bound, oracle_ceiling)
        except DualityViolation as exc:
            out.violations.append(_violation("oracle", error=str(exc)))
            return out
        for product, dim in table.dims.items():
            if selmer_group(inst, product).dim != dim:
                out.violations.append(
                    _violation(
                        "oracle-dim", product=_product_key(product),
                        oracle=dim, reduced=selmer_group(inst, product).dim,
                    )
                )
        for (product, ell), cell in table.cells.items():
            out.oracle_cells += 1
            report = rhombus(inst, product, ell)
            if (
                report.dim_selmer,
                report.dim_relaxed,
                report.dim_strict,
                report.dim_adjoined,
                report.case,
            ) != (cell.dim_selmer, cell.dim_relaxed, cell.dim_strict, cell.dim_adjoined, cell.case):
                out.violations.append(
                    _violation("oracle-cell", product=_product_key(product), ell=ell)
                )
    return out


def _count_rl_pairs(inst: SelmerInstance, bound: int) -> int:
    total = 0
    for product in all_products(inst, bound):
        if sign_class(inst, product) != "-":
            continue
        total += len(product)  # first law pairs
        if len(product) < bound:
            total += inst.m - len(product)  # second law pairs
    return total


@dataclass
class CampaignReport:
    """Aggregated campaign outcome; plain data so JSON round-trips exactly."""

    config: dict
    cells: list[dict]
    totals: dict
    violations: int
    wall_clock_seconds: float
    format_version: int = FORMAT_VERSION

    def to_dict(self) -> dict:
        return {
            "format_version": self.format_version,
            "config": self.config,
            "cells": self.cells,
            "totals": self.totals,
            "violations": self.violations,
            "wall_clock_seconds": self.wall_clock_seconds,
        }

    def fingerprint(self) -> str:
        """Serialization with every wall-clock field removed; two runs of
        the same config must agree on this string exactly."""
        data = self.to_dict()
        data.pop("wall_clock_seconds", None)
        data["cells"] = [
            {k: v for k, v in cell.items() if k != "wall_clock_seconds"}
            for cell in data["cells"]
        ]
        return _dumps(data)


def report_to_json(report: CampaignReport) -> str:
    return _dumps(report.to_dict())


def report_from_json(text: str) -> CampaignReport:
    data = json.loads(text)
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"unsupported format_version {data.get('format_version')!r}")
    return CampaignReport(
        config=data["config"],
        cells=data["cells"],
        totals=data["totals"],
        violations=data["violations"],
        wall_clock_seconds=data["wall_clock_seconds"],
    )


_CELL_COUNTERS = (
    "instances",
    "parity_match_instances",
    "rhombus_checks",
    "rl_checks",
    "equivalence_checks",
    "parity_checks",
    "pattern_scans",
    "oracle_cells",
    "path_attempts",
    "path_successes",
    "basis_attempts",
    "basis_successes",
    "bound_exceeded",
    "primes_exhausted",
    "violations",
)


def _epsilon_mode_for(parity_mode: str, index: int) -> str:
    if parity_mode == "both":
        return "match" if index % 2 == 0 else "mismatch"
    return parity_mode


def _run_cell(config: CampaignConfig, cell_index: int, p: int, m: int) -> dict:
    start = time.perf_counter()
    bound = m if config.bound is None else min(config.bound, m)
    cell = {key: 0 for key in _CELL_COUNTERS}
    cell.update({"p": p, "m": m, "bound": bound})
    log: list[str] = []
    certificates: list[dict] = []
    ranks: dict[str, int] = {}
    for k in range(config.instances_per_cell):
        inst = generate_instance(
            p,
            m,
            epsilon_mode=_epsilon_mode_for(config.parity_mode, k),
            seed=derive_seed(config.seed, cell_index, k),
            word_length=config.word_length,
        )
        outcome = examine_instance(
            inst,
            bound,
            oracle_ceiling=config.oracle_ceiling,
            paths_per_instance=config.paths_per_instance,
            pattern_limit=config.pattern_limit,
            rng_seed=derive_seed(config.seed, cell_index, k, 1009),
        )
        cell["instances"] += 1
        cell["parity_match_instances"] += int(outcome.parity_match)
        cell["rhombus_checks"] += outcome.rhombus_checks
        cell["rl_checks"] += outcome.rl_checks
        cell["equivalence_checks"] += outcome.equivalence_checks
        cell["parity_checks"] += outcome.parity_checks
        cell["pattern_scans"] += outcome.pattern_scans
        cell["oracle_cells"] += outcome.oracle_cells
        cell["path_attempts"] += outcome.path_attempts
        cell["path_successes"] += outcome.path_successes
        cell["basis_attempts"] += outcome.basis_attempts
        cell["basis_successes"] += outcome.basis_successes
        cell["bound_exceeded"] += outcome.bound_exceeded
        cell["primes_exhausted"] += len(outcome.primes_exhausted)
        cell["violations"] += len(outcome.violations)
        key = str(outcome.selmer_rank)
        ranks[key] = ranks.get(key, 0) + 1
        log.extend(f"instance {k}: {entry}" for entry in outcome.primes_exhausted)
        certificates.extend(
            dict(instance=k, **violation) for violation in outcome.violations
        )
    cell["rank_histogram"] = ranks  # exhaustion rates are monitored against rank
    cell["primes_exhausted_log"] = log
    cell["certificates"] = certificates
    cell["wall_clock_seconds"] = time.perf_counter() - start
    return cell


def thread_budget() -> int:
    raw = os.environ.get(THREADS_ENV, "")
    if raw.strip():
        value = int(raw)
        if value < 1:
            raise ValueError(f"{THREADS_ENV} must be >= 1, got {value}")
        return value
    return min(8, os.cpu_count() or 1)


def run_campaign(config: CampaignConfig) -> CampaignReport:
    """Execute the configured sweep; cells run independently (threaded when
    the budget allows) and the report is identical for any schedule."""
    config.validate()
    start = time.perf_counter()
    cells = config.cells()
    workers = thread_budget()
    if workers == 1 or len(cells) <= 1:
        results = [
            _run_cell(config, i, p, m) for i, (p, m) in enumerate(cells)
        ]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(
                pool.map(
                    lambda args: _run_cell(config, *args),
                    [(i, p, m) for i, (p, m) in enumerate(cells)],
                )
            )
    totals = {key: sum(cell[key] for cell in results) for key in _CELL_COUNTERS}
    return CampaignReport(
        config=config.to_dict(),
        cells=results,
        totals=totals,
        violations=totals["violations"],
        wall_clock_seconds=time.perf_counter() - start,
    )
