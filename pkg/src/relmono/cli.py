"""Command-line front end.

``relmono <task> --config cfg.json [--out result.json]`` runs one experiment;
``relmono verify`` runs the acceptance suite. Exit codes: 0 success, 1 bad
configuration, 2 numerical failure (or a failed acceptance criterion).

Tolerances may be overridden with ``RELMONO_ODE_TOL``, ``RELMONO_ROUND_TOL``,
``RELMONO_REL_TOL`` and ``RELMONO_PRECISION``.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time
from dataclasses import dataclass, field
from importlib import resources
from typing import List, Optional

from . import __version__
from .errors import ConfigInvalid, NumericalFailure, RelmonoError
from .family import FamilySpec, SectionSpec, check_section, seed_frame
from . import elliptic
from .numerics import Tolerance

TASKS = ("periods", "monodromy", "cocycle", "rank", "betti-grid", "torsion-check", "verify")
NEEDS_SECTION = {"cocycle", "rank", "betti-grid", "torsion-check"}
_ENV = {"ode_tol": "RELMONO_ODE_TOL", "round_tol": "RELMONO_ROUND_TOL", "rel_tol": "RELMONO_REL_TOL"}


@dataclass(frozen=True)
class ExperimentConfig:
    task: str
    family: Optional[FamilySpec] = None
    section: Optional[SectionSpec] = None
    loops: Optional[tuple] = None
    tolerances: Tolerance = Tolerance()
    output: Optional[dict] = None
    options: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.task not in TASKS:
            raise ConfigInvalid(f"unknown task {self.task!r}; expected one of {', '.join(TASKS)}")
        if self.task != "verify" and self.family is None:
            raise ConfigInvalid(f"task {self.task!r} needs a family")
        if self.task in NEEDS_SECTION and self.section is None:
            raise ConfigInvalid(f"task {self.task!r} needs a section")
        if self.section is not None and self.family is not None:
            check_section(self.section, self.family, tol=self.tolerances)

    def to_dict(self) -> dict:
        out = {"task": self.task, "tolerances": self.tolerances.to_dict()}
        if self.family is not None:
            out["family"] = self.family.to_dict()
        if self.section is not None:
            out["section"] = self.section.to_dict()
        if self.loops is not None:
            out["loops"] = [list(w) for w in self.loops]
        if self.output is not None:
            out["output"] = dict(self.output)
        if self.options:
            out["options"] = json.loads(json.dumps(self.options))
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigInvalid("a config must be a JSON object")
        unknown = set(data) - {"task", "family", "section", "loops", "tolerances", "output", "options"}
        if unknown:
            raise ConfigInvalid(f"unknown config keys {sorted(unknown)}")
        tol = data.get("tolerances") or {}
        try:
            tolerances = Tolerance(**tol)
        except TypeError as exc:
            raise ConfigInvalid(f"bad tolerances: {exc}") from exc
        loops = data.get("loops")
        if loops is not None:
            if not all(isinstance(w, list) and all(isinstance(x, int) and x != 0 for x in w) for w in loops):
                raise ConfigInvalid("loops must be lists of nonzero signed integers")
            loops = tuple(tuple(w) for w in loops)
        fam = FamilySpec.from_dict(data["family"]) if data.get("family") is not None else None
        sec = SectionSpec.from_dict(data["section"]) if data.get("section") is not None else None
        return cls(str(data.get("task", "")), fam, sec, loops, tolerances, data.get("output"),
                   dict(data.get("options") or {}))

    def digest(self) -> str:
        return hashlib.sha256(json.dumps(self.to_dict(), sort_keys=True).encode()).hexdigest()


@dataclass
class RunReport:
    task: str
    results: dict
    residuals: dict
    wall_time: float
    version: str
    config_hash: str
    ok: bool = True

    def to_dict(self) -> dict:
        return {"task": self.task, "results": self.results, "residuals": self.residuals,
                "wall_time": round(self.wall_time, 3), "version": self.version,
                "config_hash": self.config_hash, "ok": self.ok}


def _c(z) -> list:
    z = complex(z)
    return [z.real, z.imag]


def _m(M) -> list:
    return [list(map(int, r)) for r in M]


def _with_env(tol: Tolerance, precision: Optional[str] = None) -> Tolerance:
    values = tol.to_dict()
    for key, var in _ENV.items():
        if os.environ.get(var):
            try:
                values[key] = float(os.environ[var])
            except ValueError as exc:
                raise ConfigInvalid(f"{var} is not a number") from exc
    if os.environ.get("RELMONO_PRECISION"):
        values["precision"] = os.environ["RELMONO_PRECISION"]
    if precision:
        values["precision"] = precision
    return Tolerance(**values)


def load_config(path: str) -> ExperimentConfig:
    try:
        with open(path) as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigInvalid(f"cannot read config {path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)


def bundled_configs() -> List[str]:
    root = resources.files("relmono") / "configs"
    return sorted(p.name for p in root.iterdir() if p.name.endswith(".json"))


def bundled_config(name: str) -> ExperimentConfig:
    root = resources.files("relmono") / "configs"
    return ExperimentConfig.from_dict(json.loads((root / name).read_text()))


# --------------------------------------------------------------------------
# tasks


def _task_periods(cfg, tol):
    fam = cfg.family
    at = complex(*cfg.options["at"]) if "at" in cfg.options else fam.base.basepoint
    frame = seed_frame(fam, at=at, tol=tol)
    factors, worst = [], 0.0
    for k, f in enumerate(fam.factors):
        wa, wb = frame.pair(k)
        ca, cb = elliptic.contour_periods(f.m_of(at))
        err = max(min(abs(wa - ca), abs(wa + ca)) / abs(wa), min(abs(wb - cb), abs(wb + cb)) / abs(wb))
        worst = max(worst, err)
        factors.append({"m": _c(f.m_of(at)), "omega_a": _c(wa), "omega_b": _c(wb), "tau": _c(wb / wa),
                        "oracle_rel_err": err})
    return {"at": _c(at), "factors": factors}, {"oracle_rel_err": worst}


def _task_monodromy(cfg, tol):
    from .topology import keyhole_generators
    from .transport import loop_transport

    fam = cfg.family
    gens = keyhole_generators(fam.punctured_base)
    loops = cfg.loops or tuple((i,) for i in range(1, len(gens) + 1))
    out, worst = [], 0.0
    for w in loops:
        res = loop_transport(fam, list(w), None, tol, gens)
        worst = max(worst, res.monodromy.residual)
        out.append({"word": list(w), "rho": _m(res.monodromy.matrix), "residual": res.monodromy.residual,
                    "end_sheet": res.end_sheet})
    return {"generators": [_c(p) for p in gens.punctures], "loops": out}, {"rounding": worst}


def _task_cocycle(cfg, tol):
    from .topology import keyhole_generators, schreier_generators
    from .transport import loop_transport

    fam = cfg.family
    gens = keyhole_generators(fam.punctured_base)
    loops = cfg.loops
    if loops is None:
        if fam.cover is not None:
            loops = schreier_generators(fam.cover, gens, tol).words
        else:
            loops = tuple((i,) for i in range(1, len(gens) + 1))
    out, worst = [], 0.0
    for w in loops:
        res = loop_transport(fam, list(w), cfg.section, tol, gens)
        if res.end_sheet != res.start_sheet:
            raise ConfigInvalid(f"loop {list(w)} does not return to the base sheet")
        worst = max(worst, res.monodromy.residual, res.cocycle.residual)
        out.append({"word": list(w), "rho": _m(res.monodromy.matrix), "c": list(res.cocycle.vector),
                    "residual": max(res.monodromy.residual, res.cocycle.residual)})
    return {"generators": [_c(p) for p in gens.punctures], "loops": out}, {"rounding": worst}


def _task_rank(cfg, tol):
    from .monodromy import coboundary_solve, kernel_words, relative_lattice_rank
    from .topology import schreier_from_permutations
    from .transport import sheet_cocycle_table

    fam = cfg.family
    opts = cfg.options
    max_len = int(opts.get("max_word_len", 6))
    conj = int(opts.get("conj_len", 2))
    seeds = [list(w) for w in opts.get("seed_kernel_words", [])]
    st = sheet_cocycle_table(fam, cfg.section, tol)
    result = {"base_table": st.to_dict()}
    if fam.cover is not None:
        sch = schreier_from_permutations(st.perms)
        table = st.schreier_table(sch.words)
        seeds = [sch.rewrite(w) for w in seeds]
        result["schreier_generators"] = [list(w) for w in sch.words]
    else:
        table = st.base_table()
    words = kernel_words(table, max_len, seeds, conj_len=conj)
    rep = relative_lattice_rank(table, words, max_len)
    cob = coboundary_solve(table)
    result.update({
        "table": table.to_dict(),
        "lattice": {"rank": rep.rank, "hnf_basis": [list(r) for r in rep.hnf_basis],
                    "max_word_len": max_len, "conj_len": conj, "kernel_words": len(words),
                    "witnesses": [{"word": list(w), "c": list(c)} for w, c in rep.witnesses[:50]]},
        "coboundary": cob.to_dict(),
    })
    return result, {}


def _grid(cfg, tol):
    from .betti import betti_grid

    opts = cfg.options
    region = opts.get("region")
    res = opts.get("resolution", [5, 5])
    if region is None:
        raise ConfigInvalid("betti-grid needs options.region = [re0, re1, im0, im1]")
    return betti_grid(cfg.family, cfg.section, region, res, tol)


def _task_betti_grid(cfg, tol, out_path=None):
    grid = _grid(cfg, tol)
    csv_text = grid.to_csv()
    target = (cfg.output or {}).get("csv")
    if out_path and out_path.endswith(".csv"):
        target = out_path
    if target:
        with open(target, "w") as fh:
            fh.write(csv_text)
    worst = max((s.residual for s in grid.valid()), default=0.0)
    skipped = sum(1 for s in grid.samples if s.skipped)
    return {"csv": csv_text if not target else target, "shape": list(grid.shape), "skipped": skipped}, \
        {"solve": worst}


def _task_torsion(cfg, tol):
    from .betti import detect_torsion

    grid = _grid(cfg, tol)
    verdict = detect_torsion(grid.valid(), int(cfg.options.get("max_order", 12)), tol)
    return {"verdict": verdict.to_dict(), "samples": len(grid.valid())}, {"deviation": verdict.deviation}


def run(cfg: ExperimentConfig, out_path: Optional[str] = None) -> RunReport:
    """Execute one experiment and return its report (raises on failure)."""
    tol = cfg.tolerances
    t0 = time.perf_counter()
    if cfg.task == "verify":
        return verify(tol)
    handlers = {"periods": _task_periods, "monodromy": _task_monodromy, "cocycle": _task_cocycle,
                "rank": _task_rank, "torsion-check": _task_torsion}
    if cfg.task == "betti-grid":
        results, residuals = _task_betti_grid(cfg, tol, out_path)
    else:
        results, residuals = handlers[cfg.task](cfg, tol)
    return RunReport(cfg.task, results, residuals, time.perf_counter() - t0, __version__, cfg.digest())


def verify(tol: Tolerance = Tolerance(), report=print) -> RunReport:
    """Run the acceptance suite; ``ok`` is False when any criterion fails."""
    from .acceptance import run_all

    t0 = time.perf_counter()
    results = run_all(tol, report)
    ok = all(r.passed for r in results)
    cfg_hash = hashlib.sha256(json.dumps(tol.to_dict(), sort_keys=True).encode()).hexdigest()
    return RunReport("verify", {"criteria": [r.to_dict() for r in results]},
                     {}, time.perf_counter() - t0, __version__, cfg_hash, ok)


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="relmono", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"relmono {__version__}")
    sub = parser.add_subparsers(dest="task", required=True)
    for task in TASKS:
        p = sub.add_parser(task)
        p.add_argument("--config", required=(task != "verify"), help="experiment JSON (or bundled:<name>)")
        p.add_argument("--out", help="write the JSON report (or CSV grid for betti-grid) here")
        p.add_argument("--precision", choices=("double", "extended"))
        if task in ("rank",):
            p.add_argument("--max-word-len", type=int)
            p.add_argument("--seed-kernel-words", help="JSON file with a list of signed-integer words")
    return parser


def _resolve_config(args) -> ExperimentConfig:
    src = args.config
    if src.startswith("bundled:"):
        cfg = bundled_config(src.split(":", 1)[1])
    else:
        cfg = load_config(src)
    if cfg.task != args.task:
        cfg = ExperimentConfig(args.task, cfg.family, cfg.section, cfg.loops, cfg.tolerances, cfg.output,
                               cfg.options)
    opts = dict(cfg.options)
    if getattr(args, "max_word_len", None) is not None:
        opts["max_word_len"] = args.max_word_len
    if getattr(args, "seed_kernel_words", None):
        try:
            with open(args.seed_kernel_words) as fh:
                opts["seed_kernel_words"] = json.load(fh)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigInvalid(f"cannot read seed words: {exc}") from exc
    tol = _with_env(cfg.tolerances, args.precision)
    return ExperimentConfig(cfg.task, cfg.family, cfg.section, cfg.loops, tol, cfg.output, opts)


def _origin(exc: BaseException) -> str:
    """Innermost package module on the traceback, for error messages."""
    name, tb = "relmono", exc.__traceback__
    while tb is not None:
        mod = tb.tb_frame.f_globals.get("__name__", "")
        if mod.startswith("relmono"):
            name = mod
        tb = tb.tb_next
    return name


def main(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.task == "verify":
            tol = _with_env(Tolerance(), args.precision)
            if args.config:
                _resolve_config(args)  # validates a config passed for checking
            report = verify(tol, report=lambda line: print(line, flush=True))
        else:
            cfg = _resolve_config(args)
            report = run(cfg, args.out)
    except ConfigInvalid as exc:
        print(f"config error [{_origin(exc)}: {type(exc).__name__}]: {exc}", file=sys.stderr)
        return 1
    except NumericalFailure as exc:
        print(f"numerical failure [{_origin(exc)}: {type(exc).__name__}]: {exc}", file=sys.stderr)
        return 2
    text = json.dumps(report.to_dict(), indent=2)
    if args.out and not (args.task == "betti-grid" and args.out.endswith(".csv")):
        with open(args.out, "w") as fh:
            fh.write(text + "\n")
    else:
        print(text)
    return 0 if report.ok else 2


if __name__ == "__main__":
    sys.exit(main())
