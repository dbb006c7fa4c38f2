"""Batch command line: ``fofpid {tune,reproduce,simulate,bode}``."""

from __future__ import annotations

import argparse
import csv
import json
import logging
import sys
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .controllers import KINDS, controller_from_dict, default_bounds
from .fracops import DomainError, discretize, frequency_response, synthesize_oustaloup
from .plants import plant_from_dict
from .simloop import (
    INDEX_KINDS,
    ObjectiveSpec,
    Scenario,
    compute_indices,
    evaluate_objective,
    evaluation_scenario,
    run_closed_loop,
    tuning_scenario,
)
from .estimators import ControllerTuner

log = logging.getLogger("fofpid")

DEFAULT_SEED = 20110101


class ConfigError(ValueError):
    pass


@dataclass
class RunManifest:
    command: str
    scenario: Path | None = None
    out: Path = Path("out")
    seed: int = DEFAULT_SEED
    overrides: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.scenario is not None and not Path(self.scenario).is_file():
            raise ConfigError(f"scenario: file {self.scenario} does not exist")
        self.out = Path(self.out)
        self.out.mkdir(parents=True, exist_ok=True)

    def document(self) -> dict:
        if self.scenario is None:
            return {}
        try:
            return json.loads(Path(self.scenario).read_text())
        except json.JSONDecodeError as exc:
            raise ConfigError(f"scenario: {self.scenario} is not valid JSON ({exc})") from None


def load_reference_rows(table: int | None = None) -> list[dict]:
    text = resources.files("fofpid").joinpath("data/reference_tables.json").read_text()
    rows = json.loads(text)["rows"]
    return [r for r in rows if table is None or r["table"] == table]


def _plant_key(plant) -> str | None:
    return plant.lower() if isinstance(plant, str) else None


def _scenario_from(doc: dict, plant, horizon, step, evaluation: bool) -> Scenario:
    key = _plant_key(plant)
    horizon = horizon or doc.get("horizon")
    step = step or doc.get("sample_time")
    if key is not None:
        sc = (evaluation_scenario if evaluation else tuning_scenario)(key, horizon, step)
    else:
        if horizon is None or step is None:
            raise ConfigError("horizon/sample_time: required for a custom plant")
        sc = Scenario(horizon=float(horizon), sample_time=float(step))
        if evaluation:
            sc.disturbance_time = sc.horizon / 2.0
    dist = doc.get("disturbance", "default")
    if dist is None or not evaluation:
        sc.disturbance_time = None
    elif isinstance(dist, dict):
        sc.disturbance_time = float(dist.get("time", sc.horizon / 2.0))
        sc.disturbance_amplitude = float(dist.get("amplitude", 1.0))
    return sc


def _check_plant(plant):
    if isinstance(plant, str) and plant.lower() in ("p1", "p2"):
        return plant.lower()
    if isinstance(plant, dict):
        return plant
    raise ConfigError(f"plant: expected 'p1', 'p2' or a plant document, got {plant!r}")


def _write_rows(path: Path, header, rows) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def cmd_tune(manifest: RunManifest) -> dict:
    doc = manifest.document()
    ov = manifest.overrides
    kind = ov.get("controller") or doc.get("controller", "fuzzy_fopid")
    if kind not in KINDS:
        raise ConfigError(f"controller: unknown kind {kind!r}; expected one of {list(KINDS)}")
    plant = _check_plant(ov.get("plant") or doc.get("plant", "p1"))
    obj = dict(doc.get("objective", {}))
    if ov.get("index"):
        obj["index"] = ov["index"]
    try:
        spec = ObjectiveSpec(**obj)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"objective: {exc}") from None
    tune_sc = _scenario_from(doc, plant, ov.get("horizon"), ov.get("step"), evaluation=False)
    eval_sc = _scenario_from(doc, plant, ov.get("horizon"), ov.get("step"), evaluation=True)
    ga = dict(doc.get("ga", {}))
    for k in ("max_generations", "population_size"):
        if ov.get(k):
            ga[k] = ov[k]
    bounds = doc.get("bounds") or default_bounds(kind)
    if len(bounds) != len(default_bounds(kind)):
        raise ConfigError(f"bounds: {kind} needs {len(default_bounds(kind))} intervals")
    init_bounds = doc.get("init_bounds")
    if isinstance(init_bounds, list) and len(init_bounds) != len(bounds):
        raise ConfigError(f"init_bounds: {kind} needs {len(bounds)} intervals")
    seed = manifest.seed if "seed" in ov or "seed" not in doc else int(doc["seed"])
    try:
        tuner = ControllerTuner(kind=kind, plant=plant, index=spec.index, w1=spec.w1, w2=spec.w2,
                                penalty=spec.penalty, horizon=tune_sc.horizon,
                                sample_time=tune_sc.sample_time, bounds=bounds,
                                init_bounds=init_bounds, random_state=seed, **ga)
    except TypeError as exc:
        raise ConfigError(f"ga: {exc}") from None

    def progress(g, best, mean):
        log.info("generation %d best J %.6f mean J %.3f", g, best, mean)

    try:
        tuner.fit(callback=progress)
    except ValueError as exc:
        raise ConfigError(f"ga: {exc}") from None
    out = manifest.out
    trace = tuner.simulate(eval_sc)
    trace.to_csv(out / "trace.csv")
    tuner.result_.history_to_csv(out / "history.csv")
    result = {
        "controller": tuner.controller_.to_dict(),
        "plant": plant,
        "objective": {"index": spec.index, "w1": spec.w1, "w2": spec.w2, "penalty": spec.penalty},
        "J": tuner.best_score_,
        "seed": seed,
        "ga": tuner.result_.to_dict(),
        "scenario": tune_sc.to_dict(),
    }
    if not trace.diverged:
        result["evaluation_report"] = compute_indices(trace, step_window=eval_sc.disturbance_time).to_dict()
    (out / "best.json").write_text(json.dumps(result, indent=2))
    return result


def cmd_reproduce(manifest: RunManifest, table: int | None) -> list[dict]:
    ov = manifest.overrides
    rows = []
    for row in load_reference_rows(table):
        sc = tuning_scenario(row["plant"], ov.get("horizon"), ov.get("step"))
        J = evaluate_objective(row["params"], row["controller"], row["plant"], ObjectiveSpec(row["index"]), sc)
        rows.append({
            "table": row["table"],
            "plant": row["plant"],
            "controller": row["controller"],
            "index": row["index"],
            "J_paper": row["J_paper"],
            "J_ours": J,
            "rel_diff": (J - row["J_paper"]) / row["J_paper"],
        })
    name = "comparison.csv" if table is None else f"comparison_table{table}.csv"
    _write_rows(
        manifest.out / name,
        ["controller", "index", "J_paper", "J_ours", "rel_diff", "table", "plant"],
        [[r["controller"], r["index"], r["J_paper"], repr(r["J_ours"]), repr(r["rel_diff"]), r["table"], r["plant"]]
         for r in rows],
    )
    return rows


def cmd_simulate(manifest: RunManifest) -> dict:
    doc = manifest.document()
    ov = manifest.overrides
    if ov.get("params"):
        cdoc = json.loads(Path(ov["params"]).read_text())
        cdoc = cdoc.get("controller", cdoc)
    else:
        cdoc = doc.get("controller")
    if cdoc is None:
        raise ConfigError("controller: no controller given (scenario 'controller' entry or --params)")
    if cdoc.get("kind") not in KINDS:
        raise ConfigError(f"controller: unknown kind {cdoc.get('kind')!r}")
    plant_doc = _check_plant(ov.get("plant") or doc.get("plant", "p1"))
    sc = _scenario_from(doc, plant_doc, ov.get("horizon"), ov.get("step"), evaluation=True)
    try:
        controller = controller_from_dict(cdoc, sc.sample_time)
    except ValueError as exc:
        raise ConfigError(f"controller: {exc}") from None
    plant = plant_from_dict(plant_doc, sc.sample_time)
    trace = run_closed_loop(controller, plant, sc)
    trace.to_csv(manifest.out / "trace.csv")
    report = {"diverged": trace.diverged, "divergence_time": trace.divergence_time,
              "disturbance_time": sc.disturbance_time}
    if not trace.diverged:
        report.update(compute_indices(trace, step_window=sc.disturbance_time).to_dict())
    (manifest.out / "report.json").write_text(json.dumps(report, indent=2))
    return report


def cmd_bode(manifest: RunManifest, order: float, omega_b: float, omega_h: float, N: int,
             step: float, points: int) -> np.ndarray:
    filt = synthesize_oustaloup(order, omega_b, omega_h, N)
    disc = discretize(filt, step)
    nyquist = np.pi / step
    w = np.logspace(np.log10(omega_b), np.log10(min(omega_h, 0.999 * nyquist)), points)
    hc = frequency_response(filt, w)
    hd = disc.response(w)
    data = np.column_stack([
        w,
        20 * np.log10(np.abs(hc)), np.degrees(np.angle(hc)),
        20 * np.log10(np.abs(hd)), np.degrees(np.angle(hd)),
    ])
    _write_rows(
        manifest.out / "bode.csv",
        ["omega_rad_s", "mag_db", "phase_deg", "mag_db_discrete", "phase_deg_discrete"],
        [[repr(float(v)) for v in row] for row in data],
    )
    return data


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fofpid", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", type=Path, help="JSON scenario / tuning specification")
        p.add_argument("--out", type=Path, default=Path("out"))
        p.add_argument("--seed", type=int)
        p.add_argument("--horizon", type=float, help="simulation horizon, s")
        p.add_argument("--step", type=float, help="sample time, s")
        return p

    p = common(sub.add_parser("tune", help="GA-tune a controller"))
    p.add_argument("--plant", help="p1 or p2")
    p.add_argument("--controller", help=f"one of {', '.join(KINDS)}")
    p.add_argument("--index", choices=INDEX_KINDS)
    p.add_argument("--generations", type=int, dest="max_generations")
    p.add_argument("--population", type=int, dest="population_size")

    p = common(sub.add_parser("reproduce", help="re-evaluate the bundled table parameter sets"))
    p.add_argument("--table", type=int, choices=(1, 2, 3, 4))

    p = common(sub.add_parser("simulate", help="step + load-disturbance run of a given controller"))
    p.add_argument("--plant", help="p1 or p2")
    p.add_argument("--params", help="JSON controller document {kind, params, sample_time}")

    p = common(sub.add_parser("bode", help="continuous vs discretized Oustaloup frequency response"))
    p.add_argument("--order", type=float, required=True)
    p.add_argument("--omega-b", type=float, default=1e-2)
    p.add_argument("--omega-h", type=float, default=1e2)
    p.add_argument("--N", type=int, default=2)
    p.add_argument("--points", type=int, default=200)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(message)s")
    overrides = {k: v for k, v in vars(args).items()
                 if k not in ("command", "scenario", "out", "verbose") and v is not None}
    try:
        manifest = RunManifest(args.command, args.scenario, args.out,
                               DEFAULT_SEED if args.seed is None else args.seed, overrides)
        if args.command == "tune":
            res = cmd_tune(manifest)
            print(f"J = {res['J']:.6f}  params = {res['controller']['params']}")
        elif args.command == "reproduce":
            for r in cmd_reproduce(manifest, args.table):
                print(f"table {r['table']} {r['controller']:<12} {r['index']:<6} "
                      f"J_paper={r['J_paper']:<10} J_ours={r['J_ours']:.5f} rel={r['rel_diff']:+.3f}")
        elif args.command == "simulate":
            rep = cmd_simulate(manifest)
            print(json.dumps(rep, indent=2))
        elif args.command == "bode":
            cmd_bode(manifest, args.order, args.omega_b, args.omega_h, args.N,
                     args.step or 1e-3, args.points)
            print(f"wrote {manifest.out / 'bode.csv'}")
    except (ConfigError, DomainError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
