"""Command-line interface.

Subcommands: validate (sanity-check a model file), eval (sample a
quantity onto a CSV grid), simulate (write observable path lines),
estimate (recover rates from path lines), example-marriage (emit the
bundled marital-history figure data). State and cause indices are
one-based on this boundary and in path files; state labels from the
model file work anywhere an index does.
"""

from __future__ import annotations

import argparse
import math
import os
import sys

import numpy as np

from . import competing, hazard, sojourn
from .curves import CurveGrid
from .errors import PhasemixError
from .gph import GPHDistribution
from .marriage import STATE_MARRIED, marriage_competing_model, marriage_model
from .mixture import (
    MixtureModel,
    estimate_generator,
    information_state,
    parse_path_line,
    format_path_line,
)
from .modelfile import ModelLabels, load_model, write_model
from .montecarlo import SimulationConfig, simulate_paths
from .numkernel import eigen

ANCHORED_QUANTITIES = ("survival", "density", "forward-intensity",
                       "sub-dist", "cause-intensity")
AGE_QUANTITIES = ("instant-intensity", "baseline", "residual", "occupation")
QUANTITIES = ANCHORED_QUANTITIES + AGE_QUANTITIES

INFO_MODES = ("initial", "current", "endpoints", "path")


def _fail(message: str):
    print(f"error: {message}", file=sys.stderr)
    raise SystemExit(2)


def _parse_grid(spec: str) -> np.ndarray:
    if ":" in spec:
        parts = spec.split(":")
        if len(parts) != 3:
            _fail(f"grid must be START:STOP:STEP, got {spec!r}")
        try:
            a, b, step = (float(p) for p in parts)
        except ValueError:
            _fail(f"non-numeric grid bounds in {spec!r}")
        if step <= 0 or b < a:
            _fail(f"grid {spec!r} must have positive step and STOP >= START")
        count = int(math.floor((b - a) / step + 1e-9)) + 1
        return a + step * np.arange(count)
    try:
        xs = np.array([float(p) for p in spec.split(",") if p.strip()])
    except ValueError:
        _fail(f"non-numeric grid value in {spec!r}")
    if xs.size == 0:
        _fail("empty grid")
    return xs


def _resolve_state(token: str, labels: ModelLabels, n_transient: int) -> int:
    """One-based index or state label to zero-based transient index."""
    try:
        idx = int(token)
    except ValueError:
        try:
            return labels.state_index(token)
        except PhasemixError as exc:
            _fail(str(exc))
    if not 1 <= idx <= n_transient:
        _fail(f"state {idx} out of range 1..{n_transient}")
    return idx - 1


def _resolve_cause(token: str, labels: ModelLabels, n_absorbing: int) -> int:
    try:
        idx = int(token)
    except ValueError:
        if token in labels.absorbing:
            return labels.absorbing.index(token)
        _fail(f"unknown cause {token!r}; known: {list(labels.absorbing)}")
    if not 1 <= idx <= n_absorbing:
        _fail(f"cause {idx} out of range 1..{n_absorbing}")
    return idx - 1


def _load(path: str) -> tuple[MixtureModel, ModelLabels]:
    try:
        return load_model(path)
    except FileNotFoundError:
        _fail(f"model file {path!r} not found")
    except PhasemixError as exc:
        _fail(str(exc))


def _emit(curve: CurveGrid, out: str | None) -> None:
    text = curve.format_csv()
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_validate(args) -> int:
    model, labels = _load(args.model)
    m, p = model.n_transient, model.n_absorbing
    print(f"model: {m} transient + {p} absorbing states")
    print(f"states: {', '.join(labels.states)}; absorbing: {', '.join(labels.absorbing)}")
    eig_base = eigen(model.gen.sub_generator)
    eig_scaled = eigen(model.scaled_gen.sub_generator)

    def fmt(es):
        vals = ", ".join(
            f"{v.real:.6g}" if abs(v.imag) < 1e-12 else f"{v.real:.6g}{v.imag:+.6g}i"
            for v in es.values
        )
        return f"[{vals}] ({'distinct' if es.distinct else 'repeated'})"

    print(f"base spectrum: {fmt(eig_base)}")
    print(f"scaled spectrum: {fmt(eig_scaled)}")
    print(f"dominant base eigenvalue: {eig_base.values[0].real:.12g}")
    print(f"dominant scaled eigenvalue: {eig_scaled.values[0].real:.12g}")
    print("absorption: "
          f"{'certain' if model.gen.absorption_certain else 'NOT certain'} under base, "
          f"{'certain' if model.scaled_gen.absorption_certain else 'NOT certain'} under scaled")
    total = float(model.initial.sum())
    kind = "proper" if not model.defective else f"defective (absorbed mass {1 - total:.6g})"
    print(f"initial distribution: {kind}")
    zero_speed = np.argwhere(model.speed <= 0).ravel()
    if zero_speed.size:
        names = ", ".join(labels.states[i] for i in zero_speed)
        print(f"warning: zero speed at {names}; Laplace transforms, moments, "
              "absorption probabilities, cause-restricted residuals and "
              "infinite-horizon occupations will reject this model")
    print("verdict: OK")
    return 0


def _build_info(model, labels, args, state: int, age: float):
    mode = args.info
    if mode == "path":
        if not args.path_file:
            _fail("--info path needs --path-file FILE")
        with open(args.path_file, "r", encoding="utf-8") as fh:
            line = next((ln for ln in fh if ln.strip() and not ln.startswith("#")), "")
        record = parse_path_line(line)
        return information_state(model, state, age, regime="full", record=record)
    if mode == "endpoints":
        i0 = state if args.i0 is None else \
            _resolve_state(args.i0, labels, model.n_transient)
        return information_state(model, state, age, regime="endpoints",
                                 initial_state=i0)
    return information_state(model, state, age, regime=mode)


def cmd_eval(args) -> int:
    model, labels = _load(args.model)
    quantity = args.quantity
    if quantity not in QUANTITIES:
        _fail(f"unknown quantity {quantity!r}; choose from {', '.join(QUANTITIES)}")
    grid = _parse_grid(args.grid)
    if np.any(grid < 0):
        _fail("grid values must be nonnegative")
    needs_state = quantity not in ("baseline",)
    state = None
    if needs_state:
        if args.state is None:
            _fail(f"--state is required for {quantity}")
        state = _resolve_state(args.state, labels, model.n_transient)
    cause = None
    if quantity in ("sub-dist", "cause-intensity"):
        if args.cause is None:
            _fail(f"--cause is required for {quantity}")
        cause = _resolve_cause(args.cause, labels, model.n_absorbing)

    metadata = {
        "quantity": quantity,
        "info": args.info,
        "model": args.model,
    }
    if state is not None:
        metadata["state"] = labels.states[state]

    try:
        if quantity in ANCHORED_QUANTITIES:
            anchors = [float(a) for a in (args.age or [])]
            if not anchors:
                _fail(f"{quantity} needs at least one --age anchor")
            columns: dict[str, np.ndarray] = {}
            if len(anchors) == 1:
                columns["s"] = anchors[0] + grid
            for a in anchors:
                info = _build_info(model, labels, args, state, a)
                law = GPHDistribution(model)
                if quantity == "survival":
                    vals = [law.conditional_survival(info, d) for d in grid]
                elif quantity == "density":
                    vals = [law.conditional_density(info, d) for d in grid]
                elif quantity == "forward-intensity":
                    vals = [hazard.forward_intensity(model, info, d) for d in grid]
                elif quantity == "sub-dist":
                    vals = [competing.sub_distribution(model, info, d, cause)
                            for d in grid]
                else:
                    vals = [competing.cause_forward_intensity(model, info, d, cause)
                            for d in grid]
                columns[f"value_t{a:g}"] = np.array(vals)
            if quantity == "forward-intensity":
                info = _build_info(model, labels, args, state, anchors[0])
                metadata["longrun"] = repr(
                    hazard.longrun_forward_intensity(model, info))
            if cause is not None:
                metadata["cause"] = labels.absorbing[cause]
            curve = CurveGrid(abscissa_name="duration", abscissa=grid,
                              columns=columns, metadata=metadata)
        else:
            if quantity == "occupation":
                if args.target is None:
                    _fail("occupation needs --target STATE")
                full_labels = labels.states + labels.absorbing
                try:
                    tgt = int(args.target) - 1
                    if not 0 <= tgt < len(full_labels):
                        _fail(f"target {args.target} out of range "
                              f"1..{len(full_labels)}")
                except ValueError:
                    if args.target not in full_labels:
                        _fail(f"unknown target {args.target!r}")
                    tgt = full_labels.index(args.target)
                age = float(args.age[0]) if args.age else 0.0
                info = _build_info(model, labels, args, state, age)
                if np.any(grid < age):
                    _fail("occupation grid holds window ends, all >= --age")
                vals = [sojourn.expected_occupation(
                    model, sojourn.OccupationQuery(info=info, target=tgt, until=s))
                    for s in grid]
                metadata["target"] = full_labels[tgt]
                metadata["age"] = repr(age)
                curve = CurveGrid(abscissa_name="s", abscissa=grid,
                                  columns={"occupation": np.array(vals)},
                                  metadata=metadata)
            else:
                if args.info == "path":
                    _fail(f"{quantity} refreshes the posterior at every grid "
                          "age; path information pins a single age")
                i0 = None
                if args.info == "endpoints":
                    i0 = state if args.i0 is None else _resolve_state(
                        args.i0, labels, model.n_transient)
                vals = []
                for t in grid:
                    if quantity == "baseline":
                        vals.append(hazard.baseline_intensity(model, t))
                        continue
                    info = information_state(model, state, t, regime=args.info,
                                             initial_state=i0)
                    if quantity == "instant-intensity":
                        vals.append(hazard.instantaneous_intensity(model, info))
                    else:
                        vals.append(sojourn.residual_lifetime(model, info))
                curve = CurveGrid(abscissa_name="t", abscissa=grid,
                                  columns={quantity.replace("-", "_"): np.array(vals)},
                                  metadata=metadata)
    except PhasemixError as exc:
        _fail(str(exc))
    _emit(curve, args.out)
    return 0


def cmd_simulate(args) -> int:
    model, labels = _load(args.model)
    start = None
    if args.start is not None:
        start = _resolve_state(args.start, labels, model.n_transient)
    try:
        config = SimulationConfig(
            paths=args.paths, horizon=args.horizon, seed=args.seed,
            start_state=start, regime=args.regime,
        )
        paths = simulate_paths(model, config)
    except PhasemixError as exc:
        _fail(str(exc))
    lines = [format_path_line(sp.record) for sp in paths]
    body = "\n".join(lines) + "\n"
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(body)
    else:
        sys.stdout.write(body)
    absorbed = sum(1 for sp in paths if sp.absorbed)
    print(f"simulated {len(paths)} paths (seed {args.seed}, regime {args.regime}); "
          f"{absorbed} absorbed", file=sys.stderr)
    return 0


def cmd_estimate(args) -> int:
    try:
        with open(args.paths_file, "r", encoding="utf-8") as fh:
            records = [parse_path_line(ln) for ln in fh
                       if ln.strip() and not ln.startswith("#")]
    except FileNotFoundError:
        _fail(f"paths file {args.paths_file!r} not found")
    except PhasemixError as exc:
        _fail(str(exc))
    if not records:
        _fail("no path lines in the input file")
    n_states = args.states
    if n_states is None:
        seen = 0
        for rec in records:
            for s, _ in rec.visits:
                seen = max(seen, s + 1)
            if rec.terminal is not None:
                seen = max(seen, rec.terminal + 1)
        n_states = seen
    try:
        est = estimate_generator(records, n_states)
    except PhasemixError as exc:
        _fail(str(exc))
    rows = []
    for i in range(n_states):
        if i in est.missing:
            continue
        for j in range(n_states):
            if i == j or est.transition_counts[i, j] == 0:
                continue
            rows.append((i, j))
    print(f"{len(records)} paths, {n_states} states; "
          f"missing (never occupied): {[k + 1 for k in est.missing] or 'none'}")
    for i, j in rows:
        print(f"  rate {i + 1}->{j + 1}: {est.rates[i, j]:.6g} "
              f"+- {est.std_errors[i, j]:.3g} "
              f"(count {est.transition_counts[i, j]}, exposure {est.exposure[i]:.6g})")
    if args.out:
        curve = CurveGrid(
            abscissa_name="from",
            abscissa=np.array([i + 1 for i, _ in rows], dtype=float),
            columns={
                "to": np.array([j + 1 for _, j in rows], dtype=float),
                "rate": np.array([est.rates[i, j] for i, j in rows]),
                "se": np.array([est.std_errors[i, j] for i, j in rows]),
                "count": np.array([est.transition_counts[i, j]
                                   for i, j in rows], dtype=float),
            },
            metadata={"paths": str(len(records)), "states": str(n_states)},
        )
        curve.write_csv(args.out)
    return 0


def _marriage_bundle(out_dir: str) -> list[str]:
    os.makedirs(out_dir, exist_ok=True)
    written: list[str] = []

    def save(name: str, curve: CurveGrid):
        path = os.path.join(out_dir, name)
        curve.write_csv(path)
        written.append(path)

    anchors = (0.01, 4.0, 10.0)
    durations = np.round(np.arange(0, 401) * 0.1, 10)
    ages = np.round(np.arange(0, 301) * 0.1, 10)

    for hetero, tag in ((True, "heterogeneous"), (False, "homogeneous")):
        model, labels = marriage_model(heterogeneous=hetero)
        mpath = os.path.join(out_dir, f"model_single_{tag}.json")
        write_model(mpath, model, labels)
        written.append(mpath)
        law = GPHDistribution(model)

        meta = {"variant": f"single_{tag}", "state": "married", "info": "current"}
        fwd_cols = {}
        surv_cols = {}
        for a in anchors:
            info = information_state(model, STATE_MARRIED, a, regime="current")
            fwd_cols[f"value_t{a:g}"] = np.array(
                [hazard.forward_intensity(model, info, d) for d in durations])
            surv_cols[f"value_t{a:g}"] = np.array(
                [law.conditional_survival(info, d) for d in durations])
        info0 = information_state(model, STATE_MARRIED, anchors[0], regime="current")
        longrun = hazard.longrun_forward_intensity(model, info0)
        save(f"forward_intensity_single_{tag}.csv",
             CurveGrid("duration", durations, fwd_cols,
                       {**meta, "longrun": repr(longrun)}))
        save(f"survival_single_{tag}.csv",
             CurveGrid("duration", durations, surv_cols, meta))

        inst = np.array([
            hazard.instantaneous_intensity(
                model, information_state(model, STATE_MARRIED, t, regime="current"))
            for t in ages
        ])
        save(f"instantaneous_intensity_single_{tag}.csv",
             CurveGrid("t", ages, {"value": inst}, meta))
        base = np.array([hazard.baseline_intensity(model, t) for t in ages])
        save(f"baseline_intensity_single_{tag}.csv",
             CurveGrid("t", ages, {"value": base},
                       {"variant": f"single_{tag}", "info": "current"}))
        resid = np.array([
            sojourn.residual_lifetime(
                model, information_state(model, STATE_MARRIED, t, regime="current"))
            for t in ages
        ])
        save(f"residual_single_{tag}.csv",
             CurveGrid("t", ages, {"value": resid}, meta))

        cmodel, clabels = marriage_competing_model(heterogeneous=hetero)
        cpath = os.path.join(out_dir, f"model_competing_{tag}.json")
        write_model(cpath, cmodel, clabels)
        written.append(cpath)
        for cause, cname in enumerate(clabels.absorbing):
            cols: dict[str, np.ndarray] = {}
            for a in anchors:
                cinfo = information_state(cmodel, STATE_MARRIED, a, regime="current")
                cols[f"F_t{a:g}"] = np.array(
                    [competing.sub_distribution(cmodel, cinfo, d, cause)
                     for d in durations])
                cols[f"Fbar_t{a:g}"] = np.array(
                    [competing.sub_survival(cmodel, cinfo, d, cause)
                     for d in durations])
            cinfo0 = information_state(cmodel, STATE_MARRIED, anchors[0],
                                       regime="current")
            save(f"sub_distribution_competing_{tag}_{cname}.csv",
                 CurveGrid("duration", durations, cols,
                           {"variant": f"competing_{tag}", "state": "married",
                            "cause": cname, "info": "current",
                            "longrun_cause_intensity": repr(
                                competing.longrun_cause_intensity(
                                    cmodel, cinfo0, cause))}))
    return written


def cmd_example_marriage(args) -> int:
    written = _marriage_bundle(args.out_dir)
    for path in written:
        print(path)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="phasemix",
        description="Phase-type survival laws from two-speed Markov mixtures",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_val = sub.add_parser("validate", help="sanity-check a model file")
    p_val.add_argument("--model", required=True)
    p_val.set_defaults(func=cmd_validate)

    p_eval = sub.add_parser("eval", help="evaluate a quantity onto a CSV grid")
    p_eval.add_argument("--model", required=True)
    p_eval.add_argument("--quantity", required=True)
    p_eval.add_argument("--state", default=None,
                        help="transient state (1-based index or label)")
    p_eval.add_argument("--age", action="append", default=None,
                        help="anchor age; repeat for several anchors")
    p_eval.add_argument("--grid", required=True,
                        help="START:STOP:STEP or comma list")
    p_eval.add_argument("--cause", default=None,
                        help="cause (1-based index or label)")
    p_eval.add_argument("--target", default=None,
                        help="occupation target state (1-based over all states, "
                             "or label)")
    p_eval.add_argument("--info", choices=INFO_MODES, default="current")
    p_eval.add_argument("--path-file", default=None,
                        help="path line file for --info path")
    p_eval.add_argument("--i0", default=None,
                        help="starting state for --info endpoints")
    p_eval.add_argument("--out", default=None)
    p_eval.set_defaults(func=cmd_eval)

    p_sim = sub.add_parser("simulate", help="simulate observable path lines")
    p_sim.add_argument("--model", required=True)
    p_sim.add_argument("--paths", type=int, required=True)
    p_sim.add_argument("--seed", type=int, default=0)
    p_sim.add_argument("--horizon", type=float, default=None)
    p_sim.add_argument("--regime", choices=("mixture", "base", "scaled"),
                       default="mixture")
    p_sim.add_argument("--start", default=None,
                       help="pin the starting state (1-based index or label)")
    p_sim.add_argument("--out", default=None)
    p_sim.set_defaults(func=cmd_simulate)

    p_est = sub.add_parser("estimate", help="estimate rates from path lines")
    p_est.add_argument("--paths-file", required=True)
    p_est.add_argument("--states", type=int, default=None,
                       help="total number of states (default: inferred)")
    p_est.add_argument("--out", default=None)
    p_est.set_defaults(func=cmd_estimate)

    p_ex = sub.add_parser("example-marriage",
                          help="write the marital-history figure bundle")
    p_ex.add_argument("--out-dir", default="marriage_figures")
    p_ex.set_defaults(func=cmd_example_marriage)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
