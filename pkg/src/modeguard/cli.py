"""Command-line frontend: synthesize, check, replay, serve, and the
bundled multicopter model.

Exit codes: 0 success, 1 unreadable or malformed input, 2 synthesis or
check failure (blocking, uncontrollable, empty), 3 runtime decision
errors during scenario replay.
"""

from __future__ import annotations

import glob
import json
import logging
import os
import sys
from pathlib import Path

import click

from .automata import (
    AutFormatError,
    Automaton,
    AutomatonError,
    dump_aut,
    load_aut,
)
from .multicopter import (
    SPEC_COUNT,
    SPEC_MANIFEST,
    BlockingSpecificationError,
    build_example,
    build_plant,
    build_spec,
    synthesize,
)
from .runtime import (
    DecisionError,
    LiveSession,
    ScenarioFormatError,
    SupFormatError,
    TransitionMatrix,
    default_frame,
    dump_sup,
    export_matrix,
    load_sup,
    parse_scenario,
    run_scenario,
    write_scenario,
)
from .synthesis import diagnose_blocking, is_controllable

_LOG_LEVELS = ("critical", "error", "warning", "info", "debug")


def _log_level() -> str:
    level = os.environ.get("MODEGUARD_LOG", "warning").lower()
    return level if level in _LOG_LEVELS else "warning"


def _fail(code: int, message: str) -> None:
    click.echo(message, err=True)
    sys.exit(code)


def _load_automaton(path: Path) -> Automaton:
    try:
        return load_aut(path)
    except OSError as err:
        _fail(1, f"{path}: {err.strerror or err}")
    except AutomatonError as err:
        _fail(1, f"{path}: {err}")


def _load_matrix(path: Path) -> TransitionMatrix:
    try:
        return load_sup(path)
    except OSError as err:
        _fail(1, f"{path}: {err.strerror or err}")
    except AutomatonError as err:
        _fail(1, f"{path}: {err}")


@click.group()
def main() -> None:
    """Supervisor synthesis and execution for mode-switching control."""
    logging.basicConfig(level=getattr(logging, _log_level().upper()))


@main.command()
@click.option("--plant", "plant_path", required=True, type=click.Path(path_type=Path))
@click.option(
    "--spec",
    "spec_patterns",
    multiple=True,
    required=True,
    help="Requirement automaton; repeatable, glob patterns welcome.",
)
@click.option("--out", "out_base", required=True, type=click.Path(path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def synth(plant_path: Path, spec_patterns: tuple[str, ...], out_base: Path, fmt: str) -> None:
    """Synthesize a supervisor and write it as OUT.aut plus OUT.sup."""
    plant = _load_automaton(plant_path)
    spec_paths: list[Path] = []
    for pattern in spec_patterns:
        matches = sorted(glob.glob(pattern))
        if matches:
            spec_paths.extend(Path(m) for m in matches)
        else:
            # not a pattern: treat as a literal path and let loading complain
            spec_paths.append(Path(pattern))
    specs = [_load_automaton(p) for p in spec_paths]

    try:
        report = synthesize(plant, specs)
    except BlockingSpecificationError as err:
        click.echo("synthesis failed: the requirement set blocks the plant")
        click.echo(str(err))
        sys.exit(2)
    except AutomatonError as err:
        _fail(1, str(err))

    base = out_base.with_suffix("") if out_base.suffix in (".aut", ".sup") else out_base
    if base.parent != Path(""):
        base.parent.mkdir(parents=True, exist_ok=True)
    aut_path = base.with_suffix(".aut")
    dump_aut(report.supervisor, aut_path)
    outputs = [str(aut_path)]

    accepting: dict[int, str] = {}
    sup_note = None
    try:
        matrix = export_matrix(report)
        sup_path = base.with_suffix(".sup")
        dump_sup(matrix, sup_path)
        outputs.append(str(sup_path))
        accepting = {state: mode.name for state, mode in sorted(matrix.accepting.items())}
    except AutomatonError as err:
        sup_note = f"matrix export skipped: {err}"

    if fmt == "json":
        click.echo(
            json.dumps(
                {
                    "plant": list(report.plant_counts),
                    "requirement": list(report.spec_counts),
                    "supervisor": list(report.supervisor_counts),
                    "nonblocking": report.nonblocking,
                    "iterations": report.iterations,
                    "accepting": accepting,
                    "outputs": outputs,
                },
                indent=2,
            )
        )
    else:
        click.echo(report.summary())
        if accepting:
            modes = ", ".join(accepting.values())
            click.echo(f"accepting modes: {len(accepting)} ({modes})")
        if sup_note:
            click.echo(sup_note)
        click.echo("wrote: " + ", ".join(outputs))


@main.command()
@click.argument("automaton_path", type=click.Path(path_type=Path))
@click.option("--nonblocking", is_flag=True, help="Require every state to reach marking.")
@click.option(
    "--controllable-against",
    "plant_path",
    type=click.Path(path_type=Path),
    default=None,
    help="Require controllability with respect to this plant.",
)
@click.option("--deterministic", is_flag=True, help="Require deterministic transitions.")
def check(
    automaton_path: Path,
    nonblocking: bool,
    plant_path: Path | None,
    deterministic: bool,
) -> None:
    """Check properties of an automaton; exit 0 only if all of them hold."""
    automaton = _load_automaton(automaton_path)
    ok = True
    if deterministic:
        # the file format admits one destination per (state, event); any
        # duplicate row is refused at parse time, so loading settled this
        click.echo("deterministic: pass")
    if nonblocking:
        diagnosis = diagnose_blocking(automaton)
        if diagnosis is None:
            click.echo("nonblocking: pass")
        else:
            click.echo("nonblocking: FAIL")
            click.echo(str(diagnosis))
            ok = False
    if plant_path is not None:
        plant = _load_automaton(plant_path)
        try:
            verdict = is_controllable(automaton, plant)
        except AutomatonError as err:
            _fail(1, str(err))
        if verdict is True:
            click.echo("controllable: pass")
        else:
            click.echo("controllable: FAIL")
            click.echo(str(verdict))
            ok = False
    if not ok:
        sys.exit(2)


@main.command()
@click.argument("sup_path", type=click.Path(path_type=Path))
@click.argument("scenario_path", type=click.Path(path_type=Path))
@click.option("--format", "fmt", type=click.Choice(["text", "json"]), default="text")
def run(sup_path: Path, scenario_path: Path, fmt: str) -> None:
    """Replay a scenario file against a supervisor matrix."""
    matrix = _load_matrix(sup_path)
    try:
        text = scenario_path.read_text(encoding="utf-8")
    except OSError as err:
        _fail(1, f"{scenario_path}: {err.strerror or err}")
    try:
        frames = parse_scenario(text)
        timeline = run_scenario(matrix, frames)
    except (ScenarioFormatError, DecisionError) as err:
        _fail(3, f"scenario failed: {err}")

    initial_mode = matrix.accepting[matrix.initial].name
    if fmt == "json":
        click.echo(
            json.dumps(
                {
                    "initial": initial_mode,
                    "timeline": [
                        {"period": i, "mode": mode.name, "consumed": list(trace)}
                        for i, (mode, trace) in enumerate(timeline)
                    ],
                },
                indent=2,
            )
        )
        return
    if not timeline:
        click.echo(initial_mode)
        return
    for i, (mode, trace) in enumerate(timeline):
        click.echo(f"{i:>4}  {mode.name:<13} {' '.join(trace)}")


@main.command()
@click.argument("sup_path", type=click.Path(path_type=Path))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8750, show_default=True)
@click.option("--delta", default=1.0, show_default=True, help="Decision period, seconds.")
@click.option("--detect-interval", default=0.01, show_default=True)
@click.option("--auto-power-on/--no-auto-power-on", default=True, show_default=True)
@click.option(
    "--log-file",
    type=click.Path(path_type=Path),
    default=None,
    help="Flush the decision log here on shutdown.",
)
def serve(
    sup_path: Path,
    host: str,
    port: int,
    delta: float,
    detect_interval: float,
    auto_power_on: bool,
    log_file: Path | None,
) -> None:
    """Serve a live session over HTTP until interrupted."""
    import uvicorn

    from .service import build_app

    matrix = _load_matrix(sup_path)
    session = LiveSession(
        matrix,
        delta=delta,
        detect_interval=detect_interval,
        auto_power_on=auto_power_on,
    )
    app = build_app(session, log_path=log_file)
    click.echo(f"serving on http://{host}:{port}")
    try:
        uvicorn.run(app, host=host, port=port, log_level=_log_level())
    except SystemExit as err:
        # the server reports startup failures (port taken, bad interface)
        # with its own exit code; fold them into this tool's contract
        if err.code:
            _fail(1, f"server failed to start on {host}:{port}")
        raise
    except OSError as err:
        _fail(1, f"cannot bind {host}:{port}: {err.strerror or err}")


def _sample_scenarios() -> dict[str, list]:
    preamble = [default_frame(0, power="MIE1"), default_frame(1, stick="MIE3")]
    cascade = preamble + [
        default_frame(2, GPS="ATE4"),
        default_frame(3, GPS="ATE4", barometer="ATE6"),
        default_frame(4, GPS="ATE4", barometer="ATE6", INS="ATE2"),
    ]
    rc_loss = preamble + [
        default_frame(2, RC="ATE12"),
        default_frame(3, RC="ATE12", distance="ATE18"),
    ]
    return {"scenario-sensor-cascade.json": cascade, "scenario-rc-loss.json": rc_loss}


@main.command()
@click.option(
    "--out",
    "out_dir",
    type=click.Path(path_type=Path),
    default=Path("model"),
    show_default=True,
)
@click.option(
    "--example",
    type=click.IntRange(1, 3),
    default=None,
    help="Write a known-blocking requirement variant instead of the stock set.",
)
def model(out_dir: Path, example: int | None) -> None:
    """Write the bundled multicopter plant, requirements, and scenarios."""
    plant = build_plant()
    if example is None:
        specs = [build_spec(j) for j in range(1, SPEC_COUNT + 1)]
    else:
        specs = build_example(example)
    out_dir.mkdir(parents=True, exist_ok=True)
    dump_aut(plant, out_dir / "plant.aut")
    spec_files = []
    for index, spec in enumerate(specs, start=1):
        filename = f"spec{index:02}.aut"
        dump_aut(spec, out_dir / filename)
        spec_files.append(filename)

    catalog = {name: (summary, tags) for name, summary, tags in SPEC_MANIFEST}
    manifest = {
        "plant": "plant.aut",
        "example": example,
        "specs": [
            {
                "file": filename,
                "name": spec.name,
                "summary": catalog.get(spec.name, ("", ()))[0],
                "requirements": list(catalog.get(spec.name, ("", ()))[1]),
            }
            for filename, spec in zip(spec_files, specs)
        ],
    }
    (out_dir / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")

    for filename, frames in _sample_scenarios().items():
        (out_dir / filename).write_text(write_scenario(frames), encoding="utf-8")

    label = "stock requirement set" if example is None else f"known-blocking example {example}"
    click.echo(f"wrote plant, {len(specs)} requirement automata ({label}), "
               f"manifest, and {len(_sample_scenarios())} scenarios to {out_dir}")


if __name__ == "__main__":
    main()
