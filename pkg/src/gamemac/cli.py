"""Command-line experiment runner.

All capacity math routes through the capacity module; this layer only
parses configuration, formats CSV, and sets exit codes.  Floating-point
output uses 10 significant digits so runs are byte-reproducible under a
fixed seed.
"""

from __future__ import annotations

import sys

import click
import numpy as np

from . import capacity, verify
from .capacity import OptimizerConfig
from .correlations import (
    EnumerationCapExceeded,
    box_to_csv,
    magic_square_box,
    mpp_box,
    pr_box,
    tsirelson_box,
)
from .games import game_by_name

REFERENCE_TABLE = {
    # (eta_w=1, eta_l=0) channels: (L value, better value, better resource)
    "chsh": (1.44, 1.63, None),
    "magic-square": (2.93, 3.17, "Q"),
    "mpp:3": (2.72, 3.00, "Q"),
}


def _fmt(x: float) -> str:
    return f"{x:.10g}"


def load_config(path: str) -> dict[str, str]:
    """Flat `key = value` config; '#' starts a comment."""
    out: dict[str, str] = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise click.ClickException(f"{path}:{lineno}: expected key = value")
            key, value = line.split("=", 1)
            out[key.strip()] = value.strip()
    return out


def parse_eta_grid(spec: str) -> np.ndarray:
    try:
        a, b, n = spec.split(":")
        grid = np.linspace(float(a), float(b), int(n))
    except ValueError as exc:
        raise click.ClickException(f"eta-grid must be a:b:n, got {spec!r}") from exc
    if int(n) < 1 or grid.min() < 0 or grid.max() > 1:
        raise click.ClickException(f"eta-grid {spec!r} must stay within [0, 1] with n >= 1")
    return grid


def _merged(config_path, **flags):
    values = load_config(config_path) if config_path else {}
    for key, val in flags.items():
        if val is not None:
            values[key.replace("_", "-")] = val
    return values


def _build_cfg(values) -> OptimizerConfig:
    return OptimizerConfig(
        grid_step=float(values["grid-step"]) if "grid-step" in values else None,
        restarts=int(values.get("restarts", 20)),
        tolerance=float(values.get("tolerance", 1e-7)),
        seed=int(values.get("seed", 0)),
    )


@click.group()
def main():
    """Sum-capacities of nonlocal-game-based multiple access channels."""


@main.command("sweep")
@click.option("--game", "game_name", default=None)
@click.option("--channel-type", type=click.Choice(["1", "2"]), default=None)
@click.option("--eta-grid", default=None, help="a:b:n linspace over eta")
@click.option("--resources", default=None, help="comma-separated resource list")
@click.option("--seed", default=None)
@click.option("--out", default=None, help="output CSV path (default stdout)")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--vertex-file", default=None, type=click.Path(exists=True))
def cmd_sweep(game_name, channel_type, eta_grid, resources, seed, out, config_path, vertex_file):
    """Capacity sweep over an eta grid; emits CSV."""
    values = _merged(
        config_path,
        game=game_name,
        channel_type=channel_type,
        eta_grid=eta_grid,
        resources=resources,
        seed=seed,
        out=out,
    )
    for required in ("game", "channel-type", "eta-grid", "resources"):
        if required not in values:
            raise click.ClickException(f"missing required field: {required}")
    try:
        game = game_by_name(values["game"])
    except ValueError as exc:
        raise click.ClickException(str(exc))
    ctype = int(values["channel-type"])
    if ctype not in (1, 2):
        raise click.ClickException(f"channel-type must be 1 or 2, got {ctype}")
    etas = parse_eta_grid(values["eta-grid"])
    res_list = [r.strip() for r in values["resources"].split(",") if r.strip()]
    if vertex_file:
        res_list = [
            f"vertex-file:{vertex_file}" if r == "vertex-file" else r for r in res_list
        ]
    cfg = _build_cfg(values)
    try:
        rows = capacity.sweep(game, ctype, etas, res_list, cfg)
    except EnumerationCapExceeded as exc:
        raise click.ClickException(str(exc))
    except ValueError as exc:
        raise click.ClickException(str(exc))
    lines = ["eta,resource,kind,value,diagnostic"]
    for r in rows:
        lines.append(f"{_fmt(r.eta)},{r.resource},{r.kind},{_fmt(r.value)},{r.diagnostic}")
    text = "\n".join(lines) + "\n"
    if values.get("out"):
        with open(values["out"], "w") as fh:
            fh.write(text)
        click.echo(f"wrote {len(rows)} rows to {values['out']}")
    else:
        click.echo(text, nl=False)


@main.command("verify")
@click.option("--seed", default=0, show_default=True)
@click.option("--count", default=1000, show_default=True, help="random triples per game")
def cmd_verify(seed, count):
    """Run the randomized identity suite and pseudo-telepathy checks."""
    checks = verify.run_verification(seed=int(seed), count=int(count))
    click.echo(verify.format_report(checks), nl=False)
    if any(not c.passed for c in checks):
        sys.exit(1)


@main.command("table")
@click.option("--seed", default=0, show_default=True)
def cmd_table(seed):
    """Recompute the (eta_w=1, eta_l=0) comparison table."""
    cfg = OptimizerConfig(seed=int(seed))
    click.echo("game          resource  computed      reference  delta")
    for name, (ref_l, ref_hi, hi_resource) in REFERENCE_TABLE.items():
        game = game_by_name(name)
        ch = capacity.channel_for(game, 2, 1.0)
        omega, _ = capacity.bruteforce_classical_game_value(game)
        bound = capacity.classical_upper_bound(ch, omega, cfg)
        rows = [("L-bound", bound.value, ref_l)]
        if name == "chsh":
            exact = capacity.classical_capacity_exact(ch, cfg)
            rows.insert(0, ("L-exact", exact.value, ref_l))
            rows[1] = ("L-bound", bound.value, ref_hi)
        else:
            pt = capacity.pseudo_telepathy_capacity(
                ch, capacity.pseudo_telepathy_box(game), resource=hi_resource
            )
            rows.append((f"{hi_resource}-exact", pt.value, ref_hi))
        for label, value, ref in rows:
            click.echo(
                f"{name:<13} {label:<9} {_fmt(value):<13} {ref:<10.2f} {value - ref:+.4f}"
            )


@main.command("game-value")
@click.argument("game_name")
def cmd_game_value(game_name):
    """Brute-force classical game value and one optimal strategy."""
    try:
        game = game_by_name(game_name)
        omega, strategies = capacity.bruteforce_classical_game_value(game)
    except (ValueError, EnumerationCapExceeded) as exc:
        raise click.ClickException(str(exc))
    click.echo(f"game {game.name}: omega*_L = {_fmt(omega)}")
    for k, strat in enumerate(strategies, 1):
        click.echo(f"  player {k}: answers {list(strat)} for questions 0..{game.d - 1}")


_BOXES = {
    "pr": pr_box,
    "tsirelson": tsirelson_box,
    "magic-square": magic_square_box,
}


@main.command("box-export")
@click.argument("box_name")
@click.option("--out", required=True, type=click.Path())
def cmd_box_export(box_name, out):
    """Export a built-in box (pr, tsirelson, magic-square, mpp:<n>) as CSV."""
    if box_name in _BOXES:
        box = _BOXES[box_name]()
    elif box_name.startswith("mpp:"):
        box = mpp_box(int(box_name.split(":", 1)[1]))
    else:
        raise click.ClickException(f"unknown box {box_name!r}")
    box_to_csv(box, out)
    click.echo(f"wrote {box.name} box to {out}")


@main.command("vertex-bound")
@click.option("--game", "game_name", required=True)
@click.option("--channel-type", type=click.Choice(["1", "2"]), required=True)
@click.option("--eta", type=float, required=True)
@click.option("--vertex-file", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--resource-label", default="file", show_default=True)
def cmd_vertex_bound(game_name, channel_type, eta, vertex_file, seed, resource_label):
    """Bound the sum-capacity from a user-supplied vertex CSV."""
    try:
        game = game_by_name(game_name)
        ch = capacity.channel_for(game, int(channel_type), eta)
        result = capacity.vertex_file_bound(
            ch, vertex_file, OptimizerConfig(seed=int(seed)), resource=resource_label
        )
    except (ValueError, EnumerationCapExceeded) as exc:
        raise click.ClickException(str(exc))
    click.echo(
        f"{result.kind} ({result.resource}): {_fmt(result.value)} "
        f"via {result.argmax_encoder}"
    )


if __name__ == "__main__":
    main()
