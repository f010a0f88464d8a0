"""Operator command line.

Exit codes: 0 success, 2 usage or input error, 3 degraded run (too many
responder failures).  Every command honors --seed and runs bit-reproducibly
offline.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import numpy as np

from .core import serialize_svg
from .datasets import (
    LabeledSvgSample,
    colorize_mnist_a,
    colorize_mnist_b,
    generate_arithmetic_task,
    generate_synthetic_task,
    load_digit_corpus,
    mini_mnist,
    vectorize_digit,
)
from .errors import AuthError, SvglabError
from .evaluation import SYNTHETIC_SUITES, MiouConfig, reports_to_csv, run_benchmark
from .llm import ChatClient, EndpointConfig, LiveResponder, mock_responder
from .raster import read_raster
from .vectorize import VectorizeConfig, load_mask_set, masks_to_svg, vectorize

GENERATE_SUITES = tuple(sorted(SYNTHETIC_SUITES)) + ("cmnist-a", "cmnist-b",
                                                     "mini-mnist", "arithmetic")
EVAL_SUITES = tuple(sorted(SYNTHETIC_SUITES)) + ("synthetic-all", "mini-mnist",
                                                 "content", "referring")


def _fail(message: str, code: int = 2) -> None:
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


@click.group()
@click.version_option(package_name="svglab")
def main() -> None:
    """Raster images as LLM-legible SVG: convert, generate, evaluate, serve."""


# --- convert -----------------------------------------------------------------------

@main.command()
@click.argument("input_path", type=click.Path(path_type=Path))
@click.option("-o", "--output", type=click.Path(path_type=Path), default=None,
              help="Output SVG path (default: input with .svg suffix).")
@click.option("--mode", type=click.Choice(["binary", "color"]), default="binary")
@click.option("--invert", is_flag=True, help="Foreground is dark on light.")
@click.option("--threshold", type=float, default=127.5, show_default=True)
@click.option("--bits", type=int, default=0, show_default=True,
              help="Significant RGB bits per channel (0 = cluster by color difference).")
@click.option("--color-diff", type=float, default=35.0, show_default=True)
@click.option("--corner-angle", type=float, default=90.0, show_default=True)
@click.option("--min-patch", type=int, default=16, show_default=True)
@click.option("--max-segment", type=float, default=10.0, show_default=True)
@click.option("--simplify-tolerance", type=float, default=1.0, show_default=True)
@click.option("--masks", type=click.Path(path_type=Path), default=None,
              help="Label-map PNG or mask directory; input becomes the color source.")
@click.option("--top-k", type=int, default=20, show_default=True)
def convert(input_path, output, mode, invert, threshold, bits, color_diff,
            corner_angle, min_patch, max_segment, simplify_tolerance, masks, top_k):
    """Convert a raster image (or a mask set) to canonical SVG."""
    if not input_path.exists():
        _fail(f"no such file: {input_path}")
    try:
        if masks is not None:
            mask_set = load_mask_set(masks, input_path)
            doc = masks_to_svg(mask_set, top_k=top_k)
        else:
            img = read_raster(input_path)
            cfg = VectorizeConfig(mode=mode, binarize_threshold=threshold,
                                  color_precision_bits=bits,
                                  corner_angle_deg=corner_angle,
                                  layer_color_difference=color_diff,
                                  min_patch_px=min_patch,
                                  max_segment_px=max_segment, invert=invert)
            doc = vectorize(img, cfg, simplify_tolerance=simplify_tolerance)
    except (SvglabError, OSError) as exc:
        _fail(f"{type(exc).__name__}: {exc}")
    text = serialize_svg(doc)
    out = output or input_path.with_suffix(".svg")
    out.write_text(text)
    click.echo(f"{out}: {len(doc.elements)} elements, {len(text)} bytes")


# --- generate ----------------------------------------------------------------------

def _write_manifest(path: Path, entries: list[dict]) -> None:
    with open(path, "w") as fh:
        for entry in entries:
            fh.write(json.dumps(entry, sort_keys=True) + "\n")


@main.command()
@click.argument("suite", type=str)
@click.option("-n", "--count", type=int, default=100, show_default=True)
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("-o", "--output", type=click.Path(path_type=Path), default=None,
              help="Output directory (default: ./datasets/<suite>).")
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
def generate(suite, count, seed, output, data_dir):
    """Generate a dataset directory with a JSONL manifest."""
    if suite not in GENERATE_SUITES:
        _fail(f"unknown suite {suite!r}; choose from {', '.join(GENERATE_SUITES)}")
    out = output or Path("datasets") / suite
    out.mkdir(parents=True, exist_ok=True)
    entries: list[dict] = []

    if suite in SYNTHETIC_SUITES:
        kind = SYNTHETIC_SUITES[suite]
        for i, ex in enumerate(generate_synthetic_task(kind, count, seed=seed)):
            stem = f"{kind}-{i:04d}"
            files = {
                "query1": ex.example_pairs[0][0], "key1": ex.example_pairs[0][1],
                "query2": ex.example_pairs[1][0], "key2": ex.example_pairs[1][1],
                "test_query": ex.test_query, "ground_truth": ex.ground_truth_key,
            }
            for name, doc in files.items():
                (out / f"{stem}_{name}.svg").write_text(serialize_svg(doc))
            entries.append({
                "id": stem, "label": kind,
                "svg_path": f"{stem}_test_query.svg", "seed": seed,
                "provenance": f"synthetic:{kind}:seed={seed}:index={i}",
            })
    elif suite in ("cmnist-a", "cmnist-b"):
        samples, source = load_digit_corpus("test", data_dir)
        colorize = colorize_mnist_a if suite == "cmnist-a" else colorize_mnist_b
        cfg = VectorizeConfig(mode="color", color_precision_bits=0,
                              min_patch_px=4, corner_angle_deg=60.0)
        for i in range(count):
            img, label = samples[i % len(samples)]
            rng = np.random.default_rng((seed, i))
            colored = colorize(img, rng)
            doc = vectorize(colored, cfg)
            name = f"{suite}-{i:05d}.svg"
            (out / name).write_text(serialize_svg(doc))
            bg = colored.get(0, 0).to_hex()
            fg_mask = np.any(colored.pixels != colored.pixels[0, 0], axis=2)
            ys, xs = np.nonzero(fg_mask)
            fg = colored.get(int(xs[0]), int(ys[0])).to_hex() if len(xs) else bg
            entries.append({
                "id": name[:-4], "label": label, "svg_path": name, "seed": seed,
                "provenance": f"{source}:index={i % len(samples)}:variant={suite}",
                "bg": bg, "fg": fg,
            })
    elif suite == "mini-mnist":
        samples, source = load_digit_corpus("test", data_dir)
        for i, (img, label) in enumerate(mini_mnist(samples)[:count]):
            doc = vectorize_digit(img)
            name = f"mini-{i:03d}.svg"
            (out / name).write_text(serialize_svg(doc))
            entries.append({"id": name[:-4], "label": label, "svg_path": name,
                            "seed": seed, "provenance": f"{source}:mini[{i}]"})
    else:  # arithmetic
        for i in range(count):
            ex = generate_arithmetic_task(np.random.default_rng((seed, i)))
            name = f"arith-{i:04d}.json"
            (out / name).write_text(json.dumps({
                "pairs": [list(p) for p in ex.example_digits],
                "operation": ex.operation.describe(),
                "test_query": ex.test_query,
                "ground_truth": ex.ground_truth,
                "consistent_operations": [op.describe() for op in ex.consistent_operations],
            }, indent=1))
            entries.append({"id": name[:-5], "label": ex.ground_truth,
                            "svg_path": name, "seed": seed,
                            "provenance": f"arithmetic:seed={seed}:index={i}"})

    _write_manifest(out / "manifest.jsonl", entries)
    click.echo(f"{out}: {len(entries)} entries")


# --- eval --------------------------------------------------------------------------

def _build_responder(name: str, fixture, model: str):
    if name in ("oracle", "echo"):
        return mock_responder(name)
    if name == "scripted":
        if fixture is None:
            _fail("--responder scripted requires --fixture")
        return mock_responder("scripted", fixture)
    config = EndpointConfig(model=model)
    if not config.resolved_api_key():
        raise AuthError("live responder needs SVGLAB_API_KEY")
    return LiveResponder(ChatClient(config))


@main.command(name="eval")
@click.argument("suite", type=str)
@click.option("--responder", type=click.Choice(["live", "oracle", "echo", "scripted"]),
              default="oracle", show_default=True)
@click.option("--fixture", type=click.Path(path_type=Path), default=None)
@click.option("--model", type=str, default="gpt-4", show_default=True)
@click.option("-n", "--count", type=int, default=None,
              help="Items per suite (default: suite-specific).")
@click.option("--seed", type=int, default=0, show_default=True)
@click.option("--resolution", type=int, default=224, show_default=True)
@click.option("--icl", type=click.Choice(["i", "ii", "iii"]), default=None,
              help="In-context strategy for mini-mnist.")
@click.option("-o", "--output", type=click.Path(path_type=Path), default=None,
              help="Report JSON path.")
@click.option("--csv", "csv_path", type=click.Path(path_type=Path), default=None)
@click.option("--audit", type=click.Path(path_type=Path), default=None)
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
def eval_cmd(suite, responder, fixture, model, count, seed, resolution, icl,
             output, csv_path, audit, data_dir):
    """Run a benchmark suite and emit an EvalReport."""
    if suite not in EVAL_SUITES:
        _fail(f"unknown suite {suite!r}; choose from {', '.join(EVAL_SUITES)}")
    miou_cfg = MiouConfig(resolution=resolution)
    suites = sorted(SYNTHETIC_SUITES) if suite == "synthetic-all" else [suite]

    reports = []
    for s in suites:
        try:
            resp = _build_responder(responder, fixture, model)
        except AuthError as exc:
            _fail(f"AuthError: {exc}")
        # every raw exchange is persisted whenever a report is written
        audit_base = audit
        if audit_base is None and output is not None:
            audit_base = Path(output).with_suffix(".audit.jsonl")
        audit_path = None
        if audit_base is not None:
            audit_path = (audit_base if len(suites) == 1
                          else audit_base.with_suffix(f".{s}.jsonl"))
        try:
            report = run_benchmark(
                s, resp, n=count, seed=seed, miou_cfg=miou_cfg, icl_strategy=icl,
                audit_path=audit_path, data_dir=data_dir,
                metadata={"model": model if responder == "live" else responder,
                          "resolution": resolution},
            )
        except SvglabError as exc:
            _fail(f"{type(exc).__name__}: {exc}")
        reports.append(report)
        click.echo(f"{s}: mean={report.mean:.4f} n={len(report.scores)} "
                   f"errors={report.error_fraction:.0%}")

    if output is not None:
        if len(reports) == 1:
            Path(output).write_text(reports[0].to_json())
        else:
            Path(output).write_text(
                "[" + ",\n".join(r.to_json() for r in reports) + "]")
    if csv_path is not None:
        Path(csv_path).write_text(reports_to_csv(reports))
    if any(r.error_fraction > 0.10 for r in reports):
        sys.exit(3)


# --- export ------------------------------------------------------------------------

@main.command(name="export-finetune")
@click.option("--split", type=click.Choice(["train", "test"]), default="train",
              show_default=True)
@click.option("-o", "--output", type=click.Path(path_type=Path), required=True)
@click.option("--limit", type=int, default=None, help="Cap the sample count.")
@click.option("--data-dir", type=click.Path(path_type=Path), default=None)
def export_finetune(split, output, limit, data_dir):
    """Export the digit split as a conversation-format fine-tuning dataset."""
    from .llm import export_finetune_dataset

    try:
        samples, source = load_digit_corpus(split, data_dir)
    except (SvglabError, OSError) as exc:
        _fail(f"{type(exc).__name__}: {exc}")
    if limit is not None:
        samples = samples[:limit]
    labeled = [
        LabeledSvgSample(svg=vectorize_digit(img), label=label,
                         provenance=f"{source}:{split}[{i}]")
        for i, (img, label) in enumerate(samples)
    ]
    count = export_finetune_dataset(labeled, output)
    click.echo(f"{output}: {count} records from {source} {split} split")


# --- serve -------------------------------------------------------------------------

@main.command()
@click.option("--host", type=str, default="127.0.0.1", show_default=True)
@click.option("--port", type=int, default=8080, show_default=True)
@click.option("--responder", type=click.Choice(["rules", "echo", "scripted", "live"]),
              default="rules", show_default=True)
@click.option("--fixture", type=click.Path(path_type=Path), default=None)
@click.option("--model", type=str, default="gpt-4", show_default=True)
@click.option("--ui", type=click.Path(path_type=Path), default=None,
              help="Playground directory to serve at / (default: ./frontend if built).")
def serve(host, port, responder, fixture, model, ui):
    """Serve the playground HTTP API."""
    from .server import create_app

    resp = None
    if responder != "rules":
        try:
            resp = _build_responder(responder, fixture, model)
        except AuthError as exc:
            _fail(f"AuthError: {exc}")
    ui_dir = ui
    if ui_dir is None and (Path("frontend") / "index.html").exists():
        ui_dir = Path("frontend")
    app = create_app(responder=resp, ui_dir=str(ui_dir) if ui_dir else None)

    # uvicorn logs bind failures instead of raising; check the port up front
    import socket

    probe = socket.socket()
    try:
        probe.bind((host, port))
    except OSError as exc:
        _fail(f"cannot bind {host}:{port}: {exc}")
    finally:
        probe.close()

    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")


if __name__ == "__main__":
    main()
