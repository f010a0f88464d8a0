"""Metrics and the benchmark harness.

Color-aware mIOU takes its class set from the ground-truth raster (background
excluded); a class the prediction never paints scores 0, which makes the
metric deliberately asymmetric in (pred, gt).  The harness builds prompts,
dispatches them to any responder, extracts answers, and emits an EvalReport.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass
from pathlib import Path as FsPath
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .core import WHITE, Color, SvgDocument, serialize_compact, with_ids
from .datasets import (
    TASK_KINDS,
    digit_svg,
    generate_arithmetic_task,
    generate_synthetic_task,
    load_digit_corpus,
    make_shape,
    mini_mnist,
    vectorize_digit,
)
from .errors import LengthMismatch, UnknownSuite
from .llm import OracleResponder, Responder, extract_digit, extract_svg
from .prompts import (
    ANSWER_PHRASE,
    ChatExchange,
    build_content_prompt,
    build_icl_prompt,
    build_referring_prompt,
    build_synthetic_prompt,
    build_zero_shot_prompt,
)
from .raster import RasterImage, rasterize

RasterLike = Union[SvgDocument, RasterImage]


@dataclass(frozen=True)
class MiouConfig:
    resolution: int = 224
    background: Color = WHITE
    color_matching: str = "snap"
    max_rgb_distance: float = 60.0

    def __post_init__(self) -> None:
        if self.resolution < 16:
            raise ValueError("resolution must be >= 16")
        if self.color_matching not in ("exact", "snap"):
            raise ValueError("color_matching must be exact or snap")

    def snapshot(self) -> dict:
        return {
            "resolution": self.resolution,
            "background": self.background.to_hex(),
            "color_matching": self.color_matching,
            "max_rgb_distance": self.max_rgb_distance,
        }


def _as_raster(value: RasterLike, cfg: MiouConfig) -> np.ndarray:
    if isinstance(value, SvgDocument):
        value = rasterize(value, cfg.resolution, cfg.resolution, background=cfg.background)
    return value.pixels


def _assign_classes(pixels: np.ndarray, classes: np.ndarray, cfg: MiouConfig) -> np.ndarray:
    """Per-pixel class index into `classes`, or -1 for background."""
    flat = pixels.reshape(-1, 3).astype(np.int64)
    if cfg.color_matching == "exact":
        assigned = np.full(len(flat), -1, dtype=np.int64)
        for ci, color in enumerate(classes):
            assigned[np.all(flat == color, axis=1)] = ci
        return assigned
    d2 = np.sum((flat[:, None, :] - classes[None, :, :]) ** 2, axis=2)
    nearest = np.argmin(d2, axis=1)
    best = d2[np.arange(len(flat)), nearest]
    assigned = np.where(best <= cfg.max_rgb_distance ** 2, nearest, -1)
    # background color itself is never a class
    bg = np.all(flat == np.asarray(cfg.background.as_tuple()), axis=1)
    assigned[bg] = -1
    return assigned


def color_aware_miou(pred: RasterLike, gt: RasterLike,
                     cfg: MiouConfig = MiouConfig()) -> float:
    """Mean over ground-truth color classes of per-class pixel IOU."""
    gt_pixels = _as_raster(gt, cfg)
    pred_pixels = _as_raster(pred, cfg)
    bg = np.asarray(cfg.background.as_tuple(), dtype=np.int64)
    flat_gt = gt_pixels.reshape(-1, 3).astype(np.int64)
    classes = np.unique(flat_gt[~np.all(flat_gt == bg, axis=1)], axis=0)
    if len(classes) == 0:
        pred_flat = pred_pixels.reshape(-1, 3).astype(np.int64)
        return 1.0 if np.all(pred_flat == bg) else 0.0

    gt_assigned = _assign_classes(gt_pixels, classes, cfg)
    pred_assigned = _assign_classes(pred_pixels, classes, cfg)
    ious = []
    for ci in range(len(classes)):
        gt_c = gt_assigned == ci
        pred_c = pred_assigned == ci
        union = int(np.logical_or(gt_c, pred_c).sum())
        inter = int(np.logical_and(gt_c, pred_c).sum())
        ious.append(inter / union if union else 0.0)
    return float(np.mean(ious))


def classification_accuracy(predictions: Sequence[Optional[int]],
                            ground_truths: Sequence[int]) -> float:
    """Fraction exactly equal; abstains (None) count as wrong."""
    if len(predictions) != len(ground_truths):
        raise LengthMismatch(f"{len(predictions)} predictions vs {len(ground_truths)} labels")
    if not predictions:
        raise LengthMismatch("empty prediction list")
    hits = sum(1 for p, g in zip(predictions, ground_truths) if p is not None and p == g)
    return hits / len(predictions)


# --- reports --------------------------------------------------------------------

@dataclass(frozen=True)
class ItemScore:
    item_id: str
    score: float
    answer: Optional[str] = None
    error: Optional[str] = None


@dataclass(frozen=True)
class EvalReport:
    task: str
    scores: tuple[ItemScore, ...]
    mean: float
    config: dict
    metadata: dict

    def __post_init__(self) -> None:
        if self.scores:
            expected = float(np.mean([s.score for s in self.scores]))
            if abs(expected - self.mean) > 1e-12:
                raise ValueError("mean must equal the arithmetic mean of scores")

    def to_json(self) -> str:
        return json.dumps({
            "task": self.task,
            "mean": self.mean,
            "scores": [
                {"id": s.item_id, "score": s.score, "answer": s.answer, "error": s.error}
                for s in self.scores
            ],
            "config": self.config,
            "metadata": self.metadata,
        }, indent=1, sort_keys=True)

    @property
    def error_fraction(self) -> float:
        if not self.scores:
            return 0.0
        return sum(1 for s in self.scores if s.error) / len(self.scores)


def reports_to_csv(reports: Sequence[EvalReport]) -> str:
    """One row of task means, in report order (Table-style layout)."""
    header = ",".join(["method"] + [r.task for r in reports])
    row = ",".join(["svglab"] + [f"{r.mean:.4f}" for r in reports])
    return header + "\n" + row + "\n"


# --- benchmark harness -------------------------------------------------------------

@dataclass
class BenchmarkItem:
    item_id: str
    exchange: ChatExchange
    oracle_answer: str
    score: Callable[[str], tuple[float, Optional[str]]]


SYNTHETIC_SUITES = {f"synthetic-{kind.replace('_', '-')}": kind for kind in TASK_KINDS}

REFERRING_COLORS = ("red", "green", "blue", "yellow")
REFERRING_KINDS = ("circle", "square", "triangle")


def _mnist_items(n: Optional[int], seed: int, strategy: Optional[str],
                 data_dir=None) -> tuple[list[BenchmarkItem], dict]:
    test, source = load_digit_corpus("test", data_dir)
    queries = mini_mnist(test)
    if n is not None:
        queries = queries[:n]
    samples = [(vectorize_digit(img), label) for img, label in queries]
    pool = None
    if strategy is not None:
        train, _ = load_digit_corpus("train", data_dir)
        pool = [(vectorize_digit(img), label) for img, label in mini_mnist(train)]

    items = []
    for i, (doc, label) in enumerate(samples):
        if strategy is None:
            exchange = build_zero_shot_prompt(doc)
        else:
            rng = np.random.default_rng((seed, i))
            exchange = build_icl_prompt(pool, doc, label, strategy, rng)

        def score(text: str, want=label) -> tuple[float, Optional[str]]:
            got = extract_digit(text)
            return (1.0 if got == want else 0.0,
                    None if got is None else str(got))

        items.append(BenchmarkItem(
            item_id=f"digit-{i:03d}",
            exchange=exchange,
            oracle_answer=f"{ANSWER_PHRASE} {label}",
            score=score,
        ))
    meta = {"corpus": source, "n": len(items), "strategy": strategy or "zero-shot"}
    return items, meta


def _svg_answer_scorer(gt_doc: SvgDocument, miou_cfg: MiouConfig):
    # score against the canonical (serialized-and-reparsed) ground truth: the
    # artifact of record is the canonical text, and this keeps a byte-perfect
    # answer at exactly 1.0
    from .parser import parse_svg

    gt_canonical = parse_svg(serialize_compact(gt_doc), strict=True)

    def score(text: str) -> tuple[float, Optional[str]]:
        doc = extract_svg(text)
        if doc is None:
            return 0.0, None
        return color_aware_miou(doc, gt_canonical, miou_cfg), serialize_compact(doc)

    return score


def _synthetic_items(kind: str, n: Optional[int], seed: int,
                     miou_cfg: MiouConfig) -> tuple[list[BenchmarkItem], dict]:
    examples = generate_synthetic_task(kind, n or 100, seed=seed)
    items = []
    for i, ex in enumerate(examples):
        items.append(BenchmarkItem(
            item_id=f"{kind}-{i:03d}",
            exchange=build_synthetic_prompt(ex.example_pairs, ex.test_query),
            oracle_answer=f"Test Key: {serialize_compact(ex.ground_truth_key)}",
            score=_svg_answer_scorer(ex.ground_truth_key, miou_cfg),
        ))
    return items, {"kind": kind, "n": len(items)}


def _content_items(n: Optional[int], seed: int,
                   miou_cfg: MiouConfig) -> tuple[list[BenchmarkItem], dict]:
    items = []
    for i in range(n or 20):
        ex = generate_arithmetic_task(np.random.default_rng((seed, i)))
        gt_doc = digit_svg(ex.ground_truth)
        items.append(BenchmarkItem(
            item_id=f"content-{i:03d}",
            exchange=build_content_prompt(ex.example_pairs, digit_svg(ex.test_query)),
            oracle_answer=f"Test Key: {serialize_compact(gt_doc)}",
            score=_svg_answer_scorer(gt_doc, miou_cfg),
        ))
    return items, {"n": len(items)}


def _referring_items(n: Optional[int], seed: int) -> tuple[list[BenchmarkItem], dict]:
    from .core import NAMED_COLORS, document

    items = []
    for i in range(n or 20):
        rng = np.random.default_rng((seed, i))
        count = int(rng.integers(2, 5))
        elements = []
        attrs = []
        for j in range(count):
            color_name = REFERRING_COLORS[int(rng.integers(0, len(REFERRING_COLORS)))]
            kind = REFERRING_KINDS[int(rng.integers(0, len(REFERRING_KINDS)))]
            cx = 15.0 + 70.0 * (j + 0.5) / count
            cy = float(rng.integers(25, 76))
            el = make_shape(kind, Color(*NAMED_COLORS[color_name]), 10.0, (cx, cy))
            elements.append(el)
            attrs.append((color_name, kind))
        doc = with_ids(document(100, 100, elements))
        target_color, target_kind = attrs[int(rng.integers(0, count))]
        gt_ids = [el.id for el, (cn, kn) in zip(doc.elements, attrs)
                  if cn == target_color and kn == target_kind]
        instruction = f"Select every {target_color} {target_kind}."

        def score(text: str, want=frozenset(gt_ids), doc_ids=frozenset(doc.ids())
                  ) -> tuple[float, Optional[str]]:
            tokens = set(re.findall(r"[A-Za-z_][\w-]*", text)) & doc_ids
            union = tokens | want
            if not union:
                return 1.0, ""
            return len(tokens & want) / len(union), ",".join(sorted(tokens))

        items.append(BenchmarkItem(
            item_id=f"referring-{i:03d}",
            exchange=build_referring_prompt(doc, instruction),
            oracle_answer=", ".join(gt_ids),
            score=score,
        ))
    return items, {"n": len(items)}


def build_suite(suite: str, *, n: Optional[int] = None, seed: int = 0,
                miou_cfg: MiouConfig = MiouConfig(),
                icl_strategy: Optional[str] = None,
                data_dir=None) -> tuple[list[BenchmarkItem], dict]:
    if suite == "mini-mnist":
        return _mnist_items(n, seed, icl_strategy, data_dir)
    if suite in SYNTHETIC_SUITES:
        return _synthetic_items(SYNTHETIC_SUITES[suite], n, seed, miou_cfg)
    if suite == "content":
        return _content_items(n, seed, miou_cfg)
    if suite == "referring":
        return _referring_items(n, seed)
    raise UnknownSuite(suite)


def run_benchmark(suite: str, responder: Responder, *,
                  n: Optional[int] = None, seed: int = 0,
                  miou_cfg: MiouConfig = MiouConfig(),
                  icl_strategy: Optional[str] = None,
                  audit_path: Optional[Union[str, FsPath]] = None,
                  metadata: Optional[dict] = None,
                  data_dir=None) -> EvalReport:
    """Build the suite, dispatch every prompt, score, and assemble the report.

    Responder failures score 0 and are flagged on the item; the report is
    deterministic given (suite, seed, responder behavior).
    """
    items, suite_meta = build_suite(suite, n=n, seed=seed, miou_cfg=miou_cfg,
                                    icl_strategy=icl_strategy, data_dir=data_dir)
    if isinstance(responder, OracleResponder):
        responder.bind([item.oracle_answer for item in items])

    audit_fh = open(audit_path, "w") if audit_path else None
    scores = []
    try:
        for item in items:
            error = None
            answer = None
            try:
                reply = responder(item.exchange)
                value, answer = item.score(reply)
            except Exception as exc:
                reply = None
                value = 0.0
                error = f"{type(exc).__name__}: {exc}"
            scores.append(ItemScore(item_id=item.item_id, score=value,
                                    answer=answer, error=error))
            if audit_fh:
                audit_fh.write(json.dumps({
                    "id": item.item_id,
                    "prompt": item.exchange.last_user_text,
                    "response": reply,
                    "score": value,
                    "error": error,
                }, sort_keys=True) + "\n")
    finally:
        if audit_fh:
            audit_fh.close()

    meta = dict(suite_meta)
    meta["suite"] = suite
    meta["seed"] = seed
    meta["responder"] = getattr(responder, "name", type(responder).__name__)
    if metadata:
        meta.update(metadata)
    return EvalReport(
        task=suite,
        scores=tuple(scores),
        mean=float(np.mean([s.score for s in scores])) if scores else 0.0,
        config=miou_cfg.snapshot() | {"n": len(items), "seed": seed},
        metadata=meta,
    )
