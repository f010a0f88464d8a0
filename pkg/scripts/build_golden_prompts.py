"""Freeze golden prompt fixtures under tests/golden/.

The golden files pin the exact rendered bytes of every prompt builder for
fixed inputs; tests fail if a template or embedding rule drifts.
"""

from __future__ import annotations

import sys
from pathlib import Path

import numpy as np

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "src"))

from svglab.core import Color, Rect, document  # noqa: E402
from svglab.datasets import (  # noqa: E402
    digit_svg,
    generate_arithmetic_task,
    generate_synthetic_task,
    letter_svg,
)
from svglab.core import edit_elements, with_ids  # noqa: E402
from svglab.core import Recolor  # noqa: E402
from svglab.prompts import (  # noqa: E402
    build_content_prompt,
    build_icl_prompt,
    build_style_prompt,
    build_synthetic_prompt,
    build_zero_shot_prompt,
)

GOLDEN = ROOT / "tests" / "golden"


def styled(doc):
    """The fixed style transformation used by the style-prompt fixtures."""
    doc = with_ids(doc)
    return edit_elements(doc, doc.ids(), Recolor(Color(255, 0, 0)))


def icl_pool():
    return [(document(10, 10, [Rect(0, 0, 1, c + 1, fill=Color(0, 0, 0))]), c)
            for c in range(10)]


def main() -> None:
    GOLDEN.mkdir(parents=True, exist_ok=True)
    out = {}

    out["zero_shot.txt"] = build_zero_shot_prompt(digit_svg(3)).last_user_text

    pool = icl_pool()
    query = document(10, 10, [Rect(0, 0, 2, 2, fill=Color(0, 0, 0))])
    for strategy in ("i", "ii", "iii"):
        exchange = build_icl_prompt(pool, query, 7, strategy, np.random.default_rng(0))
        out[f"icl_{strategy}.txt"] = exchange.last_user_text

    ex = generate_synthetic_task("color", 1, seed=42)[0]
    out["synthetic.txt"] = build_synthetic_prompt(ex.example_pairs, ex.test_query).last_user_text

    task = generate_arithmetic_task(np.random.default_rng((7, 0)))
    out["content.txt"] = build_content_prompt(
        task.example_pairs, digit_svg(task.test_query)).last_user_text

    pairs = [(c, letter_svg(c), styled(letter_svg(c))) for c in "BRZEN"]
    out["style.txt"] = build_style_prompt(pairs, ("X", letter_svg("X"))).last_user_text

    for name, text in out.items():
        (GOLDEN / name).write_text(text)
        print(f"{name}: {len(text)} chars")


if __name__ == "__main__":
    main()
