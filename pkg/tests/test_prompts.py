"""Prompt builders: golden bytes, strategy rules, slot hygiene."""

from pathlib import Path

import numpy as np
import pytest

from svglab.core import Color, Recolor, Rect, document, edit_elements, with_ids
from svglab.datasets import (
    digit_svg,
    generate_arithmetic_task,
    generate_synthetic_task,
    letter_svg,
)
from svglab.errors import InsufficientContext, WrongPairCount
from svglab.prompts import (
    ANSWER_PHRASE,
    ChatExchange,
    PromptTemplate,
    build_content_prompt,
    build_icl_prompt,
    build_style_prompt,
    build_synthetic_prompt,
    build_zero_shot_prompt,
)

GOLDEN = Path(__file__).parent / "golden"


def icl_pool():
    return [(document(10, 10, [Rect(0, 0, 1, c + 1, fill=Color(0, 0, 0))]), c)
            for c in range(10)]


QUERY = document(10, 10, [Rect(0, 0, 2, 2, fill=Color(0, 0, 0))])


def styled(doc):
    doc = with_ids(doc)
    return edit_elements(doc, doc.ids(), Recolor(Color(255, 0, 0)))


def test_zero_shot_golden():
    text = build_zero_shot_prompt(digit_svg(3)).last_user_text
    assert text == (GOLDEN / "zero_shot.txt").read_text()


def test_zero_shot_shape():
    text = build_zero_shot_prompt(digit_svg(3)).last_user_text
    assert text.startswith("What semantic category does this SVG image belong to?")
    assert text.count("<svg") == 1


@pytest.mark.parametrize("strategy", ["i", "ii", "iii"])
def test_icl_golden(strategy):
    exchange = build_icl_prompt(icl_pool(), QUERY, 7, strategy, np.random.default_rng(0))
    assert exchange.last_user_text == (GOLDEN / f"icl_{strategy}.txt").read_text()


def test_icl_strategy_i_never_query_class():
    pool = icl_pool()
    for i in range(2000):
        text = build_icl_prompt(pool, QUERY, 7, "i", np.random.default_rng(i)).last_user_text
        assert f"{ANSWER_PHRASE} 7\n" not in text


def test_icl_strategy_counts():
    pool = icl_pool()
    for strategy, expected in (("i", 1), ("ii", 3), ("iii", 10)):
        text = build_icl_prompt(pool, QUERY, 7, strategy,
                                np.random.default_rng(1)).last_user_text
        assert text.count(f"A: {ANSWER_PHRASE} ") == expected
        # final question has the bare scaffold with no label
        assert text.rstrip().endswith(ANSWER_PHRASE)


def test_icl_strategy_ii_distinct_non_query_classes():
    pool = icl_pool()
    for i in range(200):
        text = build_icl_prompt(pool, QUERY, 4, "ii", np.random.default_rng(i)).last_user_text
        labels = [int(line.rsplit(" ", 1)[1]) for line in text.splitlines()
                  if line.startswith(f"A: {ANSWER_PHRASE} ")]
        assert len(labels) == 3
        assert len(set(labels)) == 3
        assert 4 not in labels


def test_icl_insufficient_context():
    tiny = [(QUERY, 7)]
    with pytest.raises(InsufficientContext):
        build_icl_prompt(tiny, QUERY, 7, "i", np.random.default_rng(0))
    with pytest.raises(InsufficientContext):
        build_icl_prompt(icl_pool()[:5], QUERY, 1, "iii", np.random.default_rng(0))


def test_synthetic_golden():
    ex = generate_synthetic_task("color", 1, seed=42)[0]
    text = build_synthetic_prompt(ex.example_pairs, ex.test_query).last_user_text
    assert text == (GOLDEN / "synthetic.txt").read_text()
    assert "Example Query 1" in text
    assert text.endswith("Test Key:")


def test_synthetic_wrong_pair_count():
    ex = generate_synthetic_task("color", 1, seed=0)[0]
    with pytest.raises(WrongPairCount):
        build_synthetic_prompt(ex.example_pairs * 2, ex.test_query)


def test_content_golden():
    task = generate_arithmetic_task(np.random.default_rng((7, 0)))
    text = build_content_prompt(task.example_pairs, digit_svg(task.test_query)).last_user_text
    assert text == (GOLDEN / "content.txt").read_text()
    assert "Number 0:" in text and "Number 9:" in text
    assert text.count("<svg") == 15  # 10 reference digits + 2 pairs + test query


def test_style_golden():
    pairs = [(c, letter_svg(c), styled(letter_svg(c))) for c in "BRZEN"]
    text = build_style_prompt(pairs, ("X", letter_svg("X"))).last_user_text
    assert text == (GOLDEN / "style.txt").read_text()
    assert "(letter B)" in text and "(letter N)" in text
    assert "Test Query (letter X)" in text


def test_style_wrong_pair_count():
    pairs = [(c, letter_svg(c), letter_svg(c)) for c in "BRZ"]
    with pytest.raises(WrongPairCount):
        build_style_prompt(pairs, ("X", letter_svg("X")))


def test_unresolved_slots_rejected():
    t = PromptTemplate("x", "hello <NAME> and <OTHER>")
    with pytest.raises(ValueError):
        t.render({"NAME": "a"})
    assert t.render({"NAME": "a", "OTHER": "b"}) == "hello a and b"


def test_chat_exchange_role_validation():
    with pytest.raises(ValueError):
        ChatExchange(messages=(("assistant", "hi"),))
    with pytest.raises(ValueError):
        ChatExchange(messages=(("user", "a"), ("user", "b")))
    ChatExchange(messages=(("system", "s"), ("user", "a"), ("assistant", "b")))
