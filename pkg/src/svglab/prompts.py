"""Prompt construction for every task the toolkit evaluates.

Templates are frozen text; builders substitute SVG code and labels into the
slots and return a ChatExchange.  Golden-file tests pin the rendered bytes,
so any edit here must update the fixtures knowingly.  SVG is always embedded
in compact (single-line) canonical form to keep prompts short.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .core import SvgDocument, serialize_compact
from .errors import InsufficientContext, WrongPairCount

_SLOT_RE = re.compile(r"<[A-Z][A-Z0-9_]*>")


@dataclass(frozen=True)
class ChatExchange:
    """Messages plus the sampling parameters they should be sent with."""

    messages: tuple[tuple[str, str], ...]
    model: str = ""
    temperature: float = 0.0
    max_tokens: int = 4096

    def __post_init__(self) -> None:
        roles = [r for r, _ in self.messages]
        if roles and roles[0] == "system":
            roles = roles[1:]
        for i, role in enumerate(roles):
            expected = "user" if i % 2 == 0 else "assistant"
            if role != expected:
                raise ValueError(f"roles must alternate user/assistant, got {roles}")

    @property
    def last_user_text(self) -> str:
        for role, text in reversed(self.messages):
            if role == "user":
                return text
        return ""


def user_exchange(text: str) -> ChatExchange:
    return ChatExchange(messages=(("user", text),))


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    body: str

    def render(self, mapping: dict[str, str]) -> str:
        out = self.body
        for slot, value in mapping.items():
            out = out.replace(f"<{slot}>", value)
        leftover = _SLOT_RE.findall(out)
        if leftover:
            raise ValueError(f"{self.template_id}: unresolved slots {leftover}")
        return out


ANSWER_PHRASE = "This SVG image represents digit"

ZERO_SHOT = PromptTemplate(
    "zero_shot",
    "What semantic category does this SVG image belong to? <SVG>",
)

ICL_INSTRUCTION = (
    "Instruction: please predict the digit number for each of the following SVG images. "
    "Please think step by step, and closely look at the key identifying image "
    "characteristics. Please just tell me the image class, no other information is needed."
)
ICL_QA = PromptTemplate(
    "icl_qa",
    "Q: What digit does this SVG image represent? <SVG>\n"
    f"A: {ANSWER_PHRASE} <LABEL>",
)
ICL_FINAL = PromptTemplate(
    "icl_final",
    "Q: What digit does this SVG image represent? <SVG>\n"
    f"A: {ANSWER_PHRASE}",
)

SYNTHETIC = PromptTemplate(
    "synthetic",
    'Please perform the following task carefully. In this task, you will be shown two '
    'examples of Scalable Vector Graphics (SVG) code pairs. Each pair consists of a query '
    'and key pair, where the query describes the SVG code of the original image, and the '
    'key describes the SVG code of the transformed image. Each will be named '
    '"Example Query #" and "Example Key #" respectively. Your first task is to figure out '
    'the common transformation in the two examples. The transformation can consist of '
    'color, shape, size, or any combination thereof. Then, given a new test query SVG code '
    '(named "Test Query"), your second task is to transform that query into the '
    'corresponding key SVG code (named "Test Key"), following the common transformation '
    'that you discovered in the two example pairs. Here are the two example query and key '
    'pairs: Example Query 1: <QUERY1>; Example Key 1: <KEY1>; Example Query 2: <QUERY2>; '
    'Example Key 2: <KEY2>; Here are the test query and key pair: Test Query: '
    '<TEST_QUERY>; Test Key:',
)

CONTENT = PromptTemplate(
    "content",
    'Here are the SVG codes for numbers 0 through 9. Number 0: <D0>; Number 1: <D1>; '
    'Number 2: <D2>; Number 3: <D3>; Number 4: <D4>; Number 5: <D5>; Number 6: <D6>; '
    'Number 7: <D7>; Number 8: <D8>; Number 9: <D9>.\n'
    'Please perform the following task carefully. In this task, you will be shown two '
    'examples of Scalable Vector Graphics (SVG) code pairs. Each pair consists of a query '
    'and key pair, where the query describes an SVG code of an integer number, and the key '
    'describes the SVG code of another integer number with an introduced mathematical '
    'operation. Each will be named "Example Query #" and "Example Key #" respectively. In '
    'addition to the example pairs, you will be shown a new test query SVG code (named '
    '"Test Query"). Your first task is to identify which number each example query, '
    'example key, and test query represents. Your second task is to figure out all the '
    'possible mathematical operations that are held for all given example pairs. The '
    'operation could be add, subtract, multiply, and divide (the subtract or multiply '
    'factor could be a fraction). Then, according to the numbers of example pairs and test '
    'query you identified, your third task is to predict the corresponding test key number '
    '(named "Test Key"), following all the mathematical operations that you discovered in '
    'the given example pairs. Finally, you need to generate the corresponding SVG code of '
    'the test key number. Here are the two example query and key pairs: Example Query 1: '
    '<QUERY1>; Example Key 1: <KEY1>; Example Query 2: <QUERY2>; Example Key 2: <KEY2>; '
    'Here are the test query and key pair: Test Query: <TEST_QUERY>; Test Key: (Note: '
    'think about four operations one by one, and the operation should be consistent for '
    'all given example pairs)',
)

STYLE = PromptTemplate(
    "style",
    'Please perform the following task carefully. In this task, you will be shown five '
    'examples of Scalable Vector Graphics (SVG) code pairs. Each pair consists of a query '
    'and key pair (both are English letter), where the query describes the SVG code of the '
    'original image, and the key describes the SVG code of the transformed image. Each '
    'will be named "Example Query #" and "Example Key #" respectively. Your first task is '
    'to figure out the common transformation in the five examples. The transformation can '
    'consist of color, shape, size, style, font, and background changes, or any '
    'combination thereof. Even though you cannot see the images, and only their SVG codes, '
    'you need to discover the transformations that are happening at the image level and '
    'not just at the code level. Be detailed, and try to discover every change, and the '
    'most important change is that the paths in the SVG code between each query and key is '
    'different due to the common transformation but the shapes of the letters that query '
    'and key are representing remain the same. Then, given a new test query SVG code '
    '(named "Test Query"), your second task is to transform that query into the '
    'corresponding key SVG code (named "Test Key"), following the common transformation '
    'that you discovered in the five example pairs. To help you better understand the '
    'transformation, I will also inform you of what letter each query and key represent. '
    'You need to find the shape of each query and key by analyzing their path. Here are '
    'the five example query and key pairs: Example Query 1 (letter <L1>): <QUERY1>; '
    'Example Key 1 (letter <L1>): <KEY1>; Example Query 2 (letter <L2>): <QUERY2>; '
    'Example Key 2 (letter <L2>): <KEY2>; Example Query 3 (letter <L3>): <QUERY3>; '
    'Example Key 3 (letter <L3>): <KEY3>; Example Query 4 (letter <L4>): <QUERY4>; '
    'Example Key 4 (letter <L4>): <KEY4>; Example Query 5 (letter <L5>): <QUERY5>; '
    'Example Key 5 (letter <L5>): <KEY5>; Here is the test query and key pair: Test Query '
    '(letter <TEST_LETTER>): <TEST_QUERY>; Test Key:',
)

FINETUNE_HUMAN = PromptTemplate(
    "finetune_human",
    "Which digit does the following SVG reflect? <SVG>",
)

REFERRING = PromptTemplate(
    "referring",
    'You will be shown an SVG image. Each element carries an id attribute. '
    '<INSTRUCTION> Answer with the matching element ids only, separated by commas. '
    'SVG: <SVG>',
)


def svg_slot(doc: SvgDocument) -> str:
    return serialize_compact(doc)


def build_zero_shot_prompt(svg: SvgDocument) -> ChatExchange:
    return user_exchange(ZERO_SHOT.render({"SVG": svg_slot(svg)}))


def build_icl_prompt(pool: Sequence[tuple[SvgDocument, int]],
                     query: SvgDocument, query_label: int, strategy: str,
                     rng: np.random.Generator) -> ChatExchange:
    """In-context classification prompt.

    Strategies: "i" picks one exemplar from one non-query class, "ii" one
    exemplar from each of three distinct non-query classes, "iii" one
    exemplar from every class.  Exemplars appear in ascending class order.
    """
    if strategy not in ("i", "ii", "iii"):
        raise ValueError(f"unknown strategy {strategy!r}")
    by_class: dict[int, list[SvgDocument]] = {}
    for doc, label in pool:
        by_class.setdefault(label, []).append(doc)

    non_query = sorted(c for c in by_class if c != query_label)
    if strategy == "i":
        if not non_query:
            raise InsufficientContext("need at least one non-query class")
        classes = [non_query[int(rng.integers(0, len(non_query)))]]
    elif strategy == "ii":
        if len(non_query) < 3:
            raise InsufficientContext("need three non-query classes")
        picks = rng.choice(len(non_query), size=3, replace=False)
        classes = sorted(non_query[int(i)] for i in picks)
    else:
        classes = sorted(by_class)
        if len(classes) < 10:
            raise InsufficientContext("need an exemplar for every class")

    blocks = [ICL_INSTRUCTION]
    for cls in classes:
        docs = by_class[cls]
        doc = docs[int(rng.integers(0, len(docs)))]
        blocks.append(ICL_QA.render({"SVG": svg_slot(doc), "LABEL": str(cls)}))
    blocks.append(ICL_FINAL.render({"SVG": svg_slot(query)}))
    return user_exchange("\n".join(blocks))


def build_synthetic_prompt(pairs: Sequence[tuple[SvgDocument, SvgDocument]],
                           test_query: SvgDocument) -> ChatExchange:
    if len(pairs) != 2:
        raise WrongPairCount(f"synthetic prompt needs 2 pairs, got {len(pairs)}")
    return user_exchange(SYNTHETIC.render({
        "QUERY1": svg_slot(pairs[0][0]), "KEY1": svg_slot(pairs[0][1]),
        "QUERY2": svg_slot(pairs[1][0]), "KEY2": svg_slot(pairs[1][1]),
        "TEST_QUERY": svg_slot(test_query),
    }))


def build_content_prompt(pairs: Sequence[tuple[SvgDocument, SvgDocument]],
                         test_query: SvgDocument,
                         reference_digits: Optional[Sequence[SvgDocument]] = None
                         ) -> ChatExchange:
    """Arithmetic extrapolation prompt, prefixed by the digit reference codes."""
    if len(pairs) != 2:
        raise WrongPairCount(f"content prompt needs 2 pairs, got {len(pairs)}")
    if reference_digits is None:
        from .datasets import digit_svg

        reference_digits = [digit_svg(d) for d in range(10)]
    if len(reference_digits) != 10:
        raise WrongPairCount("need reference SVGs for all ten digits")
    mapping = {f"D{i}": svg_slot(doc) for i, doc in enumerate(reference_digits)}
    mapping.update({
        "QUERY1": svg_slot(pairs[0][0]), "KEY1": svg_slot(pairs[0][1]),
        "QUERY2": svg_slot(pairs[1][0]), "KEY2": svg_slot(pairs[1][1]),
        "TEST_QUERY": svg_slot(test_query),
    })
    return user_exchange(CONTENT.render(mapping))


def build_style_prompt(pairs: Sequence[tuple[str, SvgDocument, SvgDocument]],
                       test: tuple[str, SvgDocument]) -> ChatExchange:
    """Style extrapolation prompt over five (letter, query, key) examples."""
    if len(pairs) != 5:
        raise WrongPairCount(f"style prompt needs 5 pairs, got {len(pairs)}")
    mapping: dict[str, str] = {"TEST_LETTER": test[0], "TEST_QUERY": svg_slot(test[1])}
    for i, (letter, query, key) in enumerate(pairs, start=1):
        mapping[f"L{i}"] = letter
        mapping[f"QUERY{i}"] = svg_slot(query)
        mapping[f"KEY{i}"] = svg_slot(key)
    return user_exchange(STYLE.render(mapping))


def build_referring_prompt(svg: SvgDocument, instruction: str) -> ChatExchange:
    return user_exchange(REFERRING.render({"INSTRUCTION": instruction,
                                           "SVG": svg_slot(svg)}))


def finetune_human_turn(svg: SvgDocument) -> str:
    return FINETUNE_HUMAN.render({"SVG": svg_slot(svg)})
