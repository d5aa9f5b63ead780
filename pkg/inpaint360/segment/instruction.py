"""Parser for removal instructions of the form ``Remove the <obj> {and [the] <obj>}``."""

import re

from inpaint360.errors import ParseError
from .types import Instruction

_TOKEN = re.compile(r"\S+")
_TRAILING = ".!?;,:"
SUPPORTED_VERBS = ("remove",)


def parse_instruction(text: str) -> Instruction:
    """
    Split ``text`` into ordered object names.

    Matching is case-insensitive and object names may span several words
    ("coffee mug"). ``ParseError.position`` is the character offset of the
    offending token in ``text``.
    """
    body = text.rstrip().rstrip(_TRAILING)
    tokens = [(m.group().lower(), m.start()) for m in _TOKEN.finditer(body)]
    if not tokens:
        raise ParseError("empty instruction", 0)

    verb, pos = tokens[0]
    if verb not in SUPPORTED_VERBS:
        raise ParseError(f"unsupported verb '{verb}'", pos)
    if len(tokens) < 2 or tokens[1][0] != "the":
        raise ParseError("expected 'the'", tokens[1][1] if len(tokens) > 1 else len(body))

    objects: list[str] = []
    words: list[str] = []
    expect_article = False
    for word, pos in tokens[2:]:
        if word == "and":
            if not words:
                raise ParseError("expected an object name before 'and'", pos)
            objects.append(" ".join(words))
            words = []
            expect_article = True
            continue
        if expect_article and word == "the":
            expect_article = False
            continue
        expect_article = False
        words.append(word)
    if not words:
        raise ParseError("expected an object name", len(body))
    objects.append(" ".join(words))
    return Instruction(text=text, objects=tuple(objects))
