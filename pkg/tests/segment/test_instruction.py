import pytest

from inpaint360.errors import ParseError
from inpaint360.segment.instruction import parse_instruction


@pytest.mark.parametrize(
    "text, objects",
    [
        ("Remove the flowerpot and flowers", ("flowerpot", "flowers")),
        ("Remove the vase and the flowers.", ("vase", "flowers")),
        ("REMOVE THE Coffee Mug!", ("coffee mug",)),
        ("remove the chair and the desk and lamp", ("chair", "desk", "lamp")),
    ],
)
def test_parse_instruction(text, objects):
    parsed = parse_instruction(text)
    assert parsed.objects == objects
    assert parsed.text == text


def test_unsupported_verb_reports_position():
    with pytest.raises(ParseError) as info:
        parse_instruction("Paint the vase red")
    assert info.value.position == 0


@pytest.mark.parametrize("text, position", [("", 0), ("Remove vase", 7), ("Remove the", 10), ("Remove the and cup", 11)])
def test_malformed_instructions(text, position):
    with pytest.raises(ParseError) as info:
        parse_instruction(text)
    assert info.value.position == position
