"""Property tests: text and JSON round-trips over generated models, parser fuzzing.

Example counts follow TM_PROPERTY_EXAMPLES and TM_FUZZ_EXAMPLES so a
developer can raise the fuzz run well past the default.
"""

from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from src.config.env_config import EnvConfig
from src.dsl import export_json, import_json, parse, serialize
from src.model.errors import ParseError
from src.model.factory import random_model
from tests.conftest import CORPUS, RELAY

SEEDS = st.integers(min_value=0, max_value=2**32 - 1)
DSL_ALPHABET = 'abcmodelnstagtrfwhenis.{}[]()<>=!-:,"\\# \n0123456789_'
SAMPLES = [p.read_text(encoding="utf-8") for p in sorted(CORPUS.rglob("*.tm"))] + [RELAY]


@settings(max_examples=EnvConfig.property_examples(), deadline=None)
@given(seed=SEEDS, guard_free=st.booleans())
def test_text_round_trip_of_generated_models(seed, guard_free):
    model = random_model(seed, guard_free=guard_free)
    text = serialize(model)

    assert parse(text) == model
    assert serialize(parse(text)) == text


@settings(max_examples=EnvConfig.property_examples(), deadline=None)
@given(seed=SEEDS, guard_free=st.booleans())
def test_json_round_trip_of_generated_models(seed, guard_free):
    model = random_model(seed, guard_free=guard_free)

    assert import_json(export_json(model)) == model


def _check_parse(text: str):
    try:
        parse(text)
    except ParseError as e:
        assert e.diagnostics
        for diagnostic in e.diagnostics:
            assert diagnostic.span.within(text), f"{diagnostic.span} outside input"


@settings(max_examples=EnvConfig.fuzz_examples(), deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(text=st.text(alphabet=DSL_ALPHABET, max_size=300))
def test_parser_survives_random_text(text):
    """Any input parses or is rejected with in-bounds spans; nothing else escapes"""
    _check_parse(text)


@settings(max_examples=EnvConfig.fuzz_examples(), deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(data=st.data())
def test_parser_survives_corrupted_models(data):
    source = data.draw(st.sampled_from(SAMPLES))
    start = data.draw(st.integers(min_value=0, max_value=len(source)))
    end = data.draw(st.integers(min_value=start, max_value=min(len(source), start + 40)))
    insert = data.draw(st.text(alphabet=DSL_ALPHABET, max_size=20))

    _check_parse(source[:start] + insert + source[end:])


def test_parser_survives_unicode_and_control_characters():
    for text in ['model "é" {}', "model \"x\" {\n\tmachine m { stage é }\n}", "\x00", "model\r\n\"x\"\r\n{\r\n}\r\n"]:
        _check_parse(text)
