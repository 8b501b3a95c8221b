"""Generator interface, self-correction loop, explainer, rephraser."""

from __future__ import annotations

import logging

import pytest

from etho import dsl
from etho.codegen import (
    GeneratorRequest,
    GeneratorResponse,
    ScriptedGenerator,
    ScriptedRephraser,
    explain_error,
    rephrase,
    run_with_self_correction,
)
from etho.errors import EthoError, EthoSyntaxError, TransportError, UnknownNameError

from conftest import make_dataset, rigid_track, straight_centers

GOOD = "define prog as state(speed > 1)"
BAD_SYNTAX = "define prog as and"
BAD_NAME = "define prog as state(speed > 1) and missing_thing"


def make_executor():
    d = make_dataset({"m0": rigid_track(straight_centers(20))})

    def executor(source: str):
        registry = dsl.compile_source(source)
        name = dsl.parse(source)[0].name
        return registry.run(name, d, None)

    return executor


def run(responses, max_retries=3):
    gen = ScriptedGenerator(responses)
    outcome = run_with_self_correction(
        gen, GeneratorRequest("sys"), make_executor(), max_retries=max_retries, user_query="q"
    )
    return outcome, gen


def test_first_try_success():
    outcome, gen = run([GOOD])
    assert outcome.ok
    assert len(outcome.trace.attempts) == 1
    assert gen.calls == 1
    assert outcome.result.entries  # an EventDict came back


def test_success_after_two_failures():
    outcome, gen = run([BAD_SYNTAX, BAD_NAME, GOOD])
    assert outcome.ok
    assert [a.ok for a in outcome.trace.attempts] == [False, False, True]
    # failures entered the request history for the following call
    assert len(gen.requests[2].history) == 4


def test_hard_failure_after_four_attempts():
    outcome, gen = run([BAD_SYNTAX, BAD_SYNTAX + " ", BAD_NAME, BAD_NAME + " "])
    assert not outcome.ok
    assert len(outcome.trace.attempts) == 4  # 1 + 3 retries
    assert gen.calls == 4


def test_attempts_before_success_all_failed():
    for script in ([GOOD], [BAD_SYNTAX, GOOD], [BAD_SYNTAX, BAD_NAME, GOOD],
                   [BAD_SYNTAX, BAD_NAME, BAD_SYNTAX + " ", GOOD]):
        outcome, _ = run(script)
        assert outcome.ok
        *before, last = outcome.trace.attempts
        assert last.ok
        assert all(not a.ok for a in before)


def test_duplicate_source_not_reexecuted():
    executed = []
    real = make_executor()

    def counting_executor(source):
        executed.append(source)
        return real(source)

    gen = ScriptedGenerator([BAD_SYNTAX, BAD_SYNTAX, BAD_SYNTAX, GOOD])
    outcome = run_with_self_correction(
        gen, GeneratorRequest("sys"), counting_executor, user_query="q"
    )
    assert outcome.ok
    assert executed.count(BAD_SYNTAX) == 1  # repeats short-circuit
    assert len(outcome.trace.attempts) == 4


def test_refusal_stops_loop():
    outcome, gen = run([GeneratorResponse(refusal="cannot express that")])
    assert not outcome.ok
    assert outcome.trace.refusal == "cannot express that"
    assert gen.calls == 1


def test_transport_error_propagates():
    gen = ScriptedGenerator([])
    with pytest.raises(TransportError):
        run_with_self_correction(gen, GeneratorRequest("sys"), make_executor())


def test_response_exactly_one_field():
    with pytest.raises(EthoError):
        GeneratorResponse()
    with pytest.raises(EthoError):
        GeneratorResponse(program_source="x", refusal="y")


def test_explain_unknown_bodypart_lists_supported():
    err = UnknownNameError("bodypart", "center", ("nose", "neck", "mouse_center", "tail_base"))
    text = explain_error("plot the center", "define t as ...", err)
    assert "Supported bodyparts are: nose, neck, mouse_center, tail_base" in text
    assert "mouse_center" in text
    assert "Did you mean 'mouse_center'?" in text


def test_explain_syntax_error_quotes_position():
    try:
        dsl.parse(BAD_SYNTAX)
    except EthoSyntaxError as err:
        text = explain_error("do a thing", BAD_SYNTAX, err)
    assert "1:16" in text
    assert "Expected here:" in text
    assert BAD_SYNTAX.strip() in text


def test_explain_unknown_object_lists_names():
    err = UnknownNameError("object", "arm", ("closed arm", "open arm"))
    text = explain_error("", "src", err)
    assert "closed arm, open arm" in text


def test_rephrase_identity_default():
    assert rephrase("Count head dips") == "Count head dips"


def test_rephrase_scripted_mapping():
    backend = ScriptedRephraser(
        {
            "At what point does the animal exceed a speed of 8?":
                "Give me events where the animal exceeds a speed of 8.",
        }
    )
    assert rephrase("At what point does the animal exceed a speed of 8?", backend) == (
        "Give me events where the animal exceeds a speed of 8."
    )
    assert rephrase("unmapped text", backend) == "unmapped text"


def test_rephrase_failing_backend_falls_back(caplog):
    def broken(text):
        raise RuntimeError("backend down")

    with caplog.at_level(logging.WARNING):
        assert rephrase("hello", broken) == "hello"
    assert any("rephraser backend failed" in r.message for r in caplog.records)


def test_deterministic_pipeline_with_mock():
    results = []
    for _ in range(2):
        gen = ScriptedGenerator([BAD_NAME, GOOD])
        outcome = run_with_self_correction(
            gen, GeneratorRequest("sys"), make_executor(), user_query="q"
        )
        results.append(
            (
                [(a.program_source, a.error) for a in outcome.trace.attempts],
                sorted(outcome.result.entries),
            )
        )
    assert results[0] == results[1]
