"""Pluggable program generator, the self-correction loop, and the
rephraser/explainer adapter slots.

Generated artifacts are always ethoscript source, never host-language code:
the compiler's grammar and type checks are the sandbox. A generator backend
is anything with generate(request) -> GeneratorResponse; the shipped
ScriptedGenerator replays a fixed list of responses for tests and demos.

The retry loop executes a generated program and, on a positioned error,
feeds the failing source, the error and a rendered diagnosis back into the
request history, then asks again, up to max_retries (default 3) retries
after the first attempt. A source that already failed is never executed a
second time.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Protocol

from .errors import EthoError, EthoSyntaxError, TransportError, UnknownNameError
from .session import DEFAULT_BUDGET, MemoryItem

logger = logging.getLogger(__name__)

DEFAULT_MAX_RETRIES = 3


@dataclass(frozen=True)
class GeneratorRequest:
    system_prompt: str
    history: tuple = ()
    retrieved_docs: tuple = ()
    budget: int = DEFAULT_BUDGET

    def extended(self, *items: MemoryItem) -> "GeneratorRequest":
        """New request with items appended; oldest history drops past budget."""
        history = list(self.history) + list(items)
        while history and sum(i.tokens for i in history) > self.budget:
            history.pop(0)
        return GeneratorRequest(self.system_prompt, tuple(history), self.retrieved_docs, self.budget)


@dataclass(frozen=True)
class GeneratorResponse:
    program_source: str | None = None
    refusal: str | None = None

    def __post_init__(self):
        if (self.program_source is None) == (self.refusal is None):
            raise EthoError("a generator response carries exactly one of program or refusal")


class Generator(Protocol):
    def generate(self, request: GeneratorRequest) -> GeneratorResponse: ...


class ScriptedGenerator:
    """Replays a fixed sequence of responses; raises TransportError when
    asked for more than it has."""

    def __init__(self, responses):
        self.responses = [
            r if isinstance(r, GeneratorResponse) else GeneratorResponse(program_source=r)
            for r in responses
        ]
        self.calls = 0
        self.requests: list[GeneratorRequest] = []

    def generate(self, request: GeneratorRequest) -> GeneratorResponse:
        self.requests.append(request)
        if self.calls >= len(self.responses):
            raise TransportError("scripted generator exhausted")
        response = self.responses[self.calls]
        self.calls += 1
        return response


@dataclass(frozen=True)
class Attempt:
    program_source: str
    error: str | None  # None means the attempt succeeded
    diagnosis: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass
class CorrectionTrace:
    attempts: list = field(default_factory=list)
    max_retries: int = DEFAULT_MAX_RETRIES
    refusal: str | None = None

    @property
    def succeeded(self) -> bool:
        return bool(self.attempts) and self.attempts[-1].ok


@dataclass(frozen=True)
class CorrectionOutcome:
    result: object | None
    trace: CorrectionTrace

    @property
    def ok(self) -> bool:
        return self.trace.succeeded


def run_with_self_correction(
    generator: Generator,
    request: GeneratorRequest,
    executor: Callable[[str], object],
    *,
    max_retries: int = DEFAULT_MAX_RETRIES,
    user_query: str = "",
    explainer: Callable[[str, str, Exception], str] | None = None,
) -> CorrectionOutcome:
    """Generate -> execute -> on error feed the diagnosis back and retry.

    Makes at most max_retries + 1 generator calls; returns the first
    successful result, or a failure outcome whose trace holds every attempt.
    """
    explain = explainer or explain_error
    trace = CorrectionTrace(max_retries=max_retries)
    failed: dict[str, str] = {}
    for _ in range(max_retries + 1):
        response = generator.generate(request)
        if response.refusal is not None:
            trace.refusal = response.refusal
            return CorrectionOutcome(None, trace)
        source = response.program_source
        if source in failed:
            error_text = failed[source]
            diagnosis = f"this program already failed with: {error_text}"
            trace.attempts.append(Attempt(source, error_text, diagnosis))
        else:
            try:
                result = executor(source)
                trace.attempts.append(Attempt(source, None))
                return CorrectionOutcome(result, trace)
            except EthoError as e:
                error_text = str(e)
                failed[source] = error_text
                diagnosis = explain(user_query, source, e)
                trace.attempts.append(Attempt(source, error_text, diagnosis))
        request = request.extended(
            MemoryItem.of("assistant", source),
            MemoryItem.of("system", f"execution failed: {error_text}\n{diagnosis}"),
        )
    return CorrectionOutcome(None, trace)


def explain_error(user_query: str, program_source: str, error: Exception) -> str:
    """Deterministic template turning a positioned error into plain language."""
    lines = []
    if user_query:
        lines.append(f"Your request: {user_query}")
    lines.append(f"The generated program could not run: {error}")
    if isinstance(error, EthoSyntaxError):
        src_lines = program_source.splitlines()
        if 0 < error.line <= len(src_lines):
            lines.append(f"Failing line {error.line}: {src_lines[error.line - 1].strip()}")
        if error.expected:
            lines.append("Expected here: " + ", ".join(error.expected))
    elif isinstance(error, UnknownNameError) and error.known:
        lines.append(
            f"Supported {error.kind}s are: " + ", ".join(error.known)
        )
        suggestion = _closest(error.name, error.known)
        if suggestion:
            lines.append(f"Did you mean {suggestion!r}?")
    return "\n".join(lines)


def _closest(name: str, candidates) -> str | None:
    import difflib

    matches = difflib.get_close_matches(name, list(candidates), n=1, cutoff=0.5)
    return matches[0] if matches else None


def rephrase(text: str, backend: Callable[[str], str] | None = None) -> str:
    """Adapter slot for a paraphrasing backend; identity by default.

    A failing backend falls back to identity with a logged warning, so the
    pipeline never dies on rephrasing.
    """
    if backend is None:
        return text
    try:
        return backend(text)
    except Exception as e:  # backend quality is out of our hands
        logger.warning("rephraser backend failed (%s); passing text through", e)
        return text


class ScriptedRephraser:
    """Fixed mapping backend, for tests mirroring recorded rephrasings."""

    def __init__(self, mapping: dict):
        self.mapping = dict(mapping)

    def __call__(self, text: str) -> str:
        return self.mapping.get(text, text)
