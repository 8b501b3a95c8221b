"""Dual-memory sessions: token-budgeted short-term deque plus a symbol-keyed
long-term store, persisted as a versioned JSON state file.

Writing ``<|name|>`` in an utterance stores the whole utterance under that
symbol; reading ``<name>`` (for a known symbol) injects the stored text back
into short-term memory as system context, so definitions survive any amount
of deque eviction. Token counts use a local deterministic proxy of
ceil(utf-8 bytes / 4) against a default budget of 4096.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from . import dsl, trackdata
from .errors import OversizeItemError, SchemaError, StateVersionError

DEFAULT_BUDGET = 4096
STATE_VERSION = 1


def token_count(text: str) -> int:
    """Deterministic token proxy: ceil(byte length / 4), 0 only for empty."""
    n = len(text.encode("utf-8"))
    return (n + 3) // 4


@dataclass(frozen=True)
class MemoryItem:
    role: str  # user | assistant | system
    text: str
    tokens: int

    @staticmethod
    def of(role: str, text: str) -> "MemoryItem":
        return MemoryItem(role, text, token_count(text))


class ShortTermMemory:
    """Token-budgeted deque; total tokens never exceed the budget."""

    def __init__(self, budget: int = DEFAULT_BUDGET):
        if budget <= 0:
            raise SchemaError(f"budget must be positive, got {budget}")
        self.budget = budget
        self.items: deque[MemoryItem] = deque()

    @property
    def total_tokens(self) -> int:
        return sum(item.tokens for item in self.items)

    def _evict(self) -> list[MemoryItem]:
        evicted = []
        while self.total_tokens > self.budget:
            evicted.append(self.items.popleft())
        return evicted

    def append(self, item: MemoryItem) -> list[MemoryItem]:
        """Append at the back, evicting oldest items; returns the evicted."""
        if item.tokens > self.budget:
            raise OversizeItemError(
                f"item of {item.tokens} tokens exceeds the whole budget of {self.budget}"
            )
        self.items.append(item)
        return self._evict()

    def prepend(self, item: MemoryItem) -> list[MemoryItem]:
        """Insert at the front (oldest position); eviction applies as usual."""
        if item.tokens > self.budget:
            raise OversizeItemError(
                f"item of {item.tokens} tokens exceeds the whole budget of {self.budget}"
            )
        self.items.appendleft(item)
        return self._evict()

    def snapshot(self) -> list[dict]:
        return [{"role": i.role, "text": i.text, "tokens": i.tokens} for i in self.items]

    def __eq__(self, other):
        if not isinstance(other, ShortTermMemory):
            return NotImplemented
        return self.budget == other.budget and list(self.items) == list(other.items)


class LongTermMemory:
    """Symbol name -> stored text; writes overwrite (latest wins)."""

    def __init__(self, entries: dict | None = None):
        self.entries: dict[str, str] = dict(entries or {})

    def write(self, symbol: str, text: str) -> None:
        if not symbol:
            raise SchemaError("symbol name must be non-empty")
        self.entries[symbol] = text

    def read(self, symbol: str) -> str | None:
        return self.entries.get(symbol)

    def __contains__(self, symbol: str) -> bool:
        return symbol in self.entries

    def __eq__(self, other):
        if not isinstance(other, LongTermMemory):
            return NotImplemented
        return self.entries == other.entries


@dataclass
class SessionState:
    short: ShortTermMemory = field(default_factory=ShortTermMemory)
    long: LongTermMemory = field(default_factory=LongTermMemory)
    registry: dsl.BehaviorRegistry = field(default_factory=dsl.BehaviorRegistry)
    objects: trackdata.ObjectSet = field(default_factory=lambda: trackdata.ObjectSet({}))

    def __eq__(self, other):
        if not isinstance(other, SessionState):
            return NotImplemented
        return (
            self.short == other.short
            and self.long == other.long
            and sorted(self.registry.sources()) == sorted(other.registry.sources())
            and self.objects == other.objects
        )


@dataclass
class ProcessResult:
    state: SessionState
    resolved_context: list[str]
    warnings: list[str]
    evicted: list[MemoryItem]


def process_utterance(s: SessionState, text: str, role: str = "user") -> ProcessResult:
    """Run the memory protocol for one utterance.

    Write symbols store the full utterance in long-term memory; read symbols
    push their stored text to the front of short-term memory as system
    context; finally the utterance itself is appended. Reads of unknown
    symbols are warnings, never failures.
    """
    writes, _ = dsl.scan_symbols(text)
    for symbol in writes:
        s.long.write(symbol, text)

    _, reads = dsl.scan_symbols(text, known=s.long.entries)
    warnings = [
        f"unknown symbol <{name}> ignored"
        for name in dsl.scan_unknown_reads(text, known=s.long.entries)
    ]

    resolved = []
    evicted = []
    for symbol in reads:
        context = f'context for "{symbol}": {s.long.read(symbol)}'
        resolved.append(context)
        evicted += s.short.prepend(MemoryItem.of("system", context))
    evicted += s.short.append(MemoryItem.of(role, text))
    return ProcessResult(s, resolved, warnings, evicted)


def state_to_json(s: SessionState) -> dict:
    return {
        "version": STATE_VERSION,
        "budget": s.short.budget,
        "short": s.short.snapshot(),
        "long": dict(s.long.entries),
        "behaviors": [
            {"name": name, "source": s.registry.programs[name].source}
            for name in sorted(s.registry.programs)
        ],
        "objects": trackdata.objects_to_json(s.objects),
    }


def state_from_json(doc: dict) -> SessionState:
    version = doc.get("version")
    if version != STATE_VERSION:
        raise StateVersionError(
            f"unsupported state version {version!r}; this build reads version {STATE_VERSION}"
        )
    short = ShortTermMemory(int(doc.get("budget", DEFAULT_BUDGET)))
    for entry in doc.get("short", []):
        # recompute token counts so the invariant holds even for edited files
        short.append(MemoryItem.of(entry["role"], entry["text"]))
    long = LongTermMemory(doc.get("long", {}))
    registry = dsl.BehaviorRegistry()
    for entry in doc.get("behaviors", []):
        registry = dsl.compile_source(entry["source"], registry)
    objects = trackdata.objects_from_json(doc.get("objects", {"objects": []}))
    return SessionState(short=short, long=long, registry=registry, objects=objects)


def save_state(s: SessionState, path) -> Path:
    path = Path(path)
    path.write_text(json.dumps(state_to_json(s), indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def load_state(path) -> SessionState:
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as e:
            raise SchemaError(f"invalid state JSON: {e}") from None
    return state_from_json(doc)
