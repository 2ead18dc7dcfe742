"""Load Twitter-conversation directory trees into timestamp-only records.

The on-disk layout is::

    <root>/<event>/<rumours|non-rumours>/<conversation-id>/source-tweets/<id>.json
    <root>/<event>/<rumours|non-rumours>/<conversation-id>/reactions/<id>.json

Every JSON file is a tweet object whose ``created_at`` field holds a
Twitter v1 timestamp string.  Only creation timestamps and the
rumour/non-rumour branch are extracted; tweet text and user data are ignored.
"""

from __future__ import annotations

import calendar
import json
import re
import time
from dataclasses import dataclass, field
from pathlib import Path

from .errors import DataError

# The seven events a full nine-event tree retains by default.  Prince Toronto
# and Ebola Essien are excluded because their class proportions are degenerate
# (Ebola Essien has zero non-rumours); pass an explicit event list to load
# them anyway.
DEFAULT_EVENTS = (
    "charliehebdo",
    "ferguson",
    "germanwings-crash",
    "gurlitt",
    "ottawashooting",
    "putinmissing",
    "sydneysiege",
)
EXCLUDED_EVENTS = ("ebola-essien", "prince-toronto")

_DOW = ("Mon", "Tue", "Wed", "Thu", "Fri", "Sat", "Sun")
_MONTHS = ("Jan", "Feb", "Mar", "Apr", "May", "Jun",
           "Jul", "Aug", "Sep", "Oct", "Nov", "Dec")
_MONTH_NUM = {name: i + 1 for i, name in enumerate(_MONTHS)}

_TIMESTAMP_RE = re.compile(
    r"^(?P<dow>\S+) (?P<mon>\S+) (?P<day>\d{2}) "
    r"(?P<hh>\d{2}):(?P<mm>\d{2}):(?P<ss>\d{2}) "
    r"(?P<sign>[+-])(?P<tzh>\d{2})(?P<tzm>\d{2}) (?P<year>\d{4})$"
)


class TimestampParseError(DataError):
    """Raised when a ``created_at`` string does not parse; names the bad field."""


def parse_timestamp(text: str) -> int:
    """Parse a Twitter v1 ``created_at`` string to UTC epoch seconds.

    The format is ``DOW Mon DD HH:MM:SS +ZZZZ YYYY``, e.g.
    ``"Wed Jan 07 11:06:08 +0000 2015"``.  The numeric zone offset is
    subtracted so the result is always UTC.
    """
    match = _TIMESTAMP_RE.match(text)
    if match is None:
        raise TimestampParseError(f"timestamp {text!r}: does not match DOW Mon DD HH:MM:SS +ZZZZ YYYY")
    if match["dow"] not in _DOW:
        raise TimestampParseError(f"timestamp {text!r}: bad day-of-week field {match['dow']!r}")
    month = _MONTH_NUM.get(match["mon"])
    if month is None:
        raise TimestampParseError(f"timestamp {text!r}: bad month field {match['mon']!r}")
    year = int(match["year"])
    day = int(match["day"])
    days_in_month = calendar.monthrange(year, month)[1]
    if not 1 <= day <= days_in_month:
        raise TimestampParseError(f"timestamp {text!r}: bad day-of-month field {match['day']!r}")
    hh, mm, ss = int(match["hh"]), int(match["mm"]), int(match["ss"])
    if hh > 23:
        raise TimestampParseError(f"timestamp {text!r}: bad hour field {match['hh']!r}")
    if mm > 59:
        raise TimestampParseError(f"timestamp {text!r}: bad minute field {match['mm']!r}")
    if ss > 59:
        raise TimestampParseError(f"timestamp {text!r}: bad second field {match['ss']!r}")
    tzh, tzm = int(match["tzh"]), int(match["tzm"])
    if tzm > 59:
        raise TimestampParseError(f"timestamp {text!r}: bad zone-offset field {match['sign']}{match['tzh']}{match['tzm']!r}")
    offset = tzh * 3600 + tzm * 60
    if match["sign"] == "-":
        offset = -offset
    local = calendar.timegm((year, month, day, hh, mm, ss, 0, 0, 0))
    return local - offset


def format_timestamp(epoch: int) -> str:
    """Inverse of :func:`parse_timestamp` for UTC instants (zone ``+0000``)."""
    tm = time.gmtime(epoch)
    return (
        f"{_DOW[tm.tm_wday]} {_MONTHS[tm.tm_mon - 1]} {tm.tm_mday:02d} "
        f"{tm.tm_hour:02d}:{tm.tm_min:02d}:{tm.tm_sec:02d} +0000 {tm.tm_year}"
    )


@dataclass(frozen=True)
class Conversation:
    """One source post plus the timestamps of all reactions to it.

    ``label`` is 0 for non-rumour and 1 for rumour.  Times are UTC epoch
    seconds.  ``reaction_times`` may be empty and carries no ordering
    guarantee on input.
    """

    id: str
    event: str
    label: int
    source_time: int
    reaction_times: tuple[int, ...]

    def __post_init__(self) -> None:
        if self.label not in (0, 1):
            raise ValueError(f"label must be 0 or 1, got {self.label}")
        if self.source_time <= 0:
            raise ValueError("source_time must be positive")
        if any(t <= 0 for t in self.reaction_times):
            raise ValueError("reaction times must be positive")


@dataclass(frozen=True)
class RawDataset:
    conversations: tuple[Conversation, ...]
    events: tuple[str, ...]

    def __post_init__(self) -> None:
        known = set(self.events)
        ids = set()
        for conv in self.conversations:
            if conv.event not in known:
                raise ValueError(f"conversation {conv.id} has unknown event {conv.event!r}")
            if conv.id in ids:
                raise ValueError(f"duplicate conversation id {conv.id!r}")
            ids.add(conv.id)


@dataclass
class LoadSummary:
    """Bookkeeping emitted alongside a loaded dataset (JSON-serializable)."""

    counts: dict[str, dict[str, int]] = field(default_factory=dict)
    skipped_events: list[str] = field(default_factory=list)
    errors: list[dict[str, str]] = field(default_factory=list)
    warnings: list[dict[str, str]] = field(default_factory=list)

    def add_count(self, event: str, label: int) -> None:
        row = self.counts.setdefault(event, {"rumours": 0, "non-rumours": 0})
        row["rumours" if label == 1 else "non-rumours"] += 1

    def to_json(self) -> str:
        return json.dumps(
            {
                "counts": self.counts,
                "skipped_events": self.skipped_events,
                "errors": self.errors,
                "warnings": self.warnings,
            },
            indent=2,
            sort_keys=True,
        )


def validate_conversation(conv: Conversation) -> list[str]:
    """Return warnings for suspicious timestamps; never mutates."""
    warnings = []
    for t in conv.reaction_times:
        if t < conv.source_time:
            warnings.append(f"reaction precedes source by {conv.source_time - t} s")
    seen: set[int] = set()
    flagged: set[int] = set()
    for t in conv.reaction_times:
        if t in seen and t not in flagged:
            warnings.append(f"duplicate reaction timestamp {t}")
            flagged.add(t)
        seen.add(t)
    return warnings


def normalize_event_name(name: str) -> str:
    """Strip the ``-all-rnr-threads`` suffix used by some dataset releases."""
    suffix = "-all-rnr-threads"
    return name[: -len(suffix)] if name.endswith(suffix) else name


def _read_created_at(path: Path) -> int:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except (OSError, UnicodeDecodeError, json.JSONDecodeError) as exc:
        raise DataError(f"unreadable tweet file {path}: {exc}") from exc
    created = obj.get("created_at")
    if not isinstance(created, str):
        raise DataError(f"tweet file {path} has no created_at field")
    return parse_timestamp(created)


def _load_conversation(conv_dir: Path, event: str, label: int,
                       summary: LoadSummary) -> Conversation:
    source_dir = conv_dir / "source-tweets"
    sources = sorted(source_dir.glob("*.json")) if source_dir.is_dir() else []
    if not sources:
        raise DataError(f"conversation {conv_dir.name}: missing source post")
    if len(sources) > 1:
        named = source_dir / f"{conv_dir.name}.json"
        if named not in sources:
            raise DataError(f"conversation {conv_dir.name}: ambiguous source post")
        sources = [named]
    source_time = _read_created_at(sources[0])

    reactions = []
    reactions_dir = conv_dir / "reactions"
    if reactions_dir.is_dir():
        for path in sorted(reactions_dir.glob("*.json")):
            reactions.append(_read_created_at(path))
    # Reactions stamped before the source cannot fall in any interval; drop
    # them here so downstream counts stay non-negative.
    early = [t for t in reactions if t < source_time]
    if early:
        summary.warnings.append({
            "conversation": conv_dir.name,
            "event": event,
            "reason": f"dropped {len(early)} reaction(s) earlier than the source post",
        })
        reactions = [t for t in reactions if t >= source_time]
    return Conversation(
        id=conv_dir.name,
        event=event,
        label=label,
        source_time=source_time,
        reaction_times=tuple(sorted(reactions)),
    )


def load_dataset(root: str | Path,
                 events: list[str] | tuple[str, ...] | None = None,
                 ) -> tuple[RawDataset, LoadSummary]:
    """Load every conversation under ``root`` for the requested events.

    With ``events=None`` every event directory is loaded except the two
    excluded by default (on a full nine-event tree that leaves the seven
    retained events); an explicit list loads exactly those events, excluded
    ones included.  Skipped events are listed in the summary.  Conversations
    with a missing source post or an unreadable file are dropped and recorded
    as per-conversation errors; an empty or event-less root is fatal.
    """
    root = Path(root)
    if not root.is_dir():
        raise DataError(f"dataset root {root} is not a directory")
    wanted: set[str] | None = None
    if events is not None:
        if not events:
            raise DataError("empty event filter")
        wanted = {normalize_event_name(e) for e in events}
    excluded = set(EXCLUDED_EVENTS)

    summary = LoadSummary()
    conversations: list[Conversation] = []
    seen_ids: set[str] = set()
    event_dirs = sorted(p for p in root.iterdir() if p.is_dir())
    if not event_dirs:
        raise DataError(f"dataset root {root} contains no event directories")

    matched = set()
    for event_dir in event_dirs:
        event = normalize_event_name(event_dir.name)
        skip = event not in wanted if wanted is not None else event in excluded
        if skip:
            summary.skipped_events.append(event)
            continue
        matched.add(event)
        for branch, label in (("non-rumours", 0), ("rumours", 1)):
            branch_dir = event_dir / branch
            if not branch_dir.is_dir():
                continue
            for conv_dir in sorted(p for p in branch_dir.iterdir() if p.is_dir()):
                if conv_dir.name in seen_ids:
                    summary.errors.append({
                        "conversation": conv_dir.name, "event": event,
                        "reason": "duplicate conversation id",
                    })
                    continue
                try:
                    conv = _load_conversation(conv_dir, event, label, summary)
                except DataError as exc:
                    summary.errors.append({
                        "conversation": conv_dir.name, "event": event,
                        "reason": str(exc),
                    })
                    continue
                seen_ids.add(conv.id)
                conversations.append(conv)
                summary.add_count(event, label)

    if not matched:
        raise DataError(
            f"no requested event found under {root} "
            f"(requested: {', '.join(sorted(wanted))})"
        )
    conversations.sort(key=lambda c: (c.event, c.id))
    dataset = RawDataset(
        conversations=tuple(conversations),
        events=tuple(sorted({c.event for c in conversations})),
    )
    return dataset, summary
