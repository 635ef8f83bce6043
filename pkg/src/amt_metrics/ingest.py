"""Reading note lists from Standard MIDI Files and plain-text note files.

Text format, one note per line::

    # onset offset pitch [velocity]
    0.00  0.50  60  80
    0.50, 1.00, 62, 75

Fields are separated by whitespace and/or commas; ``#`` starts a comment.
"""
from __future__ import annotations

import bisect
import logging
import math
import os
import re
import struct
from dataclasses import dataclass, field

from .model import (OUTPUT, PITCH_MAX, PITCH_MIN, TARGET, Note, NoteList,
                    PedalEvent)

logger = logging.getLogger(__name__)

DEFAULT_TEMPO = 500000  # microseconds per quarter note, i.e. 120 BPM
SUSTAIN_CC = 64

MIDI_EXTENSIONS = (".mid", ".midi", ".smf")
TEXT_EXTENSIONS = (".txt", ".csv", ".tsv", ".notes")


class MidiParseError(ValueError):
    """Malformed SMF data; ``offset`` is the byte position of the problem."""

    def __init__(self, message, offset=None):
        self.offset = offset
        if offset is not None:
            message = f"{message} (at byte {offset})"
        super().__init__(message)


class NoteTextError(ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


# ---------------------------------------------------------------------------
# Standard MIDI Files


@dataclass
class MidiEvent:
    tick: int
    kind: str  # note_on, note_off, control, tempo
    channel: int = 0
    data1: int = 0
    data2: int = 0
    track: int = 0
    order: int = 0


@dataclass
class SmfDocument:
    format: int
    division: int
    tracks: list = field(default_factory=list)
    track_ends: list = field(default_factory=list)

    @property
    def smpte(self) -> bool:
        return bool(self.division & 0x8000)


# data bytes following each channel status nibble
_CHANNEL_DATA_LEN = {0x80: 2, 0x90: 2, 0xA0: 2, 0xB0: 2, 0xC0: 1, 0xD0: 1, 0xE0: 2}


class _Reader:
    def __init__(self, data: bytes, pos: int, end: int):
        self.data = data
        self.pos = pos
        self.end = end

    def byte(self) -> int:
        if self.pos >= self.end:
            raise MidiParseError("unexpected end of track data", self.pos)
        b = self.data[self.pos]
        self.pos += 1
        return b

    def take(self, n: int) -> bytes:
        if self.pos + n > self.end:
            raise MidiParseError(f"truncated event, needed {n} bytes", self.pos)
        chunk = self.data[self.pos:self.pos + n]
        self.pos += n
        return chunk

    def varlen(self) -> int:
        start = self.pos
        value = 0
        for _ in range(4):
            b = self.byte()
            value = (value << 7) | (b & 0x7F)
            if not b & 0x80:
                return value
        raise MidiParseError("variable-length quantity longer than 4 bytes", start)


def _parse_track(data: bytes, start: int, end: int, track: int):
    rd = _Reader(data, start, end)
    events = []
    tick = 0
    status = None
    while rd.pos < rd.end:
        tick += rd.varlen()
        here = rd.pos
        first = rd.byte()
        if first == 0xFF:
            meta = rd.byte()
            payload = rd.take(rd.varlen())
            if meta == 0x51:
                if len(payload) != 3:
                    raise MidiParseError("tempo meta event must carry 3 bytes", here)
                tempo = int.from_bytes(payload, "big")
                if tempo == 0:
                    raise MidiParseError("zero tempo", here)
                events.append(MidiEvent(tick, "tempo", data1=tempo, track=track))
            elif meta == 0x2F:
                return events, tick
            continue
        if first in (0xF0, 0xF7):
            rd.take(rd.varlen())
            continue
        if first & 0x80:
            if first >= 0xF0:
                raise MidiParseError(f"unsupported system message 0x{first:02X}", here)
            status = first
            values = rd.take(_CHANNEL_DATA_LEN[status & 0xF0])
        else:
            if status is None:
                raise MidiParseError("data byte without running status", here)
            values = bytes([first]) + rd.take(_CHANNEL_DATA_LEN[status & 0xF0] - 1)
        if any(v & 0x80 for v in values):
            raise MidiParseError("status byte where a data byte was expected", here)
        kind = status & 0xF0
        channel = status & 0x0F
        if kind == 0x90 and values[1] > 0:
            events.append(MidiEvent(tick, "note_on", channel, values[0], values[1], track))
        elif kind == 0x80 or kind == 0x90:
            events.append(MidiEvent(tick, "note_off", channel, values[0], 0, track))
        elif kind == 0xB0:
            events.append(MidiEvent(tick, "control", channel, values[0], values[1], track))
    logger.warning("track %d has no end-of-track event", track)
    return events, tick


def read_smf(data: bytes) -> SmfDocument:
    """Split an SMF byte string into header fields and per-track event lists."""
    if len(data) < 14 or data[:4] != b"MThd":
        raise MidiParseError("missing MThd header", 0)
    (length,) = struct.unpack(">I", data[4:8])
    if length != 6:
        raise MidiParseError(f"MThd length is {length}, expected 6", 4)
    fmt, ntracks, division = struct.unpack(">HHH", data[8:14])
    if fmt not in (0, 1):
        raise MidiParseError(f"unsupported SMF format {fmt}", 8)
    if division == 0:
        raise MidiParseError("zero time division", 12)
    doc = SmfDocument(fmt, division)
    pos = 14
    while pos < len(data):
        if pos + 8 > len(data):
            raise MidiParseError("truncated chunk header", pos)
        kind = data[pos:pos + 4]
        (length,) = struct.unpack(">I", data[pos + 4:pos + 8])
        body = pos + 8
        if body + length > len(data):
            raise MidiParseError(f"chunk {kind!r} truncated", pos)
        if kind == b"MTrk":
            events, end_tick = _parse_track(data, body, body + length, len(doc.tracks))
            doc.tracks.append(events)
            doc.track_ends.append(end_tick)
        pos = body + length
    if len(doc.tracks) != ntracks:
        logger.warning("header announces %d tracks, found %d", ntracks, len(doc.tracks))
    return doc


class _TickClock:
    """Tick to seconds conversion through a piecewise-constant tempo map."""

    def __init__(self, doc: SmfDocument):
        self.smpte = doc.smpte
        if self.smpte:
            fps = 256 - (doc.division >> 8)  # stored as a negative byte
            fps = 29.97 if fps == 29 else fps
            self.seconds_per_tick = 1.0 / (fps * (doc.division & 0xFF))
            return
        self.tpq = doc.division
        changes = sorted((e.tick, e.data1) for track in doc.tracks for e in track
                         if e.kind == "tempo")
        ticks, tempos, seconds = [0], [DEFAULT_TEMPO], [0.0]
        for tick, tempo in changes:
            seconds.append(seconds[-1] + (tick - ticks[-1]) * tempos[-1] / (1e6 * self.tpq))
            ticks.append(tick)
            tempos.append(tempo)
        self.ticks, self.tempos, self.seconds = ticks, tempos, seconds

    def __call__(self, tick: int) -> float:
        if self.smpte:
            return tick * self.seconds_per_tick
        k = bisect.bisect_right(self.ticks, tick) - 1
        return self.seconds[k] + (tick - self.ticks[k]) * self.tempos[k] / (1e6 * self.tpq)

    def tick_length(self, tick: int) -> float:
        return self(tick + 1) - self(tick)


def parse_smf(data: bytes, role: str = TARGET) -> NoteList:
    """Parse a type-0 or type-1 Standard MIDI File into a NoteList.

    All tracks and channels are merged.  A note-on with velocity 0 is a
    note-off; at equal ticks note-offs are handled before note-ons.  A
    note-on for a key that is already down closes the sounding note first.
    Notes still open at the end of their track are closed there.  Sustain
    controller (CC64) events become pedal events.

    Raises
    ------
    MidiParseError
        on malformed or truncated data, or a note outside the piano range.
    """
    doc = read_smf(data)
    clock = _TickClock(doc)

    events = [e for track in doc.tracks for e in track if e.kind != "tempo"]
    for i, e in enumerate(events):
        e.order = i
    events.sort(key=lambda e: (e.tick, 0 if e.kind == "note_off" else 1, e.order))

    open_notes: dict = {}
    spans = []
    pedal = []

    def close(key, end_tick):
        start_tick, velocity = open_notes.pop(key)
        spans.append((start_tick, end_tick, key[2], velocity))

    for e in events:
        key = (e.track, e.channel, e.data1)
        if e.kind == "note_on":
            if key in open_notes:
                close(key, e.tick)
            open_notes[key] = (e.tick, e.data2)
        elif e.kind == "note_off":
            if key in open_notes:
                close(key, e.tick)
            else:
                logger.warning("note-off without note-on: pitch %d at tick %d",
                               e.data1, e.tick)
        elif e.kind == "control" and e.data1 == SUSTAIN_CC:
            pedal.append(PedalEvent(clock(e.tick), e.data2))
    for key in list(open_notes):
        close(key, doc.track_ends[key[0]])

    notes = []
    for start_tick, end_tick, pitch, velocity in spans:
        if not PITCH_MIN <= pitch <= PITCH_MAX:
            raise MidiParseError(
                f"note pitch {pitch} at tick {start_tick} outside piano range "
                f"[{PITCH_MIN}, {PITCH_MAX}]")
        onset, offset = clock(start_tick), clock(end_tick)
        if offset <= onset:
            offset = onset + clock.tick_length(start_tick)
        notes.append(Note(onset, offset, pitch, velocity))
    return NoteList(tuple(notes), tuple(pedal), role)


# ---------------------------------------------------------------------------
# Text note lists

_SPLIT = re.compile(r"[,\s]+")


def _number(token, what, line):
    try:
        value = float(token)
    except ValueError:
        raise NoteTextError(f"{what} {token!r} is not a number", line) from None
    if not math.isfinite(value):
        raise NoteTextError(f"{what} {token!r} is not finite", line)
    return value


def _integer(token, what, line):
    value = _number(token, what, line)
    if value != int(value):
        raise NoteTextError(f"{what} {token!r} is not an integer", line)
    return int(value)


def parse_notes_line(line_text: str, line: int = 1, require_velocity: bool = False):
    """Parse one record; returns a Note, or None for blank/comment lines."""
    body = line_text.split("#", 1)[0].strip().strip(",")
    if not body:
        return None
    fields = _SPLIT.split(body)
    if len(fields) not in (3, 4):
        raise NoteTextError(
            f"expected 'onset offset pitch [velocity]', got {len(fields)} fields", line)
    onset = _number(fields[0], "onset", line)
    offset = _number(fields[1], "offset", line)
    pitch = _integer(fields[2], "pitch", line)
    velocity = _integer(fields[3], "velocity", line) if len(fields) == 4 else None
    if onset < 0:
        raise NoteTextError(f"negative onset {onset}", line)
    if offset <= onset:
        raise NoteTextError(f"offset {offset} is not after onset {onset}", line)
    if not PITCH_MIN <= pitch <= PITCH_MAX:
        raise NoteTextError(
            f"pitch {pitch} outside piano range [{PITCH_MIN}, {PITCH_MAX}]", line)
    if velocity is not None and not 1 <= velocity <= 127:
        raise NoteTextError(f"velocity {velocity} outside [1, 127]", line)
    if require_velocity and velocity is None:
        raise NoteTextError("target notes need a velocity column", line)
    return Note(onset, offset, pitch, velocity)


def parse_notes_text(text: str, role: str = OUTPUT, require_velocity=None) -> NoteList:
    """Parse the plain-text note format.

    ``require_velocity`` defaults to ``role == "target"``.
    """
    if require_velocity is None:
        require_velocity = role == TARGET
    notes = []
    for number, raw in enumerate(text.splitlines(), start=1):
        note = parse_notes_line(raw, number, require_velocity)
        if note is not None:
            notes.append(note)
    return NoteList(tuple(notes), (), role)


def format_notes_text(notes: NoteList) -> str:
    lines = []
    for n in notes:
        row = f"{n.onset!r} {n.offset!r} {n.pitch}"
        if n.velocity is not None:
            row += f" {n.velocity}"
        lines.append(row)
    return "\n".join(lines) + ("\n" if lines else "")


def load_notes(path, role: str = OUTPUT, require_velocity=None) -> NoteList:
    """Load a note file, choosing the parser from the file extension."""
    ext = os.path.splitext(str(path))[1].lower()
    if ext in MIDI_EXTENSIONS:
        with open(path, "rb") as fh:
            return parse_smf(fh.read(), role)
    if ext in TEXT_EXTENSIONS:
        with open(path, encoding="utf-8") as fh:
            return parse_notes_text(fh.read(), role, require_velocity)
    raise ValueError(f"cannot tell the format of {path!s} from its extension")
