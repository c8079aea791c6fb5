"""Line-delimited transcript files.

One JSON object per protocol stage, keys always in this order::

    trial, mode, resource, chi, stage, index, labels, dim, amplitudes,
    reduced, outcome, bits, correction, fidelity

* ``chi`` and ``amplitudes`` are lists of ``[re, im]`` pairs, amplitudes in
  register index order (leftmost label = most significant bit).
* ``reduced`` maps each label (register order) to its 2x2 reduced density
  matrix as rows of ``[re, im]`` pairs.
* ``outcome``/``bits`` are null until a Bell outcome exists; ``correction``
  is set on the last stage only; ``fidelity`` is Bob's fidelity with
  ``chi`` at that stage.
* Every real number is rounded to 15 significant digits and written with
  exactly 15 digits after the decimal point, so files are byte-comparable.
"""
from __future__ import annotations

import io
import json
from typing import Iterable, TextIO

import numpy as np

from .qcore import DensityOperator, StateVector
from .teleport import Stage, TeleportTranscript, UnknownState

DIGITS = 15
SUMMARY_COLUMNS = ("trial", "mode", "resource", "alpha_re", "alpha_im", "beta_re", "beta_im",
                   "outcome", "bits", "correction", "fidelity")


def fmt_float(x: float, digits: int = DIGITS) -> str:
    """Round to ``digits`` significant digits, print with ``digits`` decimals."""
    s = f"{float(f'{float(x):.{digits}g}'):.{digits}f}"
    if s.startswith("-") and set(s[1:]) <= {"0", "."}:
        s = s[1:]
    return s


def _complex(z: complex) -> str:
    return f"[{fmt_float(z.real)},{fmt_float(z.imag)}]"


def _vector(v) -> str:
    return "[" + ",".join(_complex(complex(z)) for z in v) + "]"


def _matrix(m) -> str:
    return "[" + ",".join(_vector(row) for row in m) + "]"


def _str_or_null(s) -> str:
    return "null" if s is None else json.dumps(s)


def stage_record(t: TeleportTranscript, stage_index: int, trial: int = 0) -> str:
    s = t.stages[stage_index]
    last = stage_index == len(t.stages) - 1
    bits = None
    if s.outcome is not None:
        bits = {"phi+": "00", "phi-": "01", "psi+": "10", "psi-": "11"}[s.outcome]
    reduced = "{" + ",".join(f"{json.dumps(lab)}:{_matrix(s.reduced[lab].matrix)}"
                             for lab in s.state.labels) + "}"
    parts = [
        f'"trial":{int(trial)}',
        f'"mode":{json.dumps(t.mode)}',
        f'"resource":{json.dumps(t.resource)}',
        f'"chi":{_vector(t.chi.vector)}',
        f'"stage":{json.dumps(s.name)}',
        f'"index":{stage_index}',
        f'"labels":{json.dumps(list(s.state.labels), separators=(",", ":"))}',
        f'"dim":{s.state.dim}',
        f'"amplitudes":{_vector(s.state.amplitudes)}',
        f'"reduced":{reduced}',
        f'"outcome":{_str_or_null(s.outcome)}',
        f'"bits":{_str_or_null(bits)}',
        f'"correction":{_str_or_null(t.correction if last else None)}',
        f'"fidelity":{fmt_float(s.bob_fidelity)}',
    ]
    return "{" + ",".join(parts) + "}"


def dump(transcripts: Iterable[TeleportTranscript], fh: TextIO, first_trial: int = 0) -> None:
    for trial, t in enumerate(transcripts, start=first_trial):
        for i in range(len(t.stages)):
            fh.write(stage_record(t, i, trial) + "\n")


def dumps(transcripts: Iterable[TeleportTranscript], first_trial: int = 0) -> str:
    buf = io.StringIO()
    dump(transcripts, buf, first_trial)
    return buf.getvalue()


def _parse_vector(pairs) -> np.ndarray:
    return np.array([complex(re, im) for re, im in pairs], dtype=complex)


def _parse_matrix(rows) -> np.ndarray:
    return np.array([[complex(re, im) for re, im in row] for row in rows], dtype=complex)


def load(fh: TextIO) -> list[TeleportTranscript]:
    """Re-read transcripts written by :func:`dump` (grouped by trial)."""
    grouped: dict[int, list[dict]] = {}
    for line in fh:
        line = line.strip()
        if line:
            rec = json.loads(line)
            grouped.setdefault(rec["trial"], []).append(rec)
    out = []
    for trial in grouped:
        recs = sorted(grouped[trial], key=lambda r: r["index"])
        # 15-digit values are within tolerance of unit norm; keep them verbatim
        chi = UnknownState(*_parse_vector(recs[0]["chi"]))
        stages = []
        for r in recs:
            labels = tuple(r["labels"])
            state = StateVector(_parse_vector(r["amplitudes"]), labels)
            reduced = {lab: DensityOperator(_parse_matrix(m), (lab,)) for lab, m in r["reduced"].items()}
            stages.append(Stage(r["stage"], state, reduced, float(r["fidelity"]), r["outcome"]))
        last = recs[-1]
        out.append(TeleportTranscript(last["mode"], chi, last["resource"], tuple(stages),
                                      last["outcome"], last["bits"], last["correction"],
                                      float(last["fidelity"])))
    return out


def loads(text: str) -> list[TeleportTranscript]:
    return load(io.StringIO(text))


def summary_row(t: TeleportTranscript, trial: int) -> list[str]:
    a, b = t.chi.alpha, t.chi.beta
    return [str(trial), t.mode, t.resource, fmt_float(a.real), fmt_float(a.imag),
            fmt_float(b.real), fmt_float(b.imag), t.outcome or "", t.bits or "",
            t.correction or "", fmt_float(t.fidelity)]
